"""Structure-preserving serialization, budget allocation and prompt layout."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .chains import CallChain
from .graph import RSSG, Relation, TargetSpec
from .retrieval import (
    CALLERS,
    CHAINS,
    SIM_FRAGMENTS,
    SIM_FUNCTIONS,
    ContextUnit,
    FourViewContext,
    Tokenizer,
    count_tokens,
    make_unit,
)
from .source_model import ATTRIBUTE, CLASS, FUNCTION

INDENT = "    "
DEFAULT_PRIORITY = (CHAINS, CALLERS, SIM_FUNCTIONS, SIM_FRAGMENTS)
PRIORITY_ALIASES = {
    "chains": CHAINS, "callers": CALLERS, "simfn": SIM_FUNCTIONS, "simfrag": SIM_FRAGMENTS,
    "sim_functions": SIM_FUNCTIONS, "sim_fragments": SIM_FRAGMENTS,
}

INSTRUCTION = ("You need to implement the function located at the end of the instruction "
               "based on relevant repository information.")
SECTION_TITLES = {
    SIM_FRAGMENTS: "1. Here are some relevant code fragments from the repo:",
    CALLERS: "2. Here are some functions in the repo that invoke the target function:",
    CHAINS: ("3. Here are some relevant classes, functions, or attributes in the repo "
             "that you might use in the target function:"),
    SIM_FUNCTIONS: "4. Here are some functions in the repo that are similar to the target function:",
}
SECTION_ORDER = (SIM_FRAGMENTS, CALLERS, CHAINS, SIM_FUNCTIONS)
TASK_TITLE = "Please implement the following function:"


def parse_priority(text: str | Sequence[str]) -> tuple[str, ...]:
    items = text.split(",") if isinstance(text, str) else list(text)
    out = []
    for item in items:
        key = item.strip()
        if key not in PRIORITY_ALIASES:
            raise ValueError(f"unknown context view in priority: {key!r}")
        out.append(PRIORITY_ALIASES[key])
    if sorted(out) != sorted(DEFAULT_PRIORITY):
        raise ValueError("priority must name each of the four views exactly once")
    return tuple(out)


# --------------------------------------------------------------------------
# structure tree
# --------------------------------------------------------------------------

@dataclass
class TreeNode:
    entity: int
    children: list["TreeNode"] = field(default_factory=list)


@dataclass
class StructureTree:
    roots: list[TreeNode] = field(default_factory=list)

    def walk(self):
        """Preorder ``(node, depth)`` pairs."""
        stack = [(n, 0) for n in reversed(self.roots)]
        while stack:
            node, depth = stack.pop()
            yield node, depth
            stack.extend((c, depth + 1) for c in reversed(node.children))

    def entities(self) -> list[int]:
        return [n.entity for n, _ in self.walk()]


def build_structure_tree(chains: Sequence[CallChain], graph: RSSG) -> StructureTree:
    order: list[int] = []
    for chain in chains:
        for e in chain.all_entities():
            if e not in order:
                order.append(e)
    present = set(order)
    nodes = {e: TreeNode(e) for e in order}
    tree = StructureTree()
    for e in order:
        parent = graph.contains_parent(e)
        if parent is not None and parent in present:
            nodes[parent].children.append(nodes[e])
        else:
            tree.roots.append(nodes[e])
    return tree


def _docstring_lines(doc: str, indent: str) -> list[str]:
    lines = doc.splitlines() or [""]
    if len(lines) == 1:
        return [f'{indent}"""{lines[0]}"""']
    out = [f'{indent}"""{lines[0]}']
    out.extend(f"{indent}{line}" if line else "" for line in lines[1:])
    out.append(f'{indent}"""')
    return out


def _entity_lines(graph: RSSG, node: TreeNode, depth: int) -> list[str]:
    ent = graph[node.entity]
    pad = INDENT * depth
    inner = INDENT * (depth + 1)
    if ent.kind == CLASS:
        lines = [f"{pad}class {ent.name}:"]
        if ent.docstring:
            lines += _docstring_lines(ent.docstring, inner)
        elif not node.children:
            lines.append(f"{inner}...")
        return lines
    if ent.kind == FUNCTION:
        sig = ent.signature.splitlines() or [f"def {ent.name}()"]
        lines = [f"{pad}{line}" for line in sig]
        lines[-1] += ":"
        if ent.docstring:
            lines += _docstring_lines(ent.docstring, inner)
        else:
            lines.append(f"{inner}...")
        return lines
    if ent.kind == ATTRIBUTE:
        if ent.signature:
            return [f"{pad}{ent.signature}"]
        # no annotation in source: fall back to the inferred type, if any
        types = sorted({graph[t].name for t in graph.successors(node.entity, Relation.RETURNS)})
        return [f"{pad}{ent.name}: {types[0]}" if len(types) == 1 else f"{pad}{ent.name}"]
    return [f"{pad}{ent.name}"]


def tree_lines(tree: StructureTree, graph: RSSG) -> list[tuple[int | None, int, str]]:
    """``(entity id, depth, text)`` per emitted line; separators carry ``None``."""
    out: list[tuple[int | None, int, str]] = []
    stack = [(n, 0, None) for n in reversed(tree.roots)]
    prev: int | None = None
    while stack:
        node, depth, parent = stack.pop()
        ent = graph[node.entity]
        if parent is None:
            if out:
                out.append((None, 0, ""))
            out.append((None, 0, f"# {ent.file}"))
        elif ent.kind in (FUNCTION, CLASS) or (prev != parent and graph[prev].kind != ATTRIBUTE):
            # separate definitions, and attributes that follow one
            out.append((None, depth, ""))
        for line in _entity_lines(graph, node, depth):
            out.append((node.entity, depth, line))
        prev = node.entity
        stack.extend((c, depth + 1, node.entity) for c in reversed(node.children))
    return out


def serialize_tree(tree: StructureTree, graph: RSSG) -> str:
    lines = tree_lines(tree, graph)
    if not lines:
        return ""
    return "\n".join(text for _, _, text in lines) + "\n"


def serialize_flat(chains: Sequence[CallChain], graph: RSSG) -> str:
    """Each chain entity in order, no hierarchy or dedup."""
    lines = []
    for chain in chains:
        for e in chain.all_entities():
            ent = graph[e]
            lines.append(f"# {ent.file}")
            lines.extend(_entity_lines(graph, TreeNode(e), 0))
            lines.append("")
    return "\n".join(lines)


def chain_units(chains: Sequence[CallChain], graph: RSSG, tokenizer: Tokenizer = count_tokens,
                structured: bool = True) -> list[ContextUnit]:
    units = []
    for i, chain in enumerate(chains):
        text = serialize_tree(build_structure_tree([chain], graph), graph) if structured \
            else serialize_flat([chain], graph)
        units.append(make_unit(CHAINS, text + "\n", i, tokenizer, score=chain.score))
    return units


# --------------------------------------------------------------------------
# budget allocation
# --------------------------------------------------------------------------

@dataclass
class PromptPlan:
    ell: int
    priority: tuple[str, ...]
    stage1_budget: int
    stage1: dict[str, int]
    allocations: dict[str, int]
    selected: dict[str, int]
    views: tuple[str, ...] = ()

    @property
    def used(self) -> int:
        return sum(self.allocations.values())

    def to_json(self) -> dict:
        return {
            "ell": self.ell, "priority": list(self.priority), "stage1_budget": self.stage1_budget,
            "stage1": self.stage1, "allocations": self.allocations, "selected": self.selected,
        }


def _fill(lengths: Sequence[int], budget: int) -> tuple[int, int]:
    """Longest ranked prefix fitting ``budget``: ``(count, tokens)``."""
    used = count = 0
    for n in lengths:
        if used + n > budget:
            break
        used += n
        count += 1
    return count, used


def allocate_budget(views: dict[str, Sequence[int]], ell: int,
                    priority: Sequence[str] | None = None) -> PromptPlan:
    """Two-stage allocation over per-view ranked unit token lengths."""
    if ell <= 0:
        raise ValueError("ell must be positive")
    names = tuple(views)
    priority = tuple(priority) if priority is not None else names
    if sorted(priority) != sorted(names):
        raise ValueError("priority must list every view exactly once")
    n = len(names)
    share = ell // n if n else 0
    selected: dict[str, int] = {}
    used: dict[str, int] = {}
    for name in names:
        selected[name], used[name] = _fill(views[name], share)
    stage1 = dict(used)
    for name in priority:
        grant = ell - sum(v for k, v in used.items() if k != name)
        selected[name], used[name] = _fill(views[name], grant)
    return PromptPlan(ell, priority, share, stage1, used, selected, names)


# --------------------------------------------------------------------------
# prompt composition
# --------------------------------------------------------------------------

def target_block(target: TargetSpec, graph: RSSG | None = None) -> str:
    header = f"# filepath: {target.file}"
    if target.owning_class is not None and graph is not None:
        header += f", owning class: {graph[target.owning_class].name}"
    sig = target.signature.splitlines() or ["def f()"]
    body = sig[:-1] + [sig[-1] + ":"]
    if target.docstring:
        body += _docstring_lines(target.docstring, INDENT)
    parts = []
    if target.local_context:
        parts.append(target.local_context.rstrip("\n") + "\n")
    parts.append("\n".join([header] + body))
    return "\n".join(parts) + "\n"


def _section(title: str, units: Sequence[ContextUnit], fence_empty: bool = False) -> str:
    if not units:
        return f"{title}\n\n```python\n\n```\n\n" if fence_empty else f"{title}\n\n"
    body = "".join(u.payload for u in units).rstrip("\n")
    return f"{title}\n\n```python\n{body}\n```\n\n"


def prompt_skeleton(target: TargetSpec, graph: RSSG | None = None) -> str:
    """Prompt with every section fenced but empty: the fixed overhead."""
    return _render({}, target, graph, fence_empty=True)


def _render(sections: dict[str, Sequence[ContextUnit]], target: TargetSpec, graph: RSSG | None,
            chain_block: str | None = None, fence_empty: bool = False) -> str:
    parts = [INSTRUCTION + "\n\n"]
    for view in SECTION_ORDER:
        units = list(sections.get(view, ()))
        if view == CHAINS and units and chain_block is not None:
            units = [make_unit(CHAINS, chain_block, 0)]
        parts.append(_section(SECTION_TITLES[view], units, fence_empty))
    parts.append(f"{TASK_TITLE}\n\n```python\n{target_block(target, graph)}```\n")
    return "".join(parts)


def plan_prompt(ctx: FourViewContext, ell: int, priority: Sequence[str] = DEFAULT_PRIORITY,
                graph: RSSG | None = None, tokenizer: Tokenizer = count_tokens) -> PromptPlan:
    """Allocate after subtracting the fixed instruction/target overhead."""
    overhead = tokenizer(prompt_skeleton(ctx.target, graph))
    budget = max(ell - overhead, 1)
    lengths = {v: [u.token_len for u in ctx.view(v)] for v in DEFAULT_PRIORITY}
    plan = allocate_budget(lengths, budget, priority)
    return plan


def compose_prompt(ctx: FourViewContext, plan: PromptPlan, target: TargetSpec | None = None,
                   graph: RSSG | None = None, chains: Sequence[CallChain] | None = None,
                   structured: bool = True) -> str:
    """Render the prompt with each view's selected prefix.

    When ``chains`` and ``graph`` are given, the selected chains are merged
    into one structure tree so shared entities appear once.
    """
    target = target or ctx.target
    sections = {v: ctx.view(v)[: plan.selected.get(v, 0)] for v in SECTION_ORDER}
    chain_block = None
    n_chains = plan.selected.get(CHAINS, 0)
    if chains is not None and graph is not None and n_chains and structured:
        chain_block = serialize_tree(build_structure_tree(list(chains)[:n_chains], graph), graph) + "\n"
    return _render(sections, target, graph, chain_block)
