"""Callers, similar functions and similar fragments; four-view bundling."""

from __future__ import annotations

import textwrap
from dataclasses import dataclass, field
from pathlib import PurePosixPath
from typing import Callable

import numpy as np

from .embedding import cosine_many
from .graph import RSSG, Entity, Relation, TargetSpec
from .source_model import FUNCTION, Fragment

CALLERS = "callers"
CHAINS = "chains"
SIM_FUNCTIONS = "sim_functions"
SIM_FRAGMENTS = "sim_fragments"
VIEWS = (CALLERS, CHAINS, SIM_FUNCTIONS, SIM_FRAGMENTS)


def count_tokens(text: str) -> int:
    """Default tokenizer: ``ceil(utf8_bytes / 4)``."""
    n = len(text.encode("utf-8"))
    return (n + 3) // 4


Tokenizer = Callable[[str], int]


@dataclass(frozen=True)
class ContextUnit:
    view: str
    payload: str
    rank: int
    token_len: int
    entity: int | None = None
    score: float | None = None

    def to_json(self) -> dict:
        return {"view": self.view, "rank": self.rank, "token_len": self.token_len,
                "score": self.score, "payload": self.payload}


def make_unit(view: str, payload: str, rank: int, tokenizer: Tokenizer = count_tokens,
              entity: int | None = None, score: float | None = None) -> ContextUnit:
    return ContextUnit(view, payload, rank, tokenizer(payload), entity, score)


@dataclass
class FourViewContext:
    target: TargetSpec
    callers: list[ContextUnit] = field(default_factory=list)
    chains: list[ContextUnit] = field(default_factory=list)
    sim_functions: list[ContextUnit] = field(default_factory=list)
    sim_fragments: list[ContextUnit] = field(default_factory=list)

    def view(self, name: str) -> list[ContextUnit]:
        return getattr(self, name)

    def to_json(self) -> dict:
        return {name: [u.to_json() for u in self.view(name)] for name in VIEWS}


# --------------------------------------------------------------------------
# payload rendering
# --------------------------------------------------------------------------

def entity_source(entity: Entity, sources: dict[str, str]) -> str:
    src = sources.get(entity.file)
    if src is None:
        return entity.signature
    lines = src.splitlines()
    start, end = entity.line_span
    return textwrap.dedent("\n".join(lines[start - 1:end]))


def function_header(graph: RSSG, eid: int) -> str:
    ent = graph[eid]
    owner = graph.contains_parent(eid)
    header = f"# filepath: {ent.file}"
    if owner is not None:
        header += f", owning class: {graph[owner].name}"
    return header


def function_payload(graph: RSSG, eid: int, sources: dict[str, str]) -> str:
    return f"{function_header(graph, eid)}\n{entity_source(graph[eid], sources)}\n\n"


def fragment_payload(fragment: Fragment) -> str:
    return f"# {fragment.path}\n{fragment.text}\n\n"


# --------------------------------------------------------------------------
# callers
# --------------------------------------------------------------------------

def tree_distance(a: str, b: str) -> int:
    """Edges between two files in the directory tree."""
    pa = PurePosixPath(a).parts
    pb = PurePosixPath(b).parts
    common = 0
    for x, y in zip(pa, pb):
        if x != y:
            break
        common += 1
    if pa == pb:
        return 0
    return (len(pa) - common) + (len(pb) - common)


def entity_distance(a: Entity, f: Entity | TargetSpec) -> tuple:
    """Ordering key: same file first (by line gap), then by tree distance."""
    f_file = f.file
    f_line = f.line_span[0] if isinstance(f, Entity) else None
    same = a.file == f_file
    line_gap = abs(a.line_span[0] - f_line) if (same and f_line is not None) else 0
    return (0 if same else 1, 0 if same else tree_distance(a.file, f_file), line_gap, a.file, a.line_span[0], a.path)


def retrieve_callers(graph: RSSG, f: int, k: int, sources: dict[str, str],
                     tokenizer: Tokenizer = count_tokens) -> list[ContextUnit]:
    target = graph[f]
    heads = {h for h in graph.predecessors(f, Relation.CALLS) if graph[h].kind == FUNCTION and h != f}
    ranked = sorted(heads, key=lambda h: entity_distance(graph[h], target))[:max(k, 0)]
    return [make_unit(CALLERS, function_payload(graph, h, sources), i, tokenizer, entity=h)
            for i, h in enumerate(ranked)]


# --------------------------------------------------------------------------
# similarity views
# --------------------------------------------------------------------------

def retrieve_similar_functions(graph: RSSG, f: int, k: int, sources: dict[str, str],
                               tokenizer: Tokenizer = count_tokens,
                               query: np.ndarray | None = None) -> list[ContextUnit]:
    if k <= 0 or graph.embeddings is None:
        return []
    q = graph.embeddings[f] if query is None else query
    sims = cosine_many(q, graph.embeddings)
    candidates = [e.id for e in graph.entities if e.kind == FUNCTION and e.id != f]
    ranked = sorted(candidates, key=lambda e: (-sims[e], graph[e].path))[:k]
    return [make_unit(SIM_FUNCTIONS, function_payload(graph, e, sources), i, tokenizer,
                      entity=e, score=float(sims[e]))
            for i, e in enumerate(ranked)]


def _overlaps(fragment: Fragment, target: Entity | None) -> bool:
    if target is None or fragment.path != target.file:
        return False
    start, end = target.line_span
    return fragment.start_line <= end and fragment.end_line >= start


def retrieve_similar_fragments(fragments: list[Fragment], vectors: np.ndarray | None,
                               query: np.ndarray, k: int, target: Entity | None = None,
                               tokenizer: Tokenizer = count_tokens) -> list[ContextUnit]:
    if k <= 0 or not fragments or vectors is None:
        return []
    sims = cosine_many(query, vectors)
    idx = [i for i, fr in enumerate(fragments) if not _overlaps(fr, target)]
    idx.sort(key=lambda i: (-sims[i], fragments[i].path, fragments[i].start_line))
    return [make_unit(SIM_FRAGMENTS, fragment_payload(fragments[i]), rank, tokenizer,
                      score=float(sims[i]))
            for rank, i in enumerate(idx[:k])]


def assemble_four_views(target: TargetSpec, callers, chains, sim_functions, sim_fragments) -> FourViewContext:
    return FourViewContext(target, list(callers), list(chains), list(sim_functions), list(sim_fragments))
