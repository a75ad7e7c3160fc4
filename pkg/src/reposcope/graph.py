"""Repository Structural Semantic Graph: entities, typed relations, index I/O."""

from __future__ import annotations

import enum
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

import numpy as np

from .source_model import (
    ATTRIBUTE,
    CALL_MARK,
    CLASS,
    FUNCTION,
    FileModel,
    Fragment,
    RawDecl,
    annotation_names,
)

INDEX_VERSION = 1
VECTOR_MAGIC = b"RSSGVEC1"


class Relation(str, enum.Enum):
    CONTAINS = "Contains"
    RETURNS = "Returns"
    AS_PARAMETER = "AsParameter"
    INHERITS = "Inherits"
    CALLS = "Calls"
    IMPORTS = "Imports"


R_ST = frozenset({Relation.CONTAINS, Relation.RETURNS, Relation.AS_PARAMETER, Relation.INHERITS})
R_C = frozenset({Relation.CALLS})
R_I = frozenset({Relation.IMPORTS})

# relation -> (allowed head kinds, allowed tail kinds)
SCHEMA = {
    Relation.CONTAINS: ({CLASS}, {FUNCTION, ATTRIBUTE, CLASS}),
    Relation.RETURNS: ({FUNCTION, ATTRIBUTE}, {CLASS}),
    Relation.AS_PARAMETER: ({CLASS}, {FUNCTION}),
    Relation.INHERITS: ({CLASS}, {CLASS}),
    Relation.CALLS: ({FUNCTION}, {FUNCTION, ATTRIBUTE, CLASS}),
    Relation.IMPORTS: ({FUNCTION}, {CLASS, FUNCTION}),
}


class IndexError_(Exception):
    """Raised for unreadable, corrupt or version-mismatched index files."""


class TargetNotFound(KeyError):
    def __init__(self, target: str, suggestions: list[str]):
        super().__init__(target)
        self.target = target
        self.suggestions = suggestions

    def __str__(self):
        msg = f"target not found: {self.target}"
        if self.suggestions:
            msg += "; did you mean: " + ", ".join(self.suggestions)
        return msg


@dataclass(frozen=True)
class Entity:
    id: int
    kind: str
    name: str
    signature: str
    docstring: str
    path: str
    file: str
    qualified_name: str
    line_span: tuple[int, int]

    @property
    def owner_qualified_name(self) -> str:
        return self.qualified_name.rpartition(".")[0]


@dataclass(frozen=True, order=True)
class RelationTriple:
    head: int
    relation: Relation
    tail: int
    weight: int | None = None

    @property
    def key(self) -> tuple[int, str, int]:
        return (self.head, self.relation.value, self.tail)


@dataclass(frozen=True)
class TargetSpec:
    entity: int
    file: str
    qualified_name: str
    signature: str
    docstring: str
    owning_class: int | None
    local_context: str = ""


@dataclass
class BuildDiagnostics:
    unresolved_bases: int = 0
    unresolved_annotations: int = 0
    unresolved_call_sites: int = 0
    resolved_call_sites: int = 0
    resolved_references: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def entity_path(file: str, qualified_name: str) -> str:
    stem = str(PurePosixPath(file).with_suffix(""))
    return f"{stem}/{qualified_name.replace('.', '/')}"


class RSSG:
    """Entity table plus triples, with per-view adjacency lookups.

    Embeddings are kept in a dense ``(n_entities, dim)`` array indexed by
    entity id rather than on the (frozen) entities themselves.
    """

    def __init__(self, entities: list[Entity], triples: list[RelationTriple],
                 embeddings: np.ndarray | None = None):
        self.entities = list(entities)
        for i, e in enumerate(self.entities):
            if e.id != i:
                raise ValueError("entity ids must be dense and ordered")
        self.triples = sorted(triples, key=lambda t: t.key)
        self.embeddings = embeddings
        self.out: dict[Relation, dict[int, list[RelationTriple]]] = {r: defaultdict(list) for r in Relation}
        self.inc: dict[Relation, dict[int, list[RelationTriple]]] = {r: defaultdict(list) for r in Relation}
        for t in self.triples:
            self.out[t.relation][t.head].append(t)
            self.inc[t.relation][t.tail].append(t)
        self._by_path = {e.path: e.id for e in self.entities}
        self._by_target = {(e.file, e.qualified_name): e.id for e in self.entities}

    def __len__(self):
        return len(self.entities)

    def __getitem__(self, eid: int) -> Entity:
        return self.entities[eid]

    def triples_of(self, relations) -> list[RelationTriple]:
        return [t for t in self.triples if t.relation in relations]

    def outgoing(self, eid: int, relations=R_ST) -> list[RelationTriple]:
        out = []
        for r in relations:
            out.extend(self.out[r].get(eid, ()))
        return sorted(out, key=lambda t: (t.tail, t.relation.value))

    def successors(self, eid: int, relation: Relation) -> list[int]:
        return [t.tail for t in self.out[relation].get(eid, ())]

    def predecessors(self, eid: int, relation: Relation) -> list[int]:
        return [t.head for t in self.inc[relation].get(eid, ())]

    def contains_parent(self, eid: int) -> int | None:
        parents = self.predecessors(eid, Relation.CONTAINS)
        return min(parents) if parents else None

    def by_path(self, path: str) -> int | None:
        return self._by_path.get(path)

    def find(self, file: str, qualified_name: str) -> int:
        eid = self._by_target.get((file, qualified_name))
        if eid is None:
            import difflib

            names = [f"{f}:{q}" for f, q in self._by_target]
            wanted = f"{file}:{qualified_name}"
            raise TargetNotFound(wanted, difflib.get_close_matches(wanted, names, n=5, cutoff=0.5))
        return eid

    def without_calls_from(self, eid: int) -> "RSSG":
        """Copy with ``eid``'s outgoing Calls edges removed (body masking)."""
        kept = [t for t in self.triples if not (t.relation is Relation.CALLS and t.head == eid)]
        return RSSG(self.entities, kept, self.embeddings)

    @property
    def dim(self) -> int:
        return 0 if self.embeddings is None else int(self.embeddings.shape[1])


# --------------------------------------------------------------------------
# construction
# --------------------------------------------------------------------------

@dataclass
class _Scope:
    """Names visible at module level: entities and modules."""

    entities: dict[str, int] = field(default_factory=dict)
    modules: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class _Value:
    """A resolved chain element: an entity reference, an instance, or a module."""

    entity: int | None = None
    instance_of: int | None = None
    module: str | None = None
    implicit: bool = False
    hop: int | None = None


class _Builder:
    def __init__(self, files: list[FileModel]):
        self.files = files
        self.diag = BuildDiagnostics()
        self.entities: list[Entity] = []
        self.decl_of: dict[int, RawDecl] = {}
        self.file_of: dict[int, FileModel] = {}
        self.by_qname: dict[tuple[str, str], int] = {}
        self.modules: dict[str, FileModel] = {}
        self.module_symbols: dict[str, dict[str, int]] = defaultdict(dict)
        self.members: dict[int, dict[str, int]] = defaultdict(dict)
        self.bases: dict[int, list[int]] = defaultdict(list)
        self.scopes: dict[str, _Scope] = {}
        self.types: dict[int, int] = {}  # function/attribute -> class it yields
        self.triples: set[tuple[int, Relation, int]] = set()
        self.calls: Counter = Counter()

    # ------------------------------------------------------------------
    def run(self) -> RSSG:
        self._make_entities()
        for fm in self.files:
            self.scopes[fm.module_name] = self._module_scope(fm)
        self._structure()
        self._returns_and_params()
        self._imports()
        self._calls()
        triples = [RelationTriple(h, r, t) for h, r, t in self.triples]
        triples += [RelationTriple(h, Relation.CALLS, t, w) for (h, t), w in self.calls.items()]
        return RSSG(self.entities, triples)

    def _make_entities(self):
        order = []
        for fm in self.files:
            self.modules[fm.module_name] = fm
            for decl in fm.declarations:
                order.append((fm.path, decl.line_span[0], decl.qualified_name, fm, decl))
        order.sort(key=lambda x: x[:3])
        for i, (_, _, _, fm, decl) in enumerate(order):
            self.entities.append(Entity(
                id=i, kind=decl.kind, name=decl.name, signature=decl.signature_text,
                docstring=decl.docstring, path=entity_path(fm.path, decl.qualified_name),
                file=fm.path, qualified_name=decl.qualified_name, line_span=decl.line_span,
            ))
            self.decl_of[i] = decl
            self.file_of[i] = fm
            self.by_qname[(fm.module_name, decl.qualified_name)] = i
            if not decl.parent:
                self.module_symbols[fm.module_name][decl.name] = i

    def _find_module(self, dotted: str) -> str | None:
        if dotted in self.modules:
            return dotted
        # tolerate source roots such as ``src/``
        suffix = "." + dotted
        hits = sorted(m for m in self.modules if m.endswith(suffix))
        return hits[0] if hits else None

    def _module_scope(self, fm: FileModel) -> _Scope:
        scope = _Scope()
        for imp in fm.imports:
            if imp.source_module:
                mod = self._find_module(imp.source_module)
                if mod is None:
                    continue
                name = imp.alias or imp.imported_name
                eid = self.module_symbols[mod].get(imp.imported_name)
                if eid is not None:
                    scope.entities[name] = eid
                else:
                    sub = self._find_module(f"{imp.source_module}.{imp.imported_name}")
                    if sub is not None:
                        scope.modules[name] = sub
            else:
                if imp.alias:
                    mod = self._find_module(imp.imported_name)
                    if mod is not None:
                        scope.modules[imp.alias] = mod
                else:
                    # ``import a.b`` binds ``a``; walk it as a package prefix
                    scope.modules[imp.bound_name] = imp.bound_name
        # local definitions shadow imports
        scope.entities.update(self.module_symbols[fm.module_name])
        return scope

    # ------------------------------------------------------------------
    def _add(self, h: int, r: Relation, t: int):
        self.triples.add((h, r, t))

    def _structure(self):
        for eid, decl in self.decl_of.items():
            if decl.parent:
                pid = self.by_qname.get((self.file_of[eid].module_name, decl.parent))
                if pid is not None and self.entities[pid].kind == CLASS:
                    self._add(pid, Relation.CONTAINS, eid)
                    self.members[pid][decl.name] = eid
        for eid, decl in self.decl_of.items():
            if decl.kind != CLASS:
                continue
            module = self.file_of[eid].module_name
            for base in decl.base_class_names:
                target = self._resolve_dotted(module, base, owner=eid)
                if target is not None and self.entities[target].kind == CLASS and target != eid:
                    self._add(eid, Relation.INHERITS, target)
                    self.bases[eid].append(target)
                else:
                    self.diag.unresolved_bases += 1

    def _resolve_dotted(self, module: str, dotted: str, owner: int | None = None) -> int | None:
        """Resolve a dotted type/base name visible from ``module``."""
        parts = dotted.split(".")
        # names of sibling nested classes (e.g. annotations inside a class body)
        if owner is not None and len(parts) == 1:
            parent = self.decl_of[owner].parent
            while parent:
                pid = self.by_qname.get((module, parent))
                if pid is not None and parts[0] in self.members[pid]:
                    return self.members[pid][parts[0]]
                parent = parent.rpartition(".")[0]
        value = self._root(module, parts[0])
        for part in parts[1:]:
            if value is None:
                return None
            value = self._member(value, part)
        return value.entity if value is not None else None

    def _class_member(self, cls: int, name: str) -> int | None:
        seen = set()
        queue = [cls]
        while queue:
            c = queue.pop(0)
            if c in seen:
                continue
            seen.add(c)
            if name in self.members[c]:
                return self.members[c][name]
            queue.extend(self.bases[c])
        return None

    def _class_types(self, text: str, module: str, owner: int) -> list[int]:
        out = []
        for name in annotation_names(text):
            cid = self._resolve_dotted(module, name, owner=owner)
            if cid is not None and self.entities[cid].kind == CLASS:
                out.append(cid)
            else:
                self.diag.unresolved_annotations += 1
        return out

    def _returns_and_params(self):
        # annotations first, then value-based propagation
        for eid, decl in self.decl_of.items():
            module = self.file_of[eid].module_name
            if decl.kind == FUNCTION:
                ret = self._class_types(decl.return_annotation, module, eid)
                for cid in ret:
                    self._add(eid, Relation.RETURNS, cid)
                if ret:
                    self.types[eid] = ret[0]
                for _, ann in decl.param_annotations:
                    for cid in self._class_types(ann, module, eid):
                        self._add(cid, Relation.AS_PARAMETER, eid)
            elif decl.kind == ATTRIBUTE and decl.annotation_text:
                ret = self._class_types(decl.annotation_text, module, eid)
                for cid in ret:
                    self._add(eid, Relation.RETURNS, cid)
                if ret:
                    self.types[eid] = ret[0]
        # constructor returns and ``self.x = <value>`` settle over a few passes
        for _ in range(5):
            changed = False
            for eid, decl in self.decl_of.items():
                if eid in self.types:
                    continue
                cid = None
                module = self.file_of[eid].module_name
                if decl.kind == FUNCTION:
                    env = self._local_types(eid)
                    for chain in decl.returned_chains:
                        cid = self._value_type(module, chain, True, env)
                        if cid is not None:
                            break
                elif decl.kind == ATTRIBUTE and decl.value_chain:
                    func = self.by_qname.get((module, decl.assigned_in)) if decl.assigned_in else None
                    env = self._local_types(func) if func is not None else {}
                    cid = self._value_type(module, decl.value_chain, decl.value_invoked, env)
                if cid is not None:
                    self.types[eid] = cid
                    self._add(eid, Relation.RETURNS, cid)
                    changed = True
            if not changed:
                break

    def _value_type(self, module: str, chain, invoked: bool, env) -> int | None:
        """Class of the value produced by ``chain`` (called if ``invoked``)."""
        values = self._resolve_chain(module, chain, env, refs=None)
        if len(values) != len(chain):
            return None
        last = values[-1]
        if invoked:
            last = self._invoke(last)
        elif last.entity is not None and self.entities[last.entity].kind == ATTRIBUTE:
            cls = self.types.get(last.entity)
            return cls
        if last is not None and last.entity is None and last.instance_of is not None:
            return last.instance_of
        return None

    def _imports(self):
        for fm in self.files:
            scope = self.scopes[fm.module_name]
            tails = sorted({eid for eid in scope.entities.values()
                            if self.entities[eid].kind in (CLASS, FUNCTION)})
            for eid, decl in self.decl_of.items():
                if self.file_of[eid] is not fm or decl.kind != FUNCTION:
                    continue
                for t in tails:
                    if t != eid:
                        self._add(eid, Relation.IMPORTS, t)

    # ------------------------------------------------------------------
    # receiver-chain resolution
    # ------------------------------------------------------------------
    def _root(self, module: str, name: str) -> _Value | None:
        scope = self.scopes.get(module)
        if scope is None:
            return None
        if name in scope.entities:
            return _Value(entity=scope.entities[name])
        if name in scope.modules:
            return _Value(module=scope.modules[name])
        return None

    def _invoke(self, value: _Value) -> _Value | None:
        if value.entity is None:
            return None
        ent = self.entities[value.entity]
        if ent.kind == CLASS:
            return _Value(instance_of=value.entity)
        if ent.kind == FUNCTION and value.entity in self.types:
            return _Value(instance_of=self.types[value.entity])
        return None

    def _member(self, value: _Value, name: str) -> _Value | None:
        if value.module is not None:
            mod = self._find_module(value.module)
            if mod is not None and name in self.module_symbols.get(mod, {}):
                return _Value(entity=self.module_symbols[mod][name])
            dotted = f"{value.module}.{name}"
            sub = self._find_module(dotted)
            if sub is not None:
                return _Value(module=sub)
            # ``import a`` then ``a.b.c``: keep walking the package prefix
            if any(m == dotted or m.startswith(dotted + ".") or m.endswith("." + dotted)
                   or ("." + dotted + ".") in m for m in self.modules):
                return _Value(module=dotted)
            return None
        cls = value.instance_of
        if cls is None and value.entity is not None:
            ent = self.entities[value.entity]
            if ent.kind == CLASS:
                cls = value.entity
            elif ent.kind == ATTRIBUTE:
                cls = self.types.get(value.entity)
        if cls is None:
            return None
        member = self._class_member(cls, name)
        return _Value(entity=member) if member is not None else None

    def _local_types(self, func: int) -> dict[str, _Value]:
        """Initial environment of ``func``: receiver parameter and typed params.

        Annotated parameters are marked ``implicit`` so that using them
        counts as an access of their class.
        """
        decl = self.decl_of[func]
        module = self.file_of[func].module_name
        env: dict[str, _Value] = {}
        owner = self.by_qname.get((module, decl.parent)) if decl.parent else None
        first = decl.params[0] if decl.params else ""
        if owner is not None and first and "@staticmethod" not in decl.signature_text:
            if "@classmethod" in decl.signature_text:
                env[first] = _Value(entity=owner)
            else:
                env[first] = _Value(instance_of=owner)
        for name, ann in decl.param_annotations:
            types = self._class_types(ann, module, func)
            if types:
                env[name] = _Value(instance_of=types[0], implicit=True)
        return env

    def _resolve_chain(self, module: str, chain, env: dict[str, _Value],
                       refs: list[int] | None) -> list[_Value]:
        """Resolve ``chain``; returns the values of its resolved prefix.

        ``refs`` collects the entities the chain touches: each resolved
        element, plus the class reached when hopping through a typed
        attribute or a call's return value.
        """
        values: list[_Value] = []
        value: _Value | None = None
        for i, part in enumerate(chain):
            invoked = part.endswith(CALL_MARK)
            name = part.removesuffix(CALL_MARK)
            if i == 0:
                if name in env:
                    value = env[name]
                    if refs is not None and value.implicit:
                        refs.append(value.instance_of)
                else:
                    value = self._root(module, name)
                    if value is not None and refs is not None and value.entity is not None:
                        refs.append(value.entity)
            else:
                prev = value
                value = self._member(prev, name)
                if value is None:
                    return values
                if refs is not None:
                    if prev.hop is not None:
                        refs.append(prev.hop)
                    refs.append(value.entity)
            if value is None:
                return values
            values.append(value)
            if invoked:
                value = self._invoke(value)
                if value is None:
                    return values
                value = _Value(instance_of=value.instance_of, hop=value.instance_of)
            elif value.entity is not None and self.entities[value.entity].kind == ATTRIBUTE:
                cls = self.types.get(value.entity)
                if cls is not None:
                    value = _Value(instance_of=cls, hop=cls)
        return values

    def _calls(self):
        for eid, decl in self.decl_of.items():
            if decl.kind != FUNCTION:
                continue
            module = self.file_of[eid].module_name
            env = self._local_types(eid)
            for b in sorted(decl.bindings, key=lambda b: b.line):
                cls = None
                if b.annotation:
                    types = self._class_types(b.annotation, module, eid)
                    cls = types[0] if types else None
                if cls is None and b.value_chain:
                    cls = self._value_type(module, b.value_chain, b.invoked, env)
                if cls is not None:
                    env[b.target] = _Value(instance_of=cls)
                elif b.target in env and decl.params and b.target != decl.params[0]:
                    # rebinding to something unknown shadows the old type
                    del env[b.target]
            for site in decl.body_call_sites:
                refs: list[int] = []
                self._resolve_chain(module, site.receiver_chain, env, refs)
                if not refs:
                    self.diag.unresolved_call_sites += 1
                    continue
                self.diag.resolved_call_sites += 1
                for r in dict.fromkeys(refs):
                    self.calls[(eid, r)] += 1
                    self.diag.resolved_references += 1


def build_graph(files: list[FileModel], diagnostics: BuildDiagnostics | None = None) -> RSSG:
    """Build the graph from parsed files (order-deterministic)."""
    builder = _Builder(sorted(files, key=lambda f: f.path))
    graph = builder.run()
    if diagnostics is not None:
        for k, v in builder.diag.as_dict().items():
            setattr(diagnostics, k, v)
    graph.diagnostics = builder.diag
    return graph


def validate_schema(graph: RSSG) -> list[str]:
    """Human-readable violations of the relation schema (empty if valid)."""
    violations = []
    n = len(graph.entities)
    seen = set()
    for t in graph.triples:
        label = f"({t.head}, {t.relation.value}, {t.tail})"
        if not (0 <= t.head < n and 0 <= t.tail < n):
            violations.append(f"{label}: dangling entity id")
            continue
        if t.key in seen:
            violations.append(f"{label}: duplicate triple")
        seen.add(t.key)
        heads, tails = SCHEMA[t.relation]
        hk, tk = graph[t.head].kind, graph[t.tail].kind
        if hk not in heads:
            violations.append(f"{label}: head kind {hk} not allowed")
        if tk not in tails:
            violations.append(f"{label}: tail kind {tk} not allowed")
        if t.relation is Relation.IMPORTS and t.head == t.tail:
            violations.append(f"{label}: entity imports itself")
        if t.relation is Relation.CALLS:
            if t.weight is None or t.weight < 1:
                violations.append(f"{label}: Calls weight must be a positive integer")
        elif t.weight is not None:
            violations.append(f"{label}: weight only allowed on Calls")
    return violations


def target_spec(graph: RSSG, eid: int, sources: dict[str, str] | None = None) -> TargetSpec:
    ent = graph[eid]
    if ent.kind != FUNCTION:
        raise ValueError(f"{ent.path} is a {ent.kind}, not a function")
    owner = graph.contains_parent(eid)
    context = ""
    if sources and ent.file in sources:
        context = import_block(sources[ent.file])
    return TargetSpec(eid, ent.file, ent.qualified_name, ent.signature, ent.docstring,
                      owner, context)


def import_block(source: str) -> str:
    """Module-level import statements of ``source``, verbatim."""
    import ast

    try:
        tree = ast.parse(source)
    except SyntaxError:
        return ""
    lines = source.splitlines()
    out = []
    for stmt in tree.body:
        if isinstance(stmt, (ast.Import, ast.ImportFrom)):
            out.extend(lines[stmt.lineno - 1: stmt.end_lineno])
    return "\n".join(out)


def imported_entities(graph: RSSG, f: TargetSpec | int) -> set[int]:
    eid = f.entity if isinstance(f, TargetSpec) else f
    if not 0 <= eid < len(graph):
        raise KeyError(f"unknown entity {eid}")
    return set(graph.successors(eid, Relation.IMPORTS))


# --------------------------------------------------------------------------
# persistence
# --------------------------------------------------------------------------

def _vector_path(path: Path, suffix: str) -> Path:
    return path.with_suffix(suffix)


def write_vectors(path: Path, matrix: np.ndarray | None) -> None:
    data = VECTOR_MAGIC
    if matrix is not None and matrix.size:
        data += np.ascontiguousarray(matrix, dtype="<f4").tobytes()
    path.write_bytes(data)


def read_vectors(path: Path, rows: int, dim: int) -> np.ndarray | None:
    raw = path.read_bytes()
    if raw[:8] != VECTOR_MAGIC:
        raise IndexError_(f"{path}: bad vector file header")
    if dim == 0:
        return None
    body = raw[8:]
    if len(body) != rows * dim * 4:
        raise IndexError_(f"{path}: expected {rows}x{dim} float32 values, found {len(body) // 4}")
    return np.frombuffer(body, dtype="<f4").reshape(rows, dim).astype(np.float64)


@dataclass
class Index:
    graph: RSSG
    fragments: list[Fragment]
    fragment_embeddings: np.ndarray | None = None
    clusters: dict | None = None
    sources: dict[str, str] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def _entity_record(e: Entity) -> dict:
    return {
        "id": e.id, "kind": e.kind, "name": e.name, "signature": e.signature,
        "docstring": e.docstring, "path": e.path, "file": e.file,
        "qualified_name": e.qualified_name, "line_span": list(e.line_span),
    }


def dumps_index(index: Index) -> str:
    g = index.graph
    doc = {
        "version": INDEX_VERSION,
        "meta": index.meta,
        "embedding_dim": g.dim,
        "fragment_embedding_dim": 0 if index.fragment_embeddings is None
        else int(index.fragment_embeddings.shape[1]),
        "entities": [_entity_record(e) for e in g.entities],
        "triples": [
            {"head": t.head, "relation": t.relation.value, "tail": t.tail,
             **({"weight": t.weight} if t.weight is not None else {})}
            for t in g.triples
        ],
        "fragments": [
            {"path": f.path, "start_line": f.start_line, "end_line": f.end_line, "text": f.text}
            for f in index.fragments
        ],
        "clusters": index.clusters,
        "sources": index.sources,
    }
    return json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def persist_index(index: Index, path: str | Path) -> Path:
    """Write ``<path>`` (JSON) plus ``.vec`` / ``.fragvec`` vector siblings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_index(index), encoding="utf-8")
    write_vectors(_vector_path(path, ".vec"), index.graph.embeddings)
    write_vectors(_vector_path(path, ".fragvec"), index.fragment_embeddings)
    return path


def load_index(path: str | Path) -> Index:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise IndexError_(f"index not found: {path}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise IndexError_(f"corrupt index {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != INDEX_VERSION:
        got = doc.get("version") if isinstance(doc, dict) else None
        raise IndexError_(f"index version mismatch: expected {INDEX_VERSION}, found {got}")
    try:
        entities = [Entity(
            id=r["id"], kind=r["kind"], name=r["name"], signature=r["signature"],
            docstring=r["docstring"], path=r["path"], file=r["file"],
            qualified_name=r["qualified_name"], line_span=tuple(r["line_span"]),
        ) for r in doc["entities"]]
        triples = [RelationTriple(r["head"], Relation(r["relation"]), r["tail"], r.get("weight"))
                   for r in doc["triples"]]
        fragments = [Fragment(r["path"], r["start_line"], r["end_line"], r["text"])
                     for r in doc["fragments"]]
        dim = doc.get("embedding_dim", 0)
        fdim = doc.get("fragment_embedding_dim", 0)
    except (KeyError, TypeError, ValueError) as exc:
        raise IndexError_(f"corrupt index {path}: {exc}") from exc
    emb = read_vectors(_vector_path(path, ".vec"), len(entities), dim)
    femb = read_vectors(_vector_path(path, ".fragvec"), len(fragments), fdim)
    graph = RSSG(entities, triples, emb)
    return Index(graph, fragments, femb, doc.get("clusters"), doc.get("sources") or {},
                 doc.get("meta") or {})


__all__ = [
    "Entity", "RelationTriple", "Relation", "RSSG", "TargetSpec", "Index",
    "build_graph", "validate_schema", "imported_entities", "persist_index",
    "load_index", "target_spec", "R_ST", "R_C", "R_I",
]
