"""Call-chain prediction for an unimplemented target function.

Pipeline: imported entities -> weighted entity scores -> DFS over the
structural/type-dependency relations -> extension -> ranking with
containment dedup and a per-start cap.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .embedding import ClusterAssignment, cosine_many
from .graph import R_ST, RSSG, Relation, TargetSpec, imported_entities
from .source_model import ATTRIBUTE, CLASS, FUNCTION


def phi(x: float) -> float:
    """Concave call-value transform ``log2(x + 1)``."""
    if x < 0:
        raise ValueError(f"phi is defined for x >= 0, got {x}")
    return math.log2(x + 1.0)


@dataclass(frozen=True)
class ChainConfig:
    alpha1: float = 1.0
    alpha2: float = 2.0
    alpha3: float = 2.0
    l_max: int = 5
    tau: int = 4
    k_chain: int = 5
    extend: bool = True

    def __post_init__(self):
        if self.l_max < 1 or self.tau < 1 or self.k_chain < 0:
            raise ValueError("need l_max >= 1, tau >= 1, k_chain >= 0")
        if min(self.alpha1, self.alpha2, self.alpha3) < 0:
            raise ValueError("alphas must be non-negative")


@dataclass(frozen=True)
class EntityScore:
    entity: int
    similarity: float
    call_value: float
    score: float


@dataclass(frozen=True)
class CallChain:
    entities: tuple[int, ...]
    relations: tuple[Relation, ...]
    extensions: tuple[tuple[int, Relation, int], ...] = ()
    score: float = 0.0

    @property
    def start(self) -> int:
        return self.entities[0]

    def __len__(self):
        return len(self.entities)

    def all_entities(self) -> list[int]:
        seen = dict.fromkeys(self.entities)
        for _, _, ext in self.extensions:
            seen.setdefault(ext)
        return list(seen)

    def sequence(self) -> tuple:
        out: list = [self.entities[0]]
        for r, e in zip(self.relations, self.entities[1:]):
            out.extend((r.value, e))
        return tuple(out)

    def to_json(self, graph: RSSG) -> dict:
        return {
            "score": self.score,
            "core": [graph[e].path for e in self.entities],
            "relations": [r.value for r in self.relations],
            "extensions": [
                {"anchor": graph[a].path, "relation": r.value, "entity": graph[x].path}
                for a, r, x in self.extensions
            ],
        }


class EntityScorer:
    """Lazily computes ``S_e`` for entities of one graph against one target.

    ``call_value(e)`` pools the Calls weights from functions in the target's
    cluster (target excluded) into every entity of ``e``'s cluster, so two
    entities sharing a cluster always share a call value.  ``extra_value`` is
    an optional hook adding a further non-negative term to the call value.
    """

    def __init__(self, graph: RSSG, target: int, clusters: ClusterAssignment, cfg: ChainConfig,
                 phi_fn: Callable[[float], float] = phi,
                 extra_value: Callable[[int], float] | None = None,
                 target_vector: np.ndarray | None = None):
        self.graph = graph
        self.target = target
        self.clusters = clusters
        self.cfg = cfg
        self.phi = phi_fn
        self.extra_value = extra_value
        if graph.embeddings is None:
            raise ValueError("graph has no embeddings")
        vf = graph.embeddings[target] if target_vector is None else target_vector
        self._sims = cosine_many(vf, graph.embeddings)
        self._cache: dict[int, EntityScore] = {}
        cf = clusters.cluster_of.get(target)
        pooled: dict[int, float] = defaultdict(float)
        for t in graph.triples_of((Relation.CALLS,)):
            if t.head == target or graph[t.head].kind != FUNCTION:
                continue
            if clusters.cluster_of.get(t.head) != cf:
                continue
            ct = clusters.cluster_of.get(t.tail)
            if ct is not None:
                pooled[ct] += cfg.alpha3 * (t.weight or 1)
        self._pooled = dict(pooled)

    def similarity(self, e: int) -> float:
        return float(self._sims[e])

    def call_value(self, e: int) -> float:
        value = self._pooled.get(self.clusters.cluster_of.get(e), 0.0)
        if self.extra_value is not None:
            value += self.extra_value(e)
        return value

    def __call__(self, e: int) -> EntityScore:
        hit = self._cache.get(e)
        if hit is None:
            sim = self.similarity(e)
            cv = self.call_value(e)
            score = self.cfg.alpha1 * sim + self.cfg.alpha2 * self.phi(cv)
            hit = self._cache[e] = EntityScore(e, sim, cv, score)
        return hit


def score_entity(e: int, f: TargetSpec | int, graph: RSSG, clusters: ClusterAssignment,
                 cfg: ChainConfig, phi_fn: Callable[[float], float] = phi) -> EntityScore:
    target = f.entity if isinstance(f, TargetSpec) else f
    return EntityScorer(graph, target, clusters, cfg, phi_fn)(e)


def enumerate_chains(graph: RSSG, starts: Iterable[int], l_max: int) -> list[CallChain]:
    """Every simple R_ST path (and each of its prefixes) from each start."""
    chains: list[CallChain] = []
    for start in sorted(set(starts)):
        path = [start]
        rels: list[Relation] = []
        on_path = {start}

        def dfs(node: int):
            chains.append(CallChain(tuple(path), tuple(rels)))
            if len(path) >= l_max:
                return
            for t in graph.outgoing(node, R_ST):
                if t.tail in on_path:
                    continue
                path.append(t.tail)
                rels.append(t.relation)
                on_path.add(t.tail)
                dfs(t.tail)
                on_path.discard(t.tail)
                rels.pop()
                path.pop()

        dfs(start)
    return chains


def extend_chain(chain: CallChain, graph: RSSG) -> CallChain:
    """Attach constructor, parameter/return/type classes and owner classes."""
    core = set(chain.entities)
    ext: dict[int, tuple[int, Relation, int]] = {}

    def add(anchor: int, rel: Relation, entity: int):
        if entity not in core and entity not in ext:
            ext[entity] = (anchor, rel, entity)

    for e in chain.entities:
        kind = graph[e].kind
        if kind == CLASS:
            for m in graph.successors(e, Relation.CONTAINS):
                if graph[m].kind == FUNCTION and graph[m].name == "__init__":
                    add(e, Relation.CONTAINS, m)
        if kind == FUNCTION:
            for c in sorted(graph.predecessors(e, Relation.AS_PARAMETER)):
                add(e, Relation.AS_PARAMETER, c)
        if kind in (FUNCTION, ATTRIBUTE):
            for c in sorted(graph.successors(e, Relation.RETURNS)):
                add(e, Relation.RETURNS, c)
            owner = graph.contains_parent(e)
            if owner is not None:
                add(e, Relation.CONTAINS, owner)
    return CallChain(chain.entities, chain.relations, tuple(ext.values()), chain.score)


def _contains_run(outer: tuple, inner: tuple) -> bool:
    n, m = len(outer), len(inner)
    if m > n:
        return False
    return any(outer[i:i + m] == inner for i in range(0, n - m + 1, 2))


def rank_chains(chains: list[CallChain], scores: Callable[[int], EntityScore] | dict[int, float],
                cfg: ChainConfig, graph: RSSG | None = None) -> list[CallChain]:
    """Score chains by mean core-entity score and select the top ones.

    Chains are visited best first (ties: shorter core, then entity paths).
    A chain contained in an already selected one is skipped; a chain that
    contains already selected ones replaces them in place.  At most
    ``cfg.tau`` chains per start entity and ``cfg.k_chain`` in total.
    """
    if cfg.k_chain == 0 or not chains:
        return []

    def entity_score(e: int) -> float:
        if isinstance(scores, dict):
            return float(scores[e])
        return scores(e).score

    def path_key(c: CallChain):
        if graph is None:
            return c.entities
        return tuple(graph[e].path for e in c.entities)

    scored = [
        CallChain(c.entities, c.relations, c.extensions,
                  sum(entity_score(e) for e in c.entities) / len(c.entities))
        for c in chains
    ]
    scored.sort(key=lambda c: (-c.score, len(c.entities), path_key(c)))

    selected: list[CallChain] = []
    for chain in scored:
        seq = chain.sequence()
        if any(_contains_run(s.sequence(), seq) for s in selected):
            continue
        subsumed = [i for i, s in enumerate(selected) if _contains_run(seq, s.sequence())]
        rest = [s for i, s in enumerate(selected) if i not in subsumed]
        if sum(1 for s in rest if s.start == chain.start) >= cfg.tau:
            continue
        if subsumed:
            selected[subsumed[0]] = chain
            for i in reversed(subsumed[1:]):
                del selected[i]
        elif len(selected) < cfg.k_chain:
            selected.append(chain)
    return selected


@dataclass
class ChainPrediction:
    target: int
    starts: list[int]
    chains: list[CallChain]
    scores: dict[int, EntityScore] = field(default_factory=dict)


def predict_chains(graph: RSSG, target: TargetSpec | int, clusters: ClusterAssignment,
                   cfg: ChainConfig = ChainConfig(), phi_fn: Callable[[float], float] = phi,
                   extra_value: Callable[[int], float] | None = None) -> ChainPrediction:
    eid = target.entity if isinstance(target, TargetSpec) else target
    starts = sorted(imported_entities(graph, eid))
    scorer = EntityScorer(graph, eid, clusters, cfg, phi_fn, extra_value)
    # the target has no body yet, so paths through it suggest nothing usable
    cores = [c for c in enumerate_chains(graph, starts, cfg.l_max) if eid not in c.entities]
    if cfg.extend:
        cores = [extend_chain(c, graph) for c in cores]
    selected = rank_chains(cores, scorer, cfg, graph)
    used = {e for c in selected for e in c.entities}
    return ChainPrediction(eid, starts, selected, {e: scorer(e) for e in sorted(used)})
