"""Callee-prediction F1 against real bodies, with the ablation variants."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .chains import (
    CallChain,
    ChainConfig,
    EntityScorer,
    enumerate_chains,
    extend_chain,
    rank_chains,
)
from .config import Config
from .graph import RSSG, Index, Relation, imported_entities
from .pipeline import build_index, index_clusters
from .source_model import FUNCTION

log = logging.getLogger(__name__)

VARIANTS = ("full", "no-wes", "no-dfs", "no-cce")
MATCH_TOLERANCE = 0.5


def variant_config(name: str, base: ChainConfig) -> ChainConfig:
    if name == "full":
        return base
    if name == "no-wes":
        # similarity-only scoring
        return replace(base, alpha2=0.0)
    if name == "no-dfs":
        # only the directly imported entities
        return replace(base, l_max=1)
    if name == "no-cce":
        return replace(base, extend=False)
    raise ValueError(f"unknown variant {name!r}; expected one of {', '.join(VARIANTS)}")


def ground_truth_callees(graph: RSSG, f: int) -> set[int]:
    """Calls targets of ``f``'s resolved body (``graph`` must be unmasked)."""
    return {t for t in graph.successors(f, Relation.CALLS) if t != f}


def predicted_callees(chains: Iterable[CallChain], starts: Iterable[int] = ()) -> set[int]:
    starts = set(starts)
    return {e for c in chains for e in c.entities if e not in starts}


def f1(pred: set, truth: set) -> tuple[float, float, float]:
    """``(precision, recall, F1)``; two empty sets score a perfect 1."""
    if not pred and not truth:
        return 1.0, 1.0, 1.0
    tp = len(pred & truth)
    p = tp / len(pred) if pred else 0.0
    r = tp / len(truth) if truth else 0.0
    return p, r, (2 * p * r / (p + r) if p + r else 0.0)


def _micro(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    if tp + fp + fn == 0:
        return 1.0, 1.0, 1.0
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return p, r, (2 * p * r / (p + r) if p + r else 0.0)


@dataclass
class TargetResult:
    repo: str
    target: str
    truth: list[str]
    predicted: list[str]
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    fn_tp: int = 0
    fn_fp: int = 0
    fn_fn: int = 0

    def to_json(self) -> dict:
        return {
            "repo": self.repo, "target": self.target, "truth": self.truth,
            "predicted": self.predicted, "precision": self.precision,
            "recall": self.recall, "f1": self.f1,
        }


@dataclass
class EvalReport:
    variant: str
    k_chain: int
    matched: bool
    targets: list[TargetResult] = field(default_factory=list)

    @property
    def mean_callees(self) -> float:
        if not self.targets:
            return 0.0
        return sum(t.tp + t.fp for t in self.targets) / len(self.targets)

    @property
    def micro(self) -> tuple[float, float, float]:
        return _micro(sum(t.tp for t in self.targets), sum(t.fp for t in self.targets),
                      sum(t.fn for t in self.targets))

    @property
    def functions_only(self) -> tuple[float, float, float]:
        return _micro(sum(t.fn_tp for t in self.targets), sum(t.fn_fp for t in self.targets),
                      sum(t.fn_fn for t in self.targets))

    @property
    def macro_f1(self) -> float:
        return sum(t.f1 for t in self.targets) / len(self.targets) if self.targets else 0.0

    def to_json(self) -> dict:
        p, r, f = self.micro
        fp_, fr_, ff_ = self.functions_only
        return {
            "variant": self.variant,
            "k_chain": self.k_chain,
            "matched": self.matched,
            "n_targets": len(self.targets),
            "mean_predicted_callees": self.mean_callees,
            "micro": {"precision": p, "recall": r, "f1": f},
            "functions_only": {"precision": fp_, "recall": fr_, "f1": ff_},
            "macro_f1": self.macro_f1,
            "targets": [t.to_json() for t in self.targets],
        }


@dataclass
class _Prepared:
    """Everything about one masked target that does not depend on k_chain."""
    repo: str
    graph: RSSG
    target: int
    truth: set[int]
    starts: list[int]
    cores: list[CallChain]
    scorer: EntityScorer


def evaluation_targets(graph: RSSG) -> list[int]:
    """Functions whose body resolves to at least one callee."""
    return [e.id for e in graph.entities
            if e.kind == FUNCTION and ground_truth_callees(graph, e.id)]


def _prepare(repo: str, index: Index, chain_cfg: ChainConfig) -> list[_Prepared]:
    clusters = index_clusters(index)
    out = []
    for f in evaluation_targets(index.graph):
        truth = ground_truth_callees(index.graph, f)
        masked = index.graph.without_calls_from(f)
        starts = sorted(imported_entities(masked, f))
        cores = [c for c in enumerate_chains(masked, starts, chain_cfg.l_max) if f not in c.entities]
        if chain_cfg.extend:
            cores = [extend_chain(c, masked) for c in cores]
        scorer = EntityScorer(masked, f, clusters, chain_cfg)
        out.append(_Prepared(repo, masked, f, truth, starts, cores, scorer))
    return out


def _evaluate(prepared: Sequence[_Prepared], chain_cfg: ChainConfig, variant: str,
              matched: bool) -> EvalReport:
    report = EvalReport(variant, chain_cfg.k_chain, matched)
    for item in prepared:
        chains = rank_chains(item.cores, item.scorer, chain_cfg, item.graph)
        pred = predicted_callees(chains, item.starts)
        truth = item.truth
        p, r, score = f1(pred, truth)
        g = item.graph
        fn_pred = {e for e in pred if g[e].kind == FUNCTION}
        fn_truth = {e for e in truth if g[e].kind == FUNCTION}
        report.targets.append(TargetResult(
            item.repo, g[item.target].path,
            sorted(g[e].path for e in truth), sorted(g[e].path for e in pred),
            p, r, score, len(pred & truth), len(pred - truth), len(truth - pred),
            len(fn_pred & fn_truth), len(fn_pred - fn_truth), len(fn_truth - fn_pred),
        ))
    return report


def run_benchmark(corpus: Sequence[tuple[str, Index]], variants: Sequence[str] = VARIANTS,
                  chain_cfg: ChainConfig = ChainConfig(), match: bool = True,
                  k_max: int = 20) -> list[EvalReport]:
    """One report per variant over every target of every indexed repo.

    The first variant (normally ``full``) runs at ``chain_cfg.k_chain``; each
    other variant takes the smallest ``k_chain`` whose mean predicted-callee
    count lies within 0.5 of it.  When no k gets there, the closest one is
    used and the report is flagged ``matched=False``.
    """
    if not corpus or not variants:
        return []
    for v in variants:
        variant_config(v, chain_cfg)
    cache: dict[tuple, list[_Prepared]] = {}

    def prepared_for(cfg: ChainConfig) -> list[_Prepared]:
        key = (cfg.alpha1, cfg.alpha2, cfg.alpha3, cfg.l_max, cfg.extend)
        if key not in cache:
            cache[key] = [p for name, index in corpus for p in _prepare(name, index, cfg)]
        return cache[key]

    reports: list[EvalReport] = []
    reference: float | None = None
    for v in variants:
        cfg = variant_config(v, chain_cfg)
        prepared = prepared_for(cfg)
        if reference is None or not match:
            report = _evaluate(prepared, cfg, v, True)
            if reference is None:
                reference = report.mean_callees
            reports.append(report)
            continue
        best: EvalReport | None = None
        for k in range(0, k_max + 1):
            report = _evaluate(prepared, replace(cfg, k_chain=k), v, False)
            if abs(report.mean_callees - reference) <= MATCH_TOLERANCE:
                report.matched = True
                best = report
                break
            if best is None or abs(report.mean_callees - reference) < abs(best.mean_callees - reference):
                best = report
        log.info("variant %s: k_chain=%d mean=%.3f matched=%s", v, best.k_chain,
                 best.mean_callees, best.matched)
        reports.append(best)
    return reports


def index_corpus(corpus_dir: str | Path, cfg: Config) -> list[tuple[str, Index]]:
    """Index each immediate subdirectory of ``corpus_dir`` as one repository."""
    root = Path(corpus_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    out = []
    for repo in sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith(".")):
        index, _ = build_index(replace(cfg, root=str(repo)))
        out.append((repo.name, index))
    return out


def reports_json(reports: Sequence[EvalReport]) -> dict:
    return {"variants": [r.to_json() for r in reports]}
