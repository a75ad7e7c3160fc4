"""Indexing and per-target retrieval glue shared by the CLI and evaluation."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .chains import ChainConfig, ChainPrediction, predict_chains
from .config import Config
from .embedding import (
    ClusterAssignment,
    EmbeddingProvider,
    cluster_entities,
    embed,
    embed_entities,
    make_provider,
    target_query_text,
)
from .graph import RSSG, Index, TargetSpec, build_graph, target_spec
from .prompt import PromptPlan, chain_units, compose_prompt, plan_prompt
from .retrieval import (
    FourViewContext,
    assemble_four_views,
    retrieve_callers,
    retrieve_similar_fragments,
    retrieve_similar_functions,
)
from .source_model import ParseDiagnostic, normalize_path, scan_repository, slice_fragments

log = logging.getLogger(__name__)


def provider_for(cfg: Config) -> EmbeddingProvider:
    return make_provider(cfg.embed_provider, url=cfg.embed_url, key=cfg.embed_key,
                         model=cfg.embed_model)


def build_index(cfg: Config, provider: EmbeddingProvider | None = None) -> tuple[Index, list[ParseDiagnostic]]:
    """scan -> parse -> build graph -> embed -> cluster; nothing written."""
    provider = provider or provider_for(cfg)
    scan = scan_repository(cfg.root, list(cfg.excludes))
    graph = build_graph(scan.files)
    graph.embeddings = embed_entities(graph.entities, provider, fit=True) if len(graph) else None
    clusters = cluster_entities(graph.embeddings, cfg.clusters, cfg.seed) if len(graph) else None
    fragments = []
    for fm in scan.files:
        fragments.extend(slice_fragments(fm, scan.sources[fm.path], cfg.window, cfg.stride))
    frag_vecs = provider.embed_batch([f.text for f in fragments]) if fragments else None
    meta = {
        "provider": provider.name,
        "provider_state": provider.state() if hasattr(provider, "state") else None,
        "window": cfg.window,
        "stride": cfg.stride,
        "diagnostics": graph.diagnostics.as_dict(),
        "skipped_files": [d.path for d in scan.diagnostics if d.path not in scan.sources],
    }
    index = Index(graph, fragments, frag_vecs,
                  clusters.to_json() if clusters else None, dict(scan.sources), meta)
    return index, scan.diagnostics


def query_provider(index: Index, cfg: Config) -> EmbeddingProvider:
    """Provider matching the one the index was built with."""
    name = index.meta.get("provider", "hashed")
    if name == "hashed":
        return make_provider(name, state=index.meta.get("provider_state"))
    return make_provider(name, url=cfg.embed_url, key=cfg.embed_key, model=cfg.embed_model)


def index_clusters(index: Index) -> ClusterAssignment:
    if index.clusters is None:
        return ClusterAssignment({}, 0, 0)
    return ClusterAssignment.from_json(index.clusters)


def parse_target(text: str) -> tuple[str, str]:
    file, sep, qname = text.rpartition(":")
    if not sep or not file or not qname:
        raise ValueError(f"target must look like <file>:<qualified_name>, got {text!r}")
    return normalize_path(file), qname


@dataclass
class TargetRun:
    target: TargetSpec
    graph: RSSG
    prediction: ChainPrediction
    context: FourViewContext
    plan: PromptPlan | None = None
    prompt: str | None = None


def resolve_target(index: Index, text: str) -> TargetSpec:
    file, qname = parse_target(text)
    eid = index.graph.find(file, qname)
    return target_spec(index.graph, eid, index.sources)


def run_target(index: Index, target: TargetSpec, cfg: Config,
               provider: EmbeddingProvider | None = None, structured: bool = True) -> TargetRun:
    """Chains and the four views for ``target``, with its body masked."""
    provider = provider or query_provider(index, cfg)
    graph = index.graph.without_calls_from(target.entity)
    clusters = index_clusters(index)
    prediction = predict_chains(graph, target, clusters, cfg.chain)
    callers = retrieve_callers(graph, target.entity, cfg.k_caller, index.sources)
    chains = chain_units(prediction.chains, graph, structured=structured)
    sim_fns = retrieve_similar_functions(graph, target.entity, cfg.k_sim_function, index.sources)
    query = embed(target_query_text(target.signature, target.docstring), provider) \
        if index.fragments and cfg.k_sim_fragment else np.zeros(1)
    sim_frags = retrieve_similar_fragments(index.fragments, index.fragment_embeddings, query,
                                           cfg.k_sim_fragment, graph[target.entity])
    ctx = assemble_four_views(target, callers, chains, sim_fns, sim_frags)
    return TargetRun(target, graph, prediction, ctx)


def build_prompt(run: TargetRun, cfg: Config, structured: bool = True) -> TargetRun:
    run.plan = plan_prompt(run.context, cfg.ell, cfg.priority, run.graph)
    run.prompt = compose_prompt(run.context, run.plan, graph=run.graph,
                                chains=run.prediction.chains, structured=structured)
    return run


__all__ = ["build_index", "run_target", "build_prompt", "resolve_target", "parse_target",
           "query_provider", "index_clusters", "ChainConfig", "TargetRun"]
