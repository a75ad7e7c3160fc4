"""RepoScope: repository-level context for function generation.

Indexes a Python repository into a semantic graph, predicts call chains for
an unimplemented function, retrieves four views of context and packs them
into a token-budgeted prompt.
"""

__version__ = "0.1.0"

from .chains import CallChain, ChainConfig, ChainPrediction, predict_chains
from .config import Config, load_config
from .graph import RSSG, Index, Relation, TargetNotFound, load_index, persist_index
from .pipeline import build_index, build_prompt, resolve_target, run_target

__all__ = [
    "CallChain", "ChainConfig", "ChainPrediction", "Config", "Index", "RSSG", "Relation",
    "TargetNotFound", "build_index", "build_prompt", "load_config", "load_index",
    "persist_index", "predict_chains", "resolve_target", "run_target", "__version__",
]
