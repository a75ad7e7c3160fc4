"""Run configuration: defaults < ``reposcope.toml`` < environment < CLI flags."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .chains import ChainConfig
from .prompt import DEFAULT_PRIORITY, parse_priority

CONFIG_FILE = "reposcope.toml"
DEFAULT_INDEX_DIR = ".reposcope"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    root: str = "."
    excludes: tuple[str, ...] = ()
    window: int = 20
    stride: int = 10
    embed_provider: str = "hashed"
    embed_url: str | None = None
    embed_key: str | None = None
    embed_model: str = "bge-small-en-v1.5"
    clusters: int | None = None
    seed: int = 42
    chain: ChainConfig = field(default_factory=ChainConfig)
    k_caller: int = 5
    k_sim_function: int = 5
    k_sim_fragment: int = 5
    ell: int = 4096
    priority: tuple[str, ...] = DEFAULT_PRIORITY
    llm_url: str | None = None
    llm_key: str | None = None
    llm_model: str = "gpt-4o-mini"
    temperature: float = 0.0
    max_retries: int = 0
    index_path: str | None = None

    def __post_init__(self):
        for name in ("k_caller", "k_sim_function", "k_sim_fragment"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.ell <= 0:
            raise ConfigError("ell must be > 0")
        if self.window < 1 or self.stride < 1:
            raise ConfigError("window and stride must be >= 1")

    @property
    def index_file(self) -> Path:
        if self.index_path:
            return Path(self.index_path)
        return Path(self.root) / DEFAULT_INDEX_DIR / "index.json"


_CHAIN_KEYS = {f.name for f in fields(ChainConfig)}


def _read_toml(path: Path) -> dict:
    try:
        import tomllib  # type: ignore[import-not-found]
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with path.open("rb") as fh:
        return tomllib.load(fh)


def _apply(cfg: Config, values: dict) -> Config:
    chain_updates = {k: values.pop(k) for k in list(values) if k in _CHAIN_KEYS}
    if isinstance(values.get("chain"), dict):
        chain_updates.update(values.pop("chain"))
    known = {f.name for f in fields(Config)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "priority" in values:
        values["priority"] = parse_priority(values["priority"])
    if "excludes" in values:
        values["excludes"] = tuple(values["excludes"])
    try:
        chain = replace(cfg.chain, **chain_updates) if chain_updates else cfg.chain
        return replace(cfg, chain=chain, **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def env_overrides(environ=os.environ) -> dict:
    mapping = {
        "REPOSCOPE_EMBED_URL": "embed_url",
        "REPOSCOPE_EMBED_KEY": "embed_key",
        "REPOSCOPE_LLM_URL": "llm_url",
        "REPOSCOPE_LLM_KEY": "llm_key",
        "REPOSCOPE_LLM_MODEL": "llm_model",
    }
    return {key: environ[var] for var, key in mapping.items() if environ.get(var)}


def load_config(root: str | Path = ".", cli: dict | None = None, environ=os.environ) -> Config:
    """Merge defaults, the repo's config file, environment and CLI values."""
    cfg = Config(root=str(root))
    path = Path(root) / CONFIG_FILE
    if path.is_file():
        cfg = _apply(cfg, dict(_read_toml(path)))
    cfg = _apply(cfg, env_overrides(environ))
    if cli:
        cfg = _apply(cfg, {k: v for k, v in cli.items() if v is not None})
    return cfg
