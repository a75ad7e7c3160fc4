"""Entity text rendering, embedding providers, cosine similarity, K-means."""

from __future__ import annotations

import hashlib
import keyword
import logging
import math
import os
import re
import time
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

import numpy as np
from nltk.stem import PorterStemmer
from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

from .graph import Entity

log = logging.getLogger(__name__)

HASHED_DIM = 256
DEFAULT_SEED = 42

_TAG_RE = re.compile(r"</?(?:name|signature|description|path)>")
_TOKEN_RE = re.compile(r"[A-Za-z]+|\d+")
_CAMEL_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+")


class EmbeddingError(RuntimeError):
    pass


def render_entity(e: Entity) -> str:
    return (
        f"<name>{e.name}</name>"
        f"<signature>{e.signature}</signature>"
        f"<description>{e.docstring or ''}</description>"
        f"<path>{e.path}</path>"
    )


def identifier_tokens(text: str) -> list[str]:
    """Lower-cased sub-tokens; ``getOptionSpec`` and ``get_option_spec`` agree."""
    out = []
    for word in _TOKEN_RE.findall(text):
        out.extend(p.lower() for p in _CAMEL_RE.findall(word))
    return out


_STEMMER = PorterStemmer()
# words shared by nearly every entity text carry no ranking signal
_STOP = frozenset(ENGLISH_STOP_WORDS) | frozenset(keyword.kwlist) | {"self", "cls"}


def stemmed_tokens(text: str) -> list[str]:
    """Identifier sub-tokens minus stop words, reduced to Porter stems."""
    return [_STEMMER.stem(t) for t in identifier_tokens(text) if t not in _STOP]


class EmbeddingProvider(Protocol):
    name: str
    dim: int

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray: ...


class HashedProvider:
    """Offline provider: signed feature hashing of stemmed identifier tokens.

    After ``fit`` each token count is scaled by its smoothed inverse document
    frequency over the fitted texts, so tokens shared by most entities (the
    package path, say) stop dominating short texts.  Unseen tokens get the
    largest weight.  The last component is a constant bias so empty text
    still maps to a unit vector.  Rows are L2-normalised.
    """

    name = "hashed"

    def __init__(self, dim: int = HASHED_DIM, idf: dict[str, float] | None = None,
                 n_docs: int = 0):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.dim = dim
        self.idf = dict(idf) if idf else {}
        self.n_docs = n_docs

    def fit(self, texts: Sequence[str]) -> "HashedProvider":
        df: dict[str, int] = {}
        for text in texts:
            for tok in set(stemmed_tokens(_TAG_RE.sub(" ", text))):
                df[tok] = df.get(tok, 0) + 1
        n = len(texts)
        self.n_docs = n
        self.idf = {tok: math.log((1 + n) / (1 + c)) + 1.0 for tok, c in sorted(df.items())}
        return self

    def _weight(self, token: str) -> float:
        if not self.n_docs:
            return 1.0
        return self.idf.get(token, math.log(1 + self.n_docs) + 1.0)

    def state(self) -> dict:
        return {"dim": self.dim, "n_docs": self.n_docs, "idf": self.idf}

    @classmethod
    def from_state(cls, state: dict) -> "HashedProvider":
        return cls(state.get("dim", HASHED_DIM), state.get("idf"), state.get("n_docs", 0))

    def _bucket(self, token: str) -> tuple[int, float]:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        value = int.from_bytes(digest, "little")
        return value % (self.dim - 1), (1.0 if (value >> 63) & 1 else -1.0)

    def embed_one(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        # template tags are identical for every entity; they carry no signal
        for tok in stemmed_tokens(_TAG_RE.sub(" ", text)):
            idx, sign = self._bucket(tok)
            vec[idx] += sign * self._weight(tok)
        vec[-1] = 1.0
        return vec / np.linalg.norm(vec)

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim))
        return np.vstack([self.embed_one(t) for t in texts])


class RemoteProvider:
    """HTTP provider speaking the common ``/embeddings`` JSON shape."""

    name = "remote"

    def __init__(self, url: str | None = None, key: str | None = None, model: str = "bge-small-en-v1.5",
                 batch_size: int = 64, retries: int = 2, timeout: float = 60.0, client=None):
        self.url = url or os.environ.get("REPOSCOPE_EMBED_URL")
        if not self.url:
            raise EmbeddingError("remote embedding provider needs REPOSCOPE_EMBED_URL")
        self.key = key if key is not None else os.environ.get("REPOSCOPE_EMBED_KEY")
        self.model = model
        self.batch_size = batch_size
        self.retries = retries
        self.timeout = timeout
        self._client = client
        self.dim = 0

    def _post(self, texts: list[str]) -> np.ndarray:
        import httpx

        headers = {"Authorization": f"Bearer {self.key}"} if self.key else {}
        client = self._client or httpx
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                resp = client.post(self.url, json={"input": texts, "model": self.model},
                                   headers=headers, timeout=self.timeout)
                resp.raise_for_status()
                rows = [item["embedding"] for item in resp.json()["data"]]
                if len(rows) != len(texts):
                    raise EmbeddingError(f"expected {len(texts)} embeddings, got {len(rows)}")
                return np.asarray(rows, dtype=np.float64)
            except (httpx.HTTPError, KeyError, ValueError, EmbeddingError) as exc:
                last = exc
                log.warning("embedding request failed (attempt %d): %s", attempt + 1, exc)
                if attempt < self.retries:
                    time.sleep(0.5 * (attempt + 1))
        raise EmbeddingError(f"embedding endpoint failed: {last}")

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        chunks = [self._post(list(texts[i:i + self.batch_size]))
                  for i in range(0, len(texts), self.batch_size)]
        if not chunks:
            return np.zeros((0, self.dim))
        out = np.vstack(chunks)
        if not np.all(np.isfinite(out)):
            raise EmbeddingError("embedding endpoint returned non-finite values")
        self.dim = out.shape[1]
        return out


def make_provider(name: str = "hashed", state: dict | None = None, **kwargs) -> EmbeddingProvider:
    if name == "hashed":
        if state:
            return HashedProvider.from_state(state)
        return HashedProvider(kwargs.get("dim", HASHED_DIM))
    if name == "remote":
        return RemoteProvider(url=kwargs.get("url"), key=kwargs.get("key"),
                              model=kwargs.get("model") or "bge-small-en-v1.5")
    raise ValueError(f"unknown embedding provider: {name}")


def embed(text: str, provider: EmbeddingProvider) -> np.ndarray:
    return provider.embed_batch([text])[0]


def embed_entities(entities: Iterable[Entity], provider: EmbeddingProvider,
                   fit: bool = False) -> np.ndarray:
    """Embed rendered entities; ``fit`` first fits providers that support it."""
    texts = [render_entity(e) for e in entities]
    if not texts:
        return np.zeros((0, provider.dim or HASHED_DIM))
    if fit and hasattr(provider, "fit"):
        provider.fit(texts)
    return provider.embed_batch(texts)


def target_query_text(signature: str, docstring: str) -> str:
    """Query used against raw code fragments."""
    return f"{signature}\n{docstring}" if docstring else signature


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def cosine_many(query, matrix: np.ndarray) -> np.ndarray:
    """Cosine of ``query`` against each row of ``matrix`` (zero rows -> 0)."""
    if matrix is None or len(matrix) == 0:
        return np.zeros(0)
    q = np.asarray(query, dtype=np.float64)
    if matrix.shape[1] != q.shape[0]:
        raise ValueError(f"dimension mismatch: {q.shape[0]} vs {matrix.shape[1]}")
    norms = np.linalg.norm(matrix, axis=1) * np.linalg.norm(q)
    dots = matrix @ q
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = np.where(norms > 0, dots / np.where(norms > 0, norms, 1.0), 0.0)
    return np.clip(sims, -1.0, 1.0)


@dataclass(frozen=True)
class ClusterAssignment:
    cluster_of: dict[int, int]
    k: int
    seed: int

    def members(self, cluster: int) -> list[int]:
        return sorted(e for e, c in self.cluster_of.items() if c == cluster)

    def to_json(self) -> dict:
        return {"k": self.k, "seed": self.seed,
                "assignment": [self.cluster_of[i] for i in sorted(self.cluster_of)]}

    @classmethod
    def from_json(cls, doc: dict) -> "ClusterAssignment":
        return cls(dict(enumerate(doc["assignment"])), doc["k"], doc["seed"])


def default_cluster_count(n: int) -> int:
    return min(n, max(2, round(math.sqrt(n / 2)))) if n else 0


def cluster_entities(vectors: np.ndarray, k: int | None = None, seed: int = DEFAULT_SEED) -> ClusterAssignment:
    """K-means (k-means++ init, Lloyd iterations) over entity embeddings.

    Row ``i`` of ``vectors`` belongs to entity id ``i``.  ``k`` is clamped to
    the number of rows.
    """
    from sklearn.cluster import KMeans

    vectors = np.asarray(vectors, dtype=np.float64)
    n = len(vectors)
    if n == 0:
        return ClusterAssignment({}, 0, seed)
    if k is None:
        k = default_cluster_count(n)
    if k < 1:
        raise ValueError("k must be >= 1")
    k = min(k, n)
    if k == 1:
        return ClusterAssignment({i: 0 for i in range(n)}, 1, seed)
    import warnings

    with warnings.catch_warnings():
        # duplicate points with k close to n trigger a harmless ConvergenceWarning
        warnings.simplefilter("ignore")
        km = KMeans(n_clusters=k, init="k-means++", n_init=1, max_iter=300,
                    random_state=seed, algorithm="lloyd").fit(vectors)
    labels = km.labels_
    # relabel clusters by lowest member id for a stable numbering
    remap: dict[int, int] = {}
    for label in labels:
        remap.setdefault(int(label), len(remap))
    return ClusterAssignment({i: remap[int(c)] for i, c in enumerate(labels)}, k, seed)
