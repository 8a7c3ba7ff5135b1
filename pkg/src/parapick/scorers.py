"""Fluency and semantic scorers behind one small interface.

A scorer exposes ``score_fluency(texts) -> [FluencyScore]`` or
``score_semantic(source, texts) -> [SemanticScore]``. Local implementations
(n-gram LM perplexity, hashed character n-gram embeddings) need no model
downloads and are fully deterministic; remote implementations speak the
scorer wire protocol::

    POST {base_url}/v1/score
    {"kind": "fluency"|"semantic", "source": str|null, "texts": [str, ...]}
    -> 200 {"scores": [number, ...]}   (one finite score per input text)
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import requests

from . import metrics
from .lm import FluencyScore, NGramLanguageModel, perplexity
from .metrics import SemanticScore
from .textkit import normalize, tokenize

__all__ = [
    "IdfTable",
    "build_idf",
    "HashedCharNGramEmbedder",
    "ScorerEndpoint",
    "RemoteScorerError",
    "build_score_request",
    "parse_score_response",
    "score_remote",
    "LocalFluencyScorer",
    "RemoteFluencyScorer",
    "LocalSemanticScorer",
    "RemoteSemanticScorer",
]


# --- idf ----------------------------------------------------------------------


@dataclass(frozen=True)
class IdfTable:
    """Smoothed inverse document frequencies: ln((1+N)/(1+df)) + 1."""

    weights: Mapping[str, float]
    document_count: int

    def weight(self, token: str) -> float:
        w = self.weights.get(token)
        if w is not None:
            return w
        # Unseen token: df = 0.
        return math.log(1.0 + self.document_count) + 1.0

    def __call__(self, token: str) -> float:
        return self.weight(token)


def build_idf(corpus: Iterable[str]) -> IdfTable:
    """Document frequencies over normalized, tokenized documents."""
    df: dict[str, int] = {}
    n_docs = 0
    for doc in corpus:
        toks = set(tokenize(normalize(doc)))
        if not toks:
            continue
        n_docs += 1
        for tok in toks:
            df[tok] = df.get(tok, 0) + 1
    if n_docs == 0:
        raise ValueError("build_idf: corpus contains no non-empty documents")
    weights = {
        tok: math.log((1.0 + n_docs) / (1.0 + count)) + 1.0 for tok, count in df.items()
    }
    return IdfTable(weights=weights, document_count=n_docs)


# --- local embeddings ---------------------------------------------------------


class HashedCharNGramEmbedder:
    """Deterministic token embeddings from hashed character n-grams.

    Each token is wrapped in boundary markers and decomposed into character
    n-grams (orders 3..5); every n-gram is hashed into one of ``dim`` signed
    buckets and the bucket sums are L2-normalized. Language-agnostic and
    model-free: morphologically close tokens share n-grams and therefore
    embedding mass.
    """

    def __init__(self, dim: int = 256, seed: int = 0, min_n: int = 3, max_n: int = 5):
        self.dim = dim
        self.seed = seed
        self.min_n = min_n
        self.max_n = max_n
        self._cache: dict[str, np.ndarray] = {}

    def _hash(self, data: str) -> int:
        digest = hashlib.blake2b(
            data.encode("utf-8"), digest_size=8, salt=self.seed.to_bytes(8, "little")
        ).digest()
        return int.from_bytes(digest, "little")

    def _embed_token(self, token: str) -> np.ndarray:
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        padded = f"<{token}>"
        vec = np.zeros(self.dim)
        for n in range(self.min_n, self.max_n + 1):
            for i in range(len(padded) - n + 1):
                h = self._hash(padded[i : i + n])
                sign = 1.0 if h & 1 else -1.0
                vec[(h >> 1) % self.dim] += sign
        norm = np.linalg.norm(vec)
        if norm < 1e-12:
            # Signed buckets cancelled out; fall back to a whole-token bucket.
            vec[:] = 0.0
            vec[(self._hash(padded) >> 1) % self.dim] = 1.0
            norm = 1.0
        vec /= norm
        self._cache[token] = vec
        return vec

    def __call__(self, tokens: Sequence[str]) -> np.ndarray:
        return np.stack([self._embed_token(tok) for tok in tokens])


# --- remote scorer client -----------------------------------------------------


@dataclass(frozen=True)
class ScorerEndpoint:
    base_url: str
    kind: str  # "fluency" | "semantic"
    timeout: float = 30.0
    max_batch: int = 64

    def __post_init__(self) -> None:
        if not self.base_url:
            raise ValueError("ScorerEndpoint: base_url must be non-empty")
        if self.kind not in ("fluency", "semantic"):
            raise ValueError(f"ScorerEndpoint: unknown kind {self.kind!r}")
        if self.timeout <= 0:
            raise ValueError("ScorerEndpoint: timeout must be positive")
        if self.max_batch < 1:
            raise ValueError("ScorerEndpoint: max_batch must be >= 1")


class RemoteScorerError(RuntimeError):
    """Transport failure, protocol error or malformed response from a scorer."""

    def __init__(self, message: str, endpoint: ScorerEndpoint, batch_index: int):
        super().__init__(f"{endpoint.kind} scorer at {endpoint.base_url}, batch {batch_index}: {message}")
        self.endpoint = endpoint
        self.batch_index = batch_index


def build_score_request(kind: str, source: str | None, texts: Sequence[str]) -> dict:
    return {"kind": kind, "source": source, "texts": list(texts)}


def parse_score_response(payload: object, expected: int) -> list[float]:
    if not isinstance(payload, dict) or "scores" not in payload:
        raise ValueError("response is missing the 'scores' field")
    scores = payload["scores"]
    if not isinstance(scores, list) or len(scores) != expected:
        got = len(scores) if isinstance(scores, list) else type(scores).__name__
        raise ValueError(f"expected {expected} scores, got {got}")
    out = []
    for s in scores:
        if not isinstance(s, (int, float)) or isinstance(s, bool) or not math.isfinite(s):
            raise ValueError(f"non-finite or non-numeric score: {s!r}")
        out.append(float(s))
    return out


def score_remote(
    endpoint: ScorerEndpoint,
    texts: Sequence[str],
    source: str | None = None,
    session: requests.Session | None = None,
) -> list[float]:
    """Score texts against a remote endpoint, batching at most max_batch per
    call and preserving input order. Raises RemoteScorerError on any failure."""
    if not texts:
        raise ValueError("score_remote: texts must be non-empty")
    if endpoint.kind == "semantic" and source is None:
        raise ValueError("score_remote: semantic scoring requires a source")
    http = session or requests
    url = endpoint.base_url.rstrip("/") + "/v1/score"
    scores: list[float] = []
    for batch_index, start in enumerate(range(0, len(texts), endpoint.max_batch)):
        batch = list(texts[start : start + endpoint.max_batch])
        body = build_score_request(endpoint.kind, source, batch)
        try:
            resp = http.post(url, json=body, timeout=endpoint.timeout)
        except requests.RequestException as exc:
            raise RemoteScorerError(f"transport failure: {exc}", endpoint, batch_index) from exc
        if resp.status_code != 200:
            raise RemoteScorerError(f"HTTP {resp.status_code}: {resp.text[:200]}", endpoint, batch_index)
        try:
            payload = resp.json()
        except ValueError as exc:
            raise RemoteScorerError(f"invalid JSON response: {exc}", endpoint, batch_index) from exc
        try:
            scores.extend(parse_score_response(payload, len(batch)))
        except ValueError as exc:
            raise RemoteScorerError(str(exc), endpoint, batch_index) from exc
    return scores


# --- scorer adapters used by the pipeline -------------------------------------


@dataclass
class LocalFluencyScorer:
    """Perplexity under a local n-gram language model."""

    lm: NGramLanguageModel
    name: str = "local-ngram-lm"

    def score_fluency(self, texts: Sequence[str]) -> list[FluencyScore]:
        return [perplexity(self.lm, tokenize(normalize(t))) for t in texts]


@dataclass
class RemoteFluencyScorer:
    endpoint: ScorerEndpoint

    @property
    def name(self) -> str:
        return f"remote:{self.endpoint.base_url}"

    def score_fluency(self, texts: Sequence[str]) -> list[FluencyScore]:
        scores = score_remote(self.endpoint, texts)
        # token_count is informational here; the remote tokenizer is opaque.
        return [
            FluencyScore(ppl=s, token_count=max(1, len(t.split())))
            for s, t in zip(scores, texts)
        ]


@dataclass
class LocalSemanticScorer:
    """Greedy cosine matching over hashed character n-gram embeddings."""

    embedder: HashedCharNGramEmbedder = field(default_factory=HashedCharNGramEmbedder)
    idf: IdfTable | None = None
    name: str = "local-greedy-cosine"

    def score_semantic(self, source: str, texts: Sequence[str]) -> list[SemanticScore]:
        src_tokens = tokenize(normalize(source))
        return [
            metrics.greedy_match_score(
                src_tokens, tokenize(normalize(t)), self.embedder, self.idf
            )
            for t in texts
        ]


@dataclass
class RemoteSemanticScorer:
    endpoint: ScorerEndpoint

    @property
    def name(self) -> str:
        return f"remote:{self.endpoint.base_url}"

    def score_semantic(self, source: str, texts: Sequence[str]) -> list[SemanticScore]:
        scores = score_remote(self.endpoint, texts, source=source)
        # The wire protocol carries a single f1-like similarity per text.
        return [SemanticScore(precision=s, recall=s, f1=s) for s in scores]
