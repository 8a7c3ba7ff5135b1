"""Sentence metrics: word error rate, BLEU / inverse BLEU, greedy semantic match.

All metrics operate on token sequences produced by :mod:`parapick.textkit`.
WER is used as a diversity score (higher = more different from the source),
inverse BLEU likewise, and the greedy cosine match plays the role of a
semantic similarity score with pluggable token embeddings.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .textkit import ngrams

__all__ = [
    "WerScore",
    "BleuScore",
    "SemanticScore",
    "DegenerateEmbeddingError",
    "wer",
    "sentence_bleu",
    "corpus_bleu",
    "isacrebleu",
    "corpus_isacrebleu",
    "greedy_match_score",
]

BLEU_ORDER = 4

TokenSeq = Sequence[str]
Embedder = Callable[[TokenSeq], np.ndarray]


class DegenerateEmbeddingError(ValueError):
    """An embedding provider returned a zero (or near-zero) vector."""


@dataclass(frozen=True)
class WerScore:
    """Word error rate: unit-cost edit operations normalized by source length."""

    value: float
    substitutions: int
    insertions: int
    deletions: int
    source_len: int

    @property
    def distance(self) -> int:
        """Raw (unnormalized) edit distance."""
        return self.substitutions + self.insertions + self.deletions


@dataclass(frozen=True)
class BleuScore:
    value: float  # 0..100
    precisions: tuple[float, float, float, float]
    brevity_penalty: float


@dataclass(frozen=True)
class SemanticScore:
    precision: float
    recall: float
    f1: float


def wer(source: TokenSeq, candidate: TokenSeq) -> WerScore:
    """Word-level Levenshtein distance from source to candidate, / len(source).

    Substitutions, insertions and deletions all cost 1. "Insertion" means a
    candidate token with no source counterpart; "deletion" a source token
    with no candidate counterpart.
    """
    if not source:
        raise ValueError("wer: source must be non-empty")
    m, n = len(source), len(candidate)
    # dist[i][j] = edit distance between source[:i] and candidate[:j]
    dist = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        dist[i][0] = i
    for j in range(n + 1):
        dist[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if source[i - 1] == candidate[j - 1]:
                dist[i][j] = dist[i - 1][j - 1]
            else:
                dist[i][j] = 1 + min(
                    dist[i - 1][j - 1],  # substitution
                    dist[i][j - 1],  # insertion
                    dist[i - 1][j],  # deletion
                )
    subs = ins = dels = 0
    i, j = m, n
    while i > 0 or j > 0:
        if i > 0 and j > 0 and source[i - 1] == candidate[j - 1] and dist[i][j] == dist[i - 1][j - 1]:
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + 1:
            subs += 1
            i, j = i - 1, j - 1
        elif j > 0 and dist[i][j] == dist[i][j - 1] + 1:
            ins += 1
            j -= 1
        else:
            dels += 1
            i -= 1
    return WerScore(
        value=dist[m][n] / max(1, m),
        substitutions=subs,
        insertions=ins,
        deletions=dels,
        source_len=m,
    )


def _closest_ref_len(cand_len: int, references: Sequence[TokenSeq]) -> int:
    # Reference length closest to the candidate length; ties prefer shorter.
    best = len(references[0])
    for ref in references[1:]:
        rl = len(ref)
        if abs(rl - cand_len) < abs(best - cand_len) or (
            abs(rl - cand_len) == abs(best - cand_len) and rl < best
        ):
            best = rl
    return best


def _match_stats(
    candidate: TokenSeq, references: Sequence[TokenSeq]
) -> tuple[list[int], list[int]]:
    """Clipped n-gram matches and totals for orders 1..BLEU_ORDER."""
    matched = [0] * BLEU_ORDER
    total = [0] * BLEU_ORDER
    for n in range(1, BLEU_ORDER + 1):
        cand_counts = Counter(ngrams(candidate, n))
        if not cand_counts:
            continue
        max_ref: Counter = Counter()
        for ref in references:
            for gram, cnt in Counter(ngrams(ref, n)).items():
                if cnt > max_ref[gram]:
                    max_ref[gram] = cnt
        total[n - 1] = sum(cand_counts.values())
        matched[n - 1] = sum(min(cnt, max_ref[gram]) for gram, cnt in cand_counts.items())
    return matched, total


def _bleu_from_stats(matched: Sequence[int], total: Sequence[int], cand_len: int, ref_len: int) -> BleuScore:
    if cand_len == 0:
        # Limit convention: an empty candidate scores 0 with BP taken as 0.
        return BleuScore(value=0.0, precisions=(0.0,) * BLEU_ORDER, brevity_penalty=0.0)
    precisions: list[float] = []
    smooth = 1
    for n in range(BLEU_ORDER):
        if matched[n] > 0:
            precisions.append(matched[n] / total[n])
        else:
            # Exponential smoothing: halve the smoothing mass at each
            # zero-match order. Orders with no n-grams at all (candidate
            # shorter than n) use a denominator of 1.
            precisions.append(1.0 / (2**smooth * max(1, total[n])))
            smooth += 1
    bp = min(1.0, math.exp(1.0 - ref_len / cand_len))
    value = 100.0 * bp * math.exp(sum(math.log(p) for p in precisions) / BLEU_ORDER)
    return BleuScore(value=value, precisions=tuple(precisions), brevity_penalty=bp)


def sentence_bleu(candidate: TokenSeq, references: Sequence[TokenSeq]) -> BleuScore:
    """BLEU-4 with clipped precisions, closest-reference brevity penalty and
    exponential smoothing for zero-match orders."""
    if not references or any(len(r) == 0 for r in references):
        raise ValueError("sentence_bleu: at least one non-empty reference required")
    matched, total = _match_stats(candidate, references)
    ref_len = _closest_ref_len(len(candidate), references)
    return _bleu_from_stats(matched, total, len(candidate), ref_len)


def corpus_bleu(pairs: Sequence[tuple[TokenSeq, Sequence[TokenSeq]]]) -> BleuScore:
    """Corpus BLEU: n-gram match/total counts and lengths are summed over all
    (candidate, references) pairs before the BLEU formula is applied."""
    if not pairs:
        raise ValueError("corpus_bleu: empty corpus")
    agg_matched = [0] * BLEU_ORDER
    agg_total = [0] * BLEU_ORDER
    cand_len = 0
    ref_len = 0
    for candidate, references in pairs:
        if not references or any(len(r) == 0 for r in references):
            raise ValueError("corpus_bleu: at least one non-empty reference per pair")
        matched, total = _match_stats(candidate, references)
        for n in range(BLEU_ORDER):
            agg_matched[n] += matched[n]
            agg_total[n] += total[n]
        cand_len += len(candidate)
        ref_len += _closest_ref_len(len(candidate), references)
    return _bleu_from_stats(agg_matched, agg_total, cand_len, ref_len)


def isacrebleu(candidate: TokenSeq, references: Sequence[TokenSeq]) -> float:
    """Inverse BLEU on 0..100: higher means more n-gram divergence."""
    return 100.0 - sentence_bleu(candidate, references).value


def corpus_isacrebleu(pairs: Sequence[tuple[TokenSeq, Sequence[TokenSeq]]]) -> float:
    return 100.0 - corpus_bleu(pairs).value


def _embed_checked(embedder: Embedder, tokens: TokenSeq) -> np.ndarray:
    vecs = np.asarray(embedder(tokens), dtype=float)
    if vecs.ndim != 2 or vecs.shape[0] != len(tokens):
        raise ValueError(
            f"embedder must return one vector per token, got shape {vecs.shape} for {len(tokens)} tokens"
        )
    norms = np.linalg.norm(vecs, axis=1)
    if np.any(norms < 1e-12):
        bad = [tokens[i] for i in np.nonzero(norms < 1e-12)[0]]
        raise DegenerateEmbeddingError(f"zero-vector embedding for tokens: {bad}")
    return vecs


def greedy_match_score(
    source: TokenSeq,
    candidate: TokenSeq,
    embedder: Embedder,
    idf: Mapping[str, float] | Callable[[str], float] | None = None,
) -> SemanticScore:
    """Greedy token-matching similarity between two embedded sentences.

    Each source token is matched to its maximum-cosine candidate token and
    vice versa; the idf-weighted means of those maxima give recall and
    precision. ``idf`` maps tokens to positive weights (defaults to 1.0 for
    every token); ``embedder`` must return unit-norm row vectors.
    """
    if not source or not candidate:
        raise ValueError("greedy_match_score: source and candidate must be non-empty")
    weight: Callable[[str], float]
    if idf is None:
        weight = lambda tok: 1.0  # noqa: E731
    elif callable(idf):
        weight = idf
    else:
        weight = lambda tok: idf.get(tok, 1.0)  # noqa: E731

    src_vecs = _embed_checked(embedder, source)
    cand_vecs = _embed_checked(embedder, candidate)
    sim = src_vecs @ cand_vecs.T  # cosine similarities (unit-norm inputs)

    src_w = np.array([weight(t) for t in source], dtype=float)
    cand_w = np.array([weight(t) for t in candidate], dtype=float)
    recall = float(np.dot(sim.max(axis=1), src_w) / src_w.sum())
    precision = float(np.dot(sim.max(axis=0), cand_w) / cand_w.sum())
    denom = precision + recall
    f1 = 2.0 * precision * recall / denom if denom > 0 else 0.0
    return SemanticScore(precision=precision, recall=recall, f1=f1)
