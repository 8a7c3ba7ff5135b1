"""Text normalization, tokenization and n-gram helpers.

Every comparison in the toolkit (dedup, WER, BLEU, overlap checks) runs on
normalized, word-tokenized text, so the rules here are deliberately simple
and language-agnostic: Unicode lowercasing, whitespace collapsing, and
whitespace tokenization with boundary punctuation split off.
"""

from __future__ import annotations

import unicodedata
from typing import Sequence

__all__ = [
    "normalize",
    "tokenize",
    "join_tokens",
    "ngrams",
    "longest_contiguous_overlap",
]


def normalize(raw: str) -> str:
    """Lowercase, collapse all whitespace runs to single spaces, and strip.

    Lowercasing uses Python's locale-independent Unicode mapping; scripts
    without case (e.g. Hangul) pass through unchanged. Idempotent.
    """
    return " ".join(raw.lower().split())


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Split normalized text into word tokens.

    Splits on whitespace, then detaches leading/trailing punctuation
    characters as their own tokens. Interior punctuation (apostrophes,
    hyphens) stays attached, so "don't" remains one token while "sat."
    becomes ["sat", "."].
    """
    tokens: list[str] = []
    for chunk in text.split():
        lead: list[str] = []
        while chunk and _is_punct(chunk[0]):
            lead.append(chunk[0])
            chunk = chunk[1:]
        trail: list[str] = []
        while chunk and _is_punct(chunk[-1]):
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(lead)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(trail))
    return tokens


def join_tokens(tokens: Sequence[str]) -> str:
    """Inverse of tokenize up to punctuation detachment: single-space join."""
    return " ".join(tokens)


def ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    """All contiguous n-token windows, in order. Requires n >= 1."""
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def longest_contiguous_overlap(a: Sequence[str], b: Sequence[str]) -> int:
    """Length of the longest token run appearing contiguously in both a and b.

    Classic longest-common-substring DP over tokens; 0 if either side is
    empty.
    """
    if not a or not b:
        return 0
    best = 0
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best:
                    best = cur[j]
        prev = cur
    return best
