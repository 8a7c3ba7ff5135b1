"""Post-hoc validators for decoder blocking restrictions.

Remote decoders receive these limits as request hints, but compliance can't
be verified, so the same rules are re-checked locally on every candidate:
(1) no contiguous copy of the source longer than half its length (or longer
than a fixed n-gram bound for short sources) and (2) no repeated n-gram
inside the candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .textkit import longest_contiguous_overlap, ngrams

__all__ = [
    "ConstraintConfig",
    "ConstraintReport",
    "effective_config",
    "check_source_overlap",
    "check_repeated_ngram",
    "evaluate_candidate",
]


@dataclass(frozen=True)
class ConstraintConfig:
    max_source_overlap_ratio: float = 0.5
    no_repeat_ngram: int = 3
    short_source_token_threshold: int = 6
    short_source_overlap_ngram: int = 2
    # Resolved absolute overlap bound in tokens; set by effective_config for
    # short sources, overriding the ratio rule when present.
    overlap_token_limit: int | None = None

    def __post_init__(self) -> None:
        if not 0 < self.max_source_overlap_ratio <= 1:
            raise ValueError("max_source_overlap_ratio must be in (0, 1]")
        if self.no_repeat_ngram < 1:
            raise ValueError("no_repeat_ngram must be >= 1")
        if self.short_source_token_threshold < 1:
            raise ValueError("short_source_token_threshold must be >= 1")
        if self.short_source_overlap_ngram < 1:
            raise ValueError("short_source_overlap_ngram must be >= 1")

    def overlap_bound(self, source_len: int) -> int:
        """Longest source run a candidate may share without violating."""
        if self.overlap_token_limit is not None:
            return self.overlap_token_limit
        return int(source_len * self.max_source_overlap_ratio)


@dataclass(frozen=True)
class ConstraintReport:
    source_overlap_violation: bool
    repeated_ngram_violation: bool
    overlap_run_length: int

    @property
    def ok(self) -> bool:
        return not (self.source_overlap_violation or self.repeated_ngram_violation)


def effective_config(source: Sequence[str], cfg: ConstraintConfig) -> ConstraintConfig:
    """Resolve short-source mode: sources at or under the token threshold get
    the fixed n-gram overlap bound instead of the half-length ratio."""
    if len(source) <= cfg.short_source_token_threshold:
        return replace(cfg, overlap_token_limit=cfg.short_source_overlap_ngram)
    return cfg


def check_source_overlap(
    source: Sequence[str], candidate: Sequence[str], cfg: ConstraintConfig
) -> ConstraintReport:
    """Flag candidates sharing a contiguous token run with the source longer
    than the allowed bound ("more than" is strict: equality passes)."""
    if not source:
        raise ValueError("check_source_overlap: source must be non-empty")
    eff = effective_config(source, cfg)
    run = longest_contiguous_overlap(source, candidate)
    return ConstraintReport(
        source_overlap_violation=run > eff.overlap_bound(len(source)),
        repeated_ngram_violation=False,
        overlap_run_length=run,
    )


def check_repeated_ngram(candidate: Sequence[str], n: int) -> bool:
    """True (violation) iff any n-gram occurs at least twice in the candidate."""
    grams = ngrams(candidate, n)
    return len(set(grams)) < len(grams)


def evaluate_candidate(
    source: Sequence[str], candidate: Sequence[str], cfg: ConstraintConfig
) -> ConstraintReport:
    """Run both checks and combine into one report."""
    overlap = check_source_overlap(source, candidate, cfg)
    return ConstraintReport(
        source_overlap_violation=overlap.source_overlap_violation,
        repeated_ngram_violation=check_repeated_ngram(candidate, cfg.no_repeat_ngram),
        overlap_run_length=overlap.overlap_run_length,
    )
