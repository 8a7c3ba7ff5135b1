"""The ranking-and-filtering cascade that picks one best paraphrase.

Four stages, each discarding the weakest candidates from the last:

1. overlap — drop copies of the source, duplicates, and constraint violators;
2. diversity — keep the min(5, n/2) most word-edit-distant candidates;
3. fluency — keep the min(3, n/2) lowest-perplexity candidates;
4. semantic — pick the candidate most similar to the source.

Counts use floor division clamped to at least 1 so a lone viable candidate
is never discarded. Every eliminated candidate lands in the rejection log
with the stage and reason; every stage's survivors are recorded, so a trace
fully accounts for each input candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .constraints import ConstraintConfig, effective_config, evaluate_candidate
from .lm import FluencyScore
from .metrics import SemanticScore, WerScore, wer
from .scorers import RemoteScorerError
from .textkit import normalize, tokenize
from .translator import Candidate

__all__ = [
    "DIVERSITY_CAP",
    "FLUENCY_CAP",
    "RejectionEntry",
    "SelectionTrace",
    "ParaphraseResult",
    "PipelineScorers",
    "stage_keep_count",
    "dedup_overlap",
    "select_diversity",
    "select_fluency",
    "select_semantic",
    "run",
]

DIVERSITY_CAP = 5
FLUENCY_CAP = 3


@dataclass(frozen=True)
class RejectionEntry:
    candidate: Candidate
    stage: str  # "overlap" | "diversity" | "fluency"
    reason: str


@dataclass
class SelectionTrace:
    overlap_cands: list[Candidate] = field(default_factory=list)
    diversity_cands: list[tuple[Candidate, WerScore]] = field(default_factory=list)
    fluency_cands: list[tuple[Candidate, FluencyScore]] = field(default_factory=list)
    semantic_scores: list[tuple[Candidate, SemanticScore]] = field(default_factory=list)
    best: Candidate | None = None
    rejection_log: list[RejectionEntry] = field(default_factory=list)
    substitutions: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class ParaphraseResult:
    id: str
    source: str
    best: str | None
    trace: SelectionTrace


@dataclass
class PipelineScorers:
    """Scorers for the fluency and semantic stages, with optional local
    fallbacks used (and logged) when a remote scorer fails."""

    fluency: object
    semantic: object
    fluency_fallback: object | None = None
    semantic_fallback: object | None = None


def stage_keep_count(n: int, cap: int) -> int:
    """min(cap, n/2) with floor division, clamped to keep at least one
    candidate whenever any exist."""
    if n == 0:
        return 0
    return max(1, min(cap, n // 2))


def _dedup_decisions(
    source: str, cands: Sequence[Candidate], cfg: ConstraintConfig
) -> Iterator[tuple[Candidate, str | None]]:
    src_tokens = tokenize(source)
    eff = effective_config(src_tokens, cfg)
    kept_texts: set[str] = set()
    for cand in cands:
        text = normalize(cand.text)
        if text == source:
            yield cand, "equals_source"
            continue
        if text in kept_texts:
            yield cand, "duplicate"
            continue
        report = evaluate_candidate(src_tokens, tokenize(text), eff)
        if report.source_overlap_violation:
            yield cand, f"source_overlap(run={report.overlap_run_length})"
            continue
        if report.repeated_ngram_violation:
            yield cand, "repeated_ngram"
            continue
        kept_texts.add(text)
        yield cand, None


def dedup_overlap(
    source: str, cands: Sequence[Candidate], cfg: ConstraintConfig | None = None
) -> list[Candidate]:
    """Overlap stage: drop source copies, duplicates (first occurrence wins)
    and constraint violators, preserving arrival order."""
    cfg = cfg or ConstraintConfig()
    return [c for c, reason in _dedup_decisions(normalize(source), cands, cfg) if reason is None]


def select_diversity(
    source: str, overlap_cands: Sequence[Candidate]
) -> list[tuple[Candidate, WerScore]]:
    """Diversity stage: keep the top-k candidates by word error rate against
    the source (higher = more diverse); ties go to earlier candidates."""
    src_tokens = tokenize(normalize(source))
    scored = [(cand, wer(src_tokens, tokenize(cand.text))) for cand in overlap_cands]
    k = stage_keep_count(len(scored), DIVERSITY_CAP)
    ranked = sorted(scored, key=lambda cs: (-cs[1].value, cs[0].generation_index))
    return sorted(ranked[:k], key=lambda cs: cs[0].generation_index)


def select_fluency(
    diversity_cands: Sequence[tuple[Candidate, WerScore]], fluency_scorer
) -> list[tuple[Candidate, FluencyScore]]:
    """Fluency stage: keep the k lowest-perplexity candidates."""
    if not diversity_cands:
        return []
    texts = [cand.text for cand, _ in diversity_cands]
    scores = fluency_scorer.score_fluency(texts)
    scored = [(cand, fl) for (cand, _), fl in zip(diversity_cands, scores)]
    k = stage_keep_count(len(scored), FLUENCY_CAP)
    ranked = sorted(scored, key=lambda cs: (cs[1].ppl, cs[0].generation_index))
    return sorted(ranked[:k], key=lambda cs: cs[0].generation_index)


def select_semantic(
    source: str, fluency_cands: Sequence[tuple[Candidate, FluencyScore]], semantic_scorer
) -> tuple[Candidate | None, list[tuple[Candidate, SemanticScore]]]:
    """Semantic stage: score every survivor against the source and return the
    f1-argmax plus all scores; ties go to the earliest candidate."""
    if not fluency_cands:
        return None, []
    texts = [cand.text for cand, _ in fluency_cands]
    scores = semantic_scorer.score_semantic(source, texts)
    scored = [(cand, sem) for (cand, _), sem in zip(fluency_cands, scores)]
    best = min(scored, key=lambda cs: (-cs[1].f1, cs[0].generation_index))[0]
    return best, scored


def _call_with_fallback(primary, fallback, call, substitutions: list[str], stage: str):
    try:
        return call(primary)
    except RemoteScorerError as exc:
        if fallback is None:
            raise
        substitutions.append(f"{stage}: remote scorer failed ({exc}); used local fallback")
        return call(fallback)


def run(
    source: str,
    cands: Sequence[Candidate],
    scorers: PipelineScorers,
    cfg: ConstraintConfig | None = None,
    result_id: str = "",
) -> ParaphraseResult:
    """Run the full cascade over one candidate set.

    Deterministic given identical inputs and scorer outputs; the returned
    trace accounts for every input candidate either as a stage survivor or
    as a rejection-log entry.
    """
    cfg = cfg or ConstraintConfig()
    src = normalize(source)
    trace = SelectionTrace()

    indices = [c.generation_index for c in cands]
    if len(set(indices)) != len(indices):
        raise ValueError("run: candidate generation_index values must be unique")
    cands = sorted(cands, key=lambda c: c.generation_index)

    for cand, reason in _dedup_decisions(src, cands, cfg):
        if reason is None:
            trace.overlap_cands.append(cand)
        else:
            trace.rejection_log.append(RejectionEntry(cand, "overlap", reason))

    trace.diversity_cands = select_diversity(src, trace.overlap_cands)
    surviving = {cand.generation_index for cand, _ in trace.diversity_cands}
    for cand in trace.overlap_cands:
        if cand.generation_index not in surviving:
            trace.rejection_log.append(RejectionEntry(cand, "diversity", "below_cutoff"))

    trace.fluency_cands = _call_with_fallback(
        scorers.fluency,
        scorers.fluency_fallback,
        lambda sc: select_fluency(trace.diversity_cands, sc),
        trace.substitutions,
        "fluency",
    )
    surviving = {cand.generation_index for cand, _ in trace.fluency_cands}
    for cand, _ in trace.diversity_cands:
        if cand.generation_index not in surviving:
            trace.rejection_log.append(RejectionEntry(cand, "fluency", "below_cutoff"))

    trace.best, trace.semantic_scores = _call_with_fallback(
        scorers.semantic,
        scorers.semantic_fallback,
        lambda sc: select_semantic(src, trace.fluency_cands, sc),
        trace.substitutions,
        "semantic",
    )

    return ParaphraseResult(
        id=result_id,
        source=src,
        best=trace.best.text if trace.best is not None else None,
        trace=trace,
    )
