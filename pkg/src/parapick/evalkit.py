"""Corpus-level evaluation of paraphrase outputs.

Three columns per corpus: semantic similarity of outputs to gold references
(falling back to the source when a record has none), inverse corpus BLEU of
outputs against sources as a diversity measure, and mean perplexity as a
fluency measure. The semantic column comes from whatever semantic scorer is
plugged in — by default the local greedy cosine matcher, which is not a
trained metric; the report's provenance labels say exactly what produced
each column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .metrics import corpus_isacrebleu, isacrebleu
from .scorers import RemoteScorerError
from .textkit import normalize, tokenize

__all__ = ["EvalRecord", "EvalReport", "evaluate"]


@dataclass(frozen=True)
class EvalRecord:
    id: str
    source: str
    system_output: str
    gold_references: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not normalize(self.source) or not normalize(self.system_output):
            raise ValueError(f"record {self.id!r}: source and output must be non-empty")


@dataclass(frozen=True)
class EvalReport:
    semantic_mean: float
    diversity_corpus: float
    diversity_sentence_mean: float
    fluency_mean_ppl: float
    count: int
    scorer_provenance: dict[str, str]

    def to_dict(self) -> dict:
        return {
            "semantic_mean": self.semantic_mean,
            "diversity_corpus": self.diversity_corpus,
            "diversity_sentence_mean": self.diversity_sentence_mean,
            "fluency_mean_ppl": self.fluency_mean_ppl,
            "count": self.count,
            "scorer_provenance": dict(self.scorer_provenance),
        }


def evaluate(
    records: Iterable[EvalRecord],
    semantic_scorer,
    fluency_scorer,
    on_error: str = "fail",
) -> EvalReport:
    """Aggregate the three metric columns over a record stream.

    Per-record semantic scores take the best match over the record's gold
    references. ``on_error="skip"`` excludes records whose scorer call failed
    and adjusts the count; the default propagates the failure.
    """
    if on_error not in ("fail", "skip"):
        raise ValueError(f"unknown error policy {on_error!r}")
    semantic_vals: list[float] = []
    ppl_vals: list[float] = []
    sentence_divs: list[float] = []
    corpus_pairs: list[tuple[list[str], list[list[str]]]] = []
    vs_source = 0
    skipped = 0

    for rec in records:
        output = normalize(rec.system_output)
        refs = [normalize(r) for r in rec.gold_references if normalize(r)]
        if not refs:
            refs = [normalize(rec.source)]
            vs_source += 1
        try:
            f1 = max(
                semantic_scorer.score_semantic(ref, [output])[0].f1 for ref in refs
            )
            ppl = fluency_scorer.score_fluency([output])[0].ppl
        except RemoteScorerError:
            if on_error == "fail":
                raise
            skipped += 1
            continue
        out_tokens = tokenize(output)
        src_tokens = tokenize(normalize(rec.source))
        semantic_vals.append(f1)
        ppl_vals.append(ppl)
        sentence_divs.append(isacrebleu(out_tokens, [src_tokens]))
        corpus_pairs.append((out_tokens, [src_tokens]))

    if not corpus_pairs:
        raise ValueError("evaluate: no records were evaluated")

    count = len(corpus_pairs)
    provenance = {
        "semantic_scorer": getattr(semantic_scorer, "name", type(semantic_scorer).__name__)
        + " (pluggable similarity, not a trained metric)",
        "fluency_scorer": getattr(fluency_scorer, "name", type(fluency_scorer).__name__),
        "diversity": "corpus-level inverse BLEU of outputs vs sources "
        "(sentence-mean emitted alongside)",
    }
    if vs_source:
        provenance["semantic_vs_source_records"] = str(vs_source)
    if skipped:
        provenance["skipped_records"] = str(skipped)
    # math.fsum: exactly rounded, so record order cannot change the result.
    return EvalReport(
        semantic_mean=math.fsum(semantic_vals) / count,
        diversity_corpus=corpus_isacrebleu(corpus_pairs),
        diversity_sentence_mean=math.fsum(sentence_divs) / count,
        fluency_mean_ppl=math.fsum(ppl_vals) / count,
        count=count,
        scorer_provenance=provenance,
    )
