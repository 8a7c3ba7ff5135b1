"""Label-preserving dataset augmentation through the paraphrase pipeline.

Each labeled example is paraphrased once (or ``multiplicity`` times, taken
from the ranked semantic survivors) and appended to the dataset with its
label copied and a provenance link back to the original id. Rows that
already carry a provenance link are passed through untouched by default, so
re-running augmentation never chains paraphrases of paraphrases.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .constraints import ConstraintConfig
from .pipeline import PipelineScorers, run
from .translator import GenerationConfig, generate_all

__all__ = ["LabeledExample", "AugmentStats", "AugmentedDataset", "augment", "subsample"]


@dataclass(frozen=True)
class LabeledExample:
    id: str
    text: str
    label: str
    augmented_from: str | None = None

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError(f"example {self.id!r}: text must be non-empty")


@dataclass
class AugmentStats:
    label_counts_before: dict[str, int] = field(default_factory=dict)
    label_counts_after: dict[str, int] = field(default_factory=dict)
    skip_count: int = 0
    errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "label_counts_before": dict(self.label_counts_before),
            "label_counts_after": dict(self.label_counts_after),
            "skip_count": self.skip_count,
            "errors": list(self.errors),
        }


@dataclass
class AugmentedDataset:
    originals: list[LabeledExample]
    generated: list[LabeledExample]
    stats: AugmentStats

    @property
    def rows(self) -> list[LabeledExample]:
        """Originals in input order, then generated rows in input order."""
        return self.originals + self.generated


def augment(
    dataset: Iterable[LabeledExample],
    gen_cfg: GenerationConfig,
    translator,
    scorers: PipelineScorers,
    constraint_cfg: ConstraintConfig | None = None,
    multiplicity: int = 1,
    include_augmented: bool = False,
    on_error: str = "skip",
) -> AugmentedDataset:
    """Paraphrase every example and return originals plus generated rows.

    An example whose pipeline produces no admissible paraphrase is counted as
    a skip. Pipeline or generation errors follow ``on_error`` ("skip" records
    the error and keeps going, so a long augmentation run survives isolated
    failures; "fail" propagates).
    """
    if multiplicity < 1:
        raise ValueError("multiplicity must be >= 1")
    if on_error not in ("fail", "skip"):
        raise ValueError(f"unknown error policy {on_error!r}")
    originals = list(dataset)
    if not originals:
        raise ValueError("augment: dataset is empty")
    if len({ex.id for ex in originals}) != len(originals):
        raise ValueError("augment: example ids must be unique")

    stats = AugmentStats(label_counts_before=dict(Counter(ex.label for ex in originals)))
    generated: list[LabeledExample] = []
    for ex in originals:
        if ex.augmented_from is not None and not include_augmented:
            continue
        try:
            cand_set = generate_all(ex.text, gen_cfg, translator, set_id=ex.id, on_error=on_error)
            result = run(ex.text, cand_set.candidates, scorers, constraint_cfg, result_id=ex.id)
        except Exception as exc:  # pipeline must not take the whole run down
            if on_error == "fail":
                raise
            stats.errors.append(f"{ex.id}: {exc}")
            stats.skip_count += 1
            continue
        if result.best is None:
            stats.skip_count += 1
            continue
        ranked = sorted(
            result.trace.semantic_scores,
            key=lambda cs: (-cs[1].f1, cs[0].generation_index),
        )
        for k, (cand, _) in enumerate(ranked[:multiplicity], start=1):
            generated.append(
                LabeledExample(
                    id=f"{ex.id}::aug{k}",
                    text=cand.text,
                    label=ex.label,
                    augmented_from=ex.id,
                )
            )
    stats.label_counts_after = dict(Counter(ex.label for ex in originals + generated))
    return AugmentedDataset(originals=originals, generated=generated, stats=stats)


def subsample(
    dataset: Sequence[LabeledExample],
    seed: int,
    keep_fraction: float | None = None,
) -> list[LabeledExample]:
    """Balance classes by down-sampling every label to the minority count,
    optionally keeping only a fraction of the balanced data per label.
    Output preserves input order; the RNG is fully seeded."""
    if keep_fraction is not None and not 0 < keep_fraction <= 1:
        raise ValueError("keep_fraction must be in (0, 1]")
    by_label: dict[str, list[int]] = {}
    for i, ex in enumerate(dataset):
        by_label.setdefault(ex.label, []).append(i)
    if not by_label:
        return []
    target = min(len(idxs) for idxs in by_label.values())
    if keep_fraction is not None:
        target = max(1, round(target * keep_fraction))
    rng = random.Random(seed)
    kept: set[int] = set()
    for label in sorted(by_label):
        kept.update(rng.sample(by_label[label], target))
    return [ex for i, ex in enumerate(dataset) if i in kept]
