#!/usr/bin/env python3
"""Regenerate the bundled demo data under data/.

Everything is seeded, so reruns reproduce the committed files byte for byte:
a 1k-sentence training corpus for the local language model, 20 demo sources,
a 50-example labeled set for augmentation, mock translator tables built from
a synonym lexicon, and a small evaluation fixture.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"

# word -> (synonym_a, synonym_b)
NOUNS = {
    "cat": ("feline", "kitty"),
    "dog": ("hound", "pup"),
    "bird": ("sparrow", "finch"),
    "horse": ("pony", "mare"),
    "rabbit": ("hare", "bunny"),
    "farmer": ("grower", "planter"),
    "child": ("kid", "youngster"),
    "teacher": ("tutor", "mentor"),
    "doctor": ("medic", "healer"),
    "garden": ("yard", "plot"),
    "river": ("stream", "creek"),
    "market": ("bazaar", "fair"),
    "village": ("town", "hamlet"),
    "house": ("home", "cottage"),
    "road": ("path", "lane"),
    "forest": ("woods", "grove"),
    "school": ("academy", "schoolhouse"),
    "mountain": ("peak", "hill"),
}
VERBS = {
    "sat": ("rested", "perched"),
    "slept": ("dozed", "napped"),
    "walked": ("strolled", "wandered"),
    "ran": ("dashed", "sprinted"),
    "jumped": ("leaped", "hopped"),
    "waited": ("lingered", "paused"),
    "worked": ("labored", "toiled"),
    "played": ("frolicked", "romped"),
    "sang": ("hummed", "chanted"),
    "looked": ("gazed", "peered"),
}
ADVERBS = {
    "quietly": ("calmly", "softly"),
    "quickly": ("swiftly", "rapidly"),
    "slowly": ("gently", "lazily"),
    "happily": ("gladly", "cheerfully"),
    "often": ("frequently", "regularly"),
    "early": ("soon", "promptly"),
}
ADJECTIVES = {
    "small": ("tiny", "little"),
    "old": ("aged", "ancient"),
    "young": ("youthful", "spry"),
    "busy": ("active", "lively"),
    "quiet": ("calm", "still"),
    "bright": ("shiny", "sunny"),
}
LEXICON = {**NOUNS, **VERBS, **ADVERBS, **ADJECTIVES}
PREPS = ["near", "beside", "under", "behind", "across", "in", "on", "at"]

TEMPLATES = [
    "the {adj} {noun} {verb} {prep} the {noun2}",
    "a {noun} {verb} {adv}",
    "the {noun} {verb} {prep} the {adj} {noun2}",
    "the {adj} {noun} {verb} {adv}",
    "a {adj} {noun} {verb} {prep} the {noun2}",
    "the {noun} and the {noun2} {verb} {adv}",
    "a {noun} {verb} {adv} {prep} the {noun2}",
]

TOY_SOURCES = [
    "the small cat sat near the old garden",
    "a young child played happily in the village",
    "the busy farmer worked early beside the river",
    "the old teacher waited quietly in the school",
    "a small dog ran quickly across the road",
    "the bright bird sang happily in the forest",
    "the young doctor walked slowly in the market",
    "a quiet rabbit slept under the old house",
    "the horse jumped across the small river",
    "the child looked often at the bright mountain",
    "a busy teacher worked early in the school",
    "the old farmer sat beside the quiet forest",
    "a bird slept quietly near the garden",
    "the dog waited behind the old market",
    "a young horse ran happily across the village",
    "the small rabbit jumped behind the house",
    "the doctor sang quietly beside the road",
    "A cat slept early in the quiet house.",
    "the bright child played often near the river",
    "a small bird looked at the busy market",
]

PEOPLE = {"farmer", "child", "teacher", "doctor"}
PLACES = {"garden", "river", "market", "village", "house", "road", "forest", "school", "mountain"}


def word_pool(rng: random.Random, table: dict[str, tuple[str, str]]) -> str:
    # Base words and both synonyms appear in the corpus, so the language
    # model has counts for every form the mock translator can emit.
    base = rng.choice(sorted(table))
    return rng.choice([base, *table[base]])


def make_corpus(rng: random.Random, n: int) -> list[str]:
    lines = []
    for _ in range(n):
        template = rng.choice(TEMPLATES)
        line = template.format(
            adj=word_pool(rng, ADJECTIVES),
            noun=word_pool(rng, NOUNS),
            noun2=word_pool(rng, NOUNS),
            verb=word_pool(rng, VERBS),
            adv=word_pool(rng, ADVERBS),
            prep=rng.choice(PREPS),
        )
        if rng.random() < 0.3:
            line += " ."
        lines.append(line)
    return lines


def make_tables() -> dict:
    all_a = {w: syns[0] for w, syns in LEXICON.items()}
    all_b = {w: syns[1] for w, syns in LEXICON.items()}
    mix_verbs_b = {**all_a, **{w: syns[1] for w, syns in VERBS.items()}}
    noun_a_to_b = {syns[0]: syns[1] for _, syns in NOUNS.items()}
    verbs_adverbs_b = {w: syns[1] for w, syns in {**VERBS, **ADVERBS}.items()}
    return {
        "pairs": {
            # direct decoding: three synonym variants, then token rotations
            "en-en": {"maps": [all_a, mix_verbs_b, all_b], "rotate": True},
            # fr round trip: forward substitutes synonym a, backward shifts
            # nouns to synonym b (a lossy back-translation)
            "en-fr": {"map": all_a},
            "fr-en": {"map": noun_a_to_b},
            # de round trip: forward is identity, backward replaces verbs and
            # adverbs only, leaving longer source overlaps in place
            "en-de": {"map": {}},
            "de-en": {"map": verbs_adverbs_b},
        }
    }


def make_labeled(rng: random.Random) -> list[dict]:
    rows = []
    for i in range(48):
        template = rng.choice(TEMPLATES)
        noun = rng.choice(sorted(NOUNS))
        noun2 = rng.choice(sorted(NOUNS))
        text = template.format(
            adj=rng.choice(sorted(ADJECTIVES)),
            noun=noun,
            noun2=noun2,
            verb=rng.choice(sorted(VERBS)),
            adv=rng.choice(sorted(ADVERBS)),
            prep=rng.choice(PREPS),
        )
        if noun in PEOPLE:
            label = "people"
        elif noun in PLACES:
            label = "places"
        else:
            label = "animals"
        rows.append({"id": f"t{i + 1:03d}", "text": text, "label": label})
    # Two function-word-only rows: every candidate either copies the source
    # or violates the overlap constraint, so augmentation must skip them.
    rows.append({"id": "t049", "text": "near the under the beside", "label": "places"})
    rows.append({"id": "t050", "text": "in the near the behind", "label": "places"})
    return rows


EVAL_RECORDS = [
    {
        "id": "e1",
        "source": "the small cat sat near the old garden",
        "output": "the tiny feline rested near the aged yard",
        "references": ["the tiny feline rested near the aged yard"],
    },
    {
        "id": "e2",
        "source": "a young child played happily in the village",
        "output": "a youthful kid frolicked gladly in the town",
        "references": ["a kid played cheerfully in the town", "a young child had fun in the village"],
    },
    {
        "id": "e3",
        "source": "the busy farmer worked early beside the river",
        "output": "the active grower labored soon beside the stream",
        "references": [],
    },
    {
        "id": "e4",
        "source": "the dog waited behind the old market",
        "output": "the hound lingered behind the aged bazaar",
        "references": ["the hound paused behind the ancient bazaar"],
    },
]


def main() -> None:
    DATA.mkdir(exist_ok=True)
    rng = random.Random(20240811)

    corpus = make_corpus(rng, 1000)
    (DATA / "lm_corpus.txt").write_text("\n".join(corpus) + "\n", encoding="utf-8")

    with open(DATA / "toy_sources.jsonl", "w", encoding="utf-8") as fh:
        for i, text in enumerate(TOY_SOURCES, start=1):
            fh.write(json.dumps({"id": f"s{i:02d}", "text": text}, ensure_ascii=False) + "\n")

    with open(DATA / "toy_labeled.jsonl", "w", encoding="utf-8") as fh:
        for row in make_labeled(rng):
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    (DATA / "mock_tables.json").write_text(
        json.dumps(make_tables(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )

    with open(DATA / "eval_toy.jsonl", "w", encoding="utf-8") as fh:
        for row in EVAL_RECORDS:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    print(f"wrote demo data to {DATA}")


if __name__ == "__main__":
    main()
