"""Acceptance suite: one test per release criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to get one line per
criterion. Each test prints an explicit PASS marker after its assertions, so
a -s run reads as a checklist; under plain pytest the test outcome itself is
the line.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import time

import pytest

from parapick.augment import LabeledExample, augment
from parapick.constraints import ConstraintConfig, check_source_overlap, effective_config, evaluate_candidate
from parapick.lm import BOS, train_lm
from parapick.metrics import isacrebleu, sentence_bleu, wer
from parapick.pipeline import PipelineScorers, run, stage_keep_count
from parapick.scorers import (
    LocalFluencyScorer,
    LocalSemanticScorer,
    build_score_request,
    parse_score_response,
)
from parapick.textkit import normalize, tokenize
from parapick.translator import (
    GenerationConfig,
    MockTranslator,
    build_translate_request,
    generate_all,
    load_mock_tables,
    parse_translate_response,
)

from conftest import DATA_DIR, FIXTURE_DIR, make_candidates
from test_constraints import brute_force_longest_run
from test_metrics import edit_distance_recursive


def done(name):
    print(f"\nACCEPT PASS: {name}")


def test_wer_oracle_equivalence():
    """DP word error rate matches exhaustive recursion over thousands of
    pairs, all length combinations up to 5x5, 3-symbol alphabet, < 10 s."""
    start = time.perf_counter()
    alphabet = ("x", "y", "z")
    rng = random.Random(20240811)
    pairs = []
    # exhaustive for short sequences
    short = [seq for n in range(0, 4) for seq in itertools.product(alphabet, repeat=n)]
    pairs.extend((a, b) for a in short for b in short if a)
    # sampled coverage of every remaining length combination
    for la in range(1, 6):
        for lb in range(0, 6):
            for _ in range(40):
                a = tuple(rng.choice(alphabet) for _ in range(la))
                b = tuple(rng.choice(alphabet) for _ in range(lb))
                pairs.append((a, b))
    assert len(pairs) > 2000
    for a, b in pairs:
        score = wer(list(a), list(b))
        assert score.distance == edit_distance_recursive(a, b)
        assert score.value == score.distance / len(a)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    done(f"WER oracle equivalence ({len(pairs)} pairs in {elapsed:.2f}s)")


def test_bleu_isacrebleu_criteria():
    """Identity isacrebleu 0 +-1e-9; long disjoint > 99; the pre-registered
    4-vs-6-token hand example matches to 1e-6."""
    x = ["the", "cat", "sat", "down"]
    assert isacrebleu(x, [x]) == pytest.approx(0.0, abs=1e-9)

    cand = [f"c{i}" for i in range(20)]
    ref = [f"r{i}" for i in range(20)]
    assert isacrebleu(cand, [ref]) > 99.0

    # Hand-executed formula: p = (3/4, 2/3, 1/2, smoothed 1/2), bp = e^-0.5.
    expected = 100.0 * math.exp(-0.5) * (0.75 * (2 / 3) * 0.5 * 0.5) ** 0.25
    got = sentence_bleu(
        ["the", "cat", "sat", "down"], [["the", "cat", "sat", "on", "the", "mat"]]
    ).value
    assert got == pytest.approx(expected, abs=1e-6)
    done("BLEU/isacrebleu identity, disjoint and hand-computed example")


def test_constraint_rules():
    """Overlap check matches the brute-force rule on sampled pairs up to
    length 8; the strict half boundary and the short-source 2-gram bound
    hold at their edges."""
    cfg = ConstraintConfig()
    rng = random.Random(77)
    alphabet = ("a", "b", "c", "d")
    checked = 0
    for la in range(1, 9):
        for lb in range(0, 9):
            for _ in range(30):
                src = [rng.choice(alphabet) for _ in range(la)]
                cand = [rng.choice(alphabet) for _ in range(lb)]
                run_len = brute_force_longest_run(src, cand)
                bound = (
                    cfg.short_source_overlap_ngram
                    if la <= cfg.short_source_token_threshold
                    else int(la * cfg.max_source_overlap_ratio)
                )
                report = check_source_overlap(src, cand, cfg)
                assert report.overlap_run_length == run_len
                assert report.source_overlap_violation == (run_len > bound)
                checked += 1

    # strict "more than half": run == floor(n/2) passes, one more violates
    normal = ConstraintConfig(short_source_token_threshold=1)
    src = [f"s{i}" for i in range(8)]
    at_bound = ["q1"] + src[:4] + ["q2", "q3", "q4"]
    assert not check_source_overlap(src, at_bound, normal).source_overlap_violation
    over_bound = ["q1"] + src[:5] + ["q2", "q3"]
    assert check_source_overlap(src, over_bound, normal).source_overlap_violation

    # short-source bound of 2 at the threshold boundary (inclusive)
    short_src = [f"t{i}" for i in range(6)]
    eff = effective_config(short_src, cfg)
    assert eff.overlap_bound(6) == 2
    two_run = ["x"] + short_src[:2] + ["y", "z", "w"]
    three_run = ["x"] + short_src[:3] + ["y", "z"]
    assert not check_source_overlap(short_src, two_run, cfg).source_overlap_violation
    assert check_source_overlap(short_src, three_run, cfg).source_overlap_violation
    longer = [f"t{i}" for i in range(7)]
    assert effective_config(longer, cfg).overlap_token_limit is None
    done(f"constraint rules (brute force on {checked} pairs plus boundary cases)")


def test_cascade_cardinalities(toy_lm):
    """|diversity| and |fluency| follow clamp(min(cap, floor(n/2)), 1, n)
    exactly for n = 0..30."""
    scorers = PipelineScorers(fluency=LocalFluencyScorer(toy_lm), semantic=LocalSemanticScorer())
    rng = random.Random(5150)
    for n in range(0, 31):
        texts = []
        for i in range(n):
            texts.append(" ".join(f"n{n}c{i}w{j}{rng.randint(0, 9)}" for j in range(5)))
        result = run("the source sentence stands apart", make_candidates(texts), scorers)
        trace = result.trace
        assert len(trace.overlap_cands) == n
        want_div = 0 if n == 0 else max(1, min(5, n // 2))
        assert len(trace.diversity_cands) == want_div
        m = want_div
        want_flu = 0 if m == 0 else max(1, min(3, m // 2))
        assert len(trace.fluency_cands) == want_flu
        assert stage_keep_count(n, 5) == want_div
        assert stage_keep_count(m, 3) == want_flu
    done("cascade cardinalities for n = 0..30")


def test_stage_chain_rejection_log_and_determinism(toy_lm):
    """100 randomized runs: subset chain, complete one-entry-per-candidate
    accounting, constraint-clean best; reruns bit-identical."""
    scorers = PipelineScorers(fluency=LocalFluencyScorer(toy_lm), semantic=LocalSemanticScorer())
    cfg = ConstraintConfig()
    rng = random.Random(31337)
    vocab = ["the", "cat", "sat", "mat", "dog", "ran", "red", "big"] + [f"v{k}" for k in range(24)]
    for trial in range(100):
        source = " ".join(rng.choice(vocab) for _ in range(rng.randint(3, 9)))
        n = rng.randint(0, 30)
        texts = []
        for _ in range(n):
            roll = rng.random()
            if roll < 0.1:
                texts.append(source)
            elif roll < 0.18 and texts:
                texts.append(rng.choice(texts))
            else:
                texts.append(" ".join(rng.choice(vocab) for _ in range(rng.randint(1, 9))))
        cands = make_candidates(texts)
        result = run(source, cands, scorers, cfg, result_id=f"t{trial}")
        trace = result.trace

        all_idx = {c.generation_index for c in cands}
        overlap_idx = {c.generation_index for c in trace.overlap_cands}
        diversity_idx = {c.generation_index for c, _ in trace.diversity_cands}
        fluency_idx = {c.generation_index for c, _ in trace.fluency_cands}
        assert fluency_idx <= diversity_idx <= overlap_idx <= all_idx

        rejected = [e.candidate.generation_index for e in trace.rejection_log]
        assert len(rejected) == len(set(rejected))
        assert set(rejected) | fluency_idx == all_idx and not set(rejected) & fluency_idx

        if result.best is not None:
            src_tokens = tokenize(normalize(source))
            assert result.best != normalize(source)
            report = evaluate_candidate(src_tokens, tokenize(result.best), effective_config(src_tokens, cfg))
            assert report.ok
        else:
            assert not trace.overlap_cands

        rerun = run(source, cands, scorers, cfg, result_id=f"t{trial}")
        assert rerun == result
    done("stage chain, rejection-log completeness and determinism (100 runs)")


def test_end_to_end_demo():
    """20 bundled sources through mock generation, an LM trained on the
    bundled 1k-sentence corpus and the local embedder: every source gets a
    constraint-clean best paraphrase, under 5 seconds wall time."""
    start = time.perf_counter()
    with open(DATA_DIR / "lm_corpus.txt", encoding="utf-8") as fh:
        lm = train_lm(fh)
    translator = load_mock_tables(DATA_DIR / "mock_tables.json")
    scorers = PipelineScorers(fluency=LocalFluencyScorer(lm), semantic=LocalSemanticScorer())
    gen_cfg = GenerationConfig(source_lang="en", pivot_pool=("fr", "de"))
    cfg = ConstraintConfig()

    sources = [
        json.loads(line)
        for line in (DATA_DIR / "toy_sources.jsonl").read_text(encoding="utf-8").splitlines()
    ]
    assert len(sources) == 20
    for row in sources:
        cand_set = generate_all(row["text"], gen_cfg, translator, set_id=row["id"])
        result = run(row["text"], cand_set.candidates, scorers, cfg, result_id=row["id"])
        assert result.best is not None, row
        src_norm = normalize(row["text"])
        assert result.best != src_norm
        src_tokens = tokenize(src_norm)
        report = evaluate_candidate(src_tokens, tokenize(result.best), effective_config(src_tokens, cfg))
        assert report.ok, (row, result.best)
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"took {elapsed:.1f}s"
    done(f"end-to-end demo over 20 sources in {elapsed:.2f}s")


def test_roundtrip_identity(toy_lm):
    """Invertible mock tables: every round-trip candidate equals the source,
    all are removed at dedup, and any best comes from a direct candidate."""
    translator = MockTranslator(rotate_pairs={("en", "en")})  # empty tables
    gen_cfg = GenerationConfig(source_lang="en")
    scorers = PipelineScorers(fluency=LocalFluencyScorer(toy_lm), semantic=LocalSemanticScorer())
    for text in ["the small cat sat", "a dog ran fast today", "one two three four five"]:
        cand_set = generate_all(text, gen_cfg, translator)
        roundtrips = [c for c in cand_set.candidates if c.origin == "roundtrip"]
        assert len(roundtrips) == 6
        assert all(c.text == normalize(text) for c in roundtrips)
        result = run(text, cand_set.candidates, scorers)
        surviving_origins = {c.origin for c in result.trace.overlap_cands}
        assert "roundtrip" not in surviving_origins
        if result.best is not None:
            assert result.trace.best.origin == "direct"
    done("round-trip identity removed at dedup; best comes from direct")


def test_lm_normalization():
    """Conditional distributions sum to 1 +- 1e-9 for every observed context
    plus 10 random unseen ones."""
    with open(DATA_DIR / "lm_corpus.txt", encoding="utf-8") as fh:
        lm = train_lm(fh)
    contexts = sorted(lm.trigram_ctx)
    rng = random.Random(8)
    symbols = sorted(lm.vocab | {"zzz1", "zzz2", "zzz3"})
    unseen = []
    while len(unseen) < 10:
        ctx = (rng.choice(symbols), rng.choice(symbols))
        if ctx not in lm.trigram_ctx:
            unseen.append(ctx)
    for ctx in list(contexts) + unseen:
        total = math.fsum(lm.conditional_distribution(ctx).values())
        assert abs(total - 1.0) <= 1e-9, ctx
    done(f"LM normalization over {len(contexts)} observed + 10 unseen contexts")


def test_augmentation(demo_lm):
    """Bundled 50-example labeled set: at most 100 output rows, labels
    preserved on every generated row, skips accounted exactly."""
    rows = [
        LabeledExample(id=o["id"], text=o["text"], label=o["label"])
        for o in (
            json.loads(line)
            for line in (DATA_DIR / "toy_labeled.jsonl").read_text(encoding="utf-8").splitlines()
        )
    ]
    assert len(rows) == 50
    translator = load_mock_tables(DATA_DIR / "mock_tables.json")
    scorers = PipelineScorers(fluency=LocalFluencyScorer(demo_lm), semantic=LocalSemanticScorer())
    result = augment(rows, GenerationConfig(source_lang="en", pivot_pool=("fr", "de")), translator, scorers)

    assert len(result.rows) <= 100
    assert len(result.rows) == 50 + len(result.generated)
    assert len(result.generated) + result.stats.skip_count == 50
    by_id = {ex.id: ex for ex in rows}
    for gen in result.generated:
        assert gen.label == by_id[gen.augmented_from].label
        assert normalize(gen.text) != normalize(by_id[gen.augmented_from].text)
    before = result.stats.label_counts_before
    after = result.stats.label_counts_after
    assert sum(after.values()) == sum(before.values()) + len(result.generated)
    done(
        f"augmentation: {len(result.rows)} rows, {result.stats.skip_count} skips, labels preserved"
    )


def test_protocol_contract_fixtures():
    """Client request building and response parsing reproduce the golden
    fixture files exactly; no live service involved."""
    def load(name):
        return json.loads((FIXTURE_DIR / name).read_text(encoding="utf-8"))

    fl_req = load("scorer_fluency_request.json")
    assert build_score_request("fluency", None, fl_req["texts"]) == fl_req
    sem_req = load("scorer_semantic_request.json")
    assert build_score_request("semantic", sem_req["source"], sem_req["texts"]) == sem_req
    assert parse_score_response(load("scorer_fluency_response.json"), 2) == [34.51, 412.0]
    assert parse_score_response(load("scorer_semantic_response.json"), 2) == [1.0, 0.82]
    with pytest.raises(ValueError):
        parse_score_response(load("scorer_fluency_response.json"), 3)

    tr_req = load("translate_request.json")
    assert build_translate_request(**{k: tr_req[k] for k in tr_req}) == tr_req
    parsed = parse_translate_response(load("translate_response.json"), 1, 5)
    assert len(parsed[0]) == 3 and parsed[0][0].text == "the tiny feline rested near the aged yard"
    done("protocol contract against golden fixtures")
