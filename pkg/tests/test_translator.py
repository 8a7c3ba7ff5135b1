from __future__ import annotations

import pytest

from parapick.translator import (
    Candidate,
    GenerationConfig,
    Hypothesis,
    HttpTranslator,
    MockTranslator,
    TranslatorEndpoint,
    TranslatorError,
    generate_all,
    generate_direct,
    generate_roundtrip,
)

SYNONYMS = {"cat": "feline", "sat": "rested", "mat": "rug", "small": "tiny"}


def lossy_mock():
    return MockTranslator(
        tables={
            ("en", "en"): [SYNONYMS],
            ("en", "fr"): [{"cat": "chat", "mat": "tapis"}],
            ("fr", "en"): [{"chat": "kitty", "tapis": "carpet"}],
        },
        rotate_pairs={("en", "en")},
    )


class FailingTranslator:
    def translate(self, src_lang, tgt_lang, texts, **kwargs):
        raise TranslatorError("offline", src_lang, tgt_lang, kwargs.get("leg", "?"))


class ShapeViolatingTranslator:
    def __init__(self, n):
        self.n = n

    def translate(self, src_lang, tgt_lang, texts, **kwargs):
        return [[Hypothesis(text=f"v{i}", score=1.0 - i * 0.1) for i in range(self.n)]]


class TestConfig:
    def test_default_pool_excludes_source(self):
        cfg = GenerationConfig(source_lang="en")
        assert cfg.pivot_pool == ("ko", "fr", "ja", "zh", "de", "es")
        cfg_ko = GenerationConfig(source_lang="ko")
        assert "ko" not in cfg_ko.pivot_pool and "en" in cfg_ko.pivot_pool

    def test_source_in_pool_rejected(self):
        with pytest.raises(ValueError):
            GenerationConfig(source_lang="en", pivot_pool=("en", "fr"))

    def test_topk_beam_coupling(self):
        with pytest.raises(ValueError):
            GenerationConfig(direct_beam=4, direct_topk=5)
        with pytest.raises(ValueError):
            GenerationConfig(roundtrip_beam=1, roundtrip_topk=2)

    def test_candidate_validation(self):
        with pytest.raises(ValueError):
            Candidate(text="x", origin="roundtrip", pivot=None, decoder_rank=0, generation_index=0)
        with pytest.raises(ValueError):
            Candidate(text="x", origin="direct", pivot="fr", decoder_rank=0, generation_index=0)
        with pytest.raises(ValueError):
            Candidate(text="x", origin="other", pivot=None, decoder_rank=0, generation_index=0)


class TestMockTranslator:
    def test_identity_round_trip(self):
        mock = MockTranslator()
        results = mock.translate("en", "fr", ["the small cat"], beam_size=3, num_return=1)
        assert results[0][0].text == "the small cat"

    def test_substitution_and_rotation_variants(self):
        mock = lossy_mock()
        results = mock.translate("en", "en", ["the small cat sat"], beam_size=10, num_return=3)
        texts = [h.text for h in results[0]]
        assert texts[0] == "the tiny feline rested"
        assert texts[1] == "tiny feline rested the"  # rotation of the mapped text
        assert len(texts) == 3

    def test_duplicates_collapsed(self):
        # Single-token sentence: all rotations coincide, so one hypothesis.
        mock = MockTranslator(rotate_pairs={("en", "en")})
        results = mock.translate("en", "en", ["hello"], beam_size=5, num_return=5)
        assert len(results[0]) == 1

    def test_scores_descend(self):
        mock = lossy_mock()
        results = mock.translate("en", "en", ["a b c d e"], beam_size=5, num_return=5)
        scores = [h.score for h in results[0]]
        assert scores == sorted(scores, reverse=True)


class TestGenerateDirect:
    def test_ranked_candidates(self):
        cfg = GenerationConfig(source_lang="en", pivot_pool=("fr",))
        cands = generate_direct("The Small CAT sat near the mat", cfg, lossy_mock())
        assert len(cands) == 5
        assert [c.decoder_rank for c in cands] == [0, 1, 2, 3, 4]
        assert all(c.origin == "direct" and c.pivot is None for c in cands)
        assert cands[0].text == "the tiny feline rested near the rug"

    def test_empty_result_is_not_an_error(self):
        class Empty:
            def translate(self, *a, **k):
                return [[]]

        cfg = GenerationConfig(source_lang="en", pivot_pool=("fr",))
        assert generate_direct("hello there", cfg, Empty()) == []

    def test_too_many_results_is_shape_violation(self):
        cfg = GenerationConfig(source_lang="en", pivot_pool=("fr",))
        with pytest.raises(TranslatorError):
            generate_direct("hello there", cfg, ShapeViolatingTranslator(7))

    def test_empty_source_rejected(self):
        cfg = GenerationConfig(source_lang="en", pivot_pool=("fr",))
        with pytest.raises(ValueError):
            generate_direct("   ", cfg, lossy_mock())


class TestGenerateRoundtrip:
    def test_invertible_tables_return_source(self):
        cfg = GenerationConfig(source_lang="en", pivot_pool=("fr",))
        cand = generate_roundtrip("the small cat", "fr", cfg, MockTranslator())
        assert cand is not None
        assert cand.text == "the small cat"
        assert cand.origin == "roundtrip" and cand.pivot == "fr"

    def test_lossy_backward_leg(self):
        cfg = GenerationConfig(source_lang="en", pivot_pool=("fr",))
        cand = generate_roundtrip("the cat sat on the mat", "fr", cfg, lossy_mock())
        # cat -> chat -> kitty; mat -> tapis -> carpet; others untouched
        assert cand.text == "the kitty sat on the carpet"

    def test_forward_leg_empty_gives_none(self):
        class EmptyForward:
            def translate(self, src_lang, tgt_lang, texts, **kwargs):
                return [[]]

        cfg = GenerationConfig(source_lang="en", pivot_pool=("fr",))
        assert generate_roundtrip("hello world", "fr", cfg, EmptyForward()) is None

    def test_pivot_equal_to_source_rejected(self):
        cfg = GenerationConfig(source_lang="en", pivot_pool=("fr",))
        with pytest.raises(ValueError):
            generate_roundtrip("hello", "en", cfg, MockTranslator())


class TestGenerateAll:
    def test_default_pool_yields_up_to_eleven(self):
        cfg = GenerationConfig(source_lang="en")
        mock = MockTranslator(
            tables={("en", "en"): [SYNONYMS]}, rotate_pairs={("en", "en")}
        )
        cs = generate_all("the small cat sat near the mat", cfg, mock, set_id="s1")
        assert len(cs.candidates) <= 11
        directs = [c for c in cs.candidates if c.origin == "direct"]
        roundtrips = [c for c in cs.candidates if c.origin == "roundtrip"]
        assert len(directs) == 5 and len(roundtrips) == 6

    def test_ordering_and_indexing(self):
        cfg = GenerationConfig(source_lang="en", pivot_pool=("fr", "de"))
        cs = generate_all("the small cat sat near the mat", cfg, lossy_mock(), set_id="s2")
        indices = [c.generation_index for c in cs.candidates]
        assert indices == list(range(len(cs.candidates)))
        origins = [c.origin for c in cs.candidates]
        assert origins == sorted(origins)  # all "direct" before "roundtrip"
        pivots = [c.pivot for c in cs.candidates if c.origin == "roundtrip"]
        assert pivots == ["fr", "de"]  # pool order, not completion order

    def test_restricted_pool(self):
        cfg = GenerationConfig(source_lang="en", pivot_pool=("fr",))
        cs = generate_all("the small cat sat near the mat", cfg, lossy_mock())
        assert len(cs.candidates) <= 6

    def test_skip_policy_records_all_failures(self):
        cfg = GenerationConfig(source_lang="en")  # six pivots
        cs = generate_all("hello there", cfg, FailingTranslator(), on_error="skip")
        assert cs.candidates == ()
        assert len(cs.errors) == 7  # one direct call + six round trips

    def test_fail_policy_raises(self):
        cfg = GenerationConfig(source_lang="en")
        with pytest.raises(TranslatorError):
            generate_all("hello there", cfg, FailingTranslator())

    def test_bit_reproducible(self):
        cfg = GenerationConfig(source_lang="en", pivot_pool=("fr", "de"))
        first = generate_all("the small cat sat near the mat", cfg, lossy_mock(), set_id="x")
        second = generate_all("the small cat sat near the mat", cfg, lossy_mock(), set_id="x")
        assert first == second


class TestHttpTranslator:
    def test_full_protocol_round_trip(self, stub_service):
        def reply(path, body):
            assert path == "/v1/translate"
            return 200, {
                "results": [
                    [{"text": "the tiny feline rested", "score": 0.9}]
                    for _ in body["texts"]
                ]
            }

        svc = stub_service(reply)
        client = HttpTranslator(TranslatorEndpoint(base_url=svc.base_url))
        cfg = GenerationConfig(source_lang="en", pivot_pool=("fr",), direct_topk=1, direct_beam=3)
        cands = generate_direct("the small cat sat", cfg, client)
        assert cands[0].text == "the tiny feline rested"
        body = svc.requests[0][1]
        assert body["src_lang"] == body["tgt_lang"] == "en"
        assert body["beam_size"] == 3 and body["num_return"] == 1
        assert body["no_repeat_ngram"] == 3
        assert body["block_source_overlap_ratio"] == 0.5

    def test_http_error_becomes_translator_error(self, stub_service):
        svc = stub_service(lambda path, body: (503, {"error": "down"}))
        client = HttpTranslator(TranslatorEndpoint(base_url=svc.base_url))
        with pytest.raises(TranslatorError):
            client.translate("en", "en", ["x"], beam_size=1, num_return=1)

    def test_shape_violation_detected(self, stub_service):
        svc = stub_service(
            lambda path, body: (200, {"results": [[{"text": "a", "score": 1.0}] * 7]})
        )
        client = HttpTranslator(TranslatorEndpoint(base_url=svc.base_url))
        with pytest.raises(TranslatorError):
            client.translate("en", "en", ["x"], beam_size=10, num_return=5)

    def test_transport_failure(self):
        client = HttpTranslator(TranslatorEndpoint(base_url="http://127.0.0.1:9", timeout=0.5))
        with pytest.raises(TranslatorError):
            client.translate("en", "en", ["x"], beam_size=1, num_return=1)
