"""Candidate generation against anything speaking the translation protocol.

Two generation routes produce paraphrase candidates for one source sentence:

* direct — a single translate call with src_lang == tgt_lang, wide beam,
  several returned hypotheses;
* round-trip — translate into a pivot language and back, one candidate per
  pivot, walking an ordered pivot pool.

Constraint limits ride along as request hints (``no_repeat_ngram``,
``block_source_overlap_ratio``) but are never trusted; the selection
pipeline re-checks every candidate locally.

Wire protocol::

    POST {base_url}/v1/translate
    {"src_lang": str, "tgt_lang": str, "texts": [str, ...], "beam_size": int,
     "num_return": int, "no_repeat_ngram": int,
     "block_source_overlap_ratio": number|null}
    -> 200 {"results": [[{"text": str, "score": number}, ...], ...]}

The outer list is parallel to ``texts``; each inner list holds at most
``num_return`` hypotheses in descending score order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import requests

from .constraints import ConstraintConfig
from .textkit import join_tokens, normalize, tokenize

__all__ = [
    "DEFAULT_PIVOT_POOL",
    "GenerationConfig",
    "Candidate",
    "CandidateSet",
    "Hypothesis",
    "TranslatorEndpoint",
    "TranslatorError",
    "HttpTranslator",
    "MockTranslator",
    "load_mock_tables",
    "build_translate_request",
    "parse_translate_response",
    "generate_direct",
    "generate_roundtrip",
    "generate_all",
]

DEFAULT_PIVOT_POOL = ("en", "ko", "fr", "ja", "zh", "de", "es")


@dataclass(frozen=True)
class GenerationConfig:
    source_lang: str = "en"
    pivot_pool: tuple[str, ...] | None = None
    direct_beam: int = 10
    direct_topk: int = 5
    roundtrip_beam: int = 3
    roundtrip_topk: int = 1
    constraints: ConstraintConfig = field(default_factory=ConstraintConfig)

    def __post_init__(self) -> None:
        if self.pivot_pool is None:
            pool = tuple(c for c in DEFAULT_PIVOT_POOL if c != self.source_lang)
            object.__setattr__(self, "pivot_pool", pool)
        if self.source_lang in self.pivot_pool:
            raise ValueError("source_lang must not appear in pivot_pool")
        if not 1 <= self.direct_topk <= self.direct_beam:
            raise ValueError("need 1 <= direct_topk <= direct_beam")
        if not 1 <= self.roundtrip_topk <= self.roundtrip_beam:
            raise ValueError("need 1 <= roundtrip_topk <= roundtrip_beam")


@dataclass(frozen=True)
class Candidate:
    text: str  # normalized
    origin: str  # "direct" | "roundtrip"
    pivot: str | None
    decoder_rank: int
    generation_index: int

    def __post_init__(self) -> None:
        if self.origin not in ("direct", "roundtrip"):
            raise ValueError(f"unknown origin {self.origin!r}")
        if (self.origin == "roundtrip") != (self.pivot is not None):
            raise ValueError("pivot must be present exactly for roundtrip candidates")


@dataclass(frozen=True)
class CandidateSet:
    id: str
    source: str  # normalized
    source_lang: str
    candidates: tuple[Candidate, ...]
    errors: tuple[str, ...] = ()  # populated under the skip-and-record policy


@dataclass(frozen=True)
class Hypothesis:
    text: str
    score: float


class TranslatorError(RuntimeError):
    def __init__(self, message: str, src_lang: str, tgt_lang: str, leg: str):
        super().__init__(f"translate {src_lang}->{tgt_lang} ({leg}): {message}")
        self.src_lang = src_lang
        self.tgt_lang = tgt_lang
        self.leg = leg


@dataclass(frozen=True)
class TranslatorEndpoint:
    base_url: str
    timeout: float = 30.0

    def __post_init__(self) -> None:
        if not self.base_url:
            raise ValueError("TranslatorEndpoint: base_url must be non-empty")
        if self.timeout <= 0:
            raise ValueError("TranslatorEndpoint: timeout must be positive")


def build_translate_request(
    src_lang: str,
    tgt_lang: str,
    texts: Sequence[str],
    beam_size: int,
    num_return: int,
    no_repeat_ngram: int,
    block_source_overlap_ratio: float | None,
) -> dict:
    return {
        "src_lang": src_lang,
        "tgt_lang": tgt_lang,
        "texts": list(texts),
        "beam_size": beam_size,
        "num_return": num_return,
        "no_repeat_ngram": no_repeat_ngram,
        "block_source_overlap_ratio": block_source_overlap_ratio,
    }


def parse_translate_response(payload: object, n_texts: int, num_return: int) -> list[list[Hypothesis]]:
    if not isinstance(payload, dict) or "results" not in payload:
        raise ValueError("response is missing the 'results' field")
    results = payload["results"]
    if not isinstance(results, list) or len(results) != n_texts:
        raise ValueError(f"expected {n_texts} result lists, got {results!r:.120}")
    parsed: list[list[Hypothesis]] = []
    for group in results:
        if not isinstance(group, list):
            raise ValueError("each result entry must be a list of hypotheses")
        if len(group) > num_return:
            raise ValueError(f"got {len(group)} hypotheses, requested at most {num_return}")
        hyps = []
        for item in group:
            if not isinstance(item, dict) or not isinstance(item.get("text"), str):
                raise ValueError(f"malformed hypothesis: {item!r}")
            score = item.get("score")
            if not isinstance(score, (int, float)) or isinstance(score, bool):
                raise ValueError(f"malformed hypothesis score: {item!r}")
            hyps.append(Hypothesis(text=item["text"], score=float(score)))
        parsed.append(hyps)
    return parsed


class HttpTranslator:
    """Protocol client for a remote translation service."""

    def __init__(self, endpoint: TranslatorEndpoint, session: requests.Session | None = None):
        self.endpoint = endpoint
        self._http = session or requests

    def translate(
        self,
        src_lang: str,
        tgt_lang: str,
        texts: Sequence[str],
        beam_size: int,
        num_return: int,
        no_repeat_ngram: int = 3,
        block_source_overlap_ratio: float | None = None,
        leg: str = "direct",
    ) -> list[list[Hypothesis]]:
        body = build_translate_request(
            src_lang, tgt_lang, texts, beam_size, num_return, no_repeat_ngram, block_source_overlap_ratio
        )
        url = self.endpoint.base_url.rstrip("/") + "/v1/translate"
        try:
            resp = self._http.post(url, json=body, timeout=self.endpoint.timeout)
        except requests.RequestException as exc:
            raise TranslatorError(f"transport failure: {exc}", src_lang, tgt_lang, leg) from exc
        if resp.status_code != 200:
            raise TranslatorError(f"HTTP {resp.status_code}: {resp.text[:200]}", src_lang, tgt_lang, leg)
        try:
            payload = resp.json()
        except ValueError as exc:
            raise TranslatorError(f"invalid JSON response: {exc}", src_lang, tgt_lang, leg) from exc
        try:
            return parse_translate_response(payload, len(texts), num_return)
        except ValueError as exc:
            raise TranslatorError(str(exc), src_lang, tgt_lang, leg) from exc


class MockTranslator:
    """Deterministic stand-in for a translation service.

    Behaviour is driven by per-language-pair token substitution tables: the
    hypothesis at rank k applies the pair's k-th table (a token missing from
    a table passes through unchanged, so an empty table is an identity
    translator). When the pair has ``rotate`` enabled, ranks beyond the last
    table reorder the rank-0 output by token rotation — reorderings that the
    downstream constraint checks usually reject, which exercises the whole
    rejection path. Duplicate hypotheses are collapsed, so fewer than
    ``num_return`` results are possible, just like a real decoder.
    """

    def __init__(
        self,
        tables: dict[tuple[str, str], list[dict[str, str]]] | None = None,
        rotate_pairs: set[tuple[str, str]] | None = None,
    ):
        self.tables = {pair: (maps or [{}]) for pair, maps in (tables or {}).items()}
        self.rotate_pairs = rotate_pairs or set()

    def _variant(self, tokens: list[str], maps: list[dict[str, str]], rank: int, rotate: bool) -> list[str] | None:
        if rank < len(maps):
            table = maps[rank]
            return [table.get(tok, tok) for tok in tokens]
        if not rotate or not tokens:
            return None
        shift = (rank - len(maps) + 1) % len(tokens)
        base = [maps[0].get(tok, tok) for tok in tokens]
        return base[shift:] + base[:shift]

    def translate(
        self,
        src_lang: str,
        tgt_lang: str,
        texts: Sequence[str],
        beam_size: int,
        num_return: int,
        no_repeat_ngram: int = 3,
        block_source_overlap_ratio: float | None = None,
        leg: str = "direct",
    ) -> list[list[Hypothesis]]:
        if not texts:
            raise TranslatorError("empty texts", src_lang, tgt_lang, leg)
        maps = self.tables.get((src_lang, tgt_lang), [{}])
        rotate = (src_lang, tgt_lang) in self.rotate_pairs
        results = []
        for text in texts:
            tokens = tokenize(normalize(text))
            hyps = []
            seen = set()
            for rank in range(num_return):
                variant = self._variant(tokens, maps, rank, rotate)
                if variant is None:
                    break
                out = join_tokens(variant)
                if out in seen:
                    continue
                seen.add(out)
                hyps.append(Hypothesis(text=out, score=round(1.0 - 0.05 * rank, 6)))
            results.append(hyps)
        return results


def load_mock_tables(path: str | Path) -> MockTranslator:
    """Build a MockTranslator from a JSON tables file.

    Format: {"pairs": {"en-en": {"maps": [{...}, ...], "rotate": true}, ...}};
    a single table may be given as "map" instead of a one-element "maps".
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    tables: dict[tuple[str, str], list[dict[str, str]]] = {}
    rotate_pairs: set[tuple[str, str]] = set()
    for pair, spec in raw.get("pairs", {}).items():
        src, _, tgt = pair.partition("-")
        if not src or not tgt:
            raise ValueError(f"bad language pair key {pair!r} (expected 'src-tgt')")
        if "maps" in spec:
            maps = [dict(m) for m in spec["maps"]]
        else:
            maps = [dict(spec.get("map", {}))]
        tables[(src, tgt)] = maps
        if spec.get("rotate"):
            rotate_pairs.add((src, tgt))
    return MockTranslator(tables=tables, rotate_pairs=rotate_pairs)


def _check_shape(results, n_texts: int, num_return: int, src: str, tgt: str, leg: str) -> None:
    if len(results) != n_texts:
        raise TranslatorError(f"expected {n_texts} result lists, got {len(results)}", src, tgt, leg)
    for group in results:
        if len(group) > num_return:
            raise TranslatorError(
                f"got {len(group)} hypotheses, requested at most {num_return}", src, tgt, leg
            )


def generate_direct(source: str, cfg: GenerationConfig, translator) -> list[Candidate]:
    """Framework where the decoder paraphrases in the source language itself:
    one call with src == tgt, returning up to direct_topk ranked candidates."""
    src = normalize(source)
    if not src:
        raise ValueError("generate_direct: source must be non-empty")
    results = translator.translate(
        cfg.source_lang,
        cfg.source_lang,
        [src],
        beam_size=cfg.direct_beam,
        num_return=cfg.direct_topk,
        no_repeat_ngram=cfg.constraints.no_repeat_ngram,
        block_source_overlap_ratio=cfg.constraints.max_source_overlap_ratio,
        leg="direct",
    )
    _check_shape(results, 1, cfg.direct_topk, cfg.source_lang, cfg.source_lang, "direct")
    return [
        Candidate(
            text=normalize(hyp.text),
            origin="direct",
            pivot=None,
            decoder_rank=rank,
            generation_index=rank,
        )
        for rank, hyp in enumerate(results[0])
    ]


def generate_roundtrip(
    source: str, pivot: str, cfg: GenerationConfig, translator
) -> Candidate | None:
    """Translate into the pivot language and back; None when either leg
    produces nothing."""
    if pivot == cfg.source_lang:
        raise ValueError("generate_roundtrip: pivot must differ from source_lang")
    src = normalize(source)
    if not src:
        raise ValueError("generate_roundtrip: source must be non-empty")
    forward = translator.translate(
        cfg.source_lang,
        pivot,
        [src],
        beam_size=cfg.roundtrip_beam,
        num_return=1,
        no_repeat_ngram=cfg.constraints.no_repeat_ngram,
        block_source_overlap_ratio=None,
        leg="forward",
    )
    _check_shape(forward, 1, 1, cfg.source_lang, pivot, "forward")
    if not forward[0]:
        return None
    backward = translator.translate(
        pivot,
        cfg.source_lang,
        [forward[0][0].text],
        beam_size=cfg.roundtrip_beam,
        num_return=cfg.roundtrip_topk,
        no_repeat_ngram=cfg.constraints.no_repeat_ngram,
        block_source_overlap_ratio=cfg.constraints.max_source_overlap_ratio,
        leg="backward",
    )
    _check_shape(backward, 1, cfg.roundtrip_topk, pivot, cfg.source_lang, "backward")
    if not backward[0]:
        return None
    return Candidate(
        text=normalize(backward[0][0].text),
        origin="roundtrip",
        pivot=pivot,
        decoder_rank=0,
        generation_index=0,
    )


def generate_all(
    source: str,
    cfg: GenerationConfig,
    translator,
    set_id: str = "",
    on_error: str = "fail",
) -> CandidateSet:
    """Run both generation routes: direct candidates first, then one
    round-trip candidate per pool language in pool order.

    ``on_error="skip"`` records failed calls instead of raising; each failed
    generation unit (the direct call, or one pivot's round trip) contributes
    one entry to CandidateSet.errors.
    """
    if on_error not in ("fail", "skip"):
        raise ValueError(f"unknown error policy {on_error!r}")
    src = normalize(source)
    candidates: list[Candidate] = []
    errors: list[str] = []

    try:
        candidates.extend(generate_direct(src, cfg, translator))
    except TranslatorError as exc:
        if on_error == "fail":
            raise
        errors.append(f"direct: {exc}")

    for pivot in cfg.pivot_pool:
        try:
            cand = generate_roundtrip(src, pivot, cfg, translator)
        except TranslatorError as exc:
            if on_error == "fail":
                raise
            errors.append(f"roundtrip[{pivot}]: {exc}")
            continue
        if cand is not None:
            candidates.append(cand)

    reindexed = tuple(
        replace(cand, generation_index=i) for i, cand in enumerate(candidates)
    )
    return CandidateSet(
        id=set_id,
        source=src,
        source_lang=cfg.source_lang,
        candidates=reindexed,
        errors=tuple(errors),
    )
