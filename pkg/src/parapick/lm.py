"""Interpolated trigram language model used as the local fluency scorer.

Conditional probabilities interpolate maximum-likelihood trigram and bigram
estimates with an add-k smoothed unigram floor. When a higher-order context
was never observed, its interpolation weight is redistributed proportionally
over the orders that were, which keeps every conditional distribution an
exact probability distribution over the model's event space
(vocabulary + UNK + end-of-sentence).
"""

from __future__ import annotations

import math
import struct
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

from .textkit import normalize, tokenize

__all__ = [
    "UNK",
    "BOS",
    "EOS",
    "NGramLanguageModel",
    "FluencyScore",
    "train_lm",
    "perplexity",
    "save_lm",
    "load_lm",
]

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"

DEFAULT_LAMBDAS = (0.6, 0.3, 0.1)  # (trigram, bigram, unigram)
DEFAULT_ADD_K = 1.0
MIN_TOKEN_FREQ = 2  # tokens rarer than this train as UNK

_MAGIC = b"PARAPICK-NGLM v1\n"


@dataclass(frozen=True)
class FluencyScore:
    """Perplexity of one sentence; token_count includes the end marker."""

    ppl: float
    token_count: int


@dataclass
class NGramLanguageModel:
    lambdas: tuple[float, float, float]
    add_k: float
    unigrams: dict[str, int]
    bigrams: dict[tuple[str, str], int]
    trigrams: dict[tuple[str, str, str], int]
    bigram_ctx: dict[str, int] = field(repr=False, default_factory=dict)
    trigram_ctx: dict[tuple[str, str], int] = field(repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        lam3, lam2, lam1 = self.lambdas
        if min(self.lambdas) <= 0 or abs(lam3 + lam2 + lam1 - 1.0) > 1e-9:
            raise ValueError("lambdas must be positive and sum to 1")
        if self.add_k <= 0:
            raise ValueError("add_k must be positive")
        if not self.bigram_ctx:
            ctx = Counter()
            for (v, _w), c in self.bigrams.items():
                ctx[v] += c
            self.bigram_ctx = dict(ctx)
        if not self.trigram_ctx:
            ctx2 = Counter()
            for (u, v, _w), c in self.trigrams.items():
                ctx2[(u, v)] += c
            self.trigram_ctx = dict(ctx2)
        self._total_unigrams = sum(self.unigrams.values())
        self._event_space = sorted(set(self.unigrams) | {UNK, EOS})

    @property
    def order(self) -> int:
        return 3

    @property
    def vocab(self) -> frozenset[str]:
        """All symbols known to the model, reserved markers included."""
        return frozenset(self.unigrams) | {UNK, BOS, EOS}

    @property
    def event_space(self) -> list[str]:
        """The symbols a conditional distribution ranges over (no BOS)."""
        return list(self._event_space)

    def map_token(self, token: str) -> str:
        if token in (BOS, EOS, UNK):
            return token
        return token if token in self.unigrams else UNK

    def prob(self, token: str, context: tuple[str, str]) -> float:
        """p(token | context) under the interpolated model; always > 0."""
        u, v = (self.map_token(t) for t in context)
        w = self.map_token(token)
        lam3, lam2, lam1 = self.lambdas
        p1 = (self.unigrams.get(w, 0) + self.add_k) / (
            self._total_unigrams + self.add_k * len(self._event_space)
        )
        acc = lam1 * p1
        weight = lam1
        v_total = self.bigram_ctx.get(v, 0)
        if v_total:
            acc += lam2 * self.bigrams.get((v, w), 0) / v_total
            weight += lam2
        uv_total = self.trigram_ctx.get((u, v), 0)
        if uv_total:
            acc += lam3 * self.trigrams.get((u, v, w), 0) / uv_total
            weight += lam3
        return acc / weight

    def conditional_distribution(self, context: tuple[str, str]) -> dict[str, float]:
        return {w: self.prob(w, context) for w in self._event_space}

    def logprob(self, tokens: Sequence[str]) -> float:
        """Sum of natural-log conditional probabilities over tokens + EOS."""
        history = [BOS, BOS]
        total = 0.0
        for tok in list(tokens) + [EOS]:
            total += math.log(self.prob(tok, (history[-2], history[-1])))
            history.append(self.map_token(tok))
        return total


def _sentences_to_tokens(corpus: Iterable[str]) -> list[list[str]]:
    sents = []
    for line in corpus:
        toks = tokenize(normalize(line))
        if toks:
            sents.append(toks)
    return sents


def train_lm(
    corpus: Iterable[str],
    lambdas: tuple[float, float, float] = DEFAULT_LAMBDAS,
    add_k: float = DEFAULT_ADD_K,
) -> NGramLanguageModel:
    """Count-based training over normalized, tokenized sentences.

    Each sentence is padded with two begin markers and one end marker.
    Tokens with corpus frequency below MIN_TOKEN_FREQ are replaced by UNK
    before counting, guaranteeing UNK has training mass.
    """
    sentences = _sentences_to_tokens(corpus)
    if not sentences:
        raise ValueError("train_lm: corpus contains no non-empty sentences")

    freq = Counter(tok for sent in sentences for tok in sent)
    keep = {tok for tok, c in freq.items() if c >= MIN_TOKEN_FREQ}

    unigrams: Counter = Counter()
    bigrams: Counter = Counter()
    trigrams: Counter = Counter()
    for sent in sentences:
        mapped = [tok if tok in keep else UNK for tok in sent]
        padded = [BOS, BOS] + mapped + [EOS]
        unigrams.update(padded[2:])  # predictable positions only
        for i in range(2, len(padded)):
            bigrams[(padded[i - 1], padded[i])] += 1
            trigrams[(padded[i - 2], padded[i - 1], padded[i])] += 1
    return NGramLanguageModel(
        lambdas=lambdas,
        add_k=add_k,
        unigrams=dict(unigrams),
        bigrams=dict(bigrams),
        trigrams=dict(trigrams),
    )


def perplexity(lm: NGramLanguageModel, sentence: Sequence[str]) -> FluencyScore:
    """exp of the mean negative log-likelihood over the sentence plus EOS."""
    if not sentence:
        raise ValueError("perplexity: sentence must be non-empty")
    t = len(sentence) + 1
    return FluencyScore(ppl=math.exp(-lm.logprob(sentence) / t), token_count=t)


# --- serialization -----------------------------------------------------------
#
# Versioned container: a plain-text header (order, lambdas, add_k, vocab size)
# followed by length-prefixed binary sections — the symbol table as
# length-prefixed UTF-8 strings, then one table per n-gram order storing
# symbol indices and counts.


def _write_table(fh: IO[bytes], table: dict, arity: int) -> None:
    fh.write(struct.pack("<Q", len(table)))
    for key, count in sorted(table.items()):
        ids = key if arity > 1 else (key,)
        fh.write(struct.pack(f"<{arity}I", *ids))
        fh.write(struct.pack("<Q", count))


def _read_table(fh: IO[bytes], arity: int, symbols: list[str]) -> dict:
    (n,) = struct.unpack("<Q", fh.read(8))
    table: dict = {}
    row = struct.Struct(f"<{arity}IQ")
    for _ in range(n):
        *ids, count = row.unpack(fh.read(row.size))
        key = symbols[ids[0]] if arity == 1 else tuple(symbols[i] for i in ids)
        table[key] = count
    return table


def save_lm(lm: NGramLanguageModel, path: str | Path) -> None:
    symbols = sorted({tok for tok in lm.unigrams} | {UNK, BOS, EOS})
    index = {tok: i for i, tok in enumerate(symbols)}
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        lam3, lam2, lam1 = lm.lambdas
        header = (
            f"order 3\nlambdas {lam3!r} {lam2!r} {lam1!r}\n"
            f"add_k {lm.add_k!r}\nvocab {len(symbols)}\n"
        )
        fh.write(header.encode("utf-8"))
        for tok in symbols:
            raw = tok.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
        _write_table(fh, {index[t]: c for t, c in lm.unigrams.items()}, 1)
        _write_table(fh, {tuple(index[t] for t in k): c for k, c in lm.bigrams.items()}, 2)
        _write_table(fh, {tuple(index[t] for t in k): c for k, c in lm.trigrams.items()}, 3)


def load_lm(path: str | Path) -> NGramLanguageModel:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError(f"{path}: not a recognized language model file")
        header: dict[str, list[str]] = {}
        for _ in range(4):
            key, *values = fh.readline().decode("utf-8").split()
            header[key] = values
        lambdas = tuple(float(x) for x in header["lambdas"])
        add_k = float(header["add_k"][0])
        n_symbols = int(header["vocab"][0])
        symbols = []
        for _ in range(n_symbols):
            (ln,) = struct.unpack("<I", fh.read(4))
            symbols.append(fh.read(ln).decode("utf-8"))
        unigrams = _read_table(fh, 1, symbols)
        bigrams = _read_table(fh, 2, symbols)
        trigrams = _read_table(fh, 3, symbols)
    unigrams.pop(BOS, None)  # reserved symbols carry no unigram mass
    return NGramLanguageModel(
        lambdas=lambdas,  # type: ignore[arg-type]
        add_k=add_k,
        unigrams=unigrams,
        bigrams=bigrams,
        trigrams=trigrams,
    )
