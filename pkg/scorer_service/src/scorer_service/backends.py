"""Model backends: perplexity from a causal LM, token embeddings from an encoder.

Both load through the transformers Auto* classes, so any hub id or local
checkpoint directory works. Models run in eval mode under no_grad and are
guarded by a lock, so identical requests yield identical responses and
concurrent requests serialize onto the model.
"""

from __future__ import annotations

import math
import threading

import torch
from transformers import AutoModel, AutoModelForCausalLM, AutoTokenizer

from .matching import greedy_match_f1, normalize_rows


class UnscorableInput(ValueError):
    """Input that cannot be scored: empty after tokenization, or longer than
    the model context (inputs are rejected rather than truncated, so scores
    stay comparable)."""


def _context_limit(model) -> int | None:
    cfg = model.config
    for attr in ("max_position_embeddings", "n_positions"):
        value = getattr(cfg, attr, None)
        if isinstance(value, int) and value > 0:
            return value
    return None


def _clean(text: str) -> str:
    # Whitespace-agnostic scoring: runs of whitespace never change a score.
    return " ".join(text.split())


class CausalLMFluencyBackend:
    def __init__(self, model_id: str, device: str = "cpu"):
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForCausalLM.from_pretrained(model_id).to(device).eval()
        self.device = device
        self._lock = threading.Lock()
        self._limit = _context_limit(self.model)
        # GPT-2-style tokenizers often define only EOS; either works as the
        # sentence-start anchor that makes one-token inputs scorable.
        self._start_id = self.tokenizer.bos_token_id
        if self._start_id is None:
            self._start_id = self.tokenizer.eos_token_id
        if self._start_id is None:
            raise ValueError(f"{model_id}: tokenizer defines neither BOS nor EOS")

    def perplexity(self, text: str) -> float:
        ids = self.tokenizer.encode(_clean(text), add_special_tokens=False)
        if not ids:
            raise UnscorableInput("text has no tokens")
        ids = [self._start_id] + ids
        if self._limit is not None and len(ids) > self._limit:
            raise UnscorableInput(
                f"text has {len(ids)} tokens, model context is {self._limit}"
            )
        input_ids = torch.tensor([ids], device=self.device)
        with self._lock, torch.no_grad():
            logits = self.model(input_ids=input_ids).logits
        log_probs = torch.log_softmax(logits[0, :-1].float(), dim=-1)
        targets = input_ids[0, 1:]
        nll = -log_probs[torch.arange(targets.shape[0]), targets].mean().item()
        return math.exp(nll)

    def score(self, texts: list[str]) -> list[float]:
        return [self.perplexity(t) for t in texts]


class EncoderSemanticBackend:
    def __init__(self, model_id: str, device: str = "cpu"):
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModel.from_pretrained(model_id).to(device).eval()
        self.device = device
        self._lock = threading.Lock()
        self._limit = _context_limit(self.model)

    def _embed(self, text: str) -> torch.Tensor:
        enc = self.tokenizer(
            _clean(text), return_special_tokens_mask=True, return_tensors="pt"
        )
        mask = enc.pop("special_tokens_mask")[0].bool()
        n_tokens = enc["input_ids"].shape[1]
        if n_tokens == 0 or bool(mask.all()):
            raise UnscorableInput("text has no content tokens")
        if self._limit is not None and n_tokens > self._limit:
            raise UnscorableInput(
                f"text has {n_tokens} tokens, model context is {self._limit}"
            )
        enc = {k: v.to(self.device) for k, v in enc.items()}
        with self._lock, torch.no_grad():
            hidden = self.model(**enc).last_hidden_state[0]
        return normalize_rows(hidden[~mask].float())

    def score(self, source: str, texts: list[str]) -> list[float]:
        source_vecs = self._embed(source)
        return [greedy_match_f1(source_vecs, self._embed(t)) for t in texts]
