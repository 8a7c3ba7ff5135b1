"""Builds a small word-level causal LM checkpoint for the test session.

Pretrained checkpoints aren't downloadable in every test environment, so the
suite trains a 2-layer GPT-2-architecture model (64 dims, word-level
tokenizer) on a deterministic template corpus for a few epochs — enough for
in-domain text to be far more probable than degenerate repetition — and
saves it where the Auto* loaders can pick it up. Everything is seeded.
"""

from __future__ import annotations

import random
from pathlib import Path

import pytest
import torch
from fastapi.testclient import TestClient
from tokenizers import Tokenizer, models, pre_tokenizers
from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

from scorer_service import ServiceConfig, create_app

REPO_ROOT = Path(__file__).resolve().parent.parent.parent
FIXTURE_DIR = REPO_ROOT / "fixtures" / "protocol"

DETERMINERS = ["the", "a"]
NOUNS = ["cat", "dog", "bird", "child", "farmer", "mat", "rug", "garden", "house", "river"]
VERBS = ["sat", "slept", "ran", "played", "waited", "rested"]
PREPOSITIONS = ["on", "near", "in", "under", "beside"]


def build_corpus() -> list[str]:
    rng = random.Random(7)
    corpus = ["the cat sat on the mat"] * 20
    for _ in range(400):
        corpus.append(
            f"{rng.choice(DETERMINERS)} {rng.choice(NOUNS)} {rng.choice(VERBS)} "
            f"{rng.choice(PREPOSITIONS)} {rng.choice(DETERMINERS)} {rng.choice(NOUNS)}"
        )
    return corpus


def build_checkpoint(out_dir: Path) -> None:
    torch.manual_seed(0)
    rng = random.Random(0)
    corpus = build_corpus()

    vocab = {"<unk>": 0, "<bos>": 1, "<pad>": 2}
    for word in sorted({w for line in corpus for w in line.split()}):
        vocab[word] = len(vocab)
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=Tokenizer(models.WordLevel(vocab, unk_token="<unk>")),
        unk_token="<unk>",
        bos_token="<bos>",
        pad_token="<pad>",
    )
    tokenizer.backend_tokenizer.pre_tokenizer = pre_tokenizers.WhitespaceSplit()

    config = GPT2Config(
        vocab_size=len(vocab),
        n_positions=64,
        n_embd=64,
        n_layer=2,
        n_head=2,
        bos_token_id=vocab["<bos>"],
        eos_token_id=vocab["<bos>"],
        pad_token_id=vocab["<pad>"],
    )
    model = GPT2LMHeadModel(config)
    optimizer = torch.optim.AdamW(model.parameters(), lr=3e-3)
    model.train()

    encoded = [
        [vocab["<bos>"]] + [vocab.get(w, 0) for w in line.split()] for line in corpus
    ]

    def batchify(rows):
        width = max(len(r) for r in rows)
        ids = torch.full((len(rows), width), vocab["<pad>"], dtype=torch.long)
        for i, row in enumerate(rows):
            ids[i, : len(row)] = torch.tensor(row)
        labels = ids.clone()
        labels[ids == vocab["<pad>"]] = -100
        return ids, labels

    for _ in range(6):
        rng.shuffle(encoded)
        for start in range(0, len(encoded), 32):
            ids, labels = batchify(encoded[start : start + 32])
            loss = model(input_ids=ids, labels=labels).loss
            loss.backward()
            optimizer.step()
            optimizer.zero_grad()

    model.eval()
    tokenizer.save_pretrained(out_dir)
    model.save_pretrained(out_dir)


@pytest.fixture(scope="session")
def checkpoint_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("checkpoint")
    build_checkpoint(out)
    return out


@pytest.fixture(scope="session")
def service_config(checkpoint_dir) -> ServiceConfig:
    return ServiceConfig(
        fluency_model_id=str(checkpoint_dir),
        semantic_model_id=str(checkpoint_dir),
        max_batch=8,
    )


@pytest.fixture(scope="session")
def client(service_config) -> TestClient:
    return TestClient(create_app(service_config))


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR
