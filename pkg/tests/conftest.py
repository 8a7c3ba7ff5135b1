from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from parapick.lm import train_lm
from parapick.translator import Candidate

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"
FIXTURE_DIR = REPO_ROOT / "fixtures" / "protocol"

TOY_CORPUS = [
    "the small cat sat on the mat",
    "a tiny feline rested on a rug",
    "the little dog sat on the rug",
    "a cat sat on the mat",
    "the tiny kitty perched on the carpet",
    "the cat rested on the mat",
    "a small dog slept near the door",
    "the dog slept on the mat",
]


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def toy_lm():
    return train_lm(TOY_CORPUS)


@pytest.fixture(scope="session")
def demo_lm():
    with open(DATA_DIR / "lm_corpus.txt", encoding="utf-8") as fh:
        return train_lm(fh)


def make_candidates(texts, origin="direct", pivot=None):
    return [
        Candidate(text=t, origin=origin, pivot=pivot, decoder_rank=i, generation_index=i)
        for i, t in enumerate(texts)
    ]


class StubHttpService:
    """In-process HTTP server answering every POST via a pluggable function.

    ``reply_fn(path, body) -> (status, payload)``; request bodies are
    recorded for assertions.
    """

    def __init__(self, reply_fn):
        self.reply_fn = reply_fn
        self.requests: list[tuple[str, dict]] = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, fmt, *args):
                pass

            def do_POST(self):
                length = int(self.headers.get("Content-Length", "0"))
                body = json.loads(self.rfile.read(length).decode("utf-8"))
                stub.requests.append((self.path, body))
                status, payload = stub.reply_fn(self.path, body)
                raw = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(raw)))
                self.end_headers()
                self.wfile.write(raw)

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def base_url(self) -> str:
        host, port = self.server.server_address[:2]
        return f"http://{host}:{port}"

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def stub_service():
    services = []

    def factory(reply_fn):
        svc = StubHttpService(reply_fn)
        services.append(svc)
        return svc

    yield factory
    for svc in services:
        svc.close()
