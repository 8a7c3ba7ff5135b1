from __future__ import annotations

import argparse

import uvicorn

from .app import create_app
from .config import ServiceConfig


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="scorer-service",
        description="Serve perplexity and semantic-similarity scoring over HTTP.",
    )
    parser.add_argument("--fluency-model", required=True, help="hub id or local checkpoint dir")
    parser.add_argument("--semantic-model", required=True, help="hub id or local checkpoint dir")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-batch", type=int, default=64)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8081)
    args = parser.parse_args(argv)

    config = ServiceConfig(
        fluency_model_id=args.fluency_model,
        semantic_model_id=args.semantic_model,
        device=args.device,
        max_batch=args.max_batch,
        port=args.port,
    )
    uvicorn.run(create_app(config), host=args.host, port=config.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
