"""Streaming JSONL input with per-line diagnostics."""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any, Iterator


class JsonlError(ValueError):
    def __init__(self, path: str, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.lineno = lineno


def read_jsonl(path: str | Path, strict: bool = False) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (lineno, object) per non-blank line. Invalid lines are skipped
    with a diagnostic on stderr, or raised under strict mode."""
    skipped = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("line is not a JSON object")
            except ValueError as exc:
                if strict:
                    raise JsonlError(str(path), lineno, str(exc)) from exc
                skipped += 1
                print(f"{path}:{lineno}: skipping invalid line: {exc}", file=sys.stderr)
                continue
            yield lineno, obj
    if skipped:
        print(f"{path}: skipped {skipped} invalid line(s)", file=sys.stderr)


def dump_jsonl_line(obj: dict[str, Any]) -> str:
    return json.dumps(obj, ensure_ascii=False)
