"""Command-line entry point.

Subcommands cover the whole workflow: ``generate`` candidates from a
translator endpoint (or the bundled mock), ``filter`` them down to one best
paraphrase per source, ``eval`` a corpus of outputs, ``augment`` a labeled
dataset, ``subsample`` it for class balance, ``train-lm`` the local fluency
model, and ``mock-translator`` to serve the deterministic mock over HTTP.

Endpoint specs: ``--translator URL | mock:TABLES.json``,
``--fluency URL | local:LM_FILE``, ``--semantic URL | local[:IDF.json]``.
Exit codes: 1 for configuration problems, 2 for transport failures under the
fail-hard policy.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Sequence

from ._jsonl import JsonlError, dump_jsonl_line, read_jsonl
from .augment import LabeledExample, augment, subsample
from .constraints import ConstraintConfig
from .evalkit import EvalRecord, evaluate
from .lm import load_lm, save_lm, train_lm
from .pipeline import ParaphraseResult, PipelineScorers, run
from .scorers import (
    HashedCharNGramEmbedder,
    IdfTable,
    LocalFluencyScorer,
    LocalSemanticScorer,
    RemoteFluencyScorer,
    RemoteScorerError,
    RemoteSemanticScorer,
    ScorerEndpoint,
    build_idf,
)
from .translator import (
    Candidate,
    GenerationConfig,
    HttpTranslator,
    MockTranslator,
    TranslatorEndpoint,
    TranslatorError,
    generate_all,
    load_mock_tables,
)

EXIT_CONFIG = 1
EXIT_TRANSPORT = 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    translator: str | None = None
    fluency: str | None = None
    semantic: str | None = None
    fluency_fallback: str | None = None
    semantic_fallback: str | None = None
    source_lang: str = "en"
    pool: tuple[str, ...] | None = None
    seed: int = 42
    on_error: str = "fail"
    strict: bool = False
    trace: bool = False
    direct_beam: int = 10
    direct_topk: int = 5
    roundtrip_beam: int = 3
    roundtrip_topk: int = 1
    max_source_overlap_ratio: float = 0.5
    no_repeat_ngram: int = 3
    short_source_token_threshold: int = 6
    short_source_overlap_ngram: int = 2
    timeout: float = 30.0

    def constraint_config(self) -> ConstraintConfig:
        return ConstraintConfig(
            max_source_overlap_ratio=self.max_source_overlap_ratio,
            no_repeat_ngram=self.no_repeat_ngram,
            short_source_token_threshold=self.short_source_token_threshold,
            short_source_overlap_ngram=self.short_source_overlap_ngram,
        )

    def generation_config(self) -> GenerationConfig:
        return GenerationConfig(
            source_lang=self.source_lang,
            pivot_pool=self.pool,
            direct_beam=self.direct_beam,
            direct_topk=self.direct_topk,
            roundtrip_beam=self.roundtrip_beam,
            roundtrip_topk=self.roundtrip_topk,
            constraints=self.constraint_config(),
        )


def _load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except ValueError as exc:
            raise ConfigError(f"config file {path}: invalid JSON: {exc}") from exc
        for key, value in data.items():
            if not hasattr(cfg, key):
                raise ConfigError(f"config file {path}: unknown field {key!r}")
            if key == "pool":
                value = tuple(value)
            setattr(cfg, key, value)
    for key in vars(cfg):
        if key in ("strict", "trace"):
            continue  # store_true flags: only override when set
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "strict", False):
        cfg.strict = True
    if getattr(args, "trace", False):
        cfg.trace = True
    if cfg.on_error not in ("fail", "skip", "fallback"):
        raise ConfigError(f"--on-error must be fail, skip or fallback, got {cfg.on_error!r}")
    return cfg


def _make_translator(cfg: RunConfig):
    spec = cfg.translator
    if not spec:
        raise ConfigError("missing translator endpoint: set --translator <url|mock:tables.json>")
    if spec.startswith("mock:"):
        path = Path(spec[len("mock:") :])
        if not path.exists():
            raise ConfigError(f"mock translator tables not found: {path}")
        return load_mock_tables(path)
    return HttpTranslator(TranslatorEndpoint(base_url=spec, timeout=cfg.timeout))


def _make_fluency(spec: str | None, cfg: RunConfig, field: str = "--fluency"):
    if not spec:
        raise ConfigError(f"missing fluency scorer: set {field} <url|local:lm-file>")
    if spec.startswith("local:"):
        path = Path(spec[len("local:") :])
        if not path.exists():
            raise ConfigError(f"fluency model file not found: {path}")
        return LocalFluencyScorer(load_lm(path))
    return RemoteFluencyScorer(ScorerEndpoint(base_url=spec, kind="fluency", timeout=cfg.timeout))


def _load_idf(path: Path) -> IdfTable:
    data = json.loads(path.read_text(encoding="utf-8"))
    return IdfTable(weights=data["weights"], document_count=data["document_count"])


def _make_semantic(spec: str | None, cfg: RunConfig, field: str = "--semantic"):
    if not spec:
        raise ConfigError(f"missing semantic scorer: set {field} <url|local[:idf.json]>")
    if spec == "local":
        return LocalSemanticScorer(embedder=HashedCharNGramEmbedder(seed=cfg.seed))
    if spec.startswith("local:"):
        path = Path(spec[len("local:") :])
        if not path.exists():
            raise ConfigError(f"idf table file not found: {path}")
        return LocalSemanticScorer(
            embedder=HashedCharNGramEmbedder(seed=cfg.seed), idf=_load_idf(path)
        )
    return RemoteSemanticScorer(ScorerEndpoint(base_url=spec, kind="semantic", timeout=cfg.timeout))


def _make_pipeline_scorers(cfg: RunConfig) -> PipelineScorers:
    fluency = _make_fluency(cfg.fluency, cfg)
    semantic = _make_semantic(cfg.semantic, cfg)
    fluency_fallback = semantic_fallback = None
    if cfg.on_error == "fallback":
        if isinstance(fluency, RemoteFluencyScorer):
            fluency_fallback = _make_fluency(cfg.fluency_fallback, cfg, field="fluency_fallback")
        if isinstance(semantic, RemoteSemanticScorer):
            semantic_fallback = _make_semantic(cfg.semantic_fallback, cfg, field="semantic_fallback")
    return PipelineScorers(
        fluency=fluency,
        semantic=semantic,
        fluency_fallback=fluency_fallback,
        semantic_fallback=semantic_fallback,
    )


def _candidate_dict(cand: Candidate) -> dict[str, Any]:
    return {
        "text": cand.text,
        "origin": cand.origin,
        "pivot": cand.pivot,
        "decoder_rank": cand.decoder_rank,
    }


def _trace_dict(result: ParaphraseResult) -> dict[str, Any]:
    trace = result.trace
    return {
        "overlap_cands": [_candidate_dict(c) | {"generation_index": c.generation_index} for c in trace.overlap_cands],
        "diversity_cands": [
            {"generation_index": c.generation_index, "text": c.text, "wer": w.value}
            for c, w in trace.diversity_cands
        ],
        "fluency_cands": [
            {"generation_index": c.generation_index, "text": c.text, "ppl": f.ppl}
            for c, f in trace.fluency_cands
        ],
        "semantic_scores": [
            {
                "generation_index": c.generation_index,
                "text": c.text,
                "precision": s.precision,
                "recall": s.recall,
                "f1": s.f1,
            }
            for c, s in trace.semantic_scores
        ],
        "rejections": [
            {"generation_index": e.candidate.generation_index, "stage": e.stage, "reason": e.reason}
            for e in trace.rejection_log
        ],
        "substitutions": list(trace.substitutions),
    }


def _require_fields(obj: dict, fields: Sequence[str], where: str) -> None:
    for f in fields:
        if f not in obj:
            raise JsonlError(where, 0, f"missing required field {f!r}")


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    translator = _make_translator(cfg)
    gen_cfg = cfg.generation_config()
    policy = "fail" if cfg.on_error == "fail" else "skip"
    with open(args.output, "w", encoding="utf-8") as out:
        for lineno, obj in read_jsonl(args.input, strict=cfg.strict):
            if "id" not in obj or "text" not in obj:
                msg = f"{args.input}:{lineno}: line needs 'id' and 'text' fields"
                if cfg.strict:
                    raise JsonlError(str(args.input), lineno, "line needs 'id' and 'text' fields")
                print(msg, file=sys.stderr)
                continue
            cand_set = generate_all(
                obj["text"], gen_cfg, translator, set_id=str(obj["id"]), on_error=policy
            )
            line: dict[str, Any] = {
                "id": cand_set.id,
                "source": cand_set.source,
                "candidates": [_candidate_dict(c) for c in cand_set.candidates],
            }
            if cand_set.errors:
                line["errors"] = list(cand_set.errors)
            out.write(dump_jsonl_line(line) + "\n")
    return 0


def cmd_filter(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    scorers = _make_pipeline_scorers(cfg)
    constraint_cfg = cfg.constraint_config()
    with open(args.output, "w", encoding="utf-8") as out:
        for lineno, obj in read_jsonl(args.input, strict=cfg.strict):
            if "id" not in obj or "source" not in obj or "candidates" not in obj:
                msg = f"{args.input}:{lineno}: line needs 'id', 'source' and 'candidates'"
                if cfg.strict:
                    raise JsonlError(str(args.input), lineno, "line needs 'id', 'source' and 'candidates'")
                print(msg, file=sys.stderr)
                continue
            try:
                cands = [
                    Candidate(
                        text=c["text"],
                        origin=c.get("origin", "direct"),
                        pivot=c.get("pivot"),
                        decoder_rank=int(c.get("decoder_rank", i)),
                        generation_index=i,
                    )
                    for i, c in enumerate(obj["candidates"])
                ]
            except (ValueError, TypeError, KeyError) as exc:
                if cfg.strict:
                    raise JsonlError(str(args.input), lineno, f"bad candidate entry: {exc}") from exc
                print(f"{args.input}:{lineno}: skipping line, bad candidate entry: {exc}", file=sys.stderr)
                continue
            try:
                result = run(obj["source"], cands, scorers, constraint_cfg, result_id=str(obj["id"]))
            except RemoteScorerError as exc:
                if cfg.on_error == "fail":
                    raise
                line = {
                    "id": str(obj["id"]),
                    "source": obj["source"],
                    "best": None,
                    "skip_reason": f"scorer_error: {exc}",
                }
                out.write(dump_jsonl_line(line) + "\n")
                continue
            line = {"id": result.id, "source": result.source, "best": result.best}
            if result.best is None:
                line["skip_reason"] = "no_admissible_candidates"
            if cfg.trace:
                line["trace"] = _trace_dict(result)
            out.write(dump_jsonl_line(line) + "\n")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    semantic = _make_semantic(cfg.semantic, cfg)
    fluency = _make_fluency(cfg.fluency, cfg)

    def records():
        for lineno, obj in read_jsonl(args.input, strict=cfg.strict):
            if "source" not in obj or ("output" not in obj and not args.baseline):
                msg = f"{args.input}:{lineno}: line needs 'source' and 'output'"
                if cfg.strict:
                    raise JsonlError(str(args.input), lineno, "line needs 'source' and 'output'")
                print(msg, file=sys.stderr)
                continue
            output = obj["source"] if args.baseline else obj["output"]
            yield EvalRecord(
                id=str(obj.get("id", lineno)),
                source=obj["source"],
                system_output=output,
                gold_references=tuple(obj.get("references", ())),
            )

    policy = "skip" if cfg.on_error in ("skip", "fallback") else "fail"
    report = evaluate(records(), semantic, fluency, on_error=policy)
    payload = report.to_dict()
    if args.baseline:
        payload["scorer_provenance"]["mode"] = "baseline (output := source)"
    text = json.dumps(payload, ensure_ascii=False, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def _read_labeled(path: str, strict: bool) -> list[LabeledExample]:
    rows: list[LabeledExample] = []
    if str(path).endswith(".csv"):
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            required = {"id", "text", "label"}
            if not reader.fieldnames or not required.issubset(reader.fieldnames):
                raise ConfigError(f"{path}: CSV must have a header with id,text,label")
            for row in reader:
                rows.append(
                    LabeledExample(
                        id=row["id"],
                        text=row["text"],
                        label=row["label"],
                        augmented_from=row.get("augmented_from") or None,
                    )
                )
        return rows
    for lineno, obj in read_jsonl(path, strict=strict):
        if not {"id", "text", "label"}.issubset(obj):
            msg = f"{path}:{lineno}: line needs 'id', 'text' and 'label'"
            if strict:
                raise JsonlError(str(path), lineno, "line needs 'id', 'text' and 'label'")
            print(msg, file=sys.stderr)
            continue
        rows.append(
            LabeledExample(
                id=str(obj["id"]),
                text=obj["text"],
                label=str(obj["label"]),
                augmented_from=obj.get("augmented_from"),
            )
        )
    return rows


def _write_labeled(path: str, rows: Sequence[LabeledExample]) -> None:
    with open(path, "w", encoding="utf-8") as out:
        for ex in rows:
            line = {"id": ex.id, "text": ex.text, "label": ex.label}
            if ex.augmented_from is not None:
                line["augmented_from"] = ex.augmented_from
            out.write(dump_jsonl_line(line) + "\n")


def cmd_augment(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    translator = _make_translator(cfg)
    scorers = _make_pipeline_scorers(cfg)
    examples = _read_labeled(args.input, cfg.strict)
    if not examples:
        raise ConfigError(f"{args.input}: no usable labeled examples")
    result = augment(
        examples,
        cfg.generation_config(),
        translator,
        scorers,
        constraint_cfg=cfg.constraint_config(),
        multiplicity=args.multiplicity,
        include_augmented=args.include_augmented,
        on_error="fail" if cfg.on_error == "fail" else "skip",
    )
    _write_labeled(args.output, result.rows)
    stats_text = json.dumps(result.stats.to_dict(), ensure_ascii=False)
    print(stats_text, file=sys.stderr)
    if args.stats_out:
        Path(args.stats_out).write_text(stats_text + "\n", encoding="utf-8")
    return 0


def cmd_subsample(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    examples = _read_labeled(args.input, cfg.strict)
    kept = subsample(examples, seed=cfg.seed, keep_fraction=args.keep_fraction)
    _write_labeled(args.output, kept)
    print(f"kept {len(kept)} of {len(examples)} examples", file=sys.stderr)
    return 0


def cmd_train_lm(args: argparse.Namespace) -> int:
    path = Path(args.input)
    if not path.exists():
        raise ConfigError(f"corpus file not found: {path}")
    lambdas = tuple(float(x) for x in args.lambdas.split(","))
    if len(lambdas) != 3:
        raise ConfigError("--lambdas needs three comma-separated values")
    with open(path, encoding="utf-8") as fh:
        lm = train_lm(fh, lambdas=lambdas, add_k=args.add_k)  # type: ignore[arg-type]
    save_lm(lm, args.output)
    print(f"trained order-3 model: {len(lm.unigrams)} unigram types -> {args.output}", file=sys.stderr)
    if args.idf_out:
        with open(path, encoding="utf-8") as fh:
            idf = build_idf(fh)
        Path(args.idf_out).write_text(
            json.dumps({"document_count": idf.document_count, "weights": dict(idf.weights)}, ensure_ascii=False)
            + "\n",
            encoding="utf-8",
        )
        print(f"wrote idf table ({idf.document_count} documents) -> {args.idf_out}", file=sys.stderr)
    return 0


class _MockTranslateHandler(BaseHTTPRequestHandler):
    mock: MockTranslator  # set by make_mock_server

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _reply(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self) -> None:  # noqa: N802 (http.server API)
        if self.path != "/v1/translate":
            self._reply(404, {"error": f"unknown path {self.path}"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length).decode("utf-8"))
            if not isinstance(body, dict):
                raise ValueError("body must be a JSON object")
        except (ValueError, UnicodeDecodeError) as exc:
            self._reply(400, {"error": f"malformed body: {exc}"})
            return
        texts = body.get("texts")
        if not isinstance(texts, list) or not texts or not all(isinstance(t, str) for t in texts):
            self._reply(422, {"error": "texts must be a non-empty list of strings"})
            return
        if not isinstance(body.get("src_lang"), str) or not isinstance(body.get("tgt_lang"), str):
            self._reply(422, {"error": "src_lang and tgt_lang must be strings"})
            return
        try:
            beam_size = int(body.get("beam_size", 1))
            num_return = int(body.get("num_return", 1))
            no_repeat = int(body.get("no_repeat_ngram", 3))
            if num_return < 1 or beam_size < 1:
                raise ValueError("beam_size and num_return must be >= 1")
        except (TypeError, ValueError) as exc:
            self._reply(422, {"error": f"bad decoder options: {exc}"})
            return
        try:
            results = self.mock.translate(
                body["src_lang"],
                body["tgt_lang"],
                texts,
                beam_size=beam_size,
                num_return=num_return,
                no_repeat_ngram=no_repeat,
                block_source_overlap_ratio=body.get("block_source_overlap_ratio"),
            )
        except Exception as exc:  # mock failure -> scorer-protocol 5xx
            self._reply(500, {"error": str(exc)})
            return
        self._reply(
            200,
            {"results": [[{"text": h.text, "score": h.score} for h in group] for group in results]},
        )


def make_mock_server(mock: MockTranslator, port: int = 0) -> ThreadingHTTPServer:
    handler = type("Handler", (_MockTranslateHandler,), {"mock": mock})
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def cmd_mock_translator(args: argparse.Namespace) -> int:
    path = Path(args.tables)
    if not path.exists():
        raise ConfigError(f"mock tables file not found: {path}")
    server = make_mock_server(load_mock_tables(path), port=args.port)
    host, port = server.server_address[:2]
    print(f"mock translator listening on http://{host}:{port}/v1/translate", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _add_common(parser: argparse.ArgumentParser, *, endpoints: bool = True) -> None:
    parser.add_argument("--config", help="JSON config file with RunConfig fields")
    parser.add_argument("--seed", type=int, default=None, help="random seed (default 42)")
    parser.add_argument("--strict", action="store_true", help="abort on invalid input lines")
    parser.add_argument(
        "--on-error",
        dest="on_error",
        choices=["fail", "skip", "fallback"],
        default=None,
        help="policy for endpoint failures (default fail)",
    )
    if endpoints:
        parser.add_argument("--translator", default=None, help="translator URL or mock:tables.json")
        parser.add_argument("--fluency", default=None, help="fluency scorer URL or local:lm-file")
        parser.add_argument("--semantic", default=None, help="semantic scorer URL or local[:idf.json]")
        parser.add_argument("--timeout", type=float, default=None, help="endpoint timeout in seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parapick", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate paraphrase candidates")
    p.add_argument("--input", required=True, help="JSONL of {id, text}")
    p.add_argument("--output", required=True)
    p.add_argument("--source-lang", dest="source_lang", default=None)
    p.add_argument("--pool", type=lambda s: tuple(s.split(",")), default=None, help="comma-separated pivot codes")
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("filter", help="select the best paraphrase per candidate set")
    p.add_argument("--input", required=True, help="JSONL of {id, source, candidates}")
    p.add_argument("--output", required=True)
    p.add_argument("--trace", action="store_true", help="include the full selection trace")
    _add_common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("eval", help="corpus evaluation report")
    p.add_argument("--input", required=True, help="JSONL of {id, source, output, references}")
    p.add_argument("--output", default=None, help="report JSON path (default stdout)")
    p.add_argument("--baseline", action="store_true", help="score the source against the references")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("augment", help="paraphrase a labeled dataset")
    p.add_argument("--input", required=True, help="JSONL or CSV with id,text,label")
    p.add_argument("--output", required=True)
    p.add_argument("--multiplicity", type=int, default=1, help="paraphrases per example")
    p.add_argument("--include-augmented", action="store_true", help="also paraphrase rows that carry provenance")
    p.add_argument("--stats-out", default=None)
    p.add_argument("--source-lang", dest="source_lang", default=None)
    p.add_argument("--pool", type=lambda s: tuple(s.split(",")), default=None)
    _add_common(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("subsample", help="balance classes by down-sampling")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--keep-fraction", type=float, default=None)
    _add_common(p, endpoints=False)
    p.set_defaults(func=cmd_subsample)

    p = sub.add_parser("train-lm", help="train and serialize the local language model")
    p.add_argument("--input", required=True, help="text file, one sentence per line")
    p.add_argument("--output", required=True)
    p.add_argument("--lambdas", default="0.6,0.3,0.1", help="trigram,bigram,unigram weights")
    p.add_argument("--add-k", dest="add_k", type=float, default=1.0)
    p.add_argument("--idf-out", dest="idf_out", default=None, help="also write an idf table")
    _add_common(p, endpoints=False)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("mock-translator", help="serve the mock translator over HTTP")
    p.add_argument("--tables", required=True, help="mock tables JSON file")
    p.add_argument("--port", type=int, default=8571)
    _add_common(p, endpoints=False)
    p.set_defaults(func=cmd_mock_translator)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, JsonlError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TranslatorError, RemoteScorerError) as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT


if __name__ == "__main__":
    sys.exit(main())
