"""Command-line interface.

Subcommands: analyze, correlate, gate, generate, rewrite. Input and
output are newline-delimited JSON (reports from `correlate` are a single
JSON object). Exit codes: 0 success, 1 usage error, 2 data error.

Provider specs: precomputed:PATH | remote[:URL] | synthetic:K=V,... |
constant:H. The remote entropy endpoint and the rewrite endpoint fall
back to the LMCC_ENTROPY_ENDPOINT and LMCC_REWRITE_ENDPOINT environment
variables.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Sequence

from .analysis import correlation_sweep
from .corpus import load_corpus
from .entropy import (
    ConstantProvider,
    EntropyProvider,
    PrecomputedProvider,
    RemoteProvider,
    SegmentationConfig,
    SyntheticEntropySpec,
    SyntheticProvider,
)
from .errors import AnalysisError, LmccError, NoCandidates
from .gate import RewritePair, equivalence_hook, evaluate_pair, percentile_filter, request_rewrites
from .hierarchy import MetricConfig
from .pipeline import analyze_code, analyze_sample, metric_report
from .theory import gen_flat, gen_length_pair, gen_nested

__all__ = ["main"]

logger = logging.getLogger(__name__)

ENTROPY_ENDPOINT_VAR = "LMCC_ENTROPY_ENDPOINT"
REWRITE_ENDPOINT_VAR = "LMCC_REWRITE_ENDPOINT"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):  # noqa: A002 - argparse signature
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="lmcc", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pa = sub.add_parser("analyze", help="score a corpus sample by sample")
    pa.add_argument("--input", required=True, help="corpus .jsonl")
    pa.add_argument("--output", default="-", help="metrics .jsonl (default stdout)")
    pa.add_argument("--provider", default="constant:1.0", help="entropy provider spec")
    pa.add_argument("--alpha", type=float, default=0.8)
    tau = pa.add_mutually_exclusive_group()
    tau.add_argument("--tau-quantile", type=float, default=None)
    tau.add_argument("--tau-absolute", type=float, default=None)
    pa.add_argument("--jobs", type=int, default=1)
    pa.add_argument("--dump-hierarchy", action="store_true")

    pc = sub.add_parser("correlate", help="subgroup correlation over a metrics file")
    pc.add_argument("--input", required=True, help="metrics .jsonl from analyze")
    pc.add_argument("--output", default="-")
    pc.add_argument("--metric", default="lmcc")
    pc.add_argument("--score", default="score")
    pc.add_argument("--control", default="token_count")
    pc.add_argument("--min-groups", type=int, default=9)
    pc.add_argument("--max-groups", type=int, default=11)
    pc.add_argument("--p-method", choices=("auto", "exact", "t"), default="auto")
    pc.add_argument(
        "--alpha-sweep",
        nargs="?",
        const="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1",
        default=None,
        help="comma-separated alphas; emits one record per alpha",
    )

    pg = sub.add_parser("gate", help="accept or reject rewrite pairs")
    pg.add_argument("--pairs", required=True, help="pairs .jsonl")
    pg.add_argument("--output", default="-")
    pg.add_argument("--provider", default="constant:1.0")
    pg.add_argument("--alpha", type=float, default=0.8)
    pg.add_argument("--percentile", type=float, default=50.0)
    pg.add_argument("--equiv-cmd", default=None, help="equivalence hook command template")
    pg.add_argument("--hook-timeout", type=float, default=30.0)

    pn = sub.add_parser("generate", help="emit programs with known complexity")
    pn.add_argument("--family", required=True, choices=("flat", "nested", "chain", "flat-equal", "pair"))
    pn.add_argument("--n", type=int, default=None)
    pn.add_argument("--length", type=int, default=None)
    pn.add_argument("--k", type=int, default=None)
    pn.add_argument("--output", default="-")

    pr = sub.add_parser("rewrite", help="collect rewrite candidates from an endpoint")
    pr.add_argument("--input", required=True, help="corpus .jsonl")
    pr.add_argument("--output", default="-")
    pr.add_argument("--endpoint", default=None)
    pr.add_argument("--attempts", type=int, default=10)
    pr.add_argument("--temperature", type=float, default=1.0)
    pr.add_argument("--task-kind", choices=("translation", "reasoning", "repair"), default="translation")

    return parser


def make_provider(spec: str, parser: argparse.ArgumentParser) -> EntropyProvider:
    kind, _, rest = spec.partition(":")
    try:
        if kind == "precomputed":
            if not rest:
                parser.error("precomputed provider needs a path: precomputed:PATH")
            return PrecomputedProvider(rest)
        if kind == "remote":
            url = rest or os.environ.get(ENTROPY_ENDPOINT_VAR, "")
            if not url:
                parser.error(f"remote provider needs a URL or {ENTROPY_ENDPOINT_VAR}")
            return RemoteProvider(url)
        if kind == "synthetic":
            fields: dict[str, str] = {}
            for item in filter(None, rest.split(",")):
                key, eq, value = item.partition("=")
                if not eq:
                    parser.error(f"bad synthetic field {item!r}; expected K=V")
                fields[key.strip()] = value.strip()
            spec_obj = SyntheticEntropySpec(
                mu_low=float(fields.pop("mu_low")),
                mu_high=float(fields.pop("mu_high")),
                eta=float(fields.pop("eta", "0")),
                boundary_rule=fields.pop("boundary_rule", "line_start"),
                seed=int(fields.pop("seed", "0")),
            )
            if fields:
                parser.error(f"unknown synthetic fields: {sorted(fields)}")
            return SyntheticProvider(spec_obj)
        if kind == "constant":
            return ConstantProvider(float(rest))
    except (KeyError, ValueError) as exc:
        parser.error(f"bad provider spec {spec!r}: {exc}")
    parser.error(f"unknown provider kind {kind!r}")
    raise AssertionError("unreachable")


def _seg_config(args) -> SegmentationConfig:
    if args.tau_absolute is not None:
        return SegmentationConfig(tau_mode="absolute", tau_absolute=args.tau_absolute)
    if args.tau_quantile is not None:
        return SegmentationConfig(tau_quantile=args.tau_quantile)
    return SegmentationConfig()


def _emit(path: str, records: Iterable[dict]) -> None:
    text = "".join(json.dumps(rec) + "\n" for rec in records)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fp:
            fp.write(text)


def _read_jsonl(path: str) -> list[dict]:
    if not os.path.isfile(path):
        raise LmccError(f"input file not found: {path}")
    rows: list[dict] = []
    with open(path, encoding="utf-8") as fp:
        for line_no, line in enumerate(fp, 1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise LmccError(f"line {line_no}: invalid JSON: {exc}") from exc
    return rows


def cmd_analyze(args, parser) -> int:
    samples = load_corpus(args.input)
    provider = make_provider(args.provider, parser)
    seg = _seg_config(args)
    metric = MetricConfig(alpha=args.alpha)

    def work(sample):
        try:
            analysis = analyze_sample(sample, provider, seg, metric)
        except LmccError as exc:
            return {"id": sample.id, "error": type(exc).__name__, "message": str(exc)}, False
        record = metric_report(analysis, sample.score).to_record()
        if args.dump_hierarchy:
            record["hierarchy"] = analysis.hierarchy.to_records()
        return record, True

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(work, samples))
    else:
        results = [work(s) for s in samples]
    _emit(args.output, (record for record, _ in results))
    return 0 if all(ok for _, ok in results) else 2


def _sweep_rows(rows, metric_key: str, score_key: str, control_key: str):
    triples = []
    for row in rows:
        if "error" in row:
            continue
        metric = row.get(metric_key)
        score = row.get(score_key)
        control = row.get(control_key)
        if metric is None or score is None or control is None:
            continue
        triples.append((float(metric), float(score), float(control)))
    return triples


def cmd_correlate(args, parser) -> int:
    rows = _read_jsonl(args.input)
    g_range = (args.min_groups, args.max_groups)
    if g_range[0] < 2 or g_range[0] > g_range[1]:
        parser.error(f"bad group range {g_range}")

    if args.alpha_sweep is not None:
        records = []
        for alpha_text in filter(None, args.alpha_sweep.split(",")):
            alpha = float(alpha_text)
            triples = []
            for row in rows:
                if "error" in row:
                    continue
                tb, tcl = row.get("total_branch"), row.get("total_comp_level")
                score, control = row.get(args.score), row.get(args.control)
                if None in (tb, tcl, score, control):
                    continue
                value = alpha * float(tb) + (1.0 - alpha) * float(tcl)
                triples.append((value, float(score), float(control)))
            sweep = correlation_sweep(triples, g_range, args.p_method)
            records.append(
                {
                    "alpha": alpha,
                    "best": sweep.best.to_record() if sweep.best else "ns",
                    "best_partial": sweep.best_partial.to_record() if sweep.best_partial else "ns",
                    "per_g": [res.to_record() for res in sweep.results],
                }
            )
        _emit(args.output, records)
        return 0

    triples = _sweep_rows(rows, args.metric, args.score, args.control)
    sweep = correlation_sweep(triples, g_range, args.p_method)
    report = {
        "config": {
            "metric": args.metric,
            "score": args.score,
            "control": args.control,
            "g_range": list(g_range),
            "p_method": args.p_method,
        },
        "n_samples": len(triples),
        "per_g": [res.to_record() for res in sweep.results],
        "best": sweep.best.to_record() if sweep.best else "ns",
        "best_partial": sweep.best_partial.to_record() if sweep.best_partial else "ns",
    }
    text = json.dumps(report, indent=2) + "\n"
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fp:
            fp.write(text)
    return 0


def cmd_gate(args, parser) -> int:
    rows = _read_jsonl(args.pairs)
    pairs: list[RewritePair] = []
    for line_no, row in enumerate(rows, 1):
        try:
            pairs.append(
                RewritePair(
                    id=str(row["id"]),
                    original=row["original"],
                    rewritten=row["rewritten"],
                    task_kind=row.get("task_kind", "translation"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise LmccError(f"pair record {line_no}: {exc}") from exc

    provider = make_provider(args.provider, parser)
    metric = MetricConfig(alpha=args.alpha)
    seg = SegmentationConfig()
    hook = equivalence_hook(args.equiv_cmd, args.hook_timeout) if args.equiv_cmd else None

    failed = False
    originals: list[tuple[str, float]] = []
    firsts: dict[str, tuple[int, float] | None] = {}
    for pair in pairs:
        try:
            side = analyze_code(pair.original, provider, seg, metric, f"{pair.id}:original")
            originals.append((pair.id, side.lmcc_value))
            firsts[pair.id] = (side.classic.cc, side.lmcc_value)
        except LmccError:
            firsts[pair.id] = None

    keep = percentile_filter(originals, args.percentile) if originals else set()
    records: list[dict] = []
    for pair in pairs:
        first = firsts[pair.id]
        if first is None:
            failed = True
            records.append({"id": pair.id, "error": "AnalysisError", "message": "original side failed analysis"})
            continue
        if pair.id not in keep:
            cc_before, lmcc_before = first
            records.append(
                {
                    "id": pair.id,
                    "accepted": False,
                    "reason": "below_percentile",
                    "cc_before": cc_before,
                    "cc_after": None,
                    "lmcc_before": lmcc_before,
                    "lmcc_after": None,
                }
            )
            continue
        try:
            decision = evaluate_pair(pair, provider, seg, metric, hook)
        except AnalysisError as exc:
            failed = True
            records.append({"id": pair.id, "error": "AnalysisError", "message": str(exc)})
            continue
        records.append(decision.to_record())
    _emit(args.output, records)
    return 2 if failed else 0


def cmd_generate(args, parser) -> int:
    programs = []
    if args.family in ("flat", "nested"):
        if args.n is None:
            parser.error(f"--family {args.family} requires --n")
        programs.append(gen_flat(args.n) if args.family == "flat" else gen_nested(args.n))
    else:
        if args.length is None:
            parser.error(f"--family {args.family} requires --length")
        flat_member, chain_member = gen_length_pair(args.length, args.k)
        if args.family == "chain":
            programs.append(chain_member)
        elif args.family == "flat-equal":
            programs.append(flat_member)
        else:
            programs.extend((flat_member, chain_member))
    _emit(
        args.output,
        ({"family": p.family, "code": p.code, "expected": p.expected} for p in programs),
    )
    return 0


def cmd_rewrite(args, parser) -> int:
    samples = load_corpus(args.input)
    endpoint = args.endpoint or os.environ.get(REWRITE_ENDPOINT_VAR, "")
    if not endpoint:
        parser.error(f"rewrite needs --endpoint or {REWRITE_ENDPOINT_VAR}")
    records: list[dict] = []
    failed = False
    for sample in samples:
        try:
            candidates = request_rewrites(
                sample.code, endpoint, attempts=args.attempts, temperature=args.temperature
            )
        except NoCandidates as exc:
            failed = True
            records.append({"id": sample.id, "error": "NoCandidates", "message": str(exc)})
            continue
        for j, candidate in enumerate(candidates):
            records.append(
                {
                    "id": f"{sample.id}::{j}",
                    "original": sample.code,
                    "rewritten": candidate,
                    "task_kind": args.task_kind,
                }
            )
    _emit(args.output, records)
    return 2 if failed else 0


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "analyze": cmd_analyze,
        "correlate": cmd_correlate,
        "gate": cmd_gate,
        "generate": cmd_generate,
        "rewrite": cmd_rewrite,
    }
    try:
        return handlers[args.command](args, parser)
    except LmccError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
