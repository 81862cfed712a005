"""Command line front end: lmcc-extract.

Exit codes match the analyzer CLI: 0 success, 1 usage error, 2 runtime
failure (bad corpus, unloadable model, tokenization mismatch).
"""

from __future__ import annotations

import argparse
import sys

from .errors import ExtractorError
from .extract import ExtractionJob, extract

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="lmcc-extract",
        description="Compute per-token entropies for a code corpus and "
        "write them as an entropy cache.",
    )
    parser.add_argument("--model", required=True, help="stub:MODE[:VOCAB] or a HuggingFace path")
    parser.add_argument("--corpus", required=True, help="JSONL corpus of {id, code} records")
    parser.add_argument("--output", default="-", help="cache destination, '-' for stdout")
    parser.add_argument("--device", default=None, help="device hint for heavy backends")
    parser.add_argument("--batch-size", type=int, default=8)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = ExtractionJob(
            model=args.model,
            corpus=args.corpus,
            output=args.output,
            device=args.device,
            batch_size=args.batch_size,
        )
        summary = extract(job)
    except ExtractorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {summary.samples} samples ({summary.tokens} tokens, "
        f"{summary.empty} empty) to {args.output}",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
