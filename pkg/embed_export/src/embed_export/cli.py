"""Command line entry point: one export operation, flag-for-flag."""

from __future__ import annotations

import argparse
import sys

from .exporter import POOLINGS, ExportError, export


class _Parser(argparse.ArgumentParser):
    # argparse default exits with 2 on usage errors; keep 2 for data
    # problems and use 1 for usage, matching the consumer pipeline
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="embed-export",
        description="Export pooled sentence embeddings from a pretrained "
        "transformer encoder as a '<count> <dim>' header plus one "
        "tab-delimited row per unique input text.",
    )
    parser.add_argument("--model", required=True,
                        help="model name or local checkpoint directory")
    parser.add_argument("--texts", required=True, help="input file, one text per line")
    parser.add_argument("--pooling", choices=POOLINGS, default="mean")
    parser.add_argument("--out", required=True, help="output embedding file")
    parser.add_argument("--batch-size", type=int, default=32)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        count, dim = export(args.model, args.texts, args.out,
                            pooling=args.pooling, batch_size=args.batch_size)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"exported {count} texts (dim {dim}) to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
