"""Command-line entry point: ``cek run --config <path>``."""

from __future__ import annotations

import argparse
import sys

from .errors import CekError
from .pipeline import PipelineConfig, run_pipeline


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cek",
        description="Causal-inference evaluation kit: run a config-driven "
        "cross-validated analysis and emit its diagnostic reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute a pipeline config")
    run.add_argument("--config", required=True, help="path to the JSON config")
    run.add_argument(
        "--output",
        default=None,
        help="output directory (default: config output_dir, then $CEK_OUTPUT_DIR)",
    )
    run.add_argument(
        "--seed-override",
        type=int,
        default=None,
        help="replace the fold seed from the config",
    )
    run.add_argument(
        "--subset",
        default=None,
        help="evaluate only this named subset from the config",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = PipelineConfig.from_json(args.config)
        out = run_pipeline(
            config,
            output_dir=args.output,
            seed_override=args.seed_override,
            subset_only=args.subset,
        )
    except CekError as exc:
        print(f"cek: {type(exc).__module__}.{type(exc).__qualname__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cek: io error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
