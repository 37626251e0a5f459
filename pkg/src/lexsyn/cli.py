"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 runtime error, 3 stale artifacts.
"""

from __future__ import annotations

import argparse
import sys

from .errors import LexsynError
from .pipeline import (
    STAGES,
    load_config,
    run_pipeline,
    stage_analyze,
    stage_evaluate,
    stage_extract,
    stage_ingest,
    stage_perturb,
    stage_report,
)

_STAGE_FNS = {
    "ingest": stage_ingest,
    "perturb": stage_perturb,
    "extract": stage_extract,
    "evaluate": stage_evaluate,
    "analyze": stage_analyze,
    "report": stage_report,
}


def _csv_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _csv_strs(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexsyn",
        description="Measure how lexical and syntactic text features endure "
        "word deletions, and how that affects binary classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in ("run", *STAGES):
        p = sub.add_parser(
            command,
            help="run the full pipeline" if command == "run" else f"run the {command} stage",
        )
        p.add_argument("--config", required=True, help="YAML configuration file")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--jobs", type=int, default=None, help="worker bound (outputs unchanged)")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--levels", type=_csv_ints, default=None,
                       help="comma-separated alteration levels override")
        p.add_argument("--models", type=_csv_strs, default=None,
                       help="comma-separated model kinds override")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(
            args.config, seed=args.seed, jobs=args.jobs, out=args.out,
            levels=args.levels, models=args.models,
        )
        if args.command == "run":
            bundle = run_pipeline(cfg)
            print(f"pipeline complete; bundle hash {bundle.bundle_hash()}")
            print(f"reports under {cfg.output_dir / 'report'}")
        else:
            _STAGE_FNS[args.command](cfg)
            print(f"stage {args.command} complete; artifacts under {cfg.output_dir}")
    except LexsynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # unexpected: runtime exit code, not a traceback
        print(f"unexpected error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
