"""Command-line entry point.

Subcommands: ``design`` (emit a DesignResult JSON), ``fir-loss``, ``ber``,
``ser-ternary``, and ``predict``.  All take ``--config`` (JSON matching
ExperimentConfig), optional ``--seed``/``--workers`` overrides, and ``--out``.
Simulation runs write a fixed-header CSV per detector plus a JSON sidecar
with design artifacts and diagnostics.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, ShorteqError
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    run_ber,
    run_design,
    run_fir_loss,
    run_predict,
    run_ser_ternary,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shorteq",
        description="Design channel-shortening equalizer/target pairs and verify them in simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("design", "emit designed filters as JSON"),
        ("fir-loss", "FIR approximation loss vs target length"),
        ("ber", "binary error-rate simulation"),
        ("ser-ternary", "ternary symbol-error simulation with/without correction term"),
        ("predict", "model-based error-rate prediction only"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to experiment config JSON")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--workers", type=int, default=None, help="override worker count")
        p.add_argument("--out", default=None, help="output path (CSV or JSON)")
    return parser


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    cfg.validate()
    return cfg


def _write_report(report: ExperimentReport, out: str | None, default_stem: str):
    out_path = Path(out) if out else Path(f"{default_stem}.csv")
    stem = out_path.with_suffix("")
    report.write_csv(str(out_path))
    for name in list(report.series)[1:]:
        report.write_csv(f"{stem}_{name}.csv", series_name=name)
    report.write_json(f"{stem}.json")
    print(f"wrote {out_path}", file=sys.stderr)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command == "design":
            result = run_design(cfg)
            out = Path(args.out) if args.out else Path("design.json")
            with open(out, "w") as fh:
                json.dump(result, fh, indent=2, sort_keys=True)
                fh.write("\n")
            print(f"wrote {out}", file=sys.stderr)
        elif args.command == "fir-loss":
            _write_report(run_fir_loss(cfg), args.out, "fir_loss")
        elif args.command == "ber":
            _write_report(run_ber(cfg), args.out, "ber")
        elif args.command == "ser-ternary":
            _write_report(run_ser_ternary(cfg), args.out, "ser")
        elif args.command == "predict":
            _write_report(run_predict(cfg), args.out, "predict")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ShorteqError, np.linalg.LinAlgError, FloatingPointError, ZeroDivisionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
