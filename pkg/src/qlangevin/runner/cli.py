"""Command-line entry point.

Exit codes: 0 ok, 1 validation failure, 2 configuration error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import ConfigError, QLangevinError
from . import io
from .config import MODELS, PRESETS, load, preset
from .runs import run_biphoton, run_spectra
from .validate import ORACLE_CRITERIA, run_validation

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", choices=PRESETS, help="parameter set (default group_delay)")
    common.add_argument("--config", type=Path, help="YAML or JSON configuration file")
    common.add_argument("--model", choices=MODELS, help="macro, micro or both")
    common.add_argument("--geometry", choices=("forward", "backward"))
    common.add_argument("--nln", action="store_true", default=None, help="also write boundary-only (NLN) results")
    common.add_argument("--grid-points", type=int, help="number of frequency samples (power of two)")
    common.add_argument("--span-mhz", type=float, help="half-width W of the frequency grid, W/2pi in MHz")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--plot", action="store_true", default=None, help="write SVG plots")

    parser = argparse.ArgumentParser(prog="qlangevin", description="Quantum Langevin spectra and biphoton correlations.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectra", parents=[common], help="write second-moment spectra and commutators")
    sub.add_parser("biphoton", parents=[common], help="write biphoton wavefunctions and G2")
    v = sub.add_parser("validate", parents=[common], help="run the full validation suite")
    v.add_argument("--criteria", type=int, nargs="+", help="subset of criteria to run")
    sub.add_parser("oracle", parents=[common], help="run the analytic oracle checks only")
    return parser


def resolve_config(args):
    cfg = load(args.config) if args.config else preset(args.preset or "group_delay")
    if args.config and args.preset and args.preset != cfg.preset:
        raise ConfigError("--preset conflicts with the configuration file")
    changes = {}
    if args.model:
        changes["model"] = args.model
    if args.geometry:
        changes["geometry"] = args.geometry
    if args.nln:
        changes["nln"] = True
    if args.plot:
        changes["plot"] = True
    if args.grid_points is not None:
        changes["grid_points"] = args.grid_points
    if args.span_mhz is not None:
        changes["span_mhz"] = args.span_mhz
    if args.out is not None:
        changes["output_dir"] = str(args.out)
    cfg = cfg.with_(**changes)
    cfg.grid()
    return cfg


def _report(cfg, criteria) -> int:
    report = run_validation(criteria, cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(out / "validation_report.json", report)
    for r in report["records"]:
        status = "PASS" if r["pass"] else "FAIL"
        rel = ">" if r["kind"] == "min" else "<="
        print(f"[{status}] {r['criterion']:>2} {r['name']}: {r['max_abs_deviation']:.3e} (needs {rel} {r['tolerance']:.1e})")
    print("overall:", "PASS" if report["pass"] else "FAIL")
    return EXIT_OK if report["pass"] else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "spectra":
            files = run_spectra(cfg)
            print(json.dumps({"written": len(files), "out": cfg.output_dir}))
            return EXIT_OK
        if args.command == "biphoton":
            files = run_biphoton(cfg)
            print(json.dumps({"written": len(files), "out": cfg.output_dir}))
            return EXIT_OK
        if args.command == "validate":
            return _report(cfg, args.criteria)
        return _report(cfg, ORACLE_CRITERIA)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QLangevinError, OverflowError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
