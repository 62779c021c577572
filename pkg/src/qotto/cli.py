"""Command-line entry point: ``qotto <subcommand> --preset NAME | --config FILE``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from qotto import experiments as ex
from qotto.errors import ConvergenceError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_NOCONVERGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Usage errors count as validation errors (exit 1), not argparse's exit 2."""

    def error(self, message):
        raise ValidationError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", help="named parameter set: " + ", ".join(sorted(ex.PRESETS)))
    src.add_argument("--config", help="JSON config file (unknown keys rejected)")
    p.add_argument("--out", help="write the table here instead of stdout")
    p.add_argument("--format", default="csv", help="csv or json")
    p.add_argument("--copies", type=int, help="number of qutrit copies N")
    p.add_argument("--n-min", type=int, help="smallest N of a copy sweep")
    p.add_argument("--n-max", type=int, help="largest N of a copy sweep")
    p.add_argument("--tau", type=float, help="single pulse duration")
    p.add_argument("--tau-min", type=float, help="log-grid lower end")
    p.add_argument("--tau-max", type=float, help="log-grid upper end")
    p.add_argument("--tau-points", type=int, help="log-grid size")
    p.add_argument("--mode", help="finite-tau, perfect or QA")
    p.add_argument("--steps", type=int, help="initial time steps per pulse")
    p.add_argument("--workers", type=int, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qotto", description="Multi-copy qutrit Otto engines with level-crossing swaps.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    helps = {
        "run-cycle": "one full cycle with all energetic quantities",
        "sweep-tau": "finite-tau cycles over a pulse-duration grid",
        "sweep-n": "QA or perfect-swap cycles over copy numbers",
        "limit": "many-body asymptotic efficiency and reference cycle",
        "crossings": "collective level crossings for N copies",
        "selftest": "run the built-in invariant checks",
    }
    for name, text in helps.items():
        _add_common(sub.add_parser(name, help=text, description=text))
    return parser


def _config(args) -> ex.ExperimentConfig:
    if args.config:
        cfg = ex.load_config(args.config)
    elif args.preset:
        cfg = ex.preset(args.preset)
    else:
        raise ValidationError("give --preset or --config")
    updates = {}
    for key in ("copies", "n_min", "n_max", "mode", "steps", "out", "workers"):
        value = getattr(args, key)
        if value is not None:
            updates[key] = value
    if args.tau is not None:
        updates["tau"] = (args.tau,)
    elif any(v is not None for v in (args.tau_min, args.tau_max, args.tau_points)):
        updates["tau"] = ex._tau_grid({
            "min": args.tau_min if args.tau_min is not None else 1e-3,
            "max": args.tau_max if args.tau_max is not None else 1e3,
            "points": args.tau_points if args.tau_points is not None else 61,
        })
    if args.command == "sweep-n" and args.n_max is not None and args.n_min is None:
        updates["n_min"] = 1
    return replace(cfg, **updates) if updates else cfg


def _table(command: str, cfg: ex.ExperimentConfig):
    if command == "run-cycle":
        return ex.cycle_table(cfg), ex.CYCLE_COLUMNS
    if command == "sweep-tau":
        return ex.sweep_tau(cfg), ex.TAU_COLUMNS
    if command == "sweep-n":
        return ex.sweep_copies(cfg), ex.COPIES_COLUMNS
    if command == "limit":
        return ex.limit_table(cfg), ex.LIMIT_COLUMNS
    if command == "crossings":
        return ex.crossings_table(cfg), ex.CROSSING_COLUMNS
    raise ValidationError(f"unknown command {command!r}")


def _selftest() -> int:
    from qotto.selftest import run_selftest

    results = run_selftest()
    for name, passed, detail in results:
        print(f"{'PASS' if passed else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
    return EXIT_OK if all(r[1] for r in results) else EXIT_INVALID


def _run(argv) -> int:
    args = build_parser().parse_args(argv)
    if args.command is None:
        raise ValidationError("missing subcommand; see qotto --help")
    if args.command == "selftest":
        return _selftest()
    if args.format not in ("csv", "json"):
        raise ValidationError(f"--format must be csv or json, got {args.format!r}")
    cfg = _config(args)
    rows, columns = _table(args.command, cfg)
    text = ex.to_csv(rows, columns) if args.format == "csv" else ex.to_json(rows, columns)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return _run(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"error: no convergence: {exc}", file=sys.stderr)
        return EXIT_NOCONVERGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
