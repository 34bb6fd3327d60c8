"""Command-line front end.

    hoytdf analytic --m 4 --k 1 2 3 --q 0.3 1.0 --out relays.csv
    hoytdf compare --config sweep.yaml --seed 7
    hoytdf validate [--full]

Exit codes: 0 success, 1 parse/domain error, 2 numeric failure in at least
one row, 3 validation failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, HoytDFError
from .sweep import (
    LINK_NAMES,
    MODES,
    config_from_mapping,
    config_to_mapping,
    emit_csv,
    format_csv,
    parse_config,
    run_sweep,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # usage errors are parse errors (exit 1), not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_sweep_args(p: argparse.ArgumentParser, seed_required: bool):
    p.add_argument("--config", help="YAML sweep configuration")
    p.add_argument("--m", type=int, nargs="+", help="modulation orders")
    p.add_argument("--k", type=int, nargs="+", help="relay counts")
    p.add_argument("--q", type=float, nargs="+", help="symmetric fading parameters")
    p.add_argument("--q-sd", type=float)
    p.add_argument("--q-sr", type=float, nargs="+")
    p.add_argument("--q-rd", type=float, nargs="+")
    for name in ("omega-sd", "omega-sr", "omega-rd", "power-s", "power-r", "noise"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--snr-start", type=float)
    p.add_argument("--snr-stop", type=float)
    p.add_argument("--snr-step", type=float)
    p.add_argument("--snr-links", nargs="+", choices=LINK_NAMES)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, required=seed_required)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hoytdf", description="SER of DF relay networks over Hoyt fading")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for mode in MODES:
        _add_sweep_args(sub.add_parser(mode, help=f"{mode} SER sweep"), seed_required=mode != "analytic")
    val = sub.add_parser("validate", help="run the built-in oracle and invariant checks")
    val.add_argument("--full", action="store_true", help="acceptance-scale grids and trial counts")
    return parser


_SCALAR_FLAGS = [
    "m", "k", "q", "q_sd", "q_sr", "q_rd", "omega_sd", "omega_sr", "omega_rd",
    "power_s", "power_r", "noise", "snr_links", "trials", "seed", "out", "workers",
]


def config_from_args(args: argparse.Namespace):
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        raw = config_to_mapping(parse_config(text))
    else:
        raw = {}
    for name in _SCALAR_FLAGS:
        v = getattr(args, name)
        if v is not None:
            raw[name] = v
    snr = dict(raw.get("snr_db", {}))
    for part in ("start", "stop", "step"):
        v = getattr(args, f"snr_{part}")
        if v is not None:
            snr[part] = v
    if snr:
        raw["snr_db"] = snr
    raw["mode"] = args.command
    return config_from_mapping(raw)


def _validate(full: bool) -> int:
    from .validation import run_all

    results = run_all(quick=not full)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if ok else EXIT_VALIDATION


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    if args.command == "validate":
        return _validate(args.full)
    try:
        cfg = config_from_args(args)
        result = run_sweep(cfg)
    except HoytDFError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if cfg.out:
            emit_csv(result, cfg.out)
        else:
            sys.stdout.write(format_csv(result))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for row in result.rows:
        if row.error:
            print(f"row {row.point.index}: {row.error}", file=sys.stderr)
    return EXIT_NUMERIC if result.has_errors else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
