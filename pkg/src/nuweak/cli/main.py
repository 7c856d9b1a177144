"""Command-line entry point.

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import sys

from ..errors import ConfigError, NumericalError
from .config import MODES, SCAN_MODES, dump_config, load_config
from .scan import run_scan, write_rows

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

# Modes each subcommand accepts; the first is used when the config names another.
SUBCOMMAND_MODES = {
    "scan": SCAN_MODES,
    "current": ("current_profile",),
    "pointer": ("pointer_demo",),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nuweak", description="Neutrino oscillation scans with weak-value currents.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("scan", "oscillation probabilities over the L and E grids"),
        ("current", "flavor density and current profiles around the arrival time"),
        ("pointer", "pointer distributions for a pre/post-selected qubit"),
        ("validate", "check a config and print it with defaults filled in"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON config file, or - for stdin")
        p.add_argument("--output", default="-", help="output path, or - / stdout (default)")
        if name != "validate":
            p.add_argument("--format", choices=("csv", "json"), default="csv")
            p.add_argument("--threads", type=int, default=1, help="worker threads (output order is fixed)")
            p.add_argument("--seed", type=int, default=None, help="reserved; no stochastic paths")
        if name == "scan":
            p.add_argument("--mode", choices=SCAN_MODES, default=None, help="override the config's mode")
    return parser


def _resolve_mode(command, cfg, override):
    allowed = SUBCOMMAND_MODES[command]
    if override is not None:
        return cfg.with_mode(override)
    if cfg.mode in allowed:
        return cfg
    return cfg.with_mode(allowed[0])


def _open_output(path):
    if path in ("-", "stdout"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(sys.stdin if args.config == "-" else args.config)
        if args.command != "validate":
            if args.threads < 1:
                raise ConfigError("--threads", "must be at least 1")
            cfg = _resolve_mode(args.command, cfg, getattr(args, "mode", None))
            if cfg.mode in MODES[:4] and not cfg.n_flavors:
                raise ConfigError("n_flavors", "missing required key")
            # Rows are fully computed before anything is written, so a failure
            # never leaves a truncated file behind.
            rows = list(run_scan(cfg, args.threads))
        out, close = _open_output(args.output)
        try:
            if args.command == "validate":
                out.write(dump_config(cfg))
            else:
                write_rows(cfg, rows, out, args.format)
        finally:
            if close:
                out.close()
    except (NumericalError, ArithmeticError) as exc:
        print(f"nuweak: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, OSError) as exc:
        print(f"nuweak: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
