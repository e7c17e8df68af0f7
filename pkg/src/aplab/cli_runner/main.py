"""`aplab` command line: one subcommand per experiment group.

Exit status: 0 when every asserting check passes, 1 when at least one
fails, 2 for usage, config or output errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from ..grid_core import ParameterError
from .config import CHECKS, ConfigError, ExperimentConfig, parse_config
from .emit import emit_report, read_json_report
from .runner import run_experiment

OUT_ENV = "APLAB_OUT"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SUBCOMMANDS = {
    "constants": (True, None),
    "check": (False, "config"),
    "search-lambda0": (False, ["search_lambda0"]),
    "wp-ratio": (False, ["wp_ratio"]),
    "nondegen": (False, ["nondegen"]),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aplab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="YAML or JSON experiment config (defaults when omitted)")
        _common(sp)
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--threads", type=int, default=0, help="worker threads, 0 = one per CPU")
    rp = sub.add_parser("report", help="re-emit a stored JSON report")
    rp.add_argument("input", help="report.json written by an earlier run")
    _common(rp)
    return parser


def _common(sp):
    sp.add_argument("--out", help=f"output directory (env {OUT_ENV}, then config output.dir)")
    sp.add_argument("--format", choices=("csv", "json"))


def _out_dir(args, cfg: ExperimentConfig | None) -> str:
    if args.out:
        return args.out
    if os.environ.get(OUT_ENV):
        return os.environ[OUT_ENV]
    return cfg.output.dir if cfg else "aplab-out"


def _summary(report) -> None:
    failed = report.failed
    print(f"{len(report.items)} items, {len(failed)} failing: {report.status}")
    for rep in failed:
        print(f"  FAIL {rep.name}: worst violation {rep.worst_violation!r} > {rep.tolerance!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            try:
                report = read_json_report(args.input)
            except (OSError, ValueError, KeyError, TypeError) as e:
                raise ConfigError(f"cannot read report {args.input}: {e}") from e
            cfg = None
        else:
            cfg = parse_config(args.config) if args.config else ExperimentConfig()
            if args.seed is not None:
                if args.seed < 0:
                    raise ConfigError("--seed must be nonnegative")
                cfg.seed = args.seed
            if args.threads < 0:
                raise ConfigError("--threads must be >= 0")
            estimators, checks = SUBCOMMANDS[args.command]
            if checks == "config":
                checks = list(cfg.checks) or list(CHECKS)
            report = run_experiment(cfg, estimators, checks or [], args.threads)
        fmt = args.format or (cfg.output.format if cfg else "csv")
        try:
            paths = emit_report(report, _out_dir(args, cfg), fmt)
        except OSError as e:
            raise ConfigError(f"cannot write report: {e}") from e
    except (ConfigError, ParameterError) as e:
        print(f"aplab: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    _summary(report)
    print(f"wrote {len(paths)} file(s) to {paths[0].parent}")
    return EXIT_FAIL if report.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
