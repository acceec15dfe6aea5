"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 regime analysis inconclusive.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .ode import IntegrationError
from .scenario import (
    OUT_DIR_ENV,
    ConfigError,
    derive_params,
    emit_contours,
    load_config,
    preset,
    preset_names,
    run_scenario,
    sweep,
)

log = logging.getLogger("phonon_bjj")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INCONCLUSIVE = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"values must be numbers separated by commas, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="phonon-bjj",
        description="Simulate and analyse a phononic bosonic Josephson junction.",
        epilog=f"Output directory: --out, else ${OUT_DIR_ENV}, else the config's output.dir, else the working directory.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run a preset or a config file")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="preset name (see 'presets')")
    src.add_argument("--config", help="scenario JSON or an emitted provenance file")
    sim.add_argument("--out", help="output directory")
    sim.add_argument("--format", choices=("csv", "json"), help="trajectory table format")
    sim.add_argument("--jobs", type=int, default=1, help="worker processes for preset families")

    sw = sub.add_parser("sweep", help="vary one scalar of a config")
    sw.add_argument("--config", required=True)
    sw.add_argument("--axis", required=True, help="dotted path, e.g. params.g or init.z")
    sw.add_argument("--values", required=True, type=_values, help="comma separated values")
    sw.add_argument("--out")
    sw.add_argument("--format", choices=("csv", "json"))
    sw.add_argument("--jobs", type=int, default=1)

    ct = sub.add_parser("contours", help="energy contours on a (z, phi) grid")
    ct.add_argument("--config", required=True, help="scenario JSON or preset name")
    ct.add_argument("--out")

    dp = sub.add_parser("derive-params", help="physical parameters to junction parameters")
    dp.add_argument("--config", required=True)

    sub.add_parser("presets", help="list bundled presets")
    return p


def _load(ref: str):
    """Config file path, or a preset name when no such file exists."""
    try:
        return load_config(ref)
    except ConfigError:
        if ref in preset_names():
            return preset(ref)
        raise


def _simulate(args) -> int:
    cfg = preset(args.preset) if args.preset else load_config(args.config)
    if cfg.family:
        fam = cfg.family
        res = sweep(cfg, fam["axis"], fam["values"], args.out, args.format, args.jobs)
        print(res.summary_path)
        return EXIT_INCONCLUSIVE if res.inconclusive else EXIT_OK
    bundle = run_scenario(cfg, args.out, args.format)
    for f in bundle.files:
        print(f)
    if bundle.inconclusive:
        log.warning("regime analysis inconclusive for %s", cfg.name)
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _sweep(args) -> int:
    cfg = load_config(args.config)
    res = sweep(cfg, args.axis, args.values, args.out, args.format, args.jobs)
    print(res.summary_path)
    return EXIT_INCONCLUSIVE if res.inconclusive else EXIT_OK


def _presets(args) -> int:
    for name in preset_names():
        cfg = preset(name)
        print(f"{name:16s} {cfg.model:13s} {cfg.data.get('description', '')}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "sweep":
            return _sweep(args)
        if args.command == "contours":
            print(emit_contours(_load(args.config), args.out))
            return EXIT_OK
        if args.command == "derive-params":
            print(json.dumps(derive_params(_load(args.config)), indent=2))
            return EXIT_OK
        return _presets(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # domain errors raised by the model layer on accepted configs
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
