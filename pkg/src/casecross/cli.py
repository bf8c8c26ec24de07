"""Command-line interface.

Subcommands: link, match, fit, effects, run-all, synth, validate. A config
file drives everything; flags override the corresponding config keys. Exit
codes distinguish input errors (2), an empty analysis (3), a sampler
non-convergence warning (4), and separation (5).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .config import AnalysisConfig, load_config, validate_config
from .errors import (
    CaseCrossError,
    ConfigurationError,
    EmptyAnalysisError,
    SeparationError,
)
from .pipeline import run
from .simulate import TruthSpec, generate, linear_truth

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_EMPTY_ANALYSIS = 3
EXIT_NONCONVERGENCE = 4
EXIT_SEPARATION = 5

log = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casecross",
        description="Case-crossover analysis of temperature and pm25 exposures",
    )
    parser.add_argument("-q", "--quiet", action="store_true", help="suppress progress logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_opts(p, need_seed=False):
        p.add_argument("--config", required=True, help="path to a JSON config (or run manifest)")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--seed", type=int, help="override the sampler seed" + (" (required unless in config)" if need_seed else ""))
        p.add_argument("--trim-quantile", type=float, dest="trim_quantile")
        p.add_argument("--model-kind", dest="model_kind", choices=("spline_linear", "spline_tensor"))
        p.add_argument("--temperature-window-days", type=int, dest="temperature_window_days")
        p.add_argument("--pm25-window-days", type=int, dest="pm25_window_days")

    for name, help_text in (
        ("link", "link gridded fields to zones and write exposure series"),
        ("match", "build matched sets, apply trimming, write the audit and drop log"),
        ("fit", "run the pipeline through model fitting"),
        ("effects", "run the pipeline through contrast/curve/surface tables"),
        ("run-all", "run every stage and write the manifest"),
    ):
        p = sub.add_parser(name, help=help_text)
        add_config_opts(p, need_seed=name in ("fit", "effects", "run-all"))

    p = sub.add_parser("validate", help="dry-run schema and file checks")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("synth", help="generate a synthetic dataset in the pipeline input formats")
    p.add_argument("--out", required=True, help="directory for the generated CSV files")
    p.add_argument("--seed", type=int, help="generator seed (required)")
    p.add_argument("--events", type=int, default=1200)
    p.add_argument("--zones", type=int, default=40)
    p.add_argument("--slope-t", type=float, default=0.06, dest="slope_t")
    p.add_argument("--slope-a", type=float, default=0.02, dest="slope_a")
    p.add_argument("--gamma", type=float, default=0.003)
    return parser


def _apply_overrides(cfg: AnalysisConfig, args) -> AnalysisConfig:
    updates = {}
    if getattr(args, "out", None):
        updates["output_dir"] = args.out
    for key in ("seed", "trim_quantile", "model_kind", "temperature_window_days", "pm25_window_days"):
        value = getattr(args, key, None)
        if value is not None:
            updates[key] = value
    return replace(cfg, **updates) if updates else cfg


def _cmd_pipeline(args, upto: str) -> int:
    cfg, verbatim = load_config(args.config)
    cfg = _apply_overrides(cfg, args)
    artifacts = run(cfg, verbatim, upto=upto)
    if not artifacts.converged:
        log.warning("sampler did not converge (some rhat > 1.05); see diagnostics.txt")
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg, _ = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    problems = validate_config(cfg, need_seed=True)
    if problems:
        for p in problems:
            print(f"problem: {p}")
        print(f"invalid: {len(problems)} problem(s)")
        return EXIT_INPUT_ERROR
    print("ok: configuration and input files look valid")
    return EXIT_OK


def _cmd_synth(args) -> int:
    if args.seed is None:
        raise ConfigurationError("synth requires --seed")
    truth = linear_truth(
        args.slope_t, args.slope_a, args.gamma, n_zones=args.zones, seed=args.seed
    )
    data = generate(truth, args.events)
    out = Path(args.out)
    io.write_rows(out / "grid.csv", ["cell_id", "lat", "lon"],
                  [(c.cell_id, c.lat, c.lon) for c in data.cells])
    io.write_rows(out / "zones.csv", ["zone_id", "lat", "lon"],
                  [(z.zone_id, z.lat, z.lon) for z in data.zones])
    io.write_rows(out / "membership.csv", ["zone_id", "cell_id"], data.membership)
    io.write_rows(
        out / "temperature_field.csv", ["cell_id", "date", "value"],
        _field_rows(data, data.temperature_series),
    )
    io.write_rows(
        out / "pm25_field.csv", ["cell_id", "date", "value"],
        _field_rows(data, data.pm25_series),
    )
    io.write_rows(
        out / "events.csv", ["subject_id", "zone_id", "case_date"],
        [(e.subject_id, e.zone_id, e.case_date.isoformat()) for e in data.events],
    )
    log.info("wrote synthetic dataset (%d events, %d zones) to %s", args.events, args.zones, out)
    return EXIT_OK


def _field_rows(data, series_by_zone):
    zone_to_cell = dict(data.membership)
    for zid in sorted(series_by_zone):
        series = series_by_zone[zid]
        cell = zone_to_cell[zid]
        for day in sorted(series.values):
            yield (cell, day.isoformat(), series.values[day])


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "synth":
            return _cmd_synth(args)
        upto = {"link": "link", "match": "match", "fit": "fit",
                "effects": "effects", "run-all": "effects"}[args.command]
        return _cmd_pipeline(args, upto)
    except ConfigurationError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except EmptyAnalysisError as exc:
        print(f"empty analysis: {exc}", file=sys.stderr)
        return EXIT_EMPTY_ANALYSIS
    except SeparationError as exc:
        print(f"separation: {exc}", file=sys.stderr)
        return EXIT_SEPARATION
    except CaseCrossError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
