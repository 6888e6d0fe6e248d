"""Command line pipeline: simulate, track, build maps, localize and evaluate.

Every command writes its artifacts to caller-chosen paths; diagnostics go
to stderr through logging. Exit codes: 0 success, 2 malformed input,
3 algorithmic failure.
"""
import argparse
import json
import logging
import sys
from functools import wraps
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from radiomap import __version__, configure_logging
from radiomap.config import Settings, default_seed, load_settings, override
from radiomap.evaluation import (
    compare_fingerprints,
    error_cdf,
    error_stats,
    k_sweep,
    localization_report,
    summarize_map,
    track_errors,
)
from radiomap.exceptions import InputFormatError, RadioMapError
from radiomap.localizer import estimate
from radiomap.mapbuilder import build_dynamic_map
from radiomap.models import Pose
from radiomap.pdr import run_pdr
from radiomap.pf import run_pf_pdr
from radiomap.simulator import bundled_scenario, run_scenario
from radiomap.storage import (
    load_floorplan,
    load_imu,
    load_queries,
    load_radio_map,
    load_scans,
    load_scenario,
    load_track,
    save_floorplan,
    save_imu,
    save_points,
    save_radio_map,
    save_scans,
    save_track,
    write_frame,
    write_json,
)

# Initialize logger
logger = logging.getLogger(__name__)

PERCENTILE_METHOD = "linear"


def exits_on_error(command):
    """Turn package errors into the command's exit code."""
    @wraps(command)
    def decorated(args, settings):
        try:
            command(args, settings)
            return 0
        except RadioMapError as e:
            logger.error(f"{args.command} failed: {e}")
            return e.exit_code
    return decorated


def resolve_seed(args, settings: Settings) -> int:
    if args.seed is not None:
        return args.seed
    if settings.seed is not None:
        return settings.seed
    return default_seed()


def _start_pose(values: Sequence[float]) -> Pose:
    x, y, heading = values
    return Pose(x, y, heading)


def _stats_document(errors: Sequence[float]) -> dict:
    return {**error_stats(errors).model_dump(), "percentile_method": PERCENTILE_METHOD}


def _write_cdf(errors: Sequence[float], path: Path) -> None:
    write_frame(pd.DataFrame(error_cdf(errors).points, columns=["error", "fraction"]), path)


@exits_on_error
def simulate_command(args, settings):
    if args.bundled:
        scenario = bundled_scenario(args.bundled)
    elif args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        raise InputFormatError("simulate needs --scenario or --bundled")

    # A sim section in --config overrides the scenario's own.
    sim = settings.sim if "sim" in settings.model_fields_set else scenario.sim
    sim = override(sim, seed=resolve_seed(args, settings))
    result = run_scenario(scenario, sim)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_imu(result.imu, out / "imu.csv")
    save_scans(result.scans, out / "scans.csv")
    save_track(result.truth, out / "truth_track.csv")
    save_floorplan(scenario.floorplan, out / "floorplan.json")

    if result.test_points:
        save_scans(result.test_scans, out / "test_scans.csv")
        save_points(result.test_points, out / "test_points.csv")
    if result.static_map is not None:
        save_radio_map(result.static_map, out / "static_map.json")
    if result.survey is not None:
        save_radio_map(result.survey, out / "survey.json")

    logger.info(f"Simulation written to {out}")


@exits_on_error
def pdr_command(args, settings):
    track = run_pdr(load_imu(args.imu), _start_pose(args.start), settings.pdr)
    save_track(track, args.out)


@exits_on_error
def pf_pdr_command(args, settings):
    pf_cfg = settings.pf
    if args.particles is not None:
        pf_cfg = override(pf_cfg, n_particles=args.particles)

    track = run_pf_pdr(
        load_imu(args.imu),
        _start_pose(args.start),
        load_floorplan(args.floorplan),
        settings.pdr,
        pf_cfg,
        resolve_seed(args, settings),
        reinit_on_collapse=args.reinit_on_collapse,
    )
    save_track(track, args.out)


@exits_on_error
def build_map_command(args, settings):
    def report(decision):
        print(decision, file=sys.stderr)

    radio_map = build_dynamic_map(
        load_track(args.track),
        load_scans(args.scans),
        settings.merge,
        floor=args.floor,
        merge=not args.no_merge,
        on_decision=report,
    )
    save_radio_map(radio_map, args.out)


@exits_on_error
def localize_command(args, settings):
    update = {}
    if args.algo:
        update["algorithm"] = args.algo
    if args.k is not None:
        update["k"] = args.k
    cfg = override(settings.localizer, **update)

    radio_map = load_radio_map(args.map)
    lines = []
    for scan in load_scans(args.query):
        result = estimate(scan.readings, radio_map, cfg)
        x, y = result.position
        lines.append(f"{scan.t!r},{x!r},{y!r},{result.floor},{cfg.algorithm},{cfg.k}\n")

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            handle.writelines(lines)
    else:
        sys.stdout.writelines(lines)


@exits_on_error
def evaluate_command(args, settings):
    errors = track_errors(load_track(args.estimated), load_track(args.truth))
    write_json(_stats_document(errors), args.out_stats)
    if args.out_cdf:
        _write_cdf(errors, args.out_cdf)
    logger.info(f"Track error over {len(errors)} entries written to {args.out_stats}")


@exits_on_error
def k_sweep_command(args, settings):
    if args.k_min < 1 or args.k_max < args.k_min:
        raise InputFormatError(f"Invalid K range [{args.k_min}, {args.k_max}]")

    rows = k_sweep(
        load_radio_map(args.map),
        load_queries(args.queries, args.points),
        args.algos,
        range(args.k_min, args.k_max + 1),
        settings.localizer,
    )
    write_frame(pd.DataFrame([(r.algo, r.k, r.median) for r in rows], columns=["algo", "k", "median"]), args.out)


@exits_on_error
def compare_maps_command(args, settings):
    static_ref = [(p.position, p.fingerprint) for p in load_radio_map(args.static).points]
    stats = compare_fingerprints(load_radio_map(args.dynamic), static_ref)
    write_json({**stats.model_dump(), "percentile_method": PERCENTILE_METHOD}, args.out)
    logger.info(f"Mean RSS difference {stats.mean:.3f} dB over {stats.count} readings")


@exits_on_error
def localization_report_command(args, settings):
    report = localization_report(
        load_radio_map(args.map),
        load_queries(args.queries, args.points),
        settings.localizer,
        args.algos,
    )

    stats_rows, cdf_rows = [], []
    for algo, errors in report.items():
        stats = error_stats(errors)
        stats_rows.append((algo, stats.minimum, stats.median, stats.mean, stats.p90, stats.maximum, stats.count))
        cdf_rows.extend((algo, e, f) for e, f in error_cdf(errors).points)

    write_frame(pd.DataFrame(stats_rows, columns=["algo", "minimum", "median", "mean", "p90", "maximum", "count"]),
                args.out_stats)
    write_frame(pd.DataFrame(cdf_rows, columns=["algo", "error", "fraction"]), args.out_cdf)


@exits_on_error
def map_info_command(args, settings):
    summary = summarize_map(load_radio_map(args.map))
    sys.stdout.write(json.dumps(summary.model_dump(), indent=2) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radiomap", description="Dynamic Wi-Fi radio map pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=None, help="Seed for every random draw (default: RADIOMAP_SEED or 0)")
    parser.add_argument("--config", type=Path, default=None, help="Settings JSON file")
    parser.add_argument("--log-level", default=None, help="Overrides LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    cmd = commands.add_parser("simulate", help="Synthesize IMU, scans and truth from a scenario")
    cmd.add_argument("--scenario", type=Path, help="Scenario JSON file")
    cmd.add_argument("--bundled", choices=["office_corridor", "corridor"], help="Packaged scenario name")
    cmd.add_argument("--out", type=Path, required=True, help="Output directory")
    cmd.set_defaults(handler=simulate_command)

    cmd = commands.add_parser("pdr", help="Dead reckoning track from an IMU log")
    cmd.add_argument("--imu", type=Path, required=True)
    cmd.add_argument("--start", type=float, nargs=3, metavar=("X", "Y", "HEADING"), required=True)
    cmd.add_argument("--out", type=Path, required=True, help="Track CSV")
    cmd.set_defaults(handler=pdr_command)

    cmd = commands.add_parser("pf-pdr", help="Map-matched dead reckoning track")
    cmd.add_argument("--imu", type=Path, required=True)
    cmd.add_argument("--floorplan", type=Path, required=True)
    cmd.add_argument("--start", type=float, nargs=3, metavar=("X", "Y", "HEADING"), required=True)
    cmd.add_argument("--particles", type=int, default=None, help="Overrides pf.n_particles")
    cmd.add_argument("--reinit-on-collapse", action="store_true",
                     help="Reinitialize around the last estimate once when all particles hit a wall")
    cmd.add_argument("--out", type=Path, required=True, help="Track CSV")
    cmd.set_defaults(handler=pf_pdr_command)

    cmd = commands.add_parser("build-map", help="Dynamic radio map from a track and a scan log")
    cmd.add_argument("--track", type=Path, required=True)
    cmd.add_argument("--scans", type=Path, required=True)
    cmd.add_argument("--floor", type=int, default=0)
    cmd.add_argument("--no-merge", action="store_true", help="Emit the raw map, one point per scan")
    cmd.add_argument("--out", type=Path, required=True, help="Radio map JSON")
    cmd.set_defaults(handler=build_map_command)

    cmd = commands.add_parser("localize", help="Estimate the position of every query scan")
    cmd.add_argument("--map", type=Path, required=True)
    cmd.add_argument("--algo", choices=["nn", "knn", "wknn", "bayes"], default=None)
    cmd.add_argument("--k", type=int, default=None)
    cmd.add_argument("--query", type=Path, required=True, help="Scan CSV")
    cmd.add_argument("--out", type=Path, default=None, help="Write t,x,y,floor,algo,k lines here instead of stdout")
    cmd.set_defaults(handler=localize_command)

    cmd = commands.add_parser("evaluate", help="Track error statistics against the truth track")
    cmd.add_argument("--estimated", type=Path, required=True)
    cmd.add_argument("--truth", type=Path, required=True)
    cmd.add_argument("--out-stats", type=Path, required=True, help="Statistics JSON")
    cmd.add_argument("--out-cdf", type=Path, default=None, help="CDF CSV")
    cmd.set_defaults(handler=evaluate_command)

    cmd = commands.add_parser("k-sweep", help="Median localization error for every K")
    cmd.add_argument("--map", type=Path, required=True)
    cmd.add_argument("--queries", type=Path, required=True, help="Query scan CSV")
    cmd.add_argument("--points", type=Path, required=True, help="Truth points CSV")
    cmd.add_argument("--algos", nargs="+", choices=["knn", "wknn"], default=["knn", "wknn"])
    cmd.add_argument("--k-min", type=int, default=1)
    cmd.add_argument("--k-max", type=int, default=10)
    cmd.add_argument("--out", type=Path, required=True, help="CSV algo,k,median")
    cmd.set_defaults(handler=k_sweep_command)

    cmd = commands.add_parser("compare-maps", help="RSS difference between static and dynamic fingerprints")
    cmd.add_argument("--dynamic", type=Path, required=True)
    cmd.add_argument("--static", type=Path, required=True, help="Static survey radio map")
    cmd.add_argument("--out", type=Path, required=True, help="Statistics JSON")
    cmd.set_defaults(handler=compare_maps_command)

    cmd = commands.add_parser("localization-report", help="Error statistics and CDF of every localizer")
    cmd.add_argument("--map", type=Path, required=True)
    cmd.add_argument("--queries", type=Path, required=True)
    cmd.add_argument("--points", type=Path, required=True)
    cmd.add_argument("--algos", nargs="+", choices=["nn", "knn", "wknn", "bayes"],
                     default=["nn", "knn", "wknn", "bayes"])
    cmd.add_argument("--out-stats", type=Path, required=True)
    cmd.add_argument("--out-cdf", type=Path, required=True)
    cmd.set_defaults(handler=localization_report_command)

    cmd = commands.add_parser("map-info", help="Summary of a radio map")
    cmd.add_argument("--map", type=Path, required=True)
    cmd.set_defaults(handler=map_info_command)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        settings = load_settings(args.config)
    except InputFormatError as e:
        logger.error(str(e))
        return e.exit_code

    return args.handler(args, settings)
