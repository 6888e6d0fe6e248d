"""Seeded synthetic surveys: ground-truth walks, IMU logs and Wi-Fi scans.

RSS follows a log-distance path loss model with a fixed loss per crossed
wall and Gaussian shadowing; readings below the -100 dBm receiver
sensitivity are dropped from a scan.
"""
import json
import logging
import math
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from radiomap.config import ApSpec, Scenario, SimConfig
from radiomap.geometry import crossing_counts
from radiomap.models import (
    SENSITIVITY_FLOOR_DBM,
    Fingerprint,
    Floorplan,
    ImuSample,
    Point,
    Pose,
    RadioMap,
    ReferencePoint,
    Track,
    TrackEntry,
    WifiScan,
)
from radiomap.utils import normalize_angle

# Initialize logger
logger = logging.getLogger(__name__)

_IMU_STREAM, _SCAN_STREAM, _SURVEY_STREAM = 1, 2, 3


def gen_walk(waypoints: Sequence[Point], cfg: SimConfig) -> Track:
    """Ground truth: one pose every step_length along the waypoint polyline."""
    if len(waypoints) < 2:
        raise ValueError("A walk needs at least two waypoints")

    pts = np.asarray(waypoints, dtype=float)
    deltas = np.diff(pts, axis=0)
    lengths = np.hypot(deltas[:, 0], deltas[:, 1])
    if np.any(lengths == 0):
        raise ValueError("Consecutive waypoints must be distinct")

    bearings = np.arctan2(deltas[:, 0], deltas[:, 1])
    cumulative = np.concatenate(([0.0], np.cumsum(lengths)))
    n_steps = int(math.floor(cumulative[-1] / cfg.step_length + 1e-9))

    entries = [TrackEntry(0.0, Pose(float(pts[0, 0]), float(pts[0, 1]), normalize_angle(float(bearings[0]))), 0)]
    for k in range(1, n_steps + 1):
        s = k * cfg.step_length
        seg = min(max(int(np.searchsorted(cumulative, s, side="left")) - 1, 0), len(lengths) - 1)
        frac = (s - cumulative[seg]) / lengths[seg]
        x, y = pts[seg] + frac * deltas[seg]
        entries.append(TrackEntry(k / cfg.step_frequency, Pose(float(x), float(y), normalize_angle(float(bearings[seg]))), k))

    logger.debug(f"Generated a {cumulative[-1]:.2f} m walk with {n_steps} steps")
    return Track(tuple(entries))


def synth_imu(track: Track, cfg: SimConfig) -> list[ImuSample]:
    """IMU log whose gait cycles end in a downward zero crossing at every step time.

    Turns are short gyro pulses centred between two steps.
    """
    rate = cfg.imu_rate
    t0 = track[0].t
    step_times = [e.t for e in track.entries[1:]]
    period = 1.0 / cfg.step_frequency
    t_end = (step_times[-1] if step_times else t0) + period

    n = int(round((t_end - t0) * rate)) + 1
    times = t0 + np.arange(n) / rate

    vertical = np.zeros(n)
    gyro_z = np.zeros(n)
    previous = track[0]
    for entry in track.entries[1:]:
        cycle = entry.t - previous.t
        window = (times > previous.t) & (times <= entry.t)
        vertical[window] = -cfg.accel_amplitude * np.sin(2.0 * math.pi * (times[window] - entry.t) / cycle)

        turn = normalize_angle(entry.pose.heading - previous.pose.heading)
        if turn != 0.0:
            width = min(max(int(round(cfg.turn_duration * rate)), 1), max(int(cycle * rate) // 2, 1))
            first = int(round(((previous.t + entry.t) / 2.0 - t0) * rate)) - width // 2
            gyro_z[first:first + width] += turn * rate / width
        previous = entry

    rng = np.random.default_rng([cfg.seed % 2**63, _IMU_STREAM])
    noise = rng.normal(0.0, cfg.accel_noise_sigma, size=(n, 3))
    accel = noise + np.column_stack((np.zeros(n), np.zeros(n), cfg.g + vertical))
    gyro_z = gyro_z + cfg.gyro_bias

    return [ImuSample(float(times[i]), tuple(map(float, accel[i])), (0.0, 0.0, float(gyro_z[i]))) for i in range(n)]


def mean_rss(positions: np.ndarray, aps: Sequence[ApSpec], plan: Floorplan) -> np.ndarray:
    """Noise-free RSS (dBm) of every AP at every position, shape (P, A)."""
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    rss = np.empty((len(positions), len(aps)))
    for j, ap in enumerate(aps):
        origin = np.broadcast_to([ap.x, ap.y], positions.shape)
        distance = np.maximum(np.hypot(positions[:, 0] - ap.x, positions[:, 1] - ap.y), 1.0)
        walls = crossing_counts(plan, origin, positions)
        rss[:, j] = ap.tx_ref_dbm - 10.0 * ap.path_loss_exponent * np.log10(distance) - ap.wall_loss_db * walls
    return rss


def synth_rss(position: Point, aps: Sequence[ApSpec], plan: Floorplan, cfg: SimConfig, t: float,
              stream: int = 0) -> WifiScan:
    rng = np.random.default_rng([cfg.seed % 2**63, _SCAN_STREAM, stream, int(round(t * 1e6))])
    values = mean_rss(np.array([position]), aps, plan)[0] + rng.normal(0.0, cfg.rss_noise_sigma, size=len(aps))
    readings = {ap.mac: float(v) for ap, v in zip(aps, values) if v >= SENSITIVITY_FLOOR_DBM}
    return WifiScan(t=t, readings=Fingerprint(readings=readings))


def survey_points(points: Sequence[Point], aps: Sequence[ApSpec], plan: Floorplan, cfg: SimConfig,
                  samples: Optional[int] = None) -> list[Fingerprint]:
    """Static calibration: each fingerprint averages `samples` scans taken at the point.

    An AP enters the average only for the scans in which it was detected.
    """
    samples = samples or cfg.survey_samples
    mean = mean_rss(np.asarray(points, dtype=float), aps, plan)
    rng = np.random.default_rng([cfg.seed % 2**63, _SURVEY_STREAM])
    noise = rng.normal(0.0, cfg.rss_noise_sigma, size=(samples,) + mean.shape)

    detected = mean + noise >= SENSITIVITY_FLOOR_DBM
    counts = detected.sum(axis=0)
    offsets = np.where(detected, noise, 0.0).sum(axis=0) / np.maximum(counts, 1)

    fingerprints = []
    for p in range(mean.shape[0]):
        readings = {ap.mac: float(mean[p, j] + offsets[p, j]) for j, ap in enumerate(aps) if counts[p, j] > 0}
        fingerprints.append(Fingerprint(readings=readings))
    return fingerprints


def grid_points(plan: Floorplan, spacing: float) -> list[Point]:
    if not spacing > 0:
        raise ValueError("Grid spacing must be positive")
    b = plan.bounds
    nx = int(math.floor(b.width / spacing + 1e-9)) + 1
    ny = int(math.floor(b.height / spacing + 1e-9)) + 1
    return [(b.xmin + i * spacing, b.ymin + j * spacing) for j in range(ny) for i in range(nx)]


def gen_static_map(plan: Floorplan, aps: Sequence[ApSpec], spacing: float, cfg: SimConfig) -> RadioMap:
    points = grid_points(plan, spacing)
    fingerprints = survey_points(points, aps, plan, cfg)
    rps = [ReferencePoint(id=i, x=x, y=y, floor=0, sample_count=cfg.survey_samples, fingerprint=fp)
           for i, ((x, y), fp) in enumerate(zip(points, fingerprints))]
    logger.info(f"Static map: {len(rps)} grid reference points at {spacing} m spacing")
    return RadioMap(provenance="static", points=rps)


def position_at(track: Track, t: float) -> Point:
    """Track position linearly interpolated at time t, clamped to the track span."""
    times = track.times()
    positions = track.positions()
    return (float(np.interp(t, times, positions[:, 0])), float(np.interp(t, times, positions[:, 1])))


def scans_along(track: Track, aps: Sequence[ApSpec], plan: Floorplan, cfg: SimConfig) -> list[WifiScan]:
    """One scan every scan_interval from scan_offset after the track start to its end."""
    t0, t_end = track[0].t + cfg.scan_offset, track[-1].t
    if t_end < t0:
        return []
    count = int(math.floor((t_end - t0) / cfg.scan_interval + 1e-9)) + 1
    return [synth_rss(position_at(track, t0 + i * cfg.scan_interval), aps, plan, cfg, t0 + i * cfg.scan_interval)
            for i in range(count)]


@dataclass(frozen=True)
class SimulationResult:
    truth: Track
    imu: list[ImuSample]
    scans: list[WifiScan]
    test_scans: list[WifiScan]
    test_points: list[tuple[float, Point]]
    static_map: Optional[RadioMap]
    survey: Optional[RadioMap]


def run_scenario(scenario: Scenario, sim: Optional[SimConfig] = None) -> SimulationResult:
    cfg = sim or scenario.sim
    plan, aps = scenario.floorplan, scenario.aps

    truth = gen_walk(scenario.waypoints, cfg)
    imu = synth_imu(truth, cfg)
    scans = scans_along(truth, aps, plan, cfg)

    test_points = [(i * cfg.scan_interval, (float(x), float(y))) for i, (x, y) in enumerate(scenario.test_points)]
    test_scans = [synth_rss(point, aps, plan, cfg, t, stream=1) for t, point in test_points]

    static_map = None
    if scenario.static_map_spacing is not None:
        static_map = gen_static_map(plan, aps, scenario.static_map_spacing, cfg)

    survey = None
    if scenario.survey_points:
        fingerprints = survey_points(scenario.survey_points, aps, plan, cfg)
        survey = RadioMap(provenance="static", points=[
            ReferencePoint(id=i, x=x, y=y, sample_count=cfg.survey_samples, fingerprint=fp)
            for i, ((x, y), fp) in enumerate(zip(scenario.survey_points, fingerprints))
        ])

    logger.info(f"Simulated {len(truth) - 1} steps, {len(imu)} IMU samples, {len(scans)} scans, "
                f"{len(test_scans)} test scans")
    return SimulationResult(truth, imu, scans, test_scans, test_points, static_map, survey)


def bundled_scenario(name: str) -> Scenario:
    """Packaged scenario fixture, e.g. `office_corridor` or `corridor`."""
    source = resources.files("radiomap.fixtures").joinpath(f"{name}.json")
    return Scenario.model_validate(json.loads(source.read_text(encoding="utf-8")))
