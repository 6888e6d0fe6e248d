"""Pedestrian dead reckoning.

Steps come from zero crossings of the gravity-free acceleration norm,
heading from direction cosine matrix integration of the gyroscope, and
position from the fixed-length step update x += l sin(yaw), y += l cos(yaw).
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from radiomap.config import PdrConfig
from radiomap.models import ImuSample, Pose, StepEvent, Track, TrackEntry, make_pose
from radiomap.utils import normalize_angle, rotation_z

# Initialize logger
logger = logging.getLogger(__name__)

SMALL_ANGLE = 1e-8
ORTHONORMAL_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class Attitude:
    """Body-to-navigation direction cosine matrix."""

    C: np.ndarray
    updates: int = 0

    @classmethod
    def level(cls, yaw: float = 0.0) -> "Attitude":
        return cls(rotation_z(yaw))

    def orthonormality_error(self) -> float:
        return float(np.linalg.norm(self.C @ self.C.T - np.eye(3), ord="fro"))


def accel_norm(sample: ImuSample, g: float) -> float:
    ax, ay, az = sample.accel
    return math.sqrt(ax * ax + ay * ay + az * az) - g


def _imu_arrays(samples: Sequence[ImuSample]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    times = np.fromiter((s.t for s in samples), dtype=float, count=len(samples))
    accel = np.array([s.accel for s in samples], dtype=float).reshape(-1, 3)
    gyro = np.array([s.gyro for s in samples], dtype=float).reshape(-1, 3)
    return times, accel, gyro


def detect_steps(samples: Sequence[ImuSample], cfg: PdrConfig) -> list[StepEvent]:
    """Zero-crossing step detector.

    A step is a swing of the norm above +swing_threshold followed by a
    downward zero crossing at least min_step_interval after the previous step.
    The step time is the linearly interpolated crossing instant.
    """
    if len(samples) < 2:
        return []

    times, accel, _ = _imu_arrays(samples)
    norm = np.sqrt(np.sum(accel * accel, axis=1)) - cfg.g

    above = np.concatenate(([0], np.cumsum(norm > cfg.swing_threshold)))
    crossings = np.flatnonzero((norm[:-1] > 0) & (norm[1:] <= 0)) + 1

    steps: list[StepEvent] = []
    last_t = -math.inf
    armed_from = 0

    for i in crossings:
        # swing seen since the last crossing (samples armed_from..i-1)
        swung = above[i] - above[armed_from] > 0
        armed_from = i

        if not swung:
            continue

        v0, v1 = norm[i - 1], norm[i]
        t = float(times[i - 1] + (times[i] - times[i - 1]) * v0 / (v0 - v1))

        if t - last_t < cfg.min_step_interval:
            logger.debug(f"Step candidate at t={t:.3f} s debounced")
            continue

        steps.append(StepEvent(t=t, index=len(steps) + 1, length=cfg.step_length))
        last_t = t

    logger.debug(f"Detected {len(steps)} steps in {len(samples)} IMU samples")
    return steps


def _orthonormalize(C: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(C)
    R = u @ vt
    if np.linalg.det(R) < 0:
        u[:, -1] = -u[:, -1]
        R = u @ vt
    return R


def dcm_update(att: Attitude, gyro: Sequence[float], dt: float, renormalize_every: int = 100) -> Attitude:
    """Propagate the DCM through one gyro interval.

    C(t + dt) = C(t) (I + sin(s)/s B + (1 - cos(s))/s^2 B^2), with B the skew
    matrix of the rotation vector dt * w and s = |dt * w|.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")

    wx, wy, wz = (float(w) * dt for w in gyro)
    sigma = math.sqrt(wx * wx + wy * wy + wz * wz)

    if sigma < SMALL_ANGLE:
        a, b = 1.0, 0.5
    else:
        a = math.sin(sigma) / sigma
        b = (1.0 - math.cos(sigma)) / (sigma * sigma)

    B = np.array([[0.0, -wz, wy],
                  [wz, 0.0, -wx],
                  [-wy, wx, 0.0]])
    C = att.C @ (np.eye(3) + a * B + b * (B @ B))

    updates = att.updates + 1
    if updates % renormalize_every == 0 or Attitude(C).orthonormality_error() > ORTHONORMAL_TOLERANCE:
        C = _orthonormalize(C)

    return Attitude(C, updates)


def yaw_from_dcm(att: Attitude) -> float:
    return normalize_angle(math.atan2(att.C[1, 0], att.C[0, 0]))


def pdr_step(pose: Pose, step: StepEvent, heading: float) -> Pose:
    return Pose(
        pose.x + step.length * math.sin(heading),
        pose.y + step.length * math.cos(heading),
        normalize_angle(heading),
    )


def _check_rate(times: np.ndarray, cfg: PdrConfig) -> None:
    if len(times) < 2:
        return
    interval = float(np.median(np.diff(times)))
    if interval <= 0:
        return
    rate = 1.0 / interval
    if abs(rate - cfg.sample_rate) > 0.5 * cfg.sample_rate:
        logger.warning(f"IMU log runs at {rate:.1f} Hz, far from the nominal {cfg.sample_rate:.1f} Hz")


def heading_series(samples: Sequence[ImuSample], start_heading: float, cfg: PdrConfig) -> tuple[np.ndarray, np.ndarray]:
    """Sample times and the integrated yaw at each sample.

    The gyro reading of sample i is held over the interval (t_i, t_i+1].
    """
    times, _, gyro = _imu_arrays(samples)
    _check_rate(times, cfg)
    yaws = np.empty(len(times))
    if len(times) == 0:
        return times, yaws

    att = Attitude.level(start_heading)
    yaws[0] = yaw_from_dcm(att)
    for i in range(1, len(times)):
        att = dcm_update(att, gyro[i - 1], times[i] - times[i - 1], cfg.renormalize_every)
        yaws[i] = yaw_from_dcm(att)

    return times, yaws


def step_headings(samples: Sequence[ImuSample], start_heading: float, cfg: PdrConfig) -> list[tuple[StepEvent, float]]:
    """Each detected step paired with the yaw at its zero-crossing instant."""
    times, yaws = heading_series(samples, start_heading, cfg)
    steps = detect_steps(samples, cfg)
    pairs = []
    for step in steps:
        j = max(int(np.searchsorted(times, step.t, side="right")) - 1, 0)
        pairs.append((step, float(yaws[j])))
    return pairs


def run_pdr(samples: Sequence[ImuSample], start: Pose, cfg: PdrConfig) -> Track:
    start = make_pose(start.x, start.y, start.heading)
    t0 = samples[0].t if samples else 0.0
    entries = [TrackEntry(t0, start, 0)]

    pose = start
    for step, heading in step_headings(samples, start.heading, cfg):
        pose = pdr_step(pose, step, heading)
        entries.append(TrackEntry(step.t, pose, step.index))

    logger.info(f"PDR recovered {len(entries) - 1} steps, end at ({pose.x:.2f}, {pose.y:.2f})")
    return Track(tuple(entries))
