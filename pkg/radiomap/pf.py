"""Particle filter layered on PDR with floorplan map matching.

Bootstrap filter: particles are propagated with the noisy step model, any
particle whose step crosses a wall or leaves the floorplan gets likelihood 0,
and the set is resampled (systematic) once the effective sample size drops
below `resample_fraction * N`.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from radiomap.config import PdrConfig, PfConfig
from radiomap.exceptions import ParticleFilterCollapse
from radiomap.geometry import crosses_any_wall, inside_bounds
from radiomap.models import Floorplan, ImuSample, Pose, StepEvent, Track, TrackEntry, make_pose
from radiomap.pdr import step_headings
from radiomap.utils import normalize_angle, normalize_angles

# Initialize logger
logger = logging.getLogger(__name__)

_INIT, _PREDICT, _RESAMPLE = 0, 1, 2


@dataclass(frozen=True, slots=True)
class Particle:
    pose: Pose
    weight: float


@dataclass(frozen=True, eq=False)
class ParticleSet:
    """N weighted pose hypotheses, stored column-wise.

    `generation` counts the random operations applied so far; together with
    `rng_seed` it selects the noise stream of the next one, which keeps a run
    a pure function of its inputs and seed.
    """

    positions: np.ndarray
    headings: np.ndarray
    weights: np.ndarray
    rng_seed: int
    generation: int = 0
    ref_heading: float = 0.0

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def particles(self) -> list[Particle]:
        return [Particle(Pose(float(x), float(y), float(h)), float(w))
                for (x, y), h, w in zip(self.positions, self.headings, self.weights)]

    def rng(self, tag: int) -> np.random.Generator:
        return np.random.default_rng([self.rng_seed % 2**63, self.generation, tag])


@dataclass(frozen=True)
class PfStepReport:
    step_index: int
    effective_particles: float
    resampled: bool
    weight_sum: float


def pf_init(start: Pose, cfg: PfConfig, seed: int) -> ParticleSet:
    n = cfg.n_particles
    rng = np.random.default_rng([seed % 2**63, 0, _INIT])
    positions = np.array([start.x, start.y]) + rng.normal(0.0, cfg.step_sigma, size=(n, 2))
    heading = normalize_angle(start.heading)
    return ParticleSet(
        positions=positions,
        headings=np.full(n, heading),
        weights=np.full(n, 1.0 / n),
        rng_seed=seed,
        generation=1,
        ref_heading=heading,
    )


def pf_predict(pset: ParticleSet, step: StepEvent, heading: float, cfg: PfConfig) -> ParticleSet:
    n = len(pset)
    rng = pset.rng(_PREDICT)
    lengths = step.length + rng.normal(0.0, cfg.step_sigma, size=n)
    noise = rng.normal(0.0, cfg.heading_sigma, size=n)

    if cfg.heading_model == "random_walk":
        offsets = normalize_angles(pset.headings - pset.ref_heading)
        raw = heading + offsets + noise
    else:
        raw = heading + noise

    moves = np.column_stack((lengths * np.sin(raw), lengths * np.cos(raw)))
    return replace(
        pset,
        positions=pset.positions + moves,
        headings=normalize_angles(raw),
        generation=pset.generation + 1,
        ref_heading=normalize_angle(heading),
    )


def pf_update_weights(pset: ParticleSet, prev_positions, plan: Floorplan, step_index: int = -1) -> ParticleSet:
    prev_positions = np.asarray(prev_positions, dtype=float).reshape(-1, 2)
    blocked = crosses_any_wall(plan, prev_positions, pset.positions) | ~inside_bounds(plan, pset.positions)

    weights = np.where(blocked, 0.0, pset.weights)
    total = weights.sum()
    if total <= 0.0:
        raise ParticleFilterCollapse(step_index)

    if blocked.any():
        logger.debug(f"Step {step_index}: {int(blocked.sum())} of {len(pset)} particles hit a wall")

    return replace(pset, weights=weights / total)


def effective_particles(pset: ParticleSet) -> float:
    return float(1.0 / np.sum(np.square(pset.weights)))


def resample(pset: ParticleSet) -> ParticleSet:
    """Systematic (low-variance) resampling."""
    n = len(pset)
    rng = pset.rng(_RESAMPLE)
    pointers = (rng.random() + np.arange(n)) / n
    cumulative = np.cumsum(pset.weights)
    cumulative[-1] = 1.0
    indices = np.minimum(np.searchsorted(cumulative, pointers, side="right"), n - 1)

    return replace(
        pset,
        positions=pset.positions[indices],
        headings=pset.headings[indices],
        weights=np.full(n, 1.0 / n),
        generation=pset.generation + 1,
    )


def pf_estimate(pset: ParticleSet) -> Pose:
    w = pset.weights
    x, y = w @ pset.positions
    heading = math.atan2(float(w @ np.sin(pset.headings)), float(w @ np.cos(pset.headings)))
    return make_pose(float(x), float(y), heading)


def _filter_step(pset: ParticleSet, step: StepEvent, heading: float, plan: Floorplan, cfg: PfConfig) -> ParticleSet:
    prev = pset.positions
    pset = pf_predict(pset, step, heading, cfg)
    return pf_update_weights(pset, prev, plan, step.index)


def run_pf_pdr(
    samples: Sequence[ImuSample],
    start: Pose,
    plan: Floorplan,
    pdr_cfg: PdrConfig,
    pf_cfg: PfConfig,
    seed: int,
    on_step: Optional[Callable[[PfStepReport], None]] = None,
    reinit_on_collapse: bool = False,
) -> Track:
    start = make_pose(start.x, start.y, start.heading)
    t0 = samples[0].t if samples else 0.0
    entries = [TrackEntry(t0, start, 0)]

    pset = pf_init(start, pf_cfg, seed)
    estimate = start
    threshold = pf_cfg.resample_fraction * pf_cfg.n_particles
    resamples = 0

    for step, heading in step_headings(samples, start.heading, pdr_cfg):
        try:
            pset = _filter_step(pset, step, heading, plan, pf_cfg)
        except ParticleFilterCollapse:
            if not reinit_on_collapse:
                logger.error(f"Particle filter collapsed at step {step.index}")
                raise
            logger.warning(f"Particle filter collapsed at step {step.index}, reinitializing around "
                           f"({estimate.x:.2f}, {estimate.y:.2f})")
            fresh = pf_init(estimate, pf_cfg, seed)
            pset = replace(fresh, generation=pset.generation + 1)
            pset = _filter_step(pset, step, heading, plan, pf_cfg)

        ess = effective_particles(pset)
        resampled = ess < threshold
        if resampled:
            pset = resample(pset)
            resamples += 1

        estimate = pf_estimate(pset)
        entries.append(TrackEntry(step.t, estimate, step.index))

        if on_step is not None:
            on_step(PfStepReport(step.index, ess, resampled, float(pset.weights.sum())))

    logger.info(f"PF-PDR tracked {len(entries) - 1} steps with {resamples} resampling rounds")
    return Track(tuple(entries))
