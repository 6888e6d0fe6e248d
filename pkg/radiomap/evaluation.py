"""Evaluation metrics: track errors, error statistics, CDFs, K sweeps and map comparisons.

Percentiles use linear interpolation between closest ranks.
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from radiomap.config import LocalizerConfig, override
from radiomap.exceptions import EmptySample
from radiomap.localizer import RankedQuery, estimate
from radiomap.models import Fingerprint, Point, RadioMap, Track

# Initialize logger
logger = logging.getLogger(__name__)

Query = tuple[Fingerprint, Point]


class ErrorStats(BaseModel):
    model_config = ConfigDict(frozen=True)

    minimum: float = Field(..., description="Smallest error")
    median: float = Field(..., description="50th percentile, linear interpolation")
    mean: float = Field(..., description="Arithmetic mean")
    p90: float = Field(..., description="90th percentile, linear interpolation")
    maximum: float = Field(..., description="Largest error")
    count: int = Field(..., ge=1)


@dataclass(frozen=True)
class CdfSeries:
    points: list[tuple[float, float]]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class KSweepRow:
    algo: str
    k: int
    median: float


class MapSummary(BaseModel):
    provenance: str
    points: int
    floors: list[int]
    access_points: int
    aps_per_point_min: int
    aps_per_point_max: int
    aps_per_point_mean: float
    total_samples: int


def track_errors(estimated: Track, truth: Track) -> list[float]:
    """Distance of every estimated entry to the truth interpolated at the same time."""
    if len(estimated) == 0 or len(truth) == 0:
        raise EmptySample("track entries")

    times = truth.times()
    positions = truth.positions()
    est_times = estimated.times()
    est_positions = estimated.positions()

    clamped = int(np.sum((est_times < times[0]) | (est_times > times[-1])))
    if clamped:
        logger.warning(f"{clamped} estimated entries lie outside the truth span and were clamped to its ends")

    truth_x = np.interp(est_times, times, positions[:, 0])
    truth_y = np.interp(est_times, times, positions[:, 1])
    return np.hypot(est_positions[:, 0] - truth_x, est_positions[:, 1] - truth_y).tolist()


def error_stats(errors: Sequence[float]) -> ErrorStats:
    values = np.asarray(errors, dtype=float)
    if values.size == 0:
        raise EmptySample()

    return ErrorStats(
        minimum=float(values.min()),
        median=float(np.percentile(values, 50, method="linear")),
        mean=float(values.mean()),
        p90=float(np.percentile(values, 90, method="linear")),
        maximum=float(values.max()),
        count=int(values.size),
    )


def error_cdf(errors: Sequence[float]) -> CdfSeries:
    values = np.sort(np.asarray(errors, dtype=float))
    if values.size == 0:
        raise EmptySample()

    unique, counts = np.unique(values, return_counts=True)
    fractions = np.cumsum(counts) / values.size
    fractions[-1] = 1.0
    return CdfSeries([(float(e), float(f)) for e, f in zip(unique, fractions)])


def localization_errors(radio_map: RadioMap, queries: Sequence[Query], cfg: LocalizerConfig) -> list[float]:
    errors = []
    for fingerprint, (x, y) in queries:
        ex, ey = estimate(fingerprint, radio_map, cfg).position
        errors.append(math.hypot(ex - x, ey - y))
    return errors


def localization_report(radio_map: RadioMap, queries: Sequence[Query], cfg: LocalizerConfig,
                        algorithms: Iterable[str] = ("nn", "knn", "wknn", "bayes")) -> dict[str, list[float]]:
    """Per-algorithm localization errors over one query set."""
    report = {}
    for algo in algorithms:
        report[algo] = localization_errors(radio_map, queries, override(cfg, algorithm=algo))
        logger.info(f"{algo}: median error {np.median(report[algo]):.2f} m over {len(queries)} queries")
    return report


def k_sweep(radio_map: RadioMap, queries: Sequence[Query], algos: Iterable[str], k_range: Iterable[int],
            cfg: LocalizerConfig = LocalizerConfig()) -> list[KSweepRow]:
    """Median localization error of every (algorithm, K)."""
    if not queries:
        raise EmptySample("queries")

    ranked = [(RankedQuery(fingerprint, radio_map, cfg), truth) for fingerprint, truth in queries]
    rows = []
    for algo in algos:
        for k in k_range:
            errors = []
            for query, (x, y) in ranked:
                ex, ey = query.estimate(algo, k).position
                errors.append(math.hypot(ex - x, ey - y))
            rows.append(KSweepRow(algo, k, float(np.median(errors))))
    return rows


def compare_fingerprints(dynamic: RadioMap, static_ref: Sequence[tuple[Point, Fingerprint]]) -> ErrorStats:
    """Pooled |RSS_static - RSS_dynamic| over APs seen on both sides, each static
    reference paired with its nearest dynamic reference point."""
    if len(dynamic) == 0:
        raise EmptySample("dynamic reference points")

    positions = np.array([p.position for p in dynamic.points], dtype=float)
    ids = np.array([p.id for p in dynamic.points])
    differences = []

    for (x, y), fingerprint in static_ref:
        distances = np.hypot(positions[:, 0] - x, positions[:, 1] - y)
        nearest = dynamic.points[int(np.lexsort((ids, distances))[0])]
        for mac in sorted(fingerprint.macs() & nearest.fingerprint.macs()):
            differences.append(abs(fingerprint[mac] - nearest.fingerprint[mac]))

    if not differences:
        raise EmptySample("RSS differences")
    return error_stats(differences)


def summarize_map(radio_map: RadioMap) -> MapSummary:
    per_point = [len(p.fingerprint) for p in radio_map.points] or [0]
    return MapSummary(
        provenance=radio_map.provenance,
        points=len(radio_map),
        floors=sorted({p.floor for p in radio_map.points}),
        access_points=len(radio_map.macs()),
        aps_per_point_min=min(per_point),
        aps_per_point_max=max(per_point),
        aps_per_point_mean=float(np.mean(per_point)),
        total_samples=sum(p.sample_count for p in radio_map.points),
    )
