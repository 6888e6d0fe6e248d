"""Dynamic radio map creation.

Every Wi-Fi scan becomes a reference point at the walker's posterior
position; neighbouring points are then merged until no pair qualifies:
closer than d_min always merges, between d_min and d_max merges only when
the mean RSS difference over the shared APs is at most rss_threshold.
"""
import heapq
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from radiomap.config import MergeConfig
from radiomap.models import Fingerprint, RadioMap, ReferencePoint, Track, WifiScan

# Initialize logger
logger = logging.getLogger(__name__)


class MergeOutcome(str, Enum):
    MERGE_BY_DISTANCE = "merge_by_distance"
    MERGE_BY_SIMILARITY = "merge_by_similarity"
    KEEP_SEPARATE_FAR = "keep_separate_far"
    KEEP_SEPARATE_DISSIMILAR = "keep_separate_dissimilar"

    @property
    def merges(self) -> bool:
        return self in (MergeOutcome.MERGE_BY_DISTANCE, MergeOutcome.MERGE_BY_SIMILARITY)


@dataclass(frozen=True)
class MergeDecision:
    a_id: int
    b_id: int
    outcome: MergeOutcome
    distance: float
    rss_dif: Optional[float] = None

    def __str__(self) -> str:
        rss = "undefined" if self.rss_dif is None else f"{self.rss_dif:.3f}"
        return f"pair({self.a_id},{self.b_id}) d={self.distance:.3f} rss_dif={rss} outcome={self.outcome.value}"


def assign_reference_points(track: Track, scans: Sequence[WifiScan], floor: int = 0) -> RadioMap:
    """One raw reference point per scan, at the latest track pose not after the scan."""
    if len(track) == 0:
        raise ValueError("Cannot assign reference points to an empty track")

    times = track.times()
    points = []
    for index, scan in enumerate(scans):
        j = int(np.searchsorted(times, scan.t, side="right")) - 1
        if j < 0:
            logger.warning(f"Scan at t={scan.t} precedes the track start t={times[0]}, using the first pose")
            j = 0
        pose = track[j].pose
        points.append(ReferencePoint(id=index, x=pose.x, y=pose.y, floor=floor, sample_count=1,
                                     fingerprint=scan.readings))

    logger.debug(f"Assigned {len(points)} raw reference points")
    return RadioMap(provenance="dynamic", points=points)


def rss_dif(a: Fingerprint, b: Fingerprint) -> Optional[float]:
    """Mean absolute RSS difference over the APs detected in both fingerprints."""
    common = sorted(a.macs() & b.macs())
    if not common:
        return None
    return sum(abs(a[mac] - b[mac]) for mac in common) / len(common)


def should_merge(a: ReferencePoint, b: ReferencePoint, cfg: MergeConfig) -> MergeDecision:
    distance = math.hypot(a.x - b.x, a.y - b.y)
    ids = (min(a.id, b.id), max(a.id, b.id))

    if a.floor != b.floor or distance >= cfg.d_max:
        return MergeDecision(*ids, MergeOutcome.KEEP_SEPARATE_FAR, distance)

    if distance < cfg.d_min:
        return MergeDecision(*ids, MergeOutcome.MERGE_BY_DISTANCE, distance)

    difference = rss_dif(a.fingerprint, b.fingerprint)
    if difference is not None and difference <= cfg.rss_threshold:
        return MergeDecision(*ids, MergeOutcome.MERGE_BY_SIMILARITY, distance, difference)

    return MergeDecision(*ids, MergeOutcome.KEEP_SEPARATE_DISSIMILAR, distance, difference)


def merge_pair(a: ReferencePoint, b: ReferencePoint, cfg: MergeConfig) -> ReferencePoint:
    """Average positions and fingerprints; an AP missing on one side counts as the sensitivity floor."""
    floor_dbm = cfg.sensitivity_floor
    readings = {
        mac: (a.fingerprint.readings.get(mac, floor_dbm) + b.fingerprint.readings.get(mac, floor_dbm)) / 2.0
        for mac in sorted(a.fingerprint.macs() | b.fingerprint.macs())
    }
    return ReferencePoint(
        id=min(a.id, b.id),
        x=(a.x + b.x) / 2.0,
        y=(a.y + b.y) / 2.0,
        floor=a.floor,
        sample_count=a.sample_count + b.sample_count,
        fingerprint=Fingerprint(readings=readings),
    )


def merge_reference_points(
    points: Iterable[ReferencePoint],
    cfg: MergeConfig,
    on_decision: Optional[Callable[[MergeDecision], None]] = None,
) -> list[ReferencePoint]:
    """Greedy merge to a fixed point.

    The mergeable pair with the smallest distance goes first, ties broken by
    the smallest (id, id) pair; the merged point replaces both operands.
    """
    alive = {p.id: p for p in points}
    version = dict.fromkeys(alive, 0)
    heap: list[tuple[float, int, int, int, int]] = []

    def evaluate(a: ReferencePoint, b: ReferencePoint) -> None:
        decision = should_merge(a, b, cfg)
        if on_decision is not None:
            on_decision(decision)
        if decision.outcome.merges:
            i, j = decision.a_id, decision.b_id
            heapq.heappush(heap, (decision.distance, i, j, version[i], version[j]))

    ordered = sorted(alive.values(), key=lambda p: p.id)
    for n, a in enumerate(ordered):
        for b in ordered[n + 1:]:
            evaluate(a, b)

    merges = 0
    while heap:
        _, i, j, vi, vj = heapq.heappop(heap)
        if i not in alive or j not in alive or version[i] != vi or version[j] != vj:
            continue

        merged = merge_pair(alive.pop(i), alive.pop(j), cfg)
        del version[j]
        version[merged.id] = version.get(merged.id, 0) + 1
        merges += 1

        for other in sorted(alive.values(), key=lambda p: p.id):
            evaluate(merged, other)
        alive[merged.id] = merged

    logger.debug(f"Merge pass finished after {merges} merges, {len(alive)} points remain")
    return sorted(alive.values(), key=lambda p: p.id)


def build_dynamic_map(
    track: Track,
    scans: Sequence[WifiScan],
    cfg: MergeConfig,
    floor: int = 0,
    merge: bool = True,
    on_decision: Optional[Callable[[MergeDecision], None]] = None,
) -> RadioMap:
    raw = assign_reference_points(track, scans, floor)
    if not merge:
        return raw

    points = merge_reference_points(raw.points, cfg, on_decision)
    logger.info(f"Dynamic map: {len(raw)} scans merged into {len(points)} reference points")
    return RadioMap(provenance="dynamic", points=points)
