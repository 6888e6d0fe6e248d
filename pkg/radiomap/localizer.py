"""Online-phase fingerprint localization: NN, KNN, WKNN and Bayes estimators."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from radiomap.config import LocalizerConfig
from radiomap.exceptions import InsufficientReferencePoints, NoReferencePoints
from radiomap.models import Fingerprint, Point, RadioMap

# Initialize logger
logger = logging.getLogger(__name__)

WEIGHT_EPSILON = 1e-6


@dataclass(frozen=True, slots=True)
class RankedPoint:
    rp_id: int
    distance: float
    weight: float


@dataclass(frozen=True)
class PositionEstimate:
    position: Point
    floor: int
    contributors: list[RankedPoint]


def euclidean_distance(a: Fingerprint, b: Fingerprint, fill: float = -100.0) -> float:
    """Euclidean distance in dB over the union of APs, missing readings set to `fill`."""
    macs = sorted(a.macs() | b.macs())
    if not macs:
        return 0.0
    va = np.array([a.readings.get(mac, fill) for mac in macs])
    vb = np.array([b.readings.get(mac, fill) for mac in macs])
    return float(np.sqrt(np.sum((va - vb) ** 2)))


@dataclass(frozen=True, eq=False)
class _MapMatrix:
    ids: np.ndarray
    positions: np.ndarray
    floors: np.ndarray
    rss: np.ndarray
    detected: np.ndarray
    query: np.ndarray
    query_detected: np.ndarray


def _matrix(query: Fingerprint, radio_map: RadioMap, fill: float) -> _MapMatrix:
    if len(radio_map) == 0:
        raise NoReferencePoints()

    macs = sorted(set(radio_map.macs()) | query.macs())
    column = {mac: i for i, mac in enumerate(macs)}

    rss = np.full((len(radio_map), len(macs)), fill, dtype=float)
    detected = np.zeros_like(rss, dtype=bool)
    for row, point in enumerate(radio_map.points):
        for mac, value in point.fingerprint.readings.items():
            rss[row, column[mac]] = value
            detected[row, column[mac]] = True

    q = np.full(len(macs), fill, dtype=float)
    q_detected = np.zeros(len(macs), dtype=bool)
    for mac, value in query.readings.items():
        q[column[mac]] = value
        q_detected[column[mac]] = True

    return _MapMatrix(
        ids=np.array([p.id for p in radio_map.points]),
        positions=np.array([p.position for p in radio_map.points], dtype=float),
        floors=np.array([p.floor for p in radio_map.points]),
        rss=rss,
        detected=detected,
        query=q,
        query_detected=q_detected,
    )


def _ranking(m: _MapMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Row order sorted by (distance, rp_id) and the distance of every row."""
    distances = np.sqrt(np.sum((m.rss - m.query) ** 2, axis=1))
    order = np.lexsort((m.ids, distances))
    return order, distances


def rank_reference_points(query: Fingerprint, radio_map: RadioMap, cfg: LocalizerConfig) -> list[RankedPoint]:
    m = _matrix(query, radio_map, cfg.missing_fill)
    order, distances = _ranking(m)
    return [RankedPoint(int(m.ids[i]), float(distances[i]), 1.0 / (float(distances[i]) + WEIGHT_EPSILON))
            for i in order]


def _weighted_estimate(m: _MapMatrix, order: np.ndarray, distances: np.ndarray, k: int,
                       weighted: bool) -> PositionEstimate:
    if k > len(order):
        raise InsufficientReferencePoints(k, len(order))

    top = order[:k]
    weights = 1.0 / (distances[top] + WEIGHT_EPSILON)
    if k == 1:
        position = m.positions[top[0]]
    else:
        factors = weights if weighted else np.ones(k)
        position = factors @ m.positions[top] / factors.sum()

    contributors = [RankedPoint(int(m.ids[i]), float(distances[i]), float(w)) for i, w in zip(top, weights)]
    return PositionEstimate((float(position[0]), float(position[1])), int(m.floors[top[0]]), contributors)


def estimate_nn(query: Fingerprint, radio_map: RadioMap, cfg: LocalizerConfig) -> PositionEstimate:
    m = _matrix(query, radio_map, cfg.missing_fill)
    order, distances = _ranking(m)
    best = order[0]
    x, y = m.positions[best]
    ranked = RankedPoint(int(m.ids[best]), float(distances[best]), 1.0 / (float(distances[best]) + WEIGHT_EPSILON))
    return PositionEstimate((float(x), float(y)), int(m.floors[best]), [ranked])


def estimate_knn(query: Fingerprint, radio_map: RadioMap, cfg: LocalizerConfig) -> PositionEstimate:
    m = _matrix(query, radio_map, cfg.missing_fill)
    order, distances = _ranking(m)
    return _weighted_estimate(m, order, distances, cfg.k, weighted=False)


def estimate_wknn(query: Fingerprint, radio_map: RadioMap, cfg: LocalizerConfig) -> PositionEstimate:
    m = _matrix(query, radio_map, cfg.missing_fill)
    order, distances = _ranking(m)
    return _weighted_estimate(m, order, distances, cfg.k, weighted=True)


def _log_posterior(m: _MapMatrix, sigma: float) -> np.ndarray:
    # Each RP is scored over the APs seen by it or by the query.
    used = m.detected | m.query_detected
    log_density = norm.logpdf(m.query, loc=m.rss, scale=sigma)
    log_likelihood = np.where(used, log_density, 0.0).sum(axis=1)
    log_joint = log_likelihood - np.log(len(m.ids))
    return log_joint - logsumexp(log_joint)


def bayes_posterior(query: Fingerprint, radio_map: RadioMap, cfg: LocalizerConfig) -> list[tuple[int, float]]:
    m = _matrix(query, radio_map, cfg.missing_fill)
    probabilities = np.exp(_log_posterior(m, cfg.bayes_sigma))
    probabilities /= probabilities.sum()
    order = np.argsort(m.ids, kind="stable")
    return [(int(m.ids[i]), float(probabilities[i])) for i in order]


def estimate_bayes(query: Fingerprint, radio_map: RadioMap, cfg: LocalizerConfig) -> PositionEstimate:
    m = _matrix(query, radio_map, cfg.missing_fill)
    log_post = _log_posterior(m, cfg.bayes_sigma)
    order = np.argsort(m.ids, kind="stable")
    best = order[int(np.argmax(log_post[order]))]

    distance = float(np.sqrt(np.sum((m.rss[best] - m.query) ** 2)))
    x, y = m.positions[best]
    ranked = RankedPoint(int(m.ids[best]), distance, float(np.exp(log_post[best])))
    return PositionEstimate((float(x), float(y)), int(m.floors[best]), [ranked])


ESTIMATORS = {
    "nn": estimate_nn,
    "knn": estimate_knn,
    "wknn": estimate_wknn,
    "bayes": estimate_bayes,
}


def estimate(query: Fingerprint, radio_map: RadioMap, cfg: LocalizerConfig) -> PositionEstimate:
    return ESTIMATORS[cfg.algorithm](query, radio_map, cfg)


class RankedQuery:
    """One query ranked once against a map, re-usable for every K."""

    def __init__(self, query: Fingerprint, radio_map: RadioMap, cfg: LocalizerConfig):
        self._m = _matrix(query, radio_map, cfg.missing_fill)
        self._order, self._distances = _ranking(self._m)

    def estimate(self, algorithm: str, k: Optional[int] = None) -> PositionEstimate:
        k = 1 if algorithm == "nn" else k
        return _weighted_estimate(self._m, self._order, self._distances, k, weighted=(algorithm == "wknn"))
