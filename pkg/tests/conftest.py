import math

import numpy as np
import pytest

from radiomap.config import ApSpec, SimConfig
from radiomap.models import Bounds, Fingerprint, Floorplan, ImuSample, RadioMap, ReferencePoint

G = 9.81


def make_map(rows, provenance="dynamic"):
    """rows: (id, x, y, {mac: rss}) or (id, x, y, {mac: rss}, floor)."""
    points = []
    for row in rows:
        rp_id, x, y, readings = row[:4]
        floor = row[4] if len(row) > 4 else 0
        points.append(ReferencePoint(id=rp_id, x=x, y=y, floor=floor, fingerprint=Fingerprint(readings=readings)))
    return RadioMap(provenance=provenance, points=points)


def sinusoid_imu(amplitude, frequency=2.0, duration=5.0, rate=100.0, g=G):
    """IMU log whose acceleration norm minus g is amplitude * sin(2 pi f t)."""
    times = np.arange(int(round(duration * rate))) / rate
    return [ImuSample(float(t), (0.0, 0.0, g + amplitude * math.sin(2.0 * math.pi * frequency * t)), (0.0, 0.0, 0.0))
            for t in times]


@pytest.fixture
def open_plan():
    return Floorplan(bounds=Bounds(xmin=-100.0, ymin=-100.0, xmax=100.0, ymax=100.0))


@pytest.fixture
def corridor_plan():
    return Floorplan(
        bounds=Bounds(xmin=0.0, ymin=0.0, xmax=20.0, ymax=3.0),
        walls=[(0.0, 0.0, 20.0, 0.0), (0.0, 3.0, 20.0, 3.0)],
    )


@pytest.fixture
def quiet_sim():
    """Noise-free simulation settings."""
    return SimConfig(accel_noise_sigma=0.0, rss_noise_sigma=0.0, seed=3)


@pytest.fixture
def aps():
    return [
        ApSpec(mac="00:00:00:00:00:01", x=0.0, y=0.0),
        ApSpec(mac="00:00:00:00:00:02", x=10.0, y=0.0),
        ApSpec(mac="00:00:00:00:00:03", x=5.0, y=8.0),
    ]


@pytest.fixture
def square_map():
    return make_map([
        (0, 0.0, 0.0, {"aa:00:00:00:00:01": -40.0, "aa:00:00:00:00:02": -70.0}),
        (1, 4.0, 0.0, {"aa:00:00:00:00:01": -55.0, "aa:00:00:00:00:02": -55.0}),
        (2, 4.0, 4.0, {"aa:00:00:00:00:01": -70.0, "aa:00:00:00:00:02": -40.0}),
        (3, 0.0, 4.0, {"aa:00:00:00:00:01": -60.0, "aa:00:00:00:00:03": -50.0}),
    ])
