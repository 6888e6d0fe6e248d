from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Annotated, Iterator, Literal

import numpy as np
from pydantic import AfterValidator, BaseModel, ConfigDict, Field, FiniteFloat, field_validator, model_validator

from radiomap.utils import normalize_angle

SENSITIVITY_FLOOR_DBM = -100.0

_MAC_SEPARATORS = re.compile(r"[:\-.\s]")
_HEX12 = re.compile(r"^[0-9a-f]{12}$")


def canonical_mac(value: str) -> str:
    """Canonical `aa:bb:cc:dd:ee:ff` form of a MAC address."""
    digits = _MAC_SEPARATORS.sub("", str(value).strip().lower())
    if not _HEX12.match(digits):
        raise ValueError(f"Invalid MAC address: {value!r}")
    return ":".join(digits[i:i + 2] for i in range(0, 12, 2))


MacId = Annotated[str, AfterValidator(canonical_mac)]

Point = tuple[float, float]


class Fingerprint(BaseModel):
    """Per-AP RSS readings (dBm) observed at one location."""

    model_config = ConfigDict(frozen=True)

    readings: dict[str, FiniteFloat] = Field(default_factory=dict, description="MAC address -> RSS in dBm")

    @model_validator(mode="before")
    @classmethod
    def canonicalize(cls, data):
        if isinstance(data, dict) and "readings" not in data:
            data = {"readings": data}
        if isinstance(data, dict):
            readings = {}
            for mac, rss in (data.get("readings") or {}).items():
                key = canonical_mac(mac)
                if key in readings:
                    raise ValueError(f"Duplicate MAC address {key}")
                readings[key] = max(float(rss), SENSITIVITY_FLOOR_DBM)
            data = {**data, "readings": dict(sorted(readings.items()))}
        return data

    def __len__(self) -> int:
        return len(self.readings)

    def __iter__(self) -> Iterator[str]:
        return iter(self.readings)

    def __contains__(self, mac: str) -> bool:
        return mac in self.readings

    def __getitem__(self, mac: str) -> float:
        return self.readings[mac]

    def macs(self) -> set[str]:
        return set(self.readings)


class ReferencePoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int = Field(..., description="Reference point id, unique within a radio map")
    x: FiniteFloat = Field(..., description="x_RP in metres")
    y: FiniteFloat = Field(..., description="y_RP in metres")
    floor: int = Field(0, description="z_RP floor index")
    sample_count: int = Field(1, ge=1, description="Number of scans merged into this point")
    fingerprint: Fingerprint = Field(default_factory=Fingerprint)

    @property
    def position(self) -> Point:
        return (self.x, self.y)


class RadioMap(BaseModel):
    model_config = ConfigDict(frozen=True)

    provenance: Literal["static", "dynamic"] = Field(..., description="How the map was calibrated")
    points: list[ReferencePoint] = Field(default_factory=list)

    @field_validator("points")
    @classmethod
    def unique_ids(cls, points):
        ids = [p.id for p in points]
        if len(ids) != len(set(ids)):
            raise ValueError("Reference point ids must be unique")
        return points

    def __len__(self) -> int:
        return len(self.points)

    def by_id(self, rp_id: int) -> ReferencePoint:
        for point in self.points:
            if point.id == rp_id:
                return point
        raise KeyError(rp_id)

    def macs(self) -> list[str]:
        return sorted({mac for point in self.points for mac in point.fingerprint})


class WifiScan(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: FiniteFloat = Field(..., ge=0, description="Session clock in seconds")
    readings: Fingerprint = Field(default_factory=Fingerprint)


class Bounds(BaseModel):
    model_config = ConfigDict(frozen=True)

    xmin: FiniteFloat
    ymin: FiniteFloat
    xmax: FiniteFloat
    ymax: FiniteFloat

    @model_validator(mode="after")
    def ordered(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError("Bounds must satisfy xmin < xmax and ymin < ymax")
        return self

    def contains(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin


class Floorplan(BaseModel):
    model_config = ConfigDict(frozen=True)

    bounds: Bounds
    walls: list[tuple[FiniteFloat, FiniteFloat, FiniteFloat, FiniteFloat]] = Field(
        default_factory=list, description="Wall segments as (x1, y1, x2, y2) in metres"
    )

    @model_validator(mode="after")
    def walls_inside_bounds(self):
        for x1, y1, x2, y2 in self.walls:
            if x1 == x2 and y1 == y2:
                raise ValueError(f"Zero-length wall at ({x1}, {y1})")
            if not (self.bounds.contains(x1, y1) and self.bounds.contains(x2, y2)):
                raise ValueError(f"Wall ({x1}, {y1})-({x2}, {y2}) leaves the floorplan bounds")
        return self

    def wall_array(self) -> np.ndarray:
        return np.asarray(self.walls, dtype=float).reshape(-1, 4)


@dataclass(frozen=True, slots=True)
class Pose:
    x: float
    y: float
    heading: float = 0.0

    @property
    def position(self) -> Point:
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class TrackEntry:
    t: float
    pose: Pose
    step_index: int


@dataclass(frozen=True)
class Track:
    entries: tuple[TrackEntry, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        for prev, cur in zip(self.entries, self.entries[1:]):
            if not cur.t > prev.t:
                raise ValueError(f"Track timestamps must be strictly increasing ({prev.t} -> {cur.t})")
            if cur.step_index < prev.step_index:
                raise ValueError("Track step indices must be non-decreasing")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[TrackEntry]:
        return iter(self.entries)

    def __getitem__(self, index) -> TrackEntry:
        return self.entries[index]

    def times(self) -> np.ndarray:
        return np.array([e.t for e in self.entries], dtype=float)

    def positions(self) -> np.ndarray:
        return np.array([(e.pose.x, e.pose.y) for e in self.entries], dtype=float).reshape(-1, 2)

    @property
    def end(self) -> Pose:
        return self.entries[-1].pose


@dataclass(frozen=True, slots=True)
class ImuSample:
    t: float
    accel: tuple[float, float, float]
    gyro: tuple[float, float, float]

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.t, *self.accel, *self.gyro)):
            raise ValueError(f"Non-finite IMU sample at t={self.t}")


@dataclass(frozen=True, slots=True)
class StepEvent:
    t: float
    index: int
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("Step length must be positive")


def make_pose(x: float, y: float, heading: float) -> Pose:
    return Pose(float(x), float(y), normalize_angle(float(heading)))
