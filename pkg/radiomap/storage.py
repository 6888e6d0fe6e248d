"""File formats: radio map / floorplan / scenario JSON and the CSV logs.

Writers emit shortest round-trip float text, sorted fingerprint keys and
`\n` line endings, so reading a file back and writing it again reproduces
it byte for byte.
"""
import json
import logging
from pathlib import Path
from typing import Iterable, Sequence, Union

import pandas as pd
from pydantic import ValidationError

from radiomap.config import Scenario
from radiomap.exceptions import InputFormatError
from radiomap.models import (
    SENSITIVITY_FLOOR_DBM,
    Fingerprint,
    Floorplan,
    ImuSample,
    Point,
    Pose,
    RadioMap,
    Track,
    TrackEntry,
    WifiScan,
)

# Initialize logger
logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SCAN_COLUMNS = ["t", "mac", "rss"]
IMU_COLUMNS = ["t", "ax", "ay", "az", "wx", "wy", "wz"]
TRACK_COLUMNS = ["t", "step", "x", "y", "heading"]
POINT_COLUMNS = ["t", "x", "y"]


def _read_json(path: PathLike):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise InputFormatError(f"Cannot read JSON file {path}: {e}") from e


def _write_text(text: str, path: PathLike) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def write_json(data, path: PathLike) -> None:
    _write_text(json.dumps(data, indent=2) + "\n", path)


def _read_frame(path: PathLike, columns: Sequence[str], dtypes: dict) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=dtypes, float_precision="round_trip", keep_default_na=False)
    except (OSError, ValueError, pd.errors.ParserError) as e:
        raise InputFormatError(f"Cannot read CSV file {path}: {e}") from e

    if list(frame.columns) != list(columns):
        raise InputFormatError(f"{path}: expected header {','.join(columns)}, got {','.join(map(str, frame.columns))}")
    return frame


def write_frame(frame: pd.DataFrame, path: PathLike) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")


def _clamp_warning(raw: dict, where: str) -> None:
    low = [mac for mac, rss in raw.items() if float(rss) < SENSITIVITY_FLOOR_DBM]
    if low:
        logger.warning(f"{where}: {len(low)} readings below {SENSITIVITY_FLOOR_DBM} dBm clamped to the floor")


def radio_map_to_dict(radio_map: RadioMap) -> dict:
    return {
        "provenance": radio_map.provenance,
        "points": [
            {
                "id": p.id,
                "x": p.x,
                "y": p.y,
                "floor": p.floor,
                "sample_count": p.sample_count,
                "fingerprint": dict(sorted(p.fingerprint.readings.items())),
            }
            for p in radio_map.points
        ],
    }


def save_radio_map(radio_map: RadioMap, path: PathLike) -> None:
    write_json(radio_map_to_dict(radio_map), path)
    logger.info(f"Wrote {radio_map.provenance} radio map with {len(radio_map)} points to {path}")


def parse_radio_map(data: dict, source: str = "radio map") -> RadioMap:
    try:
        for point in data.get("points", []):
            _clamp_warning(point.get("fingerprint", {}), f"{source} point {point.get('id')}")
        return RadioMap.model_validate(data)
    except (AttributeError, ValidationError, ValueError) as e:
        raise InputFormatError(f"Invalid {source}: {e}") from e


def load_radio_map(path: PathLike) -> RadioMap:
    return parse_radio_map(_read_json(path), str(path))


def load_floorplan(path: PathLike) -> Floorplan:
    try:
        return Floorplan.model_validate(_read_json(path))
    except ValidationError as e:
        raise InputFormatError(f"Invalid floorplan {path}: {e}") from e


def save_floorplan(plan: Floorplan, path: PathLike) -> None:
    write_json({"bounds": plan.bounds.model_dump(), "walls": [list(w) for w in plan.walls]}, path)


def load_scenario(path: PathLike) -> Scenario:
    """Scenario JSON; `floorplan` may be inline or a path relative to the scenario file."""
    data = _read_json(path)
    if isinstance(data.get("floorplan"), str):
        data["floorplan"] = _read_json(Path(path).parent / data["floorplan"])
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise InputFormatError(f"Invalid scenario {path}: {e}") from e


def load_scans(path: PathLike) -> list[WifiScan]:
    """Rows sharing a timestamp form one scan."""
    frame = _read_frame(path, SCAN_COLUMNS, {"t": float, "mac": str, "rss": float})
    scans = []
    try:
        for t, group in frame.groupby("t", sort=False):
            raw = dict(zip(group["mac"], group["rss"]))
            if len(raw) != len(group):
                raise InputFormatError(f"{path}: duplicate AP in the scan at t={t}")
            _clamp_warning(raw, f"{path} scan t={t}")
            scans.append(WifiScan(t=float(t), readings=Fingerprint(readings=raw)))
    except (ValidationError, ValueError) as e:
        raise InputFormatError(f"Invalid scan log {path}: {e}") from e

    if any(b.t <= a.t for a, b in zip(scans, scans[1:])):
        raise InputFormatError(f"{path}: scans must be in increasing time order")
    return scans


def save_scans(scans: Iterable[WifiScan], path: PathLike) -> None:
    rows = [(scan.t, mac, rss) for scan in scans for mac, rss in sorted(scan.readings.readings.items())]
    write_frame(pd.DataFrame(rows, columns=SCAN_COLUMNS), path)


def load_imu(path: PathLike) -> list[ImuSample]:
    frame = _read_frame(path, IMU_COLUMNS, dict.fromkeys(IMU_COLUMNS, float))
    times = frame["t"].to_numpy()
    if (times[1:] <= times[:-1]).any():
        raise InputFormatError(f"{path}: IMU timestamps must be strictly increasing")

    try:
        return [ImuSample(float(t), (float(ax), float(ay), float(az)), (float(wx), float(wy), float(wz)))
                for t, ax, ay, az, wx, wy, wz in frame.itertuples(index=False, name=None)]
    except ValueError as e:
        raise InputFormatError(f"Invalid IMU log {path}: {e}") from e


def save_imu(samples: Iterable[ImuSample], path: PathLike) -> None:
    rows = [(s.t, *s.accel, *s.gyro) for s in samples]
    write_frame(pd.DataFrame(rows, columns=IMU_COLUMNS), path)


def load_track(path: PathLike) -> Track:
    frame = _read_frame(path, TRACK_COLUMNS, {"t": float, "step": int, "x": float, "y": float, "heading": float})
    if frame.empty:
        raise InputFormatError(f"Track {path} has no entries")
    try:
        return Track(tuple(TrackEntry(float(t), Pose(float(x), float(y), float(h)), int(step))
                           for t, step, x, y, h in frame.itertuples(index=False, name=None)))
    except ValueError as e:
        raise InputFormatError(f"Invalid track {path}: {e}") from e


def save_track(track: Track, path: PathLike) -> None:
    rows = [(e.t, e.step_index, e.pose.x, e.pose.y, e.pose.heading) for e in track]
    write_frame(pd.DataFrame(rows, columns=TRACK_COLUMNS), path)


def load_points(path: PathLike) -> list[tuple[float, Point]]:
    frame = _read_frame(path, POINT_COLUMNS, dict.fromkeys(POINT_COLUMNS, float))
    return [(float(t), (float(x), float(y))) for t, x, y in frame.itertuples(index=False, name=None)]


def save_points(points: Iterable[tuple[float, Point]], path: PathLike) -> None:
    write_frame(pd.DataFrame([(t, x, y) for t, (x, y) in points], columns=POINT_COLUMNS), path)


def load_queries(scans_path: PathLike, points_path: PathLike) -> list[tuple[Fingerprint, Point]]:
    """Pair each query scan with the truth point carrying the same timestamp."""
    truth = dict(load_points(points_path))
    queries = []
    for scan in load_scans(scans_path):
        if scan.t not in truth:
            raise InputFormatError(f"No truth point for the query scan at t={scan.t}")
        queries.append((scan.readings, truth[scan.t]))
    return queries
