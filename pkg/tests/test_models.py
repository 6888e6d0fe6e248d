import math

import numpy as np
import pytest
from pydantic import ValidationError

from radiomap.models import (
    Bounds,
    Fingerprint,
    Floorplan,
    ImuSample,
    Pose,
    RadioMap,
    ReferencePoint,
    StepEvent,
    Track,
    TrackEntry,
    WifiScan,
    canonical_mac,
    make_pose,
)
from radiomap.utils import normalize_angle, normalize_angles, parse_int_with_default, rotation_z


class TestMacAddresses:
    @pytest.mark.parametrize("raw", ["AA:BB:CC:DD:EE:FF", "aa-bb-cc-dd-ee-ff", "aabb.ccdd.eeff", " AABBCCDDEEFF "])
    def test_canonical_form(self, raw):
        assert canonical_mac(raw) == "aa:bb:cc:dd:ee:ff"

    def test_canonicalization_is_idempotent(self):
        once = canonical_mac("0A:1B:2C:3D:4E:5F")
        assert canonical_mac(once) == once

    @pytest.mark.parametrize("raw", ["", "aa:bb:cc", "gg:bb:cc:dd:ee:ff", "aa:bb:cc:dd:ee:ff:00"])
    def test_invalid_addresses_rejected(self, raw):
        with pytest.raises(ValueError):
            canonical_mac(raw)


class TestFingerprint:
    def test_accepts_bare_mapping(self):
        fp = Fingerprint.model_validate({"AA:BB:CC:DD:EE:01": -50, "aa:bb:cc:dd:ee:00": -60.5})
        assert list(fp) == ["aa:bb:cc:dd:ee:00", "aa:bb:cc:dd:ee:01"]
        assert fp["aa:bb:cc:dd:ee:01"] == -50.0
        assert len(fp) == 2

    def test_readings_below_sensitivity_floor_are_clamped(self):
        fp = Fingerprint(readings={"aa:bb:cc:dd:ee:00": -120.0})
        assert fp["aa:bb:cc:dd:ee:00"] == -100.0

    def test_duplicate_after_canonicalization_rejected(self):
        with pytest.raises(ValidationError):
            Fingerprint(readings={"AA:BB:CC:DD:EE:00": -50.0, "aa-bb-cc-dd-ee-00": -51.0})

    def test_non_finite_rss_rejected(self):
        with pytest.raises(ValidationError):
            Fingerprint(readings={"aa:bb:cc:dd:ee:00": math.nan})

    def test_is_immutable(self):
        fp = Fingerprint(readings={"aa:bb:cc:dd:ee:00": -50.0})
        with pytest.raises(ValidationError):
            fp.readings = {}

    def test_macs(self):
        fp = Fingerprint(readings={"aa:bb:cc:dd:ee:00": -50.0, "aa:bb:cc:dd:ee:01": -70.0})
        assert fp.macs() == {"aa:bb:cc:dd:ee:00", "aa:bb:cc:dd:ee:01"}
        assert "aa:bb:cc:dd:ee:01" in fp


class TestRadioMap:
    def test_ids_must_be_unique(self):
        with pytest.raises(ValidationError):
            RadioMap(provenance="dynamic", points=[ReferencePoint(id=1, x=0, y=0), ReferencePoint(id=1, x=1, y=1)])

    def test_sample_count_at_least_one(self):
        with pytest.raises(ValidationError):
            ReferencePoint(id=0, x=0.0, y=0.0, sample_count=0)

    def test_unknown_provenance_rejected(self):
        with pytest.raises(ValidationError):
            RadioMap(provenance="crowdsourced", points=[])

    def test_macs_and_lookup(self, square_map):
        assert square_map.macs() == ["aa:00:00:00:00:01", "aa:00:00:00:00:02", "aa:00:00:00:00:03"]
        assert square_map.by_id(2).position == (4.0, 4.0)
        with pytest.raises(KeyError):
            square_map.by_id(42)

    def test_scan_time_non_negative(self):
        with pytest.raises(ValidationError):
            WifiScan(t=-1.0, readings={})


class TestFloorplan:
    def test_zero_length_wall_rejected(self):
        with pytest.raises(ValidationError):
            Floorplan(bounds=Bounds(xmin=0, ymin=0, xmax=5, ymax=5), walls=[(1, 1, 1, 1)])

    def test_wall_outside_bounds_rejected(self):
        with pytest.raises(ValidationError):
            Floorplan(bounds=Bounds(xmin=0, ymin=0, xmax=5, ymax=5), walls=[(1, 1, 6, 1)])

    def test_bounds_must_be_ordered(self):
        with pytest.raises(ValidationError):
            Bounds(xmin=5, ymin=0, xmax=0, ymax=5)

    def test_wall_array_shape(self, corridor_plan):
        assert corridor_plan.wall_array().shape == (2, 4)


class TestTrack:
    def test_times_strictly_increasing(self):
        with pytest.raises(ValueError):
            Track((TrackEntry(1.0, Pose(0, 0), 0), TrackEntry(1.0, Pose(1, 0), 1)))

    def test_step_index_non_decreasing(self):
        with pytest.raises(ValueError):
            Track((TrackEntry(0.0, Pose(0, 0), 2), TrackEntry(1.0, Pose(1, 0), 1)))

    def test_accessors(self):
        track = Track((TrackEntry(0.0, Pose(0, 0), 0), TrackEntry(0.5, Pose(0, 0.75), 1)))
        assert len(track) == 2
        assert track.times().tolist() == [0.0, 0.5]
        assert track.positions().tolist() == [[0.0, 0.0], [0.0, 0.75]]
        assert track.end == Pose(0, 0.75)


class TestValueObjects:
    def test_step_length_positive(self):
        with pytest.raises(ValueError):
            StepEvent(t=1.0, index=1, length=0.0)

    def test_imu_sample_finite(self):
        with pytest.raises(ValueError):
            ImuSample(0.0, (0.0, 0.0, math.inf), (0.0, 0.0, 0.0))

    def test_make_pose_wraps_heading(self):
        assert make_pose(1, 2, 2.5 + 2 * math.pi).heading == pytest.approx(2.5)
        assert make_pose(1, 2, -math.pi / 2 - 2 * math.pi).heading == pytest.approx(-math.pi / 2)


class TestUtils:
    def test_normalize_angle_range(self):
        assert normalize_angle(-math.pi) == math.pi
        assert normalize_angle(math.pi) == math.pi
        assert normalize_angle(0.25 + 4 * math.pi) == pytest.approx(0.25)

    def test_vectorised_normalization_matches_scalar(self):
        angles = [-7.0, -math.pi, -1.0, 0.0, 2.0, math.pi, 9.5]
        expected = [normalize_angle(a) for a in angles]
        assert normalize_angles(np.array(angles)).tolist() == pytest.approx(expected, abs=1e-12)

    def test_rotation_z_is_orthonormal(self):
        R = rotation_z(0.7)
        np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-15)

    @pytest.mark.parametrize("value,expected", [("7", 7), (None, 0), ("x", 0), (3, 3)])
    def test_parse_int_with_default(self, value, expected):
        assert parse_int_with_default(value) == expected
