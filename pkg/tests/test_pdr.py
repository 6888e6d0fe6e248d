import math

import numpy as np
import pytest

from conftest import G, sinusoid_imu
from radiomap.config import PdrConfig
from radiomap.models import ImuSample, Pose, StepEvent
from radiomap.pdr import (
    Attitude,
    accel_norm,
    dcm_update,
    detect_steps,
    pdr_step,
    run_pdr,
    step_headings,
    yaw_from_dcm,
)
from radiomap.simulator import gen_walk, synth_imu
from radiomap.utils import rotation_z


class TestAccelNorm:
    @pytest.mark.parametrize("accel,expected", [((0, 0, 9.81), 0.0), ((0, 0, 11.81), 2.0), ((3, 4, 0), -4.81)])
    def test_examples(self, accel, expected):
        sample = ImuSample(0.0, accel, (0.0, 0.0, 0.0))
        assert accel_norm(sample, 9.81) == pytest.approx(expected, abs=1e-12)


class TestDetectSteps:
    def test_device_at_rest(self):
        samples = [ImuSample(i / 100, (0.0, 0.0, G), (0.0, 0.0, 0.0)) for i in range(1000)]
        assert detect_steps(samples, PdrConfig()) == []

    def test_two_hertz_gait(self):
        steps = detect_steps(sinusoid_imu(3.0), PdrConfig())
        assert len(steps) == 10
        assert [s.index for s in steps] == list(range(1, 11))
        assert [s.t for s in steps] == pytest.approx([0.25 + 0.5 * k for k in range(10)], abs=1e-6)
        assert all(s.length == 0.75 for s in steps)

    def test_sub_threshold_swing_ignored(self):
        assert detect_steps(sinusoid_imu(0.5), PdrConfig()) == []

    def test_debounce(self):
        steps = detect_steps(sinusoid_imu(3.0), PdrConfig(min_step_interval=0.6))
        assert [s.t for s in steps] == pytest.approx([0.25, 1.25, 2.25, 3.25, 4.25], abs=1e-6)

    def test_fewer_than_two_samples(self):
        assert detect_steps([ImuSample(0.0, (0.0, 0.0, 15.0), (0.0, 0.0, 0.0))], PdrConfig()) == []

    @pytest.mark.parametrize("offset", [-3.0, 17.5, 1000.0])
    def test_count_unchanged_by_time_offset(self, offset):
        samples = sinusoid_imu(3.0, duration=8.0)
        shifted = [ImuSample(s.t + offset, s.accel, s.gyro) for s in samples]
        steps, moved = detect_steps(samples, PdrConfig()), detect_steps(shifted, PdrConfig())
        assert len(moved) == len(steps) == 16
        assert [s.t for s in moved] == pytest.approx([s.t + offset for s in steps], abs=1e-6)


class TestDcm:
    def test_zero_rate_keeps_attitude(self):
        att = Attitude(rotation_z(0.4))
        updated = dcm_update(att, (0.0, 0.0, 0.0), 0.01)
        np.testing.assert_allclose(updated.C, att.C, atol=1e-15)

    def test_quarter_turn(self):
        updated = dcm_update(Attitude.level(), (0.0, 0.0, math.pi / 2), 1.0)
        assert yaw_from_dcm(updated) == pytest.approx(math.pi / 2, abs=1e-9)
        np.testing.assert_allclose(updated.C, rotation_z(math.pi / 2), atol=1e-9)

    def test_inverse_rotation(self):
        omega = (0.3, -0.2, 0.9)
        att = dcm_update(Attitude.level(), omega, 0.5)
        back = dcm_update(att, tuple(-w for w in omega), 0.5)
        np.testing.assert_allclose(back.C, np.eye(3), atol=1e-9)

    def test_non_positive_interval_rejected(self):
        with pytest.raises(ValueError):
            dcm_update(Attitude.level(), (0.0, 0.0, 1.0), 0.0)

    @pytest.mark.parametrize("omega", [(0.0, 0.0, 0.7), (0.3, -0.2, 0.9), (-2.0, 1.5, 0.4)])
    def test_two_half_intervals_equal_one_full(self, omega):
        att = Attitude(rotation_z(0.4))
        twice = dcm_update(dcm_update(att, omega, 0.05), omega, 0.05)
        once = dcm_update(att, omega, 0.1)
        np.testing.assert_allclose(twice.C, once.C, atol=1e-9)

    def test_stays_orthonormal_over_many_updates(self):
        rng = np.random.default_rng(2024)
        rates = rng.normal(0.0, 2.0, size=(100_000, 3))
        att = Attitude.level()
        worst = 0.0
        for omega in rates:
            att = dcm_update(att, omega, 0.01)
            worst = max(worst, att.orthonormality_error())
        assert worst <= 1e-6


class TestYaw:
    @pytest.mark.parametrize("angle", [0.0, 0.7, -2.1, math.pi])
    def test_pure_z_rotation(self, angle):
        assert yaw_from_dcm(Attitude(rotation_z(angle))) == pytest.approx(angle, abs=1e-12)


class TestPdrStep:
    def test_axis_convention(self):
        step = StepEvent(t=0.5, index=1, length=0.75)
        north = pdr_step(Pose(0.0, 0.0), step, 0.0)
        east = pdr_step(Pose(0.0, 0.0), step, math.pi / 2)
        assert (north.x, north.y) == pytest.approx((0.0, 0.75))
        assert (east.x, east.y) == pytest.approx((0.75, 0.0))

    def test_additive(self):
        pose = Pose(0.0, 0.0)
        for k in range(1, 5):
            pose = pdr_step(pose, StepEvent(t=k * 0.5, index=k, length=0.75), 0.0)
        assert (pose.x, pose.y) == pytest.approx((0.0, 3.0))


class TestRunPdr:
    def test_no_steps_returns_start(self):
        samples = [ImuSample(i / 100, (0.0, 0.0, G), (0.0, 0.0, 0.0)) for i in range(100)]
        track = run_pdr(samples, Pose(1.0, 2.0, 0.5), PdrConfig())
        assert len(track) == 1
        assert track.end == Pose(1.0, 2.0, 0.5)

    def test_straight_walk_round_trip(self, quiet_sim):
        truth = gen_walk([(0.0, 0.0), (0.0, 15.0)], quiet_sim)
        track = run_pdr(synth_imu(truth, quiet_sim), truth[0].pose, PdrConfig())
        assert len(track) == len(truth) == 21
        assert (track.end.x, track.end.y) == pytest.approx((0.0, 15.0), abs=1e-6)

    def test_square_walk_returns_to_start(self, quiet_sim):
        square = [(0.0, 0.0), (0.0, 6.0), (6.0, 6.0), (6.0, 0.0), (0.0, 0.0)]
        truth = gen_walk(square, quiet_sim)
        track = run_pdr(synth_imu(truth, quiet_sim), truth[0].pose, PdrConfig())
        assert len(track) == len(truth)
        assert math.hypot(track.end.x, track.end.y) <= 1e-3
        assert np.max(np.hypot(*(track.positions() - truth.positions()).T)) <= 1e-3

    def test_step_headings_follow_turns(self, quiet_sim):
        truth = gen_walk([(0.0, 0.0), (0.0, 3.0), (3.0, 3.0)], quiet_sim)
        headings = [h for _, h in step_headings(synth_imu(truth, quiet_sim), truth[0].pose.heading, PdrConfig())]
        assert headings == pytest.approx([0.0] * 4 + [math.pi / 2] * 4, abs=1e-9)

    def test_off_nominal_rate_warns(self, caplog):
        track = run_pdr(sinusoid_imu(3.0, rate=25.0), Pose(0.0, 0.0, 0.0), PdrConfig())
        assert len(track) > 1
        assert "far from the nominal 100.0 Hz" in caplog.text

    def test_nominal_rate_is_quiet(self, caplog):
        run_pdr(sinusoid_imu(3.0), Pose(0.0, 0.0, 0.0), PdrConfig())
        assert "nominal" not in caplog.text
