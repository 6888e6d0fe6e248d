"""End-to-end runs on the bundled scenarios, repeated over seeds."""
import numpy as np
import pytest

from radiomap.config import LocalizerConfig, MergeConfig, PdrConfig, PfConfig, override
from radiomap.evaluation import compare_fingerprints, k_sweep, track_errors
from radiomap.exceptions import ParticleFilterCollapse
from radiomap.mapbuilder import build_dynamic_map
from radiomap.pdr import run_pdr
from radiomap.pf import run_pf_pdr
from radiomap.simulator import bundled_scenario, gen_static_map, gen_walk, scans_along, survey_points, synth_imu, synth_rss

SEEDS = range(20)


def office_maps(seed):
    """Dynamic map built from the PF-PDR track of the office walk, the static grid and the test queries."""
    office = bundled_scenario("office_corridor")
    sim = override(office.sim, seed=seed)
    plan, aps = office.floorplan, office.aps

    truth = gen_walk(office.waypoints, sim)
    track = run_pf_pdr(synth_imu(truth, sim), truth[0].pose, plan, PdrConfig(), PfConfig(n_particles=300), seed,
                       reinit_on_collapse=True)
    dynamic = build_dynamic_map(track, scans_along(truth, aps, plan, sim), MergeConfig())
    static = gen_static_map(plan, aps, office.static_map_spacing, sim)
    queries = [(synth_rss(point, aps, plan, sim, t=float(i), stream=1).readings, point)
               for i, point in enumerate(office.test_points)]
    return dynamic, static, queries


@pytest.fixture(scope="module")
def office_sweeps():
    dynamic_rows, static_rows = [], []
    for seed in SEEDS:
        dynamic, static, queries = office_maps(seed)
        dynamic_rows.append([r.median for r in k_sweep(dynamic, queries, ["knn"], range(1, 7), LocalizerConfig())])
        static_rows.append([r.median for r in k_sweep(static, queries, ["knn"], range(1, 7), LocalizerConfig())])
    return np.mean(dynamic_rows, axis=0), np.mean(static_rows, axis=0)


class TestGyroBiasCorridor:
    def test_particle_filter_beats_dead_reckoning(self):
        corridor = bundled_scenario("corridor")
        pdr_cfg = PdrConfig()
        pf_cfg = PfConfig(n_particles=500, heading_model="random_walk")
        wins = 0

        for seed in SEEDS:
            sim = corridor.sim.model_copy(update={"seed": seed, "gyro_bias": 0.01})
            truth = gen_walk(corridor.waypoints, sim)
            imu = synth_imu(truth, sim)
            start = truth[0].pose

            pdr_error = np.median(track_errors(run_pdr(imu, start, pdr_cfg), truth))
            try:
                pf_track = run_pf_pdr(imu, start, corridor.floorplan, pdr_cfg, pf_cfg, seed, reinit_on_collapse=True)
            except ParticleFilterCollapse:
                continue
            if np.median(track_errors(pf_track, truth)) < pdr_error:
                wins += 1

        assert wins >= 18


class TestOfficeKSensitivity:
    def test_sparse_dynamic_map_size(self):
        dynamic, static, _ = office_maps(0)
        assert 60 <= len(dynamic) <= 70
        assert len(dynamic) < len(static) / 3

    def test_large_k_hurts_dynamic_map(self, office_sweeps):
        dynamic, _ = office_sweeps
        assert dynamic[5] > dynamic[1]

    def test_static_map_less_sensitive_to_k(self, office_sweeps):
        dynamic, static = office_sweeps
        assert static.max() - static.min() < dynamic.max() - dynamic.min()


class TestStaticVersusDynamicRss:
    def test_pooled_difference_within_noise(self):
        corridor = bundled_scenario("corridor")
        plan, aps = corridor.floorplan, corridor.aps
        means = []

        for seed in SEEDS:
            sim = corridor.sim.model_copy(update={"seed": seed, "rss_noise_sigma": 2.0})
            truth = gen_walk(corridor.waypoints, sim)
            dynamic = build_dynamic_map(truth, scans_along(truth, aps, plan, sim), MergeConfig())
            positions = [p.position for p in dynamic.points]
            static_ref = list(zip(positions, survey_points(positions, aps, plan, sim)))
            means.append(compare_fingerprints(dynamic, static_ref).mean)

        assert np.mean(means) <= 3.0
