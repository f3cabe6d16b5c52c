import math

import numpy as np
import pytest

from rieszlab import (
    CoincidentPointsError,
    ConfigPoint,
    Configuration,
    EnergyError,
    FractalAddress,
    Segment,
    covering_radius,
    energy_gradient,
    normalized_energy,
    point_energy,
    riesz_energy,
)


def line_config(ts, s, segment=None):
    """Points on a 1-d segment at the given parameters."""
    seg = segment or Segment(a=np.array([0.0]), b=np.array([1.0]))
    pts = [ConfigPoint(seg.point(t), "whole", float(t)) for t in ts]
    return Configuration(pts, s=s, set_spec=seg)


def free_config(coords, s):
    """Points given directly in the ambient space (intrinsic t is a dummy)."""
    pts = [ConfigPoint(np.asarray(c, float), "whole", 0.0) for c in coords]
    return Configuration(pts, s=s)


def fd_segment_gradient(ts, j, s, h=1e-6):
    """Central finite differences on the j-th segment parameter."""

    def energy(tvals):
        e = 0.0
        for a in range(len(tvals)):
            for b in range(len(tvals)):
                if a != b:
                    e += abs(tvals[a] - tvals[b]) ** (-s)
        return e

    up = list(ts)
    dn = list(ts)
    up[j] += h
    dn[j] -= h
    return (energy(up) - energy(dn)) / (2 * h)


class TestRieszEnergy:
    def test_two_points_s2(self):
        rep = riesz_energy(free_config([[0.0, 0.0], [1.0, 0.0]], s=2))
        assert rep.total == pytest.approx(2.0, rel=1e-15)
        assert rep.min_dist == 1.0

    def test_three_points_s1(self):
        rep = riesz_energy(line_config([0.0, 0.5, 1.0], s=1))
        assert rep.total == pytest.approx(10.0, rel=1e-12)

    def test_three_points_s2(self):
        rep = riesz_energy(line_config([0.0, 0.5, 1.0], s=2))
        assert rep.total == pytest.approx(18.0, rel=1e-12)

    def test_small_configs_have_zero_energy(self):
        assert riesz_energy(free_config([[0.0, 0.0]], s=2)).total == 0.0
        assert riesz_energy(Configuration([], s=2)).total == 0.0

    def test_coincident_points_raise(self):
        with pytest.raises(CoincidentPointsError):
            riesz_energy(free_config([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]], s=2))

    def test_tight_but_distinct_pair_is_fine(self):
        rep = riesz_energy(free_config([[0.0], [1e-9], [1.0]], s=1))
        assert math.isfinite(rep.total)

    def test_per_point_sums_to_total(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            n = int(rng.integers(2, 9))
            coords = rng.normal(size=(n, 3))
            rep = riesz_energy(free_config(coords, s=1.5))
            assert rep.total == pytest.approx(rep.per_point.sum(), rel=1e-12)

    def test_translation_invariance(self):
        rng = np.random.default_rng(5)
        coords = rng.normal(size=(6, 2))
        base = riesz_energy(free_config(coords, s=2)).total
        for _ in range(20):
            v = rng.normal(size=2) * 10
            shifted = riesz_energy(free_config(coords + v, s=2)).total
            assert shifted == pytest.approx(base, rel=1e-9)

    def test_scaling_covariance(self):
        rng = np.random.default_rng(6)
        coords = rng.normal(size=(5, 3))
        s = 2.5
        base = riesz_energy(free_config(coords, s=s)).total
        for lam in (0.1, 0.5, 2.0, 13.7):
            scaled = riesz_energy(free_config(coords * lam, s=s)).total
            assert scaled == pytest.approx(base * lam ** (-s), rel=1e-9)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(8)
        coords = rng.normal(size=(7, 2))
        perm = rng.permutation(7)
        rep = riesz_energy(free_config(coords, s=3))
        rep_p = riesz_energy(free_config(coords[perm], s=3))
        assert rep_p.total == pytest.approx(rep.total, rel=1e-12)
        assert np.allclose(rep_p.per_point, rep.per_point[perm], rtol=1e-12)


class TestPointEnergy:
    def test_middle_point(self):
        cfg = line_config([0.0, 0.5, 1.0], s=1)
        assert point_energy(cfg, 1) == pytest.approx(4.0, rel=1e-14)

    def test_endpoint(self):
        cfg = line_config([0.0, 0.5, 1.0], s=1)
        assert point_energy(cfg, 0) == pytest.approx(3.0, rel=1e-14)

    def test_pair(self):
        cfg = free_config([[0.0, 0.0], [1.0, 0.0]], s=2)
        assert point_energy(cfg, 0) == 1.0
        assert point_energy(cfg, 1) == 1.0

    def test_sum_matches_total(self):
        cfg = line_config([0.0, 0.2, 0.7, 1.0], s=1.5)
        rep = riesz_energy(cfg)
        total = sum(point_energy(cfg, j) for j in range(4))
        assert total == pytest.approx(rep.total, rel=1e-12)

    def test_bad_index(self):
        with pytest.raises(EnergyError):
            point_energy(line_config([0.0, 1.0], s=1), 5)


class TestNormalizedEnergy:
    def test_examples(self):
        assert normalized_energy(10.0, 3, 1, 1) == pytest.approx(10 / 9, rel=1e-15)
        assert normalized_energy(2.0, 2, 2, 1) == 0.25
        assert normalized_energy(0.0, 2, 2, 1) == 0.0

    def test_invalid_inputs(self):
        with pytest.raises(EnergyError):
            normalized_energy(1.0, 0, 2, 1)
        with pytest.raises(EnergyError):
            normalized_energy(1.0, 2, 2, 0.0)


class TestCoveringRadius:
    def test_single_candidate(self):
        ref = np.array([[0.0], [0.25], [0.5], [0.75], [1.0]])
        assert covering_radius(np.array([[0.5]]), ref) == 0.5

    def test_two_candidates(self):
        ref = np.array([[0.0], [0.5], [1.0]])
        assert covering_radius(np.array([[0.0], [1.0]]), ref) == 0.5

    def test_identity(self):
        ref = np.array([[0.0, 1.0], [2.0, 3.0]])
        assert covering_radius(ref, ref) == 0.0

    def test_monotone_under_candidate_growth(self):
        rng = np.random.default_rng(9)
        ref = rng.random(size=(50, 2))
        cand = rng.random(size=(1, 2))
        prev = covering_radius(cand, ref)
        for _ in range(10):
            cand = np.vstack([cand, rng.random(size=(1, 2))])
            cur = covering_radius(cand, ref)
            assert cur <= prev + 1e-15
            prev = cur

    def test_empty_inputs_rejected(self):
        with pytest.raises(EnergyError):
            covering_radius(np.zeros((0, 2)), np.zeros((1, 2)))
        with pytest.raises(EnergyError):
            covering_radius(np.zeros((1, 2)), np.zeros((0, 2)))


class TestSegmentGradient:
    def test_pair_gradient_sign(self):
        cfg = line_config([0.0, 1.0], s=1)
        grads = energy_gradient(cfg)
        # At t=0 increasing t moves toward the other point: energy grows.
        assert grads[0] == pytest.approx(2.0, rel=1e-12)
        assert grads[1] == pytest.approx(-2.0, rel=1e-12)

    def test_symmetric_middle_point(self):
        grads = energy_gradient(line_config([0.0, 0.5, 1.0], s=2))
        assert grads[1] == pytest.approx(0.0, abs=1e-12)

    def test_asymmetric_middle_against_frozen_fd(self):
        # Frozen value from the central finite-difference oracle (h=1e-6).
        cfg = line_config([0.0, 0.4, 1.0], s=2)
        grads = energy_gradient(cfg)
        fd = fd_segment_gradient([0.0, 0.4, 1.0], 1, s=2)
        assert fd == pytest.approx(-43.98148148077041, rel=1e-9)
        assert grads[1] == pytest.approx(fd, rel=1e-5)

    def test_matches_fd_on_random_configs(self):
        rng = np.random.default_rng(12)
        seg = Segment(a=np.array([1.0, 2.0]), b=np.array([4.0, 6.0]))
        for _ in range(20):
            ts = np.sort(rng.random(4))
            while np.min(np.diff(ts)) < 0.05:
                ts = np.sort(rng.random(4))
            cfg = line_config(ts, s=1.5, segment=seg)
            grads = energy_gradient(cfg)
            for j in range(4):
                fd = fd_segment_gradient(ts * seg.length, j, s=1.5) * seg.length
                assert grads[j] == pytest.approx(fd, rel=1e-5)

    def test_fractal_points_excluded(self, four_map_fractal):
        from rieszlab import realize_address

        pts = [
            ConfigPoint(realize_address(four_map_fractal, FractalAddress((1,))), "whole",
                        FractalAddress((1,))),
            ConfigPoint(realize_address(four_map_fractal, FractalAddress((2,))), "whole",
                        FractalAddress((2,))),
        ]
        cfg = Configuration(pts, s=2, set_spec=four_map_fractal)
        assert energy_gradient(cfg) == {}


class TestConfigurationSerialization:
    def test_round_trip_on_union(self, example_union):
        from rieszlab import realize_address

        pts = [
            ConfigPoint(realize_address(example_union.A1, FractalAddress((2, 3))), "A1",
                        FractalAddress((2, 3))),
            ConfigPoint(example_union.A2.point(0.25), "A2", 0.25),
        ]
        cfg = Configuration(pts, s=3.0, set_spec=example_union)
        data = cfg.to_dict()
        rebuilt = Configuration.from_dict(data, example_union)
        assert rebuilt.N == 2
        assert np.allclose(rebuilt.coords, cfg.coords)
        assert rebuilt.points[0].intrinsic.word == (2, 3)
        assert rebuilt.points[1].intrinsic == 0.25

    def test_intrinsic_mismatch_rejected(self, example_union):
        data = {
            "s": 3.0,
            "points": [
                {"coordinates": [0.9, 0.9], "host": "A1", "intrinsic": {"word": [1]}},
                {"coordinates": [3.5, 0.0], "host": "A2", "intrinsic": {"t": 0.5}},
            ],
        }
        with pytest.raises(EnergyError, match="intrinsic"):
            Configuration.from_dict(data, example_union)

    def test_segment_parameter_out_of_range_rejected(self, example_union):
        data = {
            "s": 3.0,
            "points": [
                {"coordinates": [5.0, 0.0], "host": "A2", "intrinsic": {"t": 2.0}},
            ],
        }
        with pytest.raises(EnergyError):
            Configuration.from_dict(data, example_union)

    def test_bad_host_rejected(self):
        with pytest.raises(EnergyError, match="host"):
            ConfigPoint(np.zeros(2), "B7", 0.5)


class TestExchangeScenario:
    """Crowding one component of a separated union is self-defeating: the
    potential at the farthest empty spot drops below the potential at the
    most crowded point, so relocating that point lowers the energy."""

    def test_moving_a_crowded_point_to_the_empty_component_helps(self, example_union):
        import numpy as np

        from rieszlab import all_addresses, covering_radius, point_energy

        u = example_union
        s, n = 3.0, 12
        ts = np.linspace(0.0, 1.0, n)
        cfg = Configuration(
            [ConfigPoint(u.A2.point(t), "A2", float(t)) for t in ts],
            s=s, set_spec=u,
        )
        rep = riesz_energy(cfg, s)

        # Covering-radius witness: the depth-3 pool point farthest from the
        # configuration realizes the max-min distance.
        pool = u.A1.all_points(3)
        words = list(all_addresses(u.A1, 3))
        dist = np.sqrt(((pool[:, None, :] - cfg.coords[None, :, :]) ** 2).sum(axis=-1))
        far = int(np.argmin(dist.min(axis=1) * -1.0))
        radius = covering_radius(cfg.coords, pool)
        assert dist[far].min() == pytest.approx(radius, rel=1e-12)

        # The exchange inequality: potential at the empty spot is below the
        # most crowded point's potential, and the move lowers the energy.
        j = int(np.argmax(rep.per_point))
        u_at_r = float((np.delete(dist[far], j) ** (-s)).sum())
        assert u_at_r < point_energy(cfg, j, s)

        moved = list(cfg.points)
        moved[j] = ConfigPoint(pool[far], "A1", words[far])
        new_rep = riesz_energy(Configuration(moved, s=s, set_spec=u), s)
        assert new_rep.total < rep.total
