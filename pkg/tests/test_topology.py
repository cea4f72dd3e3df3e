import numpy as np
import pytest

from actmine import topology, walsh
from actmine.topology import PersistenceDiagram


def brute_force_diagram(values):
    """Threshold-growing oracle: grow sublevel sets value by value, track
    component intervals, and record deaths on merges (elder rule)."""
    f = np.asarray(values, dtype=float)
    n = f.size
    prev = []  # (lo, hi, birth, min_index)
    pairs = []
    for eps in np.unique(f):
        inc = f <= eps
        runs = []
        i = 0
        while i < n:
            if inc[i]:
                j = i
                while j + 1 < n and inc[j + 1]:
                    j += 1
                runs.append((i, j))
                i = j + 1
            else:
                i += 1
        nxt = []
        for lo, hi in runs:
            olds = [c for c in prev if lo <= c[0] and c[1] <= hi]
            if not olds:
                members = np.arange(lo, hi + 1)
                min_idx = members[np.argmin(f[members])]
                nxt.append((lo, hi, eps, min_idx))
            else:
                olds.sort(key=lambda c: (c[2], c[3]))
                surv = olds[0]
                for dead in olds[1:]:
                    if eps > dead[2]:
                        pairs.append((dead[2], float(eps)))
                nxt.append((lo, hi, surv[2], surv[3]))
        prev = nxt
    finite = sorted(pairs)
    return finite, (float(f.min()), float(f.max()))


def diagram_as_sets(dgm):
    finite = sorted(
        (float(b), float(d))
        for b, d, e in zip(dgm.births, dgm.deaths, dgm.essential)
        if not e
    )
    ess = [
        (float(b), float(d))
        for b, d, e in zip(dgm.births, dgm.deaths, dgm.essential)
        if e
    ]
    assert len(ess) == 1
    return finite, ess[0]


def strict_local_minima(values):
    f = np.asarray(values, dtype=float)
    count = 0
    for i in range(f.size):
        left_ok = i == 0 or f[i] < f[i - 1]
        right_ok = i == f.size - 1 or f[i] < f[i + 1]
        if left_ok and right_ok:
            count += 1
    return count


class TestSpectrumProfile:
    def test_zero_tail(self):
        spec = walsh.WalshSpectrum(np.array([4.0, 0, 0, 0]), 4, 4)
        np.testing.assert_array_equal(topology.spectrum_profile(spec), [0, 0, 0])

    def test_normalization(self):
        spec = walsh.WalshSpectrum(np.array([0.0, 4, 0, 0]), 4, 4)
        np.testing.assert_array_equal(topology.spectrum_profile(spec), [1, 0, 0])

    def test_all_zero(self):
        spec = walsh.WalshSpectrum(np.zeros(8), 8, 8)
        assert not topology.spectrum_profile(spec).any()


class TestSublevelPersistence:
    def test_one_interior_minimum(self):
        finite, ess = diagram_as_sets(topology.sublevel_persistence([0, 2, 1, 3]))
        assert finite == [(1.0, 2.0)]
        assert ess == (0.0, 3.0)

    def test_monotone_sequence(self):
        finite, ess = diagram_as_sets(topology.sublevel_persistence([1, 2, 3, 4]))
        assert finite == []
        assert ess == (1.0, 4.0)

    def test_two_equal_minima(self):
        finite, ess = diagram_as_sets(topology.sublevel_persistence([1, 0, 1, 0, 1]))
        assert finite == [(0.0, 1.0)]
        assert ess == (0.0, 1.0)

    def test_single_point(self):
        finite, ess = diagram_as_sets(topology.sublevel_persistence([2.5]))
        assert finite == []
        assert ess == (2.5, 2.5)

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            topology.sublevel_persistence([])

    def test_matches_threshold_growing_oracle(self):
        rng = np.random.default_rng(23)
        for trial in range(300):
            n = int(rng.integers(1, 65))
            if trial % 3 == 0:
                values = rng.uniform(0, 1, size=n)
            elif trial % 3 == 1:
                values = rng.integers(0, 4, size=n).astype(float)
            else:
                values = np.round(rng.uniform(0, 1, size=n) * 4) / 4
            got_finite, got_ess = diagram_as_sets(topology.sublevel_persistence(values))
            exp_finite, exp_ess = brute_force_diagram(values)
            assert got_finite == exp_finite, values
            assert got_ess == exp_ess

    def test_finite_pairs_count_local_minima(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            n = int(rng.integers(2, 64))
            values = rng.permutation(n).astype(float)
            dgm = topology.sublevel_persistence(values)
            n_finite = int(np.sum(~dgm.essential))
            assert n_finite == strict_local_minima(values) - 1


class TestLandscape:
    def test_single_tent(self):
        dgm = PersistenceDiagram(np.array([0.0]), np.array([2.0]), np.array([False]))
        ls = topology.landscape(dgm, k_levels=2, grid_size=5, t_min=0.0, t_max=2.0)
        # grid [0, 0.5, 1, 1.5, 2]
        assert abs(ls.values[0, 2] - 1.0) < 1e-12
        assert abs(ls.values[0, 1] - 0.5) < 1e-12
        assert not ls.values[1].any()

    def test_two_tents_cross(self):
        dgm = PersistenceDiagram(
            np.array([0.0, 1.0]), np.array([2.0, 3.0]), np.array([False, False])
        )
        ls = topology.landscape(dgm, k_levels=2, grid_size=7, t_min=0.0, t_max=3.0)
        t15 = 3  # grid point 1.5
        assert abs(ls.values[0, t15] - 0.5) < 1e-12
        assert abs(ls.values[1, t15] - 0.5) < 1e-12

    def test_support_bounds(self):
        dgm = PersistenceDiagram(np.array([1.0]), np.array([2.0]), np.array([False]))
        ls = topology.landscape(dgm, k_levels=1, grid_size=13, t_min=-1.0, t_max=4.0)
        outside = (ls.grid < 1.0) | (ls.grid > 2.0)
        assert not ls.values[0, outside].any()

    def test_empty_diagram_is_zero(self):
        dgm = PersistenceDiagram(np.empty(0), np.empty(0), np.empty(0, dtype=bool))
        ls = topology.landscape(dgm, k_levels=3, grid_size=8, t_min=0.0, t_max=1.0)
        assert not ls.values.any()

    def test_landscape_laws_on_random_diagrams(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            n_pairs = int(rng.integers(1, 12))
            b = rng.uniform(0, 1, size=n_pairs)
            d = b + rng.uniform(0, 1, size=n_pairs)
            dgm = PersistenceDiagram(b, d, np.zeros(n_pairs, dtype=bool))
            g = int(rng.integers(8, 64))
            ls = topology.landscape(dgm, 4, g, float(b.min()), float(d.max()))
            assert np.all(ls.values >= 0)
            assert np.all(np.diff(ls.values, axis=0) <= 1e-12)  # level monotonicity
            step = ls.grid_step
            assert np.all(np.abs(np.diff(ls.values, axis=1)) <= step + 1e-12)

    def test_stability_smoke(self):
        rng = np.random.default_rng(37)
        for _ in range(30):
            values = rng.uniform(0, 1, size=50)
            eps = 0.01
            noisy = values + rng.uniform(-eps, eps, size=50)
            d0 = topology.sublevel_persistence(values)
            d1 = topology.sublevel_persistence(noisy)
            lo, hi = topology.diagram_bounds([d0])
            l0 = topology.landscape(d0, 3, 64, lo, hi)
            l1 = topology.landscape(d1, 3, 64, lo, hi)
            slack = eps + l0.grid_step
            assert np.max(np.abs(l0.values - l1.values)) <= slack


class TestVectorAndDistance:
    def grid_landscapes(self):
        dgm = PersistenceDiagram(np.array([0.0]), np.array([2.0]), np.array([False]))
        empty = PersistenceDiagram(np.empty(0), np.empty(0), np.empty(0, dtype=bool))
        tent = topology.landscape(dgm, 1, 3, 0.0, 2.0)
        zero = topology.landscape(empty, 1, 3, 0.0, 2.0)
        return tent, zero

    def test_flatten_is_identity_for_one_level(self):
        tent, _ = self.grid_landscapes()
        np.testing.assert_array_equal(topology.landscape_vector(tent), [0, 1, 0])

    def test_zero_landscape_vector(self):
        _, zero = self.grid_landscapes()
        assert not topology.landscape_vector(zero).any()

    def test_identical_diagrams_identical_vectors(self):
        dgm = PersistenceDiagram(np.array([0.2, 0.4]), np.array([1.0, 0.9]),
                                 np.array([False, True]))
        a = topology.landscape(dgm, 3, 16, 0.0, 1.0)
        b = topology.landscape(dgm, 3, 16, 0.0, 1.0)
        np.testing.assert_array_equal(
            topology.landscape_vector(a), topology.landscape_vector(b)
        )

    def test_distance_zero_on_self(self):
        tent, _ = self.grid_landscapes()
        assert topology.landscape_distance(tent, tent) == 0.0

    def test_distance_hand_value(self):
        tent, zero = self.grid_landscapes()
        # grid [0, 1, 2], step 1; values differ only at the middle point by 1
        assert abs(topology.landscape_distance(tent, zero) - 1.0) < 1e-12

    def test_distance_symmetric(self):
        rng = np.random.default_rng(41)
        grid = np.linspace(0, 1, 9)
        a = topology.PersistenceLandscape(2, grid, rng.uniform(size=(2, 9)))
        b = topology.PersistenceLandscape(2, grid, rng.uniform(size=(2, 9)))
        assert topology.landscape_distance(a, b) == topology.landscape_distance(b, a)

    def test_distance_grid_mismatch(self):
        tent, _ = self.grid_landscapes()
        other = topology.landscape(
            PersistenceDiagram(np.array([0.0]), np.array([2.0]), np.array([False])),
            1, 4, 0.0, 2.0,
        )
        with pytest.raises(ValueError):
            topology.landscape_distance(tent, other)


class TestDiagramBounds:
    def test_bounds_across_diagrams(self):
        d1 = PersistenceDiagram(np.array([0.5]), np.array([2.0]), np.array([True]))
        d2 = PersistenceDiagram(np.array([0.1]), np.array([1.0]), np.array([True]))
        assert topology.diagram_bounds([d1, d2]) == (0.1, 2.0)

    def test_no_diagrams_errors(self):
        with pytest.raises(ValueError):
            topology.diagram_bounds([])
