import numpy as np
import pytest

from heislab.sampled import cumtrapz
from heislab.tame import (
    PartialTameData,
    TameLinear,
    TameMapSampled,
    extend_tame,
    intrinsic_lipschitz_constant,
    one_sided_constant,
    rescale_tame,
    tame_from_ilg,
    tameness_constant,
)


def grid01(n=257, a=-1.0, b=1.0):
    return np.linspace(a, b, n)


def parabola_map(n=257):
    g = grid01(n)
    return TameMapSampled(g, g, g**2 / 2.0, declared_constant=1.0)


class TestTamenessConstant:
    def test_affine_is_zero_tame(self):
        # the (a=0) family (c, cx+b) is the 0-tame one; exact zero is
        # unreachable in floats since the quotient's cancellation error is
        # amplified by 1/h^2, leaving an ~1e-11 floor on this grid
        g = grid01()
        lin = TameLinear(a=0.0, b=0.3, c=-1.1)
        assert tameness_constant(lin.sample(g)) == pytest.approx(0.0, abs=1e-10)

    def test_tame_linear_slope_constant(self):
        # a tame-linear map with slope a measures exactly |a|
        g = grid01()
        m = TameLinear(a=0.7, b=0.3, c=-1.1).sample(g)
        assert m.declared_constant == pytest.approx(0.7)
        assert tameness_constant(m) == pytest.approx(0.7, rel=1e-9)

    def test_parabola_constant_one(self):
        # B = (x, x^2/2): each term of the tame quotient equals |x-y|/2
        m = parabola_map()
        assert tameness_constant(m) == pytest.approx(1.0, rel=1e-12)
        assert one_sided_constant(m) == pytest.approx(0.5, rel=1e-12)

    def test_brute_force_oracle(self, rng):
        # independent O(n^2) loop oracle on a small random coupled map
        g = grid01(41)
        b1 = np.sin(2.3 * g) * 0.8
        m = TameMapSampled.from_b1(g, b1)
        best = 0.0
        for i in range(g.size):
            for j in range(g.size):
                if i == j:
                    continue
                quot = (m.b2[i] - m.b2[j]) / (g[i] - g[j])
                val = abs(quot - b1[i]) + abs(quot - b1[j])
                best = max(best, val / abs(g[i] - g[j]))
        assert tameness_constant(m) == pytest.approx(best, rel=1e-12)

    def test_sum_subadditive(self):
        g = grid01(129)
        m1 = TameMapSampled.from_b1(g, np.sin(3 * g))
        m2 = TameMapSampled.from_b1(g, 0.5 * np.cos(2 * g))
        l1, l2 = tameness_constant(m1), tameness_constant(m2)
        total = TameMapSampled(g, m1.b1 + m2.b1, m1.b2 + m2.b2, l1 + l2)
        assert tameness_constant(total) <= l1 + l2 + 1e-12

    def test_two_sided_at_most_twice_one_sided(self):
        g = grid01(101)
        m = TameMapSampled.from_b1(g, np.abs(g) - 0.5)
        assert tameness_constant(m) <= 2 * one_sided_constant(m) + 1e-12

    def test_translation_and_affine_invariance(self):
        g = grid01(101)
        b1 = np.sin(3 * g)
        m = TameMapSampled.from_b1(g, b1)
        c0 = tameness_constant(m)
        shifted = TameMapSampled(g + 0.37, m.b1, m.b2, m.declared_constant, validate=False)
        assert tameness_constant(shifted) == pytest.approx(c0, rel=1e-9)
        lin = TameLinear(a=0.0, b=2.0, c=1.3)  # the 0-tame family
        assert tameness_constant(m.add_linear(lin)) == pytest.approx(c0, rel=1e-9)

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            tameness_constant(PartialTameData([0.0], [1.0], [1.0]))


class TestInvariants:
    def test_coupling_invariant_enforced(self):
        g = grid01(65)
        with pytest.raises(ValueError, match="trapezoid"):
            TameMapSampled(g, np.sin(g), np.cos(g), declared_constant=1.0)

    def test_declared_constant_enforced(self):
        g = grid01(65)
        b1 = np.sin(3 * g)
        b2 = cumtrapz(g, b1)
        with pytest.raises(ValueError, match="measured"):
            TameMapSampled(g, b1, b2, declared_constant=0.01)

    def test_nonuniform_grid_rejected(self):
        g = np.array([0.0, 0.1, 0.3, 0.6])
        with pytest.raises(ValueError, match="uniform"):
            TameMapSampled(g, g, g**2 / 2, declared_constant=1.0)


class TestExtension:
    def test_zero_data_extends_to_zero(self):
        data = PartialTameData([0.0, 1.0], [0.0, 0.0], [0.0, 0.0])
        out = extend_tame(data, np.linspace(0, 1, 101))
        assert np.all(out.b1 == 0.0)
        assert np.all(out.b2 == 0.0)

    def test_extremal_triangle_fixture(self):
        # E = {0, 1}, phi1 = 0, phi2(1) = 3/2: one-sided constant 3/2, and the
        # construction puts the full triangle with peak phi1(1/2) = 3.
        data = PartialTameData([0.0, 1.0], [0.0, 0.0], [0.0, 1.5])
        grid = np.linspace(0.0, 1.0, 257)
        out = extend_tame(data, grid)
        mid = np.argmin(np.abs(grid - 0.5))
        assert out.b1[mid] == pytest.approx(3.0, abs=1e-12)
        assert out.b2[-1] == pytest.approx(1.5, abs=1e-12)
        assert out.b2[0] == 0.0
        # triangle shape: slope 6 L c with L = 3/2 and c = 2/3, peak 3 at 1/2
        assert out.b1[64] == pytest.approx(6.0 * grid[64], rel=1e-12)

    def test_agrees_on_E_exactly(self, rng):
        grid = np.linspace(-2.0, 2.0, 401)
        sub = rng.choice(np.arange(grid.size), size=12, replace=False)
        sub.sort()
        base = TameMapSampled.from_b1(grid, np.sin(2.0 * grid))
        data = PartialTameData(grid[sub], base.b1[sub], base.b2[sub])
        out = extend_tame(data, grid)
        assert np.all(out.b1[sub] == data.phi1)
        assert np.all(out.b2[sub] == data.phi2)

    def test_full_grid_is_identity(self):
        grid = np.linspace(0.0, 1.0, 129)
        base = TameMapSampled.from_b1(grid, np.cos(3 * grid))
        data = PartialTameData(grid, base.b1, base.b2)
        out = extend_tame(data, grid)
        assert np.allclose(out.b1, base.b1, atol=1e-14)
        assert np.allclose(out.b2, base.b2, atol=1e-14)

    def test_random_datasets_within_18L(self, rng):
        grid = np.linspace(-1.0, 1.0, 513)
        for trial in range(100):
            m = int(rng.integers(2, 21))
            sub = np.sort(rng.choice(np.arange(grid.size), size=m, replace=False))
            amp = rng.uniform(0.2, 2.0)
            base = TameMapSampled.from_b1(grid, amp * np.sin(rng.uniform(0.5, 3.0) * grid))
            data = PartialTameData(grid[sub], base.b1[sub], base.b2[sub])
            L = tameness_constant(data)
            if L > 2.0 or L == 0.0:
                continue
            out = extend_tame(data, grid)
            assert tameness_constant(out) <= 18.0 * L * (1 + 1e-9)
            assert np.all(out.b1[sub] == data.phi1)
            assert np.all(out.b2[sub] == data.phi2)

    def test_idempotent_on_own_output(self):
        data = PartialTameData([0.0, 0.5, 1.0], [0.0, 0.3, 0.0], [0.0, 0.1, 0.2])
        grid = np.linspace(0.0, 1.0, 129)
        out = extend_tame(data, grid)
        again = extend_tame(PartialTameData(grid, out.b1, out.b2), grid)
        assert np.allclose(again.b1, out.b1, atol=1e-14)
        assert np.allclose(again.b2, out.b2, atol=1e-14)

    def test_grid_must_cover_E(self):
        data = PartialTameData([0.0, 2.0], [0.0, 0.0], [0.0, 0.0])
        with pytest.raises(ValueError, match="cover"):
            extend_tame(data, np.linspace(0.0, 1.0, 11))


class TestRescale:
    def test_identity_at_r_one(self):
        m = parabola_map()
        out = rescale_tame(m, 1.0)
        assert np.allclose(out.b1, m.b1)
        assert np.allclose(out.b2, m.b2)

    def test_parabola_fixed_point(self):
        m = parabola_map()
        out = rescale_tame(m, 2.0)
        assert np.allclose(out.b1, out.grid, atol=1e-14)
        assert np.allclose(out.b2, out.grid**2 / 2.0, atol=1e-14)

    @pytest.mark.parametrize("r", [0.5, 2.0, 8.0])
    def test_constant_preserved(self, r):
        g = grid01(257)
        m = TameMapSampled.from_b1(g, np.sin(2.2 * g) * 0.9)
        c0 = tameness_constant(m)
        assert tameness_constant(rescale_tame(m, r)) == pytest.approx(c0, rel=1e-9)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            rescale_tame(parabola_map(), 0.0)


class TestTameFromIlg:
    def test_zero_graph(self):
        g = grid01(65)
        out = tame_from_ilg(g, np.zeros_like(g), np.zeros_like(g))
        assert tameness_constant(out) == 0.0

    def test_horizontal_line_graph(self):
        # phi1 = 1, phi2 = -v parametrizes a horizontal line; 0-tame
        g = grid01(65)
        out = tame_from_ilg(g, np.ones_like(g), -g)
        assert tameness_constant(out) == pytest.approx(0.0, abs=1e-12)

    def test_intrinsic_1lip_gives_constant_at_most_2(self):
        g = grid01(257)
        phi1 = 0.9 * np.sin(g * 1.1)
        phi2 = -cumtrapz(g, phi1)
        L = intrinsic_lipschitz_constant(g, phi1, phi2)
        assert L <= 1.0
        out = tame_from_ilg(g, phi1, phi2)
        assert tameness_constant(out) <= 2.0 * max(L, 1.0) ** 2
