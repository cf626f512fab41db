import numpy as np
import pytest

from heislab.corona import DyadicInterval, DyadicTree, tree_regions
from heislab.ilg import Curve, horizontal_line_curve
from heislab.kernels import KernelSpec
from heislab.kernels1d import KappaSpec, Kernel1D, commutator_eval, exp_kernel_eval, taylor_partial_sum
from heislab.sampled import SampledFn, cumtrapz
from heislab.sio import (
    DiscretizationError,
    ParamKernel,
    SioMatrix,
    assemble_sio,
    byd_annulus_check,
    hl_maximal,
    maximal_sio,
    op_norm,
    op_norm_oracle,
    apply_sio,
    t1_test,
)
from heislab.tame import TameLinear, TameMapSampled


def line(a=0.0, b=1.0, n=257, rule="uniform"):
    return horizontal_line_curve((0, 0, 0), 0.0, (a, b), n, rule=rule)


def hilbert_kernel():
    return ParamKernel(lambda x, y: 1.0 / (x - y), name="hilbert")


def reciprocal_k1d():
    return Kernel1D(kappa=KappaSpec("reciprocal"))


class TestAssemble:
    def test_reciprocal_antisymmetric(self):
        c = line(n=129)
        m = assemble_sio(reciprocal_k1d(), c, epsilon=0.05)
        assert np.allclose(m.entries, -m.entries.T, atol=1e-14)
        assert np.all(np.diag(m.entries) == 0.0)

    def test_riesz_on_axis_matches_hilbert(self):
        # the pair kernel K((r,0,0),(s,0,0)) = 1/(r-s) on the x-axis curve
        c = line(n=101)
        m_points = assemble_sio(KernelSpec("riesz_x"), c, epsilon=0.1)
        m_param = assemble_sio(hilbert_kernel(), c, epsilon=0.1)
        assert np.allclose(m_points.entries, m_param.entries, atol=1e-12)

    def test_chousionis_li_zero_on_horizontal_line(self):
        c = horizontal_line_curve((0.3, -0.2, 0.7), 0.8, (0, 1), 65)
        m = assemble_sio(KernelSpec("chousionis_li", 4.0), c, epsilon=0.1)
        assert np.max(np.abs(m.entries)) <= 1e-10

    def test_sharp_guard(self):
        c = line(n=65)
        with pytest.raises(DiscretizationError):
            assemble_sio(reciprocal_k1d(), c, epsilon=0.001)

    def test_smooth_truncation_between_sharp(self):
        c = line(n=129)
        eps = 0.1
        m_half = assemble_sio(reciprocal_k1d(), c, eps / 2, truncation="sharp")
        m_smooth = assemble_sio(reciprocal_k1d(), c, eps, truncation="smooth")
        m_sharp = assemble_sio(reciprocal_k1d(), c, eps, truncation="sharp")
        a = np.abs(m_smooth.entries)
        assert np.all(a <= np.abs(m_half.entries) + 1e-14)
        assert np.all(a >= np.abs(m_sharp.entries) - 1e-14)

    def test_threads_deterministic(self):
        c = line(n=200)
        m1 = assemble_sio(reciprocal_k1d(), c, 0.05, threads=1)
        m4 = assemble_sio(reciprocal_k1d(), c, 0.05, threads=4)
        assert np.array_equal(m1.entries, m4.entries)


class TestOpNorm:
    def test_zero_matrix(self):
        c = line(n=32)
        m = SioMatrix(np.zeros((32, 32), complex), c.weights, 0.1, "sharp")
        assert op_norm(m) == 0.0

    def test_diagonal_matrix(self):
        w = np.ones(16)
        d = np.linspace(-3, 2, 16)
        m = SioMatrix(np.diag(d).astype(complex), w, 0.0, "sharp")
        assert op_norm(m) == pytest.approx(3.0, abs=1e-7)

    def test_matches_oracle_hilbert_512(self):
        c = line(n=512)
        m = assemble_sio(hilbert_kernel(), c, epsilon=2.0**-6)
        assert op_norm(m) == pytest.approx(op_norm_oracle(m), abs=1e-6)

    def test_matches_oracle_complex(self):
        grid = np.linspace(0, 1, 257)
        A = SampledFn(grid, 0.8 * np.abs(grid - 0.4))
        B = TameMapSampled.from_b1(grid, 0.6 * np.sin(3 * grid))
        k1d = Kernel1D(kappa=KappaSpec("reciprocal"), A=A, B=B)
        c = line(n=257)
        m = assemble_sio(k1d, c, epsilon=2.0**-5)
        assert op_norm(m) == pytest.approx(op_norm_oracle(m), abs=1e-6)

    def test_weighted_vs_plain(self):
        c = line(n=128, rule="trapezoid")
        m = assemble_sio(hilbert_kernel(), c, epsilon=0.05)
        assert op_norm(m, weighted=True) != pytest.approx(op_norm(m, weighted=False), abs=1e-12)


class TestMaximal:
    def test_zero_function(self):
        c = line(n=65)
        out = maximal_sio(reciprocal_k1d(), c, np.zeros(65), [0.1, 0.2])
        assert np.all(out.values == 0.0)

    def test_monotone_in_grid(self, rng):
        c = line(n=129)
        f = rng.normal(size=129)
        small = maximal_sio(reciprocal_k1d(), c, f, [0.1])
        big = maximal_sio(reciprocal_k1d(), c, f, [0.1, 0.05, 0.2])
        assert np.all(big.values >= small.values - 1e-14)

    def test_hl_maximal_oracle(self, rng):
        grid = np.linspace(0, 1, 41)
        vals = rng.normal(size=41)
        out = hl_maximal(grid, vals)
        # brute force over all index intervals
        w = np.zeros(41)
        w[:-1] += 0.5 * np.diff(grid)
        w[1:] += 0.5 * np.diff(grid)
        brute = np.zeros(41)
        av = np.abs(vals)
        for i in range(41):
            for j in range(i, 41):
                avg = np.sum(w[i : j + 1] * av[i : j + 1]) / np.sum(w[i : j + 1])
                brute[i : j + 1] = np.maximum(brute[i : j + 1], avg)
        assert np.allclose(out, brute, atol=1e-12)

    def test_cotlar_audit(self, rng):
        # T* f <= C (M(|Tf|) + ||T|| M f) on the Hilbert fixture
        n = 257
        c = line(n=n)
        f = np.sin(5 * np.pi * c.params) * (c.params < 0.7)
        eps_grid = [2.0**-k for k in range(3, 7)]
        tstar = maximal_sio(hilbert_kernel(), c, f, eps_grid).values
        m = assemble_sio(hilbert_kernel(), c, min(eps_grid))
        tf = np.abs(apply_sio(m, f))
        tnorm = op_norm(m)
        rhs = hl_maximal(c.params, tf) + tnorm * hl_maximal(c.params, f)
        measured_c = np.max(tstar / np.maximum(rhs, 1e-12))
        assert measured_c <= 3.0  # finite, order-one


class TestT1:
    def test_zero_kernel(self):
        c = line(-4.0, 4.0, 513)
        zero = ParamKernel(lambda x, y: np.zeros(np.broadcast_shapes(x.shape, y.shape)))
        avg, avg_t = t1_test(zero, c, center=0.0, radius=1.0, epsilon=2.0**-4)
        assert avg == 0.0 and avg_t == 0.0

    def test_hilbert_stable_under_halving(self):
        c = line(-4.0, 4.0, 2049)
        a1, _ = t1_test(hilbert_kernel(), c, 0.0, 1.0, 2.0**-6)
        a2, _ = t1_test(hilbert_kernel(), c, 0.0, 1.0, 2.0**-7)
        assert a2 == pytest.approx(a1, rel=0.1)

    def test_tame_linear_reduces_to_kappa(self):
        c = line(-4.0, 4.0, 513)
        k_plain = Kernel1D(kappa=KappaSpec("reciprocal"))
        k_ab = Kernel1D(kappa=KappaSpec("reciprocal"), B=TameLinear(a=0.7, b=0.3, c=-0.1))
        eps = 2.0**-4
        a0, t0 = t1_test(k_plain, c, 0.0, 1.0, eps)
        a1, t1v = t1_test(k_ab, c, 0.0, 1.0, eps)
        assert a1 == pytest.approx(a0, rel=1e-12)
        assert t1v == pytest.approx(t0, rel=1e-12)

    def test_window_guard(self):
        c = line(0.0, 1.0, 65)
        with pytest.raises(ValueError, match="3 B0"):
            t1_test(hilbert_kernel(), c, 0.5, 0.5, 0.1)


class TestKernel1D:
    def test_m_n_zero_is_kappa(self, rng):
        k1d = reciprocal_k1d()
        x = rng.uniform(-1, 1, 20)
        y = x + rng.uniform(0.1, 1.0, 20)
        assert np.allclose(commutator_eval(k1d, x, y), 1.0 / (x - y), atol=1e-14)

    def test_affine_B_vanishes(self, rng):
        grid = np.linspace(-2, 2, 257)
        k1d = Kernel1D(
            kappa=KappaSpec("reciprocal"), B=TameLinear(a=1.3, b=0.5, c=0.2), n=2
        )
        x = rng.uniform(-1, 1, 20)
        y = x + rng.uniform(0.1, 0.5, 20)
        assert np.max(np.abs(commutator_eval(k1d, x, y))) == 0.0

    def test_linear_A_m1(self, rng):
        grid = np.linspace(-2, 2, 129)
        a = 0.85
        k1d = Kernel1D(kappa=KappaSpec("reciprocal"), A=SampledFn(grid, a * grid), m=1)
        x = rng.uniform(-1, 1, 20)
        y = x + rng.uniform(0.1, 0.5, 20)
        assert np.allclose(commutator_eval(k1d, x, y), a / (x - y), atol=1e-12)

    def test_diagonal_raises(self):
        with pytest.raises(ValueError, match="diagonal"):
            commutator_eval(reciprocal_k1d(), 0.3, 0.3)
        with pytest.raises(ValueError, match="diagonal"):
            exp_kernel_eval(reciprocal_k1d(), 0.3, 0.3)

    def test_exp_tame_linear_reduces(self, rng):
        k1d = Kernel1D(kappa=KappaSpec("reciprocal"), B=TameLinear(a=2.0, b=-1.0, c=0.4))
        x = rng.uniform(-1, 1, 20)
        y = x + rng.uniform(0.1, 0.5, 20)
        assert np.allclose(exp_kernel_eval(k1d, x, y), 1.0 / (x - y), atol=1e-14)

    def test_modulus_identity(self, rng):
        grid = np.linspace(-2, 2, 257)
        k1d = Kernel1D(
            kappa=KappaSpec("reciprocal"),
            A=SampledFn(grid, 0.5 * np.abs(grid)),
            B=TameMapSampled.from_b1(grid, 0.4 * np.sin(2 * grid)),
        )
        x = rng.uniform(-1.5, 1.5, 30)
        y = x + rng.uniform(0.05, 0.5, 30)
        vals = exp_kernel_eval(k1d, x, y)
        assert np.allclose(np.abs(vals), np.abs(1.0 / (x - y)), atol=1e-12)

    def test_taylor_remainder(self):
        grid = np.linspace(-2, 2, 513)
        k1d = Kernel1D(
            kappa=KappaSpec("reciprocal"),
            A=SampledFn(grid, 0.3 * np.abs(grid)),
            B=TameMapSampled.from_b1(grid, 0.2 * np.sin(grid)),
        )
        x, y = 0.4, -0.3
        exact = exp_kernel_eval(k1d, x, y)
        bound = abs(k1d.phase(x, y))
        kap = abs(k1d.kappa_at(x - y))
        import math

        for order in (2, 5, 9, 14):
            approx = taylor_partial_sum(k1d, x, y, order)
            remainder = kap * (2 * np.pi * bound) ** (order + 1) / math.factorial(order + 1)
            assert abs(exact - approx) <= remainder * math.exp(2 * np.pi * bound) + 1e-15

    def test_smoothed_kappa_certified(self):
        spec = KappaSpec("smoothed", eps0=0.1)
        norm = spec.normalization()
        u = np.geomspace(1e-3, 1e2, 500)
        vals = spec.raw(u) / norm
        assert np.max(np.abs(u * vals)) <= 1.0 + 1e-9

    def test_kappa_odd(self, rng):
        u = rng.uniform(0.01, 10, 50)
        for spec in (KappaSpec("reciprocal"), KappaSpec("smoothed", 0.5)):
            assert np.allclose(spec.raw(-u), -spec.raw(u), atol=1e-14)


class TestStrongConstants:
    @staticmethod
    def measure_strong(kernel_fn, rng, n_triples=4000):
        x = rng.uniform(-1, 1, n_triples)
        d = 10.0 ** rng.uniform(-2, 0.3, n_triples)
        y = x + np.where(rng.uniform(size=n_triples) < 0.5, d, -d)
        xp = x + d * rng.uniform(-0.5, 0.5, n_triples)
        good = np.abs(x - xp) > 1e-9
        x, y, xp, d = x[good], y[good], xp[good], d[good]
        size = np.max(np.abs(x - y) * np.abs(kernel_fn(x, y)))
        hold = np.max(
            np.abs(kernel_fn(x, y) - kernel_fn(xp, y))
            * np.abs(x - y) ** 2
            / np.abs(x - xp)
        )
        holdt = np.max(
            np.abs(kernel_fn(y, x) - kernel_fn(y, xp))
            * np.abs(x - y) ** 2
            / np.abs(x - xp)
        )
        return max(size, hold, holdt)

    def test_commutator_growth(self, rng):
        grid = np.linspace(-3, 3, 1025)
        A = SampledFn(grid, np.abs(grid) * 0.99)
        B = TameMapSampled.from_b1(grid, 0.9 * np.sin(grid))
        consts = {}
        for m in range(5):
            for n in range(5 - m):
                k1d = Kernel1D(kappa=KappaSpec("reciprocal"), A=A, B=B, m=m, n=n)
                consts[(m, n)] = self.measure_strong(
                    lambda x, y: commutator_eval(k1d, x, y), rng
                )
        C = max(c ** (1.0 / (m + n + 1)) for (m, n), c in consts.items())
        assert np.isfinite(C)
        for (m, n), c in consts.items():
            assert c <= C ** (m + n + 1) * (1 + 1e-9)

    def test_exp_kernel_strong_vs_maxMN(self, rng):
        grid = np.linspace(-3, 3, 1025)
        results = {}
        for scale in (1.0, 2.0, 4.0):
            A = SampledFn(grid, scale * np.abs(grid) * 0.99)
            B = TameMapSampled.from_b1(grid, scale * 0.9 * np.sin(grid))
            k1d = Kernel1D(kappa=KappaSpec("reciprocal"), A=A, B=B)
            results[scale] = self.measure_strong(
                lambda x, y: exp_kernel_eval(k1d, x, y), rng
            )
        # growth at most linear in max(M, N) (up to sampling noise)
        assert results[4.0] <= 4.0 * results[1.0] * 8.0 * np.pi


class TestByD:
    def make_region(self):
        n = 4 * 2**6 + 1
        grid = np.linspace(0.0, 1.0, n)
        members = []
        for j in range(5):
            members.extend(DyadicInterval(j, k) for k in range(2**j))
        tree = DyadicTree(DyadicInterval(0, 0), frozenset(members))
        return grid, tree_regions(tree, grid)

    def test_byd_assembly_row_support(self):
        grid, region = self.make_region()
        c = Curve(grid, np.stack([grid, 0 * grid, 0 * grid], axis=-1), np.full(grid.size, grid[1] - grid[0]), kind="horizontal_line")
        m = assemble_sio(reciprocal_k1d(), c, epsilon=0.0, truncation="byd", tree_region=region)
        # rows outside the top interval vanish (none here), and no diagonal
        assert np.all(np.diag(m.entries) == 0.0)
        # the cutoff kills |x - y| < D(x,y) >= d(x)/4 > 0
        assert np.count_nonzero(m.entries) < m.n * m.n

    def test_annulus_structure(self, rng):
        grid, region = self.make_region()
        ratios = []
        for _ in range(20):
            i = int(rng.integers(10, grid.size - 10))
            j = int(rng.integers(max(0, i - 8), min(grid.size, i + 8)))
            if i == j:
                continue
            r = byd_annulus_check(region, grid, i, j, ball_radius=0.02)
            ratios.extend([r["b1_ratio"], r["b2_ratio"]])
        assert max(ratios) <= 100.0
