"""Zero-mean auxiliary kernels with prescribed support and Fourier decay.

PsiS: the convolution profile

    Psi_s(z) = (1/2) (z|z|/q(z)) * int_{|z|/s}^inf eta(t) kappa(s t) [1 - 2|z|/(s t)] dt/t

with eta supported in [1/4, 1], integral 1 against dt/t.  It has zero mean,
support in B(0, s), sup norm O(1/s) and two-sided Fourier decay
|hat Psi_s(xi)| <= C min(|s xi|, |s xi|^-1).

Wp: the zero-mean L^1 function with radial Fourier transform |xi|^eps for
|xi| <= 1, |xi|^-eps for |xi| >= 2, bridged by a C^1 quintic on (1, 2);
it obeys |Wp(x)| <= C min(|x|^(eps-1), |x|^(-eps-1)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .bumps import eta_log
from .kernels1d import KappaSpec

__all__ = ["PsiS", "Wp"]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(96)
_GL8_NODES, _GL8_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _gl_integrate(fn, a: float, b: float) -> float:
    if b <= a:
        return 0.0
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return float(half * np.sum(_GL_WEIGHTS * fn(mid + half * _GL_NODES)))


@dataclass
class PsiS:
    """The kernel Psi_s for a truncation scale s, kappa and q choice."""

    s: float
    kappa: KappaSpec = field(default_factory=lambda: KappaSpec("reciprocal"))
    q_fn: str = "square"  # "square" -> odd Psi, "signed_square" -> even Psi

    def __post_init__(self):
        if self.s <= 0:
            raise ValueError("scale s must be positive")
        if self.q_fn not in ("square", "signed_square"):
            raise ValueError("q_fn must be 'square' or 'signed_square'")

    def _prefactor(self, z: np.ndarray) -> np.ndarray:
        # z|z|/q(z): sign(z) for q = z^2, 1 for q = z|z|
        if self.q_fn == "square":
            return np.sign(z)
        return np.ones_like(z)

    def __call__(self, z) -> np.ndarray | float:
        z = np.asarray(z, dtype=float)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        out = np.zeros_like(z)
        s = self.s
        for i, zi in enumerate(z):
            azi = abs(zi)
            lo = max(azi / s, 0.25)
            if lo >= 1.0 or zi == 0.0 and self.q_fn == "square":
                continue
            val = _gl_integrate(
                lambda t: np.asarray(eta_log(t))
                * self.kappa.raw(s * t)
                * (1.0 - 2.0 * azi / (s * t))
                / t,
                lo,
                1.0,
            )
            out[i] = 0.5 * val
        out *= self._prefactor(z)
        return float(out[0]) if scalar else out

    def sample_grid(self, n: int = 4001) -> np.ndarray:
        """Symmetric grid containing 0 and +-s/4 exactly (kink alignment)."""
        quarter = np.linspace(0.0, self.s / 4.0, n // 4 + 1)
        rest = np.linspace(self.s / 4.0, self.s, 3 * (n // 4) + 1)[1:]
        pos = np.concatenate([quarter, rest])
        return np.concatenate([-pos[::-1][:-1], pos])

    def fourier(self, xi) -> np.ndarray:
        """hat Psi_s(xi) = int Psi_s(z) exp(-2 pi i xi z) dz by quadrature."""
        grid = self.sample_grid()
        vals = self(grid)
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        phases = np.exp(-2j * np.pi * xi[:, None] * grid[None, :])
        out = np.trapezoid(vals[None, :] * phases, grid, axis=1)
        return out

    def mean(self) -> float:
        """int Psi_s by Simpson on the pieces cut at the kinks 0, +-s/4."""
        from scipy.integrate import simpson

        total = 0.0
        for lo, hi in ((-self.s, -self.s / 4), (-self.s / 4, 0.0), (0.0, self.s / 4), (self.s / 4, self.s)):
            g = np.linspace(lo, hi, 1601)
            total += float(simpson(self(g), x=g))
        return total

    def certify(self, n_xi: int = 40) -> dict:
        """Measure mean, support, sup norm and the two-sided Fourier envelope."""
        grid = self.sample_grid()
        vals = self(grid)
        mean = self.mean()
        sup = float(np.max(np.abs(vals)))
        outside = np.linspace(1.0000001 * self.s, 4.0 * self.s, 64)
        support_leak = float(np.max(np.abs(self(outside))))
        xi = np.geomspace(1e-2, 1e2, n_xi) / self.s
        fhat = np.abs(self.fourier(xi))
        envelope = np.minimum(np.abs(self.s * xi), 1.0 / np.abs(self.s * xi))
        c_fourier = float(np.max(fhat / envelope))
        return {
            "mean": mean,
            "sup_times_s": sup * self.s,
            "support_leak": support_leak,
            "fourier_constant": c_fourier,
        }


@dataclass
class Wp:
    """The distribution wp_eps in dimension 1, via its Fourier profile."""

    epsilon: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        self._bridge = _bridge_coeffs(self.epsilon)

    def fhat(self, xi) -> np.ndarray:
        """The radial Fourier profile: |xi|^eps, quintic bridge, |xi|^-eps."""
        xi = np.abs(np.asarray(xi, dtype=float))
        scalar = xi.ndim == 0
        xi = np.atleast_1d(xi)
        out = np.empty_like(xi)
        lo = xi <= 1.0
        hi = xi >= 2.0
        mid = ~(lo | hi)
        out[lo] = xi[lo] ** self.epsilon
        out[hi] = xi[hi] ** (-self.epsilon)
        out[mid] = np.polyval(self._bridge, xi[mid])
        return float(out[0]) if scalar else out

    def _head_nodes(self, freq: float) -> tuple[np.ndarray, np.ndarray]:
        """Panel Gauss-Legendre nodes on [0, 2]: geometric panels at the cusp,
        then ~8 panels per oscillation of the given frequency."""
        step = 1.0 / (8.0 * max(freq, 1.0))
        start = min(0.01, 4.0 * step)
        edges = np.unique(
            np.concatenate([np.geomspace(1e-12, start, 60), np.arange(start, 2.0, step), [2.0]])
        )
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * np.diff(edges)
        xi = (mid[:, None] + half[:, None] * _GL8_NODES[None, :]).ravel()
        w = (half[:, None] * _GL8_WEIGHTS[None, :]).ravel()
        return xi, w

    def __call__(self, x) -> np.ndarray | float:
        """wp(x) by inverse Fourier transform: [0,2] panel GL + gamma tail."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(np.abs(x))
        out = np.empty_like(x)
        for i, ax in enumerate(x):
            xi, w = self._head_nodes(ax)
            head = float(np.sum(w * self.fhat(xi) * np.cos(2.0 * np.pi * ax * xi)))
            out[i] = 2.0 * (head + _powerlaw_tail_cos(self.epsilon, float(ax)))
        return float(out[0]) if scalar else out

    def mean_certificate(self, x0: float = 64.0, levels: int = 3) -> float:
        """Extrapolated int wp over R via the Dirichlet-kernel identity.

        I(X) = int fhat(xi) sin(2 pi X xi)/(pi xi) dxi equals the integral of
        wp over [-X, X]; it decays like a X^-eps + O(X^-2) (cusp at 0, C^1
        bridge joints), so Richardson extrapolation in X^-eps followed by
        X^-2 recovers the total integral (= fhat(0) = 0).
        """
        xs = [x0 * 2.0**k for k in range(levels + 2)]
        vals = [self._dirichlet(x) for x in xs]
        e = self.epsilon
        lvl1 = [
            (vals[i + 1] - 2.0**-e * vals[i]) / (1.0 - 2.0**-e) for i in range(len(vals) - 1)
        ]
        lvl2 = [(lvl1[i + 1] - 0.25 * lvl1[i]) / 0.75 for i in range(len(lvl1) - 1)]
        return float(lvl2[-1])

    def _dirichlet(self, X: float) -> float:
        xi, w = self._head_nodes(X)
        head = float(np.sum(w * self.fhat(xi) * np.sin(2.0 * np.pi * X * xi) / (np.pi * xi)))
        return head + _powerlaw_tail_dirichlet(self.epsilon, X)

    def envelope_constant(self, n_samples: int = 60) -> float:
        """Measured C with |wp(x)| <= C min(|x|^(eps-1), |x|^(-eps-1))."""
        xs = np.geomspace(1e-3, 1e3, n_samples)
        vals = np.abs(self(xs))
        env = np.minimum(xs ** (self.epsilon - 1.0), xs ** (-self.epsilon - 1.0))
        return float(np.max(vals / env))


@lru_cache(maxsize=32)
def _bridge_coeffs(eps: float) -> tuple[float, ...]:
    """Quintic on [1, 2] matching value and first derivative of both branches,
    with vanishing second derivatives at the joints (C^1 bridge)."""
    # conditions: p(1) = 1, p'(1) = eps, p''(1) = 0,
    #             p(2) = 2^-eps, p'(2) = -eps 2^-(eps+1), p''(2) = 0
    rows = []
    rhs = []
    for x0, v, d, dd in (
        (1.0, 1.0, eps, 0.0),
        (2.0, 2.0**-eps, -eps * 2.0 ** (-eps - 1.0), 0.0),
    ):
        rows.append([x0**k for k in range(5, -1, -1)])
        rhs.append(v)
        rows.append([k * x0 ** (k - 1) for k in range(5, 0, -1)] + [0.0])
        rhs.append(d)
        rows.append([k * (k - 1) * x0 ** (k - 2) for k in range(5, 1, -1)] + [0.0, 0.0])
        rhs.append(dd)
    coeffs = np.linalg.solve(np.asarray(rows), np.asarray(rhs))
    return tuple(float(c) for c in coeffs)


def _powerlaw_tail_cos(eps: float, x: float) -> float:
    """int_2^inf xi^-eps cos(2 pi x xi) dxi via the incomplete gamma function."""
    if x == 0.0:
        # divergent only for eps <= 1 at x = 0? no: integrable for eps > 1;
        # for eps < 1 the cosine tail at x = 0 diverges, callers keep x != 0
        return float(2.0 ** (1.0 - eps) / (eps - 1.0)) if eps > 1.0 else np.inf
    w = 2.0 * np.pi * x
    # int_2^inf xi^(s-1) e^{i w xi} d xi = (-i w)^(-s) Gamma(s, -2 i w), s = 1 - eps
    s = 1.0 - eps
    val = mpmath.power(-1j * w, -s) * mpmath.gammainc(s, -2j * w)
    return float(mpmath.re(val))


def _powerlaw_tail_dirichlet(eps: float, X: float) -> float:
    """int_2^inf xi^-eps sin(2 pi X xi)/(pi xi) dxi via the incomplete gamma."""
    w = 2.0 * np.pi * X
    s = -eps
    val = mpmath.power(-1j * w, -s) * mpmath.gammainc(s, -2j * w)
    return float(mpmath.im(val)) / np.pi
