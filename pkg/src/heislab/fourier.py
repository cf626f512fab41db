"""Fourier decomposition of graph kernels into convolution pieces.

For a kernel k on H (smooth off {z = 0}) and an intrinsic-L-Lipschitz graph,
define the cutoff auxiliary function

    kappa(u; th1, th2) = chi(th1, th2) k(u, u 2L th1, q(u) 4L^2 th2)

with chi = 1 on [-1,1]^2, 0 outside [-2,2]^2, and q(u) = u^2 for horizontally
odd k, u|u| for odd k.  Since the support in (th1, th2) is compact inside the
2 pi torus, the Fourier series

    kappa(u; th) = sum_n kappa_n(u) exp(i n . th)

converges, with odd coefficients kappa_n and rapidly decaying constants
c_n = max(sup |u kappa_n|, sup u^2 |kappa_n'|).  On graph pairs the angles
th1(w,v), th2(w,v) stay inside [-1,1], so partial sums reconstruct the
parametric kernel K_Phi(w,v) = k(Phi(v)^-1 Phi(w)).

Series convention: the torus [-pi, pi]^2 with basis exp(i n . th); the
source's 2-pi-i exponent is absorbed into this normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bumps import plateau
from .ilg import IlgFunction, graph_points
from .kernels import KernelSpec, eval_kernel

__all__ = ["FourierCoeffTable", "fourier_coeffs", "reconstruct_kernel", "graph_kernel_direct"]


def _chi(th1: np.ndarray, th2: np.ndarray) -> np.ndarray:
    return np.asarray(plateau(th1 / 2.0)) * np.asarray(plateau(th2 / 2.0))


def _resolve(kernel) -> tuple:
    """(eval_fn(points), q_fn(u), name) for a KernelSpec or a raw callable."""
    if isinstance(kernel, KernelSpec):
        # horizontally odd built-ins pair with u^2, odd ones with u|u|
        if kernel.tag in ("gradlog_x", "gradlog_y"):
            q = lambda u: u * u
        else:
            q = lambda u: u * np.abs(u)
        return (lambda pts: eval_kernel(kernel, pts)), q, kernel.name
    if isinstance(kernel, tuple) and len(kernel) == 2:
        fn, q_choice = kernel
        q = (lambda u: u * u) if q_choice == "square" else (lambda u: u * np.abs(u))
        return fn, q, getattr(fn, "__name__", "custom")
    raise TypeError("kernel must be a KernelSpec or a (callable, q_choice) pair")


def _aux_kernel(kernel, L: float, u: float, th1: np.ndarray, th2: np.ndarray) -> np.ndarray:
    fn, q, _ = _resolve(kernel)
    pts = np.stack(
        [
            np.full_like(th1, u),
            u * 2.0 * L * th1,
            float(q(np.asarray(u))) * 4.0 * L * L * th2,
        ],
        axis=-1,
    )
    return _chi(th1, th2) * np.asarray(fn(pts))


@dataclass
class FourierCoeffTable:
    """kappa_n sampled on a u grid for n in the box |n_i| <= n_max."""

    kernel: object  # KernelSpec or (callable, q_choice)
    L: float
    n_max: int
    u_samples: np.ndarray
    coeffs: np.ndarray  # complex, shape (2 n_max + 1, 2 n_max + 1, len(u))
    c_n: np.ndarray  # real, shape (2 n_max + 1, 2 n_max + 1)
    theta_grid: int

    def index(self, n1: int, n2: int) -> tuple[int, int]:
        return n1 + self.n_max, n2 + self.n_max

    def kappa_n(self, n1: int, n2: int) -> np.ndarray:
        return self.coeffs[self.index(n1, n2)]

    def decay_fit(self) -> float:
        """Least-squares slope of log c_n against log(1 + |n|)."""
        ns = []
        cs = []
        for n1 in range(-self.n_max, self.n_max + 1):
            for n2 in range(-self.n_max, self.n_max + 1):
                c = self.c_n[self.index(n1, n2)]
                if c > 1e-300:
                    ns.append(np.hypot(n1, n2))
                    cs.append(c)
        ns = np.log1p(np.asarray(ns))
        cs = np.log(np.asarray(cs))
        slope = np.polyfit(ns, cs, 1)[0]
        return float(slope)


def fourier_coeffs(
    kernel,
    L: float,
    u_samples,
    n_max: int,
    theta_grid: int = 256,
) -> FourierCoeffTable:
    """Compute kappa_n(u) by FFT of the theta-sampled auxiliary kernel.

    The integrand is smooth and compactly supported inside the torus, so the
    trapezoid/FFT quadrature converges spectrally in theta_grid.
    """
    if L < 1:
        raise ValueError("the decomposition is set up for L >= 1")
    if n_max < 0 or theta_grid <= 4 * n_max:
        raise ValueError("need theta_grid > 4 n_max")
    u_samples = np.asarray(u_samples, dtype=float)
    if np.any(u_samples == 0.0):
        raise ValueError("u samples must avoid 0")

    m = theta_grid
    theta = -np.pi + 2.0 * np.pi * np.arange(m) / m
    th1, th2 = np.meshgrid(theta, theta, indexing="ij")
    size = 2 * n_max + 1
    coeffs = np.zeros((size, size, u_samples.size), dtype=complex)
    # d/du by central differences at +-du around each sample
    du = 1e-5 * np.abs(u_samples)
    dcoeffs = np.zeros_like(coeffs)

    # a_n = exp(i pi (n1+n2)) FFT2[n]/m^2  (grid starts at -pi); keep the
    # centered box |n_i| <= n_max after fftshift
    ns = np.arange(-m // 2, m // 2)
    box = slice(m // 2 - n_max, m // 2 + n_max + 1)
    phase = np.exp(1j * np.pi * (ns[box, None] + ns[None, box]))

    def centered_coeffs(values: np.ndarray) -> np.ndarray:
        hat = np.fft.fftshift(np.fft.fft2(values)) / m**2
        return hat[box, box] * phase

    for iu, u in enumerate(u_samples):
        coeffs[:, :, iu] = centered_coeffs(_aux_kernel(kernel, L, float(u), th1, th2))
        vp = _aux_kernel(kernel, L, float(u + du[iu]), th1, th2)
        vm = _aux_kernel(kernel, L, float(u - du[iu]), th1, th2)
        dcoeffs[:, :, iu] = centered_coeffs((vp - vm) / (2.0 * du[iu]))

    c_n = np.maximum(
        np.max(np.abs(u_samples)[None, None, :] * np.abs(coeffs), axis=2),
        np.max(u_samples[None, None, :] ** 2 * np.abs(dcoeffs), axis=2),
    )
    return FourierCoeffTable(
        kernel=kernel,
        L=L,
        n_max=n_max,
        u_samples=u_samples,
        coeffs=coeffs,
        c_n=c_n,
        theta_grid=theta_grid,
    )


def graph_kernel_direct(kernel, f: IlgFunction, w, v) -> np.ndarray:
    """K_Phi(w, v) = k(Phi(v)^-1 Phi(w)) evaluated through the group law."""
    from .geometry import inverse, mul

    fn, _, _ = _resolve(kernel)
    pw = graph_points(f, np.asarray(w, dtype=float))
    pv = graph_points(f, np.asarray(v, dtype=float))
    return np.asarray(fn(np.asarray(mul(np.asarray(inverse(pv)), pw))))


def reconstruct_kernel(table: FourierCoeffTable, f: IlgFunction, w, v) -> np.ndarray:
    """Partial Fourier sum sum_{|n| <= n_max} kappa_n(w - v) exp(i n . theta(w, v)).

    w - v must land on the table's u grid (no interpolation is attempted).
    """
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    u = w - v
    right = np.clip(np.searchsorted(table.u_samples, u), 1, table.u_samples.size - 1)
    left = right - 1
    iu = np.where(
        np.abs(table.u_samples[left] - u) <= np.abs(table.u_samples[right] - u), left, right
    )
    if np.max(np.abs(table.u_samples[iu] - u)) > 1e-9:
        raise ValueError("w - v must coincide with the table's u samples")
    L = table.L
    _, q, _ = _resolve(table.kernel)
    p1w, p1v = f.phi1_at(w), f.phi1_at(v)
    p2w, p2v = f.phi2_at(w), f.phi2_at(v)
    th1 = (p1w - p1v) / (2.0 * L * u)
    th2 = (p2w - p2v + 0.5 * (p1v + p1w) * u) / (4.0 * L * L * q(u))
    out = np.zeros(np.shape(u), dtype=complex)
    for n1 in range(-table.n_max, table.n_max + 1):
        for n2 in range(-table.n_max, table.n_max + 1):
            kap = table.coeffs[table.index(n1, n2)][iu]
            out = out + kap * np.exp(1j * (n1 * th1 + n2 * th2))
    return out
