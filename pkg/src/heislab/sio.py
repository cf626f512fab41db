"""Discretized truncated singular integral operators as dense matrices.

An epsilon-SIO on a curve with quadrature weights w becomes the matrix
M_ij = K(p_i, p_j) w_j 1{cutoff}; its L^2(mu) operator norm is the spectral
norm of W^(1/2) M W^(-1/2), estimated by power iteration on the Gram matrix
and cross-checkable against a dense SVD.  Truncations: sharp (d > eps),
smooth (psi_eps = 1 - plateau(d/eps)) and the D(x,y) <= |x-y| <= rho Whitney
truncation of a tree region.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bumps import plateau, t1_profile
from .corona import TreeRegionData
from .geometry import dist
from .ilg import Curve
from .kernels import KernelSpec, pair_kernel
from .kernels1d import Kernel1D, exp_kernel_eval
from .sampled import SampledFn

__all__ = [
    "SioMatrix",
    "ParamKernel",
    "DiscretizationError",
    "IterationError",
    "assemble_sio",
    "op_norm",
    "op_norm_oracle",
    "maximal_sio",
    "apply_sio",
    "t1_test",
    "hl_maximal",
    "byd_annulus_check",
]


class DiscretizationError(ValueError):
    """epsilon below the guard 2 * max consecutive gap."""


class IterationError(RuntimeError):
    """Power iteration failed to converge; carries the last residual."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class ParamKernel:
    """A kernel of the curve parameters: fn(x, y) vectorized, off-diagonal."""

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "param_kernel"


@dataclass
class SioMatrix:
    entries: np.ndarray
    weights: np.ndarray
    epsilon: float
    truncation: str  # "sharp" | "smooth" | "byd"
    kernel_name: str = ""
    curve_kind: str = ""

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def _kernel_adapter(kernel, curve: Curve):
    """Return (eval_rows(i0, i1) -> block, uses_points, name)."""
    if isinstance(kernel, Kernel1D):
        x = curve.params

        def rows(i0, i1):
            return _offdiag_eval(
                lambda xs, ys: exp_kernel_eval(kernel, xs, ys), x[i0:i1], x, i0
            )

        return rows, False, "kernel1d"
    if isinstance(kernel, ParamKernel):
        x = curve.params

        def rows(i0, i1):
            return _offdiag_eval(kernel.fn, x[i0:i1], x, i0)

        return rows, False, kernel.name
    if isinstance(kernel, KernelSpec):
        pts = curve.points

        def rows(i0, i1):
            return _offdiag_pts(lambda p, q: pair_kernel(kernel, p, q), pts[i0:i1], pts, i0)

        return rows, True, kernel.name
    if callable(kernel):
        pts = curve.points

        def rows(i0, i1):
            return _offdiag_pts(kernel, pts[i0:i1], pts, i0)

        return rows, True, getattr(kernel, "__name__", "callable")
    raise TypeError(f"unsupported kernel type {type(kernel).__name__}")


def _offdiag_eval(fn, xs, x, i0):
    """Evaluate fn on the row block, zeroing the diagonal safely."""
    X = xs[:, None]
    Y = x[None, :]
    dx = X - Y
    safe_Y = np.where(dx == 0.0, Y + 1.0, Y)
    block = np.asarray(fn(np.broadcast_to(X, dx.shape), safe_Y))
    block = np.where(dx == 0.0, 0.0, block)
    return block


def _offdiag_pts(fn, ps, pts, i0):
    P = ps[:, None, :]
    Q = pts[None, :, :]
    same = np.all(P == Q, axis=-1)
    safe_Q = np.where(same[..., None], Q + np.array([1.0, 0.0, 0.0]), Q)
    block = np.asarray(fn(np.broadcast_to(P, safe_Q.shape), safe_Q))
    return np.where(same, 0.0, block)


def _distance_rows(curve: Curve, uses_points: bool, i0: int, i1: int) -> np.ndarray:
    if uses_points:
        return np.asarray(dist(curve.points[i0:i1, None, :], curve.points[None, :, :]))
    x = curve.params
    return np.abs(x[i0:i1, None] - x[None, :])


def _max_gap(curve: Curve, uses_points: bool) -> float:
    if uses_points:
        return float(np.max(curve.metric_gaps()))
    return float(np.max(np.diff(curve.params)))


def assemble_sio(
    kernel,
    curve: Curve,
    epsilon: float,
    truncation: str = "sharp",
    tree_region: TreeRegionData | None = None,
    threads: int = 1,
    row_chunk: int = 256,
) -> SioMatrix:
    """Assemble the dense epsilon-SIO matrix M_ij = K_ij w_j [cutoff]."""
    rows_of, uses_points, name = _kernel_adapter(kernel, curve)
    n = curve.n
    if truncation == "sharp":
        guard = 2.0 * _max_gap(curve, uses_points)
        if epsilon < guard:
            raise DiscretizationError(
                f"sharp truncation needs epsilon >= 2 max gap = {guard:.3e}, got {epsilon:.3e}"
            )
    elif truncation == "byd":
        if tree_region is None:
            raise ValueError("byd truncation requires a TreeRegionData")
        if uses_points:
            raise ValueError("byd truncation applies to parameter kernels")
    elif truncation != "smooth":
        raise ValueError("truncation must be 'sharp', 'smooth' or 'byd'")

    entries = np.zeros((n, n), dtype=complex)

    def fill(i0: int, i1: int) -> None:
        block = rows_of(i0, i1).astype(complex)
        d = _distance_rows(curve, uses_points, i0, i1)
        if truncation == "sharp":
            block *= d > epsilon
        elif truncation == "smooth":
            block *= 1.0 - np.asarray(plateau(d / epsilon))
        else:
            dvals = np.asarray(tree_region.d_fn(curve.params))
            D = 0.25 * (dvals[i0:i1, None] + dvals[None, :])
            mask = (D <= d) & (d <= tree_region.rho)
            top = tree_region.tree.top
            in_top = (curve.params[i0:i1] >= top.left - 1e-12) & (
                curve.params[i0:i1] <= top.right + 1e-12
            )
            block *= mask & in_top[:, None]
        entries[i0:i1] = block * curve.weights[None, :]

    chunks = [(i, min(i + row_chunk, n)) for i in range(0, n, row_chunk)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda c: fill(*c), chunks))
    else:
        for c in chunks:
            fill(*c)

    return SioMatrix(
        entries=entries,
        weights=curve.weights.copy(),
        epsilon=epsilon,
        truncation=truncation,
        kernel_name=name,
        curve_kind=curve.kind,
    )


def _conjugated(m: SioMatrix, weighted: bool) -> np.ndarray:
    if not weighted:
        return m.entries
    w = m.weights
    if np.any(w <= 0):
        # zero-weight nodes carry no mass; drop them from the norm
        keep = w > 0
        sub = m.entries[np.ix_(keep, keep)]
        s = np.sqrt(w[keep])
        return sub * (s[:, None] / s[None, :])
    s = np.sqrt(w)
    return m.entries * (s[:, None] / s[None, :])


def op_norm(
    m: SioMatrix,
    weighted: bool = True,
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> float:
    """Spectral norm of the (weighted) operator via power iteration on A^H A."""
    A = _conjugated(m, weighted)
    n = A.shape[0]
    if n == 0 or not np.any(A):
        return 0.0
    v = (1.0 + np.arange(n) / n).astype(complex)  # deterministic start
    v /= np.linalg.norm(v)
    sigma = 0.0
    delta_prev = np.inf
    for _ in range(max_iter):
        av = A @ v
        u = A.conj().T @ av
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return 0.0
        new_sigma = float(np.linalg.norm(av))  # ||A v|| with ||v|| = 1
        v = u / nu
        delta = new_sigma - sigma  # monotone increasing Rayleigh estimates
        if delta <= tol * max(1.0, new_sigma):
            # geometric-tail remainder estimate (Aitken) for clustered spectra
            rho = delta / delta_prev if delta_prev > 0 else 0.0
            if 0.0 < rho < 0.9999:
                remainder = delta * rho / (1.0 - rho)
                if remainder <= tol * max(1.0, new_sigma):
                    return new_sigma + remainder
            else:
                return new_sigma
        sigma = new_sigma
        delta_prev = delta if delta > 0 else np.inf
    raise IterationError(
        f"power iteration did not converge in {max_iter} iterations",
        residual=abs(delta),
    )


def op_norm_oracle(m: SioMatrix, weighted: bool = True) -> float:
    """Dense singular-value oracle for the same norm."""
    A = _conjugated(m, weighted)
    return float(np.linalg.svd(A, compute_uv=False)[0])


def apply_sio(m: SioMatrix, f: np.ndarray) -> np.ndarray:
    return m.entries @ np.asarray(f)


def maximal_sio(kernel, curve: Curve, f: np.ndarray, eps_grid) -> SampledFn:
    """Pointwise sup over the epsilon grid of |T_eps f|."""
    eps_grid = list(eps_grid)
    if not eps_grid:
        raise ValueError("eps_grid must be nonempty")
    f = np.asarray(f)
    out = np.zeros(curve.n)
    for eps in eps_grid:
        m = assemble_sio(kernel, curve, eps, truncation="sharp")
        out = np.maximum(out, np.abs(apply_sio(m, f)))
    return SampledFn(curve.params, out)


def hl_maximal(grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Non-centred Hardy-Littlewood maximal function of samples on a grid.

    By the mediant inequality the sup over intervals containing a point is
    attained among intervals with that point as an endpoint, so two O(n^2)
    prefix-sum passes are exact for the discrete (trapezoid) measure.
    """
    grid = np.asarray(grid, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    n = grid.size
    w = np.zeros(n)
    w[:-1] += 0.5 * np.diff(grid)
    w[1:] += 0.5 * np.diff(grid)
    pref_mass = np.concatenate([[0.0], np.cumsum(w * v)])
    pref_len = np.concatenate([[0.0], np.cumsum(w)])
    out = np.zeros(n)
    for i in range(n):
        # averages over [i..j] for all j >= i; a point k in [i..j] sees the
        # suffix maximum of these averages from k on
        mass = pref_mass[i + 1 :] - pref_mass[i]
        length = pref_len[i + 1 :] - pref_len[i]
        avg = mass / length
        suffix = np.maximum.accumulate(avg[::-1])[::-1]
        out[i:] = np.maximum(out[i:], suffix)
    return out


def transpose_kernel(kernel):
    """The kernel of the formal adjoint: K^t(x, y) = conj(K(y, x))."""
    if isinstance(kernel, Kernel1D):
        return ParamKernel(
            lambda x, y: np.conj(exp_kernel_eval(kernel, y, x)), name="kernel1d^t"
        )
    if isinstance(kernel, ParamKernel):
        return ParamKernel(lambda x, y: np.conj(kernel.fn(y, x)), name=kernel.name + "^t")
    if isinstance(kernel, KernelSpec):
        return lambda p, q: np.conj(pair_kernel(kernel, q, p))
    if callable(kernel):
        return lambda p, q: np.conj(kernel(q, p))
    raise TypeError(f"unsupported kernel type {type(kernel).__name__}")


def t1_test(
    kernel,
    curve: Curve,
    center: float,
    radius: float,
    epsilon: float,
) -> tuple[float, float]:
    """Averages over B0 of |T~_eps(b)| and |T~_eps^t(b)| with 1_{2B0} <= b <= 1_{3B0}.

    The curve window must contain 3 B0; the smooth epsilon-truncation is used.
    """
    params = curve.params
    if center - 3 * radius < params[0] - 1e-12 or center + 3 * radius > params[-1] + 1e-12:
        raise ValueError("curve window too small for 3 B0")
    b = np.asarray(t1_profile(np.abs(params - center) / radius))
    m = assemble_sio(kernel, curve, epsilon, truncation="smooth")
    mt = assemble_sio(transpose_kernel(kernel), curve, epsilon, truncation="smooth")
    tb = np.abs(apply_sio(m, b))
    ttb = np.abs(apply_sio(mt, b))
    in_b0 = np.abs(params - center) <= radius
    wloc = curve.weights[in_b0]
    denom = float(np.sum(wloc))
    avg = float(np.sum(tb[in_b0] * wloc) / denom)
    avg_t = float(np.sum(ttb[in_b0] * wloc) / denom)
    return avg, avg_t


def byd_annulus_check(
    tree_region: TreeRegionData,
    params: np.ndarray,
    x_idx: int,
    x0_idx: int,
    ball_radius: float,
) -> dict:
    """Structure of the sharp D-truncation (proof of the GSK stability lemma).

    For x, x0 in the ball B(center, ball_radius), the points y outside 2B where
    exactly one of the indicators 1{D(x,y) <= |x-y|}, 1{D(x0,y) <= |x0-y|}
    holds split into B1 (covered by an annulus around x0) and B2 (around x);
    returns the measured radius ratios (<= 100 by the lemma).
    """
    params = np.asarray(params, dtype=float)
    x, x0 = params[x_idx], params[x0_idx]
    center = 0.5 * (x + x0)
    outside = np.abs(params - center) > 2.0 * ball_radius
    y = params[outside]
    dvals = np.asarray(tree_region.d_fn(params))
    dy = dvals[outside]
    Dx = 0.25 * (dvals[x_idx] + dy)
    Dx0 = 0.25 * (dvals[x0_idx] + dy)
    on_x = np.abs(x - y) >= Dx
    on_x0 = np.abs(x0 - y) >= Dx0
    b1 = on_x0 & ~on_x
    b2 = on_x & ~on_x0
    out = {"b1_ratio": 1.0, "b2_ratio": 1.0, "b1_count": int(b1.sum()), "b2_count": int(b2.sum())}
    if np.any(b1):
        r = np.abs(y[b1] - x0)
        out["b1_ratio"] = float(np.max(r) / np.min(r))
    if np.any(b2):
        r = np.abs(y[b2] - x)
        out["b2_ratio"] = float(np.max(r) / np.min(r))
    return out
