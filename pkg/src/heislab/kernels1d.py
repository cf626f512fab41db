"""Calderon commutators and exponential kernels on the real line.

The building blocks are an odd convolution kernel kappa with |kappa(u)| <=
1/|u| and |kappa'(u)| <= 1/u^2 (certified by sampling, after normalization),
the quadratic denominator q(s) = s^2 or s|s|, a Lipschitz function A and a
tame map B.  The difference factors are

    DA(x,y) = (A(x) - A(y)) / (x - y)
    DB(x,y) = (B2(x) - B2(y) - [B1(x) + B1(y)](x - y)/2) / q(x - y)

giving the commutator  C_{m,n} = kappa DA^m DB^n  and the exponential kernel
K_{A,B} = kappa exp(2 pi i [DA + DB]), optionally multiplied by extra factors
D_{A0}, D_{B0} of the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bumps import plateau
from .sampled import SampledFn
from .tame import TameLinear, TameMapSampled

__all__ = ["Kernel1D", "KappaSpec", "commutator_eval", "exp_kernel_eval", "taylor_partial_sum"]


@dataclass(frozen=True)
class KappaSpec:
    """Odd convolution kernel: 1/u, a smoothly truncated 1/u, or custom samples."""

    tag: str  # "reciprocal" | "smoothed" | "custom"
    eps0: float = 0.0
    samples: SampledFn | None = None

    def __post_init__(self):
        if self.tag not in ("reciprocal", "smoothed", "custom"):
            raise ValueError(f"unknown kappa tag {self.tag!r}")
        if self.tag == "smoothed" and self.eps0 <= 0:
            raise ValueError("smoothed kappa needs eps0 > 0")
        if self.tag == "custom" and self.samples is None:
            raise ValueError("custom kappa needs samples")

    def raw(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.tag == "reciprocal":
            with np.errstate(divide="ignore"):
                return np.where(u != 0.0, 1.0 / np.where(u != 0.0, u, 1.0), 0.0)
        if self.tag == "smoothed":
            cut = 1.0 - np.asarray(plateau(u / self.eps0))
            with np.errstate(divide="ignore"):
                return np.where(u != 0.0, cut / np.where(u != 0.0, u, 1.0), 0.0)
        vals = np.interp(np.abs(u), self.samples.grid, self.samples.values)
        return np.sign(u) * vals

    def normalization(self) -> float:
        """Scale making sup |u kappa| <= 1 and sup |u^2 kappa'| <= 1 on samples."""
        u = np.concatenate([-np.geomspace(1e-3, 1e3, 2001), np.geomspace(1e-3, 1e3, 2001)])
        v = self.raw(u)
        du = 1e-6 * np.abs(u)
        deriv = (self.raw(u + du) - self.raw(u - du)) / (2 * du)
        c = max(float(np.max(np.abs(u * v))), float(np.max(np.abs(u * u * deriv))))
        return max(c, 1.0)


@dataclass
class Kernel1D:
    """A commutator/exponential kernel specification."""

    kappa: KappaSpec
    q_fn: str = "square"  # "square" (s^2) | "signed_square" (s|s|)
    A: SampledFn | None = None
    B: TameMapSampled | TameLinear | None = None
    m: int = 0
    n: int = 0
    factor_A0: SampledFn | None = None
    factor_B0: TameMapSampled | TameLinear | None = None
    _norm: float = field(default=0.0, repr=False)

    def __post_init__(self):
        if self.q_fn not in ("square", "signed_square"):
            raise ValueError("q_fn must be 'square' or 'signed_square'")
        if self.m < 0 or self.n < 0:
            raise ValueError("commutator indices must be nonnegative")
        self._norm = self.kappa.normalization()

    def kappa_at(self, u) -> np.ndarray:
        return self.kappa.raw(np.asarray(u, dtype=float)) / self._norm

    def q_at(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return s * s if self.q_fn == "square" else s * np.abs(s)

    def da(self, x, y) -> np.ndarray:
        if self.A is None:
            return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y)))
        return _difference_quotient(self.A, x, y)

    def db(self, x, y) -> np.ndarray:
        if self.B is None:
            return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y)))
        return _tame_quotient(self.B, x, y, self.q_at)

    def extra_factors(self, x, y) -> np.ndarray:
        out = np.ones(np.broadcast_shapes(np.shape(x), np.shape(y)))
        if self.factor_A0 is not None:
            out = out * _difference_quotient(self.factor_A0, x, y)
        if self.factor_B0 is not None:
            out = out * _tame_quotient(self.factor_B0, x, y, self.q_at)
        return out

    def phase(self, x, y) -> np.ndarray:
        return self.da(x, y) + self.db(x, y)


def _difference_quotient(a_fn: SampledFn, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - y
    _check_offdiag(dx)
    return (np.asarray(a_fn(x)) - np.asarray(a_fn(y))) / dx


def _tame_quotient(bmap, x, y, q_at) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - y
    _check_offdiag(dx)
    if isinstance(bmap, TameLinear):
        # B2(x)-B2(y) - (B1(x)+B1(y))(x-y)/2 vanishes identically
        return np.zeros(np.broadcast_shapes(x.shape, y.shape))
    num = bmap.b2_at(x) - bmap.b2_at(y) - 0.5 * (bmap.b1_at(x) + bmap.b1_at(y)) * dx
    return num / q_at(dx)


def _check_offdiag(dx: np.ndarray) -> None:
    if np.any(np.asarray(dx) == 0.0):
        raise ValueError("kernel evaluated on the diagonal")


def commutator_eval(k1d: Kernel1D, x, y) -> np.ndarray | float:
    """C_{m,n}(x, y) = kappa(x-y) DA^m DB^n (D_{A0}) (D_{B0})."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - y
    _check_offdiag(dx)
    out = k1d.kappa_at(dx)
    if k1d.m:
        out = out * k1d.da(x, y) ** k1d.m
    if k1d.n:
        out = out * k1d.db(x, y) ** k1d.n
    out = out * k1d.extra_factors(x, y)
    return float(out) if out.ndim == 0 else out


def exp_kernel_eval(k1d: Kernel1D, x, y) -> np.ndarray | complex:
    """K_{A,B}(x, y) = kappa(x-y) exp(2 pi i [DA + DB]) (D_{A0}) (D_{B0})."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - y
    _check_offdiag(dx)
    out = k1d.kappa_at(dx) * np.exp(2j * np.pi * k1d.phase(x, y)) * k1d.extra_factors(x, y)
    return complex(out) if out.ndim == 0 else out


def taylor_partial_sum(k1d: Kernel1D, x, y, order: int) -> np.ndarray | complex:
    """sum_{n <= order} (2 pi i)^n S_n / n! with S_n = kappa (DA + DB)^n."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    phase = k1d.phase(x, y)
    kap = k1d.kappa_at(x - y) * k1d.extra_factors(x, y)
    out = np.zeros(np.broadcast_shapes(x.shape, y.shape), dtype=complex)
    term = np.ones_like(out)
    for n in range(order + 1):
        if n > 0:
            term = term * (2j * np.pi * phase) / n
        out = out + term
    out = kap * out
    return complex(out) if out.ndim == 0 else out
