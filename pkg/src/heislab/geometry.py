"""Exact arithmetic and geometry of the first Heisenberg group.

Points live in R^3 with the non-abelian product

    (x, y, t) * (x', y', t') = (x + x', y + y', t + t' + (x y' - x' y) / 2),

parabolic dilations delta_r(x, y, t) = (r x, r y, r^2 t), and two homogeneous
norms: the max norm  max{ sqrt(x^2 + y^2), sqrt|t| }  used for all metric
statements, and the Koranyi norm  ((x^2 + y^2)^2 + 16 t^2)^(1/4)  used inside
kernel formulas.  Every function here accepts a single point (``HPoint`` or
length-3 sequence) or an ndarray of shape (..., 3) and broadcasts.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "HPoint",
    "NormKind",
    "HorizontalSubgroup",
    "origin",
    "mul",
    "inverse",
    "dilate",
    "rotate",
    "norm",
    "dist",
    "project",
    "cone_contains",
]


class HPoint(NamedTuple):
    """A point (x, y, t) of the Heisenberg group."""

    x: float
    y: float
    t: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


origin = HPoint(0.0, 0.0, 0.0)


class NormKind(enum.Enum):
    MAX = "max"
    KORANYI = "koranyi"


@dataclass(frozen=True)
class HorizontalSubgroup:
    """The horizontal line {(r cos(theta), r sin(theta), 0)} through 0.

    theta is normalized to [0, pi); the complementary vertical subgroup W is
    spanned by the orthogonal horizontal direction L and the t-axis T.
    """

    theta: float

    def __post_init__(self):
        th = float(self.theta) % math.pi
        object.__setattr__(self, "theta", th)

    def direction(self) -> tuple[float, float]:
        return math.cos(self.theta), math.sin(self.theta)


def _as_points(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.shape[-1] != 3:
        raise ValueError(f"expected points of shape (..., 3), got {a.shape}")
    return a


def _wrap(out: np.ndarray, *inputs):
    if out.ndim == 1 and all(not isinstance(q, np.ndarray) or q.ndim == 1 for q in inputs):
        return HPoint(float(out[0]), float(out[1]), float(out[2]))
    return out


def mul(p, q):
    """Group product p * q."""
    a, b = _as_points(p), _as_points(q)
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=float)
    out[..., 0] = a[..., 0] + b[..., 0]
    out[..., 1] = a[..., 1] + b[..., 1]
    out[..., 2] = a[..., 2] + b[..., 2] + 0.5 * (
        a[..., 0] * b[..., 1] - b[..., 0] * a[..., 1]
    )
    return _wrap(out, p, q)


def inverse(p):
    """Group inverse; mul(p, inverse(p)) is exactly the origin."""
    a = _as_points(p)
    return _wrap(-a, p)


def dilate(lam, p):
    """Parabolic dilation delta_lam; a group automorphism for lam > 0."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("dilation parameter must be positive")
    a = _as_points(p)
    out = np.empty(np.broadcast_shapes(lam.shape + (1,) if lam.ndim else (1,), a.shape), dtype=float)
    out[..., 0] = lam * a[..., 0]
    out[..., 1] = lam * a[..., 1]
    out[..., 2] = lam**2 * a[..., 2]
    return _wrap(out, p)


def rotate(theta: float, p):
    """Rotation about the t-axis, a group automorphism and d-isometry."""
    a = _as_points(p)
    c, s = math.cos(theta), math.sin(theta)
    out = np.empty_like(a)
    out[..., 0] = c * a[..., 0] - s * a[..., 1]
    out[..., 1] = s * a[..., 0] + c * a[..., 1]
    out[..., 2] = a[..., 2]
    return _wrap(out, p)


def norm(p, kind: NormKind = NormKind.MAX):
    """Homogeneous norm of p. Vanishes only at the origin."""
    a = _as_points(p)
    z2 = a[..., 0] ** 2 + a[..., 1] ** 2
    if kind is NormKind.MAX:
        out = np.maximum(np.sqrt(z2), np.sqrt(np.abs(a[..., 2])))
    elif kind is NormKind.KORANYI:
        out = (z2**2 + 16.0 * a[..., 2] ** 2) ** 0.25
    else:  # pragma: no cover
        raise ValueError(f"unknown norm kind {kind!r}")
    return float(out) if out.ndim == 0 else out


def dist(p, q, kind: NormKind = NormKind.MAX):
    """Left-invariant distance d(p, q) = ||q^-1 * p||."""
    return norm(mul(inverse(q), p), kind)


def _project_theta0(a: np.ndarray, target: str) -> np.ndarray:
    x, y, t = a[..., 0], a[..., 1], a[..., 2]
    out = np.zeros_like(a)
    if target == "V":
        out[..., 0] = x
    elif target == "L":
        out[..., 1] = y
    elif target == "W":
        out[..., 1] = y
        out[..., 2] = t - 0.5 * x * y
    elif target == "T":
        out[..., 2] = t - 0.5 * x * y
    else:
        raise ValueError(f"projection target must be one of V, L, W, T, got {target!r}")
    return out


def project(p, sub: HorizontalSubgroup, target: str):
    """Group projection onto V, L, W or T for the splitting p = pi_V(p) * pi_W(p).

    For theta = 0 (V = x-axis, W = yt-plane) the formulas are
    pi_V = (x,0,0), pi_L = (0,y,0), pi_W = (0,y,t-xy/2), pi_T = (0,0,t-xy/2);
    a general subgroup is handled by conjugating with the rotation about the
    t-axis, which is a group automorphism.
    """
    a = _as_points(p)
    th = sub.theta
    if th == 0.0:
        out = _project_theta0(a, target)
    else:
        out = rotate(th, _project_theta0(np.asarray(rotate(-th, a)), target))
        out = np.asarray(out)
    return _wrap(out, p)


def cone_contains(p, sub: HorizontalSubgroup, alpha: float):
    """Membership in the cone C_V(alpha) = { ||pi_V(p)|| <= alpha ||pi_W(p)|| }.

    Norms are max norms.  alpha must be nonnegative.
    """
    if alpha < 0:
        raise ValueError("cone aperture alpha must be nonnegative")
    nv = norm(project(p, sub, "V"))
    nw = norm(project(p, sub, "W"))
    out = np.asarray(nv) <= alpha * np.asarray(nw)
    return bool(out) if out.ndim == 0 else out
