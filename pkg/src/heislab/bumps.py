"""Shared smooth bump profiles.

One fixed C^infty compactly supported even profile backs every cutoff in the
package: the smooth step `smoothstep`, the plateau bump `plateau` (1 on
[-1/2, 1/2], 0 outside [-1, 1]), the unit-mass mollifier `mollifier`, the T1
test profile `t1_profile` (1 on 2B, 0 outside 3B), and the dilation-invariant
weight `eta_log` supported in [1/4, 1] with integral 1 against dt/t.
Normalization constants are computed numerically once and cached.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.integrate import quad

__all__ = ["smoothstep", "plateau", "mollifier", "t1_profile", "eta_log"]


def _f(s: np.ndarray) -> np.ndarray:
    """exp(-1/s) for s > 0, zero otherwise; C^infty on R."""
    out = np.zeros_like(s)
    pos = s > 0.0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smoothstep(s):
    """C^infty decreasing step: 1 for s <= 0, 0 for s >= 1.

    smoothstep(s) = f(1-s) / (f(s) + f(1-s)) with f(s) = exp(-1/s) 1_{s>0}.
    """
    s = np.asarray(s, dtype=float)
    a = _f(1.0 - s)
    b = _f(s)
    denom = a + b
    out = np.where(denom > 0.0, a / np.where(denom > 0.0, denom, 1.0), (s <= 0.0) * 1.0)
    return float(out) if out.ndim == 0 else out


def plateau(u):
    """Even C^infty bump: 1 on [-1/2, 1/2], 0 outside [-1, 1]."""
    u = np.abs(np.asarray(u, dtype=float))
    return smoothstep(2.0 * (u - 0.5))


def _bump(u: np.ndarray) -> np.ndarray:
    """Unnormalized exp(-1/(1-u^2)) bump on (-1, 1)."""
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
    return out


@lru_cache(maxsize=1)
def _bump_mass() -> float:
    val, _ = quad(lambda u: float(np.exp(-1.0 / (1.0 - u * u))), -1.0, 1.0, epsabs=1e-14)
    return val


def mollifier(u):
    """Even C^infty bump with unit integral, supported in [-1, 1]."""
    u = np.asarray(u, dtype=float)
    out = _bump(u) / _bump_mass()
    return float(out) if out.ndim == 0 else out


def t1_profile(u):
    """Profile b(|y - c|/r): 1 for u <= 2, 0 for u >= 3 (1_{2B} <= b <= 1_{3B})."""
    u = np.asarray(u, dtype=float)
    return smoothstep(u - 2.0)


@lru_cache(maxsize=1)
def _eta_log_norm() -> float:
    val, _ = quad(
        lambda t: float(np.exp(-1.0 / (1.0 - ((t - 0.625) / 0.375) ** 2))) / t
        if abs((t - 0.625) / 0.375) < 1.0
        else 0.0,
        0.25,
        1.0,
        epsabs=1e-14,
    )
    return val


def eta_log(t):
    """Bump supported in [1/4, 1], normalized so that its integral against dt/t is 1."""
    t = np.asarray(t, dtype=float)
    out = _bump((t - 0.625) / 0.375) / _eta_log_norm()
    return float(out) if out.ndim == 0 else out
