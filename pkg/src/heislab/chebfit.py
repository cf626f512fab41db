"""Best affine minimax (Chebyshev) fit of discrete 1D data.

The sup-error of the best fit with slope a is (max - min)/2 of the residuals
f - a x, a convex piecewise-linear function of a; golden-section search over
the slope bracket followed by the midrange offset gives the exact minimax
pair to search tolerance.
"""

from __future__ import annotations

import numpy as np

__all__ = ["minimax_affine"]

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def _halfspread(a: float, x: np.ndarray, f: np.ndarray) -> float:
    r = f - a * x
    return 0.5 * (float(np.max(r)) - float(np.min(r)))


def minimax_affine(x, f, tol: float = 1e-13) -> tuple[float, float, float]:
    """Return (a, b, err) minimizing max |f_i - (a x_i + b)|.

    Exact up to the golden-section tolerance on the slope; for fewer than two
    distinct abscissae the fit is the constant midrange.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    if x.size == 0:
        raise ValueError("empty data")
    if x.size == 1 or np.ptp(x) == 0.0:
        b = 0.5 * (float(np.max(f)) + float(np.min(f)))
        return 0.0, b, float(np.max(np.abs(f - b)))

    # an optimal slope lies within the range of data slopes
    span = np.ptp(x)
    crude = (np.max(f) - np.min(f)) / span
    lo, hi = -2.0 * crude - 1.0, 2.0 * crude + 1.0

    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = _halfspread(c, x, f), _halfspread(d, x, f)
    scale = max(1.0, abs(lo), abs(hi))
    while hi - lo > tol * scale:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = _halfspread(c, x, f)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = _halfspread(d, x, f)
    a = 0.5 * (lo + hi)
    r = f - a * x
    b = 0.5 * (float(np.max(r)) + float(np.min(r)))
    return float(a), float(b), float(np.max(np.abs(f - a * x - b)))
