"""Tame maps on the line: constants, extension, rescaling, iLG conversion.

A pair B = (B1, B2) is L-tame when

    |(B2(x)-B2(y))/(x-y) - B1(x)| + |(B2(x)-B2(y))/(x-y) - B1(y)| <= L |x-y|

for all x != y; equivalently B1 is ~L-Lipschitz and B2' = B1.  Sampled maps
carry the coupling discretely: B2 is the cumulative trapezoid integral of B1
up to one additive constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sampled import cumtrapz

__all__ = [
    "TameLinear",
    "TameMapSampled",
    "PartialTameData",
    "tameness_constant",
    "one_sided_constant",
    "extend_tame",
    "rescale_tame",
    "tame_from_ilg",
    "intrinsic_lipschitz_constant",
]

_PAIR_CHUNK = 512


@dataclass(frozen=True)
class TameLinear:
    """Tame-affine map x -> (a x + c, a x^2/2 + c x + b).

    Its two-sided tameness constant is exactly |a|; the a = 0 members
    (c, c x + b) are the 0-tame maps whose addition leaves tameness
    constants unchanged.
    """

    a: float
    b: float = 0.0
    c: float = 0.0

    def b1(self, x):
        return self.a * np.asarray(x, dtype=float) + self.c

    def b2(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.a * x * x + self.c * x + self.b

    def sample(self, grid) -> "TameMapSampled":
        grid = np.asarray(grid, dtype=float)
        return TameMapSampled(grid, self.b1(grid), self.b2(grid), declared_constant=abs(self.a))

    def scale(self, s: float) -> "TameLinear":
        return TameLinear(s * self.a, s * self.b, s * self.c)


def _pairwise_tame_max(x: np.ndarray, b1: np.ndarray, b2: np.ndarray, one_sided: bool) -> float:
    """Max over distinct pairs of the (one- or two-sided) tame quotient."""
    n = x.size
    if n < 2:
        raise ValueError("need at least 2 points")
    best = 0.0
    for i0 in range(0, n, _PAIR_CHUNK):
        i1 = min(i0 + _PAIR_CHUNK, n)
        dx = x[i0:i1, None] - x[None, :]
        mask = dx != 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            quot = (b2[i0:i1, None] - b2[None, :]) / dx
            t_x = np.abs(quot - b1[i0:i1, None])
            if one_sided:
                val = t_x
            else:
                val = t_x + np.abs(quot - b1[None, :])
            ratio = np.where(mask, val / np.abs(dx), 0.0)
        best = max(best, float(np.max(ratio)))
    return best


@dataclass
class TameMapSampled:
    """A tame map on a uniform grid with trapezoid-coupled components.

    Invariants checked at construction: uniform spacing, per-step deviation of
    b2 from the cumulative trapezoid of b1 at most h^2 * declared_constant
    (plus a float slack), and measured tameness <= declared * (1 + 1e-6).
    """

    grid: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    declared_constant: float
    validate: bool = True
    _measured: float | None = field(default=None, repr=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.b1 = np.asarray(self.b1, dtype=float)
        self.b2 = np.asarray(self.b2, dtype=float)
        if not (self.grid.shape == self.b1.shape == self.b2.shape) or self.grid.ndim != 1:
            raise ValueError("grid, b1, b2 must be 1D arrays of equal length")
        steps = np.diff(self.grid)
        if steps.size == 0 or np.any(steps <= 0):
            raise ValueError("grid must be strictly increasing with >= 2 points")
        if np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
            raise ValueError("grid must be uniform")
        if self.declared_constant < 0:
            raise ValueError("declared constant must be nonnegative")
        if self.validate:
            h = float(steps[0])
            coupling = np.diff(self.b2) - 0.5 * (self.b1[1:] + self.b1[:-1]) * steps
            scale = max(1.0, float(np.max(np.abs(self.b2))), float(np.max(np.abs(self.b1))))
            allowed = h * h * self.declared_constant + 1e-12 * scale
            worst = float(np.max(np.abs(coupling)))
            if worst > allowed:
                raise ValueError(
                    f"b2 deviates from the trapezoid integral of b1 by {worst:.3e} "
                    f"> h^2 N = {allowed:.3e}"
                )
            measured = self.measured_constant()
            # the double division by |x - y| amplifies ulp-level errors in the
            # quotient to ~eps * scale / h^2; allow that floor
            slack = 64.0 * np.finfo(float).eps * scale / (h * h)
            if measured > self.declared_constant * (1.0 + 1e-6) + slack:
                raise ValueError(
                    f"measured tameness {measured:.6g} exceeds declared "
                    f"{self.declared_constant:.6g}"
                )

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @classmethod
    def from_b1(
        cls,
        grid,
        b1,
        declared_constant: float | None = None,
        b2_offset: float = 0.0,
    ) -> "TameMapSampled":
        """Couple b2 as the cumulative trapezoid integral of b1."""
        grid = np.asarray(grid, dtype=float)
        b1 = np.asarray(b1, dtype=float)
        b2 = cumtrapz(grid, b1) + b2_offset
        if declared_constant is None:
            declared_constant = _pairwise_tame_max(grid, b1, b2, one_sided=False)
        return cls(grid, b1, b2, declared_constant)

    def measured_constant(self) -> float:
        if self._measured is None:
            self._measured = _pairwise_tame_max(self.grid, self.b1, self.b2, one_sided=False)
        return self._measured

    def b1_at(self, x):
        out = np.interp(np.asarray(x, dtype=float), self.grid, self.b1)
        return float(out) if out.ndim == 0 else out

    def b2_at(self, x):
        out = np.interp(np.asarray(x, dtype=float), self.grid, self.b2)
        return float(out) if out.ndim == 0 else out

    def add_linear(self, lin: TameLinear) -> "TameMapSampled":
        return TameMapSampled(
            self.grid,
            self.b1 + lin.b1(self.grid),
            self.b2 + lin.b2(self.grid),
            self.declared_constant,
            validate=False,
            _measured=self._measured,
        )

    def scale(self, s: float) -> "TameMapSampled":
        return TameMapSampled(
            self.grid,
            s * self.b1,
            s * self.b2,
            abs(s) * self.declared_constant,
            validate=False,
            _measured=None if self._measured is None else abs(s) * self._measured,
        )


@dataclass
class PartialTameData:
    """Tame data on a finite set E of points."""

    points: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.phi1 = np.asarray(self.phi1, dtype=float)
        self.phi2 = np.asarray(self.phi2, dtype=float)
        if not (self.points.shape == self.phi1.shape == self.phi2.shape):
            raise ValueError("points, phi1, phi2 must have equal shapes")
        order = np.argsort(self.points)
        self.points = self.points[order]
        self.phi1 = self.phi1[order]
        self.phi2 = self.phi2[order]
        if self.points.size >= 2 and np.min(np.diff(self.points)) <= 0:
            raise ValueError("points must be distinct")


def tameness_constant(data) -> float:
    """Two-sided tameness constant, maximized over all distinct sample pairs."""
    if isinstance(data, TameMapSampled):
        return data.measured_constant()
    if isinstance(data, PartialTameData):
        return _pairwise_tame_max(data.points, data.phi1, data.phi2, one_sided=False)
    raise TypeError(f"unsupported data type {type(data).__name__}")


def one_sided_constant(data) -> float:
    """One-sided tameness constant; the two-sided one is at most twice it."""
    if isinstance(data, TameMapSampled):
        return _pairwise_tame_max(data.grid, data.b1, data.b2, one_sided=True)
    if isinstance(data, PartialTameData):
        return _pairwise_tame_max(data.points, data.phi1, data.phi2, one_sided=True)
    raise TypeError(f"unsupported data type {type(data).__name__}")


def _lipschitz_constant(x: np.ndarray, v: np.ndarray) -> float:
    if x.size < 2:
        return 0.0
    best = 0.0
    for i0 in range(0, x.size, _PAIR_CHUNK):
        i1 = min(i0 + _PAIR_CHUNK, x.size)
        dx = x[i0:i1, None] - x[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(dx != 0.0, np.abs(v[i0:i1, None] - v[None, :]) / np.abs(dx), 0.0)
        best = max(best, float(np.max(r)))
    return best


def extend_tame(data: PartialTameData, out_grid) -> TameMapSampled:
    """Extend tame data from E to a uniform grid; the output is 18L-tame.

    Per bounded gap [x, y] between consecutive points of E the construction
    normalizes the data (translate, subtract a tame-affine map), takes the
    linear candidate for phi1, fixes the integral discrepancy with the
    triangle correction c * eta0, eta0(s) = 6 L min(s, y - s), |c| <= 1, and
    integrates exactly for phi2.  Unbounded components get constant phi1,
    truncated at the grid ends.  E is snapped to the nearest grid node
    (tolerance h/2) and the data values are kept exactly there.
    """
    grid = np.asarray(out_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("out_grid must be a 1D grid with >= 2 points")
    h = float(grid[1] - grid[0])
    if np.max(np.abs(np.diff(grid) - h)) > 1e-9 * h:
        raise ValueError("out_grid must be uniform")
    E = data.points
    if E[0] < grid[0] - h / 2 or E[-1] > grid[-1] + h / 2:
        raise ValueError("out_grid does not cover E")

    idx = np.clip(np.round((E - grid[0]) / h).astype(int), 0, grid.size - 1)
    if np.max(np.abs(grid[idx] - E)) > h / 2 + 1e-12 * max(1.0, abs(h)):
        raise ValueError("a point of E is farther than h/2 from the grid")
    if np.unique(idx).size != idx.size:
        raise ValueError("two points of E snap to the same grid node")

    nodes = grid[idx]
    snapped = PartialTameData(nodes, data.phi1.copy(), data.phi2.copy())
    L_two = tameness_constant(snapped) if nodes.size >= 2 else 0.0
    L_one = one_sided_constant(snapped) if nodes.size >= 2 else 0.0
    L_cons = max(L_one, _lipschitz_constant(snapped.points, snapped.phi1))

    phi1 = np.empty_like(grid)
    phi2 = np.empty_like(grid)

    # unbounded components: constant phi1, exact linear phi2
    left = grid <= nodes[0]
    phi1[left] = snapped.phi1[0]
    phi2[left] = snapped.phi2[0] + snapped.phi1[0] * (grid[left] - nodes[0])
    right = grid >= nodes[-1]
    phi1[right] = snapped.phi1[-1]
    phi2[right] = snapped.phi2[-1] + snapped.phi1[-1] * (grid[right] - nodes[-1])

    for i in range(nodes.size - 1):
        xl, xr = nodes[i], nodes[i + 1]
        g = xr - xl
        sel = (grid > xl) & (grid < xr)
        u = grid[sel] - xl
        a, b = snapped.phi1[i], snapped.phi2[i]
        # normalized endpoint data after subtracting the tame-affine map (a, a u + b)
        f1 = snapped.phi1[i + 1] - a
        f2 = snapped.phi2[i + 1] - (a * g + b)
        disc = f2 - 0.5 * f1 * g
        if L_cons > 0.0:
            c = disc / (1.5 * L_cons * g * g)
        else:
            if abs(disc) > 1e-12 * max(1.0, abs(f2)):
                raise ValueError("inconsistent data: zero tame constant but nonzero discrepancy")
            c = 0.0
        if abs(c) > 1.0 + 1e-9:
            raise ValueError(f"triangle coefficient |c| = {abs(c):.3g} > 1; data not tame")
        slope = 6.0 * L_cons * c
        tri = slope * np.minimum(u, g - u)
        # integral of the triangle: slope * (u^2/2) rising, mirrored falling
        tri_int = np.where(
            u <= g / 2.0,
            0.5 * slope * u * u,
            0.25 * slope * g * g - 0.5 * slope * (g - u) ** 2,
        )
        phi1[sel] = f1 * u / g + tri + a
        phi2[sel] = f1 * u * u / (2.0 * g) + tri_int + a * u + b
    phi1[idx] = snapped.phi1
    phi2[idx] = snapped.phi2

    declared = 18.0 * L_two if nodes.size >= 2 else 0.0
    return TameMapSampled(grid, phi1, phi2, declared_constant=declared)


def rescale_tame(tmap: TameMapSampled, r: float) -> TameMapSampled:
    """Parabolic rescaling B^r(x) = (B1(rx)/r, B2(rx)/r^2); preserves tameness."""
    if r <= 0:
        raise ValueError("rescaling factor must be positive")
    return TameMapSampled(
        tmap.grid / r,
        tmap.b1 / r,
        tmap.b2 / r**2,
        tmap.declared_constant,
        validate=False,
    )


def intrinsic_lipschitz_constant(grid, phi1, phi2) -> float:
    """Smallest L with ||pi_W(Phi(v')^-1 Phi(v))|| <= L ||pi_V(...)|| on grid pairs.

    Coordinates of the V = x-axis model: the vertical part of the graph
    difference is (phi1(v)-phi1(v'), phi2(v)-phi2(v') + (phi1(v)+phi1(v'))
    (v-v')/2) and the horizontal part is v - v'.
    """
    x = np.asarray(grid, dtype=float)
    p1 = np.asarray(phi1, dtype=float)
    p2 = np.asarray(phi2, dtype=float)
    best = 0.0
    for i0 in range(0, x.size, _PAIR_CHUNK):
        i1 = min(i0 + _PAIR_CHUNK, x.size)
        dv = x[i0:i1, None] - x[None, :]
        mask = dv != 0.0
        d1 = p1[i0:i1, None] - p1[None, :]
        tpart = (p2[i0:i1, None] - p2[None, :]) + 0.5 * (p1[i0:i1, None] + p1[None, :]) * dv
        wnorm = np.maximum(np.abs(d1), np.sqrt(np.abs(tpart)))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(mask, wnorm / np.abs(dv), 0.0)
        best = max(best, float(np.max(ratio)))
    return best


def tame_from_ilg(grid, phi1, phi2) -> TameMapSampled:
    """Convert intrinsic Lipschitz components (phi1, phi2) to the tame pair (phi1, -phi2).

    The declared constant is 2 L^2 for the measured intrinsic constant L; the
    conversion verifies that phi1 is L-Lipschitz and that the measured
    tameness does not exceed the declared value.
    """
    grid = np.asarray(grid, dtype=float)
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    L = intrinsic_lipschitz_constant(grid, phi1, phi2)
    declared = 2.0 * L * L
    lip1 = _lipschitz_constant(grid, phi1)
    if lip1 > L * (1.0 + 1e-6) + 1e-12:
        raise ValueError(f"phi1 Lipschitz constant {lip1:.6g} exceeds intrinsic L = {L:.6g}")
    out = TameMapSampled(grid, phi1, -phi2, declared_constant=declared, validate=False)
    measured = out.measured_constant()
    if measured > declared * (1.0 + 1e-6) + 1e-12:
        raise ValueError(
            f"measured tame constant {measured:.6g} exceeds declared 2L^2 = {declared:.6g}"
        )
    return out
