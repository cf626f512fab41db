"""Sampled real functions on 1D grids, shared by several modules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SampledFn", "symmetric_diff", "cumtrapz"]


@dataclass
class SampledFn:
    """A function known through its values on a sorted grid.

    Evaluation between nodes is linear interpolation; outside the grid the
    boundary value is held (no extrapolation surprises).
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.ndim != 1 or self.grid.shape != self.values.shape:
            raise ValueError("grid and values must be 1D arrays of equal length")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")

    def __call__(self, x):
        out = np.interp(np.asarray(x, dtype=float), self.grid, self.values)
        return float(out) if out.ndim == 0 else out

    @property
    def spacing(self) -> float:
        return float(np.max(np.diff(self.grid)))

    def lipschitz_constant(self) -> float:
        """Largest slope between consecutive nodes (equals the sup over all pairs)."""
        slopes = np.diff(self.values) / np.diff(self.grid)
        return float(np.max(np.abs(slopes))) if slopes.size else 0.0

    def restrict(self, a: float, b: float) -> "SampledFn":
        mask = (self.grid >= a - 1e-12) & (self.grid <= b + 1e-12)
        if not np.any(mask):
            raise ValueError(f"no grid points in [{a}, {b}]")
        return SampledFn(self.grid[mask], self.values[mask])

    def scale(self, c: float) -> "SampledFn":
        return SampledFn(self.grid, c * self.values)


def symmetric_diff(grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Symmetric finite differences, one-sided at the endpoints."""
    return np.gradient(np.asarray(values, dtype=float), np.asarray(grid, dtype=float))


def cumtrapz(grid: np.ndarray, values: np.ndarray, anchor: int = 0) -> np.ndarray:
    """Cumulative trapezoid integral vanishing at grid[anchor]."""
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    steps = 0.5 * (values[1:] + values[:-1]) * np.diff(grid)
    out = np.concatenate([[0.0], np.cumsum(steps)])
    return out - out[anchor]
