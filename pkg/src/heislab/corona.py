"""Dyadic trees and corona decompositions for Lipschitz functions and tame maps.

The Lipschitz decomposition is a stopping-time construction on the dyadic
grid of an integer-endpoint window: trees grow from maximal unassigned cubes;
a cube joins the tree of top slope sigma0 while its best-affine deviation
beta(2Q) stays <= eta/64 and its mollified slope stays within eta/4 of
sigma0.  Bad cubes are exactly those with beta(2Q) > eta/64.  Tree
approximants interpolate the function affinely across the minimal intervals
and continue with slope sigma0 outside the top.  Every claimed property is
enforced by the auditor, not assumed.

The tame decomposition runs the Lipschitz one on B1/N at parameter
delta = min(eta^2/5, eta/17), restores the integral coupling on each minimal
interval S with a triangle correction of slope 16 delta supported on the
middle half of S, integrates for the second component, and rescales by N.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .chebfit import minimax_affine
from .bumps import mollifier
from .sampled import SampledFn, cumtrapz
from .tame import TameLinear, TameMapSampled

__all__ = [
    "DyadicInterval",
    "DyadicTree",
    "TreeApprox",
    "CoronaDecomposition",
    "CoronaAuditError",
    "TreeRegionData",
    "lipschitz_corona",
    "tame_corona",
    "carleson_sum",
    "max_carleson",
    "audit_lipschitz_corona",
    "audit_tame_corona",
    "tree_regions",
    "reparam_rotated_graph",
    "decomposition_to_json",
]

TOP_ENLARGEMENT = 11.0  # factor from the standard 2Q -> 11Q enlargement trick


class CoronaAuditError(AssertionError):
    """An audited corona property failed; carries the offending (Q, s)."""

    def __init__(self, message, interval=None, point=None):
        super().__init__(message)
        self.interval = interval
        self.point = point


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """The interval [k 2^-j, (k+1) 2^-j) at level j."""

    j: int
    k: int

    @property
    def length(self) -> float:
        return 2.0 ** (-self.j)

    @property
    def left(self) -> float:
        return self.k * self.length

    @property
    def right(self) -> float:
        return (self.k + 1) * self.length

    @property
    def center(self) -> float:
        return (self.k + 0.5) * self.length

    def parent(self) -> "DyadicInterval":
        return DyadicInterval(self.j - 1, self.k >> 1)

    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        return DyadicInterval(self.j + 1, 2 * self.k), DyadicInterval(self.j + 1, 2 * self.k + 1)

    def sibling(self) -> "DyadicInterval":
        return DyadicInterval(self.j, self.k ^ 1)

    def contains(self, other: "DyadicInterval") -> bool:
        if other.j < self.j:
            return False
        return (other.k >> (other.j - self.j)) == self.k

    def double(self) -> tuple[float, float]:
        """The concentric interval 2Q."""
        return self.left - 0.5 * self.length, self.right + 0.5 * self.length


@dataclass
class DyadicTree:
    """A coherent collection of dyadic intervals with a unique top."""

    top: DyadicInterval
    members: frozenset[DyadicInterval]

    def __post_init__(self):
        self.members = frozenset(self.members)

    def validate(self) -> None:
        if self.top not in self.members:
            raise CoronaAuditError("top interval not a member", self.top)
        for q in self.members:
            if not self.top.contains(q):
                raise CoronaAuditError("(T1) member outside the top", q)
            # (T2) coherence: the whole ancestor chain up to the top is present
            anc = q
            while anc != self.top:
                anc = anc.parent()
                if anc not in self.members:
                    raise CoronaAuditError("(T2) coherence violated", q)
            # (T3) siblings enter together
            if q != self.top and q.sibling() not in self.members:
                raise CoronaAuditError("(T3) sibling missing", q)

    def minimal_intervals(self) -> list[DyadicInterval]:
        out = [
            q
            for q in self.members
            if not all(c in self.members for c in q.children())
        ]
        return sorted(out, key=lambda q: q.left)


@dataclass
class TreeApprox:
    """A tree with its approximant: psi + linear matches the input on the tree."""

    tree: DyadicTree
    psi: SampledFn | TameMapSampled
    linear: TameLinear


@dataclass
class CoronaDecomposition:
    kind: str  # "lipschitz" | "tame"
    eta: float
    depth: int
    window: tuple[float, float]
    grid: np.ndarray
    bad: frozenset[DyadicInterval]
    forest: list[TreeApprox]
    stats: dict = field(default_factory=dict)

    def all_intervals(self) -> list[DyadicInterval]:
        a, b = self.window
        out = []
        for j in range(self.depth + 1):
            out.extend(
                DyadicInterval(j, k) for k in range(int(a * 2**j), int(b * 2**j))
            )
        return out


# ---------------------------------------------------------------------------
# grid helpers


def _window_of(grid: np.ndarray) -> tuple[int, int]:
    a, b = grid[0], grid[-1]
    ia, ib = round(a), round(b)
    if abs(a - ia) > 1e-9 or abs(b - ib) > 1e-9 or ib <= ia:
        raise ValueError("corona grids need integer window endpoints")
    return int(ia), int(ib)


def _grid_layout(grid: np.ndarray, depth: int) -> tuple[int, int, int]:
    """(a, b, oversample): grid spacing must be 2^-depth / oversample, 4 | oversample."""
    a, b = _window_of(grid)
    n = grid.size - 1
    per_leaf = n / ((b - a) * 2**depth)
    oversample = round(per_leaf)
    if abs(per_leaf - oversample) > 1e-9 or oversample < 1:
        raise ValueError("grid spacing must divide the finest dyadic scale")
    if oversample % 4 != 0:
        raise ValueError("need 4 samples per finest interval (half-S alignment)")
    return a, b, oversample


def _index_of(q_left: float, a: int, h: float) -> int:
    return int(round((q_left - a) / h))


# ---------------------------------------------------------------------------
# Lipschitz corona


def _mollified_slope(grid: np.ndarray, values: np.ndarray, center: float, s: float) -> float:
    """P_s(phi')(center): the mollified slope at scale s, edge-renormalized."""
    mids = 0.5 * (grid[1:] + grid[:-1])
    dphi = np.diff(values) / np.diff(grid)
    w = np.asarray(mollifier((center - mids) / s))
    total = float(np.sum(w))
    if total <= 0.0:
        raise ValueError("mollifier support does not meet the grid")
    return float(np.sum(w * dphi) / total)


def _beta_2q(grid: np.ndarray, values: np.ndarray, q: DyadicInterval) -> float:
    """Best-affine sup deviation over 2Q (clipped to the window) / |Q|."""
    lo, hi = q.double()
    mask = (grid >= lo - 1e-12) & (grid <= hi + 1e-12)
    _, _, err = minimax_affine(grid[mask], values[mask])
    return err / q.length


def lipschitz_corona(phi: SampledFn, eta: float, depth: int) -> CoronaDecomposition:
    """Stopping-time corona decomposition of a 1-Lipschitz sampled function.

    Raises ValueError on domain errors and CoronaAuditError if the built
    decomposition fails its own audit.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    grid, values = phi.grid, phi.values
    if phi.lipschitz_constant() > 1.0 + 1e-9:
        raise ValueError("phi must be 1-Lipschitz (measured on the grid)")
    a, b, _ = _grid_layout(grid, depth)

    beta_cut = eta / 64.0
    slope_cut = eta / 4.0

    beta: dict[DyadicInterval, float] = {}
    slope: dict[DyadicInterval, float] = {}
    for j in range(depth + 1):
        for k in range(a * 2**j, b * 2**j):
            q = DyadicInterval(j, k)
            beta[q] = _beta_2q(grid, values, q)
            slope[q] = _mollified_slope(grid, values, q.center, q.length)

    bad = frozenset(q for q in beta if beta[q] > beta_cut)
    assigned: set[DyadicInterval] = set()
    forest_trees: list[DyadicTree] = []
    for j in range(depth + 1):
        for k in range(a * 2**j, b * 2**j):
            seed = DyadicInterval(j, k)
            if seed in bad or seed in assigned:
                continue
            sigma0 = slope[seed]
            members = {seed}
            frontier = [seed]
            while frontier:
                q = frontier.pop()
                if q.j >= depth:
                    continue
                c1, c2 = q.children()
                ok = all(
                    c not in bad and abs(slope[c] - sigma0) <= slope_cut for c in (c1, c2)
                )
                if ok:
                    members.update((c1, c2))
                    frontier.extend((c1, c2))
            assigned.update(members)
            forest_trees.append(DyadicTree(seed, frozenset(members)))

    forest = [_build_lipschitz_approx(t, grid, values, slope[t.top]) for t in forest_trees]
    decomp = CoronaDecomposition(
        kind="lipschitz",
        eta=eta,
        depth=depth,
        window=(a, b),
        grid=grid,
        bad=bad,
        forest=forest,
        stats={"beta_cut": beta_cut, "slope_cut": slope_cut},
    )
    audit_lipschitz_corona(decomp, phi)
    return decomp


def _leaf_mesh(tree: DyadicTree, grid: np.ndarray, a: int) -> np.ndarray:
    """Grid indices of the endpoints of the minimal intervals (a partition)."""
    h = grid[1] - grid[0]
    leaves = tree.minimal_intervals()
    idx = [_index_of(leaves[0].left, a, h)]
    for s in leaves:
        idx.append(_index_of(s.right, a, h))
    return np.asarray(idx, dtype=int)


def _build_lipschitz_approx(
    tree: DyadicTree, grid: np.ndarray, values: np.ndarray, sigma0: float
) -> TreeApprox:
    a = round(grid[0])
    mesh_idx = _leaf_mesh(tree, grid, a)
    mesh_x = grid[mesh_idx]
    mesh_v = values[mesh_idx]
    approx = np.interp(grid, mesh_x, mesh_v)
    left, right = mesh_x[0], mesh_x[-1]
    lo = grid < left
    hi = grid > right
    approx[lo] = mesh_v[0] + sigma0 * (grid[lo] - left)
    approx[hi] = mesh_v[-1] + sigma0 * (grid[hi] - right)
    c0 = float(mesh_v[0] - sigma0 * left)
    psi = SampledFn(grid, approx - (sigma0 * grid + c0))
    return TreeApprox(tree, psi, TameLinear(a=sigma0, b=0.0, c=c0))


def _tree_full_approx(ta: TreeApprox, grid: np.ndarray) -> np.ndarray:
    if isinstance(ta.psi, TameMapSampled):
        raise TypeError("expected a Lipschitz tree approximant")
    return ta.psi.values + ta.linear.b1(grid)


def audit_lipschitz_corona(decomp: CoronaDecomposition, phi: SampledFn) -> dict:
    """Verify partition, tree axioms, Eq. (form15Lipschitz), psi and slope bounds."""
    grid, values = phi.grid, phi.values
    eta = decomp.eta
    _audit_partition(decomp)
    worst_ratio = 0.0
    for ta in decomp.forest:
        ta.tree.validate()
        if abs(ta.linear.a) > 2.0 + 1e-12:
            raise CoronaAuditError(f"|L_T slope| = {abs(ta.linear.a):.3g} > 2", ta.tree.top)
        lip_psi = ta.psi.lipschitz_constant()
        if lip_psi > eta * (1.0 + 1e-9) + 1e-12:
            raise CoronaAuditError(
                f"psi_T Lipschitz constant {lip_psi:.3e} > eta = {eta:.3e}", ta.tree.top
            )
        approx = _tree_full_approx(ta, grid)
        for q in ta.tree.members:
            lo, hi = q.double()
            mask = (grid >= lo - 1e-12) & (grid <= hi + 1e-12)
            dev = np.abs(values[mask] - approx[mask])
            worst = float(np.max(dev))
            if worst > eta * q.length * (1.0 + 1e-9) + 1e-12:
                s = grid[mask][int(np.argmax(dev))]
                raise CoronaAuditError(
                    f"approximation bound failed: |phi - (psi+L)| = {worst:.3e} "
                    f"> eta |Q| = {eta * q.length:.3e} at s = {s}",
                    q,
                    s,
                )
            worst_ratio = max(worst_ratio, worst / (eta * q.length))
    return {
        "worst_approx_ratio": worst_ratio,
        "bad_carleson": max_carleson(decomp, which="bad"),
        "top_carleson": max_carleson(decomp, which="tops"),
    }


def _audit_partition(decomp: CoronaDecomposition) -> None:
    owner: dict[DyadicInterval, int] = {}
    for q in decomp.bad:
        owner[q] = -1
    for i, ta in enumerate(decomp.forest):
        for q in ta.tree.members:
            if q in owner:
                raise CoronaAuditError("interval assigned twice", q)
            owner[q] = i
    for q in decomp.all_intervals():
        if q not in owner:
            raise CoronaAuditError("interval not assigned", q)
    if len(owner) != len(decomp.all_intervals()):
        raise CoronaAuditError("assignment does not match the truncated grid")


# ---------------------------------------------------------------------------
# Carleson sums


def carleson_sum(family, q0: DyadicInterval) -> float:
    """sum of |Q|/|Q0| over members of the family contained in Q0."""
    total = 0.0
    for q in family:
        if q0.contains(q):
            total += q.length
    return total / q0.length


def max_carleson(decomp: CoronaDecomposition, which: str = "bad") -> float:
    if which == "bad":
        family = list(decomp.bad)
    elif which == "tops":
        family = [ta.tree.top for ta in decomp.forest]
    else:
        raise ValueError("which must be 'bad' or 'tops'")
    best = 0.0
    for q0 in decomp.all_intervals():
        best = max(best, carleson_sum(family, q0))
    return best


# ---------------------------------------------------------------------------
# tame corona


def tame_corona(bmap: TameMapSampled, eta: float, depth: int) -> CoronaDecomposition:
    """Corona decomposition of an N-tame map, N >= 1, per-tree audited.

    Implements the constructive proof: Lipschitz corona of B1/N at
    delta = min(eta^2/5, eta/17); triangle corrections of slope 16 delta on
    the middle halves of the minimal intervals restore the integral coupling;
    psi2 integrates the corrected approximant; everything scales back by N.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    N = bmap.declared_constant
    if N < 1.0:
        raise ValueError("tame corona requires declared constant N >= 1")
    grid = bmap.grid
    a, b, _ = _grid_layout(grid, depth)
    phi1 = bmap.b1 / N
    phi2 = bmap.b2 / N
    delta = min(eta * eta / 5.0, eta / 17.0)
    lip = lipschitz_corona(SampledFn(grid, phi1), delta, depth)

    h = grid[1] - grid[0]
    forest: list[TreeApprox] = []
    for ta in lip.forest:
        approx = _tree_full_approx(ta, grid)
        sigma0, c0 = ta.linear.a, ta.linear.c
        psi1 = approx - ta.linear.b1(grid)
        for s_int in ta.tree.minimal_intervals():
            i0 = _index_of(s_int.left, a, h)
            i1 = _index_of(s_int.right, a, h)
            disc = float(np.trapezoid(phi1[i0 : i1 + 1] - approx[i0 : i1 + 1], grid[i0 : i1 + 1]))
            quarter = s_int.length / 4.0
            hl = s_int.center - quarter
            hr = s_int.center + quarter
            tri = 16.0 * delta * np.minimum(grid - hl, hr - grid)
            tri = np.where((grid > hl) & (grid < hr), tri, 0.0)
            denom = float(np.trapezoid(tri, grid))
            if denom <= 0.0:
                raise CoronaAuditError("degenerate triangle support", s_int)
            coef = disc / denom
            if abs(coef) > 1.0 + 1e-6:
                raise CoronaAuditError(
                    f"triangle coefficient |c| = {abs(coef):.4g} > 1 on a minimal interval",
                    s_int,
                )
            psi1 = psi1 + coef * tri
        lip17 = SampledFn(grid, psi1).lipschitz_constant()
        if lip17 > 17.0 * delta * (1.0 + 1e-9):
            raise CoronaAuditError(
                f"corrected phi_T Lipschitz constant {lip17:.3e} > 17 delta", ta.tree.top
            )
        x_top = _index_of(ta.tree.top.left, a, h)
        psi2 = phi2[x_top] + cumtrapz(grid, psi1, anchor=x_top)
        x_left = grid[x_top]
        lin = TameLinear(
            a=N * sigma0,
            c=N * c0,
            b=-N * (0.5 * sigma0 * x_left**2 + c0 * x_left),
        )
        psi = TameMapSampled(grid, N * psi1, N * psi2, declared_constant=eta * N)
        forest.append(TreeApprox(ta.tree, psi, lin))

    decomp = CoronaDecomposition(
        kind="tame",
        eta=eta,
        depth=depth,
        window=(a, b),
        grid=grid,
        bad=lip.bad,
        forest=forest,
        stats={"delta": delta, **lip.stats},
    )
    audit_tame_corona(decomp, bmap)
    return decomp


def audit_tame_corona(decomp: CoronaDecomposition, bmap: TameMapSampled) -> dict:
    """Verify Eq. (form112) with the parabolic metric, plus Eq. (form20b) exactness."""
    grid = decomp.grid
    eta, N = decomp.eta, bmap.declared_constant
    _audit_partition(decomp)
    a = decomp.window[0]
    h = grid[1] - grid[0]
    worst_ratio = 0.0
    for ta in decomp.forest:
        ta.tree.validate()
        psi = ta.psi
        if not isinstance(psi, TameMapSampled):
            raise CoronaAuditError("tame corona requires TameMapSampled approximants")
        total1 = psi.b1 + ta.linear.b1(grid)
        total2 = psi.b2 + ta.linear.b2(grid)
        d1 = np.abs(bmap.b1 - total1)
        d2 = np.sqrt(np.abs(bmap.b2 - total2))
        for q in ta.tree.members:
            lo, hi = q.double()
            mask = (grid >= lo - 1e-12) & (grid <= hi + 1e-12)
            dev = np.maximum(d1[mask], d2[mask])
            worst = float(np.max(dev))
            bound = eta * N * q.length
            if worst > bound * (1.0 + 1e-9) + 1e-12:
                s = grid[mask][int(np.argmax(dev))]
                raise CoronaAuditError(
                    f"d_pi bound failed: {worst:.3e} > eta N |Q| = {bound:.3e} at s = {s}",
                    q,
                    s,
                )
            worst_ratio = max(worst_ratio, worst / bound)
        # exactness at endpoints of minimal intervals (form20b / form26)
        for s_int in ta.tree.minimal_intervals():
            for edge in (s_int.left, s_int.right):
                i = _index_of(edge, a, h)
                gap = abs(bmap.b2[i] - total2[i])
                if gap > 1e-8 * max(1.0, float(np.max(np.abs(bmap.b2)))):
                    raise CoronaAuditError(
                        f"phi2 != psi2 + P_T at a minimal-interval endpoint (gap {gap:.2e})",
                        s_int,
                        edge,
                    )
    return {
        "worst_dpi_ratio": worst_ratio,
        "bad_carleson": max_carleson(decomp, which="bad"),
        "top_carleson": max_carleson(decomp, which="tops"),
    }


# ---------------------------------------------------------------------------
# Whitney regions


@dataclass
class TreeRegionData:
    """Distance functions h, d and the Whitney family of a tree."""

    tree: DyadicTree
    rho: float
    h_fn: SampledFn
    d_fn: SampledFn
    whitney: list[DyadicInterval]

    def D(self, x, y) -> np.ndarray:
        """D(x, y) = (d(x) + d(y))/4; 1/2-Lipschitz in the max metric."""
        return 0.25 * (np.asarray(self.d_fn(x)) + np.asarray(self.d_fn(y)))


def tree_regions(tree: DyadicTree, grid: np.ndarray) -> TreeRegionData:
    grid = np.asarray(grid, dtype=float)
    members = sorted(tree.members, key=lambda q: (q.j, q.k))
    d = np.full(grid.shape, np.inf)
    for q in members:
        dist_q = np.maximum.reduce([q.left - grid, grid - q.right, np.zeros_like(grid)])
        d = np.minimum(d, q.length + dist_q)
    top = tree.top
    in_top = (grid >= top.left - 1e-12) & (grid <= top.right + 1e-12)
    h = np.full(grid.shape, np.inf)
    for q in members:
        mask = (grid >= q.left - 1e-12) & (grid <= q.right + 1e-12)
        h[mask] = np.minimum(h[mask], q.length)

    # d is 1-Lipschitz and bounded by h on the top
    slopes = np.abs(np.diff(d)) / np.diff(grid)
    if np.max(slopes) > 1.0 + 1e-9:
        raise CoronaAuditError("d is not 1-Lipschitz on the grid")
    if np.any(d[in_top] > h[in_top] + 1e-12):
        raise CoronaAuditError("d <= h fails on the top interval")

    whitney = _whitney_family(grid, d)
    for s in whitney:
        mask = (grid >= s.left - 1e-12) & (grid <= s.right + 1e-12)
        dm = d[mask]
        if np.any(dm < s.length - 1e-12) or np.any(dm > 4.0 * s.length + 1e-12):
            raise CoronaAuditError("Whitney bound |S| <= d <= 4|S| failed", s)

    return TreeRegionData(
        tree=tree,
        rho=2.0 * top.length,
        h_fn=SampledFn(grid[in_top], h[in_top]),
        d_fn=SampledFn(grid, d),
        whitney=whitney,
    )


def _whitney_family(grid: np.ndarray, d: np.ndarray) -> list[DyadicInterval]:
    """Maximal dyadic intervals with min over grid of d >= |I|."""
    a, b = _window_of(grid)
    out: list[DyadicInterval] = []
    stack = [DyadicInterval(0, k) for k in range(a, b)]
    h = grid[1] - grid[0]
    while stack:
        q = stack.pop()
        mask = (grid >= q.left - 1e-12) & (grid <= q.right + 1e-12)
        if float(np.min(d[mask])) >= q.length:
            out.append(q)
        elif q.length > 2.0 * h:
            stack.extend(q.children())
        else:
            # finer than the sampling; keep as an honest leaf
            out.append(q)
    return sorted(out, key=lambda q: q.left)


# ---------------------------------------------------------------------------
# rotated-graph reparametrization


def reparam_rotated_graph(phi_t: SampledFn, theta: float) -> tuple[SampledFn, TameLinear]:
    """Rewrite a rotated eta'-Lipschitz graph as the graph of psi + x tan(theta).

    z(x) = x cos(theta) - phi(x) sin(theta) must be strictly increasing on the
    grid; then psi(z(x)) = phi(x)/cos(theta) and the linear part has slope
    tan(theta).
    """
    if abs(np.tan(theta)) > 2.0 + 1e-12:
        raise ValueError("|tan theta| must be <= 2")
    c, s = np.cos(theta), np.sin(theta)
    z = phi_t.grid * c - phi_t.values * s
    if np.any(np.diff(z) <= 0.0):
        raise ValueError("z(x) is not strictly increasing; eta' too large for theta")
    psi = SampledFn(z, phi_t.values / c)
    return psi, TameLinear(a=float(np.tan(theta)))


# ---------------------------------------------------------------------------
# serialization


def decomposition_to_json(decomp: CoronaDecomposition) -> str:
    trees = []
    for ta in decomp.forest:
        entry = {
            "top": [ta.tree.top.j, ta.tree.top.k],
            "members": sorted([q.j, q.k] for q in ta.tree.members),
            "linear": {"a": ta.linear.a, "b": ta.linear.b, "c": ta.linear.c},
        }
        if isinstance(ta.psi, TameMapSampled):
            entry["psi"] = {
                "grid": ta.psi.grid.tolist(),
                "values1": ta.psi.b1.tolist(),
                "values2": ta.psi.b2.tolist(),
                "declared": ta.psi.declared_constant,
            }
        else:
            entry["psi"] = {
                "grid": ta.psi.grid.tolist(),
                "values": ta.psi.values.tolist(),
            }
        trees.append(entry)
    doc = {
        "kind": decomp.kind,
        "eta": decomp.eta,
        "depth": decomp.depth,
        "window": list(decomp.window),
        "bad": sorted([q.j, q.k] for q in decomp.bad),
        "trees": trees,
    }
    return json.dumps(doc, indent=1)
