"""The kernel zoo: Riesz-type, log-gradient and non-negative kernels on H.

All built-ins use the Koranyi norm inside the formula (smooth off the
singular set) while metric quantities (distances in standard-kernel
estimates) use the max norm, the package-wide convention.

    riesz_x(x,y,t)   = x / ||p||^2
    riesz_y(x,y,t)   = y / ||p||^2
    riesz_t(x,y,t)   = t / ||p||^3
    gradlog_x(x,y,t) = (x(x^2+y^2) - 4ty) / ||p||^4
    gradlog_y(x,y,t) = (y(x^2+y^2) + 4tx) / ||p||^4
    cl_alpha(x,y,t)  = (sqrt|t| / ||p||)^alpha / ||p||,  alpha >= 1
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import NormKind, dilate, inverse, mul, norm

__all__ = [
    "KernelSpec",
    "SkReport",
    "SymmetryReport",
    "SkSamples",
    "KernelSingularity",
    "eval_kernel",
    "pair_kernel",
    "symmetry_check",
    "sk_constants",
    "generate_sk_samples",
    "BUILTIN_TAGS",
]

BUILTIN_TAGS = ("riesz_x", "riesz_y", "riesz_t", "gradlog_x", "gradlog_y", "chousionis_li")


class KernelSingularity(ValueError):
    """Raised when a kernel is evaluated on its singular set."""


@dataclass(frozen=True)
class KernelSpec:
    """Selects a built-in kernel; `alpha` only applies to chousionis_li."""

    tag: str
    alpha: float | None = None

    def __post_init__(self):
        if self.tag not in BUILTIN_TAGS:
            raise ValueError(f"unknown kernel tag {self.tag!r}")
        if self.tag == "chousionis_li":
            if self.alpha is None or self.alpha < 1:
                raise ValueError("chousionis_li requires alpha >= 1")
        elif self.alpha is not None:
            raise ValueError(f"{self.tag} takes no alpha parameter")

    @property
    def name(self) -> str:
        if self.tag == "chousionis_li":
            return f"chousionis_li({self.alpha:g})"
        return self.tag


@dataclass(frozen=True)
class SkReport:
    """Measured standard-kernel constants (Definition of a k-SK, k = 1)."""

    size_constant: float
    holder_constant: float
    holder_exponent: float

    def __post_init__(self):
        if self.size_constant < 0 or self.holder_constant < 0:
            raise ValueError("constants must be nonnegative")
        if not 0 < self.holder_exponent <= 1:
            raise ValueError("Holder exponent must be in (0, 1]")


@dataclass(frozen=True)
class SymmetryReport:
    odd: bool
    horizontally_odd: bool
    max_violation: float
    odd_violation: float
    horizontally_odd_violation: float


def eval_kernel(spec: KernelSpec, p):
    """Evaluate a built-in kernel at p (a point or an (...,3) array)."""
    a = np.asarray(p, dtype=float)
    scalar = a.ndim == 1
    a = np.atleast_2d(a)
    x, y, t = a[..., 0], a[..., 1], a[..., 2]
    z2 = x * x + y * y
    kor = (z2 * z2 + 16.0 * t * t) ** 0.25

    if spec.tag == "chousionis_li":
        sing = (z2 == 0.0) & (t == 0.0)
    else:
        sing = kor == 0.0
    if np.any(sing):
        raise KernelSingularity(f"{spec.name} evaluated on its singular set")

    if spec.tag == "riesz_x":
        out = x / kor**2
    elif spec.tag == "riesz_y":
        out = y / kor**2
    elif spec.tag == "riesz_t":
        out = t / kor**3
    elif spec.tag == "gradlog_x":
        out = (x * z2 - 4.0 * t * y) / kor**4
    elif spec.tag == "gradlog_y":
        out = (y * z2 + 4.0 * t * x) / kor**4
    else:  # chousionis_li
        out = (np.sqrt(np.abs(t)) / kor) ** spec.alpha / kor
    return float(out[0]) if scalar else out.reshape(np.asarray(p, dtype=float).shape[:-1])


def pair_kernel(spec: KernelSpec, p, q):
    """K(p, q) := k(q^-1 * p); raises on the diagonal."""
    u = np.asarray(mul(inverse(q), p), dtype=float)
    if np.any(np.all(u == 0.0, axis=-1)):
        raise KernelSingularity("pair kernel evaluated on the diagonal")
    return eval_kernel(spec, u)


def _unit_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random points on the Heisenberg unit sphere of the max norm."""
    g = rng.normal(size=(n, 3))
    return np.asarray(dilate(1.0 / np.asarray(norm(g)), g))


def _sample_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random nonsingular points with max norm in [1e-2, 1e2]."""
    radii = 10.0 ** rng.uniform(-2.0, 2.0, size=n)
    pts = np.asarray(dilate(radii, _unit_sphere(rng, n)))
    # avoid the z = 0 singular set of weakly good kernels
    small_z = np.hypot(pts[:, 0], pts[:, 1]) < 1e-12
    pts[small_z, 0] += 1e-6
    return pts


def symmetry_check(spec: KernelSpec, samples: int, seed: int) -> SymmetryReport:
    """Test oddness k(-p) = -k(p) and horizontal oddness k(-x,-y,t) = -k(x,y,t).

    A symmetry class holds when its max violation over the sample is <= 1e-10.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    pts = _sample_points(rng, samples)
    k = eval_kernel(spec, pts)

    neg = -pts
    odd_viol = float(np.max(np.abs(eval_kernel(spec, neg) + k)))

    hneg = pts.copy()
    hneg[:, 0] *= -1.0
    hneg[:, 1] *= -1.0
    horiz_viol = float(np.max(np.abs(eval_kernel(spec, hneg) + k)))

    tol = 1e-10
    return SymmetryReport(
        odd=odd_viol <= tol,
        horizontally_odd=horiz_viol <= tol,
        max_violation=min(odd_viol, horiz_viol),
        odd_violation=odd_viol,
        horizontally_odd_violation=horiz_viol,
    )


@dataclass
class SkSamples:
    """Off-diagonal sample triples (p, q, p') with d(p, p') <= d(p, q) / 2."""

    p: np.ndarray
    q: np.ndarray
    p_prime: np.ndarray

    def translated(self, z) -> "SkSamples":
        return SkSamples(
            np.asarray(mul(z, self.p)),
            np.asarray(mul(z, self.q)),
            np.asarray(mul(z, self.p_prime)),
        )

    def dilated(self, r: float) -> "SkSamples":
        return SkSamples(
            np.asarray(dilate(r, self.p)),
            np.asarray(dilate(r, self.q)),
            np.asarray(dilate(r, self.p_prime)),
        )


def generate_sk_samples(n: int, seed: int, rmin: float = 1e-3, rmax: float = 1e3) -> SkSamples:
    """Draw q on spheres d(p, q) in [rmin, rmax] and p' with d(p, p') <= d(p, q)/2."""
    rng = np.random.default_rng(seed)
    p = _sample_points(rng, n)

    def sphere_offsets(radii: np.ndarray) -> np.ndarray:
        return np.asarray(dilate(radii, _unit_sphere(rng, n)))

    r = 10.0 ** rng.uniform(np.log10(rmin), np.log10(rmax), size=n)
    q = np.asarray(mul(p, sphere_offsets(r)))
    rp = r * rng.uniform(0.05, 0.5, size=n)
    p_prime = np.asarray(mul(p, sphere_offsets(rp)))
    return SkSamples(p, q, p_prime)


def sk_constants(spec: KernelSpec, samples: SkSamples, alpha: float) -> SkReport:
    """Measure size and Holder constants of the pair kernel on sample triples.

    size   = max d(p,q) |K(p,q)|
    holder = max |K(p,q) - K(p',q)| d(p,q)^(1+alpha) / d(p,p')^alpha,
             together with the transposed variant; only triples with
             d(p,p') <= d(p,q)/2 enter.  Sampling under-estimates the true
             constants.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    p, q, pp = samples.p, samples.q, samples.p_prime
    if p.size == 0:
        raise ValueError("empty sample")
    dpq = np.asarray(mul(inverse(q), p))
    dpq = np.asarray(norm(dpq))
    kpq = pair_kernel(spec, p, q)
    size = float(np.max(dpq * np.abs(kpq)))

    dppp = np.asarray(norm(np.asarray(mul(inverse(pp), p))))
    admissible = dppp <= dpq / 2.0
    if not np.any(admissible):
        raise ValueError("no admissible Holder triples in the sample")
    kppq = pair_kernel(spec, pp, q)
    kqp = pair_kernel(spec, q, p)
    kqpp = pair_kernel(spec, q, pp)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio1 = np.abs(kpq - kppq) * dpq ** (1.0 + alpha) / dppp**alpha
        ratio2 = np.abs(kqp - kqpp) * dpq ** (1.0 + alpha) / dppp**alpha
    holder = float(max(np.max(ratio1[admissible]), np.max(ratio2[admissible])))
    return SkReport(size_constant=size, holder_constant=holder, holder_exponent=alpha)
