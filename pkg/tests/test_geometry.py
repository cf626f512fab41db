import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heislab.geometry import (
    HorizontalSubgroup,
    HPoint,
    NormKind,
    cone_contains,
    dilate,
    dist,
    inverse,
    mul,
    norm,
    origin,
    project,
    rotate,
)

from conftest import random_points

finite = st.floats(min_value=-10, max_value=10, allow_nan=False)


def test_mul_identity():
    assert mul(origin, (3.0, -2.0, 7.0)) == HPoint(3.0, -2.0, 7.0)


def test_mul_hand_values():
    # hand evaluation of the group law; order matters
    assert mul((1, 0, 0), (0, 1, 0)) == HPoint(1.0, 1.0, 0.5)
    assert mul((0, 1, 0), (1, 0, 0)) == HPoint(1.0, 1.0, -0.5)


def test_inverse_exact(rng):
    assert inverse(origin) == origin
    assert inverse((1, 2, 3)) == HPoint(-1, -2, -3)
    pts = random_points(rng, 50)
    prods = np.asarray(mul(pts, np.asarray(inverse(pts))))
    assert np.all(prods == 0.0)
    assert np.allclose(np.asarray(inverse(np.asarray(inverse(pts)))), pts)


def test_dilate_values():
    p = HPoint(0.3, -0.7, 1.1)
    assert dilate(1.0, p) == p
    assert dilate(2.0, (1, 1, 1)) == HPoint(2.0, 2.0, 4.0)
    with pytest.raises(ValueError):
        dilate(0.0, p)
    with pytest.raises(ValueError):
        dilate(-1.0, p)


def test_dilate_is_automorphism(rng):
    p = random_points(rng, 100)
    q = random_points(rng, 100)
    r = rng.uniform(0.1, 10.0, size=100)
    lhs = np.asarray(dilate(r, np.asarray(mul(p, q))))
    rhs = np.asarray(mul(np.asarray(dilate(r, p)), np.asarray(dilate(r, q))))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(1.0 + np.abs(lhs))


def test_associativity(rng):
    p, q, r = (random_points(rng, 1000) for _ in range(3))
    lhs = np.asarray(mul(np.asarray(mul(p, q)), r))
    rhs = np.asarray(mul(p, np.asarray(mul(q, r))))
    assert np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs))) <= 1e-12


def test_norm_values():
    assert norm(origin, NormKind.MAX) == 0.0
    assert norm(origin, NormKind.KORANYI) == 0.0
    assert norm((3, 4, 25), NormKind.MAX) == 5.0  # max{5, 5}
    assert norm((0, 0, 1), NormKind.KORANYI) == 2.0  # 16^(1/4)


def test_norm_homogeneous(rng):
    pts = random_points(rng, 200)
    lam = rng.uniform(0.2, 5.0, size=200)
    for kind in NormKind:
        n0 = np.asarray(norm(pts, kind))
        n1 = np.asarray(norm(np.asarray(dilate(lam, pts)), kind))
        assert np.max(np.abs(n1 - lam * n0)) <= 1e-12 * np.max(1.0 + n1)


def test_norm_comparability(rng):
    pts = random_points(rng, 10_000)
    pts = pts[np.asarray(norm(pts)) > 0]
    ratio = np.asarray(norm(pts, NormKind.KORANYI)) / np.asarray(norm(pts, NormKind.MAX))
    assert np.all(ratio >= 1.0 - 1e-12)
    assert np.all(ratio <= 17.0**0.25 + 1e-12)


def test_dist_values():
    p = HPoint(0.4, 0.2, -1.0)
    assert dist(p, p) == 0.0
    assert dist(origin, (1, 0, 0)) == 1.0


def test_dist_left_invariant(rng):
    z, p, q = (random_points(rng, 100) for _ in range(3))
    d0 = np.asarray(dist(p, q))
    d1 = np.asarray(dist(np.asarray(mul(z, p)), np.asarray(mul(z, q))))
    assert np.max(np.abs(d1 - d0) / np.maximum(d0, 1e-12)) <= 1e-12


def test_triangle_inequality(rng):
    # both homogeneous norms give genuine metrics
    p, q, r = (random_points(rng, 500) for _ in range(3))
    for kind in NormKind:
        dpr = np.asarray(dist(p, r, kind))
        dpq = np.asarray(dist(p, q, kind))
        dqr = np.asarray(dist(q, r, kind))
        assert np.all(dpr <= dpq + dqr + 1e-12)


def test_project_theta0_values():
    sub = HorizontalSubgroup(0.0)
    assert project((1, 2, 3), sub, "W") == HPoint(0.0, 2.0, 2.0)
    assert project((1, 2, 3), sub, "V") == HPoint(1.0, 0.0, 0.0)
    assert project((1, 2, 3), sub, "L") == HPoint(0.0, 2.0, 0.0)
    assert project((1, 2, 3), sub, "T") == HPoint(0.0, 0.0, 2.0)
    assert project((0, 0, 5), sub, "V") == HPoint(0.0, 0.0, 0.0)


def test_project_splitting_identity(rng):
    for theta in [0.0, 0.3, math.pi / 2, 2.5]:
        sub = HorizontalSubgroup(theta)
        pts = random_points(rng, 200)
        v = np.asarray(project(pts, sub, "V"))
        w = np.asarray(project(pts, sub, "W"))
        recomposed = np.asarray(mul(v, w))
        assert np.max(np.abs(recomposed - pts)) <= 1e-12 * np.max(1.0 + np.abs(pts))
        # W factors as L . T with commuting factors
        l = np.asarray(project(pts, sub, "L"))
        t = np.asarray(project(pts, sub, "T"))
        assert np.allclose(np.asarray(mul(l, t)), w, atol=1e-12)
        assert np.allclose(np.asarray(mul(t, l)), w, atol=1e-12)


def test_projection_bounds(rng):
    # ||pi_T(p)|| <= ||pi_W(p)|| <= C ||p||, measured C <= 4
    pts = random_points(rng, 2000)
    for theta in [0.0, 1.0]:
        sub = HorizontalSubgroup(theta)
        nt = np.asarray(norm(np.asarray(project(pts, sub, "T"))))
        nw = np.asarray(norm(np.asarray(project(pts, sub, "W"))))
        npts = np.asarray(norm(pts))
        assert np.all(nt <= nw + 1e-12)
        measured_c = np.max(nw / np.maximum(npts, 1e-300))
        assert measured_c <= 4.0


def test_rotation_isometry(rng):
    pts = random_points(rng, 100)
    qts = random_points(rng, 100)
    rp, rq = np.asarray(rotate(1.1, pts)), np.asarray(rotate(1.1, qts))
    assert np.allclose(np.asarray(dist(rp, rq)), np.asarray(dist(pts, qts)), atol=1e-12)


def test_cone_contains():
    sub = HorizontalSubgroup(0.0)
    assert cone_contains((0, 1, 0), sub, 0.0)
    assert cone_contains((0, 1, 0), sub, 100.0)
    assert not cone_contains((1, 0, 0), sub, 10.0)
    assert cone_contains(origin, sub, 0.0)
    with pytest.raises(ValueError):
        cone_contains((1, 1, 1), sub, -0.5)


def test_subgroup_theta_normalized():
    assert HorizontalSubgroup(math.pi).theta == pytest.approx(0.0)
    assert 0.0 <= HorizontalSubgroup(-0.3).theta < math.pi


@given(
    st.tuples(finite, finite, finite),
    st.tuples(finite, finite, finite),
)
@settings(max_examples=200, deadline=None)
def test_left_invariance_property(p, q):
    # the sqrt in the max norm amplifies roundoff in the vertical part to
    # ~sqrt(ulp * scale), hence the absolute tolerance
    z = (0.5, -1.5, 2.0)
    d0 = dist(p, q)
    d1 = dist(mul(z, p), mul(z, q))
    assert d1 == pytest.approx(d0, rel=1e-9, abs=1e-7)


@given(st.tuples(finite, finite, finite))
@settings(max_examples=200, deadline=None)
def test_inverse_property(p):
    assert mul(p, inverse(p)) == (0.0, 0.0, 0.0)
