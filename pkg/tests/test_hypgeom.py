"""Oracle tests for the hyperbolic geometry core.

Closed-form values are checked against independent computations: numeric
quadrature of the metric for distances, brute-force horosphere projection
for shadows, and dense ray sampling for horoball crossing times.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from kleindim import hypgeom as hg


def hs(*coords):
    return hg.InteriorPoint(hg.HALFSPACE, coords)


def bd(*coords):
    return hg.BoundaryPoint(hg.HALFSPACE, coords)


finite_floats = st.floats(-3.0, 3.0, allow_nan=False)
heights = st.floats(0.05, 20.0, allow_nan=False)


def random_mobius(rng, d=2, spread=1.0):
    m = rng.normal(size=(2, 2)) * spread
    if d == 2:
        m = m + 1j * rng.normal(size=(2, 2)) * spread
    while abs(np.linalg.det(m)) < 1e-3:
        m = m + np.eye(2)
    return hg.MobiusMap(m)


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------


def test_ball_distance_matches_radial_quadrature():
    # d(0, r e_1) = integral of 2/(1 - t^2) dt from 0 to r
    for r in (0.1, 0.5, 0.9, 0.99):
        val, err = quad(lambda t: 2.0 / (1.0 - t * t), 0.0, r)
        got = hg.hyp_distance(hg.origin(2, hg.BALL), hg.InteriorPoint(hg.BALL, (r, 0.0, 0.0)))
        assert abs(got - val) < 1e-10
        assert abs(got - math.log((1 + r) / (1 - r))) < 1e-12


def test_halfspace_vertical_distance_is_log_ratio():
    assert abs(hg.hyp_distance(hs(0.0, 0.0, 1.0), hs(0.0, 0.0, math.e**3)) - 3.0) < 1e-12
    assert abs(hg.hyp_distance(hs(2.0, 0.25), hs(2.0, 4.0)) - math.log(16.0)) < 1e-12


def test_mixed_model_distance_agrees():
    p = hg.InteriorPoint(hg.BALL, (0.3, -0.1, 0.4))
    q = hs(0.8, 0.0, 0.6)
    d1 = hg.hyp_distance(p, q)
    d2 = hg.hyp_distance(hg.ball_to_halfspace(p), q)
    d3 = hg.hyp_distance(p, hg.halfspace_to_ball(q))
    assert abs(d1 - d2) < 1e-12 and abs(d1 - d3) < 1e-12


@given(
    st.floats(-2, 2), st.floats(-2, 2), heights,
    st.floats(-2, 2), st.floats(-2, 2), heights,
)
def test_distance_symmetry_and_separation(x1, y1, h1, x2, y2, h2):
    p, q = hs(x1, y1, h1), hs(x2, y2, h2)
    assert hg.hyp_distance(p, q) == pytest.approx(hg.hyp_distance(q, p), abs=1e-12)
    if (x1, y1, h1) == (x2, y2, h2):
        assert hg.hyp_distance(p, q) == 0.0
    elif max(abs(x1 - x2), abs(y1 - y2), abs(h1 - h2)) > 1e-6:
        assert hg.hyp_distance(p, q) > 0.0


# ---------------------------------------------------------------------------
# model conversion
# ---------------------------------------------------------------------------


def test_origin_alias():
    assert hg.ball_to_halfspace(hg.origin(2, hg.BALL)).coords == (0.0, 0.0, 1.0)
    assert hg.ball_to_halfspace(hg.origin(1, hg.BALL)).coords == (0.0, 1.0)


@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
def test_interior_round_trip(x, y, z):
    if x * x + y * y + z * z >= 0.98:
        return
    p = hg.InteriorPoint(hg.BALL, (x, y, z))
    q = hg.halfspace_to_ball(hg.ball_to_halfspace(p))
    assert max(abs(a - b) for a, b in zip(p.coords, q.coords)) < 1e-9


@given(finite_floats, finite_floats)
def test_boundary_round_trip(x, y):
    p = bd(x, y)
    q = hg.boundary_to_halfspace(hg.boundary_to_ball(p))
    assert max(abs(a - b) for a, b in zip(p.coords, q.coords)) < 1e-9


def test_infinity_maps_to_south_pole():
    assert hg.boundary_to_ball(hg.infinity(), d=2).coords == (0.0, 0.0, -1.0)
    back = hg.boundary_to_halfspace(hg.BoundaryPoint(hg.BALL, (0.0, 0.0, -1.0)))
    assert back.is_infinity


def test_interior_point_validation():
    with pytest.raises(hg.ModelError):
        hg.InteriorPoint(hg.BALL, (1.0, 0.0, 0.0))
    with pytest.raises(hg.ModelError):
        hg.InteriorPoint(hg.HALFSPACE, (0.0, 0.0, -1.0))
    with pytest.raises(hg.ModelError):
        hg.InteriorPoint("klein", (0.0, 0.0, 0.5))


# ---------------------------------------------------------------------------
# geodesics and projection
# ---------------------------------------------------------------------------


def test_geodesic_point_radial_norm():
    z = hg.BoundaryPoint(hg.BALL, (0.0, 1.0, 0.0))
    for t in (0.25, 1.0, 3.0, 8.0):
        p = hg.geodesic_point(z, t)
        r = math.sqrt(sum(c * c for c in p.coords))
        assert abs(r - math.tanh(t / 2.0)) < 1e-12
        assert p.coords[0] == pytest.approx(0.0, abs=1e-12)


def test_geodesic_point_distance_and_projection_consistency():
    rng = np.random.default_rng(7)
    base = hs(0.4, -1.0, 2.0)
    for _ in range(20):
        x = hs(*rng.uniform(-2, 2, size=2), rng.uniform(0.1, 3.0))
        z = hg.boundary_project(x, base)
        t = hg.hyp_distance(base, x)
        back = hg.geodesic_point(z, t, base)
        assert hg.hyp_distance(back, x) < 1e-8


def test_geodesic_toward_infinity_goes_straight_up():
    p = hg.geodesic_point(hg.infinity(), 2.0, hs(1.0, 1.0, 0.5))
    assert p.coords[:2] == (1.0, 1.0)
    assert p.coords[2] == pytest.approx(0.5 * math.e**2)


def test_projection_vertical_cases():
    assert hg.boundary_project(hs(0.0, 0.0, 0.25)).coords == (0.0, 0.0)
    assert hg.boundary_project(hs(0.0, 0.0, 4.0)).is_infinity
    with pytest.raises(ValueError):
        hg.boundary_project(hg.origin(2))


def test_projection_is_radial_in_ball_model():
    x = hg.InteriorPoint(hg.BALL, (0.3, -0.2, 0.1))
    z = hg.convert_boundary(hg.boundary_project(x), hg.BALL)
    v = np.asarray(x.coords) / np.linalg.norm(x.coords)
    assert np.allclose(np.asarray(z.coords), v, atol=1e-10)


# ---------------------------------------------------------------------------
# Moebius maps
# ---------------------------------------------------------------------------


def test_quaternionic_action_examples():
    inv = hg.MobiusMap(np.array([[0.0, -1.0], [1.0, 0.0]]))
    assert hg.apply(inv, hs(0.0, 0.0, 4.0)).coords == pytest.approx((0.0, 0.0, 0.25))
    shift = hg.MobiusMap(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert hg.apply(shift, bd(0.0, 0.0)).coords == (1.0, 0.0)
    assert hg.apply(shift, hg.infinity()).is_infinity
    # pole goes to infinity
    g = hg.MobiusMap(np.array([[1.0, 0.0], [1.0, 1.0]]))
    assert hg.apply(g, bd(-1.0, 0.0)).is_infinity


@settings(max_examples=60)
@given(st.integers(0, 10_000))
def test_mobius_action_is_isometric(seed):
    rng = np.random.default_rng(seed)
    g = random_mobius(rng)
    p = hs(*rng.uniform(-2, 2, size=2), rng.uniform(0.05, 5.0))
    q = hs(*rng.uniform(-2, 2, size=2), rng.uniform(0.05, 5.0))
    d0 = hg.hyp_distance(p, q)
    d1 = hg.hyp_distance(hg.apply(g, p), hg.apply(g, q))
    assert d1 == pytest.approx(d0, rel=1e-9, abs=1e-9)


@settings(max_examples=60)
@given(st.integers(0, 10_000))
def test_compose_inverse_and_action_compatibility(seed):
    rng = np.random.default_rng(seed)
    g, h = random_mobius(rng), random_mobius(rng)
    p = hs(0.3, -0.7, 1.1)
    lhs = hg.apply(g.compose(h), p)
    rhs = hg.apply(g, hg.apply(h, p))
    assert hg.hyp_distance(lhs, rhs) < 1e-8
    ident = g.compose(g.inverse())
    assert ident.is_identity


def test_orbit_distance_from_frobenius_norm():
    g = hg.MobiusMap(np.array([[2.0, 1.0], [1.0, 1.0]]))
    j = hg.origin(1)
    d = hg.hyp_distance(j, hg.apply(g, j))
    assert d == pytest.approx(float(np.arccosh(np.linalg.norm(g.matrix) ** 2 / 2.0)))


def test_canonical_form_identifies_psl_pairs():
    m = np.array([[1.0, 2.0], [0.5, 2.0]])
    a = hg.MobiusMap(m)
    b = hg.MobiusMap(-3.0 * m)
    assert a.key() == b.key()
    c = hg.MobiusMap(m + 1e-4)
    assert a.key() != c.key()


def test_classify_examples():
    para = hg.classify(hg.MobiusMap(np.array([[1.0, 1.0], [0.0, 1.0]])))
    assert para.kind is hg.IsometryClass.PARABOLIC
    assert para.fixed_points[0].is_infinity

    para_i = hg.classify(hg.MobiusMap(np.array([[1.0, 1.0j], [0.0, 1.0]])))
    assert para_i.kind is hg.IsometryClass.PARABOLIC

    conj = hg.MobiusMap(np.array([[1.0, 0.0], [-4.0j, 1.0]]))
    cc = hg.classify(conj)
    assert cc.kind is hg.IsometryClass.PARABOLIC
    assert cc.fixed_points[0].coords == pytest.approx((0.0, 0.0), abs=1e-12)

    lox = hg.classify(hg.MobiusMap(np.array([[2.0, 0.0], [0.0, 0.5]])))
    assert lox.kind is hg.IsometryClass.HYPERBOLIC_LOXODROMIC
    fps = lox.fixed_points
    assert any(fp.is_infinity for fp in fps)
    assert any(not fp.is_infinity and abs(fp.coords[0]) < 1e-12 for fp in fps)

    rot = hg.classify(hg.MobiusMap(np.array([[0.0, -1.0], [1.0, 0.0]])), d=1)
    assert rot.kind is hg.IsometryClass.ELLIPTIC
    assert rot.fixed_points == ()  # Fuchsian elliptic fixes an interior point

    rot2 = hg.classify(hg.MobiusMap(np.array([[0.0, -1.0], [1.0, 0.0]])), d=2)
    assert rot2.kind is hg.IsometryClass.ELLIPTIC
    assert len(rot2.fixed_points) == 2

    ident = hg.classify(hg.MobiusMap(np.eye(2)))
    assert ident.kind is hg.IsometryClass.IDENTITY
    ident2 = hg.classify(hg.MobiusMap(-np.eye(2)))
    assert ident2.kind is hg.IsometryClass.IDENTITY


def test_classify_near_boundary_flags_ambiguity():
    eps = 3e-8  # tr^2 - 4 lands between the tolerance and ten times it
    tr = math.sqrt(4.0 + eps)
    lam = (tr + math.sqrt(tr * tr - 4.0)) / 2.0
    g = hg.MobiusMap(np.array([[lam, 0.0], [0.0, 1.0 / lam]]))
    c = hg.classify(g)
    assert c.kind is hg.IsometryClass.HYPERBOLIC_LOXODROMIC
    assert c.ambiguous


def test_loxodromic_fixed_points_are_fixed():
    rng = np.random.default_rng(11)
    for _ in range(25):
        g = random_mobius(rng)
        c = hg.classify(g)
        if c.kind is not hg.IsometryClass.HYPERBOLIC_LOXODROMIC:
            continue
        for fp in c.fixed_points:
            img = hg.apply(g, fp)
            if fp.is_infinity:
                assert img.is_infinity
            else:
                assert np.allclose(img.coords, fp.coords, atol=1e-6)


# ---------------------------------------------------------------------------
# horoballs
# ---------------------------------------------------------------------------


def test_escape_depth_examples():
    H0 = hg.Horoball(hg.infinity(), 1.0)
    assert hg.escape_depth(hs(5.0, 1.0, math.e**2), H0) == pytest.approx(2.0)
    assert hg.escape_depth(hs(0.0, 0.0, 0.5), H0) == 0.0

    H1 = hg.Horoball(bd(0.0, 0.0), 1.0)
    assert hg.escape_depth(hs(0.0, 0.0, math.exp(-2.0)), H1) == pytest.approx(2.0)
    assert hg.escape_depth(hs(0.0, 0.0, 1.0), H1) == pytest.approx(0.0, abs=1e-12)
    assert not hg.horoball_contains(H1, hs(2.0, 0.0, 0.1))
    assert hg.horoball_contains(H1, hs(0.1, 0.0, 0.3))


def test_membership_matches_euclidean_ball_inequality():
    rng = np.random.default_rng(3)
    H = hg.Horoball(bd(0.25, -0.5), 0.8)
    for _ in range(200):
        w = rng.uniform(-1, 1, size=2) * 1.5 + np.array([0.25, -0.5])
        h = rng.uniform(0.01, 1.2)
        inside = (w[0] - 0.25) ** 2 + (w[1] + 0.5) ** 2 + h * h < 0.8 * h
        assert hg.horoball_contains(H, hs(w[0], w[1], h)) == inside


def test_horoball_model_round_trip():
    H = hg.Horoball(bd(0.3, 0.3), 0.45, rank=2)
    Hb = hg.convert_horoball(H, hg.BALL)
    back = hg.convert_horoball(Hb, hg.HALFSPACE)
    assert back.rank == 2
    assert np.allclose(back.base.coords, H.base.coords, atol=1e-10)
    assert back.size == pytest.approx(H.size, rel=1e-10)


def test_horoball_at_south_pole_is_plane():
    Hb = hg.Horoball(hg.BoundaryPoint(hg.BALL, (0.0, 0.0, -1.0)), 1.0)
    Hh = hg.convert_horoball(Hb, hg.HALFSPACE)
    assert Hh.base.is_infinity
    assert Hh.size == pytest.approx(1.0)  # diameter-1 ball at south pole


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_escape_depth_is_equivariant(seed):
    rng = np.random.default_rng(seed)
    g = random_mobius(rng)
    H = hg.Horoball(bd(*rng.uniform(-1, 1, size=2)), rng.uniform(0.2, 2.0))
    x = hs(*rng.uniform(-1, 1, size=2), rng.uniform(0.05, 2.0))
    d0 = hg.escape_depth(x, H)
    d1 = hg.escape_depth(hg.apply(g, x), hg.apply_horoball(g, H))
    assert d1 == pytest.approx(d0, abs=1e-8)


def test_squeeze_scales_size_and_shifts_depth():
    H = hg.Horoball(bd(0.0, 0.0), 1.0)
    assert hg.squeeze(H, 0.25).size == 0.25
    assert hg.squeeze(hg.Horoball(hg.infinity(), 2.0), 0.5).size == 4.0
    x = hs(0.02, 0.0, 0.2)
    d0 = hg.escape_depth(x, H)
    d1 = hg.escape_depth(x, hg.squeeze(H, 0.5))
    assert d0 - d1 == pytest.approx(math.log(2.0))
    with pytest.raises(ValueError):
        hg.squeeze(H, 0.0)
    with pytest.raises(ValueError):
        hg.squeeze(H, 1.5)


def test_squeeze_commutes_with_isometries():
    rng = np.random.default_rng(5)
    H = hg.Horoball(bd(0.4, -0.1), 0.7)
    for _ in range(10):
        g = random_mobius(rng)
        theta = rng.uniform(0.1, 1.0)
        a = hg.apply_horoball(g, hg.squeeze(H, theta))
        b = hg.squeeze(hg.apply_horoball(g, H), theta)
        assert np.allclose(a.base.coords, b.base.coords, atol=1e-9)
        assert a.size == pytest.approx(b.size, rel=1e-8)


# ---------------------------------------------------------------------------
# shadows
# ---------------------------------------------------------------------------


def brute_shadow_points(H, base, rng, n=1500):
    """Project horosphere sample points; the shadow must contain them all."""
    Hh = hg.convert_horoball(H, hg.HALFSPACE)
    p = np.asarray(Hh.base.coords)
    s = Hh.size
    out = []
    while len(out) < n:
        if len(p) == 2:
            u = rng.normal(size=3)
        else:
            u = rng.normal(size=2)
        u /= np.linalg.norm(u)
        center = np.append(p, s / 2.0)
        x = center + (s / 2.0) * u
        if x[-1] <= 1e-9:
            continue
        b = hg.boundary_project(hg.InteriorPoint(hg.HALFSPACE, tuple(x)), base)
        assert not b.is_infinity
        out.append(b.coords)
    return np.asarray(out)


@pytest.mark.parametrize("d", [1, 2])
def test_shadow_contains_and_fits_projected_horosphere(d):
    rng = np.random.default_rng(100 + d)
    for _ in range(3):
        H = hg.Horoball(bd(*rng.uniform(-1.5, 1.5, size=d)), float(rng.uniform(0.05, 0.5)))
        base = hg.origin(d)
        sb = hg.shadow(H, base)
        pts = brute_shadow_points(H, base, rng)
        dist = np.linalg.norm(pts - np.asarray(sb.center.coords), axis=1)
        assert dist.max() <= sb.radius * (1 + 1e-6)
        # exactness: sampled projections fill the claimed ball
        assert dist.max() >= sb.radius * 0.999


def test_shadow_off_center_base_and_ball_model():
    rng = np.random.default_rng(1)
    H = hg.Horoball(bd(0.5, -0.2), 0.3)
    base = hs(1.0, 1.0, 2.0)
    sb = hg.shadow(H, base)
    pts = brute_shadow_points(H, base, rng)
    dist = np.linalg.norm(pts - np.asarray(sb.center.coords), axis=1)
    assert dist.max() <= sb.radius * (1 + 1e-6)
    assert dist.max() >= sb.radius * 0.999

    cap = hg.shadow(hg.convert_horoball(H, hg.BALL), base)
    assert cap.center.model == hg.BALL
    c = np.asarray(cap.center.coords)
    chord = [
        np.linalg.norm(np.asarray(hg.convert_boundary(bd(*pt), hg.BALL).coords) - c)
        for pt in pts
    ]
    assert max(chord) <= cap.radius * (1 + 1e-6)
    assert max(chord) >= cap.radius * 0.999


def test_shadow_errors():
    with pytest.raises(hg.ShadowError):
        hg.shadow(hg.Horoball(bd(0.0, 0.0), 5.0), hg.origin(2))
    # horoball around the viewpoint's own projection direction, seen from
    # below: its shadow is a neighbourhood of infinity
    with pytest.raises(hg.ShadowError):
        hg.shadow(hg.Horoball(hg.infinity(), 3.0), hg.origin(2))


def test_shadow_radius_comparable_to_size():
    # from the standard base, small horoballs cast shadows of half their size
    for s in (0.02, 0.1, 0.3):
        sb = hg.shadow(hg.Horoball(bd(0.7, 0.0), s), hg.origin(2))
        assert 0.45 * s <= sb.radius <= 0.6 * s


# ---------------------------------------------------------------------------
# crossing times
# ---------------------------------------------------------------------------


def test_crossing_into_cusp_point_never_exits():
    H = hg.Horoball(bd(0.0, 0.0), 0.5)
    enter, exit_ = hg.horoball_crossing_times(bd(0.0, 0.0), H)
    assert enter == pytest.approx(math.log(2.0))
    assert math.isinf(exit_)


def test_crossing_times_match_sampled_ray():
    H = hg.Horoball(bd(0.0, 0.0), 0.5)
    z = bd(0.05, 0.0)
    enter, exit_ = hg.horoball_crossing_times(z, H)
    ts = np.linspace(0.0, 8.0, 2001)
    depths = np.array(
        [hg.escape_depth(hg.geodesic_point(z, float(t)), H) for t in ts]
    )
    inside = ts[depths > 0]
    assert inside[0] == pytest.approx(enter, abs=8.0 / 2000 * 2)
    assert inside[-1] == pytest.approx(exit_, abs=8.0 / 2000 * 2)
    # depth at the midpoint is positive and bounded by time from entry
    tm = 0.5 * (enter + exit_)
    dm = hg.escape_depth(hg.geodesic_point(z, tm), H)
    assert 0.0 < dm <= tm - enter + 1e-9


def test_crossing_misses():
    H = hg.Horoball(bd(0.0, 0.0), 0.5)
    assert hg.horoball_crossing_times(bd(3.0, 0.0), H) is None
    Hinf = hg.Horoball(hg.infinity(), 3.0)
    assert hg.horoball_crossing_times(bd(0.3, 0.1), Hinf) is None
    with pytest.raises(ValueError):
        hg.horoball_crossing_times(bd(0.0, 0.0), hg.Horoball(bd(0.0, 0.0), 5.0))


def test_crossing_inf_based_horoball():
    Hinf = hg.Horoball(hg.infinity(), 2.0)
    ts = hg.horoball_crossing_times(hg.infinity(), Hinf)
    assert ts[0] == pytest.approx(math.log(2.0)) and math.isinf(ts[1])
