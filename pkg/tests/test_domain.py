import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chebiv import domain as dm
from chebiv.bs import normalized_call, vega_normalized
from chebiv.domain import Area
from chebiv.errors import DomainError


def bounds(x):
    x = np.asarray(x, float)
    return (normalized_call(x, dm.v_min(x)), normalized_call(x, dm.v_low(x)),
            normalized_call(x, dm.v_high(x)), normalized_call(x, dm.V_MAX))


def test_boundary_vols_endpoints():
    assert np.allclose(dm.boundary_vols(0.0), (0.001, 0.25, 2.0, 6.0), rtol=0, atol=1e-15)
    assert np.allclose(dm.boundary_vols(-5.0), (0.151, 2.25, 4.0, 6.0), rtol=0, atol=1e-15)
    with pytest.raises(DomainError):
        dm.boundary_vols(0.5)


def test_boundary_vols_ordering():
    x = np.random.default_rng(0).uniform(-5, 0, 1000)
    a, b, c, d = dm.boundary_vols(x)
    assert np.all((0 < a) & (a < b) & (b < c) & (c < d))


def test_inflection_vol_and_split():
    assert dm.inflection_vol(-2.0) == 2.0
    assert dm.inflection_vol(0.0) == 0.0
    assert dm.inflection_vol(dm.X_SPLIT) == pytest.approx(0.263818, abs=1e-6)
    assert abs(dm.inflection_vol(dm.X_SPLIT) - dm.v_low(dm.X_SPLIT)) < 1e-3
    exact = dm.exact_split_point()
    assert math.sqrt(-2 * exact) == pytest.approx(float(dm.v_low(exact)), abs=1e-14)
    assert abs(exact - dm.X_SPLIT) < 1e-4


def test_tangent_bounds():
    x = np.linspace(-5, -0.01, 50)
    lo, hi = dm.tangent_bounds(x)
    vc = dm.inflection_vol(x)
    assert np.all((lo < vc) & (vc < hi))
    vc1 = math.sqrt(2)
    c1 = normalized_call(-1.0, vc1)
    s = vega_normalized(-1.0, vc1)
    lo1, hi1 = dm.tangent_bounds(-1.0)
    assert lo1 == pytest.approx(vc1 - c1 / s, rel=1e-15)
    assert hi1 == pytest.approx(vc1 + (math.exp(-0.5) - c1) / s, rel=1e-15)
    assert dm.tangent_bounds(-1e-6)[0] < dm.tangent_bounds(-1e-3)[0] < 0.1
    with pytest.raises(DomainError):
        dm.tangent_bounds(0.0)


def classify(x, c):
    return dm.classify(x, c, *bounds(x))


def test_classify_examples():
    assert classify(-1.0, normalized_call(-1.0, 1.0)) is Area.II
    with pytest.raises(DomainError, match="low"):
        classify(-3.0, normalized_call(-3.0, 0.05))
    assert classify(-0.01, normalized_call(-0.01, 0.1)) is Area.I_PRIME
    assert classify(-2.0, normalized_call(-2.0, 0.5)) is Area.I
    assert classify(-2.0, normalized_call(-2.0, 5.0)) is Area.III
    with pytest.raises(DomainError, match="high"):
        classify(-2.0, normalized_call(-2.0, 6.5))


def test_classify_ties():
    x = -1.0
    cmin, c1, c2, cmax = bounds(x)
    assert classify(x, c1) is Area.II
    assert classify(x, c2) is Area.III
    assert classify(x, cmax) is Area.III
    assert classify(x, cmin) is Area.I
    assert classify(dm.X_SPLIT, normalized_call(dm.X_SPLIT, 0.1)) is Area.I_PRIME


def test_classify_rejects_bad_moneyness():
    with pytest.raises(DomainError):
        classify(-6.0, 0.001)


def test_classify_codes_lazy_boundaries():
    calls = []

    def c_min(x):
        calls.append(len(x))
        return normalized_call(x, dm.v_min(x))

    x = np.array([-1.0, -1.0])
    c = normalized_call(x, np.array([2.0, 0.3]))
    _, c1, c2, cmax = bounds(x)
    codes = dm.classify_codes(x, c, c_min, c1, c2, cmax)
    assert list(codes) == [2, 0]
    assert calls == [1]


@settings(max_examples=300, deadline=None)
@given(st.floats(-5, 0), st.floats(0.001, 0.999))
def test_classify_consistent_with_price(x, s):
    vmin, v1, v2, vmax = dm.boundary_vols(x)
    brackets = [(vmin, v1), (v1, v2), (v2, vmax)]
    expected = [Area.I if x < dm.X_SPLIT else Area.I_PRIME, Area.II, Area.III]
    for (lo, hi), area in zip(brackets, expected):
        v = lo + s * (hi - lo)
        c = normalized_call(x, v)
        cs = bounds(x)
        if np.any(np.isclose(c, cs, rtol=1e-9, atol=0)):
            continue
        assert classify(x, c) is area


def test_phi_x():
    assert dm.phi_x(-5.0) == -1.0
    assert dm.phi_x(0.0) == 1.0
    assert dm.phi_x(-2.5) == 0.0
    assert dm.phi_x(dm.X_SPLIT, Area.I) == 1.0
    assert dm.phi_x(dm.X_SPLIT, Area.I_PRIME) == -1.0
    x = np.linspace(-5, 0, 11)
    assert np.allclose(dm.phi_x_inv(dm.phi_x(x)), x, rtol=0, atol=1e-15)


def test_phi2():
    c1, c2 = 0.1, 0.4
    assert dm.phi2(c1, c1, c2) == -1
    assert dm.phi2(c2, c1, c2) == 1
    assert dm.phi2(0.25, c1, c2) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        dm.phi2(0.5, c1, c2)


@pytest.mark.parametrize("delta", [0.1, 1.0, 2.0])
def test_phi1_endpoints_and_inverse(delta):
    x = -2.0
    cmin, c1, _, _ = bounds(x)
    assert dm.phi1(c1, x, cmin, c1, delta) == pytest.approx(1.0, abs=1e-15)
    assert dm.phi1(cmin, x, cmin, c1, delta) == pytest.approx(-1.0, abs=1e-15)
    c = normalized_call(x, 0.3)
    t = dm.phi1(c, x, cmin, c1, delta)
    assert dm.phi1_inv(t, x, cmin, c1, delta) == pytest.approx(c, rel=1e-12)


def test_phi3_endpoints_and_inverse():
    x = -1.0
    _, _, c2, cmax = bounds(x)
    assert dm.phi3(c2, x, c2, cmax) == -1.0
    assert dm.phi3(cmax, x, c2, cmax) == pytest.approx(1.0, abs=1e-15)
    c = normalized_call(x, 4.0)
    t = dm.phi3(c, x, c2, cmax)
    assert dm.phi3_inv(t, x, c2, cmax) == pytest.approx(c, rel=1e-12)


def _area_sample(area, n, rng):
    lo_x, hi_x = dm.AREA_X_RANGE[area]
    x = rng.uniform(lo_x, hi_x, n)
    vmin, v1, v2, vmax = dm.boundary_vols(x)
    lo, hi = {Area.I: (vmin, v1), Area.I_PRIME: (vmin, v1), Area.II: (v1, v2), Area.III: (v2, vmax)}[area]
    return x, lo + rng.uniform(0, 1, n) * (hi - lo)


def _forward(area, c, x, delta=1.0):
    cmin, c1, c2, cmax = bounds(x)
    if area is Area.II:
        return dm.phi2(c, c1, c2), lambda t: dm.phi2_inv(t, c1, c2)
    if area is Area.III:
        return dm.phi3(c, x, c2, cmax), lambda t: dm.phi3_inv(t, x, c2, cmax)
    return dm.phi1(c, x, cmin, c1, delta), lambda t: dm.phi1_inv(t, x, cmin, c1, delta)


@pytest.mark.parametrize("area", list(Area))
def test_transform_round_trip_and_monotone(area):
    rng = np.random.default_rng(3)
    x, v = _area_sample(area, 10_000, rng)
    c = normalized_call(x, v)
    t, inverse = _forward(area, c, x)
    assert np.all(np.abs(t) <= 1 + 1e-12)
    assert np.max(np.abs(inverse(t) / c - 1)) < 1e-12
    # along fixed x, t_c must increase with v
    xs = np.full(2000, x[0])
    vs = np.sort(_area_sample(area, 2000, rng)[1] * 0 + np.linspace(0, 1, 2000))
    vmin, v1, v2, vmax = dm.boundary_vols(xs)
    lo, hi = {Area.I: (vmin, v1), Area.I_PRIME: (vmin, v1), Area.II: (v1, v2), Area.III: (v2, vmax)}[area]
    tt, _ = _forward(area, normalized_call(xs, lo + vs * (hi - lo)), xs)
    assert np.all(np.diff(tt) > 0)


@pytest.mark.parametrize("area", list(Area))
def test_transform_derivatives(area):
    rng = np.random.default_rng(4)
    x, v = _area_sample(area, 200, rng)
    c = normalized_call(x, v)
    cmin, c1, c2, cmax = bounds(x)
    h = 1e-6 * c
    fwd = {Area.II: lambda cc: dm.phi2(cc, c1, c2),
           Area.III: lambda cc: dm.phi3(cc, x, c2, cmax)}.get(area, lambda cc: dm.phi1(cc, x, cmin, c1))
    der = {Area.II: lambda: dm.phi2_deriv(c, c1, c2),
           Area.III: lambda: dm.phi3_deriv(c, x, c2, cmax)}.get(area, lambda: dm.phi1_deriv(c, x, cmin, c1))
    ok = np.abs(fwd(c)) < 0.99
    c, h = c[ok], h[ok]
    x, cmin, c1, c2, cmax = x[ok], cmin[ok], c1[ok], c2[ok], cmax[ok]
    fd = (fwd(c + h) - fwd(c - h)) / (2 * h)
    assert np.max(np.abs(fd / der() - 1)) < 1e-5


def test_low_area_scaling_linearizes():
    # regression metric: deviation of v(t_c) from its secant, with and without scaling
    x = -2.0
    cmin, c1, _, _ = bounds(x)
    # dense near t = -1 where the unscaled map is steepest
    t = np.concatenate([[-1.0], -1.0 + np.geomspace(1e-12, 2.0, 400)])
    from chebiv.oracle import implied_vol_batch

    def deviation(c):
        v, _, _ = implied_vol_batch(np.full(c.size, x), c)
        secant = v[0] + (v[-1] - v[0]) * (t + 1) / 2
        return np.max(np.abs(v - secant)) / (v[-1] - v[0])

    scaled = deviation(dm.phi1_inv(t, x, cmin, c1))
    linear = deviation(cmin + (t + 1) / 2 * (c1 - cmin))
    assert scaled < 0.35
    # measured about 0.12 scaled against 0.62 unscaled at x = -2
    assert linear > 0.5
    assert linear > 4 * scaled
