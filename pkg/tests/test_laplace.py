import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chebiv.engine import HIGH, LOW, MONEYNESS, OK
from chebiv.errors import DomainError
from chebiv.laplace import (
    _branch_neg,
    _branch_pos,
    build_laplace_surface,
    laplace_d,
    laplace_implied_vol,
    laplace_invert,
    laplace_normalized_call,
    laplace_reference_grid,
)

SQRT2 = math.sqrt(2)


def test_at_the_money_value():
    d = math.log(2.0)
    assert laplace_d(0.0, 1.0) == pytest.approx(d, rel=1e-15)
    expected = math.exp(-(SQRT2 - 1) * d) / 2 * (1 + 1 / SQRT2) - math.exp(-SQRT2 * d) / 2
    assert laplace_normalized_call(0.0, 1.0) == pytest.approx(expected, rel=1e-15)
    # 50-digit evaluation of the same expression
    assert laplace_normalized_call(0.0, 1.0) == pytest.approx(0.45292363810689839261, rel=1e-14)


def test_limits():
    for x in (-0.4, -0.1, -1e-3):
        assert laplace_normalized_call(x, 1e-6) < 1e-100
        assert laplace_normalized_call(x, SQRT2 * (1 - 1e-12)) == pytest.approx(math.exp(x / 2), rel=1e-6)


@pytest.mark.parametrize("v", [0.25, 0.5, 0.9, 1.2, 1.4])
def test_branch_continuity_at_d_zero(v):
    x = -math.log(1 - v * v / 2)  # d = 0
    assert abs(laplace_d(x, v)) < 1e-15
    assert abs(_branch_pos(x, v, 0.0) - _branch_neg(x, v, 0.0)) < 1e-12
    eps = 1e-9
    assert abs(laplace_normalized_call(x - eps, v) - laplace_normalized_call(x + eps, v)) < 1e-8


def test_domain_errors():
    for v in (0.0, -0.1, SQRT2, 2.0):
        with pytest.raises(DomainError):
            laplace_normalized_call(-0.1, v)


def test_monotone_on_build_domain():
    x = np.random.default_rng(0).uniform(-0.4, 0, 1000)
    v = np.linspace(0.25, 1, 400)
    c = laplace_normalized_call(x[:, None], v[None, :])
    assert np.all(np.diff(c, axis=1) > 0)
    assert np.all((c > 0) & (c < np.exp(x[:, None] / 2)))


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.4, 0), st.floats(0.25, 1))
def test_brent_round_trip(x, v):
    assert laplace_implied_vol(x, float(laplace_normalized_call(x, v))) == pytest.approx(v, abs=1e-13)


def test_decay_and_targets(laplace50):
    x, v = laplace_reference_grid(100)
    c = laplace_normalized_call(x, v)
    errs = [np.max(np.abs(laplace_invert(build_laplace_surface(n), x, c).v - v)) for n in (10, 20, 30, 40)]
    errs.append(np.max(np.abs(laplace_invert(laplace50, x, c).v - v)))
    assert errs[0] < 1e-3
    assert np.all(np.diff(np.log(errs)) < 0)
    assert errs[-1] < 1e-10


def test_invert_statuses(laplace50):
    rng = np.random.default_rng(1)
    x = rng.uniform(-0.4, 0, 100)
    c = laplace_normalized_call(x, 0.5)
    res = laplace_invert(laplace50, x, c)
    assert (res.status == OK).all()
    assert np.max(np.abs(res.v - 0.5)) < 1e-10
    assert np.max(np.abs(laplace_normalized_call(x, res.v) - c)) < 1e-10
    lo = laplace_normalized_call(-0.2, 0.25)
    hi = laplace_normalized_call(-0.2, 1.0)
    res = laplace_invert(laplace50, [-0.2, -0.2, -0.5, -0.2], [lo * 0.99, hi * 1.01, 0.1, lo])
    assert list(res.status) == [LOW, HIGH, MONEYNESS, OK]
    assert res.v[3] == pytest.approx(0.25, abs=1e-12)


def test_build_argument_checks():
    with pytest.raises(ValueError):
        build_laplace_surface(4)
