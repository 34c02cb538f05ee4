"""Area geometry of the (x, c) domain and the price/moneyness rescalings.

The reduced domain x in [-5, 0], v in [v_min(x), 6] is cut along the
volatility curves v_1(x), v_2(x) into low, medium and high volatility
areas; the low area is further cut at x = X_SPLIT.  Each area maps its
price interval onto [-1, 1] with its own transform:

    low    (I, I')  log-type map that straightens the flat lower tail
    medium (II)     affine map
    high   (III)    square-root-log map of the gap to the upper bound
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bs import normalized_call, vega_normalized
from .errors import DomainError

X_MIN = -5.0
X_MAX = 0.0
X_SPLIT = -0.0348
V_MAX = 6.0
DEFAULT_DELTA = 1.0
_SLACK = 1e-12


class Area(str, Enum):
    I = "I"
    I_PRIME = "I'"
    II = "II"
    III = "III"


AREA_X_RANGE = {
    Area.I: (X_MIN, X_SPLIT),
    Area.I_PRIME: (X_SPLIT, X_MAX),
    Area.II: (X_MIN, X_MAX),
    Area.III: (X_MIN, X_MAX),
}


def v_min(x):
    return 0.001 - 0.03 * np.asarray(x, dtype=float)


def v_low(x):
    """Lower splitting volatility v_1(x)."""
    return 0.25 - 0.4 * np.asarray(x, dtype=float)


def v_high(x):
    """Upper splitting volatility v_2(x)."""
    return 2.0 - 0.4 * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class BoundaryCurves:
    """Constants of the boundary volatility curves; stored with every model."""

    v_min_intercept: float = 0.001
    v_min_slope: float = -0.03
    v1_intercept: float = 0.25
    v1_slope: float = -0.4
    v2_intercept: float = 2.0
    v2_slope: float = -0.4
    v_max: float = V_MAX
    x_min: float = X_MIN
    x_max: float = X_MAX
    x_split: float = X_SPLIT
    delta: float = DEFAULT_DELTA


def _check_x(x, lo=X_MIN, hi=X_MAX):
    x = np.asarray(x, dtype=float)
    if np.any(x < lo - _SLACK) or np.any(x > hi + _SLACK) or np.any(np.isnan(x)):
        raise DomainError(f"moneyness outside [{lo}, {hi}]")
    return x


def boundary_vols(x):
    """(v_min, v_1, v_2, v_max) at moneyness x in [-5, 0]."""
    x = _check_x(x)
    return v_min(x), v_low(x), v_high(x), np.full_like(x, V_MAX)[()]


def inflection_vol(x):
    """Volatility sqrt(2|x|) at which c(x, .) has its inflection point."""
    return np.sqrt(2.0 * np.abs(np.asarray(x, dtype=float)))


def exact_split_point() -> float:
    """Root of sqrt(2|x|) = v_1(x) closest to zero (the stored split rounds it)."""
    # sqrt(-2x) = 0.25 - 0.4x  <=>  0.16x^2 - 1.8x + 0.0625 = 0 with y = -x
    a, b, c = 0.16, 1.8, 0.0625
    y = (b - math.sqrt(b * b - 4 * a * c)) / (2 * a)
    return -y


def tangent_bounds(x):
    """Zeros of the tangent to c(x, .) at its inflection point, against 0 and e^{x/2}."""
    x = _check_x(x)
    if np.any(x >= 0):
        raise DomainError("tangent bounds are undefined at x = 0")
    vc = inflection_vol(x)
    cc = normalized_call(x, vc)
    slope = vega_normalized(x, vc)
    return vc - cc / slope, vc + (np.exp(0.5 * x) - cc) / slope


AREAS = (Area.I, Area.I_PRIME, Area.II, Area.III)
CODE_LOW = -1
CODE_HIGH = -2


def classify_codes(x, c, c_min, c1, c2, c_max, rtol: float = 0.0) -> np.ndarray:
    """Integer area codes (index into AREAS, or CODE_LOW / CODE_HIGH) for arrays of quotes.

    Boundary prices may be arrays or callables of x.  Callables are evaluated
    in cost order: c_max, then c_2, then c_1, and c_min only for quotes
    below c_1.  Ties: c == c_1 -> II, c == c_2 -> III, c == c_max -> III,
    c == c_min -> I / I', x == X_SPLIT -> I'.  Prices within a relative
    ``rtol`` above c_max still count as Area III.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))

    def at(bound, idx):
        return bound(x[idx]) if callable(bound) else np.broadcast_to(bound, x.shape)[idx]

    out = np.empty(x.shape, dtype=np.int8)
    idx = np.arange(x.size)
    high = c > at(c_max, idx) * (1.0 + rtol)
    out[high] = CODE_HIGH
    idx = idx[~high]
    in3 = c[idx] >= at(c2, idx)
    out[idx[in3]] = 3
    idx = idx[~in3]
    in2 = c[idx] >= at(c1, idx)
    out[idx[in2]] = 2
    idx = idx[~in2]
    low = c[idx] < at(c_min, idx)
    out[idx[low]] = CODE_LOW
    idx = idx[~low]
    out[idx] = np.where(x[idx] < X_SPLIT, 0, 1)
    return out


def classify(x: float, c: float, c_min, c1, c2, c_max, rtol: float = 0.0) -> Area:
    """Area of a single reduced quote; raises DomainError outside the domain."""
    _check_x(x)
    code = int(classify_codes(x, c, c_min, c1, c2, c_max, rtol)[0])
    if code == CODE_HIGH:
        raise DomainError("out-of-domain-high: price above c_max(x)")
    if code == CODE_LOW:
        raise DomainError("out-of-domain-low: price below c_min(x)")
    return AREAS[code]


def phi_x(x, area: Area = Area.II):
    lo, hi = AREA_X_RANGE[area]
    x = _check_x(x, lo, hi)
    return np.clip(1.0 - 2.0 * (hi - x) / (hi - lo), -1.0, 1.0)


def phi_x_inv(tx, area: Area = Area.II):
    lo, hi = AREA_X_RANGE[area]
    return hi - 0.5 * (1.0 - np.asarray(tx, dtype=float)) * (hi - lo)


def _check_bracket(c, lo, hi):
    if np.any(c < lo * (1 - _SLACK)) or np.any(c > hi * (1 + _SLACK)):
        raise DomainError("price outside the area bracket")


# medium volatilities

def phi2(c, c1, c2):
    c, c1, c2 = (np.asarray(a, dtype=float) for a in (c, c1, c2))
    _check_bracket(c, c1, c2)
    return 2.0 * (c - c1) / (c2 - c1) - 1.0


def phi2_inv(tc, c1, c2):
    return c1 + 0.5 * (np.asarray(tc, dtype=float) + 1.0) * (c2 - c1)


def phi2_deriv(c, c1, c2):
    return 2.0 / (np.asarray(c2) - c1) + 0.0 * np.asarray(c)


# low volatilities

def _phi1_raw(c, c1, scale):
    return 2.0 / np.sqrt(1.0 + 2.0 * np.log(c1 / c) / scale) - 1.0


def phi1(c, x, c_min, c1, delta: float = DEFAULT_DELTA):
    c, x, c_min, c1 = (np.asarray(a, dtype=float) for a in (c, x, c_min, c1))
    _check_bracket(c, c_min, c1)
    scale = (x - delta) ** 2
    lo = _phi1_raw(c_min, c1, scale)
    return 2.0 * (_phi1_raw(c, c1, scale) - lo) / (1.0 - lo) - 1.0


def phi1_inv(tc, x, c_min, c1, delta: float = DEFAULT_DELTA):
    tc, x, c_min, c1 = (np.asarray(a, dtype=float) for a in (tc, x, c_min, c1))
    scale = (x - delta) ** 2
    lo = _phi1_raw(c_min, c1, scale)
    raw = lo + 0.5 * (tc + 1.0) * (1.0 - lo)
    return c1 * np.exp(-2.0 * scale / (raw + 1.0) ** 2 + 0.5 * scale)


def phi1_deriv(c, x, c_min, c1, delta: float = DEFAULT_DELTA):
    c, x, c_min, c1 = (np.asarray(a, dtype=float) for a in (c, x, c_min, c1))
    scale = (x - delta) ** 2
    lo = _phi1_raw(c_min, c1, scale)
    inner = 1.0 + 2.0 * np.log(c1 / c) / scale
    return 2.0 / (1.0 - lo) * 2.0 / (scale * c) * inner ** -1.5


# high volatilities

def _phi3_raw(c, x, c2):
    fwd = np.exp(0.5 * x)
    return np.sqrt(np.maximum(-8.0 * np.log((fwd - c) / (fwd - c2)), 0.0))


def phi3(c, x, c2, c_max):
    c, x, c2, c_max = (np.asarray(a, dtype=float) for a in (c, x, c2, c_max))
    _check_bracket(c, c2, c_max)
    return 2.0 * _phi3_raw(c, x, c2) / _phi3_raw(c_max, x, c2) - 1.0


def phi3_inv(tc, x, c2, c_max):
    tc, x, c2, c_max = (np.asarray(a, dtype=float) for a in (tc, x, c2, c_max))
    raw = 0.5 * (tc + 1.0) * _phi3_raw(c_max, x, c2)
    fwd = np.exp(0.5 * x)
    return fwd - (fwd - c2) * np.exp(-raw * raw / 8.0)


def phi3_deriv(c, x, c2, c_max):
    c, x, c2, c_max = (np.asarray(a, dtype=float) for a in (c, x, c2, c_max))
    raw = _phi3_raw(c, x, c2)
    return 2.0 / _phi3_raw(c_max, x, c2) * 4.0 / (raw * (np.exp(0.5 * x) - c))
