"""Normalized Black-Scholes pricing.

All price functions work on the reduced variables

    x = r*T + log(S0/K)     (forward log-moneyness)
    v = sigma*sqrt(T)       (time-scaled volatility)
    c = C / sqrt(S0*exp(-r*T)*K)

and accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfcx, ndtr

from .errors import ArbitrageError, DomainError, InvalidQuoteError

SQRT_TWO = math.sqrt(2.0)
INV_SQRT_TWO_PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class OptionQuote:
    spot: float
    strike: float
    maturity: float
    rate: float
    premium: float

    def __post_init__(self):
        for name in ("spot", "strike", "maturity"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidQuoteError(f"{name} must be positive and finite, got {value!r}")
        if not math.isfinite(self.rate):
            raise InvalidQuoteError(f"rate must be finite, got {self.rate!r}")
        if not (math.isfinite(self.premium) and self.premium >= 0):
            raise InvalidQuoteError(f"premium must be non-negative, got {self.premium!r}")


@dataclass(frozen=True)
class NormalizedQuote:
    x: float
    c: float


def _scalar_or_array(out):
    return out[()] if isinstance(out, np.ndarray) and out.ndim == 0 else out


def norm_cdf(z):
    """Standard normal distribution function, accurate in both tails."""
    return _scalar_or_array(ndtr(np.asarray(z, dtype=float)))


def normalized_call(x, v):
    """Normalized call price c(x, v) for x <= 0 and v > 0.

    Below the inflection point (x/v + v/2 < 0) both normal tails are tiny and
    the difference is taken in scaled-erfc form, which keeps full relative
    accuracy down to the underflow threshold.  Above it the complementary
    tails are subtracted from the forward value.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0) or np.any(np.isnan(v)):
        raise DomainError("normalized_call requires v > 0")
    x, v = np.broadcast_arrays(x, v)
    h = x / v
    t = 0.5 * v
    out = np.empty(x.shape)

    lower = (h + t) < 0
    if np.any(lower):
        hl, tl = h[lower], t[lower]
        scale = np.exp(-0.5 * (hl * hl + tl * tl))
        diff = erfcx(-(hl + tl) / SQRT_TWO) - erfcx(-(hl - tl) / SQRT_TWO)
        out[lower] = 0.5 * scale * diff

    upper = ~lower
    if np.any(upper):
        xu, hu, tu = x[upper], h[upper], t[upper]
        atm = xu == 0
        # Phi(h+t) = 1 - Phi(-h-t); the remaining tails carry no cancellation.
        val = np.exp(0.5 * xu) * (1.0 - ndtr(-hu - tu)) - np.exp(-0.5 * xu) * ndtr(hu - tu)
        val[atm] = erf(tu[atm] / SQRT_TWO)
        out[upper] = val
    return _scalar_or_array(out)


def vega_normalized(x, v):
    """Partial derivative of the normalized call price in v."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0) or np.any(np.isnan(v)):
        raise DomainError("vega_normalized requires v > 0")
    return _scalar_or_array(INV_SQRT_TWO_PI * np.exp(-0.5 * (x / v) ** 2 - 0.125 * v * v))


def intrinsic(x):
    """Normalized intrinsic value max(e^{x/2} - e^{-x/2}, 0)."""
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(np.where(x > 0, 2.0 * np.sinh(0.5 * x), 0.0))


def normalize_quote(q: OptionQuote) -> NormalizedQuote:
    """Map a raw quote to (forward log-moneyness, normalized price).

    Raises ArbitrageError when the premium is at or above the spot (the
    no-arbitrage upper bound) or below the intrinsic value.
    """
    x = q.rate * q.maturity + math.log(q.spot / q.strike)
    c = q.premium / math.sqrt(q.spot * math.exp(-q.rate * q.maturity) * q.strike)
    if q.premium >= q.spot:
        raise ArbitrageError(f"premium {q.premium} is not below the spot {q.spot}")
    if c < intrinsic(x):
        raise ArbitrageError(f"premium {q.premium} is below intrinsic value")
    return NormalizedQuote(x, c)


def reduce_to_otm(x, c):
    """Reflect an in-the-money normalized quote to x' = -|x| via put-call symmetry.

    Works elementwise on arrays; raises ArbitrageError if any in-the-money
    price is at or below its intrinsic value or any price is at or above
    e^{x/2}.
    """
    x = np.asarray(x, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(c >= np.exp(0.5 * x)):
        raise ArbitrageError("normalized price at or above the upper bound e^{x/2}")
    itm = x > 0
    intr = np.where(itm, 2.0 * np.sinh(0.5 * np.abs(x)), 0.0)
    if np.any(itm & (c <= intr)):
        raise ArbitrageError("in-the-money price at or below intrinsic value")
    return _scalar_or_array(-np.abs(x)), _scalar_or_array(c - intr)
