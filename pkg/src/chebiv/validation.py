"""Reference grids and error statistics for interpolants.

Grids are equidistant in x and, for each x, equidistant in v between the
x-dependent volatility bounds; prices are generated forward and inverted
back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import domain as dm
from .bs import normalized_call
from .oracle import implied_vol_batch


@dataclass(frozen=True)
class ErrorStats:
    max_dv: float
    mean_dv: float
    max_dc: float
    mean_dc: float
    count: int
    rejected: int = 0

    def as_row(self) -> dict:
        return {
            "max_dsigma": self.max_dv,
            "mean_dsigma": self.mean_dv,
            "max_dc": self.max_dc,
            "mean_dc": self.mean_dc,
            "points": self.count,
            "rejected": self.rejected,
        }


def vol_grid(x: np.ndarray, v_lo: np.ndarray, v_hi: np.ndarray, n_v: int):
    """Flattened (x, v) pairs with n_v equidistant vols per x."""
    s = np.linspace(0.0, 1.0, n_v)
    v = v_lo[:, None] + s[None, :] * (v_hi - v_lo)[:, None]
    return np.repeat(x, n_v), v.ravel()


def domain_grid(name: str, n: int):
    """(x, v) reference points on D1 or D2 with n x-values and n vols per x."""
    if name.upper() == "D2":
        x = np.linspace(dm.X_MIN, dm.X_MAX, n)
        return vol_grid(x, dm.v_min(x), np.full(n, dm.V_MAX), n)
    if name.upper() == "D1":
        x = np.linspace(-0.5, 0.5, n)
        lo = np.maximum(0.5 * np.abs(x), dm.v_min(-np.abs(x)))
        return vol_grid(x, lo, np.ones(n), n)
    raise ValueError(f"unknown validation domain {name!r}")


def domain_random(name: str, count: int, seed: int):
    """``count`` seeded random (x, v) points, uniform in x and then in v between the bounds."""
    rng = np.random.default_rng(seed)
    if name.upper() == "D2":
        x = rng.uniform(dm.X_MIN, dm.X_MAX, count)
        lo, hi = dm.v_min(x), np.full(count, dm.V_MAX)
    elif name.upper() == "D1":
        x = rng.uniform(-0.5, 0.5, count)
        lo, hi = np.maximum(0.5 * np.abs(x), dm.v_min(-np.abs(x))), np.ones(count)
    else:
        raise ValueError(f"unknown validation domain {name!r}")
    return x, lo + rng.uniform(0.0, 1.0, count) * (hi - lo)


def simple_grid(n: int = 100, x_range=(-5.0, 0.0), xi_range=(0.05, 0.8)):
    """Reference points of the single-rectangle experiment (bounds via the oracle)."""
    x = np.linspace(*x_range, n)
    fwd = np.exp(0.5 * x)
    v_lo, _, _ = implied_vol_batch(x, xi_range[0] * fwd)
    v_hi, _, _ = implied_vol_batch(x, xi_range[1] * fwd)
    return vol_grid(x, v_lo, v_hi, n)


def price(x, v):
    """Normalized call price for any sign of x."""
    x = np.asarray(x, dtype=float)
    base = normalized_call(-np.abs(x), v)
    return base + np.where(x > 0, 2.0 * np.sinh(0.5 * np.abs(x)), 0.0)


def error_stats(x, v_true, v_hat) -> ErrorStats:
    """Volatility and repricing errors; non-finite estimates count as rejected."""
    ok = np.isfinite(v_hat)
    xr = -np.abs(np.asarray(x)[ok])
    dv = np.abs(v_hat[ok] - v_true[ok])
    # repricing on the reduced quote equals repricing on the original by symmetry
    dc = np.abs(normalized_call(xr, np.maximum(v_hat[ok], 1e-300)) - normalized_call(xr, v_true[ok]))
    return ErrorStats(float(dv.max()), float(dv.mean()), float(dc.max()), float(dc.mean()),
                      int(ok.sum()), int((~ok).sum()))
