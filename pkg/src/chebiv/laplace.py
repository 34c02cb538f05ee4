"""Laplace-model normalized prices and implied-volatility interpolation on a rectangle.

The Laplace model swaps the Gaussian log-return density for a Laplace
density with the same variance.  With x the forward log-moneyness and
v = sigma * sqrt(T), the normalized call price depends on

    d = -x / v - log(1 - v^2 / 2) / v,

and is only defined for v < sqrt(2).  Inversion uses one Chebyshev
interpolant over x in [-0.4, 0], v in [0.25, 1], with the price scaled per x
between c(x, 0.25) and c(x, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .bs import _scalar_or_array
from .cheb import LowRank2D, cheb_nodes, from_unit, lowrank_from_grid
from .engine import HIGH, LOW, MONEYNESS, OK, ARBITRAGE, BatchResult
from .errors import ConvergenceError, DomainError

SQRT2 = math.sqrt(2.0)
LAPLACE_X = (-0.4, 0.0)
LAPLACE_V = (0.25, 1.0)
LAPLACE_AREA = "laplace"


def laplace_d(x, v):
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return (-x - np.log1p(-0.5 * v * v)) / v


def _branch_pos(x, v, d):
    # d >= 0
    return (0.5 * np.exp(-(SQRT2 - v) * d + 0.5 * x) * (1.0 + v / SQRT2)
            - 0.5 * np.exp(-SQRT2 * d - 0.5 * x))


def _branch_neg(x, v, d):
    # d < 0, written with |d| = -d
    a = -d
    return (np.exp(-0.5 * x) * (0.5 * np.exp(-SQRT2 * a) - 1.0)
            - np.exp(0.5 * x) * (0.5 * np.exp(-(SQRT2 + v) * a) * (1.0 - v / SQRT2) - 1.0))


def laplace_normalized_call(x, v):
    """Normalized Laplace call price; d = 0 is assigned to the d > 0 branch."""
    x, v = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(v, dtype=float))
    if np.any(~(v > 0)) or np.any(v >= SQRT2):
        raise DomainError("Laplace model needs 0 < v < sqrt(2)")
    d = laplace_d(x, v)
    with np.errstate(over="ignore"):
        out = np.where(d >= 0, _branch_pos(x, v, np.maximum(d, 0.0)), _branch_neg(x, v, np.minimum(d, 0.0)))
    return _scalar_or_array(out)


def laplace_implied_vol(x: float, c: float, lo: float = 0.2, hi: float = 1.1, tol: float = 1e-15) -> float:
    """Brent-Dekker inversion of the Laplace price on [lo, hi]."""
    f = lambda s: float(laplace_normalized_call(x, s)) - c  # noqa: E731
    fa, fb = f(lo), f(hi)
    if fa > 0 or fb < 0:
        raise ConvergenceError(f"Laplace price {c!r} not bracketed by v in [{lo}, {hi}] at x={x!r}")
    return brentq(f, lo, hi, xtol=tol, rtol=8.9e-16, maxiter=200)


@dataclass(frozen=True)
class LaplaceSurface:
    """Interpolant of v over (t_c, t_x) on the Laplace build rectangle."""

    interp: LowRank2D
    x_range: tuple[float, float] = LAPLACE_X
    v_range: tuple[float, float] = LAPLACE_V
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return int(self.meta.get("N", self.interp.orders[0] - 1))

    def price_bracket(self, x):
        return (laplace_normalized_call(x, self.v_range[0]), laplace_normalized_call(x, self.v_range[1]))

    def __call__(self, x, c):
        return laplace_invert(self, x, c).v


def build_laplace_surface(N: int, tol: float = 1e-14, x_range=LAPLACE_X, v_range=LAPLACE_V) -> LaplaceSurface:
    """Interpolate the Laplace implied volatility on the (N+1) x (N+1) Chebyshev grid."""
    if N < 5:
        raise ValueError("Laplace surface needs N >= 5")
    nodes = cheb_nodes(N)
    xs = from_unit(nodes, x_range)
    lo_c = laplace_normalized_call(xs, v_range[0])
    hi_c = laplace_normalized_call(xs, v_range[1])
    samples = np.empty((N + 1, N + 1))
    for j, x in enumerate(xs):
        cs = lo_c[j] + 0.5 * (nodes + 1.0) * (hi_c[j] - lo_c[j])
        for i, c in enumerate(cs):
            try:
                samples[i, j] = laplace_implied_vol(float(x), float(c))
            except (ConvergenceError, ValueError) as exc:
                raise ConvergenceError(f"node (x={x!r}, c={c!r}): {exc}") from exc
    interp = lowrank_from_grid(samples, tol, trim=0.0)
    return LaplaceSurface(interp, tuple(x_range), tuple(v_range), {"N": N, "residual": interp.info["residual"]})


def laplace_invert(s: LaplaceSurface, x, c) -> BatchResult:
    """Evaluate the surface at reduced quotes; statuses follow the Black-Scholes engine."""
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    c = np.atleast_1d(np.asarray(c, dtype=float)).ravel()
    if x.shape != c.shape:
        raise ValueError("x and c must have the same length")
    v = np.full(x.size, np.nan)
    area = np.full(x.size, None, dtype=object)
    status = np.full(x.size, OK, dtype=object)
    xlo, xhi = s.x_range
    in_x = (x >= xlo) & (x <= xhi)
    status[~in_x] = MONEYNESS
    with np.errstate(invalid="ignore", over="ignore"):
        status[in_x & ~((c > 0) & (c < np.exp(0.5 * x)))] = ARBITRAGE
    idx = np.nonzero(status == OK)[0]
    if idx.size:
        xi, ci = x[idx], c[idx]
        lo, hi = s.price_bracket(xi)
        lo, hi = np.atleast_1d(lo), np.atleast_1d(hi)
        below, above = ci < lo, ci > hi
        status[idx[below]] = LOW
        status[idx[above]] = HIGH
        keep = ~(below | above)
        idx, xi, ci, lo, hi = idx[keep], xi[keep], ci[keep], lo[keep], hi[keep]
        tc = np.clip(2.0 * (ci - lo) / (hi - lo) - 1.0, -1.0, 1.0)
        tx = np.clip(2.0 * (xi - xlo) / (xhi - xlo) - 1.0, -1.0, 1.0)
        v[idx] = s.interp.eval_unit(tc, tx)
        area[idx] = LAPLACE_AREA
    return BatchResult(v, area, status)


def laplace_reference_grid(n: int = 100, x_range=LAPLACE_X, v_range=LAPLACE_V):
    """(x, v) pairs on an n x n equidistant grid of the build rectangle."""
    x, v = np.meshgrid(np.linspace(*x_range, n), np.linspace(*v_range, n), indexing="ij")
    return x.ravel(), v.ravel()
