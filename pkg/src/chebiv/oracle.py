"""Iterative implied-volatility solvers used to generate interpolation data.

Newton's method starts at the inflection point v = sqrt(2|x|), where the
iteration is known to converge monotonically.  Targets below the price at
the start are solved for (-log c)^(-1/2), which removes the exponential
flatness of the lower tail.  Points where Newton stalls are handed to
Brent-Dekker on a fixed bracket.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .bs import normalized_call, vega_normalized
from .domain import V_MAX, inflection_vol, v_min
from .errors import ConvergenceError, DomainError

MAX_ITER = 200


@dataclass(frozen=True)
class RootSolveReport:
    v: float
    iterations: int
    method: str
    residual: float


def bracket(x):
    """Search interval [v_min(x)/2, 1.1*v_max] for the reduced moneyness x <= 0."""
    return 0.5 * v_min(x), 1.1 * V_MAX


def implied_vol_newton(x, c, tol: float = 1e-14, max_iter: int = MAX_ITER):
    """Vectorized Newton solve of c(x, v) = c for x <= 0.

    Targets below the price at the start point are solved for
    G(v) = (-log c(x, v))^(-1/2), which is close to linear in v for small v.
    Each point keeps a sign bracket; steps leaving it are replaced by
    bisection.  Returns (v, iterations, converged).
    """
    x, c = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(c, dtype=float))
    x, c = x.ravel().copy(), c.ravel().copy()
    lo, hi = bracket(x)
    hi = np.full_like(x, hi)
    v = np.clip(inflection_vol(x), v_min(x), V_MAX)
    lower = c < normalized_call(x, v)
    target_g = 1.0 / np.sqrt(-np.log(c))
    iters = np.zeros(x.size, dtype=int)
    done = np.zeros(x.size, dtype=bool)
    active = np.arange(x.size)
    for _ in range(max_iter):
        if active.size == 0:
            break
        xa, va, ca = x[active], v[active], c[active]
        price = normalized_call(xa, va)
        vega = vega_normalized(xa, va)
        lw = lower[active]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            neg_log = -np.log(price)
            g = 1.0 / np.sqrt(neg_log)
            dg = 0.5 * g / neg_log * vega / price
            step = np.where(lw, (g - target_g[active]) / dg, (price - ca) / vega)
        resid_ok = price == ca
        under = price < ca
        lo[active] = np.where(under, np.maximum(lo[active], va), lo[active])
        hi[active] = np.where(under, hi[active], np.minimum(hi[active], va))
        step_ok = np.abs(step) < tol
        new_v = va - step
        bisect = ~step_ok & ~((new_v > lo[active]) & (new_v < hi[active]))
        new_v = np.where(bisect, 0.5 * (lo[active] + hi[active]), new_v)
        iters[active] += 1
        finished = resid_ok | step_ok
        v[active] = np.where(resid_ok, va, new_v)
        done[active[finished]] = True
        active = active[~finished]
    return v, iters, done


def implied_vol_brent(x: float, c: float, tol: float = 1e-14):
    """Scalar Brent-Dekker solve on the fixed bracket; returns (v, iterations)."""
    a, b = bracket(x)
    f = lambda s: (normalized_call(x, s) - c) / c  # noqa: E731
    fa, fb = f(a), f(b)
    if fa > 0 or fb < 0:
        raise DomainError(f"price {c!r} not bracketed at x={x!r}")
    v, res = brentq(f, a, b, xtol=max(tol, 1e-300), rtol=8.9e-16, maxiter=MAX_ITER, full_output=True)
    if not res.converged:
        raise ConvergenceError(f"Brent failed at x={x}, c={c}", best=v)
    return v, res.iterations


def implied_vol_batch(x, c, tol: float = 1e-14):
    """Vectorized oracle: Newton first, Brent for the leftovers.

    Returns (v, iterations, used_brent).
    """
    x, c = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(c, dtype=float))
    shape = x.shape
    if np.any(x > 0):
        raise DomainError("oracle expects reduced quotes with x <= 0")
    if np.any(c <= 0) or np.any(c >= np.exp(0.5 * x)):
        raise DomainError("normalized price outside (0, e^{x/2})")
    v, iters, ok = implied_vol_newton(x, c, tol)
    used_brent = ~ok
    xf, cf = x.ravel(), c.ravel()
    for i in np.nonzero(used_brent)[0]:
        v[i], n = implied_vol_brent(float(xf[i]), float(cf[i]), tol)
        iters[i] += n
    return v.reshape(shape), iters.reshape(shape), used_brent.reshape(shape)


def implied_vol_oracle(x: float, c: float, tol: float = 1e-14) -> RootSolveReport:
    v, iters, brent = implied_vol_batch(np.array([x]), np.array([c]), tol)
    residual = abs(float(normalized_call(x, v[0])) - c)
    return RootSolveReport(float(v[0]), int(iters[0]), "brent" if brent[0] else "newton", residual)
