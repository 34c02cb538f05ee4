"""Online evaluation: classify reduced quotes into areas and evaluate the interpolants."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import domain as dm
from .bs import OptionQuote, normalize_quote
from .builder import BOUNDARY_RTOL, SurfaceModel
from .domain import Area
from .errors import ArbitrageError, DomainError

OK = "ok"
LOW = "out-of-domain-low"
HIGH = "out-of-domain-high"
ARBITRAGE = "arbitrage-violation"
MONEYNESS = "out-of-domain-moneyness"

CHUNK = 1 << 16
III_SWITCH = 1e-2


@dataclass(frozen=True)
class InversionResult:
    v: float | None
    area: Area | None
    status: str
    sigma: float | None = None


@dataclass
class BatchResult:
    """Columnar inversion output; ``v`` is NaN wherever ``status`` is not ok."""

    v: np.ndarray
    area: np.ndarray
    status: np.ndarray

    def __len__(self) -> int:
        return self.v.size

    def __getitem__(self, i: int) -> InversionResult:
        ok = self.status[i] == OK
        return InversionResult(float(self.v[i]) if ok else None, self.area[i] if ok else None, str(self.status[i]))

    def results(self) -> list[InversionResult]:
        return [self[i] for i in range(len(self))]


def _reduce(x: np.ndarray, c: np.ndarray):
    status = np.full(x.shape, OK, dtype=object)
    with np.errstate(over="ignore", invalid="ignore"):
        intr = np.where(x > 0, 2.0 * np.sinh(0.5 * np.abs(x)), 0.0)
        bad = ~((c > intr) & (c < np.exp(0.5 * x)))
    status[bad] = ARBITRAGE
    xr = -np.abs(x)
    cr = c - intr
    status[~bad & ~(xr >= dm.X_MIN)] = MONEYNESS
    return xr, cr, status


def _transform(model: SurfaceModel, area: Area, x: np.ndarray, c: np.ndarray):
    """(t_c, t_x, dt_c/dc) for quotes known to lie in ``area``."""
    tx = dm.phi_x(x, area)
    if area is Area.II:
        c1, c2 = model.c1(x), model.c2(x)
        tc = 2.0 * (c - c1) / (c2 - c1) - 1.0
        return tc, tx, lambda: dm.phi2_deriv(c, c1, c2)
    if area is Area.III:
        c2, cmax = model.c2(x), model.c_max(x)
        fwd = np.exp(0.5 * x)
        top = np.sqrt(-8.0 * np.log((fwd - cmax) / (fwd - c2)))
        raw = np.sqrt(np.maximum(-8.0 * np.log((fwd - c) / (fwd - c2)), 0.0))
        return 2.0 * raw / top - 1.0, tx, lambda: dm.phi3_deriv(c, x, c2, cmax)
    cmin, c1 = model.c_min(x), model.c1(x)
    scale = (x - model.delta) ** 2
    lo = 2.0 / np.sqrt(1.0 + 2.0 * np.log(c1 / cmin) / scale) - 1.0
    raw = 2.0 / np.sqrt(1.0 + 2.0 * np.log(c1 / c) / scale) - 1.0
    tc = 2.0 * (raw - lo) / (1.0 - lo) - 1.0
    return tc, tx, lambda: dm.phi1_deriv(c, x, cmin, c1, model.delta)


def _classify(model: SurfaceModel, x: np.ndarray, c: np.ndarray) -> np.ndarray:
    return dm.classify_codes(x, c, model.c_min, model.c1, model.c2, model.c_max, rtol=BOUNDARY_RTOL)


def _invert_chunk(model: SurfaceModel, x: np.ndarray, c: np.ndarray):
    xr, cr, status = _reduce(x, c)
    v = np.full(x.shape, np.nan)
    area = np.full(x.shape, None, dtype=object)
    live = np.nonzero(status == OK)[0]
    if live.size == 0:
        return v, area, status
    labels = _classify(model, xr[live], cr[live])
    status[live[labels == dm.CODE_LOW]] = LOW
    status[live[labels == dm.CODE_HIGH]] = HIGH
    for code, a in enumerate(dm.AREAS):
        idx = live[labels == code]
        if idx.size == 0:
            continue
        tc, tx, _ = _transform(model, a, xr[idx], cr[idx])
        v[idx] = model.areas[a].eval_unit(np.clip(tc, -1.0, 1.0), tx)
        area[idx] = a
    return v, area, status


def invert_batch(model: SurfaceModel, x, c) -> BatchResult:
    """Invert arrays of normalized quotes (any sign of x); one bad quote never aborts the batch."""
    x = np.asarray(x, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    if x.shape != c.shape:
        raise ValueError("x and c must have the same length")
    v = np.empty(x.size)
    area = np.empty(x.size, dtype=object)
    status = np.empty(x.size, dtype=object)
    for start in range(0, x.size, CHUNK):
        sl = slice(start, start + CHUNK)
        v[sl], area[sl], status[sl] = _invert_chunk(model, x[sl], c[sl])
    return BatchResult(v, area, status)


def invert(model: SurfaceModel, x: float, c: float) -> InversionResult:
    return invert_batch(model, [x], [c])[0]


def dvdc(model: SurfaceModel, x, c):
    """Derivative of the interpolated implied volatility with respect to the price.

    Computed from the polynomial form, without evaluating v itself.  The high
    volatility transform is singular at its lower edge c_2, so quotes with
    t_c + 1 < III_SWITCH are differentiated through the medium volatility
    interpolant, which extends smoothly across that edge.  Raises DomainError
    for quotes outside the model domain.
    """
    scalar = np.ndim(x) == 0 and np.ndim(c) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    c = np.atleast_1d(np.asarray(c, dtype=float)).ravel()
    xr, cr, status = _reduce(x, c)
    if np.any(status != OK):
        raise DomainError(f"quotes outside the model domain: {sorted(set(status[status != OK]))}")
    labels = _classify(model, xr, cr)
    if np.any(labels < 0):
        raise DomainError("quotes outside the model price domain")
    idx3 = np.nonzero(labels == 3)[0]
    if idx3.size:
        tc3, _, _ = _transform(model, Area.III, xr[idx3], cr[idx3])
        labels[idx3[tc3 + 1.0 < III_SWITCH]] = 2
    out = np.empty(x.size)
    for code, a in enumerate(dm.AREAS):
        idx = np.nonzero(labels == code)[0]
        if idx.size == 0:
            continue
        tc, tx, deriv = _transform(model, a, xr[idx], cr[idx])
        out[idx] = model.areas[a].deriv_first_unit(tc, tx) * deriv()
    return out[0] if scalar else out


def invert_quote(model: SurfaceModel, q: OptionQuote) -> InversionResult:
    try:
        nq = normalize_quote(q)
    except ArbitrageError:
        return InversionResult(None, None, ARBITRAGE)
    res = invert(model, nq.x, nq.c)
    if res.status != OK:
        return res
    return InversionResult(res.v, res.area, OK, res.v / math.sqrt(q.maturity))
