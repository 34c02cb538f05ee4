"""Offline construction of implied-volatility interpolants."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import domain as dm
from .bs import normalized_call
from .cheb import Cheb1D, LowRank2D, cheb_fit_1d, cheb_nodes, from_unit, lowrank_fit_2d, lowrank_from_grid
from .domain import Area, BoundaryCurves
from .errors import ConvergenceError
from .oracle import implied_vol_batch

BOUNDARY_RTOL = 1e-12
BOUNDARY_NAMES = ("c1", "c2", "cmax")
ORACLE_FACTOR = 1e-2
BUILD_ORDERS = (16, 32, 64, 128, 256)

SIMPLE_X = (-5.0, 0.0)
SIMPLE_XI = (0.05, 0.8)


@dataclass(frozen=True)
class AccuracyPreset:
    name: str
    tol: float


PRESETS = {
    "low": AccuracyPreset("low", 1e-6),
    "medium": AccuracyPreset("medium", 1e-9),
    "high": AccuracyPreset("high", 1e-12),
}


def get_preset(name: str | AccuracyPreset) -> AccuracyPreset:
    if isinstance(name, AccuracyPreset):
        return name
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class SurfaceModel:
    """Four area interpolants plus the boundary-price interpolants they rely on."""

    preset: AccuracyPreset
    areas: Mapping[Area, LowRank2D]
    boundaries: Mapping[str, Cheb1D]
    curves: BoundaryCurves = field(default_factory=BoundaryCurves)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        missing = set(Area) - set(self.areas)
        if missing:
            raise ValueError(f"model is missing areas {sorted(a.value for a in missing)}")
        missing = set(BOUNDARY_NAMES) - set(self.boundaries)
        if missing:
            raise ValueError(f"model is missing boundary interpolants {sorted(missing)}")

    @property
    def delta(self) -> float:
        return self.curves.delta

    def c_min(self, x):
        return normalized_call(x, dm.v_min(x))

    def c1(self, x):
        return self.boundaries["c1"](x)

    def c2(self, x):
        return self.boundaries["c2"](x)

    def c_max(self, x):
        return self.boundaries["cmax"](x)

    def footprint(self) -> dict[str, tuple[int, int, int]]:
        """(rank, first-variable order, second-variable order) per area."""
        return {a.value: (m.rank, *m.orders) for a, m in self.areas.items()}


def _boundary_target(name: str):
    vol = {"c1": dm.v_low, "c2": dm.v_high, "cmax": lambda x: np.full_like(np.asarray(x, float), dm.V_MAX)}[name]
    return lambda x: normalized_call(x, vol(x))


def build_boundary_interps(order: int = 32, max_order: int = 256, rtol: float = BOUNDARY_RTOL,
                           check_points: int = 500) -> dict[str, Cheb1D]:
    """Interpolants of x -> c(x, v_1(x)), c(x, v_2(x)), c(x, v_max) on [-5, 0].

    Each is doubled in order until it matches direct pricing to ``rtol`` on
    ``check_points`` uniform points.
    """
    if order < 16:
        raise ValueError("boundary interpolation order must be at least 16")
    interval = (dm.X_MIN, dm.X_MAX)
    xs = np.linspace(*interval, check_points)
    out = {}
    for name in BOUNDARY_NAMES:
        target = _boundary_target(name)
        n = order
        while True:
            p = cheb_fit_1d(target(from_unit(cheb_nodes(n), interval)), interval)
            exact = target(xs)
            err = float(np.max(np.abs(p(xs) - exact) / exact))
            if err <= rtol:
                break
            if 2 * n > max_order:
                raise ConvergenceError(f"boundary {name} reached rel. error {err:.2e} at order {n}", residual=err)
            n *= 2
        out[name] = p.trimmed(rtol * 1e-2 * float(np.max(np.abs(exact))))
    return out


def area_price_maps(area: Area, boundaries: Mapping[str, Cheb1D], delta: float):
    """(forward, inverse) price transforms for an area as functions of (c|t_c, x)."""
    c1, c2, cmax = (boundaries[n] for n in BOUNDARY_NAMES)
    if area in (Area.I, Area.I_PRIME):
        def cmin(x):
            return normalized_call(x, dm.v_min(x))
        return (lambda c, x: dm.phi1(c, x, cmin(x), c1(x), delta),
                lambda t, x: dm.phi1_inv(t, x, cmin(x), c1(x), delta))
    if area is Area.II:
        return (lambda c, x: dm.phi2(c, c1(x), c2(x)),
                lambda t, x: dm.phi2_inv(t, c1(x), c2(x)))
    return (lambda c, x: dm.phi3(c, x, c2(x), cmax(x)),
            lambda t, x: dm.phi3_inv(t, x, c2(x), cmax(x)))


def area_target(area: Area, boundaries: Mapping[str, Cheb1D], delta: float, oracle_tol: float):
    """Vectorized (t_c, t_x) -> v for one area, sampled with the iterative oracle."""
    _, inverse = area_price_maps(area, boundaries, delta)

    def f(tc, tx):
        tc, tx = np.broadcast_arrays(np.asarray(tc, float), np.asarray(tx, float))
        x = dm.phi_x_inv(tx, area)
        c = inverse(tc, x)
        v, _, _ = implied_vol_batch(x, c, oracle_tol)
        return v

    return f


def build_area(area: Area, preset, boundaries: Mapping[str, Cheb1D] | None = None,
               delta: float = dm.DEFAULT_DELTA, max_rank: int = 64,
               orders=BUILD_ORDERS) -> LowRank2D:
    preset = get_preset(preset)
    boundaries = boundaries or build_boundary_interps()
    f = area_target(area, boundaries, delta, preset.tol * ORACLE_FACTOR)
    t0 = time.perf_counter()
    try:
        model = lowrank_fit_2d(f, preset.tol, max_rank=max_rank, orders=orders)
    except ConvergenceError as exc:
        raise ConvergenceError(f"area {area.value}: {exc}", residual=exc.residual) from exc
    model.info["seconds"] = time.perf_counter() - t0
    return model


def build_surface(preset, delta: float = dm.DEFAULT_DELTA, boundary_order: int = 32) -> SurfaceModel:
    preset = get_preset(preset)
    boundaries = build_boundary_interps(boundary_order)
    errors = []
    areas = {}
    for area in Area:
        try:
            areas[area] = build_area(area, preset, boundaries, delta)
        except ConvergenceError as exc:
            errors.append(str(exc))
    if errors:
        raise ConvergenceError("; ".join(errors))
    meta = {
        "oracle_tol": preset.tol * ORACLE_FACTOR,
        "built": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "residuals": {a.value: m.info["residual"] for a, m in areas.items()},
    }
    return SurfaceModel(preset, areas, boundaries, BoundaryCurves(delta=delta), meta)


def simple_price_maps(x_range=SIMPLE_X, xi_range=SIMPLE_XI):
    lo, hi = xi_range

    def forward(c, x):
        return 2.0 * (c * np.exp(-0.5 * x) - lo) / (hi - lo) - 1.0

    def inverse(t, x):
        return (lo + 0.5 * (np.asarray(t) + 1.0) * (hi - lo)) * np.exp(0.5 * x)

    return forward, inverse


@dataclass(frozen=True)
class SimpleSurface:
    """Single-rectangle interpolant in (xi, x) with c = xi * e^{x/2}."""

    interp: LowRank2D
    x_range: tuple[float, float] = SIMPLE_X
    xi_range: tuple[float, float] = SIMPLE_XI

    def __call__(self, x, c):
        forward, _ = simple_price_maps(self.x_range, self.xi_range)
        x = np.asarray(x, dtype=float)
        tx = 1.0 - 2.0 * (self.x_range[1] - x) / (self.x_range[1] - self.x_range[0])
        return self.interp(forward(c, x), tx)


def build_simple_surface(n: int, x_range=SIMPLE_X, xi_range=SIMPLE_XI, tol: float = 1e-14) -> SimpleSurface:
    """Interpolate v(x, c) on the fixed (n+1) x (n+1) Chebyshev grid of the rectangle."""
    if n < 5:
        raise ValueError("simple surface needs n >= 5")
    _, inverse = simple_price_maps(x_range, xi_range)
    nodes = cheb_nodes(n)
    tc, tx = np.meshgrid(nodes, nodes, indexing="ij")
    x = from_unit(tx, x_range)
    v, _, _ = implied_vol_batch(x, inverse(tc, x), tol * 1e-2)
    return SimpleSurface(lowrank_from_grid(v, tol, trim=0.0), tuple(x_range), tuple(xi_range))
