"""Experiment drivers: error decay, domain validation, footprint tables, delta sweeps."""

from __future__ import annotations

import numpy as np

from .bs import normalized_call
from .builder import build_simple_surface, build_surface
from .domain import Area
from .engine import invert_batch
from .laplace import build_laplace_surface, laplace_invert, laplace_normalized_call, laplace_reference_grid
from .validation import ErrorStats, domain_grid, domain_random, error_stats, price, simple_grid

DECAY_NS = (10, 20, 30, 40, 50)


def decay_rows(mode: str, ns=DECAY_NS, grid: int = 100) -> list[tuple[int, float, float]]:
    """(N, max |dv|, mean |dv|) of the single-rectangle interpolant for each N."""
    if mode == "simple":
        x, v = simple_grid(grid)
        c = normalized_call(x, v)
        build, evaluate = build_simple_surface, lambda s: s(x, c)
    elif mode == "laplace":
        x, v = laplace_reference_grid(grid)
        c = laplace_normalized_call(x, v)
        build, evaluate = build_laplace_surface, lambda s: laplace_invert(s, x, c).v
    else:
        raise ValueError(f"unknown decay mode {mode!r}; choose simple or laplace")
    rows = []
    for n in ns:
        err = np.abs(evaluate(build(int(n))) - v)
        rows.append((int(n), float(np.max(err)), float(np.mean(err))))
    return rows


def validate_model(model, domain: str = "D2", n: int = 200, seed: int | None = None) -> ErrorStats:
    """Round-trip v -> c -> v errors of the engine on an n x n reference grid.

    With a seed, n*n random points replace the grid.
    """
    x, v = domain_grid(domain, n) if seed is None else domain_random(domain, n * n, seed)
    return error_stats(x, v, invert_batch(model, x, price(x, v)).v)


def footprint_table(model) -> str:
    """Per-area rank and orders, one line per area."""
    lines = [f"{'area':<5} {'k':>4} {'N1':>5} {'N2':>5}  residual"]
    for area in Area:
        m = model.areas[area]
        n1, n2 = m.orders
        lines.append(f"{area.value:<5} {m.rank:>4} {n1:>5} {n2:>5}  {m.info.get('residual', float('nan')):.2e}")
    return "\n".join(lines)


def delta_sweep(preset: str = "medium", deltas=(0.1, 0.5, 1.0, 2.0), grid: int = 100) -> list[dict]:
    """Footprint and D2 accuracy of the low-volatility areas for several delta values."""
    rows = []
    for delta in deltas:
        model = build_surface(preset, delta=delta)
        stats = validate_model(model, "D2", grid)
        fp = model.footprint()
        rows.append({
            "delta": delta,
            "I": fp[Area.I.value],
            "I'": fp[Area.I_PRIME.value],
            "max_dsigma": stats.max_dv,
        })
    return rows
