"""Chebyshev interpolation in one and two variables.

Univariate interpolants live on Chebyshev points of the second kind,
``cos(k*pi/N)``, and are stored as coefficient vectors.  Bivariate functions
are either full tensor interpolants or low-rank skeletons

    f(s, t) ~= sum_j d_j * r_j(s) * c_j(t)

built by Gaussian elimination with complete pivoting on sampled grids.
Evaluation uses the three-term recurrence for T_k, never cos/arccos.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.fft import dct

from .errors import ConvergenceError, DomainError

CLAMP_TOL = 1e-12
DEFAULT_ORDERS = (16, 32, 64, 128)
# BLAS rounds narrow or ragged products differently from full blocks; padding
# the point count keeps a point's value independent of its batch
_MIN_GEMM = 16
TRIM_FACTOR = 1e-2  # trailing coefficients below tol * TRIM_FACTOR are dropped


def cheb_nodes(n: int) -> np.ndarray:
    """The n+1 Chebyshev points cos(k*pi/n), k = 0..n, descending from 1 to -1."""
    if n < 1:
        raise ValueError(f"Chebyshev order must be >= 1, got {n}")
    k = np.arange(n + 1)
    # sin form is exactly antisymmetric and hits 0 exactly for even n
    return np.sin(np.pi * (n - 2 * k) / (2 * n))


def to_unit(t, interval: tuple[float, float]) -> np.ndarray:
    lo, hi = interval
    return (2.0 * np.asarray(t, dtype=float) - (lo + hi)) / (hi - lo)


def from_unit(u, interval: tuple[float, float]) -> np.ndarray:
    lo, hi = interval
    return 0.5 * (hi - lo) * np.asarray(u, dtype=float) + 0.5 * (lo + hi)


def _check_unit(u: np.ndarray) -> np.ndarray:
    if u.size and (np.nanmax(np.abs(u)) > 1.0 + CLAMP_TOL or np.isnan(u).any()):
        raise DomainError("evaluation point outside the interpolation interval")
    return np.clip(u, -1.0, 1.0)


def cheb_basis_t(u, n: int, min_width: int = 1) -> np.ndarray:
    """Matrix of T_0(u)..T_{n-1}(u), one row per degree, by three-term recurrence.

    Columns are zero-padded up to a multiple of ``min_width``.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    width = -(-u.size // min_width) * min_width
    if width > u.size:
        u = np.concatenate([u, np.zeros(width - u.size)])
    out = np.empty((n, u.size))
    out[0] = 1.0
    if n > 1:
        out[1] = u
    two_u = 2.0 * u
    for k in range(2, n):
        np.multiply(two_u, out[k - 1], out=out[k])
        out[k] -= out[k - 2]
    return out


def cheb_basis(u, n: int) -> np.ndarray:
    """Matrix of T_0(u)..T_{n-1}(u), one row per point."""
    return cheb_basis_t(u, n).T


def clenshaw(u, coeffs: np.ndarray) -> np.ndarray:
    """Evaluate sum_j coeffs[j] T_j(u) by Clenshaw's backward recurrence."""
    u = np.asarray(u, dtype=float)
    b1 = np.zeros_like(u)
    b2 = np.zeros_like(u)
    two_u = 2.0 * u
    for a in coeffs[:0:-1]:
        b1, b2 = two_u * b1 - b2 + a, b1
    return u * b1 - b2 + coeffs[0]


def _dct_coeffs(values: np.ndarray, axis: int = 0) -> np.ndarray:
    n = values.shape[axis] - 1
    if n == 0:
        return values.astype(float).copy()
    a = dct(values, type=1, axis=axis) / n
    idx = [slice(None)] * values.ndim
    idx[axis] = 0
    a[tuple(idx)] *= 0.5
    idx[axis] = n
    a[tuple(idx)] *= 0.5
    return a


@dataclass(frozen=True)
class Cheb1D:
    coeffs: np.ndarray
    interval: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if coeffs.size == 0:
            raise ValueError("Cheb1D needs at least one coefficient")
        lo, hi = (float(b) for b in self.interval)
        if not lo < hi:
            raise ValueError(f"invalid interval [{lo}, {hi}]")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "interval", (lo, hi))

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, t):
        return cheb_eval_1d(self, t)

    def derivative(self) -> "Cheb1D":
        lo, hi = self.interval
        if self.coeffs.size == 1:
            return Cheb1D(np.zeros(1), self.interval)
        return Cheb1D(npcheb.chebder(self.coeffs) * (2.0 / (hi - lo)), self.interval)

    def trimmed(self, threshold: float) -> "Cheb1D":
        """Drop trailing coefficients whose magnitude is below ``threshold``."""
        big = np.nonzero(np.abs(self.coeffs) >= threshold)[0]
        keep = big[-1] + 1 if big.size else 1
        return Cheb1D(self.coeffs[:keep], self.interval)


def cheb_fit_1d(values: Sequence[float], interval: tuple[float, float] = (-1.0, 1.0)) -> Cheb1D:
    """Interpolate values sampled at ``cheb_nodes(len(values) - 1)`` mapped onto ``interval``."""
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size == 0:
        raise ValueError("cannot fit an empty sample")
    return Cheb1D(_dct_coeffs(values), interval)


def cheb_eval_1d(p: Cheb1D, t):
    u = _check_unit(np.atleast_1d(to_unit(t, p.interval)))
    out = clenshaw(u, p.coeffs)
    return out[0] if np.ndim(t) == 0 else out.reshape(np.shape(t))


def cheb_eval_cos(p: Cheb1D, t):
    """Reference evaluation through T_j(u) = cos(j*arccos(u)); used for cross-checks."""
    u = np.clip(np.atleast_1d(to_unit(t, p.interval)), -1.0, 1.0)
    j = np.arange(p.coeffs.size)
    out = np.cos(np.outer(np.arccos(u), j)) @ p.coeffs
    return out[0] if np.ndim(t) == 0 else out.reshape(np.shape(t))


@dataclass(frozen=True)
class Tensor2D:
    coeffs: np.ndarray
    first_interval: tuple[float, float] = (-1.0, 1.0)
    second_interval: tuple[float, float] = (-1.0, 1.0)

    def __call__(self, s, t):
        us = _check_unit(np.atleast_1d(to_unit(s, self.first_interval)))
        ut = _check_unit(np.atleast_1d(to_unit(t, self.second_interval)))
        us, ut = np.broadcast_arrays(us, ut)
        n1, n2 = self.coeffs.shape
        out = np.einsum("pi,ij,pj->p", cheb_basis(us, n1), self.coeffs, cheb_basis(ut, n2))
        return out[0] if np.ndim(s) == 0 and np.ndim(t) == 0 else out.reshape(us.shape)


def tensor_fit_2d(samples, first_interval=(-1.0, 1.0), second_interval=(-1.0, 1.0)) -> Tensor2D:
    """Tensor interpolant of ``samples[i, j] = f(s_i, t_j)`` on a Chebyshev grid."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or min(samples.shape) < 2:
        raise ValueError(f"need a 2-D sample grid with at least 2 points per axis, got {samples.shape}")
    coeffs = _dct_coeffs(_dct_coeffs(samples, axis=0), axis=1)
    return Tensor2D(coeffs, tuple(first_interval), tuple(second_interval))


@dataclass(frozen=True)
class LowRank2D:
    """Skeleton ``sum_j weights[j] * row_interps[j](s) * col_interps[j](t)``.

    ``row_interps`` are functions of the first variable, ``col_interps`` of
    the second.  ``info`` carries build metadata (residual, grid orders).
    """

    weights: np.ndarray
    row_interps: tuple[Cheb1D, ...]
    col_interps: tuple[Cheb1D, ...]
    first_interval: tuple[float, float] = (-1.0, 1.0)
    second_interval: tuple[float, float] = (-1.0, 1.0)
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if not (weights.size == len(self.row_interps) == len(self.col_interps)) or weights.size < 1:
            raise ValueError("rank mismatch between weights and slice interpolants")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "row_interps", tuple(self.row_interps))
        object.__setattr__(self, "col_interps", tuple(self.col_interps))
        object.__setattr__(self, "first_interval", tuple(float(b) for b in self.first_interval))
        object.__setattr__(self, "second_interval", tuple(float(b) for b in self.second_interval))

    @property
    def rank(self) -> int:
        return self.weights.size

    @property
    def orders(self) -> tuple[int, int]:
        """Number of coefficients in the first and second variable (max over slices)."""
        return (
            max(p.coeffs.size for p in self.row_interps),
            max(p.coeffs.size for p in self.col_interps),
        )

    @cached_property
    def _row_matrix(self) -> np.ndarray:
        return _pad([p.coeffs for p in self.row_interps])

    @cached_property
    def _col_matrix(self) -> np.ndarray:
        return _pad([p.coeffs for p in self.col_interps])

    @cached_property
    def _row_deriv_matrix(self) -> np.ndarray:
        return _pad([p.derivative().coeffs for p in self.row_interps])

    def __call__(self, s, t):
        return lowrank_eval_2d(self, s, t)

    def eval_unit(self, us: np.ndarray, ut: np.ndarray) -> np.ndarray:
        """Evaluate at points already mapped to [-1, 1]^2 (no checks)."""
        rows = self._row_matrix @ cheb_basis_t(us, self._row_matrix.shape[1], _MIN_GEMM)
        cols = self._col_matrix @ cheb_basis_t(ut, self._col_matrix.shape[1], _MIN_GEMM)
        return _weighted_sum(self.weights, rows, cols)[: np.size(us)]

    def deriv_first_unit(self, us: np.ndarray, ut: np.ndarray) -> np.ndarray:
        """Partial derivative in the (unit-mapped) first variable."""
        lo, hi = self.first_interval
        rows = self._row_deriv_matrix @ cheb_basis_t(us, self._row_deriv_matrix.shape[1], _MIN_GEMM)
        cols = self._col_matrix @ cheb_basis_t(ut, self._col_matrix.shape[1], _MIN_GEMM)
        # slice coefficients carry the 2/(hi-lo) factor; undo it for unit variables
        return _weighted_sum(self.weights, rows, cols)[: np.size(us)] * (0.5 * (hi - lo))


def _weighted_sum(w: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    # fixed-order elementwise accumulation: a point's value never depends on its batch
    out = w[0] * rows[0] * cols[0]
    for j in range(1, w.size):
        out += w[j] * rows[j] * cols[j]
    return out


def _pad(rows: list[np.ndarray]) -> np.ndarray:
    width = max(r.size for r in rows)
    out = np.zeros((len(rows), width))
    for i, r in enumerate(rows):
        out[i, : r.size] = r
    return out


def lowrank_eval_2d(m: LowRank2D, s, t):
    us = _check_unit(np.atleast_1d(to_unit(s, m.first_interval)))
    ut = _check_unit(np.atleast_1d(to_unit(t, m.second_interval)))
    us, ut = np.broadcast_arrays(us, ut)
    out = m.eval_unit(us.reshape(-1), ut.reshape(-1))
    return out[0] if np.ndim(s) == 0 and np.ndim(t) == 0 else out.reshape(us.shape)


def complete_pivot_cross(samples: np.ndarray, tol: float, max_rank: int):
    """Gaussian elimination with complete pivoting on a sample matrix.

    Returns (weights, first_slices, second_slices, pivots, residual), where
    ``first_slices[:, j]`` is the residual column through pivot j (a function
    of the first variable) and ``second_slices[j]`` the residual row.
    """
    resid = np.array(samples, dtype=float, copy=True)
    weights, firsts, seconds, pivots = [], [], [], []
    while len(weights) < max_rank:
        i, j = np.unravel_index(np.argmax(np.abs(resid)), resid.shape)
        pivot = resid[i, j]
        if abs(pivot) <= tol and weights:
            break
        col = resid[:, j].copy()
        row = resid[i, :].copy()
        if pivot == 0.0:
            weights.append(0.0)
            firsts.append(col)
            seconds.append(row)
            pivots.append((int(i), int(j)))
            break
        resid -= np.outer(col, row) / pivot
        weights.append(1.0 / pivot)
        firsts.append(col)
        seconds.append(row)
        pivots.append((int(i), int(j)))
        if abs(pivot) <= tol:
            break
    residual = float(np.max(np.abs(resid)))
    return np.array(weights), np.array(firsts).T, np.array(seconds), pivots, residual


def _tail_size(coeffs: np.ndarray) -> float:
    n = coeffs.shape[-1]
    tail = max(2, n // 8)
    return float(np.max(np.abs(coeffs[..., n - tail :]))) if n > tail else np.inf


def lowrank_from_grid(samples, tol: float, max_rank: int | None = None,
                      first_interval=(-1.0, 1.0), second_interval=(-1.0, 1.0),
                      trim: float | None = None) -> LowRank2D:
    """Low-rank skeleton of ``samples[i, j] = f(s_i, t_j)`` on a fixed Chebyshev grid."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or min(samples.shape) < 2:
        raise ValueError(f"need a 2-D sample grid with at least 2 points per axis, got {samples.shape}")
    max_rank = max_rank or min(samples.shape)
    w, firsts, seconds, pivots, residual = complete_pivot_cross(samples, tol, max_rank)
    if residual > tol:
        raise ConvergenceError(
            f"rank {len(w)} skeleton leaves residual {residual:.3e} > tol {tol:.3e}", residual=residual
        )
    return _assemble(w, firsts, seconds, pivots, residual, tol * TRIM_FACTOR if trim is None else trim,
                     first_interval, second_interval, samples.shape)


def _assemble(w, firsts, seconds, pivots, residual, trim, first_interval, second_interval, shape):
    row_c = _dct_coeffs(firsts, axis=0).T  # (k, n1+1)
    col_c = _dct_coeffs(seconds, axis=1)  # (k, n2+1)
    rows, cols = [], []
    for j in range(len(w)):
        col_scale = abs(w[j]) * max(np.max(np.abs(seconds[j])), 1e-300)
        row_scale = abs(w[j]) * max(np.max(np.abs(firsts[:, j])), 1e-300)
        r = Cheb1D(row_c[j], first_interval)
        c = Cheb1D(col_c[j], second_interval)
        if trim > 0:
            r = r.trimmed(trim / col_scale)
            c = c.trimmed(trim / row_scale)
        rows.append(r)
        cols.append(c)
    info = {
        "residual": residual,
        "grid": [shape[0] - 1, shape[1] - 1],
        "pivots": [list(p) for p in pivots],
    }
    return LowRank2D(np.asarray(w), tuple(rows), tuple(cols), first_interval, second_interval, info)


def lowrank_fit_2d(f: Callable[[np.ndarray, np.ndarray], np.ndarray], tol: float,
                   first_interval=(-1.0, 1.0), second_interval=(-1.0, 1.0),
                   max_rank: int = 64, orders: Sequence[int] = DEFAULT_ORDERS,
                   max_order: int | None = None, trim_factor: float = TRIM_FACTOR) -> LowRank2D:
    """Adaptive low-rank Chebyshev interpolant of a vectorized ``f(s, t)``.

    The function is sampled on nested Chebyshev grids; each variable is
    refined independently until the skeleton slices have decayed below
    ``tol`` in their trailing coefficients.  The elimination stops once the
    largest remaining residual on the grid is at most ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    schedule = sorted(o for o in orders if max_order is None or o <= max_order)
    if not schedule:
        raise ValueError("no admissible grid orders")
    i1 = i2 = 0
    while True:
        n1, n2 = schedule[i1], schedule[i2]
        s = from_unit(cheb_nodes(n1), first_interval)
        t = from_unit(cheb_nodes(n2), second_interval)
        samples = np.asarray(f(*np.meshgrid(s, t, indexing="ij")), dtype=float)
        if not np.all(np.isfinite(samples)):
            raise ConvergenceError("non-finite function samples on the construction grid")
        w, firsts, seconds, pivots, residual = complete_pivot_cross(samples, tol, max_rank)
        scales = np.abs(w)
        first_c = _dct_coeffs(firsts, axis=0).T * (scales * np.max(np.abs(seconds), axis=1))[:, None]
        second_c = _dct_coeffs(seconds, axis=1) * (scales * np.max(np.abs(firsts), axis=0))[:, None]
        ok1 = _tail_size(first_c) <= 0.1 * tol
        ok2 = _tail_size(second_c) <= 0.1 * tol
        if ok1 and ok2 and residual <= tol:
            break
        grow1 = not ok1 and i1 + 1 < len(schedule)
        grow2 = not ok2 and i2 + 1 < len(schedule)
        if residual > tol and not (grow1 or grow2):
            # rank cap hit on a resolved grid
            raise ConvergenceError(
                f"rank cap {max_rank} reached with residual {residual:.3e} > {tol:.3e}", residual=residual
            )
        if not (grow1 or grow2):
            raise ConvergenceError(
                f"slices unresolved at grid orders ({n1}, {n2}); tail "
                f"{max(_tail_size(first_c), _tail_size(second_c)):.3e} vs tol {tol:.3e}",
                residual=max(residual, _tail_size(first_c), _tail_size(second_c)),
            )
        i1 += grow1
        i2 += grow2
    return _assemble(w, firsts, seconds, pivots, residual, tol * trim_factor,
                     tuple(first_interval), tuple(second_interval), samples.shape)
