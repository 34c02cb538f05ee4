"""Implied volatility by low-rank Chebyshev interpolation over a split price domain."""

from .bs import OptionQuote, normalize_quote, normalized_call, reduce_to_otm, vega_normalized
from .builder import PRESETS, SurfaceModel, build_simple_surface, build_surface
from .cheb import Cheb1D, LowRank2D, cheb_fit_1d, cheb_nodes, lowrank_fit_2d, tensor_fit_2d
from .domain import Area
from .engine import BatchResult, InversionResult, dvdc, invert, invert_batch, invert_quote
from .errors import (
    ArbitrageError,
    ChebIVError,
    ConvergenceError,
    DomainError,
    InvalidQuoteError,
    ModelFormatError,
    ModelVersionError,
)
from .laplace import LaplaceSurface, build_laplace_surface, laplace_invert, laplace_normalized_call
from .oracle import implied_vol_batch, implied_vol_brent, implied_vol_newton, implied_vol_oracle
from .persist import load_model, save_model

__version__ = "0.1.0"
