"""Finite-section laboratory for dual truncated Hankel operators on K_theta^perp."""
from .fourier import LaurentSeries, parse_series
from .inner import FiniteBlaschke, Monomial, parse_inner
from .modelspace import KPerpBasis

__all__ = ["LaurentSeries", "parse_series", "FiniteBlaschke", "Monomial", "parse_inner", "KPerpBasis"]
__version__ = "0.1.0"
