"""Numerical verification toolkit for weighted harmonic-conjugate estimates."""

from harmconj.series import HarmonicFunction, PowerSeries, harmonic_conjugate
from harmconj.quadrature import DEFAULT_GRID, NormSpec, PolarGrid, weighted_p_norm
from harmconj.weights import DivergenceError, MeasureSpec, WeightSpec, bb_constant
from harmconj.carleson import CarlesonTree, SquareId

__all__ = [
    "CarlesonTree",
    "DEFAULT_GRID",
    "DivergenceError",
    "HarmonicFunction",
    "MeasureSpec",
    "NormSpec",
    "PolarGrid",
    "PowerSeries",
    "SquareId",
    "WeightSpec",
    "bb_constant",
    "harmonic_conjugate",
    "weighted_p_norm",
]
