"""Supremum of integer random walks with a one-sided geometric tail."""

from .dist import (GeometricTail, IntegerPMF, PowerSeries, Side, StepDistribution,
                   SupremumLaw, convolve, mean, pgf_eval, series_mul, series_reciprocal,
                   step_from_left_tail, step_from_right_tail)
from .tandem import TandemParams

__all__ = [
    "GeometricTail", "IntegerPMF", "PowerSeries", "Side", "StepDistribution", "SupremumLaw",
    "TandemParams", "convolve", "mean", "pgf_eval", "series_mul", "series_reciprocal",
    "step_from_left_tail", "step_from_right_tail",
]
