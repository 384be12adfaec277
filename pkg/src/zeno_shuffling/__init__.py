"""Free Gaussian wave packet under periodic projective measurements.

Closed-form correlation and survival functions, the measured (shuffled)
dynamics with its exponential envelope and fit, Zeno / anti-Zeno regime
labels, and a grid-propagation oracle that checks all of it.
"""

from .analytic import (
    CorrelationTrace,
    correlation_phase,
    correlation_unperturbed,
    energy_moments,
    overlap_condition_ok,
    psi_at,
    survival_short_time,
    survival_unperturbed,
    two_time_correlation,
)
from .params import DerivedScales, NaturalRegime, ParameterError, PhysicalParams, classify_natural_regime, derive_scales
from .shuffling import (
    FitError,
    MeasurementSchedule,
    Regime,
    classify_regime,
    crossing_time,
    envelope,
    fit_exponential,
    markov_distance,
    shuffled_survival,
    shuffled_trace,
    simulate,
    steady_arrow_survival,
)

__all__ = [
    "CorrelationTrace",
    "DerivedScales",
    "FitError",
    "MeasurementSchedule",
    "NaturalRegime",
    "ParameterError",
    "PhysicalParams",
    "Regime",
    "classify_natural_regime",
    "classify_regime",
    "correlation_phase",
    "correlation_unperturbed",
    "crossing_time",
    "derive_scales",
    "energy_moments",
    "envelope",
    "fit_exponential",
    "markov_distance",
    "overlap_condition_ok",
    "psi_at",
    "shuffled_survival",
    "shuffled_trace",
    "simulate",
    "steady_arrow_survival",
    "survival_short_time",
    "survival_unperturbed",
    "two_time_correlation",
]
