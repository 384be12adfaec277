"""Periodic projective measurements on the free packet ("quantum shuffling").

The pointer state is the initial packet itself. Amplitudes are not
renormalized after a measurement, so every survival returned here is an
absolute probability.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import least_squares

from .analytic import (
    CorrelationTrace,
    correlation_modulus,
    correlation_unperturbed,
    survival_unperturbed,
    two_time_correlation,
)
from .params import DerivedScales, ParameterError, PhysicalParams, derive_scales

# slack when deciding which measurement interval a float time falls in
_INDEX_SLACK = 1e-9
# relative margin for "strictly below" so rounding ties are not crossings
_CROSSING_REL_TIE = 1e-12


class FitError(RuntimeError):
    """The exponential fit did not converge."""


@dataclass(frozen=True)
class MeasurementSchedule:
    delta_t: float
    total_time: float = 5.0
    sample_dt: float = 1e-4

    def __post_init__(self):
        for name in ("delta_t", "total_time", "sample_dt"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(name, f"must be finite and > 0, got {value!r}")
        if self.sample_dt > self.delta_t:
            raise ParameterError("sample_dt", "must not exceed delta_t")
        if self.total_time < self.delta_t:
            raise ParameterError("total_time", "must be at least delta_t")

    @property
    def n_samples(self) -> int:
        return int(math.floor(self.total_time / self.sample_dt + _INDEX_SLACK)) + 1

    def sample_times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.sample_dt

    def measurement_count(self, t):
        """Measurements performed up to and including ``t``."""
        return np.floor(np.asarray(t, dtype=float) / self.delta_t + _INDEX_SLACK).astype(np.int64)

    def measurement_times(self) -> np.ndarray:
        n = int(self.measurement_count(self.total_time))
        return np.arange(1, n + 1) * self.delta_t

    def split(self, t):
        """(measurements so far, time elapsed since the last one)."""
        t = np.asarray(t, dtype=float)
        n = self.measurement_count(t)
        return n, np.clip(t - n * self.delta_t, 0.0, None)

    def check_time(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.total_time * (1 + 1e-12)):
            raise ValueError(f"t must lie in [0, {self.total_time}]")


class Regime(str, enum.Enum):
    PURE_ANTI_ZENO = "PureAntiZeno"
    CONVEX_ANTI_ZENO = "ConvexAntiZeno"
    CROSSOVER_ZENO = "CrossoverZeno"
    ZENO = "Zeno"


@dataclass(frozen=True)
class RegimeLabel:
    label: Regime
    bounds_used: tuple[float, float, float]  # (tau, tau_inflx, tau_zeno)


@dataclass(frozen=True)
class MarkovDistance:
    times: np.ndarray
    values: np.ndarray
    max_abs: float
    l2: float
    envelope_rate_amp: float
    fitted_rate_amp: float


@dataclass(frozen=True)
class ShuffleResult:
    trace: CorrelationTrace
    envelope_rate: float
    envelope_rate_amp: float
    fitted_rate_amp: float | None
    markov_distance: MarkovDistance | None
    regime: RegimeLabel
    crossing_time: float | None
    fit_error: str | None = None


def shuffled_correlation(params: PhysicalParams, schedule: MeasurementSchedule, t):
    """Complex amplitude of the measured packet on the initial state.

    At a measurement instant the post-measurement value is returned.
    """
    schedule.check_time(t)
    n, rest = schedule.split(t)
    c_dt = complex(correlation_unperturbed(params, schedule.delta_t))
    return c_dt**n * correlation_unperturbed(params, rest)


def shuffled_modulus(params: PhysicalParams, schedule: MeasurementSchedule, t):
    schedule.check_time(t)
    n, rest = schedule.split(t)
    return float(correlation_modulus(params, schedule.delta_t)) ** n * correlation_modulus(params, rest)


def shuffled_survival(params: PhysicalParams, schedule: MeasurementSchedule, t):
    """Survival after ``n`` collapses: P(dt)**n times the survival since the last one."""
    schedule.check_time(t)
    n, rest = schedule.split(t)
    return float(survival_unperturbed(params, schedule.delta_t)) ** n * survival_unperturbed(params, rest)


def steady_arrow_survival(params: PhysicalParams, schedule: MeasurementSchedule, t):
    """Survival when the packet is never collapsed but the reference is reset.

    Each elapsed interval contributes its attenuation
    |<Psi_{t_{k-1}}|Psi_{t_k}>|**2, and the running factor is the overlap
    with the packet as photographed at the last measurement.
    """
    schedule.check_time(t)
    t = np.asarray(t, dtype=float)
    n, _ = schedule.split(t)
    n_max = int(np.max(n)) if n.size else 0
    marks = np.arange(n_max + 1) * schedule.delta_t
    alphas = attenuation_factors(params, schedule, n_max)
    prefix = np.concatenate(([1.0], np.cumprod(alphas)))
    last = marks[n]
    running = np.abs(two_time_correlation(params, last, np.maximum(t, last))) ** 2
    return prefix[n] * running


def attenuation_factors(params: PhysicalParams, schedule: MeasurementSchedule, count: int) -> np.ndarray:
    """alpha_k = |<Psi_{t_{k-1}}|Psi_{t_k}>|**2 for k = 1..count."""
    marks = np.arange(count + 1) * schedule.delta_t
    return np.abs(two_time_correlation(params, marks[:-1], marks[1:])) ** 2


def unperturbed_trace(params: PhysicalParams, schedule: MeasurementSchedule) -> CorrelationTrace:
    times = schedule.sample_times()
    return CorrelationTrace(times, correlation_unperturbed(params, times), "unperturbed")


def shuffled_trace(params: PhysicalParams, schedule: MeasurementSchedule) -> CorrelationTrace:
    times = schedule.sample_times()
    return CorrelationTrace(times, shuffled_correlation(params, schedule, times), "perturbed")


def envelope_rate(scales: DerivedScales, delta_t: float) -> float:
    """Decay rate of the survival envelope in the frequent-measurement limit.

    Equal to delta_t / tau_Z**2, evaluated from the energy variance directly.
    """
    return delta_t * scales.inv_tau_zeno_sq


def envelope_rate_amp(scales: DerivedScales, delta_t: float) -> float:
    return envelope_rate(scales, delta_t) / 2.0


def envelope(params: PhysicalParams, schedule: MeasurementSchedule) -> CorrelationTrace:
    rate = envelope_rate_amp(derive_scales(params), schedule.delta_t)
    times = schedule.sample_times()
    return CorrelationTrace(times, np.exp(-rate * times), "envelope")


def _window_mask(times: np.ndarray, window: tuple[float, float]) -> np.ndarray:
    lo, hi = window
    span = times[-1] - times[0] if times.size > 1 else 1.0
    eps = 1e-12 * max(span, 1.0)
    if lo > hi:
        raise ValueError(f"fit window {window} is reversed")
    if times.size == 0 or lo < times[0] - eps or hi > times[-1] + eps:
        raise ValueError(f"fit window {window} outside the trace domain")
    return (times >= lo - eps) & (times <= hi + eps)


def fit_exponential(trace: CorrelationTrace, window: tuple[float, float], initial: float | None = None) -> float:
    """Least-squares rate of exp(-g t) against |C| on ``window``, with g >= 0.

    Unit amplitude at t = 0 is imposed. ``initial`` defaults to a log-linear
    estimate through the origin.
    """
    mask = _window_mask(trace.times, window)
    t = trace.times[mask]
    y = trace.modulus[mask]
    if t.size < 3:
        raise ValueError(f"fit window {window} holds {t.size} samples, need at least 3")

    if initial is None:
        pos = (y > 0) & (t > 0)
        initial = max(-np.sum(t[pos] * np.log(y[pos])) / np.sum(t[pos] ** 2), 0.0) if pos.any() else 1.0

    def residual(g):
        return np.exp(-g[0] * t) - y

    def jacobian(g):
        return (-t * np.exp(-g[0] * t))[:, None]

    result = least_squares(
        residual,
        x0=[max(float(initial), 0.0)],
        jac=jacobian,
        bounds=(0.0, np.inf),
        method="trf",
        xtol=1e-12,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=500,
    )
    if not result.success:
        raise FitError(f"exponential fit did not converge: {result.message}")
    return float(result.x[0])


def markov_distance(
    params: PhysicalParams,
    schedule: MeasurementSchedule,
    fit_window: tuple[float, float] | None = None,
    trace: CorrelationTrace | None = None,
) -> MarkovDistance:
    """Gap between the estimated envelope and the fitted exponential."""
    if fit_window is None:
        fit_window = (0.0, schedule.total_time)
    if trace is None:
        trace = shuffled_trace(params, schedule)
    rate_est = envelope_rate_amp(derive_scales(params), schedule.delta_t)
    rate_fit = fit_exponential(trace, fit_window, initial=rate_est)
    mask = _window_mask(trace.times, fit_window)
    t = trace.times[mask]
    delta = np.exp(-rate_est * t) - np.exp(-rate_fit * t)
    l2 = math.sqrt(trapezoid(delta**2, t)) if t.size > 1 else 0.0
    return MarkovDistance(
        times=t,
        values=delta,
        max_abs=float(np.max(np.abs(delta))),
        l2=l2,
        envelope_rate_amp=rate_est,
        fitted_rate_amp=rate_fit,
    )


def classify_regime(scales: DerivedScales, delta_t: float) -> RegimeLabel:
    """Place the measurement interval against tau, tau_inflx and tau_Z.

    Tested in that order of precedence so every interval gets one label even
    when a large p0 pushes tau_Z below tau_inflx.
    """
    if not delta_t > 0:
        raise ValueError(f"delta_t must be > 0, got {delta_t!r}")
    bounds = (scales.tau, scales.tau_inflx, scales.tau_zeno)
    if delta_t >= scales.tau_zeno:
        label = Regime.PURE_ANTI_ZENO
    elif delta_t > scales.tau_inflx:
        label = Regime.CONVEX_ANTI_ZENO
    elif delta_t >= scales.tau:
        label = Regime.CROSSOVER_ZENO
    else:
        label = Regime.ZENO
    return RegimeLabel(label=label, bounds_used=bounds)


def crossing_time(params: PhysicalParams, schedule: MeasurementSchedule) -> float | None:
    """First time the measured |C| drops strictly below the free |C|.

    Located on the sample grid, then bisected on the closed forms down to
    sample_dt / 10. Returns None when no crossing occurs within total_time.
    """

    def below(t):
        return shuffled_modulus(params, schedule, t) < correlation_modulus(params, t) * (1.0 - _CROSSING_REL_TIE)

    times = schedule.sample_times()
    hits = np.flatnonzero(below(times[1:]))
    if hits.size == 0:
        return None
    idx = hits[0] + 1
    lo, hi = float(times[idx - 1]), float(times[idx])
    while hi - lo > schedule.sample_dt / 10.0:
        mid = 0.5 * (lo + hi)
        if below(mid):
            hi = mid
        else:
            lo = mid
    return hi


def simulate(
    params: PhysicalParams,
    schedule: MeasurementSchedule,
    fit_window: tuple[float, float] | None = None,
) -> ShuffleResult:
    """Perturbed trace plus every derived diagnostic for one schedule.

    A failed fit leaves ``fitted_rate_amp`` and ``markov_distance`` empty and
    records the reason in ``fit_error``.
    """
    scales = derive_scales(params)
    trace = shuffled_trace(params, schedule)
    distance, fit_error = None, None
    try:
        distance = markov_distance(params, schedule, fit_window, trace=trace)
    except FitError as exc:
        fit_error = str(exc)
    return ShuffleResult(
        trace=trace,
        envelope_rate=envelope_rate(scales, schedule.delta_t),
        envelope_rate_amp=envelope_rate_amp(scales, schedule.delta_t),
        fitted_rate_amp=distance.fitted_rate_amp if distance else None,
        markov_distance=distance,
        regime=classify_regime(scales, schedule.delta_t),
        crossing_time=crossing_time(params, schedule),
        fit_error=fit_error,
    )
