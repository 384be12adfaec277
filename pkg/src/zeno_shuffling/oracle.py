"""Brute-force grid representation used to check the closed forms.

Free propagation is done exactly in momentum space (the free propagator is
diagonal there), so the only error left is spatial discretization and
domain truncation. Nothing here calls into the analytic module.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .params import PhysicalParams

DEFAULT_POINTS = 4096
DEFAULT_MARGIN = 10.0  # packet widths kept on each side of the centroid path
MOMENTUM_MARGIN = 10.0  # momentum widths the grid must resolve


class GridSizingError(ValueError):
    """Grid too small or too coarse; ``suggested`` is an adequate (x_min, x_max)."""

    def __init__(self, message: str, suggested: tuple[float, float] | None = None):
        super().__init__(message)
        self.suggested = suggested


@dataclass(frozen=True)
class GridSpec:
    """Periodic grid of ``n_points`` nodes on [x_min, x_max)."""

    x_min: float
    x_max: float
    n_points: int = DEFAULT_POINTS

    def __post_init__(self):
        n = self.n_points
        if n < 256 or n & (n - 1):
            raise GridSizingError(f"n_points must be a power of two >= 256, got {n}")
        if not self.x_max > self.x_min:
            raise GridSizingError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    @classmethod
    def for_params(cls, params: PhysicalParams, horizon: float, n_points: int = DEFAULT_POINTS) -> "GridSpec":
        lo, hi = required_domain(params, horizon)
        return cls(lo, hi, n_points)


def _width_at(params: PhysicalParams, t: float) -> float:
    tau = 2.0 * params.m * params.sigma0**2 / params.hbar
    return params.sigma0 * math.sqrt(1.0 + (t / tau) ** 2)


def required_domain(params: PhysicalParams, horizon: float, margin: float = DEFAULT_MARGIN) -> tuple[float, float]:
    end = params.x0 + params.p0 / params.m * horizon
    width = _width_at(params, horizon)
    return min(params.x0, end) - margin * width, max(params.x0, end) + margin * width


def check_grid(spec: GridSpec, params: PhysicalParams, horizon: float = 0.0) -> None:
    """Raise GridSizingError unless ``spec`` holds the packet up to ``horizon``."""
    lo, hi = required_domain(params, horizon)
    if spec.x_min > lo or spec.x_max < hi:
        raise GridSizingError(
            f"domain [{spec.x_min:g}, {spec.x_max:g}] does not cover [{lo:g}, {hi:g}] "
            f"({DEFAULT_MARGIN:g} packet widths around the centroid path up to t={horizon:g})",
            suggested=(lo, hi),
        )
    k_needed = (abs(params.p0) + MOMENTUM_MARGIN * params.hbar / (2.0 * params.sigma0)) / params.hbar
    if math.pi / spec.dx < k_needed:
        n_needed = 2 ** math.ceil(math.log2((spec.x_max - spec.x_min) * k_needed / math.pi))
        raise GridSizingError(
            f"grid spacing {spec.dx:g} cannot resolve wavenumbers up to {k_needed:g}; "
            f"use at least {n_needed} points",
            suggested=(spec.x_min, spec.x_max),
        )


@dataclass(frozen=True)
class GridState:
    spec: GridSpec
    amps: np.ndarray
    hbar: float
    mass: float

    @property
    def norm(self) -> float:
        # trapezoid rule on a periodic grid
        return float(np.sum(np.abs(self.amps) ** 2) * self.spec.dx)


def init_gaussian(spec: GridSpec, params: PhysicalParams, horizon: float = 0.0) -> GridState:
    check_grid(spec, params, horizon)
    y = spec.x - params.x0
    amps = (2.0 * np.pi * params.sigma0**2) ** -0.25 * np.exp(
        -(y**2) / (4.0 * params.sigma0**2) + 1j * params.p0 * y / params.hbar
    )
    return GridState(spec, amps, params.hbar, params.m)


@functools.lru_cache(maxsize=64)
def _kinetic_phase(n: int, dx: float, hbar: float, mass: float, dt: float) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    phase = np.exp(-1j * hbar * k**2 * dt / (2.0 * mass))
    phase.flags.writeable = False
    return phase


def propagate_free(state: GridState, dt: float) -> GridState:
    if dt < 0:
        raise ValueError("dt must be >= 0")
    spec = state.spec
    phase = _kinetic_phase(spec.n_points, spec.dx, state.hbar, state.mass, float(dt))
    amps = scipy.fft.ifft(scipy.fft.fft(state.amps) * phase)
    return GridState(spec, amps, state.hbar, state.mass)


def _same_grid(a: GridState, b: GridState):
    if a.spec != b.spec:
        raise ValueError("states live on different grids")


def overlap(a: GridState, b: GridState) -> complex:
    """<a|b> by the periodic trapezoid rule."""
    _same_grid(a, b)
    return complex(np.sum(np.conj(a.amps) * b.amps) * a.spec.dx)


def project_measure(state: GridState, reference: GridState) -> GridState:
    """Collapse onto ``reference`` keeping the overlap as amplitude (no renormalization)."""
    _same_grid(state, reference)
    return GridState(reference.spec, reference.amps * overlap(reference, state), reference.hbar, reference.mass)


def position_mean(state: GridState) -> float:
    return float(np.sum(state.spec.x * np.abs(state.amps) ** 2) * state.spec.dx / state.norm)


def position_variance(state: GridState) -> float:
    mean = position_mean(state)
    return float(np.sum((state.spec.x - mean) ** 2 * np.abs(state.amps) ** 2) * state.spec.dx / state.norm)


def _momentum_weights(state: GridState) -> np.ndarray:
    power = np.abs(scipy.fft.fft(state.amps)) ** 2
    return power / power.sum()


def momentum_mean(state: GridState) -> float:
    return float(np.sum(state.hbar * state.spec.k * _momentum_weights(state)))


def energy_moments(state: GridState) -> tuple[float, float]:
    """(<H>, sqrt(<H^2> - <H>^2)) by quadrature in momentum space."""
    w = _momentum_weights(state)
    energy = (state.hbar * state.spec.k) ** 2 / (2.0 * state.mass)
    mean = float(np.sum(w * energy))
    second = float(np.sum(w * energy**2))
    return mean, math.sqrt(max(second - mean**2, 0.0))


def correlation_series(params: PhysicalParams, times, spec: GridSpec) -> np.ndarray:
    """<Psi_0|Psi_t> for each t, each propagated directly from t = 0."""
    times = np.asarray(times, dtype=float)
    psi0 = init_gaussian(spec, params, float(times.max(initial=0.0)))
    return np.array([overlap(psi0, propagate_free(psi0, t)) for t in times])


def measurement_pipeline(
    params: PhysicalParams,
    delta_t: float,
    total_time: float,
    sample_dt: float,
    spec: GridSpec,
) -> tuple[np.ndarray, np.ndarray]:
    """Step the grid state, collapsing onto the initial packet every ``delta_t``.

    Returns the sample times and <Psi_0|state(t)>; at a measurement instant
    the post-measurement value is recorded.
    """
    per_measure = round(delta_t / sample_dt)
    if per_measure < 1 or abs(per_measure * sample_dt - delta_t) > 1e-9 * delta_t:
        raise ValueError("delta_t must be an integer multiple of sample_dt")
    n_steps = int(math.floor(total_time / sample_dt + 1e-9))
    reference = init_gaussian(spec, params, per_measure * sample_dt)
    state = reference
    values = np.empty(n_steps + 1, dtype=complex)
    values[0] = overlap(reference, state)
    for step in range(1, n_steps + 1):
        state = propagate_free(state, sample_dt)
        if step % per_measure == 0:
            state = project_measure(state, reference)
        values[step] = overlap(reference, state)
    return np.arange(n_steps + 1) * sample_dt, values
