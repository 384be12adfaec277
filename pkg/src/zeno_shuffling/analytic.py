"""Closed-form free evolution of the Gaussian packet and its correlation function.

All functions broadcast over numpy arrays in ``x`` and ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .params import PhysicalParams, derive_scales

TRACE_KINDS = ("unperturbed", "perturbed", "envelope", "fit")


@dataclass(frozen=True)
class ComplexSpread:
    value: np.ndarray | complex
    modulus: np.ndarray | float


@dataclass(frozen=True)
class WaveSample:
    x: np.ndarray | float
    t: np.ndarray | float
    amplitude: np.ndarray | complex
    real_phase: np.ndarray | float  # S(x, t) / hbar


@dataclass(frozen=True)
class CorrelationTrace:
    """Complex correlation sampled on an increasing time grid."""

    times: np.ndarray
    values: np.ndarray
    kind: str

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if times.ndim != 1 or times.shape != values.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if times.size and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.kind not in TRACE_KINDS:
            raise ValueError(f"unknown trace kind {self.kind!r}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def phase(self) -> np.ndarray:
        return np.unwrap(np.angle(self.values))


def _check_time(t):
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be >= 0")


def complex_spread(params: PhysicalParams, t) -> ComplexSpread:
    tau = derive_scales(params).tau
    t = np.asarray(t, dtype=float)
    value = params.sigma0 * (1.0 + 1j * t / tau)
    return ComplexSpread(value=value, modulus=params.sigma0 * np.sqrt(1.0 + (t / tau) ** 2))


def centroid(params: PhysicalParams, t):
    return params.x0 + params.p0 / params.m * np.asarray(t, dtype=float)


def psi_at(params: PhysicalParams, x, t):
    """Wave function of the freely evolved packet at ``(x, t)``."""
    _check_time(t)
    hbar, s0, p0 = params.hbar, params.sigma0, params.p0
    e0 = derive_scales(params).e0
    t = np.asarray(t, dtype=float)
    s_tilde = complex_spread(params, t).value
    dx = np.asarray(x, dtype=float) - centroid(params, t)
    norm = (2.0 * np.pi) ** -0.25 / np.sqrt(s_tilde)
    return norm * np.exp(-(dx**2) / (4.0 * s0 * s_tilde) + 1j * p0 * dx / hbar + 1j * e0 * t / hbar)


def real_phase(params: PhysicalParams, x, t):
    """S(x, t)/hbar: propagation, spreading, energy and normalization phases."""
    hbar, m, s0, p0 = params.hbar, params.m, params.sigma0, params.p0
    e0 = derive_scales(params).e0
    t = np.asarray(t, dtype=float)
    sigma_t = complex_spread(params, t).modulus
    dx = np.asarray(x, dtype=float) - centroid(params, t)
    action = (
        p0 * dx
        + hbar**2 * t / (8.0 * m * s0**2 * sigma_t**2) * dx**2
        + e0 * t
        - 0.5 * hbar * np.arctan(hbar * t / (2.0 * m * s0**2))
    )
    return action / hbar


def wave_sample(params: PhysicalParams, x, t) -> WaveSample:
    return WaveSample(x=x, t=t, amplitude=psi_at(params, x, t), real_phase=real_phase(params, x, t))


def density_exact(params: PhysicalParams, x, t):
    sigma_t = complex_spread(params, t).modulus
    dx = np.asarray(x, dtype=float) - centroid(params, t)
    return np.exp(-(dx**2) / (2.0 * sigma_t**2)) / np.sqrt(2.0 * np.pi * sigma_t**2)


def density_fresnel(params: PhysicalParams, x, t):
    """Short-time density: parabolic falloff of the peak, width frozen at sigma0."""
    hbar, m, s0 = params.hbar, params.m, params.sigma0
    t = np.asarray(t, dtype=float)
    dx = np.asarray(x, dtype=float) - centroid(params, t)
    falloff = 1.0 - hbar**2 / (8.0 * m**2 * s0**4) * t**2
    return falloff * np.exp(-(dx**2) / (2.0 * s0**2)) / np.sqrt(2.0 * np.pi * s0**2)


def density_fraunhofer(params: PhysicalParams, x, t):
    """Long-time density, width growing linearly and peak decaying as tau/t."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("the Fraunhofer form is singular at t = 0")
    s0 = params.sigma0
    ratio = derive_scales(params).tau / t
    dx = np.asarray(x, dtype=float) - centroid(params, t)
    return ratio * np.exp(-(ratio**2) * dx**2 / (2.0 * s0**2)) / np.sqrt(2.0 * np.pi * s0**2)


def energy_moments(params: PhysicalParams) -> tuple[float, float]:
    """Mean energy and energy spread of the packet (both time independent)."""
    scales = derive_scales(params)
    return scales.mean_h, scales.delta_e


def correlation_phase(params: PhysicalParams, t):
    """Unwrapped phase of C(t); tends to -pi/4 as t grows."""
    _check_time(t)
    scales = derive_scales(params)
    t = np.asarray(t, dtype=float)
    u = t / (2.0 * scales.tau)
    return -(scales.e0 * t / params.hbar) / (1.0 + u**2) - 0.5 * np.arctan(u)


def correlation_modulus(params: PhysicalParams, t):
    _check_time(t)
    scales = derive_scales(params)
    t = np.asarray(t, dtype=float)
    u2 = (t / (2.0 * scales.tau)) ** 2
    damping = scales.e0 * t**2 / (4.0 * params.m * params.sigma0**2 * (1.0 + u2))
    return (1.0 + u2) ** -0.25 * np.exp(-damping)


def correlation_unperturbed(params: PhysicalParams, t):
    """C(t) = <Psi_0|Psi_t> for free evolution."""
    return correlation_modulus(params, t) * np.exp(1j * correlation_phase(params, t))


def survival_unperturbed(params: PhysicalParams, t):
    _check_time(t)
    scales = derive_scales(params)
    t = np.asarray(t, dtype=float)
    u2 = (t / (2.0 * scales.tau)) ** 2
    damping = scales.e0 * t**2 / (2.0 * params.m * params.sigma0**2 * (1.0 + u2))
    return np.exp(-damping) / np.sqrt(1.0 + u2)


def survival_short_time(params: PhysicalParams, t):
    """Quadratic short-time survival, equal to 1 - (t / tau_Z)**2."""
    _check_time(t)
    scales = derive_scales(params)
    t = np.asarray(t, dtype=float)
    return 1.0 - (1.0 + 2.0 * scales.momentum_ratio**2) * t**2 / (8.0 * scales.tau**2)


OVERLAP_RATIO_MAX = 1.0 / np.sqrt(2.0)


def overlap_condition_ok(params: PhysicalParams) -> bool:
    """True when spreading, not translation, dominates the loss of overlap.

    The threshold |p0|/p_s <= 1/sqrt(2) is closed; it is tested as
    2 (p0/p_s)**2 <= 1 with a 1e-12 slack so the exact boundary passes.
    """
    ratio = derive_scales(params).momentum_ratio
    return bool(2.0 * ratio**2 <= 1.0 + 1e-12)


def _gaussian_coefficients(params: PhysicalParams, t):
    # Psi_t(x) = exp(-a y**2 + b y + g), y = x - x0
    scales = derive_scales(params)
    s_tilde = params.sigma0 * (1.0 + 1j * t / scales.tau)
    k0 = params.p0 / params.hbar
    shift = params.p0 / params.m * t
    a = 1.0 / (4.0 * params.sigma0 * s_tilde)
    b = 2.0 * a * shift + 1j * k0
    g = (
        -a * shift**2
        - 1j * k0 * shift
        + 1j * scales.e0 * t / params.hbar
        - 0.25 * np.log(2.0 * np.pi)
        - 0.5 * np.log(s_tilde)
    )
    return a, b, g


def two_time_correlation(params: PhysicalParams, t1, t2):
    """<Psi_t1|Psi_t2> from the position-space Gaussian integral.

    Independent of the momentum-space route used by ``correlation_unperturbed``;
    agreement with C(t2 - t1) is the time-translation property.
    """
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if np.any(t1 < 0) or np.any(t2 < 0):
        raise ValueError("times must be >= 0")
    a1, b1, g1 = _gaussian_coefficients(params, t1)
    a2, b2, g2 = _gaussian_coefficients(params, t2)
    quad = np.conj(a1) + a2
    lin = np.conj(b1) + b2
    const = np.conj(g1) + g2
    return np.sqrt(np.pi / quad) * np.exp(lin**2 / (4.0 * quad) + const)


def locate_inflection(f: Callable[[float], float], lo: float, hi: float, h: float | None = None) -> float:
    """Root of the central-difference second derivative of ``f`` inside [lo, hi]."""
    if h is None:
        h = 1e-3 * (hi - lo)

    def second(t):
        return f(t + h) - 2.0 * f(t) + f(t - h)

    return brentq(second, lo, hi, xtol=1e-14 * max(abs(hi), 1.0), rtol=4 * np.finfo(float).eps)
