"""Physical parameters of the free Gaussian packet and its characteristic scales."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class ParameterError(ValueError):
    """Invalid physical or schedule parameter; ``field`` names the offender."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message

    def __reduce__(self):
        return type(self), (self.field, self.message)


@dataclass(frozen=True)
class PhysicalParams:
    """Gaussian packet definition. Defaults are the reference setup in natural units (hbar = 1)."""

    hbar: float = 1.0
    m: float = 0.1
    sigma0: float = 0.5
    x0: float = 0.0
    p0: float = 0.0

    def __post_init__(self):
        for name in ("hbar", "m", "sigma0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(name, f"must be finite and > 0, got {value!r}")
        for name in ("x0", "p0"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(name, f"must be finite, got {value!r}")


@dataclass(frozen=True)
class DerivedScales:
    tau: float
    tau_zeno: float
    tau_inflx: float
    p_spread: float
    e0: float
    mean_h: float
    delta_e: float
    momentum_ratio: float
    inv_tau_zeno_sq: float  # (delta_e / hbar)**2 without the sqrt round trip


def derive_scales(params: PhysicalParams) -> DerivedScales:
    hbar, m, s0, p0 = params.hbar, params.m, params.sigma0, params.p0
    tau = 2.0 * m * s0**2 / hbar
    p_spread = hbar / (2.0 * s0)
    e0 = p0**2 / (2.0 * m)
    mean_h = e0 + p_spread**2 / (2.0 * m)
    delta_e = math.sqrt(2.0 * p_spread**2 / m) * math.sqrt(p0**2 / (2.0 * m) + p_spread**2 / (4.0 * m))
    variance = (2.0 * p_spread**2 / m) * (p0**2 / (2.0 * m) + p_spread**2 / (4.0 * m))
    return DerivedScales(
        tau=tau,
        tau_zeno=hbar / delta_e,
        tau_inflx=math.sqrt(2.0) * tau,
        p_spread=p_spread,
        e0=e0,
        mean_h=mean_h,
        delta_e=delta_e,
        momentum_ratio=p0 / p_spread,
        inv_tau_zeno_sq=variance / hbar**2,
    )


class NaturalRegime(str, enum.Enum):
    EHRENFEST_HUYGENS = "EhrenfestHuygens"
    FRESNEL = "Fresnel"
    TRANSITION = "Transition"
    FRAUNHOFER = "Fraunhofer"


# fractions of tau
EHRENFEST_HUYGENS_MAX = 1.0 / 100.0
FRESNEL_MAX = 1.0 / 3.0
FRAUNHOFER_MIN = 10.0


def classify_natural_regime(t: float, scales: DerivedScales, keep_transition: bool = False) -> NaturalRegime:
    """Label the free-spreading stage reached at time ``t``.

    The window between ``tau/3`` and ``10 tau`` is neither quadratic nor linear
    spreading. It is reported as ``FRESNEL`` unless ``keep_transition`` is set.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    ratio = t / scales.tau
    if ratio < EHRENFEST_HUYGENS_MAX:
        return NaturalRegime.EHRENFEST_HUYGENS
    if ratio < FRESNEL_MAX:
        return NaturalRegime.FRESNEL
    if ratio > FRAUNHOFER_MIN:
        return NaturalRegime.FRAUNHOFER
    return NaturalRegime.TRANSITION if keep_transition else NaturalRegime.FRESNEL
