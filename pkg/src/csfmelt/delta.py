"""Regularized delta functions for continuum surface fluxes.

The classical delta is the magnitude of the indicator gradient.  Parameter-scaled
deltas multiply it by an interpolated material weight w(chi) and renormalize
with c = 1 / int_0^1 w(u) du, so that every variant integrates to one across
the band.  The weights follow the heat-capacity interpolation cases:

    V1  w = arithmetic(alpha)            alpha = rho*cp
    V2  w = harmonic(alpha)              alpha = rho*cp
    V3  w = arithmetic(alpha)*arithmetic(beta)   alpha = rho, beta = cp
    V4  w = harmonic(alpha)*arithmetic(beta)     alpha = rho, beta = cp
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError
from .fields import _finite, _out, _positive, indicator

CASES = ("classical", "V1", "V2", "V3", "V4")

# below this relative phase contrast the harmonic closed forms switch to series
_SERIES_SWITCH = 1e-3


@dataclass(frozen=True)
class PhasePair:
    gas: float
    liquid: float

    def __post_init__(self):
        if not (np.isfinite(self.gas) and np.isfinite(self.liquid)):
            raise InvalidInputError("phase values must be finite")

    def require_positive(self):
        if self.gas <= 0.0 or self.liquid <= 0.0:
            raise InvalidInputError(
                f"harmonic interpolation needs positive phase values, got {self}")
        return self

    def scaled(self, other: "PhasePair") -> "PhasePair":
        return PhasePair(self.gas * other.gas, self.liquid * other.liquid)


def interp_arithmetic(pair: PhasePair, chi):
    chi_a = _finite("chi", chi)
    return _out(pair.gas * (1.0 - chi_a) + pair.liquid * chi_a, chi)


def interp_harmonic(pair: PhasePair, chi):
    pair.require_positive()
    chi_a = _finite("chi", chi)
    return _out(1.0 / ((1.0 - chi_a) / pair.gas + chi_a / pair.liquid), chi)


# --------------------------------------------------------------------------
# unit-interval integrals of the weights
# --------------------------------------------------------------------------

def _log_ratio_over_diff(ag, al):
    """ag*al*ln(ag/al)/(ag-al), i.e. int_0^1 harmonic(u) du, stable for ag ~ al."""
    x = ag / al - 1.0
    if x == 0.0:
        return ag
    return ag * np.log1p(x) / x


def _harmonic_first_moment(ag, al):
    """int_0^1 u * harmonic(u) du."""
    a = 1.0 / ag
    bb = 1.0 / al - 1.0 / ag
    s = bb / a
    if abs(s) < _SERIES_SWITCH:
        # 1/a * sum_n (-s)^n / (n + 2)
        return ag * sum((-s) ** n / (n + 2) for n in range(12))
    return 1.0 / bb - a * np.log(ag / al) / bb**2


@dataclass(frozen=True)
class InterpolationCase:
    """Delta/heat-capacity interpolation variant with its phase parameters.

    ``alpha`` is the (first) interpolated parameter; ``beta`` the arithmetic
    second factor for V3/V4.  The classical variant ignores both.
    """

    variant: str
    alpha: Optional[PhasePair] = None
    beta: Optional[PhasePair] = None

    def __post_init__(self):
        if self.variant not in CASES:
            raise InvalidInputError(
                f"unknown case {self.variant!r}; expected one of {', '.join(CASES)}")
        if self.variant != "classical" and self.alpha is None:
            raise InvalidInputError(f"case {self.variant} needs an alpha phase pair")
        if self.variant in ("V3", "V4") and self.beta is None:
            raise InvalidInputError(f"case {self.variant} needs a beta phase pair")
        if self.variant in ("V2", "V4"):
            self.alpha.require_positive()

    @property
    def harmonic(self) -> bool:
        return self.variant in ("V2", "V4")

    def weight(self, chi):
        """Interpolated weight w(chi); equals the effective heat capacity for V1-V4."""
        v = self.variant
        if v == "classical":
            return _out(np.ones_like(np.asarray(chi, dtype=float)), chi)
        if v == "V1":
            return interp_arithmetic(self.alpha, chi)
        if v == "V2":
            return interp_harmonic(self.alpha, chi)
        if v == "V3":
            return interp_arithmetic(self.alpha, chi) * interp_arithmetic(self.beta, chi)
        return interp_harmonic(self.alpha, chi) * interp_arithmetic(self.beta, chi)

    def weight_integral(self) -> float:
        """int_0^1 w(u) du in closed form."""
        v = self.variant
        if v == "classical":
            return 1.0
        ag, al = self.alpha.gas, self.alpha.liquid
        if v == "V1":
            return 0.5 * (ag + al)
        if v == "V2":
            return _log_ratio_over_diff(ag, al)
        bg, bl = self.beta.gas, self.beta.liquid
        if v == "V3":
            return (2 * ag * bg + ag * bl + al * bg + 2 * al * bl) / 6.0
        return bg * _log_ratio_over_diff(ag, al) + (bl - bg) * _harmonic_first_moment(ag, al)


def density_scaled(rho: PhasePair) -> InterpolationCase:
    """Delta weighted by the arithmetic density, used for recoil-pressure forces."""
    return InterpolationCase("V1", alpha=rho)


def correction_factor(case: InterpolationCase) -> float:
    """Normalization c = 1 / int_0^1 w(u) du making the scaled delta integrate to 1."""
    integral = case.weight_integral()
    if not np.isfinite(integral) or integral <= 0.0:
        raise InvalidInputError(f"weight of {case.variant} does not have a positive integral")
    return 1.0 / integral


def delta_classical(d, eps):
    """|grad chi| = (1 + cos(2 pi d/eps)) / eps on |d| <= eps/2, zero elsewhere."""
    d_arr = _finite("d", d)
    eps = _positive("eps", eps)
    inside = np.abs(d_arr) <= 0.5 * eps
    val = np.where(inside, (1.0 + np.cos(2.0 * np.pi * d_arr / eps)) / eps, 0.0)
    return _out(val, d)


def delta_scaled(case: InterpolationCase, d, eps, *, correction: Optional[float] = None):
    """Parameter-scaled delta delta_classical(d) * w(chi(d)) * c."""
    c = correction_factor(case) if correction is None else correction
    base = delta_classical(d, eps)
    if case.variant == "classical":
        return base
    chi = indicator(d, eps)
    return _out(np.asarray(base) * np.asarray(case.weight(chi)) * c, d)


def temperature_rate_shape(case: InterpolationCase, q, d, eps, cv_eff):
    """Initial heating rate q * delta_i(d) / c_v,eff(chi(d)) with conduction neglected.

    ``cv_eff`` is either an array of heat capacities at ``d`` or a callable of chi.
    """
    chi = indicator(d, eps)
    cv = cv_eff(chi) if callable(cv_eff) else cv_eff
    return _out(q * np.asarray(delta_scaled(case, d, eps)) / np.asarray(cv), d)
