"""Evaporation physics and temperature-dependent CSF fluxes.

Scalar models (recoil pressure, vapor mass flux, evaporative cooling) plus
their temperature derivatives, which the thermal solvers use for Newton
linearization.  Field-level helpers evaluate a temperature-dependent flux
either with local temperatures across the band (CE) or with the temperature
at the closest interface point (IV).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .delta import PhasePair, correction_factor, delta_scaled, density_scaled, interp_harmonic
from .errors import InvalidInputError
from .fields import MeltPool2D, _finite, _out, closest_point
from .materials import TI64, MaterialSet

COOLING_VARIANTS = ("WithEnthalpy", "WithoutEnthalpy")
METHODS = ("CE", "IV")

# exp() underflows to zero below this argument anyway; clamp explicitly
_EXP_FLOOR = -745.0


@dataclass(frozen=True)
class EvaporationModel:
    """Anisimov recoil, Knight mass flux and evaporative cooling constants."""

    h_v: float = TI64.h_v
    T_v: float = TI64.T_v
    T_h_ref: float = TI64.T_h_ref
    M: float = TI64.M
    c_s: float = TI64.c_s
    p_a: float = TI64.p_a
    R: float = TI64.R
    cp_l: float = TI64.cp_l
    cooling: str = "WithEnthalpy"
    method: str = "IV"

    def __post_init__(self):
        if self.cooling not in COOLING_VARIANTS:
            raise InvalidInputError(f"cooling must be one of {COOLING_VARIANTS}, got {self.cooling!r}")
        if self.method not in METHODS:
            raise InvalidInputError(f"method must be one of {METHODS}, got {self.method!r}")
        for name in ("h_v", "T_v", "T_h_ref", "M", "p_a", "R", "cp_l"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise InvalidInputError(f"{name} must be positive, got {v!r}")
        if not (np.isfinite(self.c_s) and self.c_s >= 0):
            raise InvalidInputError("c_s must be non-negative")

    @classmethod
    def from_material(cls, material: MaterialSet, cooling="WithEnthalpy", method="IV"):
        return cls(h_v=material.h_v, T_v=material.T_v, T_h_ref=material.T_h_ref, M=material.M,
                   c_s=material.c_s, p_a=material.p_a, R=material.R, cp_l=material.cp_l,
                   cooling=cooling, method=method)

    @property
    def h_v_molar(self) -> float:
        return self.h_v * self.M


@dataclass(frozen=True)
class LaserModel:
    """Constant planar flux (``q``) or a fixed Gaussian beam."""

    variant: str = "Constant1D"
    q: float = 1e10
    absorptivity: float = TI64.absorptivity
    power: float = TI64.laser_power
    radius: float = TI64.laser_radius
    position: tuple = (0.0, 0.0)
    direction: tuple = (0.0, -1.0)

    def __post_init__(self):
        if self.variant not in ("Constant1D", "Gaussian2D"):
            raise InvalidInputError(f"unknown laser variant {self.variant!r}")
        if not 0.0 < self.absorptivity <= 1.0:
            raise InvalidInputError("absorptivity must lie in (0, 1]")
        if not (np.isfinite(self.q) and self.q >= 0):
            raise InvalidInputError("laser flux q must be non-negative")
        if not (self.power >= 0 and self.radius > 0):
            raise InvalidInputError("laser power must be >= 0 and radius > 0")
        if abs(np.hypot(*self.direction) - 1.0) > 1e-12:
            raise InvalidInputError("laser direction must be a unit vector")

    @property
    def peak(self) -> float:
        return self.absorptivity * self.power * 2.0 / (np.pi * self.radius**2)


# --------------------------------------------------------------------------
# scalar models
# --------------------------------------------------------------------------

def _temperature(T):
    T_a = _finite("T", T)
    if np.any(T_a <= 0.0):
        raise InvalidInputError("temperature must be positive")
    return T_a


def _recoil(T_a, model):
    arg = -(model.h_v_molar / model.R) * (1.0 / T_a - 1.0 / model.T_v)
    return np.where(arg < _EXP_FLOOR, 0.0, 0.54 * model.p_a * np.exp(np.maximum(arg, _EXP_FLOOR)))


def recoil_pressure(T, model: EvaporationModel = EvaporationModel()):
    """p_v = 0.54 p_a exp(-(h_v M / R)(1/T - 1/T_v))."""
    return _out(_recoil(_temperature(T), model), T)


def _mdot(T_a, model):
    return 0.82 * model.c_s * _recoil(T_a, model) * np.sqrt(model.M / (2.0 * np.pi * model.R * T_a))


def mass_flux(T, model: EvaporationModel = EvaporationModel()):
    """Knight vapor mass flux 0.82 c_s p_v(T) sqrt(M / (2 pi R T))."""
    return _out(_mdot(_temperature(T), model), T)


def mass_flux_derivative(T, model: EvaporationModel = EvaporationModel()):
    T_a = _temperature(T)
    rate = model.h_v_molar / (model.R * T_a**2) - 0.5 / T_a
    return _out(_mdot(T_a, model) * rate, T)


def evaporative_cooling(T, model: EvaporationModel = EvaporationModel(), cooling: Optional[str] = None):
    """Interface heat loss q_v <= 0.

    WithoutEnthalpy: -h_v mdot.  WithEnthalpy also removes the sensible enthalpy
    of the vapor, -(h_v + cp_l (T - T_h_ref)) mdot.
    """
    T_a = _temperature(T)
    variant = cooling or model.cooling
    latent = model.h_v
    if variant == "WithEnthalpy":
        latent = model.h_v + model.cp_l * (T_a - model.T_h_ref)
    elif variant != "WithoutEnthalpy":
        raise InvalidInputError(f"cooling must be one of {COOLING_VARIANTS}")
    return _out(-latent * _mdot(T_a, model), T)


def evaporative_cooling_derivative(T, model: EvaporationModel = EvaporationModel(), cooling=None):
    T_a = _temperature(T)
    variant = cooling or model.cooling
    md = _mdot(T_a, model)
    dmd = md * (model.h_v_molar / (model.R * T_a**2) - 0.5 / T_a)
    if variant == "WithEnthalpy":
        out = -(model.h_v + model.cp_l * (T_a - model.T_h_ref)) * dmd - model.cp_l * md
    else:
        out = -model.h_v * dmd
    return _out(out, T)


def laser_flux(x, geom, laser: LaserModel):
    """Laser heat flux at points ``x`` (W/m^2).

    The Gaussian beam is evaluated with the interface normal of the closest
    interface point and the distance of ``x`` itself from the beam axis.
    """
    if laser.variant == "Constant1D":
        x_a = _finite("x", x)
        shape = np.shape(x_a)[:-1] if isinstance(geom, MeltPool2D) else np.shape(x_a)
        val = np.full(shape, laser.q)
        return float(val) if val.ndim == 0 else val
    pts = np.atleast_2d(_finite("x", x))
    _, nrm = closest_point(pts, geom)
    nrm = np.atleast_2d(nrm)
    ln = np.asarray(laser.direction, dtype=float)
    cos_in = np.maximum(nrm @ ln, 0.0)  # Macaulay bracket
    rel = pts - np.asarray(laser.position, dtype=float)
    # distance from the beam line through the position along the direction
    d_axis = np.abs(rel[:, 0] * ln[1] - rel[:, 1] * ln[0])
    val = laser.peak * cos_in * np.exp(-2.0 * (d_axis / laser.radius) ** 2)
    return float(val[0]) if np.ndim(x) == 1 else val.reshape(np.shape(x)[:-1])


# --------------------------------------------------------------------------
# field-level CSF evaluation
# --------------------------------------------------------------------------

def volumetric_flux_CE(T_values, flux: Callable, case, d, eps):
    """flux(T(x)) * delta_i(d(x)) with local temperatures; zero outside the band."""
    T_a = np.asarray(T_values, dtype=float)
    delta = np.asarray(delta_scaled(case, d, eps))
    out = np.zeros_like(delta)
    band = delta > 0.0
    out[band] = np.asarray(flux(T_a[band])) * delta[band]
    return out


def volumetric_flux_IV(T_interface, flux: Callable, case, d, eps):
    """flux(T(x_Gamma(x))) * delta_i(d(x)); ``T_interface`` is the temperature
    at each point's closest interface point (scalar for a planar interface)."""
    delta = np.asarray(delta_scaled(case, d, eps))
    T_g = np.broadcast_to(np.asarray(T_interface, dtype=float), delta.shape)
    out = np.zeros_like(delta)
    band = delta > 0.0
    out[band] = np.asarray(flux(T_g[band])) * delta[band]
    return out


def recoil_l1_CE(T_values, d, eps, weights, rho: PhasePair, model: EvaporationModel = EvaporationModel()):
    """Quadrature of p_v(T) * delta_rho over the domain.

    ``T_values``, ``d`` and ``weights`` are given at quadrature points.  Returns
    N/m in 2D (weights in m^2) or Pa in 1D (weights in m).
    """
    case = density_scaled(rho)
    c = correction_factor(case)
    delta = np.asarray(delta_scaled(case, d, eps, correction=c))
    band = delta > 0.0
    T_b = np.asarray(T_values, dtype=float)[band]
    return float(np.sum(np.asarray(recoil_pressure(T_b, model)) * delta[band] * np.asarray(weights)[band]))


def convection_velocity_1d(T_interface, chi, rho: PhasePair, model: EvaporationModel = EvaporationModel()):
    """u(x) = mdot(T_Gamma) / rho_h(chi(x)), directed from the liquid into the gas."""
    md = float(mass_flux(float(T_interface), model))
    return _out(md / np.asarray(interp_harmonic(rho, chi)), chi)
