"""Thermophysical constants for the Ti-6Al-4V benchmarks (SI units)."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .delta import InterpolationCase, PhasePair, interp_arithmetic
from .errors import InvalidInputError

GAS_CONSTANT = 8.31446  # J/(mol K)


@dataclass(frozen=True)
class MaterialSet:
    k_g: float = 0.02863
    k_l: float = 28.63
    rho_g: float = 4.087
    rho_l: float = 4087.0
    cp_g: float = 11.3
    cp_l: float = 1130.0
    # evaporation
    h_v: float = 8.84e6
    T_v: float = 3133.0
    T_h_ref: float = 538.0
    M: float = 4.78e-2
    c_s: float = 1.0
    p_a: float = 1.0e5
    R: float = GAS_CONSTANT
    # laser
    absorptivity: float = 0.35
    laser_power: float = 250.0
    laser_radius: float = 70e-6
    # carried for completeness, not used by the thermal benchmarks
    mu_g: float = 3.5e-4
    mu_l: float = 3.5e-3
    sigma: float = 1.493
    T_liquidus: float = 2200.0
    T_solidus: float = 1933.0
    darcy_K: float = 1e11
    darcy_b: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "c_s":
                ok = np.isfinite(v) and v >= 0.0
            else:
                ok = np.isfinite(v) and v > 0.0
            if not ok:
                raise InvalidInputError(f"material parameter {f.name} must be positive, got {v!r}")
        if not 0.0 < self.absorptivity <= 1.0:
            raise InvalidInputError("absorptivity must lie in (0, 1]")

    @property
    def k(self) -> PhasePair:
        return PhasePair(self.k_g, self.k_l)

    @property
    def rho(self) -> PhasePair:
        return PhasePair(self.rho_g, self.rho_l)

    @property
    def cp(self) -> PhasePair:
        return PhasePair(self.cp_g, self.cp_l)

    @property
    def rho_cp(self) -> PhasePair:
        return self.rho.scaled(self.cp)

    @property
    def h_v_molar(self) -> float:
        return self.h_v * self.M

    def with_overrides(self, **overrides) -> "MaterialSet":
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise InvalidInputError(f"unknown material parameter(s): {sorted(unknown)}")
        return replace(self, **overrides)

    def to_dict(self) -> dict:
        return asdict(self)


TI64 = MaterialSet()


def interpolation_case(material: MaterialSet, name: str) -> InterpolationCase:
    """Delta/heat-capacity interpolation case built from a material set."""
    if name == "classical":
        return InterpolationCase("classical")
    if name in ("V1", "V2"):
        return InterpolationCase(name, alpha=material.rho_cp)
    if name in ("V3", "V4"):
        return InterpolationCase(name, alpha=material.rho, beta=material.cp)
    return InterpolationCase(name)  # raises with the list of valid names


def heat_capacity(material: MaterialSet, name: str, chi):
    """Effective volume-specific heat capacity for an interpolation case.

    The classical delta pairs with the arithmetic mean of rho*cp.
    """
    if name == "classical":
        return interp_arithmetic(material.rho_cp, chi)
    return interpolation_case(material, name).weight(chi)


def conductivity(material: MaterialSet, chi):
    return interp_arithmetic(material.k, chi)


def effective_property(pair: PhasePair, rule: str, chi, second: PhasePair = None):
    """Mixture value of a phase pair; ``product-of-pairs`` multiplies two
    arithmetic means (pass ``second``), ``harmonic-arithmetic`` a harmonic times
    an arithmetic mean."""
    from .delta import interp_harmonic

    if rule == "arithmetic":
        return interp_arithmetic(pair, chi)
    if rule == "harmonic":
        return interp_harmonic(pair, chi)
    if rule in ("product-of-pairs", "harmonic-arithmetic"):
        if second is None:
            raise InvalidInputError(f"rule {rule} needs a second phase pair")
        first = interp_arithmetic(pair, chi) if rule == "product-of-pairs" else interp_harmonic(pair, chi)
        return first * interp_arithmetic(second, chi)
    raise InvalidInputError(f"unknown interpolation rule {rule!r}")
