"""Fast invariant checks over the delta models and the evaporation scalars.

Used by ``csfmelt verify``; each check returns (name, passed, detail).
"""
from __future__ import annotations

from decimal import Decimal, localcontext

import numpy as np
from scipy.integrate import quad

from .delta import CASES, InterpolationCase, PhasePair, delta_classical, delta_scaled, density_scaled
from .evaporation import EvaporationModel, evaporative_cooling, mass_flux, recoil_pressure
from .fields import indicator

DELTA_TOL = 1e-9
CANCEL_TOL = 1e-12


def random_case(variant: str, rng) -> InterpolationCase:
    """Phase pairs with log-uniform ratios in [1e-6, 1e6]."""
    def pair():
        g = 10.0 ** rng.uniform(-3, 3)
        return PhasePair(g, g * 10.0 ** rng.uniform(-6, 6))

    if variant == "classical":
        return InterpolationCase("classical")
    if variant in ("V1", "V2"):
        return InterpolationCase(variant, alpha=pair())
    return InterpolationCase(variant, alpha=pair(), beta=pair())


def delta_integral(case: InterpolationCase, eps: float = 1.0) -> float:
    """int delta_i dd over the band by adaptive quadrature."""
    f = lambda d: float(delta_scaled(case, d, eps))
    half = 0.5 * eps
    # split at the midplane and near the band edges where harmonic weights vary fastest
    pts = np.array([-0.5, -0.49, -0.45, -0.3, 0.0, 0.3, 0.45, 0.49, 0.5]) * eps
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = quad(f, a, b, epsabs=1e-14, epsrel=1e-13, limit=400)
        total += val
    return total


def check_delta_identity(n_draws: int = 50, seed: int = 0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for variant in CASES:
        for _ in range(n_draws):
            worst = max(worst, abs(delta_integral(random_case(variant, rng)) - 1.0))
    rng = np.random.default_rng(seed + 1)
    for _ in range(n_draws):
        g = 10.0 ** rng.uniform(-3, 3)
        rho = PhasePair(g, g * 10.0 ** rng.uniform(-6, 6))
        worst = max(worst, abs(delta_integral(density_scaled(rho)) - 1.0))
    return "delta identity", worst < DELTA_TOL, f"max |int delta - 1| = {worst:.3e}"


def check_cancellation(n_draws: int = 50, seed: int = 2):
    """q delta_i / c_v,eff is a constant multiple of delta_classical when the
    delta weight and the heat capacity use the same interpolation."""
    rng = np.random.default_rng(seed)
    eps = 1.0
    d = np.linspace(-0.5, 0.5, 401)[1:-1]
    base = np.asarray(delta_classical(d, eps))
    chi = indicator(d, eps)
    worst = 0.0
    for variant in ("V1", "V2", "V3", "V4"):
        for _ in range(n_draws):
            case = random_case(variant, rng)
            rate = 1e10 * np.asarray(delta_scaled(case, d, eps)) / np.asarray(case.weight(chi))
            ratio = rate / base
            worst = max(worst, float(np.max(np.abs(ratio / ratio[len(ratio) // 2] - 1.0))))
    return "heating-rate cancellation", worst < CANCEL_TOL, f"max relative deviation = {worst:.3e}"


def mass_flux_oracle(T: float, model: EvaporationModel) -> float:
    """Independent 40-digit evaluation of the vapor mass flux."""
    with localcontext() as ctx:
        ctx.prec = 40
        D = Decimal
        T_ = D(repr(T))
        hvm = D(repr(model.h_v)) * D(repr(model.M))
        arg = -(hvm / D(repr(model.R))) * (1 / T_ - 1 / D(repr(model.T_v)))
        p = D("0.54") * D(repr(model.p_a)) * arg.exp()
        pi = D("3.141592653589793238462643383279502884197")
        root = (D(repr(model.M)) / (2 * pi * D(repr(model.R)) * T_)).sqrt()
        return float(D("0.82") * D(repr(model.c_s)) * p * root)


def check_evaporation_scalars(model: EvaporationModel = EvaporationModel()):
    p = float(recoil_pressure(model.T_v, model))
    ok_p = p == 0.54 * model.p_a
    md = float(mass_flux(model.T_v, model))
    md_ref = mass_flux_oracle(model.T_v, model)
    rel = abs(md / md_ref - 1.0)
    a = float(evaporative_cooling(model.T_h_ref, model, "WithEnthalpy"))
    b = float(evaporative_cooling(model.T_h_ref, model, "WithoutEnthalpy"))
    same = abs(a - b) <= 4 * np.finfo(float).eps * abs(b)
    detail = (f"p_v(T_v) = {p!r} Pa, mdot(T_v) = {md:.6e} kg/m^2/s (oracle rel. diff {rel:.1e}), "
              f"cooling variants at T_h_ref: {a:.6e} vs {b:.6e}")
    return "evaporation scalars", bool(ok_p and rel < 5e-3 and same), detail


def run_all():
    return [check_delta_identity(), check_cancellation(), check_evaporation_scalars()]
