"""Two-phase heat conduction in 1D with CSF interface sources.

Linear finite elements, implicit Euler, consistent mass matrix.  Coefficients
(heat capacity, conductivity, convection weight, delta) are sampled at four
Gauss points per element, so the element matrices stay tridiagonal and the
system is solved with LAPACK's tridiagonal LU.

Temperature-dependent interface fluxes make each time step nonlinear.  The
step is solved with Newton's method; terms that depend only on the interface
node temperature (IV fluxes, the sharp point source and the convection
velocity) contribute a rank-one Jacobian update handled by Sherman-Morrison,
while CE fluxes add a tridiagonal block.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import lapack

from .delta import delta_scaled, interp_harmonic
from .errors import InvalidInputError, SolverError
from .evaporation import (EvaporationModel, LaserModel, evaporative_cooling,
                          evaporative_cooling_derivative, mass_flux, mass_flux_derivative)
from .fields import DiscreteField, Planar1D, indicator, signed_distance
from .materials import TI64, MaterialSet, conductivity, heat_capacity, interpolation_case
from .mesh import Interval1D

NEWTON_TOL = 1e-8  # K
NEWTON_MAXIT = 50


# --------------------------------------------------------------------------
# dimensionless numbers and analytic solution
# --------------------------------------------------------------------------

def fourier_number(k, tau, rho_cp, L):
    """Fo = k tau / (rho cp L^2)."""
    return k * tau / (rho_cp * L**2)


def peclet_number(rho_cp, u, h, k):
    """Element Peclet number rho cp u h / k."""
    return rho_cp * u * h / k


def steady_analytic_1d(q, a, k_g, k_l, T0, T_bar=None):
    """Steady tent profile for a planar flux q at x = 0 with T(+-a) = T_bar.

    Returns a vectorized callable T(x).
    """
    T_bar = T0 if T_bar is None else T_bar
    T_max = q * a / (k_l + k_g) + T0

    def profile(x):
        x = np.asarray(x, dtype=float)
        return (T_max - T_bar) * (a - np.abs(x)) / a + T_bar

    profile.T_max = T_max
    return profile


# --------------------------------------------------------------------------
# scenario and report
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ThermalScenario:
    """One 1D run.  ``eps=None`` selects the sharp-interface model with the
    interface flux applied at the node x = 0 and piecewise constant properties."""

    mesh: Interval1D
    material: MaterialSet = TI64
    eps: Optional[float] = None
    case: str = "classical"
    laser: LaserModel = LaserModel()
    evaporation: Optional[EvaporationModel] = None
    convection: bool = False
    T0: float = 500.0
    T_bar: float = 500.0
    dt: float = 1e-9
    t_end: float = 1e-5
    dirichlet: tuple = ("left", "right")
    lumped_mass: bool = False
    geometry: Planar1D = Planar1D()

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise InvalidInputError("dt must be positive")
        if not (self.t_end >= self.dt):
            raise InvalidInputError("t_end must be at least dt")
        if self.eps is not None and not (self.eps > 0):
            raise InvalidInputError("eps must be positive")
        if self.T0 <= 0 or self.T_bar <= 0:
            raise InvalidInputError("temperatures must be positive")
        if not set(self.dirichlet) <= {"left", "right"}:
            raise InvalidInputError("1D Dirichlet tags are 'left' and/or 'right'")
        interpolation_case(self.material, self.case)  # validates the name
        if self.convection and self.evaporation is None:
            raise InvalidInputError("convection needs an evaporation model")

    @property
    def sharp(self) -> bool:
        return self.eps is None

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class SolveReport:
    field: DiscreteField
    T_interface: float
    T_peak: float
    x_peak: float
    wall_time: float
    n_steps: int
    newton_iterations: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def T(self):
        return self.field.values


# --------------------------------------------------------------------------
# tridiagonal helpers
# --------------------------------------------------------------------------

class Tridiagonal:
    """Tridiagonal matrix stored as (lower, diag, upper)."""

    def __init__(self, lower, diag, upper):
        self.lower = np.asarray(lower, dtype=float)
        self.diag = np.asarray(diag, dtype=float)
        self.upper = np.asarray(upper, dtype=float)

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n - 1), np.zeros(n), np.zeros(n - 1))

    def copy(self):
        return Tridiagonal(self.lower.copy(), self.diag.copy(), self.upper.copy())

    def __add__(self, other):
        return Tridiagonal(self.lower + other.lower, self.diag + other.diag, self.upper + other.upper)

    def scale(self, s):
        return Tridiagonal(self.lower * s, self.diag * s, self.upper * s)

    def matvec(self, v):
        out = self.diag * v
        out[:-1] += self.upper * v[1:]
        out[1:] += self.lower * v[:-1]
        return out

    def set_identity_rows(self, rows, scale=None):
        """Replace rows by scale[k] * e_r (unit rows by default)."""
        for k, r in enumerate(rows):
            self.diag[r] = 1.0 if scale is None else scale[k]
            if r > 0:
                self.lower[r - 1] = 0.0
            if r < self.diag.size - 1:
                self.upper[r] = 0.0

    def solve(self, rhs):
        """One-shot solve (dgtsv); rhs may be (n,) or (n, k)."""
        _, _, _, x, info = lapack.dgtsv(self.lower, self.diag, self.upper, rhs)
        if info != 0:
            raise SolverError(f"tridiagonal solve failed (info={info})")
        return x

    def factor(self):
        return TridiagonalLU(self)


class TridiagonalLU:
    def __init__(self, mat: Tridiagonal):
        dl, d, du, du2, ipiv, info = lapack.dgttrf(mat.lower, mat.diag, mat.upper)
        if info != 0:
            raise SolverError(f"tridiagonal factorization failed (info={info})")
        self._f = (dl, d, du, du2, ipiv)

    def solve(self, rhs):
        x, info = lapack.dgttrs(*self._f, rhs)
        if info != 0:
            raise SolverError(f"tridiagonal back substitution failed (info={info})")
        return x


def _assemble(mesh: Interval1D, weights_nn, weights_dd, weights_nd, wj, shape, h):
    """Assemble sum_g w N_a N_b, sum_g w dN_a dN_b and sum_g w N_a dN_b/dx.

    ``weights_*`` are per-Gauss-point coefficients (n_el, 4) or None.
    """
    n = mesh.n_nodes
    out = []
    if weights_nn is not None:
        m = np.einsum("eg,ag,bg->eab", weights_nn * wj, shape, shape)
        out.append(_scatter(n, m))
    else:
        out.append(None)
    if weights_dd is not None:
        s = np.sum(weights_dd * wj, axis=1) / h**2
        k = np.empty((h.size, 2, 2))
        k[:, 0, 0] = k[:, 1, 1] = s
        k[:, 0, 1] = k[:, 1, 0] = -s
        out.append(_scatter(n, k))
    else:
        out.append(None)
    if weights_nd is not None:
        dshape = np.array([-1.0, 1.0])
        c = np.einsum("eg,ag,b->eab", weights_nd * wj, shape, dshape) / h[:, None, None]
        out.append(_scatter(n, c))
    else:
        out.append(None)
    return out


def _scatter(n, elem):
    diag = np.zeros(n)
    diag[:-1] += elem[:, 0, 0]
    diag[1:] += elem[:, 1, 1]
    return Tridiagonal(elem[:, 1, 0].copy(), diag, elem[:, 0, 1].copy())


# --------------------------------------------------------------------------
# discrete operator for one scenario
# --------------------------------------------------------------------------

class Heat1D:
    """Discretized operators for a :class:`ThermalScenario`.

    Holds M (heat capacity), K (conductivity), C (unit convection operator:
    the advective term is mdot(T_Gamma) * C), the load shape g = int N_i delta,
    and the Gauss-point data needed for CE fluxes.
    """

    def __init__(self, sc: ThermalScenario):
        self.sc = sc
        mesh = sc.mesh
        mat = sc.material
        self.mesh = mesh
        self.n = mesh.n_nodes
        self.i0 = mesh.node_index(0.0)
        pts, wj, shape = mesh.quadrature()
        h = mesh.h
        self.pts, self.wj, self.shape = pts, wj, shape
        if sc.sharp:
            # element-wise constant phase properties, liquid at x < 0
            liquid = (0.5 * (mesh.nodes[:-1] + mesh.nodes[1:]) < 0.0)[:, None] * np.ones_like(pts)
            cv = np.where(liquid > 0, mat.rho_cp.liquid, mat.rho_cp.gas)
            k = np.where(liquid > 0, mat.k_l, mat.k_g)
            adv = np.where(liquid > 0, mat.cp_l, mat.cp_g)
            self.delta = None
        else:
            d = signed_distance(pts, sc.geometry)
            chi = indicator(d, sc.eps)
            cv = heat_capacity(mat, sc.case, chi)
            k = conductivity(mat, chi)
            adv = cv / interp_harmonic(mat.rho, chi)
            self.delta = delta_scaled(interpolation_case(mat, sc.case), d, sc.eps)
        self.M, self.K, self.C = _assemble(mesh, cv, k, adv if sc.convection else None, wj, shape, h)
        if sc.lumped_mass:
            lump = self.M.diag.copy()
            lump[:-1] += self.M.upper
            lump[1:] += self.M.lower
            self.M = Tridiagonal(np.zeros(self.n - 1), lump, np.zeros(self.n - 1))
        if sc.sharp:
            self.g = np.zeros(self.n)
            self.g[self.i0] = 1.0
            self.band = np.zeros(0, dtype=int)
        else:
            ge = np.einsum("eg,ag->ea", self.delta * wj, shape)
            self.g = np.zeros(self.n)
            np.add.at(self.g, np.arange(mesh.n_elements), ge[:, 0])
            np.add.at(self.g, np.arange(mesh.n_elements) + 1, ge[:, 1])
            self.band = np.nonzero(np.any(self.delta > 0.0, axis=1))[0]
        self.dirichlet_rows = [0 if tag == "left" else self.n - 1 for tag in sc.dirichlet]
        self.dscale = np.ones(len(self.dirichlet_rows))
        ev = sc.evaporation
        self.ce = ev is not None and not sc.sharp and ev.method == "CE"
        self.iv = ev is not None and not self.ce

    # ---------------------------------------------------------------- fluxes
    def q_evap(self, T):
        return evaporative_cooling(T, self.sc.evaporation)

    def dq_evap(self, T):
        return evaporative_cooling_derivative(T, self.sc.evaporation)

    def ce_load(self, T):
        """CE load vector and its tridiagonal Jacobian (band elements only)."""
        b = self.band
        Te = np.stack([T[b], T[b + 1]], axis=1)
        Tg = Te @ self.shape  # (nb, 4)
        w = self.delta[b] * self.wj[b]
        qv = np.asarray(self.q_evap(Tg)) * w
        dq = np.asarray(self.dq_evap(Tg)) * w
        F = np.zeros(self.n)
        fe = np.einsum("eg,ag->ea", qv, self.shape)
        np.add.at(F, b, fe[:, 0])
        np.add.at(F, b + 1, fe[:, 1])
        je = np.einsum("eg,ag,bg->eab", dq, self.shape, self.shape)
        J = Tridiagonal.zeros(self.n)
        np.add.at(J.diag, b, je[:, 0, 0])
        np.add.at(J.diag, b + 1, je[:, 1, 1])
        J.upper[b] += je[:, 0, 1]
        J.lower[b] += je[:, 1, 0]
        return F, J

    # ---------------------------------------------------------------- steps
    def pin(self, A: Tridiagonal):
        """Impose the Dirichlet rows on ``A`` in place.  The rows keep the size
        of the diagonal they replace so that LAPACK does not pivot them away."""
        self.dscale = np.array([abs(A.diag[r]) or 1.0 for r in self.dirichlet_rows])
        A.set_identity_rows(self.dirichlet_rows, self.dscale)
        return A

    def _apply_dirichlet_vec(self, v, value):
        for r, s in zip(self.dirichlet_rows, self.dscale):
            v[r] = s * value
        return v

    def steady(self):
        """Steady state of the linear (laser only) problem."""
        if self.sc.evaporation is not None:
            raise InvalidInputError("steady solve supports the laser-only problem")
        A = self.pin(self.K.copy())
        rhs = self._apply_dirichlet_vec(self.sc.laser.q * self.g, self.sc.T_bar)
        if not self.dirichlet_rows:
            raise InvalidInputError("steady solve needs at least one Dirichlet boundary")
        return A.solve(rhs)


def _check_finite(T, step):
    if not np.all(np.isfinite(T)):
        raise SolverError(f"non-finite temperature at step {step}")


def solve_transient(sc: ThermalScenario, *, T_init=None, callback=None) -> SolveReport:
    """Implicit Euler from t = 0 to t_end with a fixed step."""
    start = time.perf_counter()
    op = Heat1D(sc)
    n, i0 = op.n, op.i0
    dt = sc.dt
    q_laser = sc.laser.q
    T = np.full(n, float(sc.T0)) if T_init is None else np.array(T_init, dtype=float)
    if T.shape != (n,):
        raise InvalidInputError("initial field does not match the mesh")
    Mdt = op.M.scale(1.0 / dt)
    A0 = op.pin(Mdt + op.K)
    F_laser = q_laser * op.g
    n_steps = sc.n_steps
    iters = np.zeros(n_steps, dtype=np.int32)
    ev = sc.evaporation

    def rhs_base(Told):
        b = Mdt.matvec(Told) + F_laser
        return op._apply_dirichlet_vec(b, sc.T_bar)

    g_free = op._apply_dirichlet_vec(op.g.copy(), 0.0)

    if ev is None:
        lu = A0.factor()
        for step in range(n_steps):
            T = lu.solve(rhs_base(T))
            iters[step] = 1
            if callback:
                callback(step, T)
        _check_finite(T, n_steps)
    elif not sc.convection and not op.ce:
        # constant matrix, flux depends on the interface temperature only:
        # T = y + q_v(T_i0) z with z = A^-1 g, a scalar equation for T_i0
        lu = A0.factor()
        z = lu.solve(g_free)
        z0 = z[i0]
        for step in range(n_steps):
            y = lu.solve(rhs_base(T))
            t0 = T[i0]
            for it in range(1, NEWTON_MAXIT + 1):
                r = t0 - y[i0] - op.q_evap(t0) * z0
                dr = 1.0 - op.dq_evap(t0) * z0
                dt0 = -r / dr
                t0 += dt0
                if abs(dt0) < NEWTON_TOL:
                    break
            else:
                raise SolverError(f"Newton did not converge at step {step}", residual=abs(dt0),
                                  iterations=it)
            T = y + op.q_evap(t0) * z
            iters[step] = it
            if callback:
                callback(step, T)
            if not np.isfinite(t0):
                _check_finite(T, step)
        _check_finite(T, n_steps)
    else:
        T = _newton_general(op, sc, T, Mdt, A0, F_laser, g_free, iters, callback)
    wall = time.perf_counter() - start
    return _report(op, T, wall, n_steps, iters)


def _newton_general(op, sc, T, Mdt, A0, F_laser, g_free, iters, callback):
    """Full Newton with a tridiagonal block plus a rank-one interface column."""
    n, i0 = op.n, op.i0
    rows = op.dirichlet_rows
    ev = sc.evaporation
    for step in range(sc.n_steps):
        b = Mdt.matvec(T) + F_laser
        op._apply_dirichlet_vec(b, sc.T_bar)
        Tk = T.copy()
        for it in range(1, NEWTON_MAXIT + 1):
            t0 = Tk[i0]
            A = A0
            u = np.zeros(n)
            if sc.convection:
                md = mass_flux(t0, ev)
                C = op.C.scale(md)
                C.set_identity_rows(rows)
                for r in rows:
                    C.diag[r] = 0.0
                A = A0 + C
                u += mass_flux_derivative(t0, ev) * op.C.matvec(Tk)
            R = A.matvec(Tk) - b
            if op.ce:
                F, J = op.ce_load(Tk)
                op._apply_dirichlet_vec(F, 0.0)
                R -= F
                J.set_identity_rows(rows)
                for r in rows:
                    J.diag[r] = 0.0
                A = A + J.scale(-1.0)
            else:
                R -= op.q_evap(t0) * g_free
                u -= op.dq_evap(t0) * g_free
            for r in rows:
                u[r] = 0.0
            if np.any(u):
                yz = A.solve(np.column_stack([-R, u]))
                y, z = yz[:, 0], yz[:, 1]
                delta = y - z * (y[i0] / (1.0 + z[i0]))
            else:
                delta = A.solve(-R)
            Tk = Tk + delta
            if np.max(np.abs(delta)) < NEWTON_TOL:
                break
        else:
            raise SolverError(f"Newton did not converge at step {step}",
                              residual=float(np.max(np.abs(delta))), iterations=it)
        if not np.all(np.isfinite(Tk)):
            raise SolverError(f"non-finite temperature at step {step}")
        T = Tk
        iters[step] = it
        if callback:
            callback(step, T)
    return T


def _report(op, T, wall, n_steps, iters):
    mesh = op.mesh
    ip = int(np.argmax(T))
    fld = DiscreteField(mesh, T, units="K", name="T")
    return SolveReport(field=fld, T_interface=float(T[op.i0]), T_peak=float(T[ip]),
                       x_peak=float(mesh.nodes[ip]), wall_time=wall, n_steps=n_steps,
                       newton_iterations=iters)


def assemble_step(sc: ThermalScenario, T_old):
    """Advance one implicit Euler step from ``T_old``."""
    one = ThermalScenario(**{**sc.__dict__, "t_end": sc.dt})
    return solve_transient(one, T_init=T_old).T


def solve_steady(sc: ThermalScenario) -> SolveReport:
    start = time.perf_counter()
    op = Heat1D(sc)
    T = op.steady()
    return _report(op, T, time.perf_counter() - start, 0, np.zeros(0, dtype=np.int32))


def sharp_reference_1d(sc: ThermalScenario) -> SolveReport:
    """Sharp-interface solution; the scenario's ``eps`` is ignored."""
    ref = ThermalScenario(**{**sc.__dict__, "eps": None})
    return solve_transient(ref)


def interface_velocity(sc: ThermalScenario, T_interface):
    """Nodal convection velocity of a run (diffuse: mdot / rho_h(chi); sharp: per phase)."""
    x = sc.mesh.nodes
    md = mass_flux(T_interface, sc.evaporation)
    mat = sc.material
    if sc.sharp:
        return np.where(x < 0.0, md / mat.rho_l, md / mat.rho_g)
    chi = indicator(signed_distance(x, sc.geometry), sc.eps)
    return md / np.asarray(interp_harmonic(mat.rho, chi))
