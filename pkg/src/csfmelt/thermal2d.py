"""Heat conduction on the fixed 2D melt-pool surface.

Bilinear quadrilaterals on a tensor grid, 4x4 Gauss points, consistent mass
matrix and implicit Euler.  Dirichlet nodes are eliminated and the constant
system matrix is factorized once with SuperLU.  The temperature dependence of
the evaporative cooling is resolved per step by fixed-point iteration on the
source term, reusing that factorization.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .delta import correction_factor, delta_scaled, density_scaled
from .errors import InvalidInputError, SolverError
from .evaporation import EvaporationModel, LaserModel, evaporative_cooling, laser_flux, recoil_pressure
from .fields import DiscreteField, MeltPool2D, closest_point, indicator, signed_distance
from .materials import TI64, MaterialSet, conductivity, heat_capacity, interpolation_case
from .mesh import GAUSS_POINTS, GAUSS_WEIGHTS, Cartesian2D

PICARD_TOL = 1e-8  # K
PICARD_MAXIT = 50
_CHUNK = 32768

# tensor Gauss rule and bilinear shape functions on the reference square
_XI, _ETA = np.meshgrid(GAUSS_POINTS, GAUSS_POINTS, indexing="xy")
_XI, _ETA = _XI.ravel(), _ETA.ravel()
_W = np.outer(GAUSS_WEIGHTS, GAUSS_WEIGHTS).ravel()
_CORNERS = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
_N = 0.25 * (1 + _CORNERS[:, :1] * _XI) * (1 + _CORNERS[:, 1:] * _ETA)  # (4, 16)
_DN_XI = 0.25 * _CORNERS[:, :1] * (1 + _CORNERS[:, 1:] * _ETA)
_DN_ETA = 0.25 * _CORNERS[:, 1:] * (1 + _CORNERS[:, :1] * _XI)


@dataclass(frozen=True)
class MeltPoolScenario:
    mesh: Cartesian2D
    eps: float
    material: MaterialSet = TI64
    case: str = "V1"
    laser: LaserModel = LaserModel(variant="Gaussian2D")
    evaporation: Optional[EvaporationModel] = None
    T0: float = 500.0
    T_bar: float = 500.0
    dt: float = 1e-9
    t_end: float = 1e-5
    dirichlet: tuple = ("bottom", "top")
    geometry: MeltPool2D = MeltPool2D()

    def __post_init__(self):
        if not self.eps > 0:
            raise InvalidInputError("eps must be positive")
        if not (self.dt > 0 and self.t_end >= self.dt):
            raise InvalidInputError("need dt > 0 and t_end >= dt")
        if not set(self.dirichlet) <= {"bottom", "top", "left", "right"}:
            raise InvalidInputError("unknown boundary tag")
        interpolation_case(self.material, self.case)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class SolveReport2D:
    field: DiscreteField
    T_peak: float
    x_peak: np.ndarray
    d_peak: float
    recoil_l1: float
    wall_time: float
    n_steps: int
    iterations: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def T(self):
        return self.field.values


def _bilinear_matrix(mesh: Cartesian2D, pts):
    """Sparse matrix evaluating a nodal field at arbitrary points."""
    xs, ys = mesh.xs, mesh.ys
    i = np.clip(np.searchsorted(xs, pts[:, 0], side="right") - 1, 0, mesh.nx - 2)
    j = np.clip(np.searchsorted(ys, pts[:, 1], side="right") - 1, 0, mesh.ny - 2)
    s = (pts[:, 0] - xs[i]) / (xs[i + 1] - xs[i])
    t = (pts[:, 1] - ys[j]) / (ys[j + 1] - ys[j])
    n0 = j * mesh.nx + i
    cols = np.column_stack([n0, n0 + 1, n0 + 1 + mesh.nx, n0 + mesh.nx])
    vals = np.column_stack([(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t])
    rows = np.repeat(np.arange(pts.shape[0]), 4)
    return sp.csr_matrix((vals.ravel(), (rows, cols.ravel())), shape=(pts.shape[0], mesh.n_nodes))


class Heat2D:
    """Assembled operators of a :class:`MeltPoolScenario`."""

    def __init__(self, sc: MeltPoolScenario):
        self.sc = sc
        mesh = sc.mesh
        mat = sc.material
        self.mesh = mesh
        n = mesh.n_nodes
        conn = mesh.connectivity()
        self.conn = conn
        hx = np.diff(mesh.xs)
        hy = np.diff(mesh.ys)
        ii, jj = np.meshgrid(np.arange(mesh.nx - 1), np.arange(mesh.ny - 1))
        ii, jj = ii.ravel(), jj.ravel()
        ex0, ey0 = mesh.xs[ii], mesh.ys[jj]
        ehx, ehy = hx[ii], hy[jj]
        n_el = conn.shape[0]

        rows = np.repeat(conn, 4, axis=1).ravel()
        cols = np.tile(conn, (1, 4)).ravel()
        m_vals = np.empty((n_el, 16))
        k_vals = np.empty((n_el, 16))
        band_el, band_pts, band_wj, band_d = [], [], [], []
        for lo in range(0, n_el, _CHUNK):
            sl = slice(lo, min(lo + _CHUNK, n_el))
            px = ex0[sl, None] + 0.5 * ehx[sl, None] * (_XI + 1.0)
            py = ey0[sl, None] + 0.5 * ehy[sl, None] * (_ETA + 1.0)
            wj = 0.25 * (ehx * ehy)[sl, None] * _W
            d = signed_distance(np.stack([px, py], axis=-1), sc.geometry)
            chi = indicator(d, sc.eps)
            cv = heat_capacity(mat, sc.case, chi) * wj
            kk = conductivity(mat, chi) * wj
            m_vals[sl] = np.einsum("eg,ag,bg->eab", cv, _N, _N).reshape(-1, 16)
            kx = np.einsum("eg,ag,bg->eab", kk, _DN_XI, _DN_XI) * (4.0 / ehx[sl, None, None] ** 2)
            ky = np.einsum("eg,ag,bg->eab", kk, _DN_ETA, _DN_ETA) * (4.0 / ehy[sl, None, None] ** 2)
            k_vals[sl] = (kx + ky).reshape(-1, 16)
            inband = np.any(np.abs(d) <= 0.5 * sc.eps, axis=1)
            idx = np.nonzero(inband)[0]
            band_el.append(idx + lo)
            band_pts.append(np.stack([px[idx], py[idx]], axis=-1).reshape(-1, 2))
            band_wj.append(wj[idx].ravel())
            band_d.append(d[idx].ravel())
        self.M = sp.csr_matrix((m_vals.ravel(), (rows, cols)), shape=(n, n))
        self.K = sp.csr_matrix((k_vals.ravel(), (rows, cols)), shape=(n, n))
        del m_vals, k_vals

        self.band_el = np.concatenate(band_el)
        self.qp = np.concatenate(band_pts)
        self.wj = np.concatenate(band_wj)
        self.d = np.concatenate(band_d)
        nb = self.band_el.size
        # Q maps nodal values to band Gauss points
        q_rows = np.repeat(np.arange(nb * 16), 4)
        q_cols = np.repeat(conn[self.band_el], 16, axis=0).ravel()
        q_vals = np.tile(_N.T, (nb, 1)).ravel()
        self.Q = sp.csr_matrix((q_vals, (q_rows, q_cols)), shape=(nb * 16, n))
        case = interpolation_case(mat, sc.case)
        self.delta = np.asarray(delta_scaled(case, self.d, sc.eps))
        self.delta_rho = np.asarray(delta_scaled(density_scaled(mat.rho), self.d, sc.eps,
                                                 correction=correction_factor(density_scaled(mat.rho))))
        self.x_gamma, self.normal = closest_point(self.qp, sc.geometry)
        self.P = _bilinear_matrix(mesh, self.x_gamma)
        self.QtW = (self.Q.T @ sp.diags(self.delta * self.wj)).tocsr()
        q_l = laser_flux(self.qp, sc.geometry, sc.laser)
        self.F_laser = self.QtW @ q_l

        fixed = np.unique(np.concatenate([mesh.boundary_nodes(s) for s in sc.dirichlet]))
        self.fixed = fixed
        self.free = np.setdiff1d(np.arange(n), fixed)

    def gauss_temperature(self, T, method):
        return (self.P if method == "IV" else self.Q) @ T

    def source(self, T):
        ev = self.sc.evaporation
        if ev is None:
            return self.F_laser
        Tg = self.gauss_temperature(T, ev.method)
        return self.F_laser + self.QtW @ np.asarray(evaporative_cooling(Tg, ev))

    def recoil_l1(self, T, method="CE"):
        """int p_v(T) delta_rho dx over the band (N/m)."""
        ev = self.sc.evaporation or EvaporationModel.from_material(self.sc.material)
        Tg = self.gauss_temperature(T, method)
        return float(np.sum(np.asarray(recoil_pressure(Tg, ev)) * self.delta_rho * self.wj))


def solve_transient_2d(sc: MeltPoolScenario, *, callback=None) -> SolveReport2D:
    start = time.perf_counter()
    op = Heat2D(sc)
    n = op.mesh.n_nodes
    free, fixed = op.free, op.fixed
    A = (op.M / sc.dt + op.K).tocsr()
    A_ff = A[free][:, free].tocsc()
    lu = splu(A_ff, permc_spec="MMD_AT_PLUS_A")
    T = np.full(n, float(sc.T0))
    T[fixed] = sc.T_bar
    if sc.T0 != sc.T_bar:
        # Dirichlet nodes jump to T_bar in the first step; lift that jump once
        lift0 = (A[free][:, fixed] @ (T[fixed] - sc.T0))
    else:
        lift0 = None
    T_prev = T.copy()
    iters = np.zeros(sc.n_steps, dtype=np.int32)
    # solve for the increment T^{n+1} - T^n, which keeps round-off relative
    # to the temperature change rather than to the temperature itself
    for step in range(sc.n_steps):
        KT = (op.K @ T)[free]
        Tk = 2.0 * T - T_prev if step > 0 else T.copy()
        for it in range(1, PICARD_MAXIT + 1):
            rhs = op.source(Tk)[free] - KT
            if lift0 is not None and step == 0:
                rhs = rhs - lift0
            new = T[free] + lu.solve(rhs)
            change = float(np.max(np.abs(new - Tk[free])))
            Tk[free] = new
            if not np.isfinite(change):
                raise SolverError(f"non-finite temperature at step {step}")
            if change < PICARD_TOL or sc.evaporation is None:
                break
        else:
            raise SolverError(f"fixed-point iteration did not converge at step {step}",
                              residual=change, iterations=it)
        T_prev, T = T, Tk
        iters[step] = it
        if callback:
            callback(step, T)
    ip = int(np.argmax(T))
    xy = op.mesh.coordinates[ip]
    method = sc.evaporation.method if sc.evaporation else "CE"
    return SolveReport2D(field=DiscreteField(op.mesh, T, units="K", name="T"), T_peak=float(T[ip]),
                         x_peak=xy, d_peak=float(signed_distance(xy, sc.geometry)),
                         recoil_l1=op.recoil_l1(T, method), wall_time=time.perf_counter() - start,
                         n_steps=sc.n_steps, iterations=iters)
