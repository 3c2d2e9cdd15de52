"""Benchmark scenarios B1-B4, reference solutions, error metrics and sweeps.

B1  1D laser heating of a planar interface (metal at x < 0).
B2  B1 plus evaporative cooling including the vapor enthalpy.
B3  B1 plus latent-heat cooling and evaporation-induced convection.
B4  2D fixed melt-pool surface heated by a Gaussian beam, with cooling.

1D errors are measured against a sharp-interface solution computed on a
uniform mesh with a node at the interface; references are cached on disk,
keyed by a hash of everything that determines them.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .delta import CASES
from .errors import InvalidInputError, SolverError
from .evaporation import METHODS, EvaporationModel, LaserModel, recoil_l1_CE, recoil_pressure
from .fields import DiscreteField, MeltPool2D, signed_distance
from .materials import TI64, MaterialSet
from .mesh import Cartesian2D, Interval1D
from .thermal import (ThermalScenario, interface_velocity, peclet_number, solve_steady,
                      solve_transient, steady_analytic_1d)

BENCHMARKS = ("B1", "B2", "B3", "B4")
HALF_WIDTH = 100e-6
Q_LASER = 1e10
T_AMBIENT = 500.0

#: sharp-reference resolutions (element size, time step)
REFERENCE_POLICIES = {
    "paper-exact": (1.5625e-9, 1e-10),
    "budgeted": (6.25e-9, 4e-10),
}
REFERENCE_SCHEMA = 2

# 1D diffuse meshes: h = eps / n_i on |x| <= eps, growing by GROWTH up to H_FAR
H_FAR = 1e-7
GROWTH = 1.05

# 2D melt pool: uniform 512 x 512 cells over the 200 um square
B4_CELLS = 512
#: recoil L1 norm of the body-fitted sharp 2D solution, taken as the B4 oracle
B4_RECOIL_REF = 8.79

ROW_COLUMNS = (
    "benchmark", "case", "method", "eps", "n_i", "h", "n_elements", "dt", "t_end", "steady",
    "status", "l2_error", "T_interface", "T_interface_ref", "recoil", "recoil_ref",
    "recoil_error", "peclet_gas", "peclet_gas_max", "T_peak", "d_peak", "fitted_order",
    "steps", "wall_time", "message",
)
TIMING_COLUMNS = ("wall_time",)


@dataclass(frozen=True)
class RunSpec:
    """One row of a sweep; everything except (eps, n_i, case, method, dt,
    t_end) is fixed by the benchmark id."""

    benchmark: str
    eps: float
    n_i: int
    case: str = "V1"
    method: str = "IV"
    dt: float = 1e-9
    t_end: float = 1e-5
    steady: bool = False
    material: MaterialSet = TI64

    def __post_init__(self):
        if self.benchmark not in BENCHMARKS:
            raise InvalidInputError(f"unknown benchmark {self.benchmark!r}; expected one of {BENCHMARKS}")
        if self.case not in CASES:
            raise InvalidInputError(f"unknown case {self.case!r}; expected one of {', '.join(CASES)}")
        if self.method not in METHODS:
            raise InvalidInputError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not (np.isfinite(self.eps) and 0 < self.eps <= HALF_WIDTH / 2):
            raise InvalidInputError(f"eps must lie in (0, {HALF_WIDTH / 2}] m")
        if int(self.n_i) != self.n_i or self.n_i < 4:
            raise InvalidInputError("n_i must be an integer >= 4")
        if not (self.dt > 0 and self.t_end >= self.dt):
            raise InvalidInputError("need dt > 0 and t_end >= dt")
        if self.steady and self.benchmark != "B1":
            raise InvalidInputError("the steady variant exists for B1 only")

    @property
    def key(self) -> tuple:
        return (self.benchmark, self.case, self.method, float(self.eps), int(self.n_i),
                float(self.dt), float(self.t_end), bool(self.steady))

    @property
    def h(self) -> float:
        return self.eps / self.n_i


# --------------------------------------------------------------------------
# scenario construction
# --------------------------------------------------------------------------

def _evaporation(bench: str, method: str, material: MaterialSet) -> Optional[EvaporationModel]:
    if bench in ("B2", "B4"):
        return EvaporationModel.from_material(material, cooling="WithEnthalpy", method=method)
    if bench == "B3":
        return EvaporationModel.from_material(material, cooling="WithoutEnthalpy", method=method)
    return None


def diffuse_mesh_1d(eps, n_i, half_width=HALF_WIDTH):
    return Interval1D.graded(half_width, eps / n_i, eps, H_FAR, GROWTH)


def build_scenario(spec: RunSpec):
    """ThermalScenario (B1-B3) or MeltPoolScenario (B4) for a run spec."""
    mat = spec.material
    ev = _evaporation(spec.benchmark, spec.method, mat)
    if spec.benchmark == "B4":
        from .thermal2d import MeltPoolScenario

        mesh = Cartesian2D.uniform((-HALF_WIDTH, HALF_WIDTH), (-HALF_WIDTH, HALF_WIDTH), B4_CELLS, B4_CELLS)
        laser = LaserModel(variant="Gaussian2D", absorptivity=mat.absorptivity, power=mat.laser_power,
                           radius=mat.laser_radius)
        return MeltPoolScenario(mesh=mesh, eps=spec.eps, material=mat, case=spec.case, laser=laser,
                                evaporation=ev, T0=T_AMBIENT, T_bar=T_AMBIENT, dt=spec.dt, t_end=spec.t_end,
                                geometry=MeltPool2D(half_width=HALF_WIDTH))
    return ThermalScenario(mesh=diffuse_mesh_1d(spec.eps, spec.n_i), material=mat, eps=spec.eps,
                           case=spec.case, laser=LaserModel(q=Q_LASER), evaporation=ev,
                           convection=spec.benchmark == "B3", T0=T_AMBIENT, T_bar=T_AMBIENT,
                           dt=spec.dt, t_end=spec.t_end)


def reference_scenario(spec: RunSpec, policy: str = "paper-exact") -> ThermalScenario:
    if policy not in REFERENCE_POLICIES:
        raise InvalidInputError(f"reference policy must be one of {tuple(REFERENCE_POLICIES)}")
    if spec.benchmark == "B4":
        raise InvalidInputError("B4 has no 1D sharp reference")
    h, dt = REFERENCE_POLICIES[policy]
    dt = min(dt, spec.dt)
    n = max(1, int(round(spec.t_end / dt)))
    dt = spec.t_end / n
    return ThermalScenario(mesh=Interval1D.uniform(HALF_WIDTH, h), material=spec.material, eps=None,
                           laser=LaserModel(q=Q_LASER),
                           evaporation=_evaporation(spec.benchmark, "IV", spec.material),
                           convection=spec.benchmark == "B3", T0=T_AMBIENT, T_bar=T_AMBIENT,
                           dt=dt, t_end=spec.t_end)


# --------------------------------------------------------------------------
# reference cache
# --------------------------------------------------------------------------

def default_cache_dir() -> Path:
    return Path(os.environ.get("CSFMELT_CACHE", Path.home() / ".cache" / "csfmelt"))


def reference_key(sc: ThermalScenario) -> str:
    ev = sc.evaporation
    doc = {
        "schema": REFERENCE_SCHEMA,
        "material": sc.material.to_dict(),
        "evaporation": None if ev is None else {"cooling": ev.cooling},
        "convection": sc.convection,
        "q": sc.laser.q,
        "T0": sc.T0, "T_bar": sc.T_bar, "dt": sc.dt, "t_end": sc.t_end,
        "half_width": float(sc.mesh.nodes[-1]), "n_elements": sc.mesh.n_elements,
    }
    blob = json.dumps(doc, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:20]


@dataclass
class Reference1D:
    x: np.ndarray
    T: np.ndarray
    T_interface: float
    wall_time: float
    key: str

    def __call__(self, xq):
        return np.interp(xq, self.x, self.T)


_MEMO: dict = {}


def reference_1d(spec: RunSpec, policy: str = "paper-exact", cache_dir=None, *, use_cache=True) -> Reference1D:
    """Sharp 1D reference for the benchmark of ``spec``, computed once and cached."""
    sc = reference_scenario(spec, policy)
    key = reference_key(sc)
    if key in _MEMO:
        return _MEMO[key]
    path = None
    if use_cache:
        cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
        path = cache / f"ref-{spec.benchmark}-{key}.npz"
        if path.exists():
            data = np.load(path)
            ref = Reference1D(data["x"], data["T"], float(data["T_interface"]), float(data["wall_time"]), key)
            _MEMO[key] = ref
            return ref
    rep = solve_transient(sc)
    ref = Reference1D(np.asarray(sc.mesh.nodes), np.asarray(rep.T), rep.T_interface, rep.wall_time, key)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, x=ref.x, T=ref.T, T_interface=ref.T_interface, wall_time=ref.wall_time)
        os.replace(tmp, path)
    _MEMO[key] = ref
    return ref


def reference_self_difference(spec: RunSpec, cache_dir=None) -> float:
    """Relative L2 difference between the budgeted and the paper-exact reference."""
    fine = reference_1d(spec, "paper-exact", cache_dir)
    coarse = reference_1d(spec, "budgeted", cache_dir)
    mesh = Interval1D(coarse.x)
    return l2_relative_error(DiscreteField(mesh, coarse.T), fine)


# --------------------------------------------------------------------------
# error metrics
# --------------------------------------------------------------------------

def l2_relative_error(fld: DiscreteField, reference) -> float:
    """||T - T_ref|| / ||T_ref|| in L2 with 4-point Gauss quadrature on the
    field's mesh; ``reference`` is a callable of x, a DiscreteField or (x, T)."""
    mesh = fld.mesh
    if not isinstance(mesh, Interval1D):
        raise InvalidInputError("l2_relative_error supports 1D fields")
    pts, wj, shape = mesh.quadrature()
    v = fld.values
    Tq = np.stack([v[:-1], v[1:]], axis=1) @ shape
    if isinstance(reference, DiscreteField):
        Rq = np.interp(pts, reference.mesh.nodes, reference.values)
    elif callable(reference):
        Rq = np.asarray(reference(pts), dtype=float)
    else:
        rx, rT = reference
        Rq = np.interp(pts, rx, rT)
    num = np.sum((Tq - Rq) ** 2 * wj)
    den = np.sum(Rq**2 * wj)
    if den <= 0:
        raise InvalidInputError("reference has zero L2 norm")
    return float(np.sqrt(num / den))


def convergence_order(points: Sequence) -> tuple:
    """Least-squares slope of log(error) over log(eps) and the pairwise orders
    between consecutive points sorted by eps."""
    pts = sorted((float(e), float(r)) for e, r in points)
    if len(pts) < 3:
        raise InvalidInputError("convergence order needs at least three points")
    eps = np.array([p[0] for p in pts])
    err = np.array([p[1] for p in pts])
    if np.unique(eps).size != eps.size:
        raise InvalidInputError("eps values must be distinct")
    if np.any(eps <= 0) or np.any(err <= 0):
        raise InvalidInputError("eps and errors must be positive")
    le, lr = np.log(eps), np.log(err)
    slope = float(np.polyfit(le, lr, 1)[0])
    pairwise = list(np.diff(lr) / np.diff(le))
    return slope, pairwise


def find_threshold(error_fn: Callable[[float], float], lo: float, hi: float, target: float = 0.01,
                   rtol: float = 0.01, max_iter: int = 60) -> float:
    """eps at which an error increasing in eps crosses ``target``.

    Bisection in log(eps) until the bracket is narrower than ``rtol``, then
    log-log interpolation inside the final bracket.
    """
    e_lo, e_hi = error_fn(lo), error_fn(hi)
    if not (e_lo < target <= e_hi):
        raise InvalidInputError(f"target {target} not bracketed: err({lo})={e_lo}, err({hi})={e_hi}")
    for _ in range(max_iter):
        if hi / lo - 1.0 < rtol:
            break
        mid = math.sqrt(lo * hi)
        e_mid = error_fn(mid)
        if e_mid < target:
            lo, e_lo = mid, e_mid
        else:
            hi, e_hi = mid, e_mid
    s = (math.log(target) - math.log(e_lo)) / (math.log(e_hi) - math.log(e_lo))
    return float(math.exp(math.log(lo) + s * (math.log(hi) - math.log(lo))))


# --------------------------------------------------------------------------
# single runs
# --------------------------------------------------------------------------

def _empty_row(spec: RunSpec) -> dict:
    row = dict.fromkeys(ROW_COLUMNS)
    row.update(benchmark=spec.benchmark, case=spec.case, method=spec.method, eps=float(spec.eps),
               n_i=int(spec.n_i), h=float(spec.h), dt=float(spec.dt), t_end=float(spec.t_end),
               steady=bool(spec.steady), status="ok", message="")
    return row


def _recoil_1d(spec, sc, T, T_interface):
    ev = sc.evaporation or EvaporationModel.from_material(spec.material)
    if spec.method == "IV":
        return float(recoil_pressure(T_interface, ev))
    mesh = sc.mesh
    pts, wj, shape = mesh.quadrature()
    Tq = np.stack([T[:-1], T[1:]], axis=1) @ shape
    d = signed_distance(pts, sc.geometry)
    return recoil_l1_CE(Tq.ravel(), d.ravel(), spec.eps, wj.ravel(), spec.material.rho, ev)


def run_benchmark(spec: RunSpec, policy: str = "paper-exact", cache_dir=None, *,
                  reference: Optional[Reference1D] = None, keep_field: bool = False) -> dict:
    """Solve one configuration and return its report row.

    Solver failures do not raise; the row is marked ``failed`` with the
    diagnostic in ``message``.  With ``keep_field`` the nodal solution is
    attached under the private key ``_field``.
    """
    row = _empty_row(spec)
    start = time.perf_counter()
    try:
        sc = build_scenario(spec)
        if spec.benchmark == "B4":
            from .thermal2d import solve_transient_2d

            rep = solve_transient_2d(sc)
            row.update(n_elements=sc.mesh.n_elements, h=float(sc.mesh.h_min), recoil=rep.recoil_l1,
                       recoil_ref=B4_RECOIL_REF, recoil_error=abs(rep.recoil_l1 / B4_RECOIL_REF - 1.0),
                       T_peak=rep.T_peak, d_peak=rep.d_peak, steps=rep.n_steps)
        elif spec.steady:
            rep = solve_steady(sc)
            mat = spec.material
            prof = steady_analytic_1d(Q_LASER, HALF_WIDTH, mat.k_g, mat.k_l, T_AMBIENT, T_AMBIENT)
            row.update(n_elements=sc.mesh.n_elements, l2_error=l2_relative_error(rep.field, prof),
                       T_interface=rep.T_interface, T_interface_ref=float(prof(0.0)),
                       T_peak=rep.T_peak, d_peak=-rep.x_peak, steps=0)
        else:
            ref = reference if reference is not None else reference_1d(spec, policy, cache_dir)
            rep = solve_transient(sc)
            p = _recoil_1d(spec, sc, rep.T, rep.T_interface)
            ev = sc.evaporation or EvaporationModel.from_material(spec.material)
            p_ref = float(recoil_pressure(ref.T_interface, ev))
            row.update(n_elements=sc.mesh.n_elements, l2_error=l2_relative_error(rep.field, ref),
                       T_interface=rep.T_interface, T_interface_ref=ref.T_interface, recoil=p,
                       recoil_ref=p_ref, recoil_error=abs(p / p_ref - 1.0) if p_ref > 0 else float("nan"),
                       T_peak=rep.T_peak, d_peak=-rep.x_peak, steps=rep.n_steps)
            if sc.convection:
                mat = spec.material
                u_gas = float(np.max(interface_velocity(sc, rep.T_interface)))
                h_gas = np.diff(sc.mesh.nodes)[sc.mesh.nodes[:-1] >= 0.0]
                row["peclet_gas"] = peclet_number(mat.rho_cp.gas, u_gas, spec.h, mat.k_g)
                row["peclet_gas_max"] = peclet_number(mat.rho_cp.gas, u_gas, float(h_gas.max()), mat.k_g)
        if keep_field:
            row["_field"] = rep.field
    except (SolverError, FloatingPointError, np.linalg.LinAlgError, MemoryError) as exc:
        row.update(status="failed", message=f"{type(exc).__name__}: {exc}")
    row["wall_time"] = time.perf_counter() - start
    return row


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

@dataclass
class SweepReport:
    rows: list = field(default_factory=list)
    #: row index -> nodal DiscreteField, filled when fields are kept
    fields: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.rows)

    def fit_orders(self):
        """Fill ``fitted_order`` for every (benchmark, case, method, n_i) family
        with at least three distinct eps values and positive errors."""
        groups: dict = {}
        for r in self.rows:
            r["fitted_order"] = None
            if r["status"] == "ok" and r["l2_error"] is not None and r["l2_error"] > 0:
                groups.setdefault((r["benchmark"], r["case"], r["method"], r["n_i"], r["steady"]), []).append(r)
        for members in groups.values():
            eps = {m["eps"] for m in members}
            if len(eps) >= 3:
                slope, _ = convergence_order([(m["eps"], m["l2_error"]) for m in members])
                for m in members:
                    m["fitted_order"] = slope
        return self


def sweep_specs(benchmark: str, cases: Iterable[str], methods: Iterable[str], eps_list: Iterable[float],
                n_i_list: Iterable[int], **common) -> list:
    """Deterministically ordered, de-duplicated run specs of a Cartesian product."""
    seen, specs = set(), []
    for case in cases:
        for method in methods:
            for eps in eps_list:
                for n_i in n_i_list:
                    spec = RunSpec(benchmark=benchmark, case=case, method=method, eps=float(eps),
                                   n_i=int(n_i), **common)
                    if spec.key not in seen:
                        seen.add(spec.key)
                        specs.append(spec)
    return specs


def _marker_path(marker_dir, spec: RunSpec) -> Path:
    blob = json.dumps(list(spec.key) + [spec.material.to_dict()], sort_keys=True).encode()
    return Path(marker_dir) / f"{hashlib.sha256(blob).hexdigest()[:20]}.json"


def _run_job(args):
    spec, policy, cache_dir, keep = args
    return run_benchmark(spec, policy, cache_dir, keep_field=keep)


def sweep(benchmark: str, cases, methods, eps_list, n_i_list, *, policy: str = "paper-exact",
          cache_dir=None, workers: int = 1, marker_dir=None, deadline: Optional[float] = None,
          keep_fields: bool = False, **common) -> SweepReport:
    """Run the Cartesian product of configurations.

    Rows already recorded in ``marker_dir`` are reused, so an interrupted sweep
    resumes where it stopped (resumed rows carry no field).  ``deadline`` (a
    ``time.monotonic()`` value) marks rows that would start after it as skipped.
    """
    specs = sweep_specs(benchmark, cases, methods, eps_list, n_i_list, **common)
    rows: list = [None] * len(specs)
    todo = []
    for i, spec in enumerate(specs):
        if marker_dir is not None and _marker_path(marker_dir, spec).exists():
            rows[i] = json.loads(_marker_path(marker_dir, spec).read_text())
        else:
            todo.append(i)
    # references are built once here so that workers only read the cache
    if todo and benchmark != "B4" and not all(specs[i].steady for i in todo):
        for s in {(specs[i].dt, specs[i].t_end): specs[i] for i in todo if not specs[i].steady}.values():
            reference_1d(s, policy, cache_dir)

    kept = {}

    def record(i, row):
        fld = row.pop("_field", None)
        if fld is not None:
            kept[i] = fld
        rows[i] = row
        if marker_dir is not None:
            path = _marker_path(marker_dir, specs[i])
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(row))

    if workers <= 1:
        for i in todo:
            if deadline is not None and time.monotonic() > deadline:
                rows[i] = {**_empty_row(specs[i]), "status": "skipped", "message": "wall-clock budget exhausted"}
                continue
            record(i, run_benchmark(specs[i], policy, cache_dir, keep_field=keep_fields))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {i: pool.submit(_run_job, (specs[i], policy, cache_dir, keep_fields)) for i in todo}
            for i in todo:
                record(i, futures[i].result())
    return SweepReport(rows, kept).fit_orders()


def estimate_reference_seconds(spec: RunSpec, policy: str) -> float:
    """Rough cost model of a sharp reference solve (seconds)."""
    if spec.benchmark == "B4" or spec.steady:
        return 0.0
    h, dt = REFERENCE_POLICIES[policy]
    nodes = 2 * HALF_WIDTH / h
    steps = spec.t_end / min(dt, spec.dt)
    per_node_step = {"B1": 1.2e-8, "B2": 2.0e-8, "B3": 1.0e-7}[spec.benchmark]
    return nodes * steps * per_node_step
