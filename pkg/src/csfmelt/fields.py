"""Interface geometry: signed distance, smoothed indicator, level-set conversions
and closest-point projection for the planar 1D and the 2D melt-pool benchmarks.

Sign convention throughout: the signed distance is negative in the gas and
positive in the liquid (metal) phase, and the indicator is 0 in the gas and 1
in the liquid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import InvalidInputError, SaturationError

#: clamp applied to |phi| before inverting the tanh profile
LEVEL_SET_CLAMP = 1.0 - 1e-12


def _finite(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} must be finite")
    return arr


def _positive(name, value):
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise InvalidInputError(f"{name} must be positive and finite, got {value!r}")
    return value


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


# --------------------------------------------------------------------------
# geometry descriptions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Planar1D:
    """Planar interface at x = 0 with the metal at x < 0 and gas at x > 0 (d = -x)."""

    half_width: float = 100e-6

    def __post_init__(self):
        _positive("half_width", self.half_width)


@dataclass(frozen=True)
class MeltPool2D:
    """Concave melt-pool surface: a semicircle of radius ``r`` below the origin,
    joined to the flat top surface y = b by two fillets of radius ``b``."""

    r: float = 50e-6
    b: float = 10e-6
    half_width: float = 100e-6

    def __post_init__(self):
        _positive("r", self.r)
        _positive("b", self.b)
        _positive("half_width", self.half_width)
        if self.r + self.b >= self.half_width:
            raise InvalidInputError("melt pool requires r + b < domain half-width")


InterfaceGeometry = Union[Planar1D, MeltPool2D]


@dataclass(frozen=True)
class DiffuseInterfaceParams:
    """Interface thickness; the diffuse band is {|d| <= eps/2}."""

    epsilon: float

    def __post_init__(self):
        _positive("epsilon", self.epsilon)

    def in_band(self, d):
        return np.abs(np.asarray(d)) <= 0.5 * self.epsilon


@dataclass(frozen=True)
class DiscreteField:
    """Nodal scalar field on a mesh. Values are copied and frozen on construction."""

    mesh: object
    values: np.ndarray
    units: str = ""
    name: str = ""

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        n = getattr(self.mesh, "n_nodes", None)
        if n is not None and vals.shape != (n,):
            raise InvalidInputError(f"field length {vals.shape} does not match {n} mesh nodes")
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError(f"field {self.name or '?'} contains NaN/Inf")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


# --------------------------------------------------------------------------
# indicator and level set
# --------------------------------------------------------------------------

def indicator(d, eps):
    """Sine-based smoothed Heaviside: 0 for d <= -eps/2, 1 for d >= eps/2.

    Inside the band chi = 1/2 + d/eps + sin(2 pi d / eps) / (2 pi).
    """
    d_arr = _finite("d", d)
    eps = _positive("eps", eps)
    s = np.clip(d_arr / eps, -0.5, 0.5)
    chi = 0.5 + s + np.sin(2.0 * np.pi * s) / (2.0 * np.pi)
    chi = np.clip(chi, 0.0, 1.0)
    return _out(chi, d)


def level_set_from_distance(d, eps):
    """Regularized level set phi = tanh(3 d / eps)."""
    d_arr = _finite("d", d)
    eps = _positive("eps", eps)
    return _out(np.tanh(3.0 * d_arr / eps), d)


def distance_from_level_set(phi, eps):
    """Inverse of :func:`level_set_from_distance`: d = eps/6 * ln((1+phi)/(1-phi)).

    |phi| is clamped to 1 - 1e-12 before the logarithm; values with |phi| > 1
    are not level-set values and raise :class:`SaturationError`.
    """
    phi_arr = _finite("phi", phi)
    eps = _positive("eps", eps)
    if np.any(np.abs(phi_arr) > 1.0):
        raise SaturationError("|phi| > 1 is outside the regularized level-set range")
    p = np.clip(phi_arr, -LEVEL_SET_CLAMP, LEVEL_SET_CLAMP)
    # 2*atanh(p) == ln((1+p)/(1-p)), better conditioned near 0
    return _out(eps / 3.0 * np.arctanh(p), phi)


# --------------------------------------------------------------------------
# signed distance
# --------------------------------------------------------------------------

def _as_points(x):
    pts = _finite("x", x)
    if pts.ndim == 0 or pts.shape[-1] != 2:
        raise InvalidInputError("2D geometry expects points of shape (..., 2)")
    return pts.reshape(-1, 2), pts.ndim == 1


def _meltpool_distance(px, py, geom):
    r, b = geom.r, geom.b
    ax = np.abs(px)
    norm = np.hypot(px, py)
    inner = ax < r + b
    lower = py < 0.0
    d = np.empty_like(px)
    m = inner & lower
    d[m] = norm[m] - r
    m = ~inner & lower
    d[m] = np.minimum(norm[m] - r, b - py[m])
    m = ~inner & ~lower
    d[m] = b - py[m]
    m = inner & ~lower
    d[m] = b - np.hypot(r + b - ax[m], py[m])
    return d


def signed_distance(x, geom):
    """Signed distance to the interface midplane (negative in gas)."""
    if isinstance(geom, Planar1D):
        return _out(-_finite("x", x), x)
    if isinstance(geom, MeltPool2D):
        pts, single = _as_points(x)
        d = _meltpool_distance(pts[:, 0], pts[:, 1], geom)
        return float(d[0]) if single else d.reshape(np.shape(x)[:-1])
    raise InvalidInputError(f"unsupported geometry {geom!r}")


# --------------------------------------------------------------------------
# closest point projection
# --------------------------------------------------------------------------

def _project_circle(px, py, cx, cy, rad, theta_lo, theta_hi, default_theta):
    """Project onto the circular arc {c + rad*(cos t, sin t): t in [lo, hi]}."""
    vx, vy = px - cx, py - cy
    dist = np.hypot(vx, vy)
    theta = np.arctan2(vy, vx)
    theta = np.where(dist == 0.0, default_theta, theta)
    inside = (theta >= theta_lo) & (theta <= theta_hi)
    # outside the angular range the nearest point is one of the two endpoints
    lo = np.array([cx + rad * np.cos(theta_lo), cy + rad * np.sin(theta_lo)])
    hi = np.array([cx + rad * np.cos(theta_hi), cy + rad * np.sin(theta_hi)])
    d_lo = np.hypot(px - lo[0], py - lo[1])
    d_hi = np.hypot(px - hi[0], py - hi[1])
    qx = np.where(inside, cx + rad * np.cos(theta), np.where(d_lo <= d_hi, lo[0], hi[0]))
    qy = np.where(inside, cy + rad * np.sin(theta), np.where(d_lo <= d_hi, lo[1], hi[1]))
    return qx, qy


def _meltpool_candidates(px, py, geom):
    r, b = geom.r, geom.b
    c = r + b
    cands = []
    # 1: lower semicircle, liquid outside -> normal points away from origin
    qx, qy = _project_circle(px, py, 0.0, 0.0, r, -np.pi, 0.0, -0.5 * np.pi)
    cands.append((qx, qy, qx / r, qy / r))
    # 3: flat top surface y = b for |x| >= r + b, liquid below
    for sgn in (1.0, -1.0):
        qx = np.where(sgn * px >= c, px, sgn * c)
        qy = np.full_like(py, b)
        cands.append((qx, qy, np.zeros_like(px), -np.ones_like(py)))
    # 4: fillets centred at (+-c, 0), liquid inside -> normal points to centre
    qx, qy = _project_circle(px, py, c, 0.0, b, 0.5 * np.pi, np.pi, 0.75 * np.pi)
    cands.append((qx, qy, (c - qx) / b, (0.0 - qy) / b))
    qx, qy = _project_circle(px, py, -c, 0.0, b, 0.0, 0.5 * np.pi, 0.25 * np.pi)
    cands.append((qx, qy, (-c - qx) / b, (0.0 - qy) / b))
    return cands


def closest_point(x, geom):
    """Closest point on the interface midplane and the unit normal into the liquid.

    For the melt pool every interface piece is projected on separately and the
    nearest candidate wins; exact ties go to the piece listed first (arc, flat
    surface, fillet).
    """
    if isinstance(geom, Planar1D):
        xa = _finite("x", x)
        zero = np.zeros_like(xa)
        return _out(zero, x), _out(zero - 1.0, x)
    if not isinstance(geom, MeltPool2D):
        raise InvalidInputError(f"unsupported geometry {geom!r}")
    pts, single = _as_points(x)
    px, py = pts[:, 0], pts[:, 1]
    cands = _meltpool_candidates(px, py, geom)
    dist = np.stack([np.hypot(px - c[0], py - c[1]) for c in cands])
    pick = np.argmin(dist, axis=0)
    rows = np.arange(px.size)
    stacked = np.stack([np.stack(c) for c in cands])  # (piece, 4, n)
    sel = stacked[pick, :, rows]  # (n, 4)
    xg, nrm = sel[:, :2], sel[:, 2:]
    if single:
        return xg[0], nrm[0]
    shape = np.shape(x)
    return xg.reshape(shape), nrm.reshape(shape)


def interface_normal(x, geom):
    """Unit normal of the projected interface point (points into the liquid)."""
    return closest_point(x, geom)[1]
