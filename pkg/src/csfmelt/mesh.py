"""Conforming 1D interval and 2D tensor-product meshes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

# 4-point Gauss-Legendre rule on [-1, 1]
GAUSS_POINTS, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(4)


def _check_nodes(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InvalidInputError(f"{name} needs at least two coordinates")
    if not np.all(np.isfinite(x)) or np.any(np.diff(x) <= 0.0):
        raise InvalidInputError(f"{name} must be finite and strictly increasing")
    return x


def _graded_half(half_width, h_fine, fine_extent, h_far, growth):
    """Non-negative node coordinates from 0 to half_width: uniform h_fine up to
    fine_extent, then geometric growth to at most h_far."""
    n_fine = max(1, int(np.ceil(fine_extent / h_fine - 1e-9)))
    pts = list(h_fine * np.arange(n_fine + 1))
    h = h_fine
    h_cap = max(h_far, h_fine)
    while pts[-1] < half_width:
        h = min(h * growth, h_cap)
        pts.append(pts[-1] + h)
    pts = np.asarray(pts)
    if pts[-1] > half_width:
        # compress the coarsening tail so the last node hits the boundary
        tail = pts[n_fine:]
        if tail.size > 2:
            scale = (half_width - tail[0]) / (tail[-1] - tail[0])
            pts[n_fine:] = tail[0] + (tail - tail[0]) * scale
        pts[-1] = half_width
    return pts


@dataclass(frozen=True)
class Interval1D:
    """Linear elements on [x_0, x_n]."""

    nodes: np.ndarray

    def __post_init__(self):
        x = _check_nodes(self.nodes, "nodes").copy()
        x.setflags(write=False)
        object.__setattr__(self, "nodes", x)

    @classmethod
    def uniform(cls, half_width, h):
        n = int(round(2.0 * half_width / h))
        if n < 2 or abs(n * h - 2.0 * half_width) > 1e-9 * half_width:
            raise InvalidInputError("element size must divide the domain width")
        if n % 2:
            raise InvalidInputError("need an even element count for a node at x = 0")
        x = np.linspace(-half_width, half_width, n + 1)
        x[n // 2] = 0.0
        return cls(x)

    @classmethod
    def graded(cls, half_width, h_fine, fine_extent, h_far=1e-7, growth=1.05):
        """Symmetric mesh with a node at 0, size h_fine on |x| <= fine_extent and
        geometric coarsening (ratio ``growth``) up to ``h_far`` beyond it."""
        if h_fine <= 0 or fine_extent <= 0 or growth < 1.0:
            raise InvalidInputError("invalid grading parameters")
        if fine_extent >= half_width:
            n = int(round(2.0 * half_width / h_fine))
            n += n % 2
            x = np.linspace(-half_width, half_width, n + 1)
            x[n // 2] = 0.0
            return cls(x)
        right = _graded_half(half_width, h_fine, fine_extent, h_far, growth)
        return cls(np.concatenate([-right[:0:-1], right]))

    @property
    def x(self):
        return self.nodes

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def n_elements(self) -> int:
        return self.nodes.size - 1

    @property
    def h(self):
        return np.diff(self.nodes)

    @property
    def h_min(self) -> float:
        return float(self.h.min())

    def node_index(self, x0: float, tol: float = 1e-12) -> int:
        i = int(np.argmin(np.abs(self.nodes - x0)))
        scale = max(abs(self.nodes[0]), abs(self.nodes[-1]))
        if abs(self.nodes[i] - x0) > tol * scale:
            raise InvalidInputError(f"no mesh node at x = {x0}")
        return i

    def quadrature(self):
        """Gauss points (n_el, 4), weights*J (n_el, 4) and shape values (2, 4)."""
        x0, h = self.nodes[:-1], self.h
        pts = x0[:, None] + 0.5 * h[:, None] * (GAUSS_POINTS[None, :] + 1.0)
        wj = 0.5 * h[:, None] * GAUSS_WEIGHTS[None, :]
        shape = np.vstack([0.5 * (1.0 - GAUSS_POINTS), 0.5 * (1.0 + GAUSS_POINTS)])
        return pts, wj, shape

    def interpolate(self, values, xq):
        return np.interp(xq, self.nodes, values)


@dataclass(frozen=True)
class Cartesian2D:
    """Bilinear quadrilaterals on a tensor grid; node id = j * nx + i."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        for name in ("xs", "ys"):
            a = _check_nodes(getattr(self, name), name).copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def uniform(cls, x_range, y_range, nx_cells, ny_cells):
        return cls(np.linspace(*x_range, nx_cells + 1), np.linspace(*y_range, ny_cells + 1))

    @property
    def nx(self) -> int:
        return self.xs.size

    @property
    def ny(self) -> int:
        return self.ys.size

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    @property
    def n_elements(self) -> int:
        return (self.nx - 1) * (self.ny - 1)

    @property
    def h_min(self) -> float:
        return float(min(np.diff(self.xs).min(), np.diff(self.ys).min()))

    @property
    def coordinates(self):
        X, Y = np.meshgrid(self.xs, self.ys)
        return np.column_stack([X.ravel(), Y.ravel()])

    def connectivity(self):
        """(n_el, 4) node ids, counter-clockwise from the lower-left corner."""
        i, j = np.meshgrid(np.arange(self.nx - 1), np.arange(self.ny - 1))
        n0 = (j * self.nx + i).ravel()
        return np.column_stack([n0, n0 + 1, n0 + 1 + self.nx, n0 + self.nx])

    def boundary_nodes(self, side: str):
        ids = np.arange(self.n_nodes).reshape(self.ny, self.nx)
        sides = {"bottom": ids[0, :], "top": ids[-1, :], "left": ids[:, 0], "right": ids[:, -1]}
        if side not in sides:
            raise InvalidInputError(f"unknown boundary {side!r}")
        return sides[side].copy()
