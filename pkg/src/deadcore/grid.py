"""Cartesian grids, solution fields, and solver configuration.

A GridDomain is a uniform node lattice covering a logical domain (an open
box, or an open ball embedded in its bounding box) plus ``pad`` extra node
layers outside it.  Interior nodes are unknowns; every other node is a data
node carrying Dirichlet values.  The pad exists for the dynamic-programming
iteration and the game simulator, whose epsilon-balls reach up to eps beyond
the domain; finite-difference stencils only ever read the first data ring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import GridMismatch, ParameterError

__all__ = ["GridDomain", "SolverConfig", "SolveReport", "SolutionField"]


def _nodes(lo: float, hi: float, h: float, pad: int) -> np.ndarray:
    count = (hi - lo) / h
    n = round(count)
    if abs(count - n) > 1e-9:
        raise ParameterError(f"spacing {h} does not divide the box [{lo}, {hi}]")
    return lo + h * np.arange(-pad, n + pad + 1)


@dataclass(frozen=True)
class GridDomain:
    dim: int
    lo: np.ndarray
    hi: np.ndarray
    h: float
    pad: int
    kind: str  # "box" | "ball"
    ball_center: Optional[np.ndarray] = None
    ball_radius: Optional[float] = None

    # derived, filled in __post_init__
    axes: tuple = field(default=None, init=False, repr=False)
    shape: tuple = field(default=None, init=False, repr=False)
    interior: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).reshape(-1)
        hi = np.asarray(self.hi, dtype=float).reshape(-1)
        if self.dim not in (1, 2):
            raise ParameterError("grids support dim 1 and 2")
        if lo.size != self.dim or hi.size != self.dim:
            raise ParameterError("bounds dimension mismatch")
        if self.pad < 0:
            raise ParameterError("pad must be >= 0")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        axes = tuple(_nodes(lo[d], hi[d], self.h, self.pad) for d in range(self.dim))
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "shape", tuple(a.size for a in axes))
        if self.kind == "box":
            masks = [
                (a > lo[d] + 1e-12 * self.h) & (a < hi[d] - 1e-12 * self.h)
                for d, a in enumerate(axes)
            ]
            inter = masks[0] if self.dim == 1 else np.logical_and.outer(masks[0], masks[1])
        elif self.kind == "ball":
            c = np.asarray(self.ball_center, dtype=float).reshape(-1)
            object.__setattr__(self, "ball_center", c)
            pts = self.points()
            r2 = ((pts - c) ** 2).sum(axis=-1)
            inter = r2 < (self.ball_radius - 1e-12 * self.h) ** 2
        else:
            raise ParameterError(f"unknown grid kind {self.kind!r}")
        # stencil safety: interior nodes need one ring of nodes around them
        edge = np.zeros(self.shape, dtype=bool)
        if self.dim == 1:
            edge[0] = edge[-1] = True
        else:
            edge[0, :] = edge[-1, :] = True
            edge[:, 0] = edge[:, -1] = True
        if (inter & edge).any():
            raise ParameterError("interior touches the array edge; increase pad")
        object.__setattr__(self, "interior", inter)

    # -- constructors --------------------------------------------------------

    @staticmethod
    def box(lo, hi, h: float, pad: int = 0) -> "GridDomain":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        return GridDomain(
            dim=lo.size, lo=lo, hi=np.atleast_1d(np.asarray(hi, dtype=float)),
            h=h, pad=pad, kind="box",
        )

    @staticmethod
    def ball(radius: float, h: float, center=None, pad: int = 1, dim: int = 2) -> "GridDomain":
        if center is None:
            center = np.zeros(dim)
        center = np.atleast_1d(np.asarray(center, dtype=float))
        return GridDomain(
            dim=center.size,
            lo=center - radius,
            hi=center + radius,
            h=h,
            pad=pad,
            kind="ball",
            ball_center=center,
            ball_radius=float(radius),
        )

    # -- geometry ------------------------------------------------------------

    def points(self) -> np.ndarray:
        """Node coordinates, shape = grid shape + (dim,)."""
        if self.dim == 1:
            return self.axes[0][:, None]
        X, Y = np.meshgrid(self.axes[0], self.axes[1], indexing="ij")
        return np.stack([X, Y], axis=-1)

    def sample(self, fn: Callable) -> np.ndarray:
        """Evaluate fn on every node; fn takes an (N, dim) batch."""
        pts = self.points().reshape(-1, self.dim)
        return np.asarray(fn(pts), dtype=float).reshape(self.shape)

    def nearest_index(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        idx = tuple(
            int(np.clip(round((x[d] - self.axes[d][0]) / self.h), 0, self.shape[d] - 1))
            for d in range(self.dim)
        )
        return idx if self.dim > 1 else idx[0]

    def index_coords(self, idx) -> np.ndarray:
        if self.dim == 1:
            return np.array([self.axes[0][int(idx)]])
        return np.array([self.axes[0][idx[0]], self.axes[1][idx[1]]])

    def boundary_distance(self, x) -> float:
        """Distance from x to the logical domain boundary."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if self.kind == "ball":
            return float(self.ball_radius - np.linalg.norm(x - self.ball_center))
        return float(min((x - self.lo).min(), (self.hi - x).min()))

    def geometry_equal(self, other: "GridDomain") -> bool:
        return (
            self.dim == other.dim
            and self.kind == other.kind
            and self.shape == other.shape
            and self.h == other.h
            and np.allclose(self.lo, other.lo)
            and np.allclose(self.hi, other.hi)
        )


@dataclass
class SolverConfig:
    """Knobs of the relaxation / DPP iterations.

    relax is the update factor of the pointwise Newton step and governs the
    initial (free-boundary carving) phase, where factors above ~1.2 can make
    the truncation ring oscillate.  relax_tail, when set, takes over once
    the sweep updates fall below 1e4 * tol: the iteration is then in its
    smooth linear regime and tolerates stronger over-relaxation, which the
    large acceptance grids need to meet their runtime budget.  On divergence
    the solvers retry once with the conservative default.
    """

    scheme: str = "fd_relax"
    eps_g: Optional[float] = None  # default h^2, set at solve time
    relax: float = 0.8
    relax_tail: Optional[float] = None
    tol: float = 1e-8
    max_iter: int = 200_000
    eps_dpp: Optional[float] = None
    check_bracket: bool = True
    nested_init: bool = True

    def __post_init__(self):
        if self.scheme not in ("fd_relax", "dpp_iter"):
            raise ParameterError(f"unknown scheme {self.scheme!r}")
        if not self.tol > 0:
            raise ParameterError("tol must be positive")
        if not 0.0 < self.relax < 2.0:
            raise ParameterError("relaxation factor must lie in (0, 2)")
        if self.relax_tail is not None and not 0.0 < self.relax_tail < 2.0:
            raise ParameterError("tail relaxation factor must lie in (0, 2)")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be >= 1")

    @property
    def u_tol(self) -> float:
        """Dead-core threshold separating solver noise from true plateaus."""
        return 10.0 * self.tol

    def tail_factor(self) -> float:
        return self.relax_tail if self.relax_tail is not None else self.relax


@dataclass
class SolveReport:
    iterations: int = 0
    max_update: float = math.inf
    residual_norm: float = math.nan
    converged: bool = False
    tol: float = 1e-8
    u_tol: float = 1e-7
    scheme: str = "fd_relax"
    bracket_violations: int = -1  # -1 = not checked
    bracket_max_violation: float = math.nan


@dataclass
class SolutionField:
    """Grid function plus solve metadata; data nodes hold the Dirichlet
    values, interior nodes the computed solution."""

    grid: GridDomain
    values: np.ndarray
    report: SolveReport
    problem: object = None  # ProblemSpec when produced by solve_dirichlet

    def interior_values(self) -> np.ndarray:
        return self.values[self.grid.interior]

    def sup(self) -> float:
        return float(self.interior_values().max())

    def value_at(self, x) -> float:
        """Multilinear interpolation at an arbitrary point inside the grid."""
        g = self.grid
        x = np.asarray(x, dtype=float).reshape(-1)
        pos = [(x[d] - g.axes[d][0]) / g.h for d in range(g.dim)]
        i0 = [int(np.floor(p)) for p in pos]
        for d in range(g.dim):
            if not 0 <= i0[d] <= g.shape[d] - 2:
                if abs(pos[d] - (g.shape[d] - 1)) < 1e-9:
                    i0[d] = g.shape[d] - 2
                else:
                    raise ParameterError(f"point {x} outside the grid")
        f = [pos[d] - i0[d] for d in range(g.dim)]
        v = self.values
        if g.dim == 1:
            return float(v[i0[0]] * (1 - f[0]) + v[i0[0] + 1] * f[0])
        i, j = i0
        fx, fy = f
        return float(
            v[i, j] * (1 - fx) * (1 - fy)
            + v[i + 1, j] * fx * (1 - fy)
            + v[i, j + 1] * (1 - fx) * fy
            + v[i + 1, j + 1] * fx * fy
        )

    def nearest_value(self, x) -> float:
        idx = self.grid.nearest_index(x)
        return float(self.values[idx])

    def copy_with(self, values: np.ndarray) -> "SolutionField":
        return SolutionField(self.grid, values, self.report, self.problem)

    def require_same_grid(self, other: "SolutionField"):
        if not self.grid.geometry_equal(other.grid):
            raise GridMismatch("fields live on different grids")
