"""Free-boundary analytics on solution fields.

Positivity-set extraction, log-log exponent fits (growth, gradient decay,
L2 Hessian average), non-degeneracy ratios, density, porosity, and
distance-to-boundary comparability.  Everything here is read-only over the
field; the free boundary is located at the centers of sign-change cells
(sub-h localization would be noise).

Ball statistics use grid nodes in the closed ball |x - x0| <= r.  The
closed convention matters: radii aligned with lattice distances then carry
no quantization deficit, which keeps log-log slopes of pure powers exact
(strictly-inside sups showed a systematic ~4% slope bias).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DomainTooCoarse,
    InsufficientSignal,
    NoFreeBoundary,
    ParameterError,
)
from .grid import GridDomain, SolutionField
from .operators import grid_jet_tables
from .params import StructuralParams, compute_beta, compute_cnd
from .radial import RadialDeadCore

__all__ = [
    "PositivitySet",
    "positivity_set",
    "FitReport",
    "default_fit_radii",
    "fit_growth_exponent",
    "check_nondegeneracy",
    "NondegeneracyReport",
    "measure_density",
    "DensityReport",
    "estimate_porosity",
    "PorosityReport",
    "fit_gradient_decay",
    "l2_hessian_average",
    "L2AverageReport",
    "distance_bounds",
    "DistanceBoundsReport",
    "profile_jet_tables",
]


# --------------------------------------------------------------------------
# positivity set


@dataclass
class PositivitySet:
    positive: np.ndarray  # interior nodes with u > u_tol
    dead_core: np.ndarray  # interior nodes with u <= u_tol
    fb_cells: np.ndarray  # centers of sign-change cells, shape (k, dim)
    u_tol: float

    @property
    def has_free_boundary(self) -> bool:
        return self.fb_cells.shape[0] > 0

    def dead_fraction(self) -> float:
        total = self.positive.sum() + self.dead_core.sum()
        return float(self.dead_core.sum()) / total if total else 0.0


def positivity_set(u: SolutionField, u_tol: Optional[float] = None) -> PositivitySet:
    grid = u.grid
    if u_tol is None:
        u_tol = u.report.u_tol
    pos_full = u.values > u_tol
    positive = grid.interior & pos_full
    dead = grid.interior & ~pos_full
    # cells whose corners are all interior and carry both signs
    if grid.dim == 1:
        ok = grid.interior[:-1] & grid.interior[1:]
        p0, p1 = pos_full[:-1], pos_full[1:]
        change = ok & (p0 != p1)
        centers = (grid.axes[0][:-1] + grid.axes[0][1:])[change] / 2.0
        fb = centers.reshape(-1, 1)
    else:
        inter = grid.interior
        ok = inter[:-1, :-1] & inter[1:, :-1] & inter[:-1, 1:] & inter[1:, 1:]
        c00, c10 = pos_full[:-1, :-1], pos_full[1:, :-1]
        c01, c11 = pos_full[:-1, 1:], pos_full[1:, 1:]
        any_pos = c00 | c10 | c01 | c11
        all_pos = c00 & c10 & c01 & c11
        change = ok & any_pos & ~all_pos
        ii, jj = np.nonzero(change)
        fb = np.column_stack(
            [
                grid.axes[0][ii] + grid.h / 2.0,
                grid.axes[1][jj] + grid.h / 2.0,
            ]
        )
    return PositivitySet(positive=positive, dead_core=dead, fb_cells=fb, u_tol=u_tol)


# --------------------------------------------------------------------------
# log-log fits


@dataclass
class FitReport:
    exponent: float
    intercept: float
    radii: np.ndarray
    statistics: np.ndarray  # the fitted per-radius quantity
    rms_residual: float
    target: Optional[float] = None
    rel_dev: Optional[float] = None

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r.size < 5:
            raise ParameterError("fits need at least 5 radii")
        if not (np.diff(r) > 0).all():
            raise ParameterError("fit radii must be strictly increasing")
        if r[-1] / r[0] < 8.0 - 1e-9:
            raise ParameterError("fit radii must span a factor of at least 8")
        if self.target is not None and self.rel_dev is None:
            self.rel_dev = abs(self.exponent - self.target) / abs(self.target)


def default_fit_radii(h: float, max_radius: float, r_min: Optional[float] = None):
    """Geometric sequence r_k = r_min * 2^(k/2) capped at max_radius/2.

    r_min defaults to 4h but drops to 2h when that is the only way to reach
    the required span of 8 inside the cap."""
    cap = max_radius / 2.0
    if r_min is None:
        r_min = 4.0 * h
        if cap / r_min < 8.0:
            r_min = 2.0 * h
    radii = []
    k = 0
    while True:
        r = r_min * 2.0 ** (k / 2.0)
        if r > cap + 1e-12:
            break
        radii.append(r)
        k += 1
    return np.array(radii)


def _loglog_fit(radii, values):
    lr = np.log(radii)
    lv = np.log(values)
    A = np.column_stack([lr, np.ones_like(lr)])
    coef, *_ = np.linalg.lstsq(A, lv, rcond=None)
    resid = lv - A @ coef
    rms = float(np.sqrt((resid**2).mean()))
    return float(coef[0]), float(coef[1]), rms


def _interior_points(grid: GridDomain):
    pts = grid.points().reshape(-1, grid.dim)
    inter = grid.interior.ravel()
    return pts[inter]


def _require_near_free_boundary(u: SolutionField, ps: PositivitySet, x0):
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    val = abs(u.nearest_value(x0))
    if val <= 10.0 * ps.u_tol:
        # sitting on the vanishing set itself; a single-point degenerate
        # zero (Henon center) has no sign-change cell but is a valid center
        return x0
    if not ps.has_free_boundary:
        raise InsufficientSignal("field has no free boundary near the requested center")
    d = np.linalg.norm(ps.fb_cells - x0, axis=1).min()
    if d > math.sqrt(u.grid.dim) * u.grid.h:
        raise InsufficientSignal(
            f"center {x0} is {d:.3g} away from the free boundary (h = {u.grid.h})"
        )
    return x0


def _ball_sups(values_flat, pts, x0, radii, grid, x0_dist):
    for r in radii:
        if r > x0_dist + 1e-12:
            raise ParameterError(
                f"ball of radius {r:.3g} leaves the domain (dist = {x0_dist:.3g})"
            )
    d = np.linalg.norm(pts - x0, axis=1)
    slack = 1e-12
    return np.array([values_flat[d <= r * (1.0 + slack)].max() for r in radii])


def fit_growth_exponent(
    u: SolutionField,
    x0,
    radii=None,
    target: Optional[float] = None,
    u_tol: Optional[float] = None,
) -> FitReport:
    """Least-squares slope of log sup_{B_r(x0)} u against log r."""
    ps = positivity_set(u, u_tol)
    x0 = _require_near_free_boundary(u, ps, x0)
    grid = u.grid
    dist = grid.boundary_distance(x0)
    if radii is None:
        radii = default_fit_radii(grid.h, dist)
    radii = np.asarray(radii, dtype=float)
    pts = _interior_points(grid)
    vals = u.values[grid.interior]
    sups = _ball_sups(vals, pts, x0, radii, grid, dist)
    if sups[0] < 10.0 * ps.u_tol:
        raise InsufficientSignal(
            f"sup over the smallest ball ({sups[0]:.3g}) is below the noise floor"
        )
    slope, intercept, rms = _loglog_fit(radii, sups)
    return FitReport(
        exponent=slope, intercept=intercept, radii=radii, statistics=sups,
        rms_residual=rms, target=target,
    )


@dataclass
class NondegeneracyReport:
    radii: np.ndarray
    ratios: np.ndarray
    c_nd: float
    beta: float

    @property
    def min_ratio(self) -> float:
        return float(self.ratios.min())


def check_nondegeneracy(
    u: SolutionField, x0, radii, params: StructuralParams, lambda0: float
) -> NondegeneracyReport:
    """ratio(r) = sup_{B_r(x0)} u / (C_ND r^beta); stays >= O(1) at points of
    the positivity-set closure."""
    grid = u.grid
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    radii = np.asarray(radii, dtype=float)
    beta = compute_beta(params)
    cnd = compute_cnd(params, lambda0)
    pts = _interior_points(grid)
    vals = u.values[grid.interior]
    sups = _ball_sups(vals, pts, x0, radii, grid, grid.boundary_distance(x0))
    ratios = sups / (cnd * radii**beta)
    return NondegeneracyReport(radii=radii, ratios=ratios, c_nd=cnd, beta=beta)


# --------------------------------------------------------------------------
# measure-theoretic reports


@dataclass
class DensityReport:
    radii: np.ndarray
    theta: np.ndarray
    skipped: list

    @property
    def min_theta(self) -> float:
        return float(self.theta.min()) if self.theta.size else math.nan


def measure_density(u: SolutionField, x0, radii, u_tol: Optional[float] = None) -> DensityReport:
    """theta(r) = positive-node fraction of the ball node count."""
    ps = positivity_set(u, u_tol)
    grid = u.grid
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    pts = _interior_points(grid)
    pos = ps.positive[grid.interior]
    d = np.linalg.norm(pts - x0, axis=1)
    dist = grid.boundary_distance(x0)
    kept, theta, skipped = [], [], []
    for r in np.asarray(radii, dtype=float):
        if r > dist + 1e-12:
            skipped.append(float(r))
            continue
        inside = d <= r * (1.0 + 1e-12)
        n = int(inside.sum())
        if n == 0:
            skipped.append(float(r))
            continue
        kept.append(r)
        theta.append(float(pos[inside].sum()) / n)
    return DensityReport(radii=np.array(kept), theta=np.array(theta), skipped=skipped)


@dataclass
class PorosityReport:
    radii: np.ndarray
    delta_min: np.ndarray  # per radius, min over free-boundary centers
    delta_median: np.ndarray
    n_centers: int

    @property
    def overall_min(self) -> float:
        return float(self.delta_min.min()) if self.delta_min.size else math.nan


def estimate_porosity(
    u: SolutionField,
    radii,
    u_tol: Optional[float] = None,
    max_centers: int = 150,
) -> PorosityReport:
    """For each free-boundary cell and radius, the largest relative radius
    delta such that some ball B_{delta r}(y) fits inside B_r(x) without
    touching the free boundary; y ranges over grid nodes."""
    ps = positivity_set(u, u_tol)
    if not ps.has_free_boundary:
        raise NoFreeBoundary("positivity set has no interface")
    grid = u.grid
    fb = ps.fb_cells
    step = max(1, fb.shape[0] // max_centers)
    centers = fb[::step]
    tree = cKDTree(fb)
    pts = _interior_points(grid)
    pts_tree = cKDTree(pts)
    dist_to_fb = None  # computed lazily per candidate set
    radii = np.asarray(radii, dtype=float)
    dmins, dmeds = [], []
    kept = []
    for r in radii:
        deltas = []
        for x in centers:
            if grid.boundary_distance(x) < r:
                continue
            cand_idx = pts_tree.query_ball_point(x, r)
            if not cand_idx:
                continue
            cand = pts[cand_idx]
            dfb, _ = tree.query(cand)
            room = np.minimum(dfb, r - np.linalg.norm(cand - x, axis=1))
            deltas.append(room.max() / r)
        if deltas:
            kept.append(r)
            deltas = np.array(deltas)
            dmins.append(float(deltas.min()))
            dmeds.append(float(np.median(deltas)))
    return PorosityReport(
        radii=np.array(kept),
        delta_min=np.array(dmins),
        delta_median=np.array(dmeds),
        n_centers=centers.shape[0],
    )


# --------------------------------------------------------------------------
# gradient decay and L2 average


def profile_jet_tables(profile: RadialDeadCore, grid: GridDomain) -> dict:
    """Analytic |grad| and Frobenius Hessian norm of a radial profile on the
    grid nodes; the independent counterpart of the discrete jet tables."""
    pts = grid.points().reshape(-1, grid.dim)
    rho = np.linalg.norm(pts - profile.center, axis=1)
    s = rho - profile.core_radius
    c, b = profile.coefficient, profile.beta
    gnorm = np.where(s > 0, c * b * np.maximum(s, 0.0) ** (b - 1.0), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        fpp = np.where(s > 0, c * b * (b - 1.0) * np.maximum(s, 1e-300) ** (b - 2.0), 0.0)
        tang = np.where(s > 0, gnorm / np.maximum(rho, 1e-300), 0.0)
    if grid.dim == 1:
        hfrob = np.abs(fpp)
    else:
        hfrob = np.sqrt(fpp**2 + (grid.dim - 1) * tang**2)
    return {
        "gnorm": gnorm.reshape(grid.shape),
        "hfrob": hfrob.reshape(grid.shape),
    }


def fit_gradient_decay(
    u: SolutionField,
    x0,
    radii=None,
    params: Optional[StructuralParams] = None,
    jet_tables: Optional[dict] = None,
    u_tol: Optional[float] = None,
) -> FitReport:
    """Slope of log sup_{B_r(x0)} |grad u| against log r; the sharp rate is
    (1+m)/(gamma+1-m) = beta - 1 (gamma > 0)."""
    if params is None:
        if u.problem is None:
            raise ParameterError("fit_gradient_decay needs structural parameters")
        params = u.problem.params
    if not params.gamma > 0:
        raise ParameterError("the sharp gradient decay rate requires gamma > 0")
    ps = positivity_set(u, u_tol)
    x0 = _require_near_free_boundary(u, ps, x0)
    grid = u.grid
    dist = grid.boundary_distance(x0)
    if radii is None:
        radii = default_fit_radii(grid.h, dist)
    radii = np.asarray(radii, dtype=float)
    tables = jet_tables if jet_tables is not None else grid_jet_tables(u.values, grid.h)
    gnorm = tables["gnorm"]
    valid = grid.interior & np.isfinite(gnorm)
    pts = grid.points().reshape(-1, grid.dim)[valid.ravel()]
    vals = gnorm[valid]
    sups = _ball_sups(vals, pts, x0, radii, grid, dist)
    if sups[0] < 10.0 * ps.u_tol:
        raise InsufficientSignal("gradient sup below noise floor at the smallest radius")
    target = compute_beta(params) - 1.0
    slope, intercept, rms = _loglog_fit(radii, sups)
    return FitReport(
        exponent=slope, intercept=intercept, radii=radii, statistics=sups,
        rms_residual=rms, target=target,
    )


@dataclass
class L2AverageReport:
    radii: np.ndarray
    s_values: np.ndarray
    slope: float
    target: float
    m_hat: float
    skipped: list = dc_field(default_factory=list)

    @property
    def bound_ok(self) -> bool:
        """Decay at least as fast as the sharp exponent, 0.1 log-log slack."""
        return self.slope >= self.target - 0.1


def l2_hessian_average(
    u: SolutionField,
    x0,
    radii,
    params: Optional[StructuralParams] = None,
    jet_tables: Optional[dict] = None,
    u_tol: Optional[float] = None,
) -> L2AverageReport:
    """S(r) = sqrt(mean over B_r(x0) of (|grad u|^gamma |D^2 u|_F)^2) and its
    log-log slope against the predicted gamma m/(gamma+1-m) decay."""
    if params is None:
        if u.problem is None:
            raise ParameterError("l2_hessian_average needs structural parameters")
        params = u.problem.params
    if not params.gamma > 0:
        raise ParameterError("the L2-average estimate requires gamma > 0")
    grid = u.grid
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    tables = jet_tables if jet_tables is not None else grid_jet_tables(u.values, grid.h)
    integrand = (tables["gnorm"] ** params.gamma * tables["hfrob"]) ** 2
    valid = grid.interior & np.isfinite(integrand)
    pts = grid.points().reshape(-1, grid.dim)[valid.ravel()]
    vals = integrand[valid]
    d = np.linalg.norm(pts - x0, axis=1)
    dist = grid.boundary_distance(x0)
    kept, s_vals, skipped = [], [], []
    for r in np.asarray(radii, dtype=float):
        if r > dist + 1e-12:
            skipped.append(float(r))
            continue
        inside = d <= r * (1.0 + 1e-12)
        if not inside.any():
            skipped.append(float(r))
            continue
        kept.append(r)
        s_vals.append(math.sqrt(float(vals[inside].mean())))
    kept = np.array(kept)
    s_vals = np.array(s_vals)
    target = params.gamma * params.m / (params.gamma + 1.0 - params.m)
    positive = s_vals > 0
    if positive.sum() >= 2:
        slope, _, _ = _loglog_fit(kept[positive], s_vals[positive])
    else:
        slope = math.inf  # identically zero decays faster than any rate
    m_hat = s_vals[-1] / kept[-1] ** target if kept.size else math.nan
    return L2AverageReport(
        radii=kept, s_values=s_vals, slope=slope, target=target, m_hat=m_hat,
        skipped=skipped,
    )


# --------------------------------------------------------------------------
# distance bounds


@dataclass
class DistanceBoundsReport:
    c_sharp: float  # max u / dist^beta  (upper comparability constant)
    c_star: float  # min u / dist^beta  (lower comparability constant)
    n_nodes: int
    beta: float

    @property
    def spread(self) -> float:
        return self.c_sharp / self.c_star


def distance_bounds(
    u: SolutionField,
    params: Optional[StructuralParams] = None,
    lambda0: float = 1.0,
    u_tol: Optional[float] = None,
    min_dist_factor: float = 4.0,
) -> DistanceBoundsReport:
    """u(x) / dist(x, free boundary)^beta over positive nodes with distance
    at least min_dist_factor * h; both extremes must be positive and finite
    for the two-sided comparability the theory predicts."""
    if params is None:
        if u.problem is None:
            raise ParameterError("distance_bounds needs structural parameters")
        params = u.problem.params
    ps = positivity_set(u, u_tol)
    if not ps.has_free_boundary:
        raise NoFreeBoundary("positivity set has no interface")
    grid = u.grid
    beta = compute_beta(params)
    tree = cKDTree(ps.fb_cells)
    pts = grid.points().reshape(-1, grid.dim)[ps.positive.ravel()]
    vals = u.values[ps.positive]
    rho, _ = tree.query(pts)
    keep = rho >= min_dist_factor * grid.h
    if not keep.any():
        raise DomainTooCoarse(
            f"no positive node sits {min_dist_factor} h away from the free boundary"
        )
    ratios = vals[keep] / rho[keep] ** beta
    return DistanceBoundsReport(
        c_sharp=float(ratios.max()),
        c_star=float(ratios.min()),
        n_nodes=int(keep.sum()),
        beta=beta,
    )
