"""Grid Dirichlet solver for the dead-core equation and its companions.

The workhorse is a pointwise-regularized finite-difference relaxation: each
sweep visits the nodes in red-black order and applies a damped (or
over-relaxed) Newton step of the local nine-point equation

    F(u) = w^gamma * [ sum_k (1 + (p-2) ghat_k^2) d_kk u
                       + 2 (p-2) ghat_x ghat_y d_xy u ] - a(x) (u_+)^m

with w = sqrt(|grad u|^2 + eps_g^2) and ghat the regularized direction.  For
gamma < 0 the sweep solves the equivalent rewritten form
Lap_p^N u = a (u_+)^m w^(-gamma), which keeps the right-hand side bounded
near the free boundary.  The dead-core solve starts from the p-harmonic
upper bracket and truncates negatives each sweep.

With the nine-point stencil the two diagonal neighbors share the center's
checkerboard color, so the mixed-derivative contribution of same-color nodes
is treated Jacobi-style within a half-sweep; the orthogonal (dominant)
couplings are fully Gauss-Seidel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Callable, Optional

import numpy as np
from scipy import ndimage

from .errors import ConvergenceError, ParameterError, UnsupportedGameRange
from .grid import GridDomain, SolutionField, SolveReport, SolverConfig
from .params import (
    ProblemSpec,
    StructuralParams,
    ThieleSpec,
    compute_cnd,
    compute_game_weights,
)

__all__ = [
    "solve_p_harmonic",
    "solve_dirichlet",
    "dpp_iterate",
    "comparison_check",
    "ComparisonReport",
    "rescale",
    "scale_thiele",
    "flatness_experiment",
    "FlatnessReport",
    "discrete_residual_field",
]


# --------------------------------------------------------------------------
# relaxation kernel


def _color_masks(grid: GridDomain):
    """Interior-and-color masks restricted to the center block."""
    inter = grid.interior
    if grid.dim == 1:
        idx = np.arange(grid.shape[0])
        center = inter[1:-1]
        parity = (idx[1:-1]) % 2
        return [center & (parity == 0), center & (parity == 1)]
    ii, jj = np.meshgrid(
        np.arange(grid.shape[0]), np.arange(grid.shape[1]), indexing="ij"
    )
    parity = (ii + jj)[1:-1, 1:-1] % 2
    center = inter[1:-1, 1:-1]
    return [center & (parity == 0), center & (parity == 1)]


def _local_terms_2d(v, h, p, eps2, gamma, a_c, rhs, m, projected=False, floor=1e-8):
    C = v[1:-1, 1:-1]
    E, W = v[2:, 1:-1], v[:-2, 1:-1]
    N, S = v[1:-1, 2:], v[1:-1, :-2]
    NE, SW = v[2:, 2:], v[:-2, :-2]
    SE, NW = v[2:, :-2], v[:-2, 2:]
    gx = (E - W) / (2.0 * h)
    gy = (N - S) / (2.0 * h)
    g2 = gx * gx + gy * gy + eps2
    pm2 = p - 2.0
    axx = 1.0 + pm2 * gx * gx / g2
    ayy = 1.0 + pm2 * gy * gy / g2
    axy = pm2 * gx * gy / g2
    h2 = h * h
    lap = (
        axx * (E - 2.0 * C + W) / h2
        + ayy * (N - 2.0 * C + S) / h2
        + 2.0 * axy * (NE + SW - SE - NW) / (4.0 * h2)
    )
    ddiag = (2.0 / h2) * (axx + ayy)
    source, dabs = _absorption_terms(C, a_c, rhs, m, projected, floor)
    return C, g2, lap, ddiag, source, dabs


def _local_terms_1d(v, h, p, eps2, gamma, a_c, rhs, m, projected=False, floor=1e-8):
    C = v[1:-1]
    E, W = v[2:], v[:-2]
    gx = (E - W) / (2.0 * h)
    g2 = gx * gx + eps2
    axx = 1.0 + (p - 2.0) * gx * gx / g2
    lap = axx * (E - 2.0 * C + W) / (h * h)
    ddiag = (2.0 / (h * h)) * axx
    source, dabs = _absorption_terms(C, a_c, rhs, m, projected, floor)
    return C, g2, lap, ddiag, source, dabs


def _absorption_terms(C, a_c, rhs, m, projected=False, floor=1e-8):
    """Source term and a stabilizing local slope for the sweep.

    projected=True is the sweep convention.  For m = 0 it keeps the
    absorption switched on regardless of the current sign (projected
    Gauss-Seidel for the obstacle-type complementarity: the clamp, not the
    indicator, decides the contact set -- the indicator form makes contact
    nodes toggle forever).  For 0 < m < 1 the slope is the floored secant
    a * max(C, floor)^(m-1), not the tangent m a C^(m-1): the secant
    dominates the tangent, so a step from above can never cross zero and
    the infinite-derivative limit cycle at the free boundary disappears.

    projected=False is the diagnostic convention of the continuous model,
    (u_+)^0 = indicator of {u > 0}.
    """
    if a_c is None:
        zero = np.zeros_like(C)
        return (zero + rhs if rhs else zero), zero
    Cpos = np.maximum(C, 0.0)
    if m == 0.0:
        if projected:
            source = a_c if np.ndim(a_c) else np.full_like(C, a_c)
        else:
            source = np.where(C > 0.0, a_c, 0.0)
        dabs = np.zeros_like(C)
    elif m == 1.0:
        source = a_c * Cpos
        dabs = np.where(C > 0.0, a_c, 0.0) if not projected else a_c * np.ones_like(C)
    elif m > 1.0:
        source = a_c * Cpos**m
        dabs = m * a_c * Cpos ** (m - 1.0)
    else:
        source = a_c * Cpos**m
        if projected:
            dabs = a_c * np.maximum(C, floor) ** (m - 1.0)
        else:
            Csafe = np.where(C > 0.0, C, 1.0)
            dabs = np.where(C > 0.0, m * a_c * Csafe ** (m - 1.0), 0.0)
    if rhs:
        source = source + rhs
    return source, dabs


def _residual_and_diag(
    v, grid, p, gamma, eps2, a_c, rhs, m, rewritten=None, projected=False,
    floor=1e-8,
):
    """Local residual and Newton diagonal of the sweep equation.

    natural form:   w^gamma * Lap_p^N u - source
    rewritten form: Lap_p^N u - source * w^(-gamma)

    The two forms are row-scalings of each other, so the Newton step F/D and
    hence the sweep iterates are identical; they differ in the reported
    residual.  gamma < 0 defaults to the rewritten form, whose terms stay
    finite when the gradient degenerates (w^gamma would overflow).
    """
    terms = (_local_terms_1d if grid.dim == 1 else _local_terms_2d)(
        v, grid.h, p, eps2, gamma, a_c, rhs, m, projected, floor
    )
    C, g2, lap, ddiag, source, dabs = terms
    if rewritten is None:
        rewritten = gamma < 0.0
    if gamma == 0.0:
        return C, lap - source, ddiag + dabs
    if rewritten:
        winv = g2 ** (-0.5 * gamma)  # w^(-gamma), any sign of gamma
        return C, lap - source * winv, ddiag + dabs * winv
    wgam = g2 ** (0.5 * gamma)
    return C, wgam * lap - source, wgam * ddiag + dabs


def _relax(
    grid: GridDomain,
    values: np.ndarray,
    p: float,
    gamma: float,
    m: float,
    a_vals: Optional[np.ndarray],
    rhs_const: float,
    config: SolverConfig,
    truncate: bool,
    rewritten: Optional[bool] = None,
) -> SolveReport:
    eps_g = config.eps_g if config.eps_g is not None else grid.h**2
    eps2 = eps_g * eps_g
    masks = _color_masks(grid)
    center = (slice(1, -1),) * grid.dim
    a_c = None if a_vals is None else a_vals[center]
    report = SolveReport(tol=config.tol, u_tol=config.u_tol, scheme="fd_relax")
    it = 0
    maxdelta = math.inf
    floor = max(config.tol, 1e-10)
    factor = config.relax
    tail = config.tail_factor()
    warm_tol = 1e4 * config.tol
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        while it < config.max_iter:
            it += 1
            maxdelta = 0.0
            for mask in masks:
                C, F, D = _residual_and_diag(
                    values, grid, p, gamma, eps2, a_c, rhs_const, m, rewritten,
                    projected=True, floor=floor,
                )
                new = C + factor * F / D
                if truncate:
                    np.maximum(new, 0.0, out=new)
                if mask.any():
                    delta = float(np.abs(new[mask] - C[mask]).max())
                    if not math.isfinite(delta):
                        raise ConvergenceError(
                            f"relaxation diverged at sweep {it} (relax={factor})"
                        )
                    maxdelta = max(maxdelta, delta)
                    C[mask] = new[mask]
            if maxdelta < config.tol:
                break
            if maxdelta < warm_tol:
                factor = tail
    # exit residual in the diagnostic (indicator) convention, on the
    # inactive set {u > u_tol}: contact nodes satisfy the complementarity
    # sign condition rather than the equation itself
    C, F, _ = _residual_and_diag(
        values, grid, p, gamma, eps2, a_c, rhs_const, m, rewritten,
        projected=False,
    )
    inter_center = grid.interior[center]
    inactive = inter_center & ((C > config.u_tol) | (not truncate))
    report.iterations = it
    report.max_update = maxdelta
    report.residual_norm = float(np.abs(F[inactive]).max()) if inactive.any() else 0.0
    report.converged = maxdelta < config.tol
    return report


def discrete_residual_field(
    field: SolutionField,
    params: StructuralParams,
    thiele: Optional[ThieleSpec] = None,
    rhs_const: float = 0.0,
    eps_g: Optional[float] = None,
) -> np.ndarray:
    """Residual of the solved form on interior nodes (NaN elsewhere).

    For gamma >= 0 this is |grad u|^gamma Lap_p^N u - a (u_+)^m - rhs; for
    gamma < 0 the rewritten bounded form Lap_p^N u - (a (u_+)^m + rhs) w^(-gamma).
    """
    grid = field.grid
    eps = eps_g if eps_g is not None else grid.h**2
    a_vals = None if thiele is None else grid.sample(thiele)
    center = (slice(1, -1),) * grid.dim
    a_c = None if a_vals is None else a_vals[center]
    _, F, _ = _residual_and_diag(
        field.values, grid, params.p, params.gamma, eps * eps, a_c, rhs_const, params.m
    )
    out = np.full(grid.shape, np.nan)
    inter = grid.interior[center]
    block = out[center]
    block[inter] = F[inter]
    return out


# --------------------------------------------------------------------------
# nested initial guess (coarse-to-fine start for the bracket solves)


def _coarse_grid(grid: GridDomain) -> Optional[GridDomain]:
    h2 = 2.0 * grid.h
    for d in range(grid.dim):
        steps = (grid.hi[d] - grid.lo[d]) / h2
        if abs(steps - round(steps)) > 1e-9 or round(steps) < 4:
            return None
    pad = max(1, grid.pad // 2) if grid.kind == "ball" else grid.pad
    if grid.kind == "ball":
        return GridDomain.ball(grid.ball_radius, h2, center=grid.ball_center, pad=pad)
    return GridDomain.box(grid.lo, grid.hi, h2, pad=pad)


def _prolong(coarse: GridDomain, cvals: np.ndarray, fine: GridDomain) -> np.ndarray:
    pts = fine.points().reshape(-1, fine.dim)
    coords = [
        (pts[:, d] - coarse.axes[d][0]) / coarse.h for d in range(fine.dim)
    ]
    out = ndimage.map_coordinates(cvals, np.array(coords), order=1, mode="nearest")
    return out.reshape(fine.shape)


def _solve_plain(
    grid: GridDomain,
    gfn: Callable,
    p: float,
    gamma: float,
    m: float,
    a_vals: Optional[np.ndarray],
    rhs_const: float,
    config: SolverConfig,
    truncate: bool,
    init: Optional[np.ndarray] = None,
    nested: bool = False,
    rewritten: Optional[bool] = None,
) -> SolutionField:
    def fresh() -> np.ndarray:
        values = grid.sample(gfn)
        if init is not None:
            values[grid.interior] = init[grid.interior]
        elif nested and config.nested_init:
            # coarse-to-fine start; only ever used by the absorption-free
            # bracket solves, so a_vals is not propagated
            coarse = _coarse_grid(grid)
            if coarse is not None:
                sub = _solve_plain(
                    coarse, gfn, p, gamma, m, None, rhs_const, config, truncate,
                    nested=True, rewritten=rewritten,
                )
                values[grid.interior] = _prolong(coarse, sub.values, grid)[
                    grid.interior
                ]
        return values

    values = fresh()
    try:
        report = _relax(
            grid, values, p, gamma, m, a_vals, rhs_const, config, truncate, rewritten
        )
    except ConvergenceError:
        conservative = replace(config, relax=0.8, relax_tail=None)
        values = fresh()
        report = _relax(
            grid, values, p, gamma, m, a_vals, rhs_const, conservative, truncate,
            rewritten,
        )
    return SolutionField(grid, values, report)


def solve_p_harmonic(
    grid: GridDomain, g: Callable, p: float, config: Optional[SolverConfig] = None
) -> SolutionField:
    """Dirichlet solve of Lap_p^N u = 0; the upper Perron bracket."""
    if not p > 1:
        raise ParameterError(f"p must exceed 1, got {p}")
    config = config or SolverConfig()
    return _solve_plain(
        grid, g, p, 0.0, 0.0, None, 0.0, config, truncate=False, nested=True
    )


def _solve_lower_bracket(
    grid: GridDomain, g: Callable, problem: ProblemSpec, config: SolverConfig
) -> SolutionField:
    """|grad u|^gamma Lap_p^N u = Lambda0 ||g||_inf^m with the same data:
    the subsolution end of the Perron bracket."""
    gvals = grid.sample(g)
    sup_g = float(np.abs(gvals).max())
    lam = problem.thiele.Lambda0
    if not math.isfinite(lam):
        lam = 1.0
    rhs = lam * sup_g**problem.params.m if sup_g > 0 else 0.0
    return _solve_plain(
        grid, g, problem.params.p, problem.params.gamma, problem.params.m,
        None, rhs, config, truncate=False, nested=True, rewritten=True,
    )


def solve_dirichlet(
    problem: ProblemSpec,
    grid: GridDomain,
    config: Optional[SolverConfig] = None,
    g: Optional[Callable] = None,
    brackets: bool = None,
) -> SolutionField:
    """Damped red-black relaxation of the dead-core equation.

    Starts from the p-harmonic upper bracket, truncates negatives every
    sweep, and (by default) records how badly the result violates the
    Perron bracket [u_flat, u_sharp].
    """
    config = config or SolverConfig()
    params = problem.params
    gfn = g if g is not None else problem.g
    if gfn is None:
        raise ParameterError("no boundary data on the problem or the call")
    gvals = grid.sample(gfn)
    if gvals[~grid.interior].min() < -1e-12:
        raise ParameterError("boundary data must be non-negative")
    check = config.check_bracket if brackets is None else brackets

    upper = solve_p_harmonic(grid, gfn, params.p, config)
    a_vals = grid.sample(problem.thiele)
    values = gvals.copy()
    values[grid.interior] = upper.values[grid.interior]
    try:
        report = _relax(
            grid, values, params.p, params.gamma, params.m, a_vals, 0.0, config,
            truncate=True,
        )
    except ConvergenceError:
        conservative = replace(config, relax=0.8, relax_tail=None)
        values = gvals.copy()
        values[grid.interior] = upper.values[grid.interior]
        report = _relax(
            grid, values, params.p, params.gamma, params.m, a_vals, 0.0,
            conservative, truncate=True,
        )

    if check:
        # the lower bracket is a slack diagnostic bound (it dips far below
        # the truncated solution); on large grids solve it one level coarser
        # and prolong, widening its tolerance by an interpolation margin
        coarse = _coarse_grid(grid) if grid.interior.sum() > 20_000 else None
        sup_g = float(np.abs(gvals).max())
        if coarse is not None:
            lower_c = _solve_lower_bracket(coarse, gfn, problem, config)
            lower_vals = _prolong(coarse, lower_c.values, grid)
            vtol_low = config.u_tol + 64.0 * grid.h**2 * (1.0 + sup_g)
        else:
            lower_vals = _solve_lower_bracket(grid, gfn, problem, config).values
            vtol_low = config.u_tol
        vtol = config.u_tol
        over = values - upper.values
        under = lower_vals - values
        viol = np.zeros(grid.shape, dtype=bool)
        viol[grid.interior] = (over[grid.interior] > vtol) | (
            under[grid.interior] > vtol_low
        )
        report.bracket_violations = int(viol.sum())
        worst = max(
            float(over[grid.interior].max(initial=-math.inf)),
            float(under[grid.interior].max(initial=-math.inf)),
        )
        report.bracket_max_violation = max(worst, 0.0)
    return SolutionField(grid, values, report, problem=problem)


# --------------------------------------------------------------------------
# dynamic programming iteration (tug-of-war value recursion)


def ball_offsets(dim: int, h: float, eps: float) -> np.ndarray:
    """Lattice offsets within the closed eps-ball, lexicographic order."""
    k = int(math.floor(eps / h + 1e-9))
    rng = range(-k, k + 1)
    lim = (eps / h) ** 2 + 1e-9
    if dim == 1:
        offs = [(d,) for d in rng if d * d <= lim]
    else:
        offs = [(di, dj) for di in rng for dj in rng if di * di + dj * dj <= lim]
    return np.array(offs, dtype=int)


def _gather_table(grid: GridDomain, offsets: np.ndarray):
    """Flat indices of every offset node for every interior node."""
    if offsets.shape[1] != grid.dim:
        raise ParameterError("offset dimension mismatch")
    kmax = int(np.abs(offsets).max())
    if kmax > grid.pad:
        raise ParameterError(
            f"eps-ball needs pad >= {kmax} node layers, grid has {grid.pad}"
        )
    if grid.dim == 1:
        (ix,) = np.nonzero(grid.interior)
        flat = ix[:, None] + offsets[:, 0][None, :]
    else:
        ix, iy = np.nonzero(grid.interior)
        ny = grid.shape[1]
        flat = (ix[:, None] + offsets[None, :, 0]) * ny + (
            iy[:, None] + offsets[None, :, 1]
        )
    return flat


def dpp_iterate(
    grid: GridDomain,
    g: Callable,
    p: float,
    eps_dpp: Optional[float] = None,
    config: Optional[SolverConfig] = None,
) -> SolutionField:
    """Fixed point of the tug-of-war-with-noise value recursion

        u(x) = (alpha0/2) [max_{B_eps} u + min_{B_eps} u] + beta0 mean_{B_eps} u

    with ball statistics over grid nodes and u = g on the data strip."""
    config = config or SolverConfig(scheme="dpp_iter")
    if eps_dpp is None:
        eps_dpp = config.eps_dpp
    if eps_dpp is None:
        raise ParameterError("dpp_iterate needs eps_dpp (argument or config)")
    if p < 2:
        raise UnsupportedGameRange(f"DPP weights need p >= 2, got {p}")
    if eps_dpp < 2.0 * grid.h - 1e-12:
        raise ParameterError("eps_dpp must be at least 2h")
    alpha0, beta0 = compute_game_weights(
        StructuralParams(n=grid.dim, p=p, gamma=0.0, m=0.0)
    )
    offsets = ball_offsets(grid.dim, grid.h, eps_dpp)
    gather = _gather_table(grid, offsets)
    values = grid.sample(g)
    flat = values.ravel()
    inter_flat = np.nonzero(grid.interior.ravel())[0]
    report = SolveReport(tol=config.tol, u_tol=config.u_tol, scheme="dpp_iter")
    it = 0
    maxdelta = math.inf
    while it < config.max_iter:
        it += 1
        nb = flat[gather]
        new = (alpha0 / 2.0) * (nb.max(axis=1) + nb.min(axis=1)) + beta0 * nb.mean(
            axis=1
        )
        maxdelta = float(np.abs(new - flat[inter_flat]).max())
        flat[inter_flat] = new
        if maxdelta < config.tol:
            break
    report.iterations = it
    report.max_update = maxdelta
    report.converged = maxdelta < config.tol
    report.residual_norm = maxdelta
    return SolutionField(grid, values, report)


# --------------------------------------------------------------------------
# comparison, rescaling, flatness


@dataclass
class ComparisonReport:
    ok: bool
    max_violation: float
    n_violations: int
    boundary_ok: bool
    violations: list = dc_field(default_factory=list)
    ordering_violations: int = -1  # -1 = hypothesis not evaluated

    def __bool__(self):
        return self.ok


def comparison_check(
    u_sub: SolutionField,
    u_super: SolutionField,
    ctol: Optional[float] = None,
    problem: Optional[ProblemSpec] = None,
    max_listed: int = 20,
) -> ComparisonReport:
    """u_sub <= u_super + ctol at interior nodes; the discrete form of the
    comparison principle.  When a problem is supplied, the operator-ordering
    hypothesis (residual of u_sub >= residual of u_super) is evaluated
    node-wise and reported."""
    u_sub.require_same_grid(u_super)
    grid = u_sub.grid
    if ctol is None:
        ctol = 10.0 * max(u_sub.report.tol, u_super.report.tol)
    diff = u_sub.values - u_super.values
    boundary_ok = bool(diff[~grid.interior].max(initial=-math.inf) <= ctol)
    bad = np.zeros(grid.shape, dtype=bool)
    bad[grid.interior] = diff[grid.interior] > ctol
    idxs = np.argwhere(bad)[:max_listed]
    ordering = -1
    if problem is not None:
        r_sub = discrete_residual_field(u_sub, problem.params, problem.thiele)
        r_sup = discrete_residual_field(u_super, problem.params, problem.thiele)
        with np.errstate(invalid="ignore"):
            ordering = int(
                np.nansum((r_sub - r_sup) < -1e-8 * (1.0 + np.abs(r_sup)))
            )
    return ComparisonReport(
        ok=not bad.any(),
        max_violation=float(diff[grid.interior].max(initial=0.0)),
        n_violations=int(bad.sum()),
        boundary_ok=boundary_ok,
        violations=[tuple(i) for i in idxs],
        ordering_violations=ordering,
    )


def scale_thiele(
    thiele: ThieleSpec, rho: float, kappa: float, params: StructuralParams
) -> ThieleSpec:
    """Modulus of the rescaled solution v(x) = u(rho x)/kappa:
    a'(x) = rho^(2+gamma) / kappa^(gamma+1-m) * a(rho x)."""
    scale = rho ** (2.0 + params.gamma) / kappa ** (params.gamma + 1.0 - params.m)
    if thiele.variant == "constant":
        return ThieleSpec.constant(scale * thiele.lambda0)
    if thiele.variant == "henon":
        return ThieleSpec.henon(
            points=thiele.points / rho,
            alpha=thiele.alpha,
            weight=scale * thiele.weight * rho**thiele.alpha,
        )
    inner = thiele  # capture

    def fn(pts):
        return scale * np.asarray(inner(np.asarray(pts) * rho))

    return ThieleSpec.bounded_field(
        fn, lambda0=scale * thiele.lambda0, Lambda0=scale * thiele.Lambda0
    )


def rescale(
    u: SolutionField,
    rho: float,
    kappa: float,
    params: Optional[StructuralParams] = None,
    thiele: Optional[ThieleSpec] = None,
) -> tuple[SolutionField, ThieleSpec]:
    """v(x) = u(rho x)/kappa with the transformed modulus.

    The node lattice is relabeled (x -> x/rho, spacing h/rho): node i of the
    output carries exactly values[i]/kappa, so discrete derivatives obey the
    chain rule exactly and the discrete residual of v against the scaled
    modulus is the scaled pulled-back residual of u, up to the gradient
    regularization floor.  No interpolation happens (interpolated pullbacks
    corrupt discrete second differences)."""
    if not 0.0 < rho <= 1.0:
        raise ParameterError("rho must lie in (0, 1]")
    if not kappa > 0:
        raise ParameterError("kappa must be positive")
    if params is None:
        if u.problem is None:
            raise ParameterError("rescale needs structural parameters")
        params = u.problem.params
    if thiele is None:
        thiele = u.problem.thiele if u.problem is not None else None
    grid = u.grid
    if rho == 1.0:
        new_grid = grid
    elif grid.kind == "ball":
        new_grid = GridDomain.ball(
            grid.ball_radius / rho, grid.h / rho,
            center=grid.ball_center / rho, pad=grid.pad, dim=grid.dim,
        )
    else:
        new_grid = GridDomain.box(grid.lo / rho, grid.hi / rho, grid.h / rho, pad=grid.pad)
    vals = u.values / kappa
    new_thiele = None if thiele is None else scale_thiele(thiele, rho, kappa, params)
    rep = SolveReport(
        iterations=0, max_update=0.0, residual_norm=math.nan, converged=True,
        tol=u.report.tol, u_tol=u.report.u_tol, scheme=u.report.scheme,
    )
    new_problem = None
    if new_thiele is not None:
        new_problem = ProblemSpec(params, new_thiele)
    out = SolutionField(new_grid, vals, rep, problem=new_problem)
    return out, new_thiele


@dataclass
class FlatnessReport:
    zeta: float
    sup_half: float
    field: SolutionField


def flatness_experiment(
    zeta: float,
    problem: ProblemSpec,
    grid: GridDomain,
    config: Optional[SolverConfig] = None,
) -> FlatnessReport:
    """Solve with modulus zeta^2 a(x) and boundary data from the radial
    profile of that weakened modulus (dead core = {0}, so u(0) = 0 and
    sup u <= 1 for desk-scale coefficients); report sup over B_1/2.

    The family shrinks to zero with zeta, which is the measurable form of
    the flatness estimate."""
    if zeta < 0:
        raise ParameterError("zeta must be >= 0")
    params = problem.params
    config = config or SolverConfig()
    center = grid.ball_center if grid.kind == "ball" else 0.5 * (grid.lo + grid.hi)
    if zeta == 0.0:
        gfn = lambda pts: np.zeros(np.atleast_2d(pts).shape[0])
        th = ThieleSpec.constant(1e-300)  # absorption disappears with the data
    else:
        lam = zeta**2 * problem.thiele.lambda0
        coeff = compute_cnd(params, lam)
        beta = problem.beta

        def gfn(pts):
            pts = np.atleast_2d(pts)
            return coeff * np.linalg.norm(pts - center, axis=1) ** beta

        if problem.thiele.variant == "constant":
            th = ThieleSpec.constant(lam)
        else:
            base = problem.thiele
            z2 = zeta**2
            th = ThieleSpec.bounded_field(
                lambda pts: z2 * np.asarray(base(pts)),
                lambda0=z2 * base.lambda0,
                Lambda0=z2 * base.Lambda0,
            )
    sub = ProblemSpec(params, th, g=gfn)
    fld = solve_dirichlet(sub, grid, config)
    pts = grid.points().reshape(-1, grid.dim)
    half = (np.linalg.norm(pts - center, axis=1) <= 0.5).reshape(grid.shape)
    sel = half & grid.interior
    sup_half = float(fld.values[sel].max()) if sel.any() else 0.0
    return FlatnessReport(zeta=zeta, sup_half=sup_half, field=fld)
