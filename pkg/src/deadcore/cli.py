"""Batch front-end: config-driven experiment pipelines writing CSV + manifest.

Subcommands: radial | solve | analyze | game | liouville | sweep.
Exit codes: 0 success, 2 config/validation error, 3 numerical non-convergence
(or a Monte Carlo mean that misses its statistical tolerance).

Every run writes a manifest.json echoing the full config, seed, thread
count, package versions and wall time.  CSV columns are written with 17
significant digits and no locale dependence, so re-running a command with
the same config reproduces every numeric column bit-for-bit.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
import time
from itertools import product
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .errors import (
    ConfigError,
    ConvergenceError,
    CriticalRegime,
    DeadcoreError,
    GameValueMismatch,
    NoFreeBoundary,
    NotApplicable,
    ParameterError,
)
from .game import GameConfig, run_game
from .geometry import (
    check_nondegeneracy,
    default_fit_radii,
    distance_bounds,
    estimate_porosity,
    fit_gradient_decay,
    fit_growth_exponent,
    l2_hessian_average,
    measure_density,
    positivity_set,
    profile_jet_tables,
)
from .grid import GridDomain, SolutionField, SolveReport, SolverConfig
from .operators import pde_residual
from .params import (
    ProblemSpec,
    StructuralParams,
    ThieleSpec,
    compute_beta,
    compute_cnd,
    henon_exponent,
)
from .radial import RadialDeadCore, henon_radial_profile, liouville_supersolution_eval
from .solver import dpp_iterate, solve_dirichlet

__all__ = ["main"]


# --------------------------------------------------------------------------
# plumbing


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _write_manifest(outdir: Path, command: str, cfg: ExperimentConfig, seed: int,
                    threads: int, wall: float, outputs, extra: dict):
    manifest = {
        "command": command,
        "config": cfg.sections,
        "seed": seed,
        "threads": threads,
        "versions": {
            "deadcore": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "wall_time_s": wall,
        "outputs": [str(Path(p).name) for p in outputs],
        **extra,
    }
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, default=float) + "\n")
    return manifest


def _solver_config(cfg: ExperimentConfig) -> SolverConfig:
    sec = "solver"
    relax_tail = None
    if cfg.has(sec, "relax_tail"):
        relax_tail = cfg.get_float(sec, "relax_tail")
    eps_g = cfg.get_float(sec, "eps_g") if cfg.has(sec, "eps_g") else None
    return SolverConfig(
        eps_g=eps_g,
        relax=cfg.get_float(sec, "relax", 0.8) if cfg.has(sec) else 0.8,
        relax_tail=relax_tail,
        tol=cfg.get_float(sec, "tol", 1e-8) if cfg.has(sec) else 1e-8,
        max_iter=cfg.get_int(sec, "max_iter", 200_000) if cfg.has(sec) else 200_000,
        check_bracket=cfg.get_bool(sec, "check_bracket", "true") if cfg.has(sec) else True,
    )


def _structural_params(cfg: ExperimentConfig, section: str = "problem") -> StructuralParams:
    return StructuralParams(
        n=cfg.get_int(section, "n"),
        p=cfg.get_float(section, "p"),
        gamma=cfg.get_float(section, "gamma"),
        m=cfg.get_float(section, "m"),
    )


def _thiele(cfg: ExperimentConfig) -> ThieleSpec:
    variant = cfg.get("thiele", "variant", "constant")
    if variant == "constant":
        return ThieleSpec.constant(cfg.get_float("thiele", "lambda0", 1.0))
    if variant == "henon":
        return ThieleSpec.henon(
            points=cfg.get_points("thiele", "points"),
            alpha=cfg.get_float("thiele", "alpha"),
            weight=cfg.get_float("thiele", "weight", 1.0),
        )
    raise ConfigError(f"unsupported thiele variant {variant!r} in configs")


def _grid(cfg: ExperimentConfig, dim: int) -> GridDomain:
    kind = cfg.get("grid", "kind", "box")
    h = cfg.get_float("grid", "h")
    pad = cfg.get_int("grid", "pad", 0)
    if kind == "box":
        lo = cfg.get_floats("grid", "lo", ", ".join(["-1"] * dim))
        hi = cfg.get_floats("grid", "hi", ", ".join(["1"] * dim))
        if len(lo) != dim or len(hi) != dim:
            raise ConfigError("grid bounds dimension mismatch")
        return GridDomain.box(lo, hi, h, pad=pad)
    if kind == "ball":
        radius = cfg.get_float("grid", "radius", 1.0)
        center = cfg.get_floats("grid", "center", ", ".join(["0"] * dim))
        return GridDomain.ball(radius, h, center=center, pad=max(pad, 1), dim=dim)
    raise ConfigError(f"unknown grid kind {kind!r}")


def _boundary(cfg: ExperimentConfig, params: StructuralParams, thiele: ThieleSpec):
    """Boundary data callable plus the exact profile when one exists."""
    kind = cfg.get("boundary", "kind", "radial_profile")
    if kind == "zero":
        return (lambda pts: np.zeros(len(np.atleast_2d(pts)))), None
    if kind == "constant":
        value = cfg.get_float("boundary", "value")
        if value < 0:
            raise ConfigError("boundary value must be non-negative")
        return (lambda pts: np.full(len(np.atleast_2d(pts)), value)), None
    if kind == "radial_profile":
        core = cfg.get_float("boundary", "core_radius", 0.0)
        center = cfg.get_floats("boundary", "center", ", ".join(["0"] * params.n))
        lam = thiele.lambda0 if thiele.variant == "constant" else cfg.get_float(
            "boundary", "lambda0", 1.0
        )
        prof = RadialDeadCore(params, center=center, core_radius=core, lambda0=lam)
        return prof.values, prof
    if kind == "henon_profile":
        if thiele.variant != "henon":
            raise ConfigError("henon_profile data needs the henon thiele variant")
        center = thiele.points[0]
        prof = henon_radial_profile(
            params, thiele.alpha, center=center, weight=thiele.weight
        )
        return prof.values, prof
    raise ConfigError(f"unknown boundary kind {kind!r}")


def _snapshot_field(outdir: Path, fld: SolutionField):
    grid = fld.grid
    pts = grid.points().reshape(-1, grid.dim)
    inter = grid.interior.ravel().astype(int)
    vals = fld.values.ravel()
    if grid.dim == 1:
        header = ["x", "u", "interior"]
        rows = zip(pts[:, 0], vals, inter)
    else:
        header = ["x", "y", "u", "interior"]
        rows = zip(pts[:, 0], pts[:, 1], vals, inter)
    return write_csv(outdir / "solution.csv", header, rows)


def _grid_manifest(grid: GridDomain) -> dict:
    out = {
        "kind": grid.kind,
        "dim": grid.dim,
        "lo": list(grid.lo),
        "hi": list(grid.hi),
        "h": grid.h,
        "pad": grid.pad,
    }
    if grid.kind == "ball":
        out["radius"] = grid.ball_radius
        out["center"] = list(grid.ball_center)
    return out


def _load_snapshot(snapshot_dir: Path) -> SolutionField:
    mpath = Path(snapshot_dir) / "manifest.json"
    cpath = Path(snapshot_dir) / "solution.csv"
    if not mpath.exists() or not cpath.exists():
        raise ConfigError(f"snapshot {snapshot_dir} needs solution.csv and manifest.json")
    manifest = json.loads(mpath.read_text())
    g = manifest["grid"]
    if g["kind"] == "ball":
        grid = GridDomain.ball(
            g["radius"], g["h"], center=g["center"], pad=g["pad"], dim=g["dim"]
        )
    else:
        grid = GridDomain.box(g["lo"], g["hi"], g["h"], pad=g["pad"])
    data = np.loadtxt(cpath, delimiter=",", skiprows=1)
    vals = data[:, grid.dim].reshape(grid.shape)
    rep_d = manifest.get("report", {})
    rep = SolveReport(
        iterations=int(rep_d.get("iterations", 0)),
        max_update=float(rep_d.get("max_update", 0.0)),
        residual_norm=float(rep_d.get("residual_norm", math.nan)),
        converged=bool(rep_d.get("converged", True)),
        tol=float(rep_d.get("tol", 1e-8)),
        u_tol=float(rep_d.get("u_tol", 1e-7)),
    )
    problem = None
    if "problem" in manifest:
        pr = manifest["problem"]
        params = StructuralParams(
            n=int(pr["n"]), p=pr["p"], gamma=pr["gamma"], m=pr["m"]
        )
        th = manifest.get("thiele", {"variant": "constant", "lambda0": 1.0})
        if th["variant"] == "constant":
            thiele = ThieleSpec.constant(th["lambda0"])
        elif th["variant"] == "henon":
            thiele = ThieleSpec.henon(
                points=np.asarray(th["points"]), alpha=th["alpha"], weight=th["weight"]
            )
        else:
            thiele = ThieleSpec.constant(1.0)
        problem = ProblemSpec(params, thiele)
    return SolutionField(grid, vals, rep, problem=problem)


# --------------------------------------------------------------------------
# subcommands


def cmd_radial(cfg: ExperimentConfig, outdir: Path, seed: int, threads: int):
    sec = "radial"
    ns = [int(v) for v in cfg.get_floats(sec, "n", "1, 2")]
    ps = cfg.get_floats(sec, "p", "1.5, 2, 3")
    gammas = cfg.get_floats(sec, "gamma", "-0.5, 0, 1")
    lambdas = cfg.get_floats(sec, "lambda0", "0.5, 1, 2")
    n_samples = cfg.get_int(sec, "samples", 200)
    s_min = cfg.get_float(sec, "s_min", 0.05)
    s_max = cfg.get_float(sec, "s_max", 1.0)
    core_1d = cfg.get_float(sec, "core_radius", 0.25)
    if cfg.has(sec, "m"):
        m_of = lambda gamma: cfg.get_floats(sec, "m")
    else:
        fracs = cfg.get_floats(sec, "m_frac", "0, 0.5")
        m_of = lambda gamma: [f * (gamma + 1.0) for f in fracs]

    rows = []
    worst_overall = 0.0
    instances = 0
    for n, p, gamma in product(ns, ps, gammas):
        for m in m_of(gamma):
            for lam in lambdas:
                params = StructuralParams(n=n, p=p, gamma=gamma, m=m)
                if params.critical:
                    raise CriticalRegime(
                        f"radial profile undefined for critical m = gamma+1 = {m}"
                    )
                # shifted cores are exact only in 1-D; n >= 2 uses core 0
                core = core_1d if n == 1 else 0.0
                prof = RadialDeadCore(
                    params, center=np.zeros(n), core_radius=core, lambda0=lam
                )
                th = ThieleSpec.constant(lam)
                svals = np.linspace(s_min, s_max, n_samples)
                angles = (
                    np.pi * (3.0 - np.sqrt(5.0)) * np.arange(n_samples)
                )  # golden-angle spread
                instances += 1
                for s, ang in zip(svals, angles):
                    if n == 1:
                        x = np.array([math.copysign(core + s, math.cos(ang))])
                    else:
                        x = (core + s) * np.array([math.cos(ang), math.sin(ang)])
                    res = abs(pde_residual(prof, x, params, th))
                    worst_overall = max(worst_overall, res)
                    rows.append([n, p, gamma, m, lam, core, s, prof.value(x), res])

    out = write_csv(
        outdir / "radial.csv",
        ["n", "p", "gamma", "m", "lambda0", "core_radius", "s", "value", "abs_residual"],
        rows,
    )
    return {"instances": instances, "max_abs_residual": worst_overall}, [out]


def cmd_solve(cfg: ExperimentConfig, outdir: Path, seed: int, threads: int):
    params = _structural_params(cfg)
    thiele = _thiele(cfg)
    gfn, oracle = _boundary(cfg, params, thiele)
    grid = _grid(cfg, params.n)
    scfg = _solver_config(cfg)
    problem = ProblemSpec(params, thiele, g=gfn)
    fld = solve_dirichlet(problem, grid, scfg)
    if not fld.report.converged:
        raise ConvergenceError(
            f"solver failed to converge in {fld.report.iterations} sweeps "
            f"(max update {fld.report.max_update:.3g})"
        )
    out = _snapshot_field(outdir, fld)
    ps = positivity_set(fld)
    extra = {
        "grid": _grid_manifest(grid),
        "problem": {"n": params.n, "p": params.p, "gamma": params.gamma, "m": params.m},
        "thiele": _thiele_manifest(thiele),
        "report": {
            "iterations": fld.report.iterations,
            "max_update": fld.report.max_update,
            "residual_norm": fld.report.residual_norm,
            "converged": fld.report.converged,
            "tol": fld.report.tol,
            "u_tol": fld.report.u_tol,
            "bracket_violations": fld.report.bracket_violations,
            "bracket_max_violation": fld.report.bracket_max_violation,
        },
        "dead_fraction": ps.dead_fraction(),
        "sup": fld.sup(),
    }
    if params.subcritical:
        extra["beta"] = compute_beta(params)
    if oracle is not None:
        exact = grid.sample(oracle.values)
        sup = float(np.abs(exact[grid.interior]).max())
        err = float(np.abs(fld.values - exact)[grid.interior].max())
        extra["rel_sup_error"] = err / sup if sup > 0 else 0.0
    return extra, [out]


def _thiele_manifest(thiele: ThieleSpec) -> dict:
    out = {"variant": thiele.variant, "lambda0": thiele.lambda0}
    if thiele.variant == "henon":
        out.update(
            points=[list(p) for p in thiele.points],
            alpha=thiele.alpha,
            weight=thiele.weight,
        )
    return out


def cmd_analyze(cfg: ExperimentConfig, outdir: Path, seed: int, threads: int):
    sec = "analysis"
    if cfg.has(sec, "snapshot"):
        fld = _load_snapshot(Path(cfg.get(sec, "snapshot")))
        if fld.problem is None:
            raise ConfigError("snapshot manifest carries no problem parameters")
        params = fld.problem.params
        jet_tables = None
    elif cfg.get_bool(sec, "analytic_profile", "false"):
        params = _structural_params(cfg)
        thiele = _thiele(cfg)
        gfn, oracle = _boundary(cfg, params, thiele)
        if oracle is None:
            raise ConfigError("analytic mode needs a profile boundary kind")
        grid = _grid(cfg, params.n)
        rep = SolveReport(converged=True, tol=1e-9, u_tol=1e-8)
        fld = SolutionField(grid, grid.sample(oracle.values), rep,
                            problem=ProblemSpec(params, thiele))
        jet_tables = profile_jet_tables(oracle, grid)
    else:
        raise ConfigError("[analysis] needs snapshot = DIR or analytic_profile = true")

    lam = cfg.get_float(sec, "lambda0", fld.problem.thiele.lambda0 or 1.0)
    grid = fld.grid
    h = grid.h
    ps = positivity_set(fld)
    outputs = []
    extra = {"lambda0": lam, "u_tol": ps.u_tol}

    if not ps.has_free_boundary:
        for name, header in [
            ("growth", ["r", "sup", "fitted_exponent", "target"]),
            ("nondeg", ["r", "ratio", "c_nd", "beta"]),
            ("density", ["r", "theta", "note"]),
            ("porosity", ["r", "delta_min", "delta_median"]),
            ("gradient", ["r", "sup_grad", "fitted_exponent", "target"]),
            ("l2avg", ["r", "s_value", "slope", "target"]),
            ("distance", ["c_sharp", "c_star", "spread", "n_nodes", "beta"]),
        ]:
            outputs.append(write_csv(outdir / f"{name}.csv", header, []))
        extra["no_free_boundary"] = True
        return extra, outputs
    extra["no_free_boundary"] = False

    if cfg.has(sec, "x0"):
        hint = np.asarray(cfg.get_floats(sec, "x0"))
        x0 = ps.fb_cells[np.argmin(np.linalg.norm(ps.fb_cells - hint, axis=1))]
    else:
        x0 = ps.fb_cells[0]
    extra["x0"] = list(map(float, x0))

    radii = (
        np.asarray(cfg.get_floats(sec, "radii"))
        if cfg.has(sec, "radii")
        else default_fit_radii(h, grid.boundary_distance(x0))
    )
    target = compute_beta(params)
    if cfg.has(sec, "henon_alpha"):
        target = henon_exponent(params, cfg.get_float(sec, "henon_alpha"))

    growth = fit_growth_exponent(fld, x0, radii, target=target)
    outputs.append(
        write_csv(
            outdir / "growth.csv",
            ["r", "sup", "fitted_exponent", "target"],
            [
                [r, s, growth.exponent, growth.target]
                for r, s in zip(growth.radii, growth.statistics)
            ],
        )
    )
    extra["growth"] = {
        "exponent": growth.exponent,
        "target": growth.target,
        "rel_dev": growth.rel_dev,
    }

    nd_radii = (
        np.asarray(cfg.get_floats(sec, "nondeg_radii"))
        if cfg.has(sec, "nondeg_radii")
        else np.asarray(
            [r for r in [8 * h, 16 * h, 24 * h, 32 * h, 48 * h]
             if r <= grid.boundary_distance(x0) / 2.0]
        )
    )
    nd = check_nondegeneracy(fld, x0, nd_radii, params, lam)
    outputs.append(
        write_csv(
            outdir / "nondeg.csv",
            ["r", "ratio", "c_nd", "beta"],
            [[r, q, nd.c_nd, nd.beta] for r, q in zip(nd.radii, nd.ratios)],
        )
    )
    extra["nondegeneracy"] = {"min_ratio": nd.min_ratio, "c_nd": nd.c_nd}

    dens = measure_density(fld, x0, radii)
    rows = [[r, t, "ok"] for r, t in zip(dens.radii, dens.theta)]
    rows += [[r, math.nan, "skipped: leaves domain"] for r in dens.skipped]
    outputs.append(write_csv(outdir / "density.csv", ["r", "theta", "note"], rows))
    extra["density"] = {"min_theta": dens.min_theta, "skipped": dens.skipped}

    poro_radii = (
        np.asarray(cfg.get_floats(sec, "porosity_radii"))
        if cfg.has(sec, "porosity_radii")
        else np.asarray([8 * h, 16 * h])
    )
    poro = estimate_porosity(fld, poro_radii)
    outputs.append(
        write_csv(
            outdir / "porosity.csv",
            ["r", "delta_min", "delta_median"],
            [
                [r, a, b]
                for r, a, b in zip(poro.radii, poro.delta_min, poro.delta_median)
            ],
        )
    )
    extra["porosity"] = {"min": poro.overall_min, "n_centers": poro.n_centers}

    if params.gamma > 0:
        grad = fit_gradient_decay(fld, x0, radii, params=params, jet_tables=jet_tables)
        outputs.append(
            write_csv(
                outdir / "gradient.csv",
                ["r", "sup_grad", "fitted_exponent", "target"],
                [
                    [r, s, grad.exponent, grad.target]
                    for r, s in zip(grad.radii, grad.statistics)
                ],
            )
        )
        extra["gradient"] = {
            "exponent": grad.exponent,
            "target": grad.target,
            "rel_dev": grad.rel_dev,
        }
        l2 = l2_hessian_average(fld, x0, radii, params=params, jet_tables=jet_tables)
        outputs.append(
            write_csv(
                outdir / "l2avg.csv",
                ["r", "s_value", "slope", "target"],
                [[r, s, l2.slope, l2.target] for r, s in zip(l2.radii, l2.s_values)],
            )
        )
        extra["l2avg"] = {"slope": l2.slope, "target": l2.target, "bound_ok": l2.bound_ok}

    db = distance_bounds(fld, params=params, lambda0=lam)
    outputs.append(
        write_csv(
            outdir / "distance.csv",
            ["c_sharp", "c_star", "spread", "n_nodes", "beta"],
            [[db.c_sharp, db.c_star, db.spread, db.n_nodes, db.beta]],
        )
    )
    extra["distance"] = {"c_sharp": db.c_sharp, "c_star": db.c_star, "spread": db.spread}
    return extra, outputs


_PAYOFFS = {
    "linear": lambda pts: np.atleast_2d(pts)[:, 0],
    "cos_theta": lambda pts: np.atleast_2d(pts)[:, 0]
    / np.maximum(np.linalg.norm(np.atleast_2d(pts), axis=1), 1e-12),
}


def cmd_game(cfg: ExperimentConfig, outdir: Path, seed: int, threads: int):
    sec = "game"
    p = cfg.get_float(sec, "p")
    dim = cfg.get_int(sec, "dim", 2)
    grid = _grid(cfg, dim)
    eps = cfg.get_float(sec, "eps")
    kind = cfg.get(sec, "payoff", "cos_theta")
    if kind == "constant":
        value = cfg.get_float(sec, "payoff_value")
        payoff = lambda pts: np.full(len(np.atleast_2d(pts)), value)
    else:
        try:
            payoff = _PAYOFFS[kind]
        except KeyError:
            raise ConfigError(f"unknown payoff kind {kind!r}")
    dpp_cfg = SolverConfig(
        scheme="dpp_iter", tol=cfg.get_float("dpp", "tol", 1e-8) if cfg.has("dpp") else 1e-8
    )
    value_ref = dpp_iterate(grid, payoff, p, eps, dpp_cfg)
    if not value_ref.report.converged:
        raise ConvergenceError("DPP value iteration did not converge")
    x0 = cfg.get_floats(sec, "x0", ", ".join(["0"] * dim))
    gcfg = GameConfig(
        p=p,
        eps=eps,
        n_walks=cfg.get_int(sec, "n_walks", 10_000),
        seed=seed,
        payoff=payoff,
        max_steps=cfg.get_int(sec, "max_steps") if cfg.has(sec, "max_steps") else None,
        workers=threads,
        strict=False,
    )
    stats = run_game(x0, value_ref, gcfg)
    header = (
        ["x0"] if dim == 1 else ["x0", "y0"]
    ) + [
        "mean", "sd", "ci95", "mean_exit_time", "truncated", "n_walks",
        "dpp_value", "osc_payoff", "threshold", "consistent",
    ]
    row = list(x0) + [
        stats.mean, stats.sd, stats.ci95, stats.mean_exit_time, stats.truncated,
        stats.n_walks, stats.value_at_start, stats.osc_payoff, stats.threshold,
        stats.consistent,
    ]
    out = write_csv(outdir / "game.csv", header, [row])
    extra = {
        "dpp_iterations": value_ref.report.iterations,
        "stats": {k: getattr(stats, k) for k in (
            "mean", "sd", "ci95", "mean_exit_time", "truncated", "n_walks",
            "value_at_start", "threshold", "consistent")},
    }
    if not stats.consistent:
        raise GameValueMismatch(
            f"Monte Carlo mean {stats.mean:.6g} missed the DPP value "
            f"{stats.value_at_start:.6g} beyond {stats.threshold:.3g}"
        )
    return extra, [out]


def cmd_liouville(cfg: ExperimentConfig, outdir: Path, seed: int, threads: int):
    sec = "liouville"
    mode = cfg.get(sec, "mode", "II").upper()
    params = _structural_params(cfg)
    thiele = _thiele(cfg)
    if thiele.variant != "constant":
        raise ConfigError("liouville sweeps use a constant modulus")
    lam = thiele.lambda0
    beta = compute_beta(params)
    cnd = compute_cnd(params, lam)
    radii_R = cfg.get_floats(sec, "R", "4, 8, 16")
    probes = cfg.get_points(sec, "probes", "0.5, 0; 1, 0; 2, 0")
    grid = _grid(cfg, params.n)
    if grid.kind != "ball":
        raise ConfigError("liouville mode solves on the unit ball; use grid kind = ball")
    scfg = _solver_config(cfg)

    if mode == "II":
        theta = cfg.get_float(sec, "theta", 0.25)
        if theta >= 1.0:
            raise ConfigError(
                f"mode II needs theta < 1 (boundary data below C_ND R^beta), got {theta}"
            )
    elif mode == "I":
        s_frac = cfg.get_float(sec, "growth_fraction", 0.5)
        if s_frac >= 1.0:
            raise ConfigError("mode I growth exponent fraction must be < 1")
        amplitude = cfg.get_float(sec, "amplitude", 1.0)
        s_exp = s_frac * beta
    else:
        raise ConfigError(f"unknown liouville mode {mode!r}")

    rows = []
    probe_values = {tuple(pr): [] for pr in probes}
    for R in radii_R:
        # solve on B_R mapped to the unit ball: v(x) = u(Rx)/R^beta solves
        # the same equation with the same constant modulus
        if mode == "II":
            boundary_sup = theta * cnd * R**beta
        else:
            boundary_sup = amplitude * R**s_exp
        data_unit = boundary_sup / R**beta
        gfn = lambda pts, c=data_unit: np.full(len(np.atleast_2d(pts)), c)
        problem = ProblemSpec(params, thiele, g=gfn)
        fld = solve_dirichlet(problem, grid, scfg)
        if not fld.report.converged:
            raise ConvergenceError(f"liouville solve at R = {R} did not converge")
        for pr in probes:
            u_probe = R**beta * fld.value_at(np.asarray(pr) / R)
            if mode == "II":
                v_probe = liouville_supersolution_eval(boundary_sup, R, params, lam, pr)
            else:
                v_probe = math.nan
            probe_values[tuple(pr)].append(u_probe)
            rows.append(
                [mode, R, *pr, boundary_sup, boundary_sup / (cnd * R**beta), u_probe, v_probe]
            )
    coord_cols = ["px"] if params.n == 1 else ["px", "py"]
    out = write_csv(
        outdir / "liouville.csv",
        ["mode", "R", *coord_cols, "boundary_sup", "sup_ratio", "u_probe", "v_probe"],
        rows,
    )
    collapse = {
        str(k): {"first": v[0], "last": v[-1], "monotone": all(a >= b - 1e-12 for a, b in zip(v, v[1:]))}
        for k, v in probe_values.items()
    }
    return {"mode": mode, "beta": beta, "c_nd": cnd, "collapse": collapse}, [out]


def cmd_sweep(cfg: ExperimentConfig, outdir: Path, seed: int, threads: int):
    sec = "sweep"
    ps = cfg.get_floats(sec, "p", "2, 3")
    gammas = cfg.get_floats(sec, "gamma", "0, 1")
    fracs = cfg.get_floats(sec, "m_frac", "0, 0.25")
    n = cfg.get_int(sec, "n", 2)
    lam = cfg.get_float(sec, "lambda0", 1.0)
    core = cfg.get_float(sec, "core_radius", 0.3)
    scfg = _solver_config(cfg)
    grid = _grid(cfg, n)
    rows = []
    for p, gamma, frac in product(ps, gammas, fracs):
        m = frac * (gamma + 1.0)
        params = StructuralParams(n=n, p=p, gamma=gamma, m=m)
        prof = RadialDeadCore(params, center=np.zeros(n), core_radius=core, lambda0=lam)
        problem = ProblemSpec(params, ThieleSpec.constant(lam), g=prof.values)
        fld = solve_dirichlet(problem, grid, scfg)
        ps_set = positivity_set(fld)
        beta = compute_beta(params)
        fit_exp = math.nan
        if ps_set.has_free_boundary:
            x0 = ps_set.fb_cells[
                np.argmin(np.abs(np.linalg.norm(ps_set.fb_cells, axis=1) - core))
            ]
            try:
                fit = fit_growth_exponent(fld, x0, target=beta)
                fit_exp = fit.exponent
            except DeadcoreError:
                pass
        rows.append(
            [p, gamma, m, beta, fit_exp, ps_set.dead_fraction(),
             fld.report.iterations, fld.report.converged]
        )
    out = write_csv(
        outdir / "sweep.csv",
        ["p", "gamma", "m", "beta", "fitted_exponent", "dead_fraction",
         "iterations", "converged"],
        rows,
    )
    return {"instances": len(rows)}, [out]


# --------------------------------------------------------------------------
# entry point


_COMMANDS = {
    "radial": cmd_radial,
    "solve": cmd_solve,
    "analyze": cmd_analyze,
    "game": cmd_game,
    "liouville": cmd_liouville,
    "sweep": cmd_sweep,
}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="deadcore",
        description="dead-core equation laboratory: solve, analyze, play",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=name != "radial", help="experiment config path")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
    return ap


def _resolve_threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("DEADCORE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"DEADCORE_THREADS = {env!r} is not an integer") from exc
    return os.cpu_count() or 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        threads = _resolve_threads(args)
        cfg = (
            ExperimentConfig.load(args.config)
            if args.config
            else ExperimentConfig({})
        )
        seed = args.seed if args.seed is not None else (
            cfg.get_int("run", "seed", 0) if cfg.has("run") else 0
        )
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        extra, outputs = _COMMANDS[args.command](cfg, outdir, seed=seed, threads=threads)
    except (ConfigError, ParameterError, CriticalRegime, NotApplicable, NoFreeBoundary) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, GameValueMismatch) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    wall = time.perf_counter() - t0
    _write_manifest(outdir, args.command, cfg, seed, threads, wall, outputs, extra)
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
