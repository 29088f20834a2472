"""Tug-of-war-with-noise Monte Carlo simulator.

Plays the stochastic game whose value recursion the DPP iteration solves:
with probability beta0 the token jumps to a uniformly random grid node of
the eps-ball, with probability alpha0 a fair coin decides whether the
maximizing or the minimizing player moves.  Both players act greedily on
the converged DPP value (the fixed-point-optimal policy at discretization
scale).  The walk stops when it lands outside the domain, where the payoff
is collected; the empirical mean must match the DPP value at the start.

Randomness comes from one counter-based Philox stream per walk batch,
keyed by (seed, batch index).  Batches are independent and may run on a
thread pool; results are collected in batch order, so the statistics are
reproducible bit-for-bit for any worker count.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import GameValueMismatch, ParameterError
from .grid import SolutionField
from .params import StructuralParams, compute_game_weights
from .solver import _gather_table, ball_offsets

__all__ = ["GameConfig", "WalkStats", "run_game", "TruncationWarning"]


class TruncationWarning(UserWarning):
    """More than 1% of walks hit the step cap before exiting."""


@dataclass(frozen=True)
class GameConfig:
    p: float
    eps: float
    n_walks: int
    seed: int
    payoff: Callable
    max_steps: Optional[int] = None  # default 50 (diam/eps)^2
    batch_size: int = 8192
    workers: int = 1
    strict: bool = True

    def __post_init__(self):
        if self.n_walks < 2:
            raise ParameterError("need at least 2 walks for a standard deviation")
        if not self.eps > 0:
            raise ParameterError("eps must be positive")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")


@dataclass(frozen=True)
class WalkStats:
    mean: float
    sd: float
    ci95: float
    mean_exit_time: float
    truncated: int
    n_walks: int
    value_at_start: float
    osc_payoff: float
    threshold: float
    consistent: bool


def _default_max_steps(grid, eps: float) -> int:
    diam = float(np.linalg.norm(grid.hi - grid.lo))
    return int(50.0 * (diam / eps) ** 2)


class _GameTables:
    """Precomputed policies and neighborhoods shared by all batches."""

    def __init__(self, value_ref: SolutionField, config: GameConfig):
        grid = value_ref.grid
        alpha0, beta0 = compute_game_weights(
            StructuralParams(n=grid.dim, p=config.p, gamma=0.0, m=0.0)
        )
        self.beta0 = beta0
        self.half_alpha = alpha0 / 2.0
        offsets = ball_offsets(grid.dim, grid.h, config.eps)
        self.gather = _gather_table(grid, offsets)
        self.n_int, self.K = self.gather.shape
        self.flat_values = value_ref.values.ravel()
        nb = self.flat_values[self.gather]
        rows = np.arange(self.n_int)
        self.amax = self.gather[rows, nb.argmax(axis=1)]
        self.amin = self.gather[rows, nb.argmin(axis=1)]
        self.row_of_flat = np.full(value_ref.values.size, -1, dtype=np.int64)
        self.interior_flat = np.nonzero(grid.interior.ravel())[0]
        self.row_of_flat[self.interior_flat] = rows
        pts = grid.points().reshape(-1, grid.dim)
        self.payoff_flat = np.asarray(config.payoff(pts), dtype=float).reshape(-1)
        gflat = self.gather.ravel()
        exit_nodes = np.unique(gflat[self.row_of_flat[gflat] < 0])
        self.osc = (
            float(self.payoff_flat[exit_nodes].max() - self.payoff_flat[exit_nodes].min())
            if exit_nodes.size
            else 0.0
        )


def _run_batch(tables: _GameTables, config: GameConfig, row0: int, b: int, batch_idx: int):
    rng = np.random.Generator(
        np.random.Philox(key=[np.uint64(config.seed), np.uint64(batch_idx)])
    )
    max_steps = config.max_steps or 0  # caller guarantees it is set
    rows = np.full(b, row0, dtype=np.int64)
    payoffs = np.empty(b)
    steps_taken = np.zeros(b, dtype=np.int64)
    active = np.arange(b)
    exited = 0
    exit_steps = 0
    for step in range(max_steps):
        if active.size == 0:
            break
        r = rng.random(active.size)
        cur = rows[active]
        target = np.empty(active.size, dtype=np.int64)
        noise = r < tables.beta0
        if noise.any():
            js = rng.integers(0, tables.K, noise.sum())
            target[noise] = tables.gather[cur[noise], js]
        maxm = (~noise) & (r < tables.beta0 + tables.half_alpha)
        if maxm.any():
            target[maxm] = tables.amax[cur[maxm]]
        minm = (~noise) & ~maxm
        if minm.any():
            target[minm] = tables.amin[cur[minm]]
        new_rows = tables.row_of_flat[target]
        out = new_rows < 0
        if out.any():
            walk_ids = active[out]
            payoffs[walk_ids] = tables.payoff_flat[target[out]]
            steps_taken[walk_ids] = step + 1
            exited += walk_ids.size
            exit_steps += walk_ids.size * (step + 1)
        rows[active] = np.where(out, rows[active], new_rows)
        active = active[~out]
    truncated = active.size
    if truncated:
        # truncated walks contribute the DPP value where they stand
        node_flat = tables.interior_flat[rows[active]]
        payoffs[active] = tables.flat_values[node_flat]
        steps_taken[active] = max_steps
    return payoffs, exited, exit_steps, truncated


def run_game(x0, value_ref: SolutionField, config: GameConfig) -> WalkStats:
    """Simulate n_walks games from x0 and compare with the DPP value.

    The post-condition |mean - value_ref(x0)| <= max(3 CI, 2% osc F) is
    asserted unless config.strict is False.  Walks that hit the step cap
    contribute the DPP value at their current node (their count is reported
    and a TruncationWarning fires above 1%).
    """
    grid = value_ref.grid
    if not value_ref.report.converged:
        raise ParameterError("value reference has not converged")
    if config.eps < 2.0 * grid.h - 1e-12:
        raise ParameterError("eps must be at least 2h of the reference grid")
    tables = _GameTables(value_ref, config)

    start_idx = grid.nearest_index(x0)
    start_flat = np.ravel_multi_index(
        start_idx if grid.dim > 1 else (start_idx,), grid.shape
    )
    row0 = int(tables.row_of_flat[start_flat])
    if row0 < 0:
        raise ParameterError(f"start point {x0} is not an interior node")
    value_at_start = float(tables.flat_values[start_flat])

    if config.max_steps is None:
        config = GameConfig(
            p=config.p, eps=config.eps, n_walks=config.n_walks, seed=config.seed,
            payoff=config.payoff, max_steps=_default_max_steps(grid, config.eps),
            batch_size=config.batch_size, workers=config.workers,
            strict=config.strict,
        )

    sizes = []
    n_left = config.n_walks
    while n_left > 0:
        b = min(config.batch_size, n_left)
        sizes.append(b)
        n_left -= b
    jobs = [(i, b) for i, b in enumerate(sizes)]
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(
                pool.map(lambda ib: _run_batch(tables, config, row0, ib[1], ib[0]), jobs)
            )
    else:
        results = [_run_batch(tables, config, row0, b, i) for i, b in jobs]

    payoffs = np.concatenate([r[0] for r in results])
    exited_count = sum(r[1] for r in results)
    exit_steps = sum(r[2] for r in results)
    truncated = sum(r[3] for r in results)

    total = payoffs.size
    if payoffs.min() == payoffs.max():  # degenerate game, exactly constant
        mean = float(payoffs[0])
        sd = 0.0
    else:
        mean = float(payoffs.mean())
        sd = math.sqrt(float(((payoffs - mean) ** 2).sum()) / (total - 1))
    ci95 = 1.96 * sd / math.sqrt(total)
    mean_exit = exit_steps / exited_count if exited_count else float(config.max_steps)
    threshold = max(3.0 * ci95, 0.02 * tables.osc)
    # machine-precision floor so degenerate games (constant payoff) pass
    consistent = abs(mean - value_at_start) <= threshold + 1e-12 * (1.0 + abs(value_at_start))
    if truncated > 0.01 * total:
        warnings.warn(
            f"{truncated}/{total} walks truncated at {config.max_steps} steps",
            TruncationWarning,
        )
    stats = WalkStats(
        mean=mean,
        sd=sd,
        ci95=ci95,
        mean_exit_time=mean_exit,
        truncated=truncated,
        n_walks=total,
        value_at_start=value_at_start,
        osc_payoff=tables.osc,
        threshold=threshold,
        consistent=consistent,
    )
    if config.strict and not consistent:
        raise GameValueMismatch(
            f"mean payoff {mean:.6g} vs DPP value {value_at_start:.6g} "
            f"exceeds tolerance {threshold:.3g}; stats = {stats}"
        )
    return stats
