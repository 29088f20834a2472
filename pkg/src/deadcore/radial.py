"""Closed-form solutions and comparison barriers with analytic jets.

These are the oracles of the package: every grid computation is ultimately
checked against one of the profiles below, whose derivatives are written out
by hand.  For a radial function u = f(rho), rho = |x - x0|,

    grad u = f'(rho) xhat
    D^2 u  = f''(rho) xhat (x) xhat + (f'(rho)/rho) (Id - xhat (x) xhat)

and for the power profile f(rho) = c (rho - r)_+^beta this gives the exact
residual cancellation that defines the coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NonSmoothPoint, NotApplicable, ParameterError
from .operators import PointJet, pde_residual
from .params import (
    StructuralParams,
    ThieleSpec,
    compute_beta,
    compute_cnd,
    henon_exponent,
)

__all__ = [
    "RadialDeadCore",
    "PowerBarrier",
    "ExpBarrier",
    "LiouvilleSupersolution",
    "henon_radial_profile",
    "henon_coefficient",
    "exp_barrier_residual_sign",
    "calibrate_exp_barrier",
    "liouville_supersolution_eval",
]


def _radial_jet(center: np.ndarray, x: np.ndarray, fp: float, fpp: float) -> PointJet:
    d = x - center
    rho = float(np.sqrt(d @ d))
    xhat = d / rho
    n = x.size
    proj = np.outer(xhat, xhat)
    hess = fpp * proj + (fp / rho) * (np.eye(n) - proj)
    return PointJet(fp * xhat, hess)


@dataclass(frozen=True)
class RadialDeadCore:
    """Power profile c * (|x - x0| - r)_+^beta, identically zero on the core.

    With c = compute_cnd(params, lambda0) this is an exact solution of the
    dead-core equation with constant modulus lambda0 whenever n = 1 or the
    core radius is zero.  For n >= 2 with r > 0 the curvature term
    (n-1) f'/rho does not collapse to a pure power: the profile then solves
    the equation with modulus lambda0 * (1 - (n-1) r / (K rho)),
    K = n-1+(p-1)(beta-1), i.e. it is a supersolution for the constant
    modulus and an O(r/rho / K) - accurate approximation of the solution.
    beta and c may be overridden (the Henon profile reuses this machinery
    with a raised exponent).
    """

    params: StructuralParams
    center: np.ndarray
    core_radius: float = 0.0
    coefficient: Optional[float] = None
    beta: Optional[float] = None
    lambda0: float = 1.0

    def __post_init__(self):
        object.__setattr__(
            self, "center", np.asarray(self.center, dtype=float).reshape(-1)
        )
        if self.center.size != self.params.n:
            raise ParameterError("center dimension disagrees with params.n")
        if self.core_radius < 0:
            raise ParameterError("core radius must be >= 0")
        if self.beta is None:
            object.__setattr__(self, "beta", compute_beta(self.params))
        if self.coefficient is None:
            object.__setattr__(
                self, "coefficient", compute_cnd(self.params, self.lambda0)
            )
        if not self.coefficient > 0:
            raise ParameterError("profile coefficient must be positive")

    # -- evaluation ---------------------------------------------------------

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(-1)
        rho = float(np.linalg.norm(x - self.center))
        s = rho - self.core_radius
        return self.coefficient * s**self.beta if s > 0 else 0.0

    def values(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        rho = np.linalg.norm(pts - self.center, axis=1)
        s = np.maximum(rho - self.core_radius, 0.0)
        return self.coefficient * s**self.beta

    def value_and_jet(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        d = x - self.center
        rho = float(np.sqrt(d @ d))
        s = rho - self.core_radius
        n = x.size
        if s < 0.0 or (s == 0.0 and self.beta >= 2.0):
            zero = PointJet(np.zeros(n), np.zeros((n, n)))
            return 0.0, zero
        if s == 0.0:
            raise NonSmoothPoint(
                f"jet undefined on the core sphere for beta = {self.beta} < 2"
            )
        c, b = self.coefficient, self.beta
        fp = c * b * s ** (b - 1.0)
        fpp = c * b * (b - 1.0) * s ** (b - 2.0)
        return c * s**b, _radial_jet(self.center, x, fp, fpp)

    def gradient_norm(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(-1)
        s = float(np.linalg.norm(x - self.center)) - self.core_radius
        if s <= 0:
            return 0.0
        return self.coefficient * self.beta * s ** (self.beta - 1.0)

    def rescaled(self, rho: float, kappa: float) -> "RadialDeadCore":
        """Closed-form image of v(x) = u(rho x)/kappa: another power profile
        with coefficient c rho^beta / kappa and core radius r/rho."""
        return RadialDeadCore(
            params=self.params,
            center=self.center / rho,
            core_radius=self.core_radius / rho,
            coefficient=self.coefficient * rho**self.beta / kappa,
            beta=self.beta,
            lambda0=self.lambda0,
        )


# --------------------------------------------------------------------------
# Henon variant: modulus w * dist(x, {x0})^alpha raises the exponent


def henon_coefficient(params: StructuralParams, alpha: float, weight: float = 1.0) -> float:
    """Coefficient making c |x - x0|^beta_hat an exact solution against the
    modulus weight * |x - x0|^alpha."""
    bh = henon_exponent(params, alpha)
    k = params.n - 1.0 + (params.p - 1.0) * (bh - 1.0)
    if not k > 0:
        raise ParameterError("Henon ellipticity weight must be positive")
    return (weight / (bh ** (params.gamma + 1.0) * k)) ** (
        1.0 / (params.gamma + 1.0 - params.m)
    )


def henon_radial_profile(
    params: StructuralParams, alpha: float, center, weight: float = 1.0
) -> RadialDeadCore:
    return RadialDeadCore(
        params=params,
        center=center,
        core_radius=0.0,
        coefficient=henon_coefficient(params, alpha, weight),
        beta=henon_exponent(params, alpha),
    )


# --------------------------------------------------------------------------
# Power barrier of the non-degeneracy proof


@dataclass(frozen=True)
class PowerBarrier:
    """c |x|^beta used as the comparison function in the non-degeneracy
    argument; admissible iff c <= the radial constant for lambda0, in which
    case the barrier is a supersolution (residual <= 0) against any modulus
    bounded below by lambda0."""

    params: StructuralParams
    coefficient: float
    center: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self):
        object.__setattr__(
            self, "center", np.asarray(self.center, dtype=float).reshape(-1)
        )

    @staticmethod
    def admissible_bound(params: StructuralParams, lambda0: float) -> float:
        """Largest admissible coefficient, written as in the comparison
        argument; algebraically equal to compute_cnd(params, lambda0)."""
        g, m, p, n = params.gamma, params.m, params.p, params.n
        num = (1.0 + g - m) ** (2.0 + g) * lambda0
        den = (2.0 + g) ** (1.0 + g) * ((1.0 + g - m) * (n - 1.0) + (p - 1.0) * (1.0 + m))
        return (num / den) ** (1.0 / (1.0 + g - m))

    def profile(self) -> RadialDeadCore:
        return RadialDeadCore(
            params=self.params,
            center=self.center,
            core_radius=0.0,
            coefficient=self.coefficient,
        )

    def value_and_jet(self, x):
        return self.profile().value_and_jet(x)


# --------------------------------------------------------------------------
# Exponential barrier of the critical-regime dichotomy


@dataclass(frozen=True)
class ExpBarrier:
    """exp(-a |x|^2) - kappa0 on the annulus d/2 <= |x| <= d, constant
    inside B_{d/2}, zero outside B_d; kappa0 = exp(-a d^2)."""

    a: float
    d: float
    center: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.d > 0:
            raise ParameterError("annulus scale d must be positive")
        if self.a < 2.0 / self.d**2:
            raise ParameterError(
                f"decay rate a = {self.a} below the admissible floor 2/d^2 = {2.0 / self.d ** 2}"
            )
        if self.center is None:
            object.__setattr__(self, "center", None)
        else:
            object.__setattr__(
                self, "center", np.asarray(self.center, dtype=float).reshape(-1)
            )

    @property
    def kappa0(self) -> float:
        return math.exp(-self.a * self.d**2)

    @property
    def gradient_floor(self) -> float:
        """a d exp(-a d^2): positive lower bound for |grad| on the annulus."""
        return self.a * self.d * math.exp(-self.a * self.d**2)

    def _center(self, n: int) -> np.ndarray:
        return np.zeros(n) if self.center is None else self.center

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(-1)
        rho = float(np.linalg.norm(x - self._center(x.size)))
        if rho >= self.d:
            return 0.0
        if rho <= self.d / 2.0:
            return math.exp(-self.a * (self.d / 2.0) ** 2) - self.kappa0
        return math.exp(-self.a * rho**2) - self.kappa0

    def value_and_jet(self, x):
        # the smooth expression governs the closed annulus; jets in the flat
        # regions strictly inside/outside are zero
        x = np.asarray(x, dtype=float).reshape(-1)
        n = x.size
        c = self._center(n)
        rho = float(np.linalg.norm(x - c))
        slack = 1e-12 * self.d
        if rho > self.d + slack or rho < self.d / 2.0 - slack:
            return self.value(x), PointJet(np.zeros(n), np.zeros((n, n)))
        e = math.exp(-self.a * rho**2)
        fp = -2.0 * self.a * rho * e
        fpp = (4.0 * self.a**2 * rho**2 - 2.0 * self.a) * e
        return e - self.kappa0, _radial_jet(c, x, fp, fpp)


@dataclass(frozen=True)
class BarrierSignReport:
    min_residual: float
    argmin: np.ndarray
    n_samples: int
    a: float

    @property
    def nonnegative(self) -> bool:
        return self.min_residual >= 0.0


def exp_barrier_residual_sign(
    barrier: ExpBarrier,
    params: StructuralParams,
    thiele: ThieleSpec,
    samples,
) -> BarrierSignReport:
    """Minimum of |grad Phi|^gamma Lap_p^N Phi - a(x) Phi_+^(1+gamma) over
    annulus samples.  Nonnegative minimum certifies the subsolution property
    the dichotomy argument needs; the caller picks a large enough decay rate
    (see calibrate_exp_barrier)."""
    if not params.critical:
        raise ParameterError("the exponential barrier belongs to m = gamma + 1")
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    c = barrier._center(pts.shape[1])
    rho = np.linalg.norm(pts - c, axis=1)
    slack = 1e-12 * barrier.d
    inside = (rho >= barrier.d / 2.0 - slack) & (rho <= barrier.d + slack)
    if not inside.all():
        raise ParameterError("samples must lie in the annulus d/2 <= |x| <= d")
    worst = math.inf
    argmin = pts[0]
    for x in pts:
        r = pde_residual(barrier, x, params, thiele)
        if r < worst:
            worst, argmin = r, x
    return BarrierSignReport(worst, np.asarray(argmin), pts.shape[0], barrier.a)


def calibrate_exp_barrier(
    params: StructuralParams,
    thiele: ThieleSpec,
    d: float,
    samples,
    max_doublings: int = 60,
) -> tuple[ExpBarrier, BarrierSignReport]:
    """Smallest decay rate (by doubling + bisection from the floor 2/d^2)
    whose annulus residual is nonnegative at every sample."""
    lo = 2.0 / d**2
    a = lo

    def report(rate: float) -> BarrierSignReport:
        return exp_barrier_residual_sign(ExpBarrier(rate, d), params, thiele, samples)

    rep = report(a)
    if rep.nonnegative:
        return ExpBarrier(a, d), rep
    hi = a
    for _ in range(max_doublings):
        hi *= 2.0
        rep = report(hi)
        if rep.nonnegative:
            break
    else:
        raise NotApplicable("no decay rate certified the barrier sign")
    lo_fail = hi / 2.0
    for _ in range(40):
        mid = 0.5 * (lo_fail + hi)
        if report(mid).nonnegative:
            hi = mid
        else:
            lo_fail = mid
    return ExpBarrier(hi, d), report(hi)


# --------------------------------------------------------------------------
# Liouville supersolution


@dataclass(frozen=True)
class LiouvilleSupersolution:
    """C_ND [ |x| - R (1 - theta^(1/beta)) ]_+^beta with
    theta = sup_{boundary} u / (C_ND R^beta); matches the boundary sup at
    |x| = R and collapses pointwise as R grows."""

    R: float
    boundary_sup: float
    C_ND: float
    beta: float

    def __post_init__(self):
        if self.boundary_sup < 0:
            raise ParameterError("boundary sup must be >= 0")
        if self.theta > 1.0:
            raise NotApplicable(
                f"growth hypothesis violated: sup = {self.boundary_sup} exceeds "
                f"C_ND R^beta = {self.C_ND * self.R ** self.beta}"
            )

    @property
    def theta(self) -> float:
        return self.boundary_sup / (self.C_ND * self.R**self.beta)

    @property
    def core_radius(self) -> float:
        return self.R * (1.0 - self.theta ** (1.0 / self.beta))

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(-1)
        s = float(np.linalg.norm(x)) - self.core_radius
        return self.C_ND * s**self.beta if s > 0 else 0.0


def liouville_supersolution_eval(
    sup_R: float, R: float, params: StructuralParams, lambda0: float, x
) -> float:
    v = LiouvilleSupersolution(
        R=R, boundary_sup=sup_R, C_ND=compute_cnd(params, lambda0),
        beta=compute_beta(params),
    )
    return v.value(x)
