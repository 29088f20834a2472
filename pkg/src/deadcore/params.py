"""Structural parameters, admissibility checks, and derived exponents.

The model is the one-phase absorption equation

    |grad u|^gamma * Lap_p^N u = a(x) * (u_+)^m

with ellipticity exponent p > 1, degeneracy exponent gamma > -1 and
absorption exponent 0 <= m <= gamma + 1.  The regime m < gamma + 1 is
"subcritical" (dead cores can form); m = gamma + 1 is "critical" and every
quantity built from the growth exponent beta refuses it explicitly.

Every derived constant is computed here, in closed form, once:

    beta      = (gamma + 2) / (gamma + 1 - m)
    c_rad     = beta^(-(gamma+1)/(gamma+1-m)) * K^(-1/(gamma+1-m)),
                K = n - 1 + (p - 1)(beta - 1)
    C_ND      = beta^(-(gamma+1)/(gamma+1-m)) * (lambda0 / K)^(1/(gamma+1-m))
    grad_exp  = beta - 1  (algebraically equal to (1+m)/(gamma+1-m))
    l2_exp    = gamma * m / (gamma + 1 - m)
    beta_henon= (gamma + 2 + alpha) / (gamma + 1 - m)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CriticalRegime, ParameterError, UnsupportedGameRange

__all__ = [
    "StructuralParams",
    "ThieleSpec",
    "DerivedExponents",
    "ProblemSpec",
    "compute_beta",
    "compute_radial_constant",
    "compute_cnd",
    "compute_game_weights",
    "henon_exponent",
]


@dataclass(frozen=True)
class StructuralParams:
    """Dimension and the three structural exponents of one PDE instance.

    Admissible ranges: n >= 1 integer, p > 1, gamma > -1, 0 <= m <= gamma+1.
    ``m == gamma + 1`` is accepted but flagged critical.
    """

    n: int
    p: float
    gamma: float
    m: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ParameterError(f"dimension n must be an integer >= 1, got {self.n!r}")
        if not self.p > 1:
            raise ParameterError(f"ellipticity exponent p must satisfy p > 1, got {self.p}")
        if not self.gamma > -1:
            raise ParameterError(f"degeneracy exponent gamma must satisfy gamma > -1, got {self.gamma}")
        if self.m < 0:
            raise ParameterError(f"absorption exponent m must be >= 0, got {self.m}")
        if self.m > self.gamma + 1:
            raise ParameterError(
                f"absorption exponent m={self.m} exceeds gamma+1={self.gamma + 1}: no dead-core structure"
            )

    @property
    def critical(self) -> bool:
        """True on the borderline m = gamma + 1 (maximum-principle regime)."""
        return self.m == self.gamma + 1

    @property
    def subcritical(self) -> bool:
        return self.m < self.gamma + 1


def compute_beta(params: StructuralParams) -> float:
    """Sharp growth exponent (gamma+2)/(gamma+1-m) of the positivity set.

    Raises CriticalRegime when m = gamma+1 (beta would be infinite).
    """
    if params.critical:
        raise CriticalRegime(
            f"beta undefined for m = gamma + 1 = {params.m}: dichotomy regime"
        )
    return (params.gamma + 2.0) / (params.gamma + 1.0 - params.m)


def _ellipticity_weight(params: StructuralParams, beta: float) -> float:
    # K = n - 1 + (p-1)(beta-1); positive for all admissible parameters.
    k = params.n - 1.0 + (params.p - 1.0) * (beta - 1.0)
    if not k > 0:
        raise ParameterError(f"radial ellipticity weight must be positive, got {k}")
    return k


def compute_cnd(params: StructuralParams, lambda0: float) -> float:
    """Non-degeneracy constant: the coefficient of the exact radial profile
    solving the equation with constant modulus lambda0."""
    if not lambda0 > 0:
        raise ParameterError(f"Thiele lower bound lambda0 must be positive, got {lambda0}")
    beta = compute_beta(params)
    k = _ellipticity_weight(params, beta)
    q = 1.0 / (params.gamma + 1.0 - params.m)
    return beta ** (-(params.gamma + 1.0) * q) * (lambda0 / k) ** q


def compute_radial_constant(params: StructuralParams) -> float:
    """Radial profile coefficient for unit modulus; identical code path to
    compute_cnd so the two agree bit-for-bit at lambda0 = 1."""
    return compute_cnd(params, 1.0)


def compute_game_weights(params: StructuralParams) -> tuple[float, float]:
    """Tug-of-war-with-noise mixing weights (alpha0, beta0).

    alpha0 = (p-2)/(p+n) weights the fair-coin move, beta0 = (n+2)/(p+n) the
    uniform noise; p = 2 degenerates to the pure random walk.
    """
    if params.p < 2:
        raise UnsupportedGameRange(
            f"game weights are defined for p >= 2 only, got p = {params.p}"
        )
    alpha0 = (params.p - 2.0) / (params.p + params.n)
    beta0 = (params.n + 2.0) / (params.p + params.n)
    return alpha0, beta0


def henon_exponent(params: StructuralParams, alpha: float) -> float:
    """Raised growth exponent (gamma+2+alpha)/(gamma+1-m) on the zero set of
    a distance-power weight."""
    if alpha < 0:
        raise ParameterError(f"weight exponent alpha must be >= 0, got {alpha}")
    if params.critical:
        raise CriticalRegime("Henon exponent undefined in the critical regime")
    return (params.gamma + 2.0 + alpha) / (params.gamma + 1.0 - params.m)


# --------------------------------------------------------------------------
# Thiele modulus


@dataclass(frozen=True)
class ThieleSpec:
    """Absorption coefficient a(x), bounded as lambda0 <= a <= Lambda0.

    Three variants:
      * constant      a(x) = lambda0
      * field         a(x) = func(x), bounds asserted at every evaluation
      * henon         a(x) = weight * dist(x, F)^alpha  (vanishes on F)
    """

    variant: str
    lambda0: float
    Lambda0: float
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    points: Optional[np.ndarray] = None  # Henon zero set F, shape (k, n)
    alpha: float = 0.0
    weight: float = 1.0

    def __post_init__(self):
        if self.variant not in ("constant", "field", "henon"):
            raise ParameterError(f"unknown Thiele variant {self.variant!r}")
        if self.variant in ("constant", "field"):
            if not self.lambda0 > 0:
                raise ParameterError(f"lambda0 must be positive, got {self.lambda0}")
            if self.Lambda0 < self.lambda0:
                raise ParameterError(
                    f"Lambda0 = {self.Lambda0} below lambda0 = {self.lambda0}"
                )
            if self.variant == "field" and self.func is None:
                raise ParameterError("field variant needs a callable")
        else:
            if self.points is None or self.points.size == 0:
                raise ParameterError("henon variant needs a non-empty point list F")
            if not self.alpha > 0:
                raise ParameterError(f"henon exponent alpha must be positive, got {self.alpha}")
            if not self.weight > 0:
                raise ParameterError(f"henon weight must be positive, got {self.weight}")

    @staticmethod
    def constant(value: float) -> "ThieleSpec":
        return ThieleSpec(variant="constant", lambda0=value, Lambda0=value)

    @staticmethod
    def bounded_field(func: Callable, lambda0: float, Lambda0: float) -> "ThieleSpec":
        return ThieleSpec(variant="field", lambda0=lambda0, Lambda0=Lambda0, func=func)

    @staticmethod
    def henon(points: Sequence, alpha: float, weight: float = 1.0) -> "ThieleSpec":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return ThieleSpec(
            variant="henon",
            lambda0=0.0,
            Lambda0=math.inf,
            points=pts,
            alpha=alpha,
            weight=weight,
        )

    def __call__(self, x) -> np.ndarray:
        """Evaluate a(x); x is one point (n,) or a batch (N, n)."""
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        pts = np.atleast_2d(x)
        if self.variant == "constant":
            out = np.full(pts.shape[0], self.lambda0)
        elif self.variant == "field":
            out = np.asarray(self.func(pts), dtype=float).reshape(pts.shape[0])
            bad_low = out < self.lambda0 - 1e-12
            bad_high = out > self.Lambda0 + 1e-12
            if bad_low.any() or bad_high.any():
                raise ParameterError(
                    "Thiele field leaves [lambda0, Lambda0] at evaluated points"
                )
        else:
            d = np.sqrt(
                ((pts[:, None, :] - self.points[None, :, :]) ** 2).sum(axis=2)
            ).min(axis=1)
            out = self.weight * d**self.alpha
        return float(out[0]) if squeeze else out


# --------------------------------------------------------------------------
# Derived exponents


@dataclass(frozen=True)
class DerivedExponents:
    """Everything the theory predicts for one parameter tuple.

    grad_exp is stored as beta - 1; this is algebraically identical to the
    gradient-decay rate (1+m)/(gamma+1-m) and makes the identity
    grad_exp == beta - 1 exact in floating point as well.
    """

    beta: float
    c_rad: float
    C_ND: float
    grad_exp: float
    l2_exp: float
    beta_henon: Optional[float] = None

    @staticmethod
    def derive(
        params: StructuralParams,
        lambda0: float = 1.0,
        henon_alpha: Optional[float] = None,
    ) -> "DerivedExponents":
        beta = compute_beta(params)
        return DerivedExponents(
            beta=beta,
            c_rad=compute_radial_constant(params),
            C_ND=compute_cnd(params, lambda0),
            grad_exp=beta - 1.0,
            l2_exp=params.gamma * params.m / (params.gamma + 1.0 - params.m),
            beta_henon=None
            if henon_alpha is None
            else henon_exponent(params, henon_alpha),
        )


@dataclass(frozen=True)
class ProblemSpec:
    """One Dirichlet instance: structural parameters, modulus, boundary data.

    Derived constants are computed eagerly (subcritical case) and cached on
    the instance; in the critical regime ``derived`` is None and callers use
    the dichotomy path instead.
    """

    params: StructuralParams
    thiele: ThieleSpec
    g: Optional[Callable[[np.ndarray], np.ndarray]] = None
    derived: Optional[DerivedExponents] = field(default=None, init=False)

    def __post_init__(self):
        if self.params.subcritical:
            lam = self.thiele.lambda0 if self.thiele.lambda0 > 0 else 1.0
            alpha = self.thiele.alpha if self.thiele.variant == "henon" else None
            object.__setattr__(
                self, "derived", DerivedExponents.derive(self.params, lam, alpha)
            )

    @property
    def beta(self) -> float:
        if self.derived is None:
            raise CriticalRegime("beta requested on a critical-regime instance")
        return self.derived.beta
