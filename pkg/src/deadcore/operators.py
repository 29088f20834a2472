"""Pointwise operator kernels and the PDE residual oracle.

Sign convention used everywhere: the residual of a field u at a point x is

    residual = |grad u|^gamma * Lap_p^N u  -  a(x) * (u_+)^m

so exact solutions have residual 0, subsolutions >= 0, supersolutions <= 0.
``(u_+)^0`` is the indicator of {u > 0}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Tuple

import numpy as np

from .errors import ParameterError, StencilOutOfDomain, VanishingGradient
from .params import StructuralParams, ThieleSpec

__all__ = [
    "PointJet",
    "EllipticityBounds",
    "normalized_inf_laplacian",
    "normalized_p_laplacian",
    "p_laplacian_zero_gradient_bracket",
    "pucci",
    "pde_residual",
    "discrete_jet",
    "grid_jet_tables",
]


@dataclass(frozen=True)
class PointJet:
    """First and second derivatives of a scalar field at one point."""

    grad: np.ndarray
    hess: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grad, dtype=float).reshape(-1)
        h = np.asarray(self.hess, dtype=float)
        h = h.reshape(g.size, g.size)
        object.__setattr__(self, "grad", g)
        object.__setattr__(self, "hess", h)
        asym = np.abs(h - h.T).max() if h.size else 0.0
        scale = 1.0 + np.abs(h).max() if h.size else 1.0
        if asym > 1e-12 * scale:
            raise ParameterError(f"Hessian not symmetric: |H - H^T| = {asym:g}")

    @property
    def n(self) -> int:
        return self.grad.size

    def scaled(self, t: float) -> "PointJet":
        return PointJet(t * self.grad, t * self.hess)


@dataclass(frozen=True)
class EllipticityBounds:
    """Pucci ellipticity constants of the normalized p-Laplacian."""

    lambda_N: float
    Lambda_N: float

    def __post_init__(self):
        if not (0 < self.lambda_N <= self.Lambda_N):
            raise ParameterError("need 0 < lambda_N <= Lambda_N")

    @staticmethod
    def from_p(p: float) -> "EllipticityBounds":
        return EllipticityBounds(min(1.0, p - 1.0), max(1.0, p - 1.0))


def normalized_inf_laplacian(jet: PointJet) -> float:
    """Second derivative in the gradient direction, <H g, g>/|g|^2."""
    g = jet.grad
    g2 = float(g @ g)
    if g2 == 0.0:
        raise VanishingGradient("infinity-Laplacian undefined at |grad| = 0")
    return float(g @ jet.hess @ g) / g2


def normalized_p_laplacian(jet: PointJet, p: float) -> float:
    """trace(H) + (p-2) <H ghat, ghat>; depends on grad only through its
    direction."""
    return float(np.trace(jet.hess)) + (p - 2.0) * normalized_inf_laplacian(jet)


def p_laplacian_zero_gradient_bracket(hess, p: float) -> Tuple[float, float]:
    """Diagnostic envelope of the operator where the gradient vanishes.

    With no direction available, <H ghat, ghat> can take any value between
    the extreme eigenvalues, so the operator value lies in

        [trace(H) + (p-2) lam_min, trace(H) + (p-2) lam_max]   (p >= 2)

    with the roles swapped for 1 < p < 2.  Both endpoints are reported
    rather than choosing one; the solver itself never needs this (it
    regularizes the direction), diagnostics do.
    """
    if not p > 1:
        raise ParameterError("need p > 1")
    h = np.asarray(hess, dtype=float)
    ev = _sym_eigvals(h)
    tr = float(np.trace(h))
    a = tr + (p - 2.0) * float(ev.min())
    b = tr + (p - 2.0) * float(ev.max())
    return (min(a, b), max(a, b))


def _sym_eigvals(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    if n == 1:
        return np.array([h[0, 0]])
    if n == 2:
        # closed-form quadratic; cheaper and exact for the desk-scale case
        tr = h[0, 0] + h[1, 1]
        disc = np.sqrt(max((h[0, 0] - h[1, 1]) ** 2 + 4.0 * h[0, 1] * h[1, 0], 0.0))
        return np.array([(tr - disc) / 2.0, (tr + disc) / 2.0])
    return np.linalg.eigvalsh(h)


def pucci(hess, lam: float, Lam: float, sign: str = "minus") -> float:
    """Pucci extremal operator of a symmetric matrix.

    minus: lam * sum(e_i > 0) + Lam * sum(e_i < 0); plus with roles swapped.
    """
    if not (0 < lam <= Lam):
        raise ParameterError("need 0 < lam <= Lam")
    h = np.asarray(hess, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ParameterError("Pucci operators take a square matrix")
    if np.abs(h - h.T).max() > 1e-12 * (1.0 + np.abs(h).max()):
        raise ParameterError("Pucci operators take a symmetric matrix")
    ev = _sym_eigvals(h)
    pos = ev[ev > 0].sum()
    neg = ev[ev < 0].sum()
    if sign == "minus":
        return float(lam * pos + Lam * neg)
    if sign == "plus":
        return float(Lam * pos + lam * neg)
    raise ParameterError(f"sign must be 'minus' or 'plus', got {sign!r}")


class JetField(Protocol):
    def value_and_jet(self, x) -> Tuple[float, PointJet]: ...


def _absorption(u: float, m: float) -> float:
    if m == 0.0:
        return 1.0 if u > 0.0 else 0.0
    return max(u, 0.0) ** m


def pde_residual(
    field: JetField,
    x,
    params: StructuralParams,
    thiele: ThieleSpec,
    eps_g: float = 0.0,
    with_flag: bool = False,
):
    """Residual |grad u|^gamma Lap_p^N u - a(x) (u_+)^m at one point.

    eps_g > 0 switches on the grid regularization: the gradient direction is
    g / sqrt(|g|^2 + eps_g^2) and the degenerate weight uses the same
    regularized magnitude.  With eps_g = 0 (analytic jets) a vanishing
    gradient is only tolerated where the jet is identically zero (dead
    region, both sides vanish); elsewhere it raises VanishingGradient.

    with_flag=True returns (residual, singular) where singular marks
    gamma < 0 evaluations with |grad| below the regularization floor.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    u, jet = field.value_and_jet(x)
    g = jet.grad
    h = jet.hess
    gn = float(np.sqrt(g @ g))
    gamma, p, m = params.gamma, params.p, params.m

    if eps_g > 0.0:
        w2 = gn * gn + eps_g * eps_g
        w = np.sqrt(w2)
        lap = float(np.trace(h)) + (p - 2.0) * float(g @ h @ g) / w2
        diffusion = w**gamma * lap
    else:
        if gn == 0.0:
            if np.abs(h).max(initial=0.0) == 0.0:
                diffusion = 0.0
            else:
                raise VanishingGradient(
                    "analytic residual at |grad| = 0 with curvature present"
                )
        else:
            lap = float(np.trace(h)) + (p - 2.0) * float(g @ h @ g) / (gn * gn)
            diffusion = gn**gamma * lap

    res = diffusion - float(thiele(x)) * _absorption(u, m)
    if with_flag:
        singular = gamma < 0.0 and gn < eps_g
        return res, singular
    return res


# --------------------------------------------------------------------------
# Discrete jets


def discrete_jet(values: np.ndarray, index, h: float) -> PointJet:
    """Second-order central-difference jet of a grid function.

    1-D arrays take an integer index; 2-D arrays an (i, j) pair.  Mixed
    second derivatives use the symmetric four-corner stencil.  Raises
    StencilOutOfDomain when any neighbor would fall off the array.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        i = int(index)
        if not 1 <= i <= v.size - 2:
            raise StencilOutOfDomain(f"index {i} too close to the array edge")
        grad = np.array([(v[i + 1] - v[i - 1]) / (2.0 * h)])
        hess = np.array([[(v[i + 1] - 2.0 * v[i] + v[i - 1]) / h**2]])
        return PointJet(grad, hess)
    if v.ndim == 2:
        i, j = (int(index[0]), int(index[1]))
        if not (1 <= i <= v.shape[0] - 2 and 1 <= j <= v.shape[1] - 2):
            raise StencilOutOfDomain(f"index {(i, j)} too close to the array edge")
        gx = (v[i + 1, j] - v[i - 1, j]) / (2.0 * h)
        gy = (v[i, j + 1] - v[i, j - 1]) / (2.0 * h)
        hxx = (v[i + 1, j] - 2.0 * v[i, j] + v[i - 1, j]) / h**2
        hyy = (v[i, j + 1] - 2.0 * v[i, j] + v[i, j - 1]) / h**2
        hxy = (
            v[i + 1, j + 1] + v[i - 1, j - 1] - v[i + 1, j - 1] - v[i - 1, j + 1]
        ) / (4.0 * h**2)
        return PointJet(np.array([gx, gy]), np.array([[hxx, hxy], [hxy, hyy]]))
    raise ParameterError("discrete_jet supports 1-D and 2-D grids")


def grid_jet_tables(values: np.ndarray, h: float) -> dict:
    """Vectorized jets at every node with a full stencil.

    Returns arrays the same shape as ``values`` (edges NaN): gradient
    components, gradient magnitude, Hessian entries and Frobenius norm.
    """
    v = np.asarray(values, dtype=float)
    out = {}
    if v.ndim == 1:
        gx = np.full_like(v, np.nan)
        hxx = np.full_like(v, np.nan)
        gx[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
        hxx[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h**2
        out["gx"] = gx
        out["gnorm"] = np.abs(gx)
        out["hxx"] = hxx
        out["hfrob"] = np.abs(hxx)
        return out
    if v.ndim != 2:
        raise ParameterError("grid_jet_tables supports 1-D and 2-D grids")
    gx = np.full_like(v, np.nan)
    gy = np.full_like(v, np.nan)
    hxx = np.full_like(v, np.nan)
    hyy = np.full_like(v, np.nan)
    hxy = np.full_like(v, np.nan)
    c = (slice(1, -1), slice(1, -1))
    gx[c] = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2.0 * h)
    gy[c] = (v[1:-1, 2:] - v[1:-1, :-2]) / (2.0 * h)
    hxx[c] = (v[2:, 1:-1] - 2.0 * v[c] + v[:-2, 1:-1]) / h**2
    hyy[c] = (v[1:-1, 2:] - 2.0 * v[c] + v[1:-1, :-2]) / h**2
    hxy[c] = (v[2:, 2:] + v[:-2, :-2] - v[2:, :-2] - v[:-2, 2:]) / (4.0 * h**2)
    out["gx"], out["gy"] = gx, gy
    out["gnorm"] = np.sqrt(gx**2 + gy**2)
    out["hxx"], out["hyy"], out["hxy"] = hxx, hyy, hxy
    out["hfrob"] = np.sqrt(hxx**2 + hyy**2 + 2.0 * hxy**2)
    return out
