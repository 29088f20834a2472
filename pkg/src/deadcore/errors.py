"""Exception taxonomy shared by all deadcore modules."""


class DeadcoreError(Exception):
    """Base class for all package errors."""


class ParameterError(DeadcoreError, ValueError):
    """Structural parameters or Thiele bounds outside the admissible range."""


class CriticalRegime(ParameterError):
    """m = gamma + 1: the growth exponent beta is undefined and the
    maximum-principle dichotomy applies instead."""


class UnsupportedGameRange(ParameterError):
    """Game weights / DPP requested for p < 2."""


class VanishingGradient(DeadcoreError, ValueError):
    """Exact operator evaluation requested at a point with |grad| = 0."""


class NonSmoothPoint(DeadcoreError, ValueError):
    """Analytic jet requested exactly on the core sphere where the profile
    is not twice differentiable (beta < 2)."""


class StencilOutOfDomain(DeadcoreError, IndexError):
    """Finite-difference stencil would read outside the grid."""


class GridMismatch(DeadcoreError, ValueError):
    """Two fields live on different grids."""


class NotApplicable(DeadcoreError, ValueError):
    """Hypothesis of a closed-form construction violated (e.g. the Liouville
    growth bound)."""


class InsufficientSignal(DeadcoreError, ValueError):
    """Fit radii carry no usable signal (sup below noise floor, or no free
    boundary near the requested center)."""


class NoFreeBoundary(DeadcoreError, ValueError):
    """Positivity-set analysis requested on a field without a free boundary."""


class DomainTooCoarse(DeadcoreError, ValueError):
    """No node is far enough from the free boundary for the requested
    statistic."""


class ConfigError(DeadcoreError, ValueError):
    """Malformed experiment config (CLI exit code 2)."""


class ConvergenceError(DeadcoreError, RuntimeError):
    """Iteration exceeded max_iter without meeting tolerance (CLI exit 3)."""


class GameValueMismatch(DeadcoreError, AssertionError):
    """Monte Carlo mean payoff disagrees with the DPP value beyond the
    statistical tolerance."""
