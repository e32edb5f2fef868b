"""
Scalar and matrix concentration inequalities, and the row-sample sizes they imply.

All tail probabilities are clamped to [0, 1]. Sample sizes are the ceiling of
the corresponding lower-bound condition, with natural logarithms throughout.
"""
import math
from dataclasses import dataclass

from .errors import InvalidInputError


@dataclass(frozen=True)
class BoundParams:
    """Parameters of an average ``Z_n`` of ``n`` i.i.d. zero-mean variables.

    ``gamma`` bounds each variable almost surely and ``s2`` bounds its
    variance. ``d1`` and ``d2`` are the matrix dimensions; for symmetric
    matrices only ``d1`` is used.
    """

    n: int
    epsilon: float
    gamma: float = 1.0
    s2: float = 1.0
    d1: int = 1
    d2: int | None = None

    def __post_init__(self):
        if self.n < 1 or self.d1 < 1 or (self.d2 is not None and self.d2 < 1):
            raise InvalidInputError("n and matrix dimensions must be positive")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise InvalidInputError(f"epsilon must be positive and finite, got {self.epsilon}")
        if not (self.gamma > 0 and self.s2 > 0):
            raise InvalidInputError("gamma and s2 must be positive")


def _clamp(p):
    return min(1.0, max(0.0, p))


def _bernstein_exponent(p):
    return p.n * p.epsilon**2 / (2.0 * p.s2 + 2.0 * p.gamma * p.epsilon / 3.0)


def scalar_chernoff_bound(p):
    """Hoeffding bound ``P[|Z_n| > eps] <= 2 exp(-n eps^2 / (2 gamma^2))``."""
    return _clamp(2.0 * math.exp(-p.n * p.epsilon**2 / (2.0 * p.gamma**2)))


def scalar_bernstein_bound(p):
    return _clamp(2.0 * math.exp(-_bernstein_exponent(p)))


def matrix_chernoff_bound(p):
    """Ahlswede-Winter bound ``2d exp(-n eps^2 / (4 gamma^2))`` for d-by-d symmetric sums."""
    return _clamp(2.0 * p.d1 * math.exp(-p.n * p.epsilon**2 / (4.0 * p.gamma**2)))


def matrix_bernstein_bound(p):
    """Non-commutative Bernstein bound.

    The prefactor is ``2 d1`` for symmetric d1-by-d1 summands (``d2`` unset)
    and ``d1 + d2`` for rectangular ones.
    """
    prefactor = 2 * p.d1 if p.d2 is None else p.d1 + p.d2
    return _clamp(prefactor * math.exp(-_bernstein_exponent(p)))


def frobenius_baseline_bound(rho1, rho2, beta, epsilon, r):
    """Quadratic-in-stable-rank bound ``exp(-r beta^2 eps^2 / (16 rho1 rho2))``.

    Kept as the comparison point for the Bernstein-based sample sizes.
    """
    for name, value in (("rho1", rho1), ("rho2", rho2), ("beta", beta), ("epsilon", epsilon), ("r", r)):
        if not value > 0:
            raise InvalidInputError(f"{name} must be positive, got {value}")
    return _clamp(math.exp(-r * beta**2 * epsilon**2 / (16.0 * rho1 * rho2)))


@dataclass(frozen=True)
class SampleSizePlan:
    r: int
    kind: str
    beta: float
    epsilon: float
    delta: float
    rho_terms: tuple
    dims: tuple

    def recompute(self):
        """Re-evaluate the generating formula from the stored fields."""
        return _FORMULAS[self.kind](self.rho_terms, self.dims, self.beta, self.epsilon, self.delta)


def _check_common(beta, epsilon, delta):
    if not 0 < beta <= 1:
        raise InvalidInputError(f"beta must be in (0, 1], got {beta}")
    if not 0 < epsilon < 1:
        raise InvalidInputError(f"epsilon must be in (0, 1), got {epsilon}")
    if not 0 < delta < 1:
        raise InvalidInputError(f"delta must be in (0, 1), got {delta}")


def _check_dim(d, name="d"):
    if int(d) != d or d < 1:
        raise InvalidInputError(f"{name} must be a positive integer, got {d}")


def _r_symmetric(rho_terms, dims, beta, epsilon, delta):
    (rho,), (d,) = rho_terms, dims
    return math.ceil(4.0 * rho / (beta * epsilon**2) * math.log(2.0 * d / delta))


def _r_identity(rho_terms, dims, beta, epsilon, delta):
    (d,) = dims
    return math.ceil(4.0 * (d - beta) / (beta * epsilon**2) * math.log(2.0 * d / delta))


def _r_asymmetric(rho_terms, dims, beta, epsilon, delta):
    (rho1, rho2), (d1, d2) = rho_terms, dims
    return math.ceil(8.0 * (rho1 + rho2) / (beta * epsilon**2) * math.log(2.0 * (d1 + d2) / delta))


def _r_regression(rho_terms, dims, beta, epsilon, delta):
    (d,) = dims
    return math.ceil(8.0 * (d + 1) / (beta * epsilon**2) * math.log(2.0 * (d + 1) / delta))


_FORMULAS = {
    "symmetric": _r_symmetric,
    "identity": _r_identity,
    "asymmetric": _r_asymmetric,
    "regression": _r_regression,
}


def _plan(kind, rho_terms, dims, beta, epsilon, delta):
    rho_terms = tuple(float(x) for x in rho_terms)
    dims = tuple(int(x) for x in dims)
    r = _FORMULAS[kind](rho_terms, dims, beta, epsilon, delta)
    return SampleSizePlan(r=max(1, r), kind=kind, beta=beta, epsilon=epsilon, delta=delta,
                          rho_terms=rho_terms, dims=dims)


def sample_size_symmetric(rho, beta, epsilon, delta, d):
    """Rows needed for ``||S^2 - S U^T Q^T Q U S|| <= eps ||S||^2``:
    ``ceil(4 rho / (beta eps^2) * ln(2d / delta))``.
    """
    _check_common(beta, epsilon, delta)
    _check_dim(d)
    if not rho >= 1:
        raise InvalidInputError(f"stable rank must be at least 1, got {rho}")
    return _plan("symmetric", (rho,), (d,), beta, epsilon, delta)


def sample_size_identity(d, beta, epsilon, delta):
    """Rows needed for ``||I - U^T Q^T Q U|| <= eps`` under leverage sampling."""
    _check_common(beta, epsilon, delta)
    _check_dim(d)
    if beta >= d:
        raise InvalidInputError(f"beta must be smaller than d, got beta={beta}, d={d}")
    return _plan("identity", (), (d,), beta, epsilon, delta)


def sample_size_asymmetric(rho1, rho2, beta, epsilon, delta, d1, d2):
    _check_common(beta, epsilon, delta)
    _check_dim(d1, "d1")
    _check_dim(d2, "d2")
    if not (rho1 >= 1 and rho2 >= 1):
        raise InvalidInputError("stable ranks must be at least 1")
    return _plan("asymmetric", (rho1, rho2), (d1, d2), beta, epsilon, delta)


def sample_size_regression(d, beta, epsilon, delta):
    """``ceil(8 (d+1) / (beta eps^2) * ln(2 (d+1) / delta))`` rows for sketch-and-solve."""
    _check_common(beta, epsilon, delta)
    _check_dim(d)
    return _plan("regression", (), (d,), beta, epsilon, delta)
