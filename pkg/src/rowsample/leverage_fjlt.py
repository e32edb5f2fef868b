"""
Fast Johnson-Lindenstrauss transform and leverage-score estimation without an SVD.

The transform is a subsampled randomized Hadamard transform
``R = sqrt(M/r) P H D`` on the zero-padded length ``M = 2^ceil(log2 m)``:
``D`` flips signs at random, ``H`` is the orthonormal Walsh-Hadamard matrix
in Sylvester order and ``P`` keeps ``r`` rows drawn uniformly with
replacement.

Leverage scores ``||u_t||^2 = e_t^T A A^+ e_t`` are estimated by replacing
``A^+`` with ``(R A)^+ R``.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dense_core import as_matrix, pseudo_inverse, svd
from .errors import InvalidInputError, NumericalFailureError, PreconditionError
from .rng import make_rng, split_seed
from .row_sampler import LEVERAGE_APPROX, SamplingDistribution

JLT_CONSTANT = 1.0
# per-row accuracy constant of the estimate, |w~_t - ||u_t||^2| <= c eps ||u_t||
SANDWICH_CONSTANT = 3.5
# sum bound constant, |sum_t w~_t - d| <= c eps d
SUM_CONSTANT = 1.0 + math.sqrt(7.0)


def fwht(x):
    """Orthonormal Walsh-Hadamard transform along axis 0 (Sylvester order).

    Length along axis 0 must be a power of two. Costs ``O(M log M)`` per column.
    """
    x = np.array(x, dtype=np.float64)
    n = x.shape[0]
    if n & (n - 1) or n == 0:
        raise InvalidInputError(f"Hadamard length must be a power of two, got {n}")
    tail = x.shape[1:]
    h = 1
    while h < n:
        pairs = x.reshape((n // (2 * h), 2, h) + tail)
        lo, hi = pairs[:, 0], pairs[:, 1]
        diff = lo - hi
        lo += hi
        hi[...] = diff
        h *= 2
    x /= math.sqrt(n)
    return x


def next_power_of_two(m):
    return 1 << max(0, (int(m) - 1).bit_length())


def jlt_dimension(m, d, epsilon, delta, c=JLT_CONSTANT):
    """``ceil((c/eps^2) (d ln(d/eps) + ln(d+m)) ln(1/delta))``."""
    return max(1, math.ceil(c / epsilon**2 * (d * math.log(d / epsilon) + math.log(d + m)) * math.log(1.0 / delta)))


@dataclass(frozen=True)
class FjltOperator:
    m_logical: int
    m_padded: int
    r_target: int
    seed: int
    signs: np.ndarray = field(repr=False)
    rows: np.ndarray = field(repr=False)

    @property
    def scale(self):
        return math.sqrt(self.m_padded / self.r_target)

    @property
    def shape(self):
        return (self.r_target, self.m_logical)

    def apply(self, a):
        return apply_fjlt(self, a)

    def apply_transpose(self, x):
        return apply_fjlt_transpose(self, x)

    def dense(self):
        """Materialize ``R`` as an r-by-m array (test-scale only)."""
        return self.apply(np.eye(self.m_logical))


def build_fjlt(m, d, epsilon, delta, seed, c_jlt=JLT_CONSTANT):
    if m < 1 or d < 1:
        raise InvalidInputError("m and d must be positive")
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise InvalidInputError("epsilon and delta must be in (0, 1)")
    m_padded = next_power_of_two(m)
    r = jlt_dimension(m, d, epsilon, delta, c_jlt)
    if r >= m_padded:
        warnings.warn(f"target dimension {r} is not smaller than the padded length {m_padded}", RuntimeWarning,
                      stacklevel=2)
    rng = make_rng(seed)
    signs = rng.integers(0, 2, size=m_padded) * 2.0 - 1.0
    rows = rng.integers(0, m_padded, size=r)
    return FjltOperator(m_logical=int(m), m_padded=m_padded, r_target=r, seed=int(seed), signs=signs, rows=rows)


def apply_fjlt(op, a):
    """``R A`` for an m-by-n ``a`` (a vector is treated as one column)."""
    arr = np.asarray(a, dtype=np.float64)
    vector = arr.ndim == 1
    if vector:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] != op.m_logical:
        raise InvalidInputError(f"expected {op.m_logical} rows, got shape {np.shape(a)}")
    padded = np.zeros((op.m_padded, arr.shape[1]))
    padded[: op.m_logical] = arr * op.signs[: op.m_logical, None]
    out = fwht(padded)[op.rows] * op.scale
    return out[:, 0] if vector else out


def apply_fjlt_transpose(op, x):
    """``X R`` for an n-by-r ``x``: scatter into the padded length, transform, unsign."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != op.r_target:
        raise InvalidInputError(f"expected {op.r_target} columns, got shape {x.shape}")
    z = np.zeros((op.m_padded, x.shape[0]))
    np.add.at(z, op.rows, x.T)
    out = fwht(z) * (op.signs[:, None] * op.scale)
    return out[: op.m_logical].T


@dataclass(frozen=True)
class LeverageEstimate:
    """Raw estimates ``w_tilde``, thresholded weights ``w`` and probabilities ``p``."""

    w_tilde: np.ndarray
    w: np.ndarray
    p: SamplingDistribution
    epsilon_used: float
    sum_w_tilde: float
    r_target: int = 0
    seed: int | None = None


def leverage_epsilon(m, d):
    """Accuracy ``(1/2) sqrt(d ln^2 m / m)`` used for the embedding."""
    return 0.5 * math.sqrt(d * math.log(m) ** 2 / m)


def check_leverage_size(m, d):
    if m < 2 or m < 4.0 / 9.0 * d * math.log(m) ** 2:
        raise PreconditionError(f"need m >= (4/9) d ln^2 m; got m={m}, d={d}")


def sandwich_inversion_constant(c=SANDWICH_CONSTANT):
    """Factor ``c1`` with ``||u_t||^2 <= c1 * w_t`` whenever the per-row sandwich holds."""
    return 1.0 + c**2 / 2.0 + c / 2.0 * math.sqrt(c**2 + 4.0)


def leverage_from_embedding(a, embedding, epsilon, seed=None):
    """Leverage estimates from any embedding exposing ``apply`` and ``apply_transpose``.

    ``w~_t = a_t^T X e_t`` with ``X = (R A)^+ R``, ``w_t = max(eps^2, w~_t)``
    and ``p_t = w_t / sum w``. The probabilities carry the certificate
    ``beta = d / (c1 sum w)`` that holds when the per-row sandwich does.
    """
    a = as_matrix(a)
    ra = embedding.apply(a)
    if svd(ra).rank < a.shape[1]:
        raise NumericalFailureError("embedded matrix is rank deficient")
    x = embedding.apply_transpose(pseudo_inverse(ra))
    w_tilde = np.einsum("ti,it->t", a, x)
    w = np.maximum(epsilon**2, w_tilde)
    total = float(w.sum())
    beta = min(1.0, a.shape[1] / (sandwich_inversion_constant() * total))
    dist = SamplingDistribution(p=w / total, family=LEVERAGE_APPROX, beta_certificate=beta)
    return LeverageEstimate(w_tilde=w_tilde, w=w, p=dist, epsilon_used=epsilon,
                            sum_w_tilde=float(w_tilde.sum()), r_target=getattr(embedding, "r_target", 0),
                            seed=seed)


def estimate_leverage_probabilities(a, delta, seed, c_jlt=JLT_CONSTANT):
    """Approximate leverage-score sampling probabilities in sub-SVD time.

    Requires full column rank and ``m >= (4/9) d ln^2 m``. With probability
    at least ``1 - delta``, ``p_t >= ||u_t||^2 / (c d ln^2 m)`` for all rows.
    """
    a = as_matrix(a)
    m, d = a.shape
    check_leverage_size(m, d)
    if not 0 < delta < 1:
        raise InvalidInputError(f"delta must be in (0, 1), got {delta}")
    eps = leverage_epsilon(m, d)
    for attempt in range(2):
        op_seed = seed if attempt == 0 else split_seed(seed, 1)
        op = build_fjlt(m, d, eps, delta, op_seed, c_jlt)
        try:
            return leverage_from_embedding(a, op, eps, seed=int(op_seed))
        except NumericalFailureError:
            continue
    raise NumericalFailureError("embedded matrix stayed rank deficient after a retry")


class ExactEmbedding:
    """Lossless stand-in for an FJLT: ``R`` is the identity."""

    def __init__(self, m):
        self.m_logical = self.r_target = int(m)

    def apply(self, a):
        return np.asarray(a, dtype=np.float64)

    def apply_transpose(self, x):
        return np.asarray(x, dtype=np.float64)


@dataclass(frozen=True)
class AccuracyReport:
    """Per-row checks of leverage estimates against exact leverage scores.

    ``min_c`` is the smallest sandwich constant that every row satisfies.
    ``coverage_ratio`` is ``min_t p_t d ln^2 m / ||u_t||^2`` over rows with
    nonzero leverage.
    """

    sandwich_violations: int
    floor_violations: int
    inverted_violations: int
    rows: int
    min_c: float
    coverage_ratio: float
    sum_w_tilde: float
    sum_bound: tuple

    @property
    def sandwich_violation_fraction(self):
        return self.sandwich_violations / self.rows

    @property
    def sum_within_bound(self):
        return self.sum_bound[0] <= self.sum_w_tilde <= self.sum_bound[1]


def leverage_accuracy_report(est, a, c=SANDWICH_CONSTANT, c_sum=SUM_CONSTANT):
    a = as_matrix(a)
    m = a.shape[0]
    f = svd(a)
    d = f.rank
    lev = np.einsum("ij,ij->i", f.u, f.u)
    norm_u = np.sqrt(lev)
    eps = est.epsilon_used
    wt = est.w_tilde
    slack = 1e-12
    sandwich = np.abs(wt - lev) > c * eps * norm_u + slack
    floor = wt < -(c**2) * eps**2 / 4.0 - slack
    root = np.sqrt(np.maximum(c**2 * eps**2 + 4.0 * wt, 0.0))
    lo = wt + 0.5 * c**2 * eps**2 - 0.5 * c * eps * root
    hi = wt + 0.5 * c**2 * eps**2 + 0.5 * c * eps * root
    inverted = (lev < lo - slack) | (lev > hi + slack)
    with np.errstate(divide="ignore", invalid="ignore"):
        per_row_c = np.where(norm_u > 0, np.abs(wt - lev) / (eps * norm_u), np.where(wt == lev, 0.0, np.inf))
        nz = lev > 1e-300
        coverage = float(np.min(est.p.p[nz] * d * math.log(m) ** 2 / lev[nz]))
    return AccuracyReport(
        sandwich_violations=int(sandwich.sum()),
        floor_violations=int(floor.sum()),
        inverted_violations=int(inverted.sum()),
        rows=m,
        min_c=float(per_row_c.max()),
        coverage_ratio=coverage,
        sum_w_tilde=est.sum_w_tilde,
        sum_bound=((1 - c_sum * eps) * d, (1 + c_sum * eps) * d),
    )


@dataclass(frozen=True)
class EmbeddingChecks:
    """Measured quantities for an embedding ``R`` of an orthonormal ``U``.

    ``subspace`` is ``||I - U^T R^T R U||``, ``max_basis_norm`` is
    ``max_i ||R e_i||`` and ``max_cross`` is
    ``max_i |e_i^T U U^T R^T R e_i - ||U^T e_i||^2| / ||U^T e_i||``.
    """

    subspace: float
    max_basis_norm: float
    max_cross: float

    def hold(self, epsilon):
        return self.subspace <= epsilon and self.max_basis_norm <= 1 + epsilon and self.max_cross <= epsilon


def embedding_checks(op, u):
    """Dense evaluation of the embedding conditions (test-scale only)."""
    u = as_matrix(u)
    ru = op.apply(u)
    subspace = float(np.linalg.norm(np.eye(u.shape[1]) - ru.T @ ru, 2))
    r = op.dense()
    basis = float(np.sqrt(np.max(np.einsum("ij,ij->j", r, r))))
    # e_i^T U U^T R^T R e_i = (R U u_i) . (R e_i)
    cross = np.einsum("ji,ji->i", ru @ u.T, r)
    lev = np.einsum("ij,ij->i", u, u)
    norm_u = np.sqrt(lev)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(norm_u > 0, np.abs(cross - lev) / norm_u, 0.0)
    return EmbeddingChecks(subspace=subspace, max_basis_norm=basis, max_cross=float(rel.max()))
