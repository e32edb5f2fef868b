"""
Row-sampling probability families and the sampling operator Q.

Q is never materialized. A :class:`RowSampleOperator` stores the sampled
row indices (0-based) and the rescale factors ``1/sqrt(r p_t)`` so that
``Q A`` is just a gather and a row scaling.
"""
from dataclasses import dataclass

import numpy as np

from .dense_core import as_matrix, as_vector, frobenius_norm, svd
from .errors import InvalidInputError
from .rng import make_rng

ROW_NORM = "row-norm"
LEVERAGE_EXACT = "leverage-exact"
COMBINED_RESCALED = "combined-rescaled"
REGRESSION = "regression"
LEVERAGE_APPROX = "leverage-approx"

REGRESSION_RESIDUAL_FLOOR = 1e-24


@dataclass(frozen=True)
class SamplingDistribution:
    """Probabilities over the m rows, tagged with the rule that built them.

    ``beta_certificate`` is the factor by which ``p`` is known to dominate
    the target score of its family.
    """

    p: np.ndarray
    family: str
    beta_certificate: float = 1.0

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64).reshape(-1)
        if p.size == 0 or np.any(~np.isfinite(p)) or np.any(p < 0):
            raise InvalidInputError("probabilities must be finite and non-negative")
        total = p.sum()
        if total <= 0:
            raise InvalidInputError("probabilities must not all be zero")
        if not 0 < self.beta_certificate <= 1:
            raise InvalidInputError(f"beta certificate must be in (0, 1], got {self.beta_certificate}")
        p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def m(self):
        return self.p.shape[0]


def _from_scores(scores, family, beta=1.0):
    return SamplingDistribution(p=scores / scores.sum(), family=family, beta_certificate=beta)


def row_norm_probabilities(a):
    """``p_t = ||a_t||^2 / ||A||_F^2``."""
    a = as_matrix(a)
    scale = float(np.max(np.abs(a)))
    if scale > 0:
        a = a / scale
    scores = np.einsum("ij,ij->i", a, a)
    if not scores.sum() > 0:
        raise InvalidInputError("row-norm probabilities need a nonzero matrix")
    return _from_scores(scores, ROW_NORM)


def leverage_scores(a):
    """Squared row norms of the left singular matrix at numerical rank.

    Rows of ``a`` that are identically zero get exactly zero leverage.
    Returns ``(scores, rank)``.
    """
    a = as_matrix(a)
    f = svd(a)
    if f.rank == 0:
        raise InvalidInputError("leverage scores need a nonzero matrix")
    scores = np.einsum("ij,ij->i", f.u, f.u)
    scores[~np.any(a != 0, axis=1)] = 0.0
    return scores, f.rank


def leverage_probabilities_exact(a):
    """``p_t = ||u_t||^2 / k`` with k the numerical rank of ``a``."""
    scores, _ = leverage_scores(a)
    return _from_scores(scores, LEVERAGE_EXACT)


def combined_rescaled_probabilities(a, b, lambda_a2, lambda_b2, lambda_bounds=(1.0, 1.0)):
    """Probabilities for approximating ``A^T B`` from spectral norm estimates.

    ``p_t`` is proportional to ``||a_t||^2 / lambda_a2 + ||b_t||^2 / lambda_b2``.
    If both estimates are known to lie in ``[lo ||.||^2, hi ||.||^2]`` with
    ``lambda_bounds = (lo, hi)``, the result dominates the exact-norm
    probabilities with ``beta = lo / hi``; for ``(1 - eps, 1 + eps)`` this
    is ``(1 - eps) / (1 + eps)``.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[0] != b.shape[0]:
        raise InvalidInputError(f"a and b must have the same number of rows, got {a.shape[0]} and {b.shape[0]}")
    if not (lambda_a2 > 0 and lambda_b2 > 0):
        raise InvalidInputError("spectral norm estimates must be positive")
    lo, hi = lambda_bounds
    if not 0 < lo <= hi:
        raise InvalidInputError(f"invalid accuracy interval {lambda_bounds}")
    scores = np.einsum("ij,ij->i", a, a) / lambda_a2 + np.einsum("ij,ij->i", b, b) / lambda_b2
    total = frobenius_norm(a) ** 2 / lambda_a2 + frobenius_norm(b) ** 2 / lambda_b2
    if not total > 0:
        raise InvalidInputError("a and b are both zero")
    return SamplingDistribution(p=scores / total, family=COMBINED_RESCALED, beta_certificate=min(1.0, lo / hi))


def regression_probabilities_exact(a, y):
    """Three-part mixture of leverage, joint leverage/residual and residual scores.

    With ``e = y - A A^+ y`` and k the numerical rank,
    ``p_t = (||u_t||^2/k + (||u_t||^2 + e_t^2/e.e)/(k+1) + e_t^2/e.e) / 3``
    which certifies ``beta = 1/3``. When ``e.e <= 1e-24 ||y||^2`` the residual
    terms carry no information and plain leverage probabilities are returned.
    """
    a = as_matrix(a)
    y = as_vector(y, a.shape[0])
    if not np.any(a) and not np.any(y):
        raise InvalidInputError("regression probabilities need a nonzero problem")
    f = svd(a)
    if f.rank == 0:
        raise InvalidInputError("regression probabilities need a nonzero matrix")
    lev = np.einsum("ij,ij->i", f.u, f.u)
    lev[~np.any(a != 0, axis=1)] = 0.0
    k = f.rank
    resid = y - f.u @ (f.u.T @ y)
    ee = float(resid @ resid)
    if ee <= REGRESSION_RESIDUAL_FLOOR * float(y @ y):
        return _from_scores(lev, REGRESSION)
    r2 = resid**2 / ee
    p = (lev / k + (lev + r2) / (k + 1) + r2) / 3.0
    return SamplingDistribution(p=p, family=REGRESSION, beta_certificate=1.0 / 3.0)


@dataclass(frozen=True)
class RowSampleOperator:
    """``r`` i.i.d. draws from ``dist``; row j of ``Q`` is ``scales[j] * e_{indices[j]}``."""

    indices: np.ndarray
    scales: np.ndarray
    r: int
    seed: int
    dist: SamplingDistribution

    def gram(self):
        """``Q^T Q`` as a dense m-by-m diagonal (test-scale only)."""
        diag = np.zeros(self.dist.m)
        np.add.at(diag, self.indices, self.scales**2)
        return np.diag(diag)


def draw_sample_operator(dist, r, seed):
    """Draw ``r`` row indices i.i.d. from ``dist`` (with replacement).

    Inverse-CDF sampling: cumulative sums once, then a binary search per draw.
    """
    if int(r) != r or r < 1:
        raise InvalidInputError(f"r must be a positive integer, got {r}")
    r = int(r)
    cdf = np.cumsum(dist.p)
    last = int(np.flatnonzero(dist.p > 0)[-1])
    u = make_rng(seed).random(r) * cdf[-1]
    indices = np.minimum(np.searchsorted(cdf, u, side="right"), last)
    scales = 1.0 / np.sqrt(r * dist.p[indices])
    return RowSampleOperator(indices=indices, scales=scales, r=r, seed=int(seed), dist=dist)


def apply_sample(op, a):
    """``Q A``: row j is ``scales[j] * a[indices[j]]``."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        if op.indices.size and op.indices.max() >= a.shape[0]:
            raise InvalidInputError("sample index out of range")
        return a[op.indices] * op.scales
    a = as_matrix(a)
    if op.indices.size and op.indices.max() >= a.shape[0]:
        raise InvalidInputError(f"sample index {op.indices.max()} out of range for {a.shape[0]} rows")
    return a[op.indices] * op.scales[:, None]
