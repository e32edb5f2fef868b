"""Exact and sketch-and-solve least squares."""
from dataclasses import dataclass

import numpy as np

from .dense_core import as_matrix, as_vector, pseudo_inverse, spectral_norm_exact, svd
from .errors import InvalidInputError, NumericalFailureError
from .rng import split_seed
from .row_sampler import apply_sample, draw_sample_operator, regression_probabilities_exact
from .tail_bounds import sample_size_regression

STRUCTURAL_TOL = 1e-8


@dataclass(frozen=True)
class RegressionSolution:
    x: np.ndarray
    residual: np.ndarray
    objective: float
    r_used: int | None = None
    seed: int | None = None


def _solution(a, y, x, r_used=None, seed=None):
    residual = y - a @ x
    return RegressionSolution(x=x, residual=residual, objective=float(np.linalg.norm(residual)),
                              r_used=r_used, seed=seed)


def exact_least_squares(a, y):
    """Minimum-norm minimizer ``x* = A^+ y`` of ``||A x - y||``."""
    a = as_matrix(a)
    y = as_vector(y, a.shape[0])
    f = svd(a)
    x = f.v @ ((f.u.T @ y) / f.s)
    return _solution(a, y, x)


def relative_error_factor(epsilon):
    """Guaranteed ratio ``1 + eps + eps sqrt((1+eps)/(1-eps))`` of sketched to optimal residual."""
    return 1.0 + epsilon + epsilon * np.sqrt((1.0 + epsilon) / (1.0 - epsilon))


def sampled_least_squares(a, y, epsilon, delta, seed, r_override=None, beta=1.0):
    """Solve the row-sampled problem ``x^ = (Q A)^+ Q y``.

    Rows are drawn from :func:`regression_probabilities_exact` (one exact
    solve to get the residual) and ``r = ceil(8 (d+1) / (beta eps^2) ln(2 (d+1) / delta))``.
    With probability at least ``1 - 3 delta``, ``||A x^ - y||`` is within
    :func:`relative_error_factor` of optimal. A rank-deficient sample is
    redrawn once before giving up. ``beta`` scales the certificate used for sizing.
    """
    a = as_matrix(a)
    y = as_vector(y, a.shape[0])
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise InvalidInputError("epsilon and delta must be in (0, 1)")
    dist = regression_probabilities_exact(a, y)
    rank = svd(a).rank
    r = r_override or sample_size_regression(a.shape[1], beta * dist.beta_certificate, epsilon, delta).r
    for attempt in range(2):
        draw_seed = seed if attempt == 0 else split_seed(seed, 1)
        op = draw_sample_operator(dist, r, draw_seed)
        qa = apply_sample(op, a)
        if svd(qa).rank == rank:
            x = pseudo_inverse(qa) @ apply_sample(op, y)
            return _solution(a, y, x, r_used=r, seed=int(draw_seed))
    raise NumericalFailureError(f"sampled matrix lost rank twice (r={r})")


@dataclass(frozen=True)
class StructuralReport:
    """Per-sample checks that make the sketch-and-solve argument go through.

    Covers the rank chain, the singular-value gap of ``Q U``, the distance
    of ``(Q U)^+`` from ``(Q U)^T``, and the factorization
    ``(Q A)^+ = V S^{-1} (Q U)^+``.
    """

    ranks: tuple
    rank_chain: bool
    sigma_gap: float
    sigma_gap_ok: bool
    pinv_gap: float
    pinv_gap_ok: bool
    factorization_error: float
    factorization_ok: bool
    bound: float

    @property
    def all_hold(self):
        return self.rank_chain and self.sigma_gap_ok and self.pinv_gap_ok and self.factorization_ok


def verify_structural_conditions(a, op, epsilon):
    a = as_matrix(a)
    if not 0 < epsilon < 1:
        raise InvalidInputError(f"epsilon must be in (0, 1), got {epsilon}")
    fa = svd(a)
    qa = apply_sample(op, a)
    qu = apply_sample(op, fa.u)
    rank_qa, rank_qu = svd(qa).rank, svd(qu).rank
    rank_a = fa.rank
    # U_A has orthonormal columns, so its rank equals its column count
    ranks = (rank_qa, rank_qu, fa.u.shape[1], rank_a)
    bound = epsilon / np.sqrt(1.0 - epsilon)

    s_qu = np.linalg.svd(qu, compute_uv=False)
    if rank_qu == fa.u.shape[1] and s_qu[-1] > 0:
        sigma_gap = float(np.max(np.abs(s_qu - 1.0 / s_qu)))
    else:
        sigma_gap = float("inf")
    qu_pinv = pseudo_inverse(qu)
    pinv_gap = spectral_norm_exact(qu_pinv - qu.T) if np.any(qu_pinv - qu.T) else 0.0
    lhs = pseudo_inverse(qa)
    rhs = (fa.v / fa.s) @ qu_pinv
    scale = max(spectral_norm_exact(lhs), np.finfo(float).tiny)
    diff = lhs - rhs
    factorization_error = (spectral_norm_exact(diff) if np.any(diff) else 0.0) / scale
    return StructuralReport(
        ranks=ranks,
        rank_chain=len(set(ranks)) == 1,
        sigma_gap=sigma_gap,
        sigma_gap_ok=sigma_gap <= bound,
        pinv_gap=pinv_gap,
        pinv_gap_ok=pinv_gap <= bound,
        factorization_error=factorization_error,
        factorization_ok=factorization_error <= STRUCTURAL_TOL,
        bound=float(bound),
    )


@dataclass(frozen=True)
class SketchConditions:
    """Measured quantities for the three sufficient conditions on ``Q``.

    ``subspace`` is ``||I - U^T Q^T Q U||``, ``residual_ratio`` is
    ``||Q e|| / ||e||`` and ``cross_ratio`` is ``||U^T Q^T Q e|| / ||e||``
    for the optimal residual ``e``.
    """

    subspace: float
    residual_ratio: float
    cross_ratio: float

    def hold(self, epsilon):
        return self.subspace <= epsilon and self.residual_ratio <= 1 + epsilon and self.cross_ratio <= epsilon


def sketch_conditions(a, y, op):
    a = as_matrix(a)
    y = as_vector(y, a.shape[0])
    u = svd(a).u
    resid = y - u @ (u.T @ y)
    qu = apply_sample(op, u)
    qe = apply_sample(op, resid)
    ne = float(np.linalg.norm(resid))
    subspace = float(np.linalg.norm(np.eye(u.shape[1]) - qu.T @ qu, 2))
    if ne == 0.0:
        return SketchConditions(subspace=subspace, residual_ratio=0.0, cross_ratio=0.0)
    return SketchConditions(subspace=subspace, residual_ratio=float(np.linalg.norm(qe)) / ne,
                            cross_ratio=float(np.linalg.norm(qu.T @ qe)) / ne)
