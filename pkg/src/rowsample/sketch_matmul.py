"""Approximate ``A^T A`` and ``A^T B`` from a small number of sampled rows."""
from dataclasses import dataclass

import numpy as np

from .dense_core import as_matrix, frobenius_norm, stable_rank
from .errors import InvalidInputError
from .rng import split_seed
from .row_sampler import (
    apply_sample,
    combined_rescaled_probabilities,
    draw_sample_operator,
    row_norm_probabilities,
)
from .spectral import ESTIMATE_BOUNDS, estimate_spectral_norm
from .tail_bounds import sample_size_asymmetric, sample_size_symmetric


@dataclass(frozen=True)
class ProductSketchResult:
    """Sketched product and the sampling setup behind it.

    ``rho_terms`` are the stable ranks used for sizing. For products they are
    ``||.||_F^2 / lambda^2`` with estimated ``lambda^2``; an overestimated
    spectral norm makes them optimistic by at most the estimator's upper
    factor, which the reduced ``beta`` more than absorbs.
    """

    estimate: np.ndarray
    r_used: int
    epsilon_target: float
    delta_target: float
    dist_family: str
    seed: int
    beta: float = 1.0
    rho_terms: tuple = ()
    lambda2: tuple = ()


def _check_targets(epsilon, delta):
    if not 0 < epsilon < 1:
        raise InvalidInputError(f"epsilon must be in (0, 1), got {epsilon}")
    if not 0 < delta < 1:
        raise InvalidInputError(f"delta must be in (0, 1), got {delta}")


def approx_gram(a, epsilon, delta, seed, r_override=None, beta=1.0):
    """Row-norm sampled ``A~^T A~`` with ``||A^T A - A~^T A~|| <= eps ||A||^2`` w.p. ``1 - delta``.

    The sample size uses the exact stable rank of ``a`` and
    ``beta * beta_certificate``; ``beta < 1`` only inflates ``r``.
    ``r_override`` replaces the sample size and voids the guarantee.
    """
    a = as_matrix(a)
    _check_targets(epsilon, delta)
    dist = row_norm_probabilities(a)
    rho = stable_rank(a)
    r = r_override or sample_size_symmetric(rho, beta * dist.beta_certificate, epsilon, delta, a.shape[1]).r
    op = draw_sample_operator(dist, r, seed)
    sa = apply_sample(op, a)
    return ProductSketchResult(
        estimate=sa.T @ sa, r_used=r, epsilon_target=epsilon, delta_target=delta,
        dist_family=dist.family, seed=int(seed), beta=beta * dist.beta_certificate, rho_terms=(rho,),
    )


def approx_product(a, b, epsilon, delta, seed, lambda2=None, lambda_bounds=None, r_override=None):
    """Sampled ``A~^T B~`` with ``||A^T B - A~^T B~|| <= eps ||A|| ||B||`` w.p. ``1 - delta``.

    Spectral norms are estimated with :func:`estimate_spectral_norm` unless
    ``lambda2 = (lambda_a2, lambda_b2)`` is given; ``lambda_bounds`` is the
    accuracy interval of those estimates (exact by default when supplied).
    The dominance factor of the resulting probabilities feeds the sample size.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[0] != b.shape[0]:
        raise InvalidInputError(f"a and b must have the same number of rows, got {a.shape[0]} and {b.shape[0]}")
    _check_targets(epsilon, delta)
    if lambda2 is None:
        lambda2 = (estimate_spectral_norm(a, delta, split_seed(seed, 1)),
                   estimate_spectral_norm(b, delta, split_seed(seed, 2)))
        lambda_bounds = lambda_bounds or ESTIMATE_BOUNDS
    lambda_bounds = lambda_bounds or (1.0, 1.0)
    la2, lb2 = float(lambda2[0]), float(lambda2[1])
    dist = combined_rescaled_probabilities(a, b, la2, lb2, lambda_bounds)
    rho_a = max(1.0, frobenius_norm(a) ** 2 / la2)
    rho_b = max(1.0, frobenius_norm(b) ** 2 / lb2)
    beta = dist.beta_certificate
    r = r_override or sample_size_asymmetric(rho_a, rho_b, beta, epsilon, delta, a.shape[1], b.shape[1]).r
    op = draw_sample_operator(dist, r, split_seed(seed, 0))
    return ProductSketchResult(
        estimate=apply_sample(op, a).T @ apply_sample(op, b), r_used=r, epsilon_target=epsilon,
        delta_target=delta, dist_family=dist.family, seed=int(seed), beta=beta,
        rho_terms=(rho_a, rho_b), lambda2=(la2, lb2),
    )
