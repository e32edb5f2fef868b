"""
Sparse row-based low-rank reconstruction.

The projector onto the top-k right singular vectors of a row sample ``Q A``
gives ``A Pi_k``, a rank-k approximation built from actual rows of ``A``.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from .dense_core import as_matrix, spectral_norm_exact, stable_rank, svd
from .errors import InvalidInputError
from .row_sampler import (
    LEVERAGE_APPROX,
    LEVERAGE_EXACT,
    apply_sample,
    draw_sample_operator,
    leverage_probabilities_exact,
    row_norm_probabilities,
)
from .tail_bounds import sample_size_identity, sample_size_symmetric

ADDITIVE = "additive"
RELATIVE = "relative"


@dataclass(frozen=True)
class RankKProjector:
    """Orthonormal basis ``v_k`` (d-by-k) of the sampled top-k right singular space.

    ``reduced`` is set when the sample had rank below the requested k.
    """

    v_k: np.ndarray
    k: int
    r_used: int
    dist_family: str
    reduced: bool = False
    sketch: np.ndarray | None = None

    def matrix(self):
        return self.v_k @ self.v_k.T

    def for_rank(self, k):
        """Projector onto the leading ``k`` of the stored directions."""
        k = min(k, self.v_k.shape[1])
        return RankKProjector(v_k=self.v_k[:, :k], k=k, r_used=self.r_used,
                              dist_family=self.dist_family, reduced=self.reduced, sketch=self.sketch)


def projector_from_sketch(sketch, k, r_used=0, dist_family=""):
    """Top-k right singular subspace of an explicit sketch."""
    f = svd(sketch)
    reduced = k > f.rank
    if reduced:
        warnings.warn(f"sample has numerical rank {f.rank} < k={k}; returning rank {f.rank}", RuntimeWarning,
                      stacklevel=3)
    kk = min(k, f.rank)
    return RankKProjector(v_k=f.v[:, :kk], k=kk, r_used=r_used, dist_family=dist_family, reduced=reduced,
                          sketch=sketch)


def sampled_projector(a, k, mode, epsilon, delta, seed, dist=None, r_override=None, beta=1.0):
    """Row-sample ``a`` and return the top-k right singular subspace of the sample.

    ``additive`` mode samples by row norms with the symmetric sample size and
    guarantees ``||A - A Pi_k||^2 <= ||A - A_k||^2 + 2 eps ||A||^2``.
    ``relative`` mode samples by leverage (exact, or ``dist`` when given, in
    which case its ``beta_certificate`` enters the sample size) and
    guarantees ``||A - A Pi_k|| <= sqrt((1+eps)/(1-eps)) ||A - A_k||`` for
    every k at once. ``beta`` scales the dominance factor used for sizing.
    """
    a = as_matrix(a)
    d = a.shape[1]
    if not 1 <= k <= d:
        raise InvalidInputError(f"k must be in [1, {d}], got {k}")
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise InvalidInputError("epsilon and delta must be in (0, 1)")
    if mode == ADDITIVE:
        dist = row_norm_probabilities(a)
        r = sample_size_symmetric(stable_rank(a), beta * dist.beta_certificate, epsilon, delta, d).r
    elif mode == RELATIVE:
        if dist is None:
            dist = leverage_probabilities_exact(a)
        elif dist.family not in (LEVERAGE_EXACT, LEVERAGE_APPROX):
            raise InvalidInputError(f"relative mode needs leverage probabilities, got {dist.family}")
        if dist.m != a.shape[0]:
            raise InvalidInputError("distribution length does not match the row count")
        b = beta * dist.beta_certificate
        # one nonzero row already spans a one-dimensional row space
        r = sample_size_identity(d, b, epsilon, delta).r if d > b else 1
    else:
        raise InvalidInputError(f"unknown mode {mode!r}")
    r = r_override or r
    op = draw_sample_operator(dist, r, seed)
    return projector_from_sketch(apply_sample(op, a), k, r_used=r, dist_family=dist.family)


def reconstruction_error(a, proj):
    """``||A - A Pi_k||`` in the spectral norm."""
    a = as_matrix(a)
    if proj.v_k.shape[0] != a.shape[1]:
        raise InvalidInputError("projector dimension does not match the column count")
    resid = a - (a @ proj.v_k) @ proj.v_k.T
    if not np.any(resid):
        return 0.0
    return spectral_norm_exact(resid)


def rayleigh_ratios(a, a_tilde):
    """Generalized eigenvalues of ``x^T A~^T A~ x / x^T A^T A x`` over the row space of ``a``.

    Also returns the largest ``||A~ x||^2`` over unit ``x`` orthogonal to
    that row space, which must vanish for the sandwich to hold.
    """
    a = as_matrix(a, "a")
    a_tilde = as_matrix(a_tilde, "a_tilde")
    if a.shape[1] != a_tilde.shape[1]:
        raise InvalidInputError("a and a_tilde must have the same number of columns")
    f = svd(a)
    whiten = f.v / f.s
    m = a_tilde @ whiten
    ratios = np.linalg.eigvalsh(m.T @ m)
    leak = 0.0
    if f.rank < a.shape[1]:
        perp = np.eye(a.shape[1]) - f.v @ f.v.T
        leak = float(np.linalg.norm(a_tilde @ perp, 2) ** 2)
    return ratios, leak


def spectral_equivalence_check(a, a_tilde, epsilon):
    """True iff ``(1-eps) x^T A^T A x <= x^T A~^T A~ x <= (1+eps) x^T A^T A x`` for all x."""
    ratios, leak = rayleigh_ratios(a, a_tilde)
    tol = 1e-12
    scale = max(1.0, float(np.linalg.norm(as_matrix(a_tilde), 2) ** 2))
    return bool(ratios.min() >= 1 - epsilon - tol and ratios.max() <= 1 + epsilon + tol and leak <= tol * scale)
