"""
Deterministic dense linear algebra used as the exact reference for every
randomized routine in the package.

Matrices are plain two-dimensional float64 numpy arrays. ``as_matrix``
normalizes and validates inputs; everything else assumes its output.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalFailureError

RANK_RTOL = 1e-12


def as_matrix(a, name="a"):
    """Return ``a`` as a finite, nonempty 2-D float64 array.

    One-dimensional input is treated as a single row.
    """
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def as_vector(y, length=None, name="y"):
    arr = np.asarray(y, dtype=np.float64).reshape(-1)
    if length is not None and arr.shape[0] != length:
        raise InvalidInputError(f"{name} has length {arr.shape[0]}, expected {length}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD truncated at numerical rank: ``a = u @ diag(s) @ v.T``.

    ``u`` is m-by-k, ``s`` holds the k positive singular values in
    non-increasing order, and ``v`` is d-by-k.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def rank(self):
        return self.s.shape[0]

    def reconstruct(self):
        return (self.u * self.s) @ self.v.T


def numerical_rank_tolerance(shape, sigma_max):
    return max(shape) * sigma_max * RANK_RTOL


def svd(a):
    """Thin singular value decomposition truncated at numerical rank.

    Singular values below ``max(m, d) * sigma_1 * 1e-12`` are discarded.
    Column signs are fixed so the first nonzero entry of every column of
    ``u`` is non-negative; ``v`` is flipped with it.
    """
    a = as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD did not converge: {exc}") from exc
    if s.size == 0 or s[0] == 0.0:
        k = 0
    else:
        k = int(np.count_nonzero(s > numerical_rank_tolerance(a.shape, s[0])))
    u, s, v = u[:, :k], s[:k], vt[:k].T
    if k:
        # sign of the first entry whose magnitude is not negligible
        first = np.argmax(np.abs(u) > 1e-14, axis=0)
        signs = np.sign(u[first, np.arange(k)])
        signs[signs == 0] = 1.0
        u = u * signs
        v = v * signs
    return SvdFactors(u=u, s=s, v=v)


def pseudo_inverse(a):
    """Moore-Penrose pseudo-inverse ``V diag(1/s) U^T`` at numerical rank."""
    a = as_matrix(a)
    f = svd(a)
    return (f.v / f.s) @ f.u.T


def spectral_norm_exact(a):
    f = svd(a)
    return float(f.s[0]) if f.rank else 0.0


def frobenius_norm(a):
    a = as_matrix(a)
    # scale first so squaring cannot under- or overflow
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return 0.0
    b = a / scale
    return scale * float(np.sqrt(np.sum(b * b)))


def stable_rank(a):
    """``||a||_F^2 / ||a||_2^2``, which lies between 1 and rank(a)."""
    a = as_matrix(a)
    sigma = spectral_norm_exact(a)
    if sigma == 0.0:
        raise InvalidInputError("stable rank of the zero matrix is undefined")
    # rounding can put a rank-one ratio a hair below its exact lower bound
    return max(1.0, (frobenius_norm(a) / sigma) ** 2)


def condition_number(s):
    s = np.asarray(s, dtype=np.float64).reshape(-1)
    if s.size == 0:
        raise InvalidInputError("condition number needs at least one value")
    if np.any(~np.isfinite(s)) or np.any(s <= 0):
        raise InvalidInputError("condition number needs strictly positive values")
    return float(s.max() / s.min())


def best_rank_k(a, k):
    """Best rank-``k`` approximation ``U_k S_k V_k^T`` (spectral and Frobenius)."""
    a = as_matrix(a)
    if not 1 <= k <= a.shape[1]:
        raise InvalidInputError(f"k must be in [1, {a.shape[1]}], got {k}")
    f = svd(a)
    k = min(k, f.rank)
    return (f.u[:, :k] * f.s[:k]) @ f.v[:, :k].T
