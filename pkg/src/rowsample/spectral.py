"""
Constant-factor spectral norm estimation.

``power_iteration_norm`` runs plain power iteration on ``A^T A`` from an
isotropic start. ``estimate_spectral_norm`` first row-samples ``A`` by row
norms with accuracy 1/2 and then power-iterates on the sketch.
"""
import math
from dataclasses import dataclass

import numpy as np

from .dense_core import as_matrix
from .errors import InvalidInputError, NumericalFailureError
from .rng import make_rng, split_seed
from .row_sampler import apply_sample, draw_sample_operator, row_norm_probabilities
from .tail_bounds import sample_size_symmetric

POWER_ITERATION_CONSTANT = 2.0
MAX_RESTARTS = 3
PRESAMPLE_EPSILON = 0.5
# guaranteed range of the estimate, as multiples of ||A||^2
ESTIMATE_BOUNDS = (1.0 / (2.0 * math.sqrt(5.0)), 1.5)


@dataclass(frozen=True)
class PowerIterationTrace:
    lambda2_per_step: np.ndarray
    n_steps: int
    seed: int

    @property
    def estimate(self):
        return float(self.lambda2_per_step[-1])


def isotropic_start(d, seed):
    """Unit vector with uniformly random direction: normalized i.i.d. normals."""
    z = make_rng(seed).standard_normal(d)
    return z / np.linalg.norm(z)


def _iterate(a, x, n):
    out = np.empty(n)
    for k in range(n):
        y = a.T @ (a @ x)
        ny = np.linalg.norm(y)
        if not ny > 0 or not np.isfinite(ny):
            return None
        x = y / ny
        out[k] = np.linalg.norm(a.T @ (a @ x))
    if not np.all(out > 0):
        return None
    return out


def power_iteration_norm(a, n, seed):
    """Power iteration estimates of ``||A||^2``.

    Step k sets ``x_k = A^T A x_{k-1} / ||A^T A x_{k-1}||`` and records
    ``lambda_k^2 = ||A^T A x_k||``. The sequence never exceeds ``||A||^2``
    and is non-decreasing. A start that lands in the null space is retried
    with a derived seed, at most three times.
    """
    a = as_matrix(a)
    if int(n) != n or n < 1:
        raise InvalidInputError(f"number of iterations must be a positive integer, got {n}")
    if not np.any(a):
        raise InvalidInputError("power iteration needs a nonzero matrix")
    # iterate on a unit-scale copy so tiny or huge entries cannot under- or overflow
    scale = float(np.max(np.abs(a)))
    unit = a / scale
    start_seed = seed
    for attempt in range(MAX_RESTARTS + 1):
        trace = _iterate(unit, isotropic_start(a.shape[1], start_seed), int(n))
        if trace is not None:
            return PowerIterationTrace(lambda2_per_step=trace * scale**2, n_steps=int(n), seed=int(seed))
        start_seed = split_seed(seed, attempt + 1)
    raise NumericalFailureError(f"power iteration collapsed after {MAX_RESTARTS} restarts")


def power_iteration_count(d, delta, c=POWER_ITERATION_CONSTANT):
    return max(1, math.ceil(c * math.log(d / delta)))


def stable_rank_upper_bound(a):
    """Upper bound on ``||A||_F^2 / ||A||^2`` that needs no spectral norm.

    ``||A||`` is at least the largest row norm and the largest column norm,
    and the stable rank never exceeds the column count.
    """
    a = as_matrix(a)
    sq = a * a
    fro2 = sq.sum()
    if not fro2 > 0:
        raise InvalidInputError("stable rank of the zero matrix is undefined")
    floor2 = max(sq.sum(axis=1).max(), sq.sum(axis=0).max())
    return float(max(1.0, min(a.shape[1], fro2 / floor2)))


def estimate_spectral_norm(a, delta, seed, c_pi=POWER_ITERATION_CONSTANT):
    """Estimate ``||A||^2`` to within ``[||A||^2 / (2 sqrt 5), 1.5 ||A||^2]``.

    Samples ``r = ceil(16 rho ln(2 d / delta))`` rows by row norm, where
    ``rho`` is :func:`stable_rank_upper_bound`, then runs
    ``ceil(c_pi ln(d / delta))`` power iterations on the sampled matrix.
    """
    a = as_matrix(a)
    if not 0 < delta < 1:
        raise InvalidInputError(f"delta must be in (0, 1), got {delta}")
    d = a.shape[1]
    plan = sample_size_symmetric(stable_rank_upper_bound(a), 1.0, PRESAMPLE_EPSILON, delta, d)
    op = draw_sample_operator(row_norm_probabilities(a), plan.r, split_seed(seed, 0))
    sketch = apply_sample(op, a)
    trace = power_iteration_norm(sketch, power_iteration_count(d, delta, c_pi), split_seed(seed, 1))
    return trace.estimate
