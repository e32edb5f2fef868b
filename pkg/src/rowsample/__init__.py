"""Row-sampling sketches for matrix products, low-rank approximation and least squares."""
__version__ = "0.1.0"

from .dense_core import SvdFactors, best_rank_k, frobenius_norm, pseudo_inverse, spectral_norm_exact, stable_rank, svd
from .errors import InvalidInputError, NumericalFailureError, PreconditionError
from .leverage_fjlt import build_fjlt, estimate_leverage_probabilities
from .low_rank import ADDITIVE, RELATIVE, reconstruction_error, sampled_projector, spectral_equivalence_check
from .regression import exact_least_squares, sampled_least_squares
from .row_sampler import (
    SamplingDistribution,
    apply_sample,
    draw_sample_operator,
    leverage_probabilities_exact,
    row_norm_probabilities,
)
from .sketch_matmul import approx_gram, approx_product
from .spectral import estimate_spectral_norm, power_iteration_norm

__all__ = [
    "__version__",
    "ADDITIVE", "RELATIVE",
    "InvalidInputError", "NumericalFailureError", "PreconditionError",
    "SamplingDistribution", "SvdFactors",
    "apply_sample", "approx_gram", "approx_product", "best_rank_k", "build_fjlt",
    "draw_sample_operator", "estimate_leverage_probabilities", "estimate_spectral_norm",
    "exact_least_squares", "frobenius_norm", "leverage_probabilities_exact", "power_iteration_norm",
    "pseudo_inverse", "reconstruction_error", "row_norm_probabilities", "sampled_least_squares",
    "sampled_projector", "spectral_equivalence_check", "spectral_norm_exact", "stable_rank", "svd",
]
