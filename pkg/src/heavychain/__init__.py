"""Heavy-tailed random matrices and generic chaining: samplers, norms, exact
extreme singular values, chaining machinery and seeded Monte Carlo sweeps."""

from .linalg import (
    NumericalError,
    SampleCovariance,
    SingularPair,
    extreme_singulars,
    jacobi_eigenvalues,
    op_norm_deviation,
    quadratic_sup_finite,
    sample_covariance,
)
from .samplers import DistributionSpec, SampleMatrix, TruncationError, derive_seed, sample_matrix, sample_scalar

__version__ = "0.1.0"

__all__ = [
    "DistributionSpec", "SampleMatrix", "TruncationError", "derive_seed", "sample_matrix", "sample_scalar",
    "NumericalError", "SampleCovariance", "SingularPair", "extreme_singulars", "jacobi_eigenvalues",
    "op_norm_deviation", "quadratic_sup_finite", "sample_covariance",
]
