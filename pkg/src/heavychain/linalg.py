"""Extreme singular values, sample covariance and quadratic empirical-process suprema.

The spectral work is done by a cyclic Jacobi eigensolver on the ``n x n`` Gram
matrix; suprema over the whole sphere are therefore eigenvalues, with no net
discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_matrix, check_points, check_vector

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 50


class NumericalError(RuntimeError):
    """An iterative numerical routine failed to converge."""


@dataclass(frozen=True)
class SingularPair:
    s_min: float
    s_max: float

    def __post_init__(self):
        if not (math.isfinite(self.s_min) and math.isfinite(self.s_max)):
            raise ValueError("singular values must be finite")
        if not 0 <= self.s_min <= self.s_max:
            raise ValueError(f"need 0 <= s_min <= s_max, got {self.s_min}, {self.s_max}")

    def __iter__(self):
        return iter((self.s_min, self.s_max))

    def scaled(self, c):
        return SingularPair(self.s_min * c, self.s_max * c)


@njit(cache=True, nogil=True)
def _jacobi_sweeps(a, tol, max_sweeps):
    n = a.shape[0]
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += a[i, j] * a[i, j]
    fro = math.sqrt(fro)
    threshold = tol * fro
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += 2.0 * a[i, j] * a[i, j]
        if math.sqrt(off) <= threshold:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp = a[p, k]
                    akq = a[q, k]
                    new_p = c * akp - s * akq
                    new_q = s * akp + c * akq
                    a[p, k] = new_p
                    a[k, p] = new_p
                    a[q, k] = new_q
                    a[k, q] = new_q
                a[p, p] = a[p, p] - t * apq
                a[q, q] = a[q, q] + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
    return -1


def jacobi_eigenvalues(B, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius norm falls below
    ``tol * ||B||_F``; raises :class:`NumericalError` after ``max_sweeps``.
    """
    a = np.array(check_matrix(B, "B"), dtype=np.float64, order="C", copy=True)
    if a.shape[0] != a.shape[1]:
        raise ValueError("B must be square")
    a = 0.5 * (a + a.T)
    sweeps = _jacobi_sweeps(a, float(tol), int(max_sweeps))
    if sweeps < 0:
        raise NumericalError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(a).copy())


def extreme_singulars(A):
    """Smallest and largest singular value of a tall or square matrix."""
    A = check_matrix(getattr(A, "rows", A), "A")
    N, n = A.shape
    if N < n:
        raise ValueError(f"need N >= n for s_min, got {N} x {n}")
    lam = jacobi_eigenvalues(A.T @ A)
    lam = np.clip(lam, 0.0, None)
    return SingularPair(float(math.sqrt(lam[0])), float(math.sqrt(lam[-1])))


def sample_covariance(X):
    """``(1/N) sum_i X_i X_i^T``."""
    A = check_matrix(getattr(X, "rows", X), "X")
    C = (A.T @ A) / A.shape[0]
    return 0.5 * (C + C.T)


def op_norm_deviation(Sigma_N, Sigma=None):
    """Spectral norm of ``Sigma_N - Sigma`` (``Sigma`` defaults to the identity)."""
    S = check_matrix(Sigma_N, "Sigma_N")
    if S.shape[0] != S.shape[1]:
        raise ValueError("Sigma_N must be square")
    if Sigma is None:
        Sigma = np.eye(S.shape[0])
    else:
        Sigma = check_matrix(Sigma, "Sigma")
    if Sigma.shape != S.shape:
        raise ValueError(f"dimension mismatch: {S.shape} vs {Sigma.shape}")
    lam = jacobi_eigenvalues(S - Sigma)
    return float(max(abs(lam[0]), abs(lam[-1])))


def quadratic_sup_finite(X, T, targets=None):
    """``max_{t in T} |N^{-1} sum_i <X_i, t>^2 - target(t)|``; isotropic target by default."""
    A = check_matrix(getattr(X, "rows", X), "X")
    P = check_points(T, "T")
    if P.shape[1] != A.shape[1]:
        raise ValueError(f"T has dimension {P.shape[1]}, X has {A.shape[1]}")
    if targets is None:
        tg = np.sum(P * P, axis=1)
    else:
        tg = check_vector(targets, "targets")
        if tg.size != P.shape[0]:
            raise ValueError("one target per element of T is required")
    emp = np.mean((A @ P.T) ** 2, axis=0)
    return float(np.max(np.abs(emp - tg)))


class SampleCovariance(BaseEstimator):
    """Sample second-moment matrix with exact operator-norm diagnostics.

    Parameters
    ----------
    reference : array-like of shape (n, n) or None, default=None
        Population covariance used by :meth:`deviation`. ``None`` means the
        identity (isotropic laws).

    Attributes
    ----------
    covariance_ : ndarray of shape (n, n)
        ``(1/N) sum_i X_i X_i^T``.
    singular_values_ : SingularPair
        Extreme singular values of ``X / sqrt(N)``.
    deviation_ : float
        ``||covariance_ - reference||_{2->2}``.
    n_samples_ : int
    n_features_in_ : int
    """

    def __init__(self, reference=None):
        self.reference = reference

    def fit(self, X, y=None):
        A = check_matrix(getattr(X, "rows", X), "X")
        self.n_samples_, self.n_features_in_ = A.shape
        self.covariance_ = sample_covariance(A)
        lam = np.clip(jacobi_eigenvalues(self.covariance_), 0.0, None)
        self.singular_values_ = SingularPair(float(math.sqrt(lam[0])), float(math.sqrt(lam[-1])))
        self.deviation_ = op_norm_deviation(self.covariance_, self.reference)
        return self

    def transform(self, X):
        """Whiten-free projection: returns ``X`` scaled by ``1/sqrt(N)`` of the fit."""
        check_is_fitted(self)
        A = check_matrix(getattr(X, "rows", X), "X")
        if A.shape[1] != self.n_features_in_:
            raise ValueError("dimension mismatch")
        return A / math.sqrt(self.n_samples_)

    def score(self, X, y=None):
        """Negative operator-norm distance between the fitted and a new sample covariance."""
        check_is_fitted(self)
        return -op_norm_deviation(sample_covariance(X), self.covariance_)
