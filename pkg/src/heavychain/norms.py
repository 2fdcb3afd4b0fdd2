"""Order statistics and the norms used throughout: l_p, weak l_p, L_q, psi_alpha, (p).

All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_int, check_matrix, check_real, check_vector


@dataclass(frozen=True)
class NormReport:
    value: float
    method: str = "empirical"
    sample_size: int | None = None

    def __post_init__(self):
        if self.method not in ("analytic", "empirical"):
            raise ValueError(f"unknown method {self.method!r}")
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"norm value must be finite and nonnegative, got {self.value}")

    def __float__(self):
        return float(self.value)


def order_stats_desc(v):
    """Absolute values of ``v`` sorted nonincreasingly."""
    a = np.abs(check_vector(v, allow_empty=True))
    return -np.sort(-a)


def top_k_l2(v, k):
    """l_2 norm of the ``k`` largest entries of ``|v|``."""
    a = check_vector(v)
    k = check_int(k, "k", low=1, high=a.size)
    if k == a.size:
        return float(np.sqrt(np.sum(a * a)))
    sq = a * a
    top = np.partition(sq, a.size - k)[a.size - k:]
    return float(np.sqrt(np.sum(top)))


def top_k_profile(v):
    """``(top_k_l2(v, k))_{k=1..len(v)}`` in one sort."""
    sq = order_stats_desc(v) ** 2
    return np.sqrt(np.cumsum(sq))


def lp_norm(v, p):
    v = check_vector(v)
    p = check_real(p, "p", low=0.0, strict_low=True)
    scale = float(np.max(np.abs(v)))
    if math.isinf(p) or scale == 0:
        return scale
    # factor out the max to avoid under/overflow
    return float(scale * np.sum((np.abs(v) / scale) ** p) ** (1.0 / p))


def weak_lp_norm(v, p):
    """``max_k v*_k / k^(1/p)``."""
    p = check_real(p, "p", low=0.0, strict_low=True)
    a = order_stats_desc(check_vector(v))
    k = np.arange(1, a.size + 1, dtype=float)
    return float(np.max(a / k ** (1.0 / p)))


def weak_lp_norm_rows(X, p):
    """Row-wise weak l_p norms of a matrix."""
    A = -np.sort(-np.abs(np.asarray(X, dtype=float)), axis=1)
    k = np.arange(1, A.shape[1] + 1, dtype=float)
    return np.max(A / k ** (1.0 / p), axis=1)


def empirical_Lq(samples, q):
    """``(mean |samples|^q)^(1/q)``."""
    x = check_vector(samples)
    q = check_real(q, "q")
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    scale = np.max(np.abs(x))
    if scale == 0:
        return 0.0
    # factor out the max to avoid overflow at large q
    return float(scale * np.mean((np.abs(x) / scale) ** q) ** (1.0 / q))


def default_q_grid(sample_size, q_max=None):
    """Geometric grid ``1, 2, 4, ...`` capped at ``log(sample_size)``."""
    cap = math.log(sample_size) if q_max is None else float(q_max)
    grid = [1.0]
    while grid[-1] * 2 <= cap:
        grid.append(grid[-1] * 2)
    return np.array(grid)


def psi_alpha_estimate(samples, alpha, q_grid=None):
    """``max_q ||Z||_q / q^(1/alpha)`` over a moment grid.

    Moments beyond ``log(len(samples))`` are unreliable, so the grid must stay
    inside ``[1, log(len(samples))]``.
    """
    x = check_vector(samples)
    alpha = check_real(alpha, "alpha", low=0.0, strict_low=True)
    q_max = max(math.log(x.size), 1.0)
    grid = default_q_grid(x.size) if q_grid is None else np.atleast_1d(np.asarray(q_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("empty moment grid")
    if np.any(grid < 1) or np.any(grid > q_max + 1e-12):
        raise ValueError(f"moment grid must lie in [1, log(sample size)] = [1, {q_max:.3g}]")
    return float(max(empirical_Lq(x, q) / q ** (1.0 / alpha) for q in grid))


def p_norm_local(samples, p, q_grid=None):
    """``sup_{1<=q<=p} ||Z||_q / sqrt(q)`` over a grid in ``[1, p]``.

    The default grid is ``2^(k/2)`` for ``k = 0, 1, ...`` up to ``p``, plus ``p``
    itself.
    """
    x = check_vector(samples)
    p = check_real(p, "p")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if q_grid is None:
        grid = [2 ** (k / 2) for k in range(int(math.floor(2 * math.log2(p))) + 1)]
        if grid[-1] < p:
            grid.append(p)
        grid = np.array(grid)
    else:
        grid = np.atleast_1d(np.asarray(q_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("empty moment grid")
    if np.any(grid < 1) or np.any(grid > p + 1e-12):
        raise ValueError(f"moment grid must lie in [1, p] = [1, {p}]")
    return float(max(empirical_Lq(x, q) / math.sqrt(q) for q in grid))


def M_ell_estimate(X, ell):
    """Max over rows of the top-``ell`` l_2 norm (empirical proxy for the L_inf norm)."""
    A = check_matrix(getattr(X, "rows", X), "X")
    ell = check_int(ell, "ell", low=1, high=A.shape[1])
    sq = A * A
    n = A.shape[1]
    if ell < n:
        sq = np.partition(sq, n - ell, axis=1)[:, n - ell:]
    return float(np.sqrt(np.max(np.sum(sq, axis=1))))


def M_ell_profile(X):
    """``(M_ell)_{ell=1..n}`` for all ``ell`` at once."""
    A = check_matrix(getattr(X, "rows", X), "X")
    sq = -np.sort(-(A * A), axis=1)
    return np.sqrt(np.max(np.cumsum(sq, axis=1), axis=0))


def M_ell_ceiling(n, p, kappa1, ell):
    """Hoelder ceiling ``kappa1 n^(1/p) ell^(1/2 - 1/p)`` for rows in ``kappa1 n^(1/p) B_p^n``."""
    return kappa1 * n ** (1.0 / p) * ell ** (0.5 - 1.0 / p)


def l1ball_moment_formula(t, p):
    """``p ||t||_inf + sqrt(p) (sum_{i > floor(p)} (t_i^2)*)^(1/2)``."""
    a = order_stats_desc(check_vector(t))
    p = check_real(p, "p")
    if p < 1 or p > a.size:
        raise ValueError(f"p must lie in [1, n] = [1, {a.size}], got {p}")
    tail = a[int(math.floor(p)):]
    return float(p * a[0] + math.sqrt(p) * math.sqrt(np.sum(tail * tail)))
