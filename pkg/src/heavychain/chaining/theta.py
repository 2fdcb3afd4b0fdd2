"""Level functionals ``theta_{u,s}`` for the ball construction and for log-concave chains."""

from __future__ import annotations

import math

import numpy as np

from .._validation import check_int, check_real, check_vector


def theta_ball(s, u, n, p, eta, s1, c=1.0):
    """Three-regime functional of the sparse-shell construction (constant ``c`` defaults to 1).

    * ``s = 0``: ``c sqrt(u) eta_0^(1/2) n^(1/p) 2^(s1 (1/2 - 1/p))``
    * ``2^(s+s1) <= n``: ``c sqrt(u) eta_s^(1/2) n^(1/p) 2^(-(s+s1)/p)``
    * otherwise: ``c sqrt(u) eta_s^(1/2) 2^(-2^s / n)``
    """
    s = check_int(s, "s", low=0)
    if s >= len(eta):
        raise ValueError(f"level {s} is outside the schedule (length {len(eta)})")
    u = check_real(u, "u", low=0.0)
    n = check_int(n, "n", low=1)
    p = check_real(p, "p", low=0.0, strict_low=True)
    root = c * math.sqrt(u) * math.sqrt(eta[s])
    if s == 0:
        return root * n ** (1.0 / p) * 2.0 ** (s1 * (0.5 - 1.0 / p))
    if 2 ** (s + s1) <= n:
        return root * n ** (1.0 / p) * 2.0 ** (-(s + s1) / p)
    return root * 2.0 ** (-(2.0**s) / n)


def theta_ball_regime(s, n, s1):
    if s == 0:
        return "root"
    return "shell" if 2 ** (s + s1) <= n else "dense"


def theta_ball_table(A, u, p=None, c=1.0):
    """``theta_{u,s}`` for every stored level of a ball sequence, shape ``(L, m)``."""
    meta = A.meta
    p = meta["p"] if p is None else p
    vals = np.array([theta_ball(s, u, meta["n"], p, A.eta, meta["s1"], c) for s in range(A.n_levels)])
    return np.repeat(vals[:, None], A.base.size, axis=1)


def theta_logconcave(s, u, dt, c2=1.0):
    """``c2 u (2^s ||dt||_inf + 2^(s/2) ||dt||_2)``."""
    s = check_int(s, "s", low=0)
    u = check_real(u, "u", low=0.0)
    v = check_vector(dt, "dt")
    return c2 * u * (2.0**s * float(np.max(np.abs(v))) + 2.0 ** (s / 2) * float(np.linalg.norm(v)))


def theta_logconcave_table(A, u, c2=1.0):
    """``theta`` of every increment of a standard-schedule sequence, shape ``(L, m)``."""
    out = np.empty((A.n_levels, A.base.size))
    for s in range(A.n_levels):
        inc = A.increments(s)
        out[s] = c2 * u * (2.0**s * np.max(np.abs(inc), axis=1) + 2.0 ** (s / 2) * np.linalg.norm(inc, axis=1))
    return out
