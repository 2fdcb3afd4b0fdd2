"""Monte Carlo estimates of Bernoulli and exponential suprema over finite sets."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .._validation import check_int, check_points
from ..samplers import LAPLACE_SCALE, derive_seed
from .admissible import gamma_beta_value, greedy_admissible
from .eta import make_eta

EXHAUSTIVE_MAX_N = 20
CHUNK = 4096


def bernoulli_sup_mc(V, trials, seed=0):
    """``sup_v |sum_i eps_i v_i^2|`` per trial.

    ``trials=0`` enumerates all ``2^N`` sign vectors instead (``N <= 20``); the
    returned values are then equally likely outcomes.
    """
    V = check_points(V, "V")
    trials = check_int(trials, "trials", low=0)
    W = (V * V).T  # N x m
    N = W.shape[0]
    if trials == 0:
        if N > EXHAUSTIVE_MAX_N:
            raise ValueError(f"exhaustive mode needs N <= {EXHAUSTIVE_MAX_N}, got {N}")
        out = []
        for chunk in _sign_chunks(N):
            out.append(np.max(np.abs(chunk @ W), axis=1))
        return np.concatenate(out)
    rng = np.random.default_rng(derive_seed(seed, "bernoulli"))
    out = np.empty(trials)
    for start in range(0, trials, CHUNK):
        stop = min(trials, start + CHUNK)
        eps = rng.choice(np.array([-1.0, 1.0]), size=(stop - start, N))
        out[start:stop] = np.max(np.abs(eps @ W), axis=1)
    return out


def _sign_chunks(N, chunk_bits=14):
    """All of ``{-1, 1}^N`` in lexicographic blocks."""
    low = min(N, chunk_bits)
    base = np.array(list(itertools.product((-1.0, 1.0), repeat=low)))
    for high in itertools.product((-1.0, 1.0), repeat=N - low):
        yield np.hstack([np.broadcast_to(np.array(high), (base.shape[0], N - low)), base])


def exp_sup_E(T, trials=2000, seed=0, gaussian=False, sup=None):
    """Monte Carlo ``E sup_t <y, t>`` over symmetric exponential ``y`` with unit variance.

    ``gaussian=True`` estimates the gaussian analogue ``G(T)``.  ``sup`` may be
    a callable ``y -> sup_t <y, t>`` for sets given implicitly (e.g. the
    Euclidean ball: ``np.linalg.norm``); ``T`` then only fixes the dimension.
    Returns ``(mean, stderr)``.
    """
    trials = check_int(trials, "trials", low=2)
    if sup is None:
        T = check_points(T, "T")
        n = T.shape[1]
    else:
        n = check_int(T, "n", low=1) if np.ndim(T) == 0 else np.atleast_2d(T).shape[1]
    rng = np.random.default_rng(derive_seed(seed, "gaussian" if gaussian else "exponential"))
    vals = np.empty(trials)
    for start in range(0, trials, CHUNK):
        stop = min(trials, start + CHUNK)
        shape = (stop - start, n)
        y = rng.standard_normal(shape) if gaussian else rng.laplace(0.0, LAPLACE_SCALE, shape)
        if sup is None:
            vals[start:stop] = np.max(y @ T.T, axis=1)
        else:
            vals[start:stop] = [sup(row) for row in y]
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(trials))


@dataclass(frozen=True)
class GammaSandwich:
    gamma1: float
    gamma2: float
    E: float
    stderr: float
    ratio: float
    ratio_low: float
    ratio_high: float

    @property
    def applicable(self):
        return not math.isnan(self.ratio)

    def to_dict(self):
        return dict(self.__dict__)


def gamma12_vs_E_check(T, eta=None, trials=4000, seed=0, root="centroid"):
    """Greedy ``gamma_1(T, l_inf) + gamma_2(T, l_2)`` against ``E(T)``.

    ``ratio_low``/``ratio_high`` divide by ``E +/- 3 stderr``.  A singleton (or
    any ``T`` with ``E = 0``) reports ``nan`` ratios.
    """
    P = check_points(T, "T")
    if eta is None:
        eta = make_eta("standard", cap=max(math.log2(P.shape[0] + 2), 1.0))
    g1 = gamma_beta_value(greedy_admissible(P, "linf", eta, root=root), 1.0)
    g2 = gamma_beta_value(greedy_admissible(P, "l2", eta, root=root), 2.0)
    E, se = exp_sup_E(P, trials, seed)
    top = g1 + g2
    if P.shape[0] == 1 or E <= 0:
        nan = float("nan")
        return GammaSandwich(g1, g2, E, se, nan, nan, nan)
    lo_den, hi_den = E + 3 * se, E - 3 * se
    return GammaSandwich(g1, g2, E, se, top / E, top / lo_den,
                         top / hi_den if hi_den > 0 else float("inf"))
