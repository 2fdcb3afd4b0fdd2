"""Admissible sequences: storage, greedy construction, the sparse-shell ball
construction, and gamma_beta values.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .._validation import check_int, check_points, check_real
from ..norms import M_ell_profile
from .eta import EtaSequence, default_s1, make_eta


# -- metrics -----------------------------------------------------------------

class Metric:
    name = "custom"

    def pairwise(self, A, B):
        raise NotImplementedError

    def __call__(self, x, y):
        return float(self.pairwise(np.atleast_2d(x), np.atleast_2d(y))[0, 0])


class L2Metric(Metric):
    name = "l2"

    def pairwise(self, A, B):
        return cdist(A, B, "euclidean")


class LinfMetric(Metric):
    name = "linf"

    def pairwise(self, A, B):
        return cdist(A, B, "chebyshev")


class CallableMetric(Metric):
    def __init__(self, fn, name="custom"):
        self.fn = fn
        self.name = name

    def pairwise(self, A, B):
        return np.array([[float(self.fn(a, b)) for b in B] for a in A]).reshape(len(A), len(B))


class Psi2ProxyMetric(Metric):
    """``d(v, w) = ||v - w||_inf * M_{|supp(v - w)|}``, with ``M`` an M_ell profile."""

    name = "psi2-proxy"

    def __init__(self, M_profile, tol=1e-12):
        self.M = np.concatenate([[0.0], np.asarray(M_profile, dtype=float)])
        self.tol = tol

    def pairwise(self, A, B):
        A = np.atleast_2d(A)
        B = np.atleast_2d(B)
        out = np.empty((A.shape[0], B.shape[0]))
        for i, a in enumerate(A):
            diff = np.abs(B - a)
            supp = np.sum(diff > self.tol, axis=1)
            out[i] = np.max(diff, axis=1) * self.M[supp]
        return out


def get_metric(metric):
    if isinstance(metric, Metric):
        return metric
    if metric in (None, "l2", "euclidean"):
        return L2Metric()
    if metric in ("linf", "chebyshev"):
        return LinfMetric()
    if callable(metric):
        return CallableMetric(metric)
    raise ValueError(f"unknown metric {metric!r}")


# -- storage -----------------------------------------------------------------

@dataclass
class AdmissibleSequence:
    """Leveled centers over a finite set ``T``.

    Attributes
    ----------
    pool : ndarray of shape (P, n)
        Every point that appears anywhere (``T`` and all centers).
    base : ndarray of shape (m,)
        Pool indices of the elements of ``T``.
    centers : list of ndarray
        Pool indices of ``T_s`` for each level.
    assign : ndarray of shape (L, m)
        Pool index of ``pi_s t`` for each level ``s`` and element ``t``.
    metric : str
        Tag of the metric used to build the sequence.
    eta : EtaSequence
    """

    pool: np.ndarray
    base: np.ndarray
    centers: list
    assign: np.ndarray
    metric: str
    eta: EtaSequence
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.pool = np.asarray(self.pool, dtype=float)
        self.base = np.asarray(self.base, dtype=int)
        self.centers = [np.asarray(c, dtype=int) for c in self.centers]
        self.assign = np.asarray(self.assign, dtype=int).reshape(len(self.centers), self.base.size)

    @property
    def n_levels(self):
        return len(self.centers)

    @property
    def T(self):
        return self.pool[self.base]

    def points(self, s):
        """``pi_s t`` for every ``t`` (levels past the last repeat it)."""
        return self.pool[self.assign[min(s, self.n_levels - 1)]]

    def increments(self, s):
        """``Delta_s t = pi_s t - pi_{s-1} t``, with ``Delta_0 t = pi_0 t``."""
        if s >= self.n_levels:
            return np.zeros_like(self.T)
        if s == 0:
            return self.points(0)
        return self.points(s) - self.points(s - 1)

    def level_sizes(self):
        return [int(c.size) for c in self.centers]

    def chain_distances(self, metric=None):
        """``d(t, pi_s t)`` as an ``(L, m)`` array."""
        d = get_metric(metric or self.metric)
        T = self.T
        return np.array([[d(T[i], self.pool[self.assign[s, i]]) for i in range(T.shape[0])]
                         for s in range(self.n_levels)])

    def set_distances(self, metric=None):
        """``d(t, T_s)`` as an ``(L, m)`` array."""
        d = get_metric(metric or self.metric)
        T = self.T
        return np.array([np.min(d.pairwise(T, self.pool[c]), axis=1) for c in self.centers])

    def validate(self):
        """Raise ``ValueError`` if the cardinality or membership invariants fail."""
        for s, c in enumerate(self.centers):
            budget = self.eta.budget(s, cap=self.pool.shape[0]) if s < len(self.eta) else math.inf
            if c.size > budget:
                raise ValueError(f"level {s} has {c.size} centers, budget {budget}")
            if not np.all(np.isin(self.assign[s], c)):
                raise ValueError(f"pi_{s} maps outside T_{s}")
        if self.eta[0] == 0 and self.centers[0].size != 1:
            raise ValueError("|T_0| must be 1 when eta_0 = 0")
        return True

    def final_is_exact(self, tol=0.0):
        return bool(np.all(np.abs(self.points(self.n_levels - 1) - self.T) <= tol))

    def to_dict(self):
        return {
            "pool": self.pool.tolist(),
            "base": self.base.tolist(),
            "centers": [c.tolist() for c in self.centers],
            "assign": self.assign.tolist(),
            "metric": self.metric,
            "eta": self.eta.to_dict(),
            "meta": self.meta,
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["pool"]), np.array(d["base"]), [np.array(c) for c in d["centers"]],
                   np.array(d["assign"]), d["metric"], EtaSequence.from_dict(d["eta"]), d.get("meta", {}))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# -- greedy construction ---------------------------------------------------

def _nearest(dist_rows):
    """Index of the nearest center for each column; ties go to the earliest center."""
    return np.argmin(dist_rows, axis=0)


def greedy_admissible(T, metric="l2", eta=None, root="first"):
    """Farthest-point admissible sequence of a finite set.

    Centers are taken from a farthest-point traversal, so levels are nested:
    ``T_s`` is the first ``min(floor(2^eta_s), |pool|)`` points of the order
    and ``pi_s`` maps to the nearest of them (ties to the earliest).  The
    traversal starts at ``T[0]`` (``root="first"``) or, with
    ``root="centroid"``, at whichever of ``T`` and its centroid has the
    smallest maximal distance to ``T``.  Levels stop at the first ``s`` whose
    budget covers the pool, so the last level is exact.
    """
    P = check_points(T, "T")
    m = P.shape[0]
    d = get_metric(metric)
    if eta is None:
        eta = make_eta("standard", cap=max(math.log2(m + 1), 1.0))
    pool = P
    start = 0
    if root == "centroid" and m > 1:
        c = P.mean(axis=0, keepdims=True)
        radius_c = float(np.max(d.pairwise(c, P)))
        radius_t = np.max(d.pairwise(P, P), axis=1)
        if radius_c < float(np.min(radius_t)):
            pool = np.vstack([P, c])
            start = m
        else:
            start = int(np.argmin(radius_t))
    elif root == "first":
        start = 0
    elif root != "centroid":
        raise ValueError(f"unknown root rule {root!r}")

    size = pool.shape[0]
    D = d.pairwise(pool, P)  # pool x T
    Dpp = d.pairwise(pool, pool)
    order = [start]
    mind = Dpp[start].copy()
    mind[start] = -1.0
    while len(order) < size:
        nxt = int(np.argmax(mind))
        order.append(nxt)
        mind = np.minimum(mind, Dpp[nxt])
        mind[order] = -1.0
    order = np.array(order)

    centers, assign = [], []
    for s in range(len(eta)):
        k = min(eta.budget(s, cap=size), size)
        if k < 1:
            raise ValueError(f"budget 2^eta_{s} < 1")
        cs = order[:k]
        centers.append(cs)
        assign.append(cs[_nearest(D[cs])])
        if k >= size:
            break
    else:
        raise ValueError("eta schedule too short to reach |T|; extend it")
    return AdmissibleSequence(pool, np.arange(m), centers, np.array(assign), d.name, eta,
                              {"construction": "greedy", "root": root})


def _standard_budget(s, cap):
    if s == 0:
        return 1
    e = 2**s
    return cap if e >= math.log2(max(cap, 1)) else min(cap, 2**e)


def gamma_beta_value(A, beta, metric=None):
    """``sup_t sum_s 2^(s/beta) d(t, T_s)`` for the given sequence (an upper bound on gamma_beta)."""
    beta = check_real(beta, "beta", low=0.0, strict_low=True)
    if A.eta.kind != "standard":
        raise ValueError("gamma_beta weights presume the standard schedule")
    dist = A.set_distances(metric)
    w = 2.0 ** (np.arange(A.n_levels) / beta)
    return float(np.max(w @ dist))


def gamma_beta_bruteforce(T, metric="l2", beta=2.0, max_levels=2):
    """Exact minimum of ``sup_t sum_s 2^(s/beta) d(t, T_s)`` with centers in ``T``.

    Levels ``0 .. max_levels-1`` range over all subsets of ``T`` of the largest
    admissible size; from level ``max_levels`` on the set is ``T`` itself,
    which needs ``2^(2^max_levels) >= |T|``.
    """
    P = check_points(T, "T")
    m = P.shape[0]
    if m > 6:
        raise ValueError("brute force limited to |T| <= 6")
    max_levels = check_int(max_levels, "max_levels", low=1, high=3)
    if 2 ** (2**max_levels) < m:
        raise ValueError("max_levels too small for |T|")
    beta = check_real(beta, "beta", low=0.0, strict_low=True)
    D = get_metric(metric).pairwise(P, P)
    choices = []
    for s in range(max_levels):
        k = min(_standard_budget(s, m), m)
        if k >= m:
            break
        choices.append([(s, np.array(c)) for c in itertools.combinations(range(m), k)])
    best = math.inf
    for combo in itertools.product(*choices):
        total = np.zeros(m)
        for s, c in combo:
            total += 2.0 ** (s / beta) * np.min(D[c], axis=0)
        best = min(best, float(np.max(total)))
    return 0.0 if math.isinf(best) else best


class GreedyAdmissible(BaseEstimator):
    """Farthest-point admissible sequence as an estimator.

    Parameters
    ----------
    metric : {"l2", "linf"} or callable, default="l2"
    eta : EtaSequence or None, default=None
        Growth schedule; the standard one if ``None``.
    root : {"first", "centroid"}, default="first"

    Attributes
    ----------
    sequence_ : AdmissibleSequence
    n_features_in_ : int
    """

    def __init__(self, metric="l2", eta=None, root="first"):
        self.metric = metric
        self.eta = eta
        self.root = root

    def fit(self, X, y=None):
        P = check_points(X, "X")
        self.n_features_in_ = P.shape[1]
        self.sequence_ = greedy_admissible(P, self.metric, self.eta, self.root)
        return self

    def transform(self, X):
        """Chain distances ``d(t, pi_s t)`` of the fitted set, shape ``(m, L)``."""
        check_is_fitted(self)
        return self.sequence_.chain_distances(get_metric(self.metric)).T

    def gamma(self, beta):
        check_is_fitted(self)
        return gamma_beta_value(self.sequence_, beta, get_metric(self.metric))


# -- the sparse-shell construction on the Euclidean ball ---------------------------

def top_coordinates(v, k):
    """Keep the ``k`` largest ``|v_i|`` (ties to the lowest index), zero the rest."""
    out = np.zeros_like(v)
    if k >= v.size:
        return v.copy()
    idx = np.argsort(-np.abs(v), kind="stable")[:k]
    out[idx] = v[idx]
    return out


def _greedy_net(cands, eps, metric, budget):
    """Maximal eps-separated subset in candidate order, capped at ``budget``."""
    centers = []
    for i in range(cands.shape[0]):
        if len(centers) >= budget:
            break
        if not centers or np.min(metric.pairwise(cands[i:i + 1], cands[centers])) > eps:
            centers.append(i)
    return np.array(centers, dtype=int)


def ball_admissible(n, p, kappa1=None, kappa4=10.0, s1=None, X_cal=None, T=None,
                    N=None, n_directions=64, seed=0):
    """Admissible sequence of a finite set of directions in ``B_2^n`` by sparse shells.

    Let ``s*`` be the first level with ``2^(s+s1) >= n``.  From ``s*`` on,
    ``T_s`` is a greedy ``eps_s``-net of ``T`` with ``eps_s = 2^(-2^(s+s1)/n)``
    and ``pi_s`` is the nearest center; the schedule runs until the net is all
    of ``T``.  Below ``s*`` the construction goes down by dimension reduction:
    the candidate for ``t`` is the restriction of ``pi_(s+1) t`` to its
    ``2^(s+s1)`` largest coordinates, ``T_s`` is a greedy net of the
    candidates with ``eps_s = 2^(-(s+s1)/2) M_(2^(s+s1))``, and ``pi_s t`` is
    the center nearest the candidate.  Distances are the psi_2 proxy
    ``||v-w||_inf M_|supp(v-w)|`` with ``M`` estimated from ``X_cal``.
    ``T`` defaults to ``n_directions`` random unit vectors.
    """
    n = check_int(n, "n", low=2)
    p = check_real(p, "p", low=2.0, strict_low=True)
    if X_cal is None:
        raise ValueError("ball_admissible needs a calibration sample X_cal")
    Xc = np.asarray(getattr(X_cal, "rows", X_cal), dtype=float)
    if Xc.shape[1] != n:
        raise ValueError("calibration sample has the wrong dimension")
    if s1 is None:
        s1 = default_s1(n, p)
    s1 = check_int(s1, "s1", low=0)
    if T is None:
        rng = np.random.default_rng(seed)
        G = rng.standard_normal((n_directions, n))
        T = G / np.linalg.norm(G, axis=1, keepdims=True)
    T = check_points(T, "T", dim=n)
    m = T.shape[0]
    metric = Psi2ProxyMetric(M_ell_profile(Xc))
    s_star = max(0, int(math.ceil(math.log2(n))) - s1)

    # upper levels: nets of T until exact
    upper_centers, upper_assign = [], []
    s = s_star
    while True:
        eps = 2.0 ** (-(2.0 ** (s + s1)) / n)
        c = _greedy_net(T, eps, metric, budget=m)
        a = c[np.argmin(metric.pairwise(T[c], T), axis=0)]
        upper_centers.append(c)
        upper_assign.append(a)
        if c.size == m or np.all(metric.pairwise(T[c], T).min(axis=0) == 0):
            # make the last level exact
            upper_centers[-1] = np.arange(m)
            upper_assign[-1] = np.arange(m)
            break
        s += 1
    n_levels = s + 1
    cap = max(N or 0, 2 * n)
    eta = make_eta("ball", n=n, s1=s1, kappa4=kappa4, cap=cap, min_length=n_levels + 1, strict=True)

    pool = [T]
    offset = m
    centers = [None] * n_levels
    assign = np.zeros((n_levels, m), dtype=int)
    for i, (c, a) in enumerate(zip(upper_centers, upper_assign)):
        centers[s_star + i] = c
        assign[s_star + i] = a

    current = T[assign[s_star]] if s_star < n_levels else T
    for s in range(s_star - 1, -1, -1):
        k = 2 ** (s + s1)
        cands = np.array([top_coordinates(v, k) for v in current])
        eps = 2.0 ** (-(s + s1) / 2) * metric.M[min(k, n)]
        budget = eta.budget(s, cap=m)
        c = _greedy_net(cands, eps, metric, budget)
        near = c[np.argmin(metric.pairwise(cands[c], cands), axis=0)]
        pool.append(cands[c])
        idx_of = {int(ci): offset + j for j, ci in enumerate(c)}
        centers[s] = np.array([idx_of[int(ci)] for ci in c])
        assign[s] = np.array([idx_of[int(ci)] for ci in near])
        offset += c.size
        current = cands[near]
    pool = np.vstack(pool)
    meta = {
        "construction": "ball",
        "n": n, "p": p, "kappa1": kappa1, "kappa4": kappa4, "s1": s1, "s_star": s_star,
        "M_profile": metric.M[1:].tolist(),
    }
    return AdmissibleSequence(pool, np.arange(m), centers, assign, metric.name, eta, meta)


class BallAdmissible(BaseEstimator):
    """Sparse-shell admissible sequence of directions in ``B_2^n``.

    Parameters
    ----------
    p : float, default=3.0
        Exponent of the small-diameter body the rows live in.
    kappa4 : float, default=10.0
    s1 : int or None, default=None
        Level offset; ``None`` picks ``max(1, floor(delta log2 n))``.
    n_directions : int, default=64
    seed : int, default=0

    Attributes
    ----------
    sequence_ : AdmissibleSequence
    M_profile_ : ndarray of shape (n,)
        ``M_ell`` estimated from the calibration rows.
    """

    def __init__(self, p=3.0, kappa4=10.0, s1=None, n_directions=64, seed=0):
        self.p = p
        self.kappa4 = kappa4
        self.s1 = s1
        self.n_directions = n_directions
        self.seed = seed

    def fit(self, X, y=None, T=None):
        Xc = np.asarray(getattr(X, "rows", X), dtype=float)
        self.n_features_in_ = Xc.shape[1]
        self.sequence_ = ball_admissible(Xc.shape[1], self.p, kappa4=self.kappa4, s1=self.s1,
                                         X_cal=Xc, T=T, n_directions=self.n_directions, seed=self.seed)
        self.M_profile_ = np.array(self.sequence_.meta["M_profile"])
        return self

    def transform(self, X):
        """Values ``<pi_s t, X_i>`` at the last level, shape ``(N, m)``."""
        check_is_fitted(self)
        return np.asarray(getattr(X, "rows", X), dtype=float) @ self.sequence_.T.T
