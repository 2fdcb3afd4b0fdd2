"""Checks of the events Omega_1, Omega_2, Omega_3 on a sample, and of their consequences.

Classes are linear: an admissible sequence of directions ``t`` in ``R^n``
indexes the functions ``<t, .>``, so every function is evaluated on the rows
of ``X`` by a matrix product.  Every check over "all subsets ``I``" is a scan
over top-``k`` sums of the decreasing rearrangement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .._validation import check_matrix, check_real
from .eta import s0_and_ells
from .tails import KAPPA3, class_quantile_tables, f_u, f_u_profile

TOL = 1e-9


@dataclass
class OmegaReport:
    """Outcome of an event check.

    ``first_violation`` is ``None`` exactly when ``holds``; otherwise it
    records ``level``, ``element``, subset size ``k``, ``lhs`` and ``rhs``.
    ``margins`` maps a level to the smallest slack ``rhs - lhs`` seen there.
    """

    holds: bool
    first_violation: dict | None = None
    margins: dict = field(default_factory=dict)
    name: str = ""
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.holds != (self.first_violation is None):
            raise ValueError("holds must be equivalent to an empty first_violation")

    def __bool__(self):
        return self.holds

    def to_dict(self):
        return {"name": self.name, "holds": self.holds, "first_violation": self.first_violation,
                "margins": {str(k): v for k, v in self.margins.items()}, "info": self.info}


class _Recorder:
    def __init__(self, name):
        self.name = name
        self.first = None
        self.margins = {}

    def check(self, level, lhs, rhs, ks=None):
        """``lhs``/``rhs`` are ``(K, m)`` arrays over subset sizes ``ks`` and elements."""
        lhs = np.atleast_2d(lhs)
        rhs = np.broadcast_to(rhs, lhs.shape)
        if lhs.size == 0:
            return
        slack = rhs - lhs
        key = level
        self.margins[key] = float(min(self.margins.get(key, math.inf), np.min(slack)))
        bad = slack < -TOL * np.maximum(1.0, np.abs(rhs))
        if self.first is None and np.any(bad):
            # first by element, then by subset size
            h, kk = (int(i) for i in np.argwhere(bad.T)[0])
            k = int(ks[kk]) if ks is not None else None
            self.first = {"level": level, "element": h, "k": k,
                          "lhs": float(lhs[kk, h]), "rhs": float(rhs[kk, h])}

    def report(self, **info):
        return OmegaReport(self.first is None, self.first, self.margins, self.name, info)


def _values(X, vecs):
    return X @ vecs.T


def _sorted_sq(values):
    """Decreasing rearrangement of squared values, column-wise."""
    return -np.sort(-(values * values), axis=0)


def _topk_norms(values):
    """``(N, m)``: row ``k-1`` holds the top-``k`` l_2 norm of each column."""
    return np.sqrt(np.cumsum(_sorted_sq(values), axis=0))


def _theta(theta, L, m):
    th = np.asarray(theta, dtype=float)
    if th.ndim == 1:
        th = np.repeat(th[:, None], m, axis=1)
    if th.shape[0] < L:
        raise ValueError(f"theta covers {th.shape[0]} levels, the sequence has {L}")
    return th


def _levels(A, N):
    s0, ells = s0_and_ells(A.eta, N)
    if s0 is None:
        raise ValueError("no level reaches log(eN); extend the schedule")
    return s0, ells


def _ell(ells, s, N):
    return int(ells[s]) if s < ells.size else N


def _nu(u, ell, N):
    return min(int(math.floor(u * ell)), N)


def check_omega1(X, A, theta, u, theta_root=None):
    """Top ``u ell_(s+1)`` sums of the increments against ``theta_{u,s}``, for ``s >= s0``."""
    X = check_matrix(getattr(X, "rows", X), "X")
    u = check_real(u, "u", low=1.0)
    N = X.shape[0]
    L, m = A.n_levels, A.base.size
    th = _theta(theta, L, m)
    s0, ells = _levels(A, N)
    rec = _Recorder("omega1")
    for s in range(s0, L):
        inc = A.increments(s)
        if not np.any(inc):
            continue
        prof = _topk_norms(_values(X, inc))
        k = _nu(u, _ell(ells, s + 1, N), N) if A.eta[s] <= N else N
        rec.check(s, prof[k - 1][None, :], th[s][None, :], ks=[k])
    # the level-s0 points themselves
    k = _nu(u, _ell(ells, s0 + 1, N), N)
    pts = A.points(s0)
    root = th[min(s0, L - 1)] if theta_root is None else np.broadcast_to(np.asarray(theta_root, float), (m,))
    prof = _topk_norms(_values(X, pts))
    rec.check("root", prof[k - 1][None, :], root[None, :], ks=[k])
    return rec.report(s0=s0)


@dataclass
class LinearTables:
    """Quantile tables for the increments ``Delta_s h`` and the class-wide ``z``."""

    inc: list  # inc[s][h] -> QuantileTable
    z: object
    N: int
    eps: float

    def scaled(self, c):
        return LinearTables([[t.scaled(c) for t in row] for row in self.inc], self.z.scaled(c), self.N, self.eps)


def build_linear_tables(A, X_cal, N, eps, extra_points=None):
    """Empirical quantile tables of every increment and of the class from a calibration sample.

    The class for ``z`` is every point of the sequence's pool (which contains
    ``T`` and all centers) together with ``extra_points``.
    """
    Xc = check_matrix(getattr(X_cal, "rows", X_cal), "X_cal")
    per_level = []
    for s in range(A.n_levels):
        inc = A.increments(s)
        uniq, inv = np.unique(np.round(inc, 15), axis=0, return_inverse=True)
        inv = np.asarray(inv).ravel()
        tabs = []
        for start in range(0, uniq.shape[0], 32):
            t, _ = class_quantile_tables(Xc @ uniq[start:start + 32].T, N, eps)
            tabs.extend(t)
        per_level.append([tabs[i] for i in inv])
    pts = A.pool if extra_points is None else np.vstack([A.pool, extra_points])
    zs = []
    for start in range(0, pts.shape[0], 32):
        _, z = class_quantile_tables(Xc @ pts[start:start + 32].T, N, eps)
        zs.append(z)
    z = zs[0]
    for other in zs[1:]:
        z = type(z)(z.N, z.eps, z.js, np.maximum(z.values, other.values))
    return LinearTables(per_level, z, N, eps)


def _fu_matrix(tables, u, kappa3, N):
    return np.column_stack([f_u_profile(t, u, kappa3, N) for t in tables])


def check_omega2(X, A, u, tables, kappa3=KAPPA3):
    """Tail sums past rank ``u ell_s`` against ``f_u`` (increments) and ``F_u`` (points), ``s >= s0``."""
    X = check_matrix(getattr(X, "rows", X), "X")
    u = check_real(u, "u", low=1.0)
    N = X.shape[0]
    L = A.n_levels
    s0, ells = _levels(A, N)
    Fz = f_u_profile(tables.z, u, kappa3, N)
    rec = _Recorder("omega2")
    for s in range(s0, max(s0 + 1, L)):
        start = _nu(u, _ell(ells, s, N), N)
        if start >= N:
            continue
        ks = np.arange(start + 1, N + 1)
        if s < L:
            inc = A.increments(s)
            if np.any(inc):
                tail = np.sqrt(np.cumsum(_sorted_sq(_values(X, inc))[start:], axis=0))
                rec.check(s, tail, _fu_matrix(tables.inc[s], u, kappa3, N)[start:], ks=ks)
        tail = np.sqrt(np.cumsum(_sorted_sq(_values(X, A.points(s)))[start:], axis=0))
        rec.check(("points", s), tail, Fz[start:, None], ks=ks)
    return rec.report(s0=s0)


def check_omega3(X, A, u, tables, kappa3=KAPPA3):
    """Below ``s0``: every top-``j`` sum against ``f_u`` / ``F_u``; vacuous if ``eta_0 >= log(eN)``."""
    X = check_matrix(getattr(X, "rows", X), "X")
    u = check_real(u, "u", low=1.0)
    N = X.shape[0]
    rec = _Recorder("omega3")
    if A.eta[0] >= math.log(math.e * N):
        return rec.report(vacuous=True)
    s0, _ = _levels(A, N)
    ks = np.arange(1, N + 1)
    for s in range(min(s0, A.n_levels)):
        inc = A.increments(s)
        if not np.any(inc):
            continue
        rec.check(s, _topk_norms(_values(X, inc)), _fu_matrix(tables.inc[s], u, kappa3, N), ks=ks)
    Fz = f_u_profile(tables.z, u, kappa3, N)
    rec.check(("points", s0), _topk_norms(_values(X, A.points(s0))), Fz[:, None], ks=ks)
    return rec.report(vacuous=False, s0=s0)


def gamma_u(theta, s0):
    """``max_h sum_{s > s0} theta_{u,s}(Delta_s h)`` over the given sequence."""
    th = np.asarray(theta, dtype=float)
    if th.ndim == 1:
        th = th[:, None]
    return float(np.max(np.sum(th[s0 + 1:], axis=0))) if th.shape[0] > s0 + 1 else 0.0


def check_good_event_conclusions(X, A, theta, u, tables, kappa3=KAPPA3, c2=1.0, theta_root=None):
    """The two consequences that hold on the intersection of the three events.

    1. ``top_k(Delta_s h) <= theta_{u,s} + f_u(Delta_s h, k)`` when ``eta_s <= N``
       and ``<= theta_{u,s}`` otherwise, with ``theta_{u,s} = 0`` below ``s0``.
    2. ``top_k(h) <= gamma_u + sum_{2^i <= k} F_u(c2 u 2^i) + R_{s0}(h, k)``.

    ``info`` reports ``gamma_u`` and whether the chain form of (2),
    ``gamma_u + sum_{s > s0, ell_s <= k} F_u(u ell_(s+1)) + R``, also holds.
    """
    X = check_matrix(getattr(X, "rows", X), "X")
    N = X.shape[0]
    L, m = A.n_levels, A.base.size
    th = _theta(theta, L, m).copy()
    s0, ells = _levels(A, N)
    root_default = th[min(s0, L - 1)].copy()
    th[:s0] = 0.0
    ks = np.arange(1, N + 1)
    rec = _Recorder("good_event")
    for s in range(L):
        inc = A.increments(s)
        prof = _topk_norms(_values(X, inc))
        if A.eta[s] <= N:
            rhs = th[s][None, :] + _fu_matrix(tables.inc[s], u, kappa3, N)
        else:
            rhs = np.broadcast_to(th[s][None, :], prof.shape)
        rec.check(s, prof, rhs, ks=ks)

    g = gamma_u(th[:L], s0)
    Fz = lambda k: f_u(max(1, int(math.ceil(k))), u, tables.z, kappa3)  # noqa: E731
    dyadic = np.array([sum(Fz(c2 * u * 2**i) for i in range(int(math.floor(math.log2(k))) + 1)) for k in ks])
    chain = np.array([sum(Fz(u * _ell(ells, s + 1, N)) for s in range(s0 + 1, len(A.eta)) if ells[s] <= k)
                      for k in ks])
    theta_root_v = root_default if theta_root is None else np.broadcast_to(np.asarray(theta_root, float), (m,))
    if s0 == 0:
        R = np.broadcast_to(theta_root_v[None, :], (N, m))
    else:
        Fk = np.array([Fz(k) for k in ks])
        R = np.minimum(theta_root_v[None, :], Fk[:, None])
    prof = _topk_norms(_values(X, A.T))
    rec.check("class", prof, g + dyadic[:, None] + R, ks=ks)
    chain_ok = bool(np.all(prof <= (g + chain[:, None] + R) * (1 + TOL)))
    return rec.report(gamma_u=g, s0=s0, chain_form_holds=chain_ok,
                      gamma_u_with_F=float(g + dyadic[-1]))
