"""Decompositions of finite sets ``V`` in ``R^N`` and the Bernoulli bound they yield."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .._validation import check_points, check_real
from .admissible import AdmissibleSequence
from .eta import EtaSequence
from .omega import OmegaReport, _Recorder
from .phi import PhiFamily, phi_aggregates

REL_TOL = 1e-12


@dataclass
class DecompositionSpec:
    """An admissible sequence of ``V`` with level functionals and seminorm values.

    Attributes
    ----------
    V : ndarray of shape (m, N)
    eta : EtaSequence
    points : ndarray of shape (L, m, N)
        ``pi_s v`` for every level and element.
    theta : ndarray of shape (L, m)
        ``theta_s(Delta_s v)`` (``theta_0(pi_0 v)`` at ``s = 0``).
    inc_norms : ndarray of shape (L, m)
        ``||Delta_s v||``.
    norms : ndarray of shape (m,)
        ``||v||``; ``d`` is their maximum.
    alpha, gamma : float
    """

    V: np.ndarray
    eta: EtaSequence
    points: np.ndarray
    theta: np.ndarray
    inc_norms: np.ndarray
    norms: np.ndarray
    alpha: float = 1.0
    gamma: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.V = check_points(self.V, "V")
        m, N = self.V.shape
        self.points = np.asarray(self.points, dtype=float).reshape(-1, m, N)
        L = self.points.shape[0]
        self.theta = np.asarray(self.theta, dtype=float).reshape(L, m)
        self.inc_norms = np.asarray(self.inc_norms, dtype=float).reshape(L, m)
        self.norms = np.asarray(self.norms, dtype=float).reshape(m)
        for name in ("theta", "inc_norms", "norms"):
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError(f"{name} must be finite and nonnegative")
        if len(self.eta) < L:
            raise ValueError(f"eta has {len(self.eta)} levels, the decomposition {L}")
        self.alpha = check_real(self.alpha, "alpha", low=0.0)
        if self.gamma is None:
            self.gamma = float(np.max(np.sum(self.theta, axis=0)))
        self.gamma = check_real(self.gamma, "gamma", low=0.0)

    @property
    def N(self):
        return self.V.shape[1]

    @property
    def n_levels(self):
        return self.points.shape[0]

    @property
    def d(self):
        return float(np.max(self.norms))

    def increments(self, s):
        if s == 0:
            return self.points[0]
        return self.points[s] - self.points[s - 1]

    @classmethod
    def from_admissible(cls, A: AdmissibleSequence, theta, seminorm, alpha=1.0, gamma=None):
        """Evaluate a seminorm callable on every increment of ``A``."""
        pts = np.stack([A.points(s) for s in range(A.n_levels)])
        incs = [A.increments(s) for s in range(A.n_levels)]
        inc_norms = np.array([[seminorm(v) for v in inc] for inc in incs])
        norms = np.array([seminorm(v) for v in A.T])
        if callable(theta):
            theta = np.array([[theta(s, v) for v in incs[s]] for s in range(A.n_levels)])
        return cls(A.T, A.eta, pts, theta, inc_norms, norms, alpha, gamma)

    def to_dict(self):
        return {
            "V": self.V.tolist(), "eta": self.eta.to_dict(), "points": self.points.tolist(),
            "theta": self.theta.tolist(), "inc_norms": self.inc_norms.tolist(), "norms": self.norms.tolist(),
            "alpha": self.alpha, "gamma": self.gamma, "meta": self.meta,
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["V"]), EtaSequence.from_dict(d["eta"]), np.array(d["points"]),
                   np.array(d["theta"]), np.array(d["inc_norms"]), np.array(d["norms"]),
                   d.get("alpha", 1.0), d.get("gamma"), d.get("meta", {}))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DecompositionParams:
    A1: float
    A2: float
    A_Phi: float
    B4: float
    B_qe: float | None
    Phi: float
    Phi_s: tuple

    def to_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def decomposition_params(D: DecompositionSpec, f: PhiFamily):
    """``A_1``, ``A_2`` (levels ``s > 0`` with ``eta_s <= N``) and ``A_Phi``, ``B_4``, ``B_{q,eps}`` (all such ``s``)."""
    if f.N != D.N:
        raise ValueError(f"phi family has N={f.N}, the decomposition N={D.N}")
    L = D.n_levels
    eta = D.eta.values[:L]
    within = eta <= D.N
    positive = within & (np.arange(L) > 0)
    Phi, Phi_s = phi_aggregates(f, eta)
    norms = D.inc_norms
    phi_eta = np.where(positive, f.values(np.maximum(eta, 1.0)), 0.0)

    def sup(weights):
        return float(np.max(weights @ norms)) if L else 0.0

    A1 = sup(phi_eta)
    A2 = sup(phi_eta**2)
    A_Phi = sup(np.where(within, np.nan_to_num(Phi_s) * np.sqrt(eta), 0.0))
    B4 = sup(np.where(within, np.sqrt(eta), 0.0))
    B_qe = None
    if f.kind == "lq":
        B_qe = sup(np.where(within, eta ** (1.0 - 2.0 * f.exponent), 0.0))
    return DecompositionParams(A1, A2, A_Phi, B4, B_qe, Phi, tuple(Phi_s.tolist()))


def _topk(M):
    """Row ``k-1``: top-``k`` l_2 norm of each row of ``M`` (shape ``(N, m)``)."""
    return np.sqrt(np.cumsum(-np.sort(-(M * M), axis=1), axis=1)).T


def verify_decomposition(D: DecompositionSpec, f: PhiFamily):
    """Check the three defining conditions for all subsets via top-``k`` scans."""
    N = D.N
    ks = np.arange(1, N + 1)
    phi_k = f.values(ks.astype(float))
    a, g, d = D.alpha, D.gamma, D.d
    rec = _Recorder("decomposition")
    # 1. chain sums of theta
    total = np.sum(D.theta, axis=0)
    rec.check("condition1", total[None, :], np.full((1, total.size), g), ks=[0])
    # 2. the elements themselves
    rec.check("condition2", _topk(D.V), (a * (g + d * phi_k))[:, None], ks=ks)
    # 3. increments
    for s in range(D.n_levels):
        prof = _topk(D.increments(s))
        th = D.theta[s][None, :]
        if D.eta[s] <= N:
            rec.check(("condition3", s), prof, a * (th + D.inc_norms[s][None, :] * phi_k[:, None]), ks=ks)
        if D.eta[s] >= N:
            rec.check(("condition3", s), prof, np.broadcast_to(a * th, prof.shape), ks=ks)
    rep = rec.report()
    rep.info["min_slack"] = min(rep.margins.values()) if rep.margins else math.inf
    return rep


@dataclass(frozen=True)
class BernoulliBound:
    value: float
    mode: str
    r: float
    constants: dict
    params: dict

    def __float__(self):
        return self.value


def bernoulli_rhs(D: DecompositionSpec, f: PhiFamily, r=1.0, mode="full", params=None):
    """Right-hand side of the Bernoulli bound with unit constants.

    ``mode="full"``: ``c2 r alpha^2 (gamma (gamma + d phi(N) + A_1) + d (A_2 + A_Phi))``.
    ``mode="compact"``: ``r alpha^2 (gamma^2 + d sqrt(N) (gamma + B_4))`` for the beta family
    or ``q > 4``, and ``alpha^2 r / (1 - 2(1+eps)/q) (gamma^2 + d sqrt(N) gamma + d N^(2(1+eps)/q) B_{q,eps})``
    for ``2 < q <= 4``.  ``"compact_beta"`` / ``"compact_lq"`` force one form and
    refuse a family it does not apply to.
    """
    r = check_real(r, "r", low=1.0)
    P = params or decomposition_params(D, f)
    a, g, d, N = D.alpha, D.gamma, D.d, D.N
    constants = {"c2": 1.0}
    heavy = f.kind == "lq" and f.q <= 4
    if mode == "full":
        value = r * a * a * (g * (g + d * f.values(float(N)) + P.A1) + d * (P.A2 + P.A_Phi))
    elif mode in ("compact", "compact_beta", "compact_lq"):
        if mode == "compact_beta" and heavy:
            raise ValueError("the B_4 form needs the beta family or q > 4")
        if mode == "compact_lq" and not heavy:
            raise ValueError("the B_{q,eps} form needs the L_q family with 2 < q <= 4")
        if heavy:
            c = 1.0 - 2.0 * f.exponent
            value = a * a * r / c * (g * g + d * math.sqrt(N) * g + d * N ** (2.0 * f.exponent) * P.B_qe)
        else:
            value = r * a * a * (g * g + d * math.sqrt(N) * (g + P.B4))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return BernoulliBound(float(value), mode, r, constants, P.to_dict())
