"""Tail quantiles ``y_j``, ``z_j`` and the tail functionals ``f_u``, ``F_u``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .._validation import check_int, check_real
from ..samplers import DistributionSpec, derive_seed, lq_norm, sample_scalar, tail_isf

KAPPA3 = 4.0


def delta_j(j, N, eps):
    """``(j / (eN))^(1+eps)``."""
    return (j / (math.e * N)) ** (1.0 + eps)


def dyadic_indices(N):
    """``1, 2, 4, ... <= N``."""
    out = [1]
    while out[-1] * 2 <= N:
        out.append(out[-1] * 2)
    return np.array(out)


@dataclass(frozen=True)
class LqTail:
    """A law known only through ``||Y||_q``; quantiles follow ``||Y||_q (N/j)^((1+eps)/q)``."""

    norm: float
    q: float


@dataclass(frozen=True)
class Psi1Tail:
    """Quantiles of a symmetric exponential law with unit variance: ``(1+eps) log(eN/j) / sqrt 2``."""

    scale: float = 1.0


def _empirical_quantile(abs_sorted_desc, delta):
    """Smallest ``y`` with empirical ``Pr(|Y| >= y) <= delta``."""
    S = abs_sorted_desc.size
    r = int(math.floor(delta * S))  # at most r sample points may be >= y
    if r >= S:
        return 0.0
    return float(abs_sorted_desc[r])


def tail_quantile_y(source, j, N, eps, empirical_factor=10.0):
    """``y_j = inf{y : Pr(|Y| >= y) <= delta_j}``.

    ``source`` is a scalar :class:`DistributionSpec` (analytic inversion), an
    :class:`LqTail` or :class:`Psi1Tail`, a callable returning the tail
    quantile at a given ``delta``, or an array of samples (empirical
    quantile; at least ``empirical_factor / delta_j`` samples are required).
    """
    N = check_int(N, "N", low=1)
    j = check_int(j, "j", low=1, high=N)
    eps = check_real(eps, "eps", low=0.0)
    d = delta_j(j, N, eps)
    if d >= 1:
        return 0.0
    if isinstance(source, DistributionSpec):
        return tail_isf(source, d)
    if isinstance(source, LqTail):
        return source.norm * (N / j) ** ((1.0 + eps) / source.q)
    if isinstance(source, Psi1Tail):
        return source.scale * (1.0 + eps) * math.log(math.e * N / j) / math.sqrt(2.0)
    if callable(source):
        return float(source(d))
    x = np.abs(np.asarray(source, dtype=float).ravel())
    if x.size < empirical_factor / d:
        raise ValueError(
            f"empirical quantile at delta={d:.3g} needs >= {math.ceil(empirical_factor / d)} samples, got {x.size}"
        )
    return _empirical_quantile(-np.sort(-x), d)


@dataclass
class QuantileTable:
    """Quantiles at the dyadic indices ``1, 2, 4, ... <= N``."""

    N: int
    eps: float
    js: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __getitem__(self, j):
        hit = np.flatnonzero(self.js == j)
        if hit.size == 0:
            raise KeyError(f"missing dyadic quantile y_{j}")
        return float(self.values[hit[0]])

    def scaled(self, c):
        return QuantileTable(self.N, self.eps, self.js.copy(), self.values * c, dict(self.meta))

    @classmethod
    def from_source(cls, source, N, eps, **kw):
        js = dyadic_indices(N)
        vals = np.array([tail_quantile_y(source, int(j), N, eps, **kw) for j in js])
        return cls(N, eps, js, vals)

    @classmethod
    def zeros(cls, N, eps=1.0):
        js = dyadic_indices(N)
        return cls(N, eps, js, np.zeros(js.size))


def class_quantile_tables(values, N, eps, empirical_factor=10.0):
    """Empirical dyadic quantiles for every column of ``values`` (samples x functions).

    Returns ``(Y, z)``: ``Y[h]`` is the table of function ``h`` and ``z`` is the
    class-wide table ``max_h y_j(h)``.
    """
    V = np.abs(np.asarray(values, dtype=float))
    if V.ndim == 1:
        V = V[:, None]
    S, m = V.shape
    js = dyadic_indices(N)
    deltas = np.array([delta_j(int(j), N, eps) for j in js])
    if S < empirical_factor / deltas.min():
        raise ValueError(
            f"empirical quantiles need >= {math.ceil(empirical_factor / deltas.min())} samples, got {S}"
        )
    ranks = np.floor(deltas * S).astype(int)
    out = np.empty((m, js.size))
    kth = np.unique(np.clip(S - 1 - ranks, 0, S - 1))
    for h in range(m):
        col = np.partition(V[:, h], kth)
        # (r+1)-th largest is the (S-1-r)-th smallest
        out[h] = col[np.clip(S - 1 - ranks, 0, S - 1)]
    tables = [QuantileTable(N, eps, js, out[h]) for h in range(m)]
    z = QuantileTable(N, eps, js, out.max(axis=0) if m else np.zeros(js.size))
    return tables, z


def f_u(k, u, table, kappa3=KAPPA3):
    """``kappa3 sqrt(u) (sum_{j : 2^j <= ceil(k/u)} 2^j y_{2^j}^2)^(1/2)``; ``F_u`` when given ``z``."""
    k = check_int(k, "k", low=1)
    u = check_real(u, "u", low=1.0)
    top = math.ceil(k / u)
    total = 0.0
    j = 1
    while j <= top:
        total += j * table[j] ** 2
        j *= 2
    return kappa3 * math.sqrt(u) * math.sqrt(total)


F_u = f_u


def f_u_profile(table, u, kappa3=KAPPA3, kmax=None):
    """``(f_u(k))_{k=1..kmax}`` (``kmax`` defaults to ``N``)."""
    kmax = table.N if kmax is None else kmax
    k = np.arange(1, kmax + 1)
    top = np.ceil(k / u)
    csum = np.cumsum(table.js * table.values**2)
    # number of dyadic j with j <= top
    cnt = np.searchsorted(table.js, top, side="right")
    if math.ceil(kmax / u) > table.N:
        raise KeyError("quantile table does not cover the requested range")
    return kappa3 * math.sqrt(u) * np.sqrt(csum[cnt - 1])


@dataclass
class TailLemmaResult:
    failure_rate: float
    trials: int
    bound: float
    stderr: float
    constants: dict

    def to_dict(self):
        return dict(self.__dict__)


def tail_lemma_violations(dist, N, ell, u, eps, kappa3=KAPPA3, trials=1000, seed=0, quantiles=None):
    """Per-trial indicator of ``exists k > u ell : sum_{i=u ell+1}^k (Y_i^2)* > f_u(Y, k)^2``."""
    N = check_int(N, "N", low=1)
    ell = check_int(ell, "ell", low=1, high=N)
    u = check_real(u, "u", low=1.0)
    eps = check_real(eps, "eps", low=0.0, strict_low=True)
    trials = check_int(trials, "trials", low=1)
    table = quantiles if quantiles is not None else QuantileTable.from_source(dist, N, eps)
    start = int(math.floor(u * ell))
    out = np.zeros(trials, dtype=bool)
    if start >= N:
        return out
    f2 = f_u_profile(table, u, kappa3) ** 2
    for t in range(trials):
        Y = sample_scalar(dist, N, derive_seed(seed, "tail_lemma", t))
        tail = np.cumsum(-np.sort(-(Y * Y))[start:])  # k = start+1 .. N
        out[t] = bool(np.any(tail > f2[start:] * (1 + 1e-12)))
    return out


def tail_lemma_bound(N, ell, u, eps, c2=1.0):
    """``2 exp(-c2 u eps ell log(eN/ell))``."""
    return 2.0 * math.exp(-c2 * u * eps * ell * math.log(math.e * N / ell))


def check_tail_lemma(dist, N, ell, u, eps, kappa3=KAPPA3, trials=1000, seed=0, quantiles=None):
    """Monte Carlo failure rate of the tail-selector bound, with the bound for overlay (``c2 = 1``)."""
    bad = tail_lemma_violations(dist, N, ell, u, eps, kappa3, trials, seed, quantiles)
    rate = float(bad.mean())
    return TailLemmaResult(
        failure_rate=rate,
        trials=bad.size,
        bound=tail_lemma_bound(N, ell, u, eps),
        stderr=math.sqrt(max(rate * (1 - rate), 0.0) / bad.size),
        constants={"kappa3": kappa3, "c2": 1.0, "N": N, "ell": ell, "u": u, "eps": eps},
    )


def lq_tail_constant(norm_q, q, eps, N, u, kappa3=KAPPA3):
    """Smallest ``c`` with ``f_u(k) <= c sqrt(u) ||Y||_q phi_{q,eps}(k)`` for all ``k <= N``."""
    from .phi import PhiFamily

    table = QuantileTable.from_source(LqTail(norm_q, q), N, eps)
    prof = f_u_profile(table, u, kappa3)
    k = np.arange(1, N + 1)
    phi = PhiFamily.lq_family(q, N, eps).values(k)
    return float(np.max(prof / (math.sqrt(u) * norm_q * phi)))


def lq_tail_for(spec, q):
    return LqTail(lq_norm(spec, q), q)
