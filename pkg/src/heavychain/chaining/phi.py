"""The growth profiles ``phi`` and their aggregates ``Phi``, ``Phi_s``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._validation import check_int, check_real


@dataclass(frozen=True)
class PhiFamily:
    """``phi_beta(x) = sqrt(x) log^(1/beta)(eN/x)`` or ``phi_{q,eps}(x) = sqrt(x) (N/x)^((1+eps)/q)``."""

    kind: str
    N: int
    beta: float | None = None
    q: float | None = None
    eps: float = 0.0

    def __post_init__(self):
        check_int(self.N, "N", low=1)
        if self.kind == "beta":
            check_real(self.beta, "beta", low=0.0, strict_low=True)
        elif self.kind == "lq":
            q = check_real(self.q, "q", low=2.0, strict_low=True)
            eps = check_real(self.eps, "eps", low=0.0)
            if eps >= q / 2 - 1:
                raise ValueError(f"need eps < q/2 - 1 = {q / 2 - 1}, got {eps}")
        else:
            raise ValueError(f"unknown phi family {self.kind!r}")

    @classmethod
    def beta_family(cls, beta, N):
        return cls("beta", int(N), beta=float(beta))

    @classmethod
    def lq_family(cls, q, N, eps=0.0):
        return cls("lq", int(N), q=float(q), eps=float(eps))

    @property
    def exponent(self):
        """``(1+eps)/q`` for the L_q family."""
        return (1.0 + self.eps) / self.q

    def __call__(self, x):
        return phi_eval(self, x)

    def values(self, x):
        """Vectorized evaluation without range checks (``x`` in ``[1, N]``)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "beta":
            return np.sqrt(x) * np.log(math.e * self.N / x) ** (1.0 / self.beta)
        return np.sqrt(x) * (self.N / x) ** self.exponent

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}


def phi_eval(f, x):
    x = float(x)
    if not 1 - 1e-12 <= x <= f.N + 1e-9 * f.N:
        raise ValueError(f"phi is defined on [1, N] = [1, {f.N}], got {x}")
    x = min(max(x, 1.0), float(f.N))
    return float(f.values(x))


def phi_aggregates(f, eta):
    """``Phi`` and ``Phi_s`` (``nan`` for levels with ``eta_s > N``) by direct summation.

    ``Phi_s`` sums ``i = 1 .. N - ceil(eta_s)``; for ``eta_s = 0`` it reduces to ``Phi``.
    """
    N = f.N
    i = np.arange(1, N + 1, dtype=float)
    w = f.values(i) ** 2 / i
    Phi = float(np.sqrt(np.sum(w * w)))
    vals = eta.values if hasattr(eta, "values") and not callable(eta.values) else np.asarray(eta, dtype=float)
    Phi_s = np.full(len(vals), np.nan)
    for s, e in enumerate(vals):
        if e > N:
            continue
        m = N - int(math.ceil(e))
        if m <= 0:
            Phi_s[s] = 0.0
            continue
        ii = np.arange(1, m + 1, dtype=float)
        shifted = e + ii
        Phi_s[s] = math.sqrt(float(np.sum(f.values(shifted) ** 2 / shifted * w[:m])))
    return Phi, Phi_s
