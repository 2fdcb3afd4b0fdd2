"""Growth schedules ``(eta_s)`` for admissible sequences, and the levels ``s0``, ``ell_s``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .._validation import check_int, check_real

LOG2_10 = math.log2(10.0)
RATIO_LOW, RATIO_HIGH = 1.1, 10.0


class EtaInvariantError(ValueError):
    """A schedule violates one of its growth invariants."""


@dataclass(frozen=True)
class EtaViolation:
    s: int
    which: str  # "product" or "ratio"
    lhs: float
    rhs: float


@dataclass
class EtaSequence:
    """A nondecreasing schedule ``eta_0 <= eta_1 <= ...``.

    ``kind`` is ``"standard"`` (``0, 2, 4, 8, ...``), ``"ball"`` or ``"custom"``;
    ``params`` records the constants used to build it.
    """

    values: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("eta must be a nonempty sequence")
        if np.any(self.values < 0) or np.any(np.diff(self.values) < 0):
            raise ValueError("eta must be nonnegative and nondecreasing")

    def __len__(self):
        return self.values.size

    def __getitem__(self, s):
        return float(self.values[s])

    def __iter__(self):
        return iter(self.values.tolist())

    def budget(self, s, cap=None):
        """``floor(2^eta_s)``, clipped at ``cap`` to stay finite."""
        eta = self.values[s]
        if cap is not None and eta >= math.log2(max(cap, 1)):
            return int(cap)
        return int(math.floor(2.0 ** eta))

    def violations(self):
        """All violations of the product and ratio invariants."""
        out = []
        v = self.values
        for s in range(v.size - 2):
            lhs, rhs = v[s] + v[s + 1], LOG2_10 + v[s + 2]
            if lhs > rhs + 1e-12:
                out.append(EtaViolation(s, "product", float(lhs), float(rhs)))
        for s in range(1, v.size - 1):
            if v[s] == 0:
                out.append(EtaViolation(s, "ratio", math.inf, RATIO_HIGH))
                continue
            r = v[s + 1] / v[s]
            if not RATIO_LOW - 1e-12 <= r <= RATIO_HIGH + 1e-12:
                out.append(EtaViolation(s, "ratio", float(r), RATIO_LOW if r < RATIO_LOW else RATIO_HIGH))
        return out

    def first_level_above(self, x):
        """First ``s`` with ``eta_s > x``, or ``None``."""
        idx = np.flatnonzero(self.values > x)
        return int(idx[0]) if idx.size else None

    def to_dict(self):
        return {"kind": self.kind, "values": self.values.tolist(), "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data):
        return cls(np.asarray(data["values"], dtype=float), data.get("kind", "custom"), dict(data.get("params", {})))


def standard_eta_value(s):
    return 0.0 if s == 0 else float(2**s)


def ball_eta_value(s, n, s1, kappa4):
    m = 2.0 ** (s + s1)
    return kappa4 * m * max(math.log(math.e * n / m), 1.0)


def default_s1(n, p):
    """``max(1, floor(delta log2 n))`` with ``delta = 0.9 (1/2 - 1/(2(p-1)))``."""
    delta = 0.9 * (0.5 - 1.0 / (2.0 * (p - 1.0)))
    return max(1, int(math.floor(delta * math.log2(n))))


def make_eta(kind="standard", *, N=None, n=None, cap=None, s1=None, kappa4=10.0, min_length=1, strict=True):
    """Build a schedule that extends until the first ``eta_s > cap``.

    ``cap`` defaults to ``max(N, 2n)``.  With ``strict=True`` the ratio
    invariant is enforced (an :class:`EtaInvariantError` names the offending
    level).  The product invariant is checked and any violation is recorded in
    ``params["violations"]``; the ball schedule is known to break it at its
    first few levels, where the logarithmic factor slows the growth.
    """
    if cap is None:
        if N is None and n is None:
            raise ValueError("make_eta needs cap, N or n")
        cap = max(N or 0, 2 * (n or 0))
    cap = check_real(cap, "cap", low=0.0)
    min_length = check_int(min_length, "min_length", low=1)
    if kind == "standard":
        value = standard_eta_value
        params = {}
    elif kind == "ball":
        if n is None:
            raise ValueError("ball schedule needs n")
        n = check_int(n, "n", low=2)
        if s1 is None:
            raise ValueError("ball schedule needs s1")
        s1 = check_int(s1, "s1", low=0)
        kappa4 = check_real(kappa4, "kappa4")
        if kappa4 < 10:
            raise ValueError(f"kappa4 must be >= 10, got {kappa4}")

        def value(s):
            return ball_eta_value(s, n, s1, kappa4)

        params = {"n": n, "s1": s1, "kappa4": kappa4}
    else:
        raise ValueError(f"unknown eta kind {kind!r}")

    vals = []
    s = 0
    while len(vals) < min_length or vals[-1] <= cap:
        vals.append(value(s))
        s += 1
    eta = EtaSequence(np.array(vals), kind, {**params, "cap": cap})
    bad = eta.violations()
    ratio_bad = [b for b in bad if b.which == "ratio"]
    if strict and ratio_bad:
        b = ratio_bad[0]
        raise EtaInvariantError(f"eta ratio invariant fails at s={b.s}: eta_(s+1)/eta_s = {b.lhs:.4g}")
    eta.params["violations"] = [b.__dict__ for b in bad]
    return eta


def s0_and_ells(eta, N):
    """``s0`` (first ``s`` with ``eta_s >= log(eN)``) and ``ell_s`` for every level.

    ``ell_s = 1`` when ``eta_s < log(eN)``; otherwise it is the largest
    ``ell <= N`` with ``ell log(eN/ell) <= eta_s``.  ``s0`` is ``None`` if no
    level reaches ``log(eN)``.
    """
    N = check_int(N, "N", low=1)
    vals = eta.values if isinstance(eta, EtaSequence) else np.asarray(eta, dtype=float)
    threshold = math.log(math.e * N)
    hits = np.flatnonzero(vals >= threshold)
    s0 = int(hits[0]) if hits.size else None
    ell_grid = np.arange(1, N + 1, dtype=float)
    g = ell_grid * np.log(math.e * N / ell_grid)  # increasing on [1, N]
    ells = np.ones(vals.size, dtype=int)
    for s, e in enumerate(vals):
        if e >= threshold:
            ells[s] = int(np.searchsorted(g, e * (1 + 1e-12), side="right"))
    ells = np.clip(ells, 1, N)
    return s0, ells
