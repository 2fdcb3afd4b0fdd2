"""Reference envelopes from earlier covariance-estimation results, unit constants (plot overlays only)."""

from __future__ import annotations

import math

from .._validation import check_real

KINDS = ("rudelson", "alpt", "vershynin", "sv")


def reference_envelope(kind, n, N, q=None, eta=None):
    """Functional form of a known bound at ``(n, N)``.

    * ``rudelson``: ``sqrt(n log n / N)``
    * ``alpt``: ``sqrt(n / N)``
    * ``vershynin``: ``(log log n)^2 (n/N)^(1/2 - 2/q)`` (needs ``q``)
    * ``sv``: ``(n/N)^(eta / (2 eta + 2))`` (needs ``eta``)
    """
    n = check_real(n, "n", low=2.0)
    N = check_real(N, "N", low=2.0)
    r = n / N
    if kind == "rudelson":
        return math.sqrt(n * math.log(n) / N)
    if kind == "alpt":
        return math.sqrt(r)
    if kind == "vershynin":
        if q is None:
            raise ValueError("the vershynin envelope needs q")
        return math.log(math.log(n)) ** 2 * r ** (0.5 - 2.0 / q)
    if kind == "sv":
        if eta is None:
            raise ValueError("the sv envelope needs eta")
        return r ** (eta / (2.0 * eta + 2.0))
    raise ValueError(f"unknown envelope kind {kind!r}; expected one of {KINDS}")
