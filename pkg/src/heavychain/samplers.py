"""Scalar and vector laws used by the experiments.

Every sampler is a pure function of ``(spec, seed, shape)``: the seed is fed
to :func:`numpy.random.default_rng` and nothing else is shared, so calls can
run concurrently and reproduce bit-identical output.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy import special, stats

from ._validation import check_int, check_real

SCALAR_KINDS = ("gaussian", "rademacher", "student_t", "sym_pareto", "laplace_exponential")
VECTOR_KINDS = ("lp_ball_uniform", "coordinate_measure")
KINDS = SCALAR_KINDS + VECTOR_KINDS
LOG_CONCAVE_KINDS = ("lp_ball_uniform", "laplace_exponential", "gaussian")

LAPLACE_SCALE = 1.0 / math.sqrt(2.0)
PILOT_SIZE = 2000
MIN_ACCEPTANCE = 1e-3


class TruncationError(ValueError):
    """The p-ball is too small: rejection sampling would not terminate in practice."""


def derive_seed(master, *keys):
    """Mix a master seed with integer or string keys into a 64-bit seed.

    Strings are hashed with BLAKE2b first; the resulting integers are mixed by
    :class:`numpy.random.SeedSequence`, whose output word is the seed.  The map
    depends only on its arguments, so per-trial seeds do not depend on the
    order in which trials are executed.
    """
    words = [int(master) & 0xFFFFFFFFFFFFFFFF]
    for key in keys:
        if isinstance(key, str):
            digest = hashlib.blake2b(key.encode(), digest_size=8).digest()
            words.append(int.from_bytes(digest, "little"))
        else:
            words.append(int(key) & 0xFFFFFFFFFFFFFFFF)
    return int(np.random.SeedSequence(words).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class DistributionSpec:
    """A named law for the entries ``xi`` or for whole rows ``X``.

    ``q`` is the moment exponent one wants finite (``E|xi|^q < inf``); ``nu`` is
    the shape parameter (degrees of freedom for ``student_t``, tail index for
    ``sym_pareto``).  For ``lp_ball_uniform``, ``p`` is the exponent of the
    body; for every other kind a non-null ``kappa1`` turns on conditioning to
    ``kappa1 * n**(1/p) * B_p^n``.
    """

    kind: str
    q: float | None = None
    nu: float | None = None
    p: float | None = None
    kappa1: float | None = None
    n: int | None = None
    standardized: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}; expected one of {KINDS}")
        if self.q is not None and check_real(self.q, "q") <= 2:
            raise ValueError(f"tail exponent q must exceed 2, got {self.q}")
        if self.kind in ("student_t", "sym_pareto"):
            nu = self.nu
            if nu is None:
                if self.q is None:
                    raise ValueError(f"{self.kind} needs nu or q")
                # default shape: two moments of slack above q
                nu = float(self.q) + 2.0
                object.__setattr__(self, "nu", nu)
            nu = check_real(nu, "nu", low=2.0, strict_low=True)
            if self.q is not None and self.q >= nu:
                raise ValueError(
                    f"{self.kind}: E|xi|^q is infinite for q={self.q} >= nu={nu}"
                )
        if self.kind == "lp_ball_uniform":
            if self.p is None:
                raise ValueError("lp_ball_uniform needs the body exponent p")
            check_real(self.p, "p", low=0.0, strict_low=True)
            if self.kappa1 is not None:
                raise ValueError("truncation is not defined for lp_ball_uniform")
        elif self.kappa1 is not None:
            if self.p is None or self.p <= 2:
                raise ValueError("truncation needs p > 2")
            check_real(self.kappa1, "kappa1", low=0.0, strict_low=True)
        if self.n is not None:
            check_int(self.n, "n", low=1)

    @property
    def is_scalar(self):
        return self.kind in SCALAR_KINDS

    @property
    def truncated(self):
        return self.kappa1 is not None

    @property
    def log_concave(self):
        return self.kind in LOG_CONCAVE_KINDS and not self.truncated and (
            self.kind != "lp_ball_uniform" or self.p >= 1
        )

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        unknown = set(data) - {"kind", "q", "nu", "p", "kappa1", "n", "standardized"}
        if unknown:
            raise ValueError(f"unknown DistributionSpec keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class SampleMatrix:
    """``N`` i.i.d. rows in dimension ``n`` together with their provenance."""

    rows: np.ndarray
    seed: int
    spec: DistributionSpec
    rejection_rate: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        if self.rows.ndim != 2:
            raise ValueError("rows must be an N x n array")
        if not np.all(np.isfinite(self.rows)):
            raise ValueError("sample matrix has non-finite entries")

    @property
    def N(self):
        return self.rows.shape[0]

    @property
    def n(self):
        return self.rows.shape[1]

    @property
    def shape(self):
        return self.rows.shape

    def __array__(self, dtype=None, copy=None):
        return self.rows if dtype is None else self.rows.astype(dtype)


# -- analytic facts about the scalar laws ------------------------------------

def _raw_scale(spec):
    """Standard deviation of the unstandardized law."""
    if spec.kind == "student_t":
        return math.sqrt(spec.nu / (spec.nu - 2.0))
    if spec.kind == "sym_pareto":
        return math.sqrt(spec.nu / (spec.nu - 2.0))
    return 1.0


def _scale(spec):
    return _raw_scale(spec) if spec.standardized else 1.0


def abs_moment(spec, q):
    """Exact ``E|xi|^q`` for a scalar law (after standardization)."""
    if not spec.is_scalar:
        raise ValueError(f"{spec.kind} is not a scalar law")
    q = check_real(q, "q", low=0.0, strict_low=True)
    kind = spec.kind
    if kind == "gaussian":
        return 2 ** (q / 2) * math.exp(special.gammaln((q + 1) / 2)) / math.sqrt(math.pi)
    if kind == "rademacher":
        return 1.0
    if kind == "laplace_exponential":
        return LAPLACE_SCALE**q * math.exp(special.gammaln(q + 1))
    nu = spec.nu
    if q >= nu:
        return math.inf
    if kind == "student_t":
        log_m = (
            (q / 2) * math.log(nu)
            + special.gammaln((q + 1) / 2)
            + special.gammaln((nu - q) / 2)
            - 0.5 * math.log(math.pi)
            - special.gammaln(nu / 2)
        )
        raw = math.exp(log_m)
    else:
        raw = nu / (nu - q)
    return raw / _scale(spec) ** q


def lq_norm(spec, q):
    """``||xi||_{L_q}``."""
    return abs_moment(spec, q) ** (1.0 / q)


def tail_probability(spec, y):
    """``Pr(|xi| >= y)`` for a scalar law."""
    if not spec.is_scalar:
        raise ValueError(f"{spec.kind} is not a scalar law")
    y = float(y)
    if y <= 0:
        return 1.0
    kind = spec.kind
    if kind == "gaussian":
        return float(2 * stats.norm.sf(y))
    if kind == "rademacher":
        return 1.0 if y <= 1 else 0.0
    if kind == "laplace_exponential":
        return math.exp(-y / LAPLACE_SCALE)
    raw = y * _scale(spec)
    if kind == "student_t":
        return float(2 * stats.t.sf(raw, spec.nu))
    return 1.0 if raw <= 1 else raw ** (-spec.nu)


def tail_isf(spec, delta):
    """Smallest ``y`` with ``Pr(|xi| >= y) <= delta`` (0 when ``delta >= 1``)."""
    if not spec.is_scalar:
        raise ValueError(f"{spec.kind} is not a scalar law")
    delta = float(delta)
    if delta >= 1:
        return 0.0
    if delta <= 0:
        return math.inf
    kind = spec.kind
    if kind == "gaussian":
        return float(stats.norm.isf(delta / 2))
    if kind == "rademacher":
        return 1.0
    if kind == "laplace_exponential":
        return LAPLACE_SCALE * math.log(1.0 / delta)
    if kind == "student_t":
        return float(stats.t.isf(delta / 2, spec.nu)) / _scale(spec)
    return delta ** (-1.0 / spec.nu) / _scale(spec)


def lp_ball_second_moment(n, p):
    """``E x_1^2`` for ``x`` uniform on ``B_p^n``.

    With the radial representation, ``|x_1|^p`` is Beta(1/p, n/p + 1 - 1/p)
    distributed, which gives
    ``Gamma(3/p) Gamma(n/p + 1) / (Gamma(1/p) Gamma((n + 2)/p + 1))``.
    """
    n = check_int(n, "n", low=1)
    p = check_real(p, "p", low=0.0, strict_low=True)
    return math.exp(
        special.gammaln(3 / p)
        + special.gammaln(n / p + 1)
        - special.gammaln(1 / p)
        - special.gammaln((n + 2) / p + 1)
    )


def coupon_miss_probability(n, N):
    """Exact probability that ``N`` uniform draws from ``n`` cells miss some cell."""
    n = check_int(n, "n", low=1)
    N = check_int(N, "N", low=0)
    hit_all = sum(
        (-1) ** k * math.comb(n, k) * Fraction(n - k, n) ** N for k in range(n + 1)
    )
    return float(1 - hit_all)


# -- samplers ------------------------------------------------------------------

def _draw_scalar(spec, size, rng):
    kind = spec.kind
    if kind == "gaussian":
        return rng.standard_normal(size)
    if kind == "rademacher":
        return rng.integers(0, 2, size=size).astype(float) * 2.0 - 1.0
    if kind == "laplace_exponential":
        return rng.laplace(0.0, LAPLACE_SCALE, size=size)
    if kind == "student_t":
        return rng.standard_t(spec.nu, size=size) / _scale(spec)
    # symmetrized classical Pareto: |xi| >= 1, Pr(|xi| > t) = t^-nu
    magnitude = rng.pareto(spec.nu, size=size) + 1.0
    sign = rng.integers(0, 2, size=size).astype(float) * 2.0 - 1.0
    return sign * magnitude / _scale(spec)


def _draw_rows(spec, count, n, rng):
    if spec.is_scalar:
        return _draw_scalar(spec, (count, n), rng)
    if spec.kind == "coordinate_measure":
        rows = np.zeros((count, n))
        rows[np.arange(count), rng.integers(0, n, size=count)] = math.sqrt(n)
        return rows
    p = spec.p
    # generalized normal coordinates: |g|^p ~ Gamma(1/p)
    g = rng.standard_gamma(1.0 / p, size=(count, n)) ** (1.0 / p)
    g *= rng.integers(0, 2, size=(count, n)) * 2.0 - 1.0
    z = rng.standard_exponential(count)
    radius = (np.sum(np.abs(g) ** p, axis=1) + z) ** (1.0 / p)
    rows = g / radius[:, None]
    if spec.standardized:
        rows /= math.sqrt(lp_ball_second_moment(n, p))
    return rows


def sample_scalar(spec, count, seed):
    """``count`` i.i.d. draws of ``xi``."""
    if not spec.is_scalar:
        raise ValueError(f"{spec.kind} is a vector law; use sample_matrix")
    count = check_int(count, "count", low=1)
    rng = np.random.default_rng(seed)
    return _draw_scalar(spec, count, rng)


def sample_exponential_vector(n, count, seed):
    """``count`` rows of i.i.d. symmetric exponential entries with unit variance."""
    n = check_int(n, "n", low=1)
    count = check_int(count, "count", low=1)
    return np.random.default_rng(seed).laplace(0.0, LAPLACE_SCALE, size=(count, n))


def sample_matrix(spec, N, n, seed):
    """Draw an ``N x n`` matrix of i.i.d. rows.

    Scalar laws fill the matrix with i.i.d. entries; vector laws draw whole
    rows.  If ``spec`` carries ``kappa1`` the rows are conditioned to the
    p-ball by :func:`truncate_to_lp_ball`.
    """
    N = check_int(N, "N", low=1)
    n = check_int(n, "n", low=1)
    if spec.n is not None and spec.n != n:
        raise ValueError(f"spec dimension {spec.n} does not match n={n}")
    rng = np.random.default_rng(seed)
    X = SampleMatrix(_draw_rows(spec, N, n, rng), seed=int(seed), spec=spec)
    if spec.truncated:
        X, _ = truncate_to_lp_ball(X, spec.p, spec.kappa1)
    return X


def lp_norms(rows, p):
    return np.sum(np.abs(rows) ** p, axis=1) ** (1.0 / p)


def truncate_to_lp_ball(X, p, kappa1):
    """Condition the rows of ``X`` to ``kappa1 * n**(1/p) * B_p^n``.

    Rows outside the ball are replaced, in place order, by fresh draws from
    ``X.spec`` that land inside; the draws come from a generator seeded by
    ``derive_seed(X.seed, "truncate")``.  Returns the new matrix and the
    rejection rate ``rejected / attempts`` over all rows examined.
    """
    p = check_real(p, "p", low=2.0, strict_low=True)
    kappa1 = check_real(kappa1, "kappa1", low=0.0, strict_low=True)
    rows = np.array(X.rows, dtype=float)
    N, n = rows.shape
    radius = kappa1 * n ** (1.0 / p)
    outside = np.flatnonzero(lp_norms(rows, p) > radius)
    if outside.size == 0:
        return SampleMatrix(rows, X.seed, X.spec, 0.0, dict(X.meta)), 0.0

    rng = np.random.default_rng(derive_seed(X.seed, "truncate"))
    pilot = _draw_rows(X.spec, PILOT_SIZE, n, rng)
    acceptance = float(np.mean(lp_norms(pilot, p) <= radius))
    if acceptance < MIN_ACCEPTANCE:
        raise TruncationError(
            f"estimated acceptance {acceptance:.2e} < {MIN_ACCEPTANCE:g} for "
            f"kappa1={kappa1}, p={p}, n={n}: kappa1 is too small"
        )
    attempts = N
    rejected = outside.size
    accepted = []
    need = outside.size
    while need > 0:
        batch = int(math.ceil(1.25 * need / acceptance)) + 8
        cand = _draw_rows(X.spec, batch, n, rng)
        ok = lp_norms(cand, p) <= radius
        # attempts stop at the draw that fills the last slot
        hits = np.flatnonzero(ok)
        if hits.size >= need:
            used = hits[need - 1] + 1
            accepted.append(cand[hits[:need]])
            attempts += used
            rejected += used - need
            need = 0
        else:
            accepted.append(cand[hits])
            attempts += batch
            rejected += batch - hits.size
            need -= hits.size
    rows[outside] = np.concatenate(accepted, axis=0)
    rate = rejected / attempts
    return SampleMatrix(rows, X.seed, X.spec, rate, dict(X.meta)), rate


def calibrate_kappa1(spec, n, p, quantile=0.99, pilot=20000, seed=0):
    """``kappa1`` such that a fraction ``quantile`` of rows lie in the ball."""
    base = DistributionSpec.from_dict({**spec.to_dict(), "kappa1": None, "p": None})
    rows = _draw_rows(base, pilot, n, np.random.default_rng(seed))
    return float(np.quantile(lp_norms(rows, p) / n ** (1.0 / p), quantile))
