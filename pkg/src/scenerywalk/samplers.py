"""Increment and scenery distributions, plus the strictly stable sampler.

Conventions
-----------
Stable laws are parameterized by the characteristic function

    E exp(i u X) = exp(-|u|^beta * (a1 + i * a2 * sign(u))),

which maps onto the usual (index, skew, scale) triple of the
Chambers-Mallows-Stuck sampler as

    index = beta,
    scale = a1 ** (1 / beta),
    skew  = -a2 / (a1 * tan(pi * beta / 2))   (beta not in {1, 2}).

Admissibility requires |a2| <= a1 * |tan(pi*beta/2)| (skew in [-1, 1]).
beta = 2 forces a2 = 0 and gives Normal(0, 2*a1); beta = 1 is restricted
to the symmetric Cauchy (a2 = 0), which keeps the sampler strictly stable
without the log correction branch.

Lattice heavy tails use pmf P(X = k) = P(X = -k) = |k|^(-1-index) / (2 Z)
for k >= 1 with Z = zeta(1 + index).  Sampling inverts an exact cdf table
for |k| <= table_size and switches to the continuous power-law inverse in
the far tail; values are capped at `value_cap` so lattice sums stay well
inside int64 (the cap is hit with probability < 1e-7 per draw at the
default settings).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .streams import (
    Stream,
    keyed_u01,
    keyed_u01_open,
    keyed_u01_open_vec,
    keyed_u01_vec,
)

# ---------- stable laws ----------


@dataclass(frozen=True)
class StableParams:
    """Exponent and cf coefficients of a strictly stable law."""

    beta: float
    a1: float
    a2: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.beta <= 2.0:
            raise ValueError(f"beta must be in (0, 2], got {self.beta}")
        if self.a1 <= 0.0:
            raise ValueError(f"a1 must be positive, got {self.a1}")
        if self.beta == 2.0:
            if self.a2 != 0.0:
                raise ValueError("beta = 2 admits no skew: a2 must be 0")
        elif self.beta == 1.0:
            if self.a2 != 0.0:
                raise ValueError("beta = 1 is supported only in the symmetric case a2 = 0")
        else:
            bound = self.a1 * abs(math.tan(math.pi * self.beta / 2.0))
            if abs(self.a2) > bound:
                raise ValueError(
                    f"|a2| = {abs(self.a2)} exceeds admissible bound {bound} "
                    f"for beta = {self.beta}"
                )

    @property
    def scale(self) -> float:
        return self.a1 ** (1.0 / self.beta)

    @property
    def skew(self) -> float:
        if self.beta in (1.0, 2.0):
            return 0.0
        return -self.a2 / (self.a1 * math.tan(math.pi * self.beta / 2.0))


def _cms_transform(u: float, w: float, beta: float, skew: float, scale: float) -> float:
    """Chambers-Mallows-Stuck map from (Uniform(-pi/2,pi/2), Exp(1)) to stable."""
    if beta == 1.0:
        return scale * math.tan(u)
    if skew == 0.0:
        x = math.sin(beta * u) / math.cos(u) ** (1.0 / beta)
        x *= (math.cos(u - beta * u) / w) ** ((1.0 - beta) / beta)
        return scale * x
    t = skew * math.tan(math.pi * beta / 2.0)
    theta0 = math.atan(t) / beta
    prefactor = (1.0 + t * t) ** (1.0 / (2.0 * beta))
    x = math.sin(beta * (u + theta0)) / math.cos(u) ** (1.0 / beta)
    x *= (math.cos(u - beta * (u + theta0)) / w) ** ((1.0 - beta) / beta)
    return scale * prefactor * x


def sample_stable(params: StableParams, stream: Stream) -> float:
    """One strictly stable variate; consumes exactly two stream words."""
    u = math.pi * (stream.u01() - 0.5)
    w = -math.log(stream.u01_open())
    return _cms_transform(u, w, params.beta, params.skew, params.scale)


def sample_stable_block(params: StableParams, stream: Stream, n: int) -> np.ndarray:
    """Vectorized CMS sampling, same stream discipline as sample_stable:
    draw i consumes the counter pair (2i, 2i+1) past the stream position."""
    base = stream.counter
    idx = np.arange(n, dtype=np.uint64)
    us = keyed_u01_vec(stream.key, np.uint64(base) + 2 * idx)
    ws = keyed_u01_vec(stream.key, np.uint64(base) + 2 * idx + np.uint64(1))
    stream.counter = base + 2 * n
    u = np.pi * (us - 0.5)
    w = -np.log(ws + 2.0 ** -53)  # same word shifted into (0, 1], as u01_open does
    beta, skew, scale = params.beta, params.skew, params.scale
    if beta == 1.0:
        return scale * np.tan(u)
    if skew == 0.0:
        x = np.sin(beta * u) / np.cos(u) ** (1.0 / beta)
        x *= (np.cos(u - beta * u) / w) ** ((1.0 - beta) / beta)
        return scale * x
    t = skew * math.tan(math.pi * beta / 2.0)
    theta0 = math.atan(t) / beta
    prefactor = (1.0 + t * t) ** (1.0 / (2.0 * beta))
    x = np.sin(beta * (u + theta0)) / np.cos(u) ** (1.0 / beta)
    x *= (np.cos(u - beta * (u + theta0)) / w) ** ((1.0 - beta) / beta)
    return scale * prefactor * x


# ---------- lattice power tails ----------

DEFAULT_TAIL_TABLE = 1 << 16
DEFAULT_VALUE_CAP = 1 << 46  # sums of 2^16 capped values stay < 2^62


@dataclass(frozen=True)
class LatticeTail:
    """Exact-cdf + power-tail inverse for P(|X| = k) = k^(-1-index) / Z."""

    index: float
    table_size: int = DEFAULT_TAIL_TABLE
    value_cap: int = DEFAULT_VALUE_CAP
    cdf: np.ndarray = field(init=False, repr=False, compare=False)
    tail_mass: float = field(init=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.index < 2.0:
            raise ValueError(f"tail index must be in (0, 2), got {self.index}")
        k = np.arange(1, self.table_size + 1, dtype=np.float64)
        z = hurwitz_zeta(1.0 + self.index, 1.0)
        pmf = k ** (-1.0 - self.index) / z
        object.__setattr__(self, "cdf", np.cumsum(pmf))
        object.__setattr__(
            self, "tail_mass", float(hurwitz_zeta(1.0 + self.index, self.table_size + 1) / z)
        )

    def magnitude(self, u: float) -> int:
        """|X| from one uniform in [0, 1)."""
        if u < self.cdf[-1]:
            return int(np.searchsorted(self.cdf, u, side="right")) + 1
        v = 1.0 - u
        if v <= 0.0:
            return self.value_cap
        k = int(self.table_size * (self.tail_mass / v) ** (1.0 / self.index))
        return min(max(k, self.table_size + 1), self.value_cap)

    def exact_tail(self, t: int) -> float:
        """P(|X| > t), exact (used by the calibration tests)."""
        z = hurwitz_zeta(1.0 + self.index, 1.0)
        return float(hurwitz_zeta(1.0 + self.index, t + 1) / z)


def signed_from_u01(tail: LatticeTail, u: float) -> int:
    """Sign from the top half of u, magnitude from the rescaled remainder."""
    if u < 0.5:
        return tail.magnitude(2.0 * u)
    return -tail.magnitude(2.0 * u - 1.0)


# ---------- scenery distributions ----------


@dataclass(frozen=True)
class Rademacher:
    """Fair +-1 scenery."""

    beta_index: float = field(default=2.0, init=False)
    unit_lattice = True  # values certified inside {-1, 0, 1}
    integer_valued = True

    def value_at(self, key: int, site: int) -> int:
        return 1 if keyed_u01(key, site) < 0.5 else -1


@dataclass(frozen=True)
class Ternary:
    """P(0) = q, P(+-1) = (1-q)/2 each; q = 0 reduces to Rademacher."""

    q: float
    beta_index: float = field(default=2.0, init=False)
    unit_lattice = True
    integer_valued = True

    def __post_init__(self):
        if not 0.0 <= self.q < 1.0:
            raise ValueError(f"q must be in [0, 1), got {self.q}")

    def value_at(self, key: int, site: int) -> int:
        u = keyed_u01(key, site)
        if u < self.q:
            return 0
        return 1 if (u - self.q) < (1.0 - self.q) / 2.0 else -1


@dataclass(frozen=True)
class SymmetricZipf:
    """Symmetric lattice law with P(|X| = k) proportional to k^(-1-beta)."""

    beta: float
    table_size: int = DEFAULT_TAIL_TABLE
    value_cap: int = DEFAULT_VALUE_CAP
    unit_lattice = False
    integer_valued = True

    def __post_init__(self):
        if not 0.0 < self.beta < 2.0:
            raise ValueError(f"beta must be in (0, 2), got {self.beta}")
        object.__setattr__(
            self, "_tail", LatticeTail(self.beta, self.table_size, self.value_cap)
        )

    @property
    def beta_index(self) -> float:
        return self.beta

    @property
    def tail(self) -> LatticeTail:
        return self._tail

    def value_at(self, key: int, site: int) -> int:
        return signed_from_u01(self._tail, keyed_u01(key, site))


@dataclass(frozen=True)
class GaussianScenery:
    """N(0, sigma^2) scenery; sigma = 1 makes the partial-sum limit standard."""

    sigma: float = 1.0
    beta_index: float = field(default=2.0, init=False)
    unit_lattice = False
    integer_valued = False

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def value_at(self, key: int, site: int) -> float:
        # Box-Muller on the site's pair of counters (2*site, 2*site + 1).
        u1 = keyed_u01_open(key, 2 * site)
        u2 = keyed_u01(key, 2 * site + 1)
        return self.sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@dataclass(frozen=True)
class StableScenery:
    """Exact strictly stable scenery (used by the limit-process estimators)."""

    params: StableParams
    unit_lattice = False
    integer_valued = False

    @property
    def beta_index(self) -> float:
        return self.params.beta

    def value_at(self, key: int, site: int) -> float:
        u = math.pi * (keyed_u01(key, 2 * site) - 0.5)
        w = -math.log(keyed_u01_open(key, 2 * site + 1))
        return _cms_transform(u, w, self.params.beta, self.params.skew, self.params.scale)


SceneryDist = Rademacher | Ternary | SymmetricZipf | GaussianScenery | StableScenery


def sample_scenery_value(dist: SceneryDist, key: int, site: int):
    return dist.value_at(key, site)


def sample_scenery_block(dist: SceneryDist, key: int, sites: np.ndarray) -> np.ndarray:
    """Vectorized quenched lookup; equals value_at site by site."""
    if isinstance(dist, Rademacher):
        u = keyed_u01_vec(key, sites)
        return np.where(u < 0.5, 1, -1).astype(np.int64)
    if isinstance(dist, Ternary):
        u = keyed_u01_vec(key, sites)
        out = np.where(u - dist.q < (1.0 - dist.q) / 2.0, 1, -1).astype(np.int64)
        out[u < dist.q] = 0
        return out
    if isinstance(dist, SymmetricZipf):
        return np.array([dist.value_at(key, int(s)) for s in sites], dtype=np.int64)
    if isinstance(dist, GaussianScenery):
        s = sites.astype(np.int64)
        u1 = keyed_u01_open_vec(key, 2 * s)
        u2 = keyed_u01_vec(key, 2 * s + 1)
        return dist.sigma * np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return np.array([dist.value_at(key, int(s)) for s in sites])


# ---------- walk increment distributions ----------


@dataclass(frozen=True)
class SimpleWalk:
    """Fair +-1 increments; period 2 (returns to 0 only at even times)."""

    alpha_index: float = field(default=2.0, init=False)
    period = 2

    def increment_at(self, key: int, step: int) -> int:
        return 1 if keyed_u01(key, step) < 0.5 else -1


@dataclass(frozen=True)
class LazyWalk:
    """Holds with probability p, else fair +-1; aperiodic, still alpha = 2."""

    p: float
    alpha_index: float = field(default=2.0, init=False)
    period = 1

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"holding probability must be in (0, 1), got {self.p}")

    def increment_at(self, key: int, step: int) -> int:
        u = keyed_u01(key, step)
        if u < self.p:
            return 0
        return 1 if (u - self.p) < (1.0 - self.p) / 2.0 else -1


@dataclass(frozen=True)
class HeavyTailWalk:
    """Symmetric lattice increments with tail index alpha in (0, 2)."""

    alpha: float
    table_size: int = DEFAULT_TAIL_TABLE
    value_cap: int = DEFAULT_VALUE_CAP
    period = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must be in (0, 2), got {self.alpha}")
        object.__setattr__(
            self, "_tail", LatticeTail(self.alpha, self.table_size, self.value_cap)
        )

    @property
    def alpha_index(self) -> float:
        return self.alpha

    @property
    def tail(self) -> LatticeTail:
        return self._tail

    def increment_at(self, key: int, step: int) -> int:
        return signed_from_u01(self._tail, keyed_u01(key, step))


WalkDist = SimpleWalk | LazyWalk | HeavyTailWalk


def sample_walk_increment(dist: WalkDist, key: int, step: int) -> int:
    return dist.increment_at(key, step)


# ---------- factories for config / CLI ----------


def scenery_dist(kind: str, **params) -> SceneryDist:
    kind = kind.lower().replace("_", "-")
    if kind == "rademacher":
        return Rademacher()
    if kind == "ternary":
        return Ternary(q=float(params.get("q", 0.25)))
    if kind == "zipf":
        return SymmetricZipf(beta=float(params.get("beta", 0.5)))
    if kind == "gaussian":
        return GaussianScenery(sigma=float(params.get("sigma", 1.0)))
    if kind == "stable":
        return StableScenery(
            StableParams(
                beta=float(params.get("beta", 2.0)),
                a1=float(params.get("a1", 0.5)),
                a2=float(params.get("a2", 0.0)),
            )
        )
    raise ValueError(f"unknown scenery kind {kind!r}")


def walk_dist(kind: str, **params) -> WalkDist:
    kind = kind.lower().replace("_", "-")
    if kind == "simple":
        return SimpleWalk()
    if kind == "lazy":
        return LazyWalk(p=float(params.get("p", 1.0 / 3.0)))
    if kind in ("heavy", "heavy-tail"):
        return HeavyTailWalk(alpha=float(params.get("alpha", 0.75)))
    raise ValueError(f"unknown walk kind {kind!r}")
