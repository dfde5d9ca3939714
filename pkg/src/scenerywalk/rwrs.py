"""Random walk in random scenery: Z_n = sum of scenery values along the walk.

The scenery value at a site is a pure function of (scenery stream key,
site), so it is quenched by construction; SceneryMap only caches lookups.
This module is the readable reference path.  Ensemble drivers in
estimators.py run the same replicas through the compiled kernels and are
tested to agree with simulate_rwrs replica by replica.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .samplers import SceneryDist, WalkDist
from .streams import ReplicaStreams

V_PATH_LIMIT = 1 << 14  # keeping the Z path for pair counts stops here


@dataclass
class SceneryMap:
    """Lazy site -> value view of one replica's scenery."""

    dist: SceneryDist
    key: int
    realized: dict = field(default_factory=dict)

    def value(self, site: int):
        v = self.realized.get(site)
        if v is None:
            v = self.dist.value_at(self.key, site)
            self.realized[site] = v
        return v


@dataclass
class RwrsStats:
    """Single-replica observables of the scenery sum Z_0..Z_n."""

    n: int
    running_max: float
    running_min: float
    range_count: int | None  # distinct values; None for real-valued scenery
    t0: int | None           # first k >= 1 with Z_k = 0; None = censored (> n)
    final_z: float
    v_z: int | None = None   # #{(i,j) in [1,n]^2 : Z_i = Z_j}, if requested

    @property
    def censored(self) -> bool:
        return self.t0 is None


def simulate_rwrs(n: int, walk: WalkDist, scenery: SceneryDist,
                  streams: ReplicaStreams, want_pairs: bool = False) -> RwrsStats:
    """One replica of the scenery sum, single pass over steps 1..n."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if want_pairs and not scenery.integer_valued:
        raise ValueError("pair counts need integer scenery (exact value matches)")
    if want_pairs and n > V_PATH_LIMIT:
        raise ValueError(f"pair counts limited to n <= {V_PATH_LIMIT}")
    smap = SceneryMap(scenery, streams.scenery_key)
    integer = scenery.integer_valued
    pos = 0
    z = 0 if integer else 0.0
    zmax = z
    zmin = z
    t0 = None
    values = {0} if integer else None
    z_path = [0] if want_pairs else None
    for t in range(1, n + 1):
        pos += walk.increment_at(streams.walk_key, t)
        z += smap.value(pos)
        if z > zmax:
            zmax = z
        elif z < zmin:
            zmin = z
        if integer:
            values.add(z)
            if t0 is None and z == 0:
                t0 = t
        if want_pairs:
            z_path.append(z)
    stats = RwrsStats(
        n=n,
        running_max=zmax,
        running_min=zmin,
        range_count=len(values) if integer else None,
        t0=t0,
        final_z=z,
    )
    if want_pairs:
        stats.v_z = rwrs_self_intersections(np.asarray(z_path))
    return stats


def rwrs_self_intersections(z_path: np.ndarray) -> int:
    """Pair count of the scenery sum over indices 1..n (Z_0 excluded)."""
    body = np.asarray(z_path)[1:]
    _, counts = np.unique(body, return_counts=True)
    return int(np.sum(counts.astype(np.int64) ** 2))


def norm_sequence(alpha: float, beta: float, n: int) -> float:
    """The natural normalization a_n of Z_n for walk index alpha and
    scenery index beta:

        alpha in (1, 2]:  n^(1 - 1/alpha + 1/(alpha*beta))
        alpha = 1:        n^(1/beta) * (log n)^(1 - 1/beta)
        alpha in (0, 1):  n^(1/beta)
    """
    _check_indices(alpha, beta)
    if n < 2:
        raise ValueError("n must be >= 2")
    if alpha > 1.0:
        return float(n) ** (1.0 - 1.0 / alpha + 1.0 / (alpha * beta))
    if alpha == 1.0:
        return float(n) ** (1.0 / beta) * math.log(n) ** (1.0 - 1.0 / beta)
    return float(n) ** (1.0 / beta)


def delta_exponent(alpha: float, beta: float) -> float:
    """Growth exponent of a_n in the superdiffusive regime alpha in (1, 2]."""
    _check_indices(alpha, beta)
    if alpha <= 1.0:
        raise ValueError("the power-law exponent needs alpha in (1, 2]")
    return 1.0 - 1.0 / alpha + 1.0 / (alpha * beta)


def _check_indices(alpha: float, beta: float) -> None:
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must be in (0, 2], got {alpha}")
    if not 0.0 < beta <= 2.0:
        raise ValueError(f"beta must be in (0, 2], got {beta}")
