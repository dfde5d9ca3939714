"""One-dimensional lattice walks and their local-time statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .samplers import WalkDist
from .streams import ReplicaStreams


@dataclass
class Trajectory:
    """A realized walk path with its local-time table.

    positions holds S_0..S_n (S_0 = 0); local_times maps site -> number of
    visits over steps 1..n, so sum of counts is n and S_0 is only counted
    if the walk comes back to it.
    """

    n: int
    positions: np.ndarray | None
    local_times: dict[int, int] = field(default_factory=dict)

    @property
    def final_position(self) -> int:
        if self.positions is not None:
            return int(self.positions[-1])
        return self._final

    @classmethod
    def from_increments(cls, increments) -> "Trajectory":
        inc = np.asarray(increments, dtype=np.int64)
        positions = np.concatenate([[0], np.cumsum(inc)])
        return cls(n=len(inc), positions=positions,
                   local_times=_count_visits(positions))


def _count_visits(positions: np.ndarray) -> dict[int, int]:
    sites, counts = np.unique(positions[1:], return_counts=True)
    return {int(s): int(c) for s, c in zip(sites, counts)}


def simulate_walk(n: int, dist: WalkDist, streams: ReplicaStreams,
                  keep_positions: bool = True) -> Trajectory:
    """Simulate S_0..S_n; step t consumes the walk-stream word at counter t."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    pos = np.empty(n + 1, dtype=np.int64)
    pos[0] = 0
    key = streams.walk_key
    s = 0
    for t in range(1, n + 1):
        s += dist.increment_at(key, t)
        pos[t] = s
    traj = Trajectory(n=n, positions=pos if keep_positions else None,
                      local_times=_count_visits(pos))
    if not keep_positions:
        traj._final = int(pos[-1])
    return traj


def self_intersections(traj: Trajectory) -> int:
    """V_n = sum over sites of (local time)^2 = #{(i,j): S_i = S_j, 1<=i,j<=n}."""
    return sum(c * c for c in traj.local_times.values())


def self_intersections_beta(traj: Trajectory, beta_prime: float) -> float:
    """Generalized count: sum of local times raised to beta_prime > 0."""
    if beta_prime <= 0:
        raise ValueError("beta_prime must be positive")
    return float(sum(c ** beta_prime for c in traj.local_times.values()))


def dump_positions(traj: Trajectory, fh) -> None:
    """Plain-text trajectory dump, one position per line."""
    if traj.positions is None:
        raise ValueError("trajectory was simulated without positions")
    for p in traj.positions:
        fh.write(f"{int(p)}\n")
