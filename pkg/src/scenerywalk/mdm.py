"""Planar walk on randomly oriented horizontal layers.

Each line y carries a fair +-1 orientation eps_y frozen for the replica
(or for the whole ensemble in quenched mode).  At every step the walker
moves horizontally by eps_y with probability p, otherwise it moves to a
neighboring line, up or down with probability (1-p)/2 each.  The vertical
coordinate is then a lazy walk and the horizontal coordinate is a scenery
sum driven by it, which is why the same scaling machinery applies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _engine
from .streams import ReplicaStreams, keyed_u01


@dataclass(frozen=True)
class MdmConfig:
    """Horizontal-step probability and horizon of one simulation."""

    p: float
    n: int

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must be in (0, 1), got {self.p}")
        if self.n < 0:
            raise ValueError("n must be nonnegative")


@dataclass
class Environment:
    """Lazy line -> orientation view of one environment sample."""

    key: int
    realized: dict = field(default_factory=dict)

    def orientation(self, line: int) -> int:
        v = self.realized.get(line)
        if v is None:
            v = 1 if keyed_u01(self.key, line) < 0.5 else -1
            self.realized[line] = v
        return v


@dataclass
class MdmStats:
    """Single-replica observables of the layered walk."""

    n: int
    x_max: int
    x_min: int
    t0: int | None          # first k >= 1 with x_k = 0; None = censored
    full_range: int         # distinct lattice points among M_0..M_n
    at_origin: bool         # M_n = (0, 0)

    @property
    def range1(self) -> int:
        # |x| changes by at most 1 per step, so the x-values fill an interval
        return self.x_max - self.x_min + 1

    @property
    def censored(self) -> bool:
        return self.t0 is None


def k_p(p: float) -> float:
    """Scale constant K_p = p / (1-p)^(1/4) of the horizontal coordinate."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    return p / (1.0 - p) ** 0.25


def simulate_mdm(cfg: MdmConfig, streams: ReplicaStreams) -> MdmStats:
    """One replica; step t consumes the walk-stream word at counter t."""
    env = Environment(streams.env_key)
    half = (1.0 - cfg.p) / 2.0
    x = 0
    y = 0
    xmax = 0
    xmin = 0
    t0 = None
    points = {(0, 0)}
    for t in range(1, cfg.n + 1):
        u = keyed_u01(streams.walk_key, t)
        if u < cfg.p:
            x += env.orientation(y)
        elif (u - cfg.p) < half:
            y += 1
        else:
            y -= 1
        if x > xmax:
            xmax = x
        elif x < xmin:
            xmin = x
        if t0 is None and x == 0:
            t0 = t
        points.add((x, y))
    return MdmStats(n=cfg.n, x_max=xmax, x_min=xmin, t0=t0,
                    full_range=len(points),
                    at_origin=(x == 0 and y == 0))


@dataclass
class MdmEnsembleRow:
    n: int
    survival: float
    survival_stderr: float
    mean_range1: float
    range1_stderr: float
    full_range_over_n: float
    full_range_stderr: float
    return_freq: float       # P(M_{2n} = (0,0)) estimate
    return_stderr: float
    replicas: int


@dataclass
class MdmEnsembleResult:
    p: float
    seed: int
    replicas: int
    quenched: bool
    rows: list[MdmEnsembleRow]
    warnings: list[str]


def mdm_ensemble(p: float, grid, replicas: int, seed: int,
                 quenched: bool = False,
                 full_range_replicas: int | None = None) -> MdmEnsembleResult:
    """Grid estimates of survival, mean transverse range, full range per
    step, and the even-time return frequency, from one replica set.

    The full planar range needs the whole path, so it runs on a replica
    subsample (full_range_replicas, default min(replicas, 512)).
    """
    cfg = MdmConfig(p=p, n=int(max(grid)))
    ck = np.asarray(sorted(grid), dtype=np.int64)
    xmax, xmin, t0, origin = _engine.mdm_curve(seed, replicas, ck, p, quenched)
    range1 = (xmax - xmin + 1).astype(np.float64)

    fr_reps = min(replicas, 512) if full_range_replicas is None else full_range_replicas
    fr_counts = np.empty((fr_reps, ck.size), dtype=np.int64)
    batch = max(1, min(fr_reps, (1 << 23) // max(cfg.n, 1)))
    done = 0
    while done < fr_reps:
        b = min(batch, fr_reps - done)
        xs, ys = _engine.mdm_paths(seed, done, b, cfg.n, p, quenched)
        span = 2 * cfg.n + 1
        enc = (xs + cfg.n) * span + (ys + cfg.n)
        for i in range(b):
            fr_counts[done + i] = _engine.distinct_prefix_counts(enc[i], ck)
        done += b

    warnings = []
    rows = []
    for j, n in enumerate(ck):
        surv = np.logical_or(t0 == 0, t0 > n)  # t0 = 0 means censored at grid max
        p_surv = float(np.mean(surv))
        se_surv = float(np.sqrt(p_surv * (1.0 - p_surv) / replicas))
        ret = origin[:, j].astype(np.float64)
        p_ret = float(np.mean(ret))
        se_ret = float(np.sqrt(p_ret * (1.0 - p_ret) / replicas))
        hits = p_ret * replicas
        if hits < 100:
            warnings.append(
                f"return frequency at 2n = {2 * int(n)}: expected hits "
                f"{hits:.1f} < 100; estimate is noisy"
            )
        fr = fr_counts[:, j].astype(np.float64) / float(n)
        rows.append(MdmEnsembleRow(
            n=int(n),
            survival=p_surv,
            survival_stderr=se_surv,
            mean_range1=float(np.mean(range1[:, j])),
            range1_stderr=float(np.std(range1[:, j], ddof=1) / np.sqrt(replicas)),
            full_range_over_n=float(np.mean(fr)),
            full_range_stderr=float(np.std(fr, ddof=1) / np.sqrt(fr_reps)),
            return_freq=p_ret,
            return_stderr=se_ret,
            replicas=replicas,
        ))
    return MdmEnsembleResult(p=p, seed=seed, replicas=replicas,
                             quenched=quenched, rows=rows, warnings=warnings)
