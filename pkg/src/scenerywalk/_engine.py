"""Glue between the distribution objects and the compiled kernels.

Everything here returns plain numpy arrays indexed by replica; callers do
their own reductions (in replica order, so results never depend on the
thread count).
"""

from __future__ import annotations

import numpy as np
from numba import config as _nb_config
from numba import set_num_threads

from . import _kernels as K
from .samplers import (
    GaussianScenery,
    HeavyTailWalk,
    LazyWalk,
    Rademacher,
    SimpleWalk,
    StableScenery,
    SymmetricZipf,
    Ternary,
)
from .streams import MASK64, ROLE_ENV, stream_key

_EMPTY = np.zeros(0, dtype=np.float64)


def max_threads() -> int:
    return int(_nb_config.NUMBA_NUM_THREADS)


def apply_threads(threads: int | None) -> int:
    """Clamp to the launch-time maximum and apply; returns the effective count.

    None means "use everything available".  Results never depend on this.
    """
    eff = max_threads() if threads is None else max(1, min(int(threads), max_threads()))
    set_num_threads(eff)
    return eff


def _u64(x: int) -> np.uint64:
    return np.uint64(x & MASK64)


def walk_args(dist):
    if isinstance(dist, SimpleWalk):
        return (K.WALK_SIMPLE, 0.0, 0.0, _EMPTY, 0.0, 0, np.int64(0))
    if isinstance(dist, LazyWalk):
        return (K.WALK_LAZY, dist.p, 0.0, _EMPTY, 0.0, 0, np.int64(0))
    if isinstance(dist, HeavyTailWalk):
        t = dist.tail
        return (K.WALK_HEAVY, 0.0, t.index, t.cdf, t.tail_mass,
                t.table_size, np.int64(t.value_cap))
    raise TypeError(f"no kernel mapping for walk dist {dist!r}")


def scenery_int_args(dist):
    if isinstance(dist, Rademacher):
        return (K.SCEN_RADEMACHER, 0.0, 0.0, _EMPTY, 0.0, 0, np.int64(0))
    if isinstance(dist, Ternary):
        return (K.SCEN_TERNARY, dist.q, 0.0, _EMPTY, 0.0, 0, np.int64(0))
    if isinstance(dist, SymmetricZipf):
        t = dist.tail
        return (K.SCEN_ZIPF, 0.0, t.index, t.cdf, t.tail_mass,
                t.table_size, np.int64(t.value_cap))
    raise TypeError(f"integer-scenery kernels cannot use {dist!r}")


def scenery_float_args(dist):
    if isinstance(dist, GaussianScenery):
        return (K.SCEN_GAUSSIAN, dist.sigma, 0.0, 0.0)
    if isinstance(dist, StableScenery):
        p = dist.params
        return (K.SCEN_STABLE, p.beta, p.skew, p.scale)
    raise TypeError(f"real-scenery kernels cannot use {dist!r}")


# ---------- walk ensembles ----------


def walk_paths(master, rep0, reps, n, walk):
    out = np.empty((reps, n + 1), dtype=np.int64)
    K.walk_paths(_u64(master), rep0, reps, n, *walk_args(walk), out)
    return out


def walk_final(master, rep0, reps, n, walk):
    out = np.empty(reps, dtype=np.int64)
    K.walk_final(_u64(master), rep0, reps, n, *walk_args(walk), out)
    return out


def walk_v(master, rep0, reps, n, walk):
    out = np.empty(reps, dtype=np.int64)
    scratch = np.empty((reps, n), dtype=np.int64)
    K.walk_self_intersections(_u64(master), rep0, reps, n, *walk_args(walk), out, scratch)
    return out


# ---------- scenery-walk ensembles ----------


def rwrs_t0_sample(master, reps, horizon, walk, scen):
    """First-return sample; entries of 0 mean censored beyond `horizon`."""
    out = np.empty(reps, dtype=np.int64)
    K.rwrs_survival_int(_u64(master), 0, reps, horizon,
                        *walk_args(walk), *scenery_int_args(scen), out)
    return out


def rwrs_curve(master, reps, ckpts, walk, scen):
    ck = np.asarray(ckpts, dtype=np.int64)
    zmax = np.empty((reps, ck.size), dtype=np.int64)
    zmin = np.empty((reps, ck.size), dtype=np.int64)
    t0 = np.empty(reps, dtype=np.int64)
    zfinal = np.empty(reps, dtype=np.int64)
    K.rwrs_curve_int(_u64(master), 0, reps, ck,
                     *walk_args(walk), *scenery_int_args(scen),
                     zmax, zmin, t0, zfinal)
    return zmax, zmin, t0, zfinal


def rwrs_curve_real(master, reps, ckpts, walk, scen):
    ck = np.asarray(ckpts, dtype=np.int64)
    zmax = np.empty((reps, ck.size), dtype=np.float64)
    zmin = np.empty((reps, ck.size), dtype=np.float64)
    zfinal = np.empty(reps, dtype=np.float64)
    K.rwrs_curve_float(_u64(master), 0, reps, ck,
                       *walk_args(walk), *scenery_float_args(scen),
                       zmax, zmin, zfinal)
    return zmax, zmin, zfinal


def rwrs_paths(master, rep0, reps, n, walk, scen):
    out = np.empty((reps, n + 1), dtype=np.int64)
    K.rwrs_paths_int(_u64(master), rep0, reps, n,
                     *walk_args(walk), *scenery_int_args(scen), out)
    return out


def rwrs_pairs(master, reps, n, walk, scen, rep0=0):
    """(distinct-value range of Z_0..Z_n, pair count over [1,n]^2).

    rep0 offsets the replica index so callers can batch the path-sized
    scratch buffer without changing which replica gets which stream.
    """
    rng = np.empty(reps, dtype=np.int64)
    vz = np.empty(reps, dtype=np.int64)
    scratch = np.empty((reps, n + 1), dtype=np.int64)
    K.rwrs_pair_stats(_u64(master), rep0, reps, n,
                      *walk_args(walk), *scenery_int_args(scen),
                      rng, vz, scratch)
    return rng, vz


# ---------- layered-medium ensembles ----------


def _env_key0(master, quenched):
    # quenched mode freezes replica 0's environment for the whole ensemble
    return np.uint64(stream_key(master, 0, ROLE_ENV)) if quenched else np.uint64(0)


def mdm_t0_sample(master, reps, horizon, p, quenched=False):
    out = np.empty(reps, dtype=np.int64)
    K.mdm_survival(_u64(master), 0, reps, horizon, p,
                   quenched, _env_key0(master, quenched), out)
    return out


def mdm_curve(master, reps, ckpts, p, quenched=False):
    ck = np.asarray(ckpts, dtype=np.int64)
    xmax = np.empty((reps, ck.size), dtype=np.int64)
    xmin = np.empty((reps, ck.size), dtype=np.int64)
    t0 = np.empty(reps, dtype=np.int64)
    origin = np.empty((reps, ck.size), dtype=np.int64)
    K.mdm_curve(_u64(master), 0, reps, ck, p,
                quenched, _env_key0(master, quenched),
                xmax, xmin, t0, origin)
    return xmax, xmin, t0, origin


def mdm_paths(master, rep0, reps, n, p, quenched=False):
    x = np.empty((reps, n + 1), dtype=np.int64)
    y = np.empty((reps, n + 1), dtype=np.int64)
    K.mdm_paths(_u64(master), rep0, reps, n, p,
                quenched, _env_key0(master, quenched), x, y)
    return x, y


# ---------- limit-process ensembles ----------


def ks_direct_sup(master, reps, m, alpha, beta, y_scale=1.0, u_scale=1.0):
    sup = np.empty(reps, dtype=np.float64)
    inf = np.empty(reps, dtype=np.float64)
    K.ks_direct_grid(_u64(master), 0, reps, m, alpha, y_scale, beta, u_scale,
                     sup, inf)
    return sup, inf


def distinct_prefix_counts(values: np.ndarray, checkpoints) -> np.ndarray:
    """#distinct among values[:ck+1] for each checkpoint (indices into values).

    One pass: the first-occurrence index of each distinct value is found via
    np.unique, then counting first occurrences <= ck is a searchsorted.
    """
    _, first_idx = np.unique(values, return_index=True)
    first_idx.sort()
    cks = np.asarray(checkpoints, dtype=np.int64)
    return np.searchsorted(first_idx, cks, side="right")
