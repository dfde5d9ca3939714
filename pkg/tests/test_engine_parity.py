"""The compiled kernels must reproduce the readable Python reference
replica by replica, bitwise for integer observables.  Every ensemble
driver routes through these kernels, so this is the test that lets the
single-trajectory code vouch for the whole pipeline."""

import numpy as np
import pytest

from scenerywalk import _engine
from scenerywalk.ks_limit import KsGrid, simulate_ks_sup
from scenerywalk.mdm import MdmConfig, simulate_mdm
from scenerywalk.rwrs import simulate_rwrs
from scenerywalk.samplers import (
    GaussianScenery,
    HeavyTailWalk,
    LazyWalk,
    Rademacher,
    SimpleWalk,
    StableParams,
    StableScenery,
    SymmetricZipf,
    Ternary,
)
from scenerywalk.streams import ReplicaStreams
from scenerywalk.walk_core import self_intersections, simulate_walk

SEED = 404
REPS = 40
N = 96

WALKS = [SimpleWalk(), LazyWalk(p=1 / 3), HeavyTailWalk(alpha=1.5)]
INT_SCENERIES = [Rademacher(), Ternary(q=0.25), SymmetricZipf(beta=0.5)]


def _streams(rep, shared=None):
    return ReplicaStreams.for_replica(SEED, rep, shared_env_with=shared)


@pytest.mark.parametrize("walk", WALKS, ids=lambda w: type(w).__name__)
def test_walk_paths_match_reference(walk):
    paths = _engine.walk_paths(SEED, 0, REPS, N, walk)
    for rep in range(REPS):
        traj = simulate_walk(N, walk, _streams(rep))
        np.testing.assert_array_equal(paths[rep], traj.positions)


def test_walk_final_and_v_match_reference():
    walk = SimpleWalk()
    finals = _engine.walk_final(SEED, 0, REPS, N, walk)
    vs = _engine.walk_v(SEED, 0, REPS, N, walk)
    for rep in range(REPS):
        traj = simulate_walk(N, walk, _streams(rep))
        assert finals[rep] == traj.final_position
        assert vs[rep] == self_intersections(traj)


@pytest.mark.parametrize("walk", WALKS, ids=lambda w: type(w).__name__)
@pytest.mark.parametrize("scen", INT_SCENERIES, ids=lambda s: type(s).__name__)
def test_rwrs_curve_matches_reference(walk, scen):
    ckpts = [16, 48, N]
    zmax, zmin, t0, zfinal = _engine.rwrs_curve(SEED, REPS, ckpts, walk, scen)
    for rep in range(REPS):
        for j, n in enumerate(ckpts):
            stats = simulate_rwrs(n, walk, scen, _streams(rep))
            assert zmax[rep, j] == stats.running_max
            assert zmin[rep, j] == stats.running_min
        full = simulate_rwrs(N, walk, scen, _streams(rep))
        assert zfinal[rep] == full.final_z
        # kernel convention: t0 = 0 encodes censored past the horizon
        assert t0[rep] == (0 if full.t0 is None else full.t0)


def test_rwrs_t0_sample_matches_reference():
    walk, scen = LazyWalk(p=1 / 3), Rademacher()
    t0s = _engine.rwrs_t0_sample(SEED, REPS, N, walk, scen)
    for rep in range(REPS):
        stats = simulate_rwrs(N, walk, scen, _streams(rep))
        assert t0s[rep] == (0 if stats.t0 is None else stats.t0)


def test_rwrs_paths_and_pairs_match_reference():
    walk, scen = SimpleWalk(), Ternary(q=0.25)
    paths = _engine.rwrs_paths(SEED, 0, REPS, N, walk, scen)
    rng, vz = _engine.rwrs_pairs(SEED, REPS, N, walk, scen)
    for rep in range(REPS):
        stats = simulate_rwrs(N, walk, scen, _streams(rep), want_pairs=True)
        assert paths[rep, 0] == 0
        assert paths[rep, -1] == stats.final_z
        assert rng[rep] == stats.range_count
        assert vz[rep] == stats.v_z


@pytest.mark.parametrize("scen", [
    GaussianScenery(),
    StableScenery(StableParams(beta=1.5, a1=0.5)),
], ids=lambda s: type(s).__name__)
def test_rwrs_curve_real_matches_reference(scen):
    walk = SimpleWalk()
    ckpts = [32, N]
    zmax, zmin, zfinal = _engine.rwrs_curve_real(SEED, REPS, ckpts, walk, scen)
    for rep in range(REPS):
        for j, n in enumerate(ckpts):
            stats = simulate_rwrs(n, walk, scen, _streams(rep))
            assert zmax[rep, j] == pytest.approx(stats.running_max, rel=1e-12, abs=1e-12)
            assert zmin[rep, j] == pytest.approx(stats.running_min, rel=1e-12, abs=1e-12)
        stats = simulate_rwrs(N, walk, scen, _streams(rep))
        assert zfinal[rep] == pytest.approx(stats.final_z, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("quenched", [False, True])
def test_mdm_kernels_match_reference(quenched):
    p = 1 / 3
    shared = 0 if quenched else None
    ckpts = [16, N]
    xmax, xmin, t0, origin = _engine.mdm_curve(SEED, REPS, ckpts, p, quenched)
    xs, ys = _engine.mdm_paths(SEED, 0, REPS, N, p, quenched)
    t0s = _engine.mdm_t0_sample(SEED, REPS, N, p, quenched)
    for rep in range(REPS):
        for j, n in enumerate(ckpts):
            stats = simulate_mdm(MdmConfig(p=p, n=n), _streams(rep, shared))
            assert xmax[rep, j] == stats.x_max
            assert xmin[rep, j] == stats.x_min
        full = simulate_mdm(MdmConfig(p=p, n=N), _streams(rep, shared))
        assert t0[rep] == (0 if full.t0 is None else full.t0)
        assert t0s[rep] == t0[rep]
        assert (xs[rep, 0], ys[rep, 0]) == (0, 0)
        # the paths kernel agrees with the curve kernel on the extrema
        assert xs[rep].max() == xmax[rep, -1]
        assert xs[rep].min() == xmin[rep, -1]
        assert full.full_range == len({(int(a), int(b))
                                       for a, b in zip(xs[rep], ys[rep])})
    # origin[:, j] flags M_{2*ckpt} = (0,0); check against paths directly
    xs2, ys2 = _engine.mdm_paths(SEED, 0, REPS, 2 * N, p, quenched)
    at = (xs2[:, 2 * ckpts[-1]] == 0) & (ys2[:, 2 * ckpts[-1]] == 0)
    np.testing.assert_array_equal(origin[:, -1].astype(bool), at)


def test_mdm_paths_unit_steps():
    xs, ys = _engine.mdm_paths(SEED, 0, REPS, N, 1 / 3, False)
    dx = np.abs(np.diff(xs, axis=1))
    dy = np.abs(np.diff(ys, axis=1))
    assert np.all(dx + dy == 1)


def test_ks_direct_grid_matches_reference():
    grid = KsGrid(m=64, alpha=2.0, beta=2.0)
    y_scale = 0.5 ** (1 / grid.alpha)
    u_scale = 0.5 ** (1 / grid.beta)
    sup, inf = _engine.ks_direct_sup(SEED, 16, grid.m, grid.alpha, grid.beta,
                                     y_scale, u_scale)
    for rep in range(16):
        s, i = simulate_ks_sup(grid, _streams(rep), estimator="direct-grid")
        assert sup[rep] == pytest.approx(s, rel=1e-10, abs=1e-10)
        assert inf[rep] == pytest.approx(i, rel=1e-10, abs=1e-10)


def test_distinct_prefix_counts():
    vals = np.array([5, 3, 5, 7, 3, 1, 1, 9])
    got = _engine.distinct_prefix_counts(vals, [0, 1, 2, 4, 7])
    np.testing.assert_array_equal(got, [1, 2, 2, 3, 5])


def test_apply_threads_clamps():
    top = _engine.max_threads()
    assert _engine.apply_threads(None) == top
    assert _engine.apply_threads(1) == 1
    assert _engine.apply_threads(10_000) == top
    _engine.apply_threads(None)


def test_thread_count_does_not_change_results():
    walk, scen = SimpleWalk(), Rademacher()
    _engine.apply_threads(1)
    a = _engine.rwrs_curve(SEED, 64, [N], walk, scen)
    _engine.apply_threads(None)
    b = _engine.rwrs_curve(SEED, 64, [N], walk, scen)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
