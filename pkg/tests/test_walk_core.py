"""Single-trajectory walk mechanics and local-time bookkeeping."""

import io
import math

import numpy as np
import pytest

from scenerywalk.samplers import HeavyTailWalk, LazyWalk, SimpleWalk
from scenerywalk.streams import ReplicaStreams
from scenerywalk.walk_core import (
    Trajectory,
    dump_positions,
    self_intersections,
    self_intersections_beta,
    simulate_walk,
)


def _streams(rep=0, seed=99):
    return ReplicaStreams.for_replica(seed, rep)


def test_from_increments_positions():
    traj = Trajectory.from_increments([1, -1, 1])
    np.testing.assert_array_equal(traj.positions, [0, 1, 0, 1])
    assert traj.n == 3
    assert traj.final_position == 1
    # visits over steps 1..3: site 1 twice, site 0 once (S_0 not counted)
    assert traj.local_times == {1: 2, 0: 1}
    assert sum(traj.local_times.values()) == traj.n


def test_self_intersections_hand_case():
    # V_3 for path (0,1,0,1): N(1)=2, N(0)=1 -> 4 + 1 = 5
    traj = Trajectory.from_increments([1, -1, 1])
    assert self_intersections(traj) == 5
    # generalized count with exponent 1.5: 2^1.5 + 1
    assert self_intersections_beta(traj, 1.5) == pytest.approx(2.0 ** 1.5 + 1.0)
    # exponent 1 just counts steps
    assert self_intersections_beta(traj, 1.0) == pytest.approx(traj.n)
    with pytest.raises(ValueError):
        self_intersections_beta(traj, 0.0)


def test_self_intersections_definition():
    # V_n = #{(i,j) in [1,n]^2 : S_i = S_j}, checked by brute force
    rng = np.random.default_rng(5)
    for _ in range(20):
        inc = rng.choice([-1, 0, 1], size=30)
        traj = Trajectory.from_increments(inc)
        pos = traj.positions
        brute = sum(
            1
            for i in range(1, traj.n + 1)
            for j in range(1, traj.n + 1)
            if pos[i] == pos[j]
        )
        assert self_intersections(traj) == brute


def test_simulate_walk_reproducible():
    a = simulate_walk(200, SimpleWalk(), _streams())
    b = simulate_walk(200, SimpleWalk(), _streams())
    np.testing.assert_array_equal(a.positions, b.positions)
    assert a.local_times == b.local_times


def test_simulate_walk_prefix_consistency():
    # the first n steps of a longer walk equal the shorter walk
    short = simulate_walk(50, LazyWalk(p=1 / 3), _streams())
    long = simulate_walk(120, LazyWalk(p=1 / 3), _streams())
    np.testing.assert_array_equal(long.positions[:51], short.positions)


def test_simple_walk_parity():
    for rep in range(10):
        traj = simulate_walk(101, SimpleWalk(), _streams(rep))
        pos = traj.positions
        steps = np.diff(pos)
        assert set(np.unique(steps)) <= {-1, 1}
        # S_t has the parity of t
        assert np.all((pos[1::2] % 2) != 0)
        assert np.all((pos[0::2] % 2) == 0)


def test_simulate_walk_without_positions():
    a = simulate_walk(300, SimpleWalk(), _streams(3))
    b = simulate_walk(300, SimpleWalk(), _streams(3), keep_positions=False)
    assert b.positions is None
    assert b.final_position == a.final_position
    assert b.local_times == a.local_times
    assert self_intersections(b) == self_intersections(a)


def test_simulate_walk_rejects_negative_n():
    with pytest.raises(ValueError):
        simulate_walk(-1, SimpleWalk(), _streams())


def test_zero_step_walk():
    traj = simulate_walk(0, SimpleWalk(), _streams())
    np.testing.assert_array_equal(traj.positions, [0])
    assert traj.local_times == {}
    assert self_intersections(traj) == 0


def test_heavy_tail_walk_runs():
    traj = simulate_walk(1000, HeavyTailWalk(alpha=0.75), _streams())
    steps = np.diff(traj.positions)
    assert np.all(steps != 0)
    # with alpha < 1 some steps should be large
    assert np.max(np.abs(steps)) > 10


def test_dump_positions():
    traj = Trajectory.from_increments([1, 1, -1])
    buf = io.StringIO()
    dump_positions(traj, buf)
    assert buf.getvalue() == "0\n1\n2\n1\n"
    bare = simulate_walk(5, SimpleWalk(), _streams(), keep_positions=False)
    with pytest.raises(ValueError):
        dump_positions(bare, io.StringIO())


def test_mean_square_displacement():
    # E[S_n^2] = n for the simple walk
    n, reps = 256, 4000
    finals = np.array([
        simulate_walk(n, SimpleWalk(), _streams(rep), keep_positions=False).final_position
        for rep in range(reps)
    ], dtype=np.float64)
    msd = np.mean(finals ** 2)
    se = np.std(finals ** 2, ddof=1) / math.sqrt(reps)
    assert abs(msd - n) < 4 * se
