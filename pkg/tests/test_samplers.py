"""Distribution-level tests for the walk / scenery samplers.

MC checks use 4-standard-error tolerances on seeded streams, so they are
deterministic: a failure means the sampler changed, not that we got
unlucky.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import zeta

from scenerywalk.samplers import (
    GaussianScenery,
    HeavyTailWalk,
    LatticeTail,
    LazyWalk,
    Rademacher,
    SimpleWalk,
    StableParams,
    StableScenery,
    SymmetricZipf,
    Ternary,
    sample_scenery_block,
    sample_stable,
    sample_stable_block,
    scenery_dist,
    signed_from_u01,
    walk_dist,
)
from scenerywalk.streams import Stream, stream_key

KEY = stream_key(2024, 0, 4)


# ---------- parameter validation ----------


def test_stable_params_validation():
    with pytest.raises(ValueError):
        StableParams(beta=0.0, a1=1.0)
    with pytest.raises(ValueError):
        StableParams(beta=2.5, a1=1.0)
    with pytest.raises(ValueError):
        StableParams(beta=1.5, a1=-1.0)
    with pytest.raises(ValueError):
        StableParams(beta=2.0, a1=1.0, a2=0.1)  # no skew at beta = 2
    with pytest.raises(ValueError):
        StableParams(beta=1.0, a1=1.0, a2=0.1)  # asymmetric Cauchy unsupported
    # skew bound |a2| <= a1 |tan(pi beta / 2)|
    bound = 0.5 * abs(math.tan(math.pi * 1.5 / 2.0))
    StableParams(beta=1.5, a1=0.5, a2=bound * 0.999)
    with pytest.raises(ValueError):
        StableParams(beta=1.5, a1=0.5, a2=bound * 1.001)


@given(beta=st.floats(0.01, 2.0), a1=st.floats(0.01, 10.0))
@settings(max_examples=50, deadline=None)
def test_stable_scale_roundtrip(beta, a1):
    p = StableParams(beta=beta, a1=a1)
    assert p.scale == pytest.approx(a1 ** (1.0 / beta))
    assert p.skew == 0.0


def test_ternary_validation():
    with pytest.raises(ValueError):
        Ternary(q=1.0)
    with pytest.raises(ValueError):
        Ternary(q=-0.1)
    with pytest.raises(ValueError):
        SymmetricZipf(beta=2.0)
    with pytest.raises(ValueError):
        GaussianScenery(sigma=0.0)
    with pytest.raises(ValueError):
        LazyWalk(p=0.0)
    with pytest.raises(ValueError):
        HeavyTailWalk(alpha=2.0)


def test_factories():
    assert isinstance(scenery_dist("rademacher"), Rademacher)
    assert scenery_dist("ternary", q=0.3).q == 0.3
    assert scenery_dist("zipf", beta=0.7).beta == 0.7
    assert scenery_dist("gaussian", sigma=2.0).sigma == 2.0
    assert scenery_dist("stable", beta=1.5).params.beta == 1.5
    assert isinstance(walk_dist("simple"), SimpleWalk)
    assert walk_dist("lazy", p=0.25).p == 0.25
    assert walk_dist("heavy-tail", alpha=0.9).alpha == 0.9
    with pytest.raises(ValueError):
        scenery_dist("cauchy")
    with pytest.raises(ValueError):
        walk_dist("levy")


# ---------- stable sampler ----------


def test_stable_block_matches_scalar():
    p = StableParams(beta=1.5, a1=0.5, a2=0.2)
    s_scalar = Stream(KEY)
    xs = np.array([sample_stable(p, s_scalar) for _ in range(300)])
    s_block = Stream(KEY)
    xb = sample_stable_block(p, s_block, 300)
    assert s_scalar.counter == s_block.counter == 600
    np.testing.assert_allclose(xb, xs, rtol=1e-12, atol=1e-12)


def test_stable_gaussian_case_moments():
    # beta = 2 with a1 = 1/2 is exactly N(0, 1)
    p = StableParams(beta=2.0, a1=0.5)
    n = 200_000
    x = sample_stable_block(p, Stream(KEY), n)
    assert abs(x.mean()) < 4 / math.sqrt(n)
    assert abs(x.var() - 1.0) < 4 * math.sqrt(2.0 / n)
    assert abs((x ** 3).mean()) < 4 * math.sqrt(15.0 / n)


def test_stable_characteristic_function():
    # symmetric stable: E[exp(iuX)] = exp(-a1 |u|^beta), real and positive
    n = 200_000
    for beta in (0.8, 1.0, 1.5, 2.0):
        p = StableParams(beta=beta, a1=0.5)
        x = sample_stable_block(p, Stream(stream_key(2024, 1, 4)), n)
        for u in (0.25, 1.0, 2.0):
            target = math.exp(-0.5 * abs(u) ** beta)
            re = np.cos(u * x)
            im = np.sin(u * x)
            se_re = re.std(ddof=1) / math.sqrt(n)
            se_im = im.std(ddof=1) / math.sqrt(n)
            assert abs(re.mean() - target) < 4 * se_re, (beta, u)
            assert abs(im.mean()) < 4 * se_im, (beta, u)


def test_stable_cauchy_quartiles():
    # beta = 1, a1 = s: Cauchy with scale s; quartiles at +-s
    s = 0.5
    n = 100_000
    x = sample_stable_block(StableParams(beta=1.0, a1=s), Stream(KEY), n)
    lo, hi = np.quantile(x, [0.25, 0.75])
    # density at the quartiles is 1/(2 pi s); se of the quantile follows
    se = math.sqrt(0.25 * 0.75 / n) * (2.0 * math.pi * s)
    assert abs(lo + s) < 4 * se
    assert abs(hi - s) < 4 * se


def test_skewed_stable_mean_drift():
    # skewed beta in (1,2) is strictly stable with mean 0
    p = StableParams(beta=1.5, a1=0.5, a2=0.3)
    n = 400_000
    x = sample_stable_block(p, Stream(KEY), n)
    se = x.std(ddof=1) / math.sqrt(n)
    assert abs(x.mean()) < 4 * se


# ---------- lattice power tails ----------


def test_lattice_tail_exact_tail_matches_zeta():
    t = LatticeTail(index=0.5, table_size=1 << 10)
    z = zeta(1.5, 1.0)
    for k in (1, 5, 100, 5000):
        assert t.exact_tail(k) == pytest.approx(float(zeta(1.5, k + 1) / z), rel=1e-12)
    # tail mass beyond the table is what the inversion switches over to
    assert t.tail_mass == pytest.approx(t.exact_tail(1 << 10), rel=1e-12)


def test_lattice_tail_inversion_bins():
    t = LatticeTail(index=0.8, table_size=64)
    eps = 1e-12
    assert t.magnitude(0.0) == 1
    assert t.magnitude(float(t.cdf[0]) - eps) == 1
    assert t.magnitude(float(t.cdf[0]) + eps) == 2
    assert t.magnitude(float(t.cdf[4]) + eps) == 6
    # deep tail maps to the cap, never past it
    assert t.magnitude(1.0 - 1e-300) == t.value_cap
    assert t.magnitude(1.0 - 1e-18) <= t.value_cap


def test_lattice_tail_frequencies():
    beta = 0.5
    t = LatticeTail(index=beta)
    n = 200_000
    s = Stream(KEY)
    mags = np.array([t.magnitude(s.u01()) for _ in range(n)])
    z = zeta(1.0 + beta, 1.0)
    for k in (1, 2, 3):
        p_k = k ** (-1.0 - beta) / z
        se = math.sqrt(p_k * (1 - p_k) / n)
        assert abs(np.mean(mags == k) - p_k) < 4 * se, k
    for thr in (10, 1000):
        p_t = t.exact_tail(thr)
        se = math.sqrt(p_t * (1 - p_t) / n)
        assert abs(np.mean(mags > thr) - p_t) < 4 * se, thr


def test_signed_from_u01_symmetric():
    t = LatticeTail(index=0.5)
    s = Stream(KEY)
    vals = np.array([signed_from_u01(t, s.u01()) for _ in range(100_000)])
    assert np.all(vals != 0)
    frac_pos = np.mean(vals > 0)
    assert abs(frac_pos - 0.5) < 4 * math.sqrt(0.25 / vals.size)
    # magnitude law must not depend on the sign
    pos1 = np.mean(vals == 1)
    neg1 = np.mean(vals == -1)
    assert abs(pos1 - neg1) < 4 * math.sqrt(pos1 / vals.size)


# ---------- quenched sceneries ----------


def test_scenery_values_are_quenched():
    for dist in (Rademacher(), Ternary(q=0.25), SymmetricZipf(beta=0.5),
                 GaussianScenery(), StableScenery(StableParams(beta=1.5, a1=0.5))):
        a = dist.value_at(KEY, 12345)
        b = dist.value_at(KEY, 12345)
        assert a == b
        # a different site (or key) gives an independent draw
        assert dist.value_at(KEY, -12345) == dist.value_at(KEY, -12345)


def test_ternary_zero_q_equals_rademacher():
    t = Ternary(q=0.0)
    r = Rademacher()
    for site in range(-500, 500):
        assert t.value_at(KEY, site) == r.value_at(KEY, site)


def test_ternary_frequencies():
    q = 0.25
    t = Ternary(q=q)
    sites = np.arange(100_000, dtype=np.uint64)
    vals = sample_scenery_block(t, KEY, sites)
    n = sites.size
    assert abs(np.mean(vals == 0) - q) < 4 * math.sqrt(q * (1 - q) / n)
    half = (1 - q) / 2
    assert abs(np.mean(vals == 1) - half) < 4 * math.sqrt(half * (1 - half) / n)
    assert abs(np.mean(vals == -1) - half) < 4 * math.sqrt(half * (1 - half) / n)


def test_scenery_block_matches_scalar():
    sites = np.arange(-50, 50, dtype=np.int64).astype(np.uint64)
    for dist in (Rademacher(), Ternary(q=0.3), SymmetricZipf(beta=0.7),
                 GaussianScenery(sigma=1.5),
                 StableScenery(StableParams(beta=1.2, a1=0.5))):
        block = sample_scenery_block(dist, KEY, sites)
        scalar = [dist.value_at(KEY, int(np.int64(s))) for s in sites]
        np.testing.assert_allclose(block.astype(np.float64),
                                   np.asarray(scalar, dtype=np.float64),
                                   rtol=1e-12)


def test_gaussian_scenery_moments():
    g = GaussianScenery(sigma=2.0)
    sites = np.arange(200_000, dtype=np.uint64)
    x = sample_scenery_block(g, KEY, sites)
    n = x.size
    assert abs(x.mean()) < 4 * 2.0 / math.sqrt(n)
    assert abs(x.var() - 4.0) < 4 * 4.0 * math.sqrt(2.0 / n)


def test_zipf_beta_index_and_tail():
    z = SymmetricZipf(beta=0.5)
    assert z.beta_index == 0.5
    assert not z.unit_lattice
    assert z.integer_valued
    vals = sample_scenery_block(z, KEY, np.arange(200_000, dtype=np.uint64))
    p_t = z.tail.exact_tail(100)
    se = math.sqrt(p_t * (1 - p_t) / vals.size)
    assert abs(np.mean(np.abs(vals) > 100) - p_t) < 4 * se


# ---------- walks ----------


def test_walk_increments_match_stream():
    w = SimpleWalk()
    incs = [w.increment_at(KEY, t) for t in range(1, 2001)]
    assert set(incs) <= {-1, 1}
    assert abs(np.mean(incs)) < 4 / math.sqrt(2000)


def test_lazy_walk_hold_frequency():
    w = LazyWalk(p=1.0 / 3.0)
    incs = np.array([w.increment_at(KEY, t) for t in range(1, 100_001)])
    n = incs.size
    assert abs(np.mean(incs == 0) - 1 / 3) < 4 * math.sqrt((1 / 3) * (2 / 3) / n)
    assert abs(np.mean(incs == 1) - 1 / 3) < 4 * math.sqrt((1 / 3) * (2 / 3) / n)
    assert w.period == 1
    assert w.alpha_index == 2.0


def test_heavy_tail_walk_tail_frequency():
    w = HeavyTailWalk(alpha=1.5)
    assert w.alpha_index == 1.5
    incs = np.array([w.increment_at(KEY, t) for t in range(1, 100_001)])
    p_t = w.tail.exact_tail(10)
    se = math.sqrt(p_t * (1 - p_t) / incs.size)
    assert abs(np.mean(np.abs(incs) > 10) - p_t) < 4 * se
