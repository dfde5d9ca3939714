"""Exact small-n laws by enumeration and convolution.

Enumeration walks the tree of (walk path, scenery values on visited sites)
with integer weights over a fixed common denominator, so rational-parameter
models give exact Fractions.  Scenery (and layer orientation) branching
happens only at first visits, which keeps the tree at
|walk support|^n * |scenery support|^(visited sites).

Parameters that are not exactly rational fall back to float64 accumulation;
the result then carries arithmetic = "float64" and a note.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .samplers import LazyWalk, Rademacher, SimpleWalk, Ternary, WalkDist

DEFAULT_BUDGET = 20_000_000
DP_LIMIT = 1 << 14

Number = Fraction | float


class BudgetExceededError(Exception):
    """The enumeration tree would exceed the configured budget."""


@dataclass
class ExactRwrs:
    """Exact distributional facts of the scenery sum at horizon n."""

    n: int
    e_range: Number                  # E[#{Z_0..Z_n}]
    survival: dict[int, Number]      # k -> P(T0 > k), k = 1..n
    e_v: Number                      # E[sum of squared walk local times]
    mass: Number                     # total leaf weight; 1 if nothing leaked
    arithmetic: str
    leaves: int
    note: str = ""

    def identity_gap(self) -> Number:
        """E[range] - 1 - sum_k P(T0 > k); zero under the range identity."""
        return self.e_range - 1 - sum(self.survival[k] for k in range(1, self.n + 1))


@dataclass
class ExactMdm:
    """Exact facts of the layered walk's transverse coordinate at horizon n."""

    n: int
    p_value: float
    e_range: Number                  # E[x_max - x_min + 1]
    survival: dict[int, Number]      # k -> P(first x-return > k)
    return_probs: dict[int, Number]  # even t -> P(M_t = (0, 0))
    mass: Number                     # total leaf weight; 1 if nothing leaked
    arithmetic: str
    leaves: int
    note: str = ""

    def identity_gap(self) -> Number:
        return self.e_range - 1 - sum(self.survival[k] for k in range(1, self.n + 1))


def _rationalize(x):
    """Exact Fraction for a parameter that encodes a simple rational,
    else None.  Fraction and int inputs pass through exactly.

    The denominator cap matters: any float is dyadic, and caps much past
    1e6 would "recover" junk fractions from irrational inputs.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    fr = Fraction(x).limit_denominator(10 ** 6)
    return fr if float(fr) == x else None


def _walk_support(walk: WalkDist):
    """(values, weights, den, rational) with probabilities weights/den."""
    if isinstance(walk, SimpleWalk):
        return [-1, 1], [1, 1], 2, True
    if isinstance(walk, LazyWalk):
        fr = _rationalize(walk.p)
        if fr is not None:
            a, b = fr.numerator, fr.denominator
            return [-1, 0, 1], [b - a, 2 * a, b - a], 2 * b, True
        h = (1.0 - walk.p) / 2.0
        return [-1, 0, 1], [h, walk.p, h], 1.0, False
    raise ValueError(f"enumeration needs a finite-support walk, got {walk!r}")


def _scenery_support(scenery):
    if isinstance(scenery, Rademacher):
        return [1, -1], [1, 1], 2, True
    if isinstance(scenery, Ternary):
        fr = _rationalize(scenery.q)
        if fr is not None:
            a, b = fr.numerator, fr.denominator
            return [0, 1, -1], [2 * a, b - a, b - a], 2 * b, True
        h = (1.0 - scenery.q) / 2.0
        return [0, 1, -1], [scenery.q, h, h], 1.0, False
    raise ValueError(f"enumeration needs a finite-support scenery, got {scenery!r}")


def _survival_from_counts(t0_counts: list, n: int, conv) -> dict[int, Number]:
    """t0_counts[k] = mass of first return exactly at k, [n+1] = none by n."""
    suffix = [0] * (n + 3)
    for k in range(n + 1, 0, -1):
        suffix[k] = suffix[k + 1] + t0_counts[k]
    return {k: conv(suffix[k + 1]) for k in range(1, n + 1)}


def exact_rwrs(n: int, walk: WalkDist, scenery, budget: int = DEFAULT_BUDGET) -> ExactRwrs:
    """Exact E[range], survival function of T0, and E[V_n] at horizon n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    wvals, wwts, wden, wrat = _walk_support(walk)
    svals, swts, sden, srat = _scenery_support(scenery)
    rational = wrat and srat
    if len(wvals) ** n > budget:
        raise BudgetExceededError(f"{len(wvals)}^{n} walk paths exceed budget {budget:g}")

    # accumulators over integer (or float) weights; denominator wden^n * sden^n
    range_sum = 0
    v_sum = 0
    mass_sum = 0
    t0_counts = [0] * (n + 2)  # index n+1 = no return within horizon
    leaves = 0
    nodes = 0

    scen_map: dict[int, int] = {}
    local_times: dict[int, int] = {}
    z_mult: dict = {0: 1}

    def descend(t, site, z, wprod, sprod, t0):
        nonlocal range_sum, v_sum, mass_sum, leaves, nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceededError(f"enumeration passed {budget:g} nodes at horizon {n}")
        if t == n:
            # unvisited-site branches contribute a full factor sden each
            weight = wprod * sprod * sden ** (n - len(scen_map))
            leaves += 1
            mass_sum += weight
            range_sum += weight * len(z_mult)
            v_sum += weight * sum(c * c for c in local_times.values())
            t0_counts[t0 if t0 else n + 1] += weight
            return
        step = t + 1
        for wv, ww in zip(wvals, wwts):
            nsite = site + wv
            wp = wprod * ww
            known = scen_map.get(nsite)
            if known is not None:
                _advance(step, nsite, z + known, wp, sprod, t0)
            else:
                for sv, sw in zip(svals, swts):
                    scen_map[nsite] = sv
                    _advance(step, nsite, z + sv, wp, sprod * sw, t0)
                    del scen_map[nsite]

    def _advance(step, nsite, nz, wp, sp, t0):
        local_times[nsite] = local_times.get(nsite, 0) + 1
        z_mult[nz] = z_mult.get(nz, 0) + 1
        nt0 = t0 if t0 else (step if nz == 0 else 0)
        descend(step, nsite, nz, wp, sp, nt0)
        if z_mult[nz] == 1:
            del z_mult[nz]
        else:
            z_mult[nz] -= 1
        if local_times[nsite] == 1:
            del local_times[nsite]
        else:
            local_times[nsite] -= 1

    descend(0, 0, 0, 1 if rational else 1.0, 1 if rational else 1.0, 0)

    denom = (wden ** n) * (sden ** n)
    conv = (lambda s: Fraction(s, denom)) if rational else (lambda s: s / denom)
    return ExactRwrs(
        n=n,
        e_range=conv(range_sum),
        survival=_survival_from_counts(t0_counts, n, conv),
        e_v=conv(v_sum),
        mass=conv(mass_sum),
        arithmetic="rational" if rational else "float64",
        leaves=leaves,
        note="" if rational else "parameters not exactly rational; float64 sums",
    )


def exact_mdm(n: int, p: float, budget: int = DEFAULT_BUDGET) -> ExactMdm:
    """Exact transverse-range mean, first-return survival, and even-time
    origin-return probabilities of the layered walk."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    fr = _rationalize(p)
    rational = fr is not None
    if rational:
        a, b = fr.numerator, fr.denominator
        move_wts = [2 * a, b - a, b - a]   # H, U, D over denominator 2b
        mden = 2 * b
    else:
        move_wts = [p, (1.0 - p) / 2.0, (1.0 - p) / 2.0]
        mden = 1.0
    # rational mode: per-line orientation halves live in the 2^n denominator;
    # float mode: each orientation branch carries its 1/2 explicitly
    orient_w = 1 if rational else 0.5
    if 3 ** n > budget:
        raise BudgetExceededError(f"3^{n} move sequences exceed budget {budget:g}")

    range_sum = 0
    mass_sum = 0
    t0_counts = [0] * (n + 2)
    origin_counts = {t: 0 for t in range(2, n + 1, 2)}
    leaves = 0
    nodes = 0
    env: dict[int, int] = {}

    def descend(t, x, y, xmax, xmin, wprod, t0, origin_times):
        nonlocal range_sum, mass_sum, leaves, nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceededError(f"enumeration passed {budget:g} nodes at horizon {n}")
        if t == n:
            weight = wprod * (2 ** (n - len(env)) if rational else 1.0)
            leaves += 1
            mass_sum += weight
            range_sum += weight * (xmax - xmin + 1)
            t0_counts[t0 if t0 else n + 1] += weight
            for ot in origin_times:
                origin_counts[ot] += weight
            return
        step = t + 1
        # horizontal move: branch on the line orientation at first use
        known = env.get(y)
        if known is not None:
            _advance(step, x + known, y, xmax, xmin, wprod * move_wts[0], t0,
                     origin_times)
        else:
            for eps in (1, -1):
                env[y] = eps
                _advance(step, x + eps, y, xmax, xmin,
                         wprod * move_wts[0] * orient_w, t0, origin_times)
                del env[y]
        # vertical moves
        _advance(step, x, y + 1, xmax, xmin, wprod * move_wts[1], t0, origin_times)
        _advance(step, x, y - 1, xmax, xmin, wprod * move_wts[2], t0, origin_times)

    def _advance(step, nx, ny, xmax, xmin, wp, t0, origin_times):
        nxmax = nx if nx > xmax else xmax
        nxmin = nx if nx < xmin else xmin
        nt0 = t0 if t0 else (step if nx == 0 else 0)
        if nx == 0 and ny == 0 and step % 2 == 0:
            origin_times = origin_times + (step,)
        descend(step, nx, ny, nxmax, nxmin, wp, nt0, origin_times)

    descend(0, 0, 0, 0, 0, 1 if rational else 1.0, 0, ())

    if rational:
        denom = (mden ** n) * (2 ** n)
        conv = lambda s: Fraction(s, denom)
    else:
        denom = mden ** n
        conv = lambda s: s / denom
    return ExactMdm(
        n=n,
        p_value=p,
        e_range=conv(range_sum),
        survival=_survival_from_counts(t0_counts, n, conv),
        return_probs={t: conv(c) for t, c in origin_counts.items()},
        mass=conv(mass_sum),
        arithmetic="rational" if rational else "float64",
        leaves=leaves,
        note="" if rational else "p not exactly rational; float64 sums",
    )


# ---------- return-probability convolution ----------


@dataclass
class ReturnProbTable:
    """P(S_k = 0) for k = 0..n_max and the induced E[V_n] table."""

    n_max: int
    p0: np.ndarray          # float64, index k
    e_v: np.ndarray         # float64, index n
    period: int
    arithmetic: str = "float64"
    note: str = "iterated convolution in float64"


def exact_return_probs(walk: WalkDist, n_max: int) -> ReturnProbTable:
    """Distribution-at-zero table by iterated convolution over the
    reachable window, plus E[V_n] = n + 2 sum_{k<n} (n-k) P(S_k = 0)."""
    if not 1 <= n_max <= DP_LIMIT:
        raise ValueError(f"n_max must be in [1, {DP_LIMIT}]")
    wvals, wwts, wden, _ = _walk_support(walk)
    probs = np.asarray([w / wden for w in wwts], dtype=np.float64)
    width = 2 * n_max + 1
    dist = np.zeros(width, dtype=np.float64)
    dist[n_max] = 1.0
    p0 = np.empty(n_max + 1, dtype=np.float64)
    p0[0] = 1.0
    nxt = np.empty_like(dist)
    for k in range(1, n_max + 1):
        nxt[:] = 0.0
        for v, pr in zip(wvals, probs):
            if v == 0:
                nxt += pr * dist
            elif v > 0:
                nxt[v:] += pr * dist[:-v]
            else:
                nxt[:v] += pr * dist[-v:]
        dist, nxt = nxt, dist
        p0[k] = dist[n_max]
    ns = np.arange(n_max + 1, dtype=np.float64)
    cum_p = np.cumsum(p0)            # sum_{k<=n} P(S_k = 0), includes k = 0
    cum_kp = np.cumsum(ns * p0)      # sum_{k<=n} k P(S_k = 0)
    e_v = np.empty(n_max + 1, dtype=np.float64)
    e_v[0] = 0.0
    for m in range(1, n_max + 1):
        inner = cum_p[m - 1] - 1.0   # drop k = 0
        inner_k = cum_kp[m - 1]
        e_v[m] = m + 2.0 * (m * inner - inner_k)
    period = getattr(walk, "period", 1)
    return ReturnProbTable(n_max=n_max, p0=p0, e_v=e_v, period=period)
