"""Compiled hot loops.

Every kernel re-derives the same keyed counter streams as streams.py /
samplers.py, so a replica simulated here is bit-for-bit the replica the
pure-Python reference paths produce.  Replicas write only their own output
slots; reductions happen later in index order, which makes results
independent of the thread count.

Kind codes (kept in sync with samplers.py):
    walk:    0 simple, 1 lazy(p), 2 heavy tail (table)
    scenery: 0 rademacher, 1 ternary(q), 2 zipf (table), 3 gaussian(sigma),
             4 stable(beta, skew, scale)
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

U64 = np.uint64
MASK32 = U64(0xFFFFFFFF)
GOLDEN = U64(0x9E3779B97F4A7C15)
KEY_TWEAK = U64(0xD6E8FEB86659FD93)
C_MIX1 = U64(0xBF58476D1CE4E5B9)
C_MIX2 = U64(0x94D049BB133111EB)
S30 = U64(30)
S27 = U64(27)
S31 = U64(31)
S11 = U64(11)
U01 = 2.0 ** -53

ROLE_WALK = U64(1)
ROLE_SCENERY = U64(2)
ROLE_ENV = U64(3)
ROLE_AUX = U64(4)

WALK_SIMPLE = 0
WALK_LAZY = 1
WALK_HEAVY = 2

SCEN_RADEMACHER = 0
SCEN_TERNARY = 1
SCEN_ZIPF = 2
SCEN_GAUSSIAN = 3
SCEN_STABLE = 4


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> S30)) * C_MIX1
    z = (z ^ (z >> S27)) * C_MIX2
    return z ^ (z >> S31)


@njit(cache=True, inline="always")
def _keyed(key, counter):
    return _mix64(_mix64(counter * GOLDEN) ^ key)


@njit(cache=True, inline="always")
def _u01(key, counter):
    return np.float64(_keyed(key, counter) >> S11) * U01


@njit(cache=True, inline="always")
def _u01_open(key, counter):
    return np.float64((_keyed(key, counter) >> S11) + U64(1)) * U01


@njit(cache=True, inline="always")
def _stream_key(master, replica, role):
    k = _mix64(master ^ KEY_TWEAK)
    k = _mix64(k ^ (replica * GOLDEN))
    return _mix64(k ^ (role * GOLDEN))


@njit(cache=True, inline="always")
def _search_right(cdf, v):
    # first index with cdf[index] > v (np.searchsorted side="right")
    lo = 0
    hi = cdf.shape[0]
    while lo < hi:
        mid = (lo + hi) >> 1
        if cdf[mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True, inline="always")
def _tail_mag(index, cdf, tail_mass, table_size, value_cap, u):
    if u < cdf[cdf.shape[0] - 1]:
        return np.int64(_search_right(cdf, u) + 1)
    v = 1.0 - u
    if v <= 0.0:
        return value_cap
    k = np.int64(np.float64(table_size) * (tail_mass / v) ** (1.0 / index))
    if k < table_size + 1:
        k = table_size + 1
    if k > value_cap:
        k = value_cap
    return k


@njit(cache=True, inline="always")
def _signed_tail(index, cdf, tail_mass, table_size, value_cap, u):
    if u < 0.5:
        return _tail_mag(index, cdf, tail_mass, table_size, value_cap, 2.0 * u)
    return -_tail_mag(index, cdf, tail_mass, table_size, value_cap, 2.0 * u - 1.0)


@njit(cache=True, inline="always")
def _walk_inc(kind, p, tindex, cdf, tail_mass, table_size, value_cap, key, step):
    u = _u01(key, U64(step))
    if kind == WALK_SIMPLE:
        return np.int64(1) if u < 0.5 else np.int64(-1)
    if kind == WALK_LAZY:
        if u < p:
            return np.int64(0)
        return np.int64(1) if (u - p) < (1.0 - p) / 2.0 else np.int64(-1)
    return _signed_tail(tindex, cdf, tail_mass, table_size, value_cap, u)


@njit(cache=True, inline="always")
def _scen_int(kind, q, tindex, cdf, tail_mass, table_size, value_cap, key, site):
    u = _u01(key, U64(site))
    if kind == SCEN_RADEMACHER:
        return np.int64(1) if u < 0.5 else np.int64(-1)
    if kind == SCEN_TERNARY:
        if u < q:
            return np.int64(0)
        return np.int64(1) if (u - q) < (1.0 - q) / 2.0 else np.int64(-1)
    return _signed_tail(tindex, cdf, tail_mass, table_size, value_cap, u)


@njit(cache=True, inline="always")
def _cms(beta, skew, scale, u_raw, w_raw):
    u = math.pi * (u_raw - 0.5)
    w = -math.log(w_raw)
    if beta == 1.0:
        return scale * math.tan(u)
    if skew == 0.0:
        x = math.sin(beta * u) / math.cos(u) ** (1.0 / beta)
        x *= (math.cos(u - beta * u) / w) ** ((1.0 - beta) / beta)
        return scale * x
    t = skew * math.tan(math.pi * beta / 2.0)
    theta0 = math.atan(t) / beta
    pref = (1.0 + t * t) ** (1.0 / (2.0 * beta))
    x = math.sin(beta * (u + theta0)) / math.cos(u) ** (1.0 / beta)
    x *= (math.cos(u - beta * (u + theta0)) / w) ** ((1.0 - beta) / beta)
    return scale * pref * x


@njit(cache=True, inline="always")
def _scen_float(kind, p1, p2, p3, key, site):
    # two counters per site so one value needs one (u, w) pair
    if kind == SCEN_GAUSSIAN:
        u1 = _u01_open(key, U64(2 * site))
        u2 = _u01(key, U64(2 * site + 1))
        return p1 * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
    # stable: p1 = beta, p2 = skew, p3 = scale
    u = _u01(key, U64(2 * site))
    w = _u01_open(key, U64(2 * site + 1))
    return _cms(p1, p2, p3, u, w)


@njit(cache=True, inline="always")
def _env_sign(key, line):
    return np.int64(1) if _u01(key, U64(line)) < 0.5 else np.int64(-1)


# ---------- walk-only kernels ----------


@njit(cache=True, parallel=True)
def walk_paths(master, rep0, reps, n,
               wkind, wp, wting, wcdf, wtm, wts, wcap,
               pos_out):
    """positions[r, t] for t = 0..n, replicas rep0..rep0+reps-1."""
    for r in prange(reps):
        wkey = _stream_key(master, U64(rep0 + r), ROLE_WALK)
        pos = np.int64(0)
        pos_out[r, 0] = 0
        for t in range(1, n + 1):
            pos += _walk_inc(wkind, wp, wting, wcdf, wtm, wts, wcap, wkey, t)
            pos_out[r, t] = pos


@njit(cache=True, parallel=True)
def walk_final(master, rep0, reps, n,
               wkind, wp, wting, wcdf, wtm, wts, wcap,
               out):
    for r in prange(reps):
        wkey = _stream_key(master, U64(rep0 + r), ROLE_WALK)
        pos = np.int64(0)
        for t in range(1, n + 1):
            pos += _walk_inc(wkind, wp, wting, wcdf, wtm, wts, wcap, wkey, t)
        out[r] = pos


@njit(cache=True, parallel=True)
def walk_self_intersections(master, rep0, reps, n,
                            wkind, wp, wting, wcdf, wtm, wts, wcap,
                            v_out, scratch):
    """V_n = sum of squared local times, one value per replica.

    scratch is a preallocated (reps, n) int64 workspace holding the visited
    positions of steps 1..n; each replica sorts its own row.
    """
    for r in prange(reps):
        wkey = _stream_key(master, U64(rep0 + r), ROLE_WALK)
        pos = np.int64(0)
        for t in range(1, n + 1):
            pos += _walk_inc(wkind, wp, wting, wcdf, wtm, wts, wcap, wkey, t)
            scratch[r, t - 1] = pos
        row = scratch[r]
        row.sort()
        v = np.int64(0)
        run = np.int64(1)
        for i in range(1, n):
            if row[i] == row[i - 1]:
                run += 1
            else:
                v += run * run
                run = 1
        v += run * run
        v_out[r] = v


# ---------- scenery-walk kernels (integer scenery) ----------


@njit(cache=True, parallel=True)
def rwrs_survival_int(master, rep0, reps, horizon,
                      wkind, wp, wting, wcdf, wtm, wts, wcap,
                      skind, sq, sting, scdf, stm, sts, scap,
                      t0_out):
    """First return time of the scenery sum; 0 marks censored (> horizon)."""
    for r in prange(reps):
        rep = U64(rep0 + r)
        wkey = _stream_key(master, rep, ROLE_WALK)
        skey = _stream_key(master, rep, ROLE_SCENERY)
        pos = np.int64(0)
        z = np.int64(0)
        t0 = np.int64(0)
        for t in range(1, horizon + 1):
            pos += _walk_inc(wkind, wp, wting, wcdf, wtm, wts, wcap, wkey, t)
            z += _scen_int(skind, sq, sting, scdf, stm, sts, scap, skey, pos)
            if z == 0:
                t0 = t
                break
        t0_out[r] = t0


@njit(cache=True, parallel=True)
def rwrs_curve_int(master, rep0, reps, ckpts,
                   wkind, wp, wting, wcdf, wtm, wts, wcap,
                   skind, sq, sting, scdf, stm, sts, scap,
                   zmax_out, zmin_out, t0_out, zfinal_out):
    """Prefix extrema of Z at each checkpoint, plus first return and Z_n."""
    n_max = ckpts[ckpts.shape[0] - 1]
    n_ck = ckpts.shape[0]
    for r in prange(reps):
        rep = U64(rep0 + r)
        wkey = _stream_key(master, rep, ROLE_WALK)
        skey = _stream_key(master, rep, ROLE_SCENERY)
        pos = np.int64(0)
        z = np.int64(0)
        zmax = np.int64(0)
        zmin = np.int64(0)
        t0 = np.int64(0)
        ci = 0
        for t in range(1, n_max + 1):
            pos += _walk_inc(wkind, wp, wting, wcdf, wtm, wts, wcap, wkey, t)
            z += _scen_int(skind, sq, sting, scdf, stm, sts, scap, skey, pos)
            if z > zmax:
                zmax = z
            elif z < zmin:
                zmin = z
            if z == 0 and t0 == 0:
                t0 = t
            if t == ckpts[ci]:
                zmax_out[r, ci] = zmax
                zmin_out[r, ci] = zmin
                ci += 1
                if ci == n_ck:
                    break
        t0_out[r] = t0
        zfinal_out[r] = z


@njit(cache=True, parallel=True)
def rwrs_paths_int(master, rep0, reps, n,
                   wkind, wp, wting, wcdf, wtm, wts, wcap,
                   skind, sq, sting, scdf, stm, sts, scap,
                   z_out):
    """Z_0..Z_n per replica (integer scenery)."""
    for r in prange(reps):
        rep = U64(rep0 + r)
        wkey = _stream_key(master, rep, ROLE_WALK)
        skey = _stream_key(master, rep, ROLE_SCENERY)
        pos = np.int64(0)
        z = np.int64(0)
        z_out[r, 0] = 0
        for t in range(1, n + 1):
            pos += _walk_inc(wkind, wp, wting, wcdf, wtm, wts, wcap, wkey, t)
            z += _scen_int(skind, sq, sting, scdf, stm, sts, scap, skey, pos)
            z_out[r, t] = z


@njit(cache=True, parallel=True)
def rwrs_curve_float(master, rep0, reps, ckpts,
                     wkind, wp, wting, wcdf, wtm, wts, wcap,
                     skind, sp1, sp2, sp3,
                     zmax_out, zmin_out, zfinal_out):
    """Prefix extrema of the real-valued scenery sum (gaussian/stable)."""
    n_max = ckpts[ckpts.shape[0] - 1]
    n_ck = ckpts.shape[0]
    for r in prange(reps):
        rep = U64(rep0 + r)
        wkey = _stream_key(master, rep, ROLE_WALK)
        skey = _stream_key(master, rep, ROLE_SCENERY)
        pos = np.int64(0)
        z = 0.0
        zmax = 0.0
        zmin = 0.0
        ci = 0
        for t in range(1, n_max + 1):
            pos += _walk_inc(wkind, wp, wting, wcdf, wtm, wts, wcap, wkey, t)
            z += _scen_float(skind, sp1, sp2, sp3, skey, pos)
            if z > zmax:
                zmax = z
            elif z < zmin:
                zmin = z
            if t == ckpts[ci]:
                zmax_out[r, ci] = zmax
                zmin_out[r, ci] = zmin
                ci += 1
                if ci == n_ck:
                    break
        zfinal_out[r] = z


# ---------- layered-medium kernels ----------


@njit(cache=True, parallel=True)
def mdm_survival(master, rep0, reps, horizon, p, quenched, env_key0, t0_out):
    """First return of the transverse coordinate; 0 marks censored."""
    for r in prange(reps):
        rep = U64(rep0 + r)
        wkey = _stream_key(master, rep, ROLE_WALK)
        ekey = env_key0 if quenched else _stream_key(master, rep, ROLE_ENV)
        x = np.int64(0)
        y = np.int64(0)
        t0 = np.int64(0)
        half = (1.0 - p) / 2.0
        for t in range(1, horizon + 1):
            u = _u01(wkey, U64(t))
            if u < p:
                x += _env_sign(ekey, y)
            elif (u - p) < half:
                y += 1
            else:
                y -= 1
            if x == 0:
                t0 = t
                break
        t0_out[r] = t0


@njit(cache=True, parallel=True)
def mdm_curve(master, rep0, reps, ckpts, p, quenched, env_key0,
              xmax_out, xmin_out, t0_out, origin_out):
    """Prefix extrema of x at checkpoints, first x-return, and the
    at-(0,0) indicator sampled at time 2 * checkpoint."""
    n_max = ckpts[ckpts.shape[0] - 1]
    n_ck = ckpts.shape[0]
    for r in prange(reps):
        rep = U64(rep0 + r)
        wkey = _stream_key(master, rep, ROLE_WALK)
        ekey = env_key0 if quenched else _stream_key(master, rep, ROLE_ENV)
        x = np.int64(0)
        y = np.int64(0)
        xmax = np.int64(0)
        xmin = np.int64(0)
        t0 = np.int64(0)
        ci = 0
        oi = 0
        half = (1.0 - p) / 2.0
        for t in range(1, 2 * n_max + 1):
            u = _u01(wkey, U64(t))
            if u < p:
                x += _env_sign(ekey, y)
            elif (u - p) < half:
                y += 1
            else:
                y -= 1
            if ci < n_ck:
                if x > xmax:
                    xmax = x
                elif x < xmin:
                    xmin = x
                if x == 0 and t0 == 0 and t <= n_max:
                    t0 = t
                if t == ckpts[ci]:
                    xmax_out[r, ci] = xmax
                    xmin_out[r, ci] = xmin
                    ci += 1
            if oi < n_ck and t == 2 * ckpts[oi]:
                origin_out[r, oi] = 1 if (x == 0 and y == 0) else 0
                oi += 1
        t0_out[r] = t0


@njit(cache=True, parallel=True)
def mdm_paths(master, rep0, reps, n, p, quenched, env_key0, x_out, y_out):
    """Full coordinate paths M_0..M_n per replica."""
    for r in prange(reps):
        rep = U64(rep0 + r)
        wkey = _stream_key(master, rep, ROLE_WALK)
        ekey = env_key0 if quenched else _stream_key(master, rep, ROLE_ENV)
        x = np.int64(0)
        y = np.int64(0)
        x_out[r, 0] = 0
        y_out[r, 0] = 0
        half = (1.0 - p) / 2.0
        for t in range(1, n + 1):
            u = _u01(wkey, U64(t))
            if u < p:
                x += _env_sign(ekey, y)
            elif (u - p) < half:
                y += 1
            else:
                y -= 1
            x_out[r, t] = x
            y_out[r, t] = y


# ---------- limit-process kernels ----------


@njit(cache=True, parallel=True)
def ks_direct_grid(master, rep0, reps, m,
                   alpha, y_scale, beta, u_scale,
                   sup_out, inf_out):
    """Direct discretization of the limit process on an m-point time grid.

    Driver Y is simulated from exact stable increments over steps of size
    1/m; occupation is accumulated in spatial cells of width w = m^(-1/2);
    each cell carries an independent stable value for the integrator's
    increment over that cell.  One step contributes
        value(cell) * w^(1/beta) / (m * w)
    to the running integral (occupation time 1/m divided by cell width,
    times the integrator increment over the cell).
    """
    fm = np.float64(m)
    w = fm ** -0.5
    y_inc_scale = y_scale * fm ** (-1.0 / alpha)
    coef = w ** (1.0 / beta) / (fm * w)
    inv_w = 1.0 / w
    for r in prange(reps):
        rep = U64(rep0 + r)
        wkey = _stream_key(master, rep, ROLE_WALK)
        skey = _stream_key(master, rep, ROLE_SCENERY)
        ypos = 0.0
        acc = 0.0
        sup = 0.0
        inf = 0.0
        for t in range(1, m + 1):
            uy = _u01(wkey, U64(2 * t))
            wy = _u01_open(wkey, U64(2 * t + 1))
            ypos += y_inc_scale * _cms(alpha, 0.0, 1.0, uy, wy)
            cell = np.int64(math.floor(ypos * inv_w))
            us = _u01(skey, U64(2 * cell))
            ws = _u01_open(skey, U64(2 * cell + 1))
            acc += coef * u_scale * _cms(beta, 0.0, 1.0, us, ws)
            if acc > sup:
                sup = acc
            elif acc < inf:
                inf = acc
        sup_out[r] = sup
        inf_out[r] = inf


# ---------- invariant sweeps ----------


@njit(cache=True, parallel=True)
def rwrs_pair_stats(master, rep0, reps, n,
                    wkind, wp, wting, wcdf, wtm, wts, wcap,
                    skind, sq, sting, scdf, stm, sts, scap,
                    range_out, vz_out, scratch):
    """Distinct-count range of Z_0..Z_n and the pair count
    V = #{(i, j) in [1, n]^2 : Z_i = Z_j}, via a per-replica sort."""
    for r in prange(reps):
        rep = U64(rep0 + r)
        wkey = _stream_key(master, rep, ROLE_WALK)
        skey = _stream_key(master, rep, ROLE_SCENERY)
        pos = np.int64(0)
        z = np.int64(0)
        scratch[r, 0] = 0
        for t in range(1, n + 1):
            pos += _walk_inc(wkind, wp, wting, wcdf, wtm, wts, wcap, wkey, t)
            z += _scen_int(skind, sq, sting, scdf, stm, sts, scap, skey, pos)
            scratch[r, t] = z
        # pair count over indices 1..n
        row = scratch[r, 1:n + 1].copy()
        row.sort()
        v = np.int64(0)
        run = np.int64(1)
        for i in range(1, n):
            if row[i] == row[i - 1]:
                run += 1
            else:
                v += run * run
                run = 1
        v += run * run
        vz_out[r] = v
        # distinct count over indices 0..n
        full = scratch[r, 0:n + 1].copy()
        full.sort()
        distinct = np.int64(1)
        for i in range(1, n + 1):
            if full[i] != full[i - 1]:
                distinct += 1
        range_out[r] = distinct
