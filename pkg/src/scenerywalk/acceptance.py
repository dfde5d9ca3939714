"""Acceptance suite: the checks a release must pass, with pinned budgets.

Each criterion is a function returning a CriterionResult; `run_all` executes
a selection in order and reuses the expensive shared runs (the layered-walk
survival fit feeds both the exponent check and the constant chain; the
limit-process extrapolation feeds both the range ratio and the constant
chain).  Budgets are chosen so the full suite finishes in well under half
an hour on one machine while keeping every tolerance honest.
"""

from __future__ import annotations

import os
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import _engine
from .estimators import (
    MdmModel,
    RwrsModel,
    fit_power_law,
    mean_range_identity_check,
    run_range_experiment,
    run_survival_experiment,
)
from .ks_limit import KsGrid, estimate_kappa, extrapolate_sup, sup_ensemble
from .mdm import k_p
from .oracle import exact_mdm, exact_return_probs, exact_rwrs
from .samplers import LazyWalk, Rademacher, SimpleWalk, SymmetricZipf, Ternary

SURVIVAL_GRID = [1 << k for k in range(10, 17)]
RANGE_GRID = [1 << k for k in range(8, 17)]
KS_M_LIST = [1 << 10, 1 << 12, 1 << 14]

CALIBRATION_N = 8
CALIBRATION_REPLICAS = 1_000_000
IDENTITY_N = 64
IDENTITY_REPLICAS = 200_000
SURVIVAL_REPLICAS = 200_000
RANGE_REPLICAS = 1 << 13
KS_REPLICAS = 1 << 14
V_MC_REPLICAS = 1 << 15
TRANSIENT_REPLICAS = 384
INVARIANT_REPLICAS = 100_000


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    detail: str


class _Context:
    """Caches the shared expensive runs across criteria."""

    def __init__(self, seed: int, fast: bool):
        self.seed = seed
        self.fast = fast
        self._mdm_survival = None
        self._ks_ext = None

    def sub_seed(self, cid: int, j: int = 0) -> int:
        return self.seed * 1009 + cid * 101 + j

    def reps(self, full: int, floor: int = 64) -> int:
        return max(full // 10, floor) if self.fast else full

    def mdm_survival(self):
        if self._mdm_survival is None:
            self._mdm_survival = run_survival_experiment(
                MdmModel(p=1.0 / 3.0), grid=SURVIVAL_GRID,
                replicas=self.reps(SURVIVAL_REPLICAS),
                seed=self.sub_seed(3), fit_n_min=SURVIVAL_GRID[0])
        return self._mdm_survival

    def ks_extrapolated(self):
        if self._ks_ext is None:
            ests = [sup_ensemble(KsGrid(m=m), self.reps(KS_REPLICAS),
                                 self.sub_seed(5, j), estimator="normalized-rwrs")
                    for j, m in enumerate(KS_M_LIST)]
            self._ks_ext = extrapolate_sup(ests)
        return self._ks_ext


def _rwrs_models():
    return [
        ("simple+rademacher", SimpleWalk(), Rademacher()),
        ("simple+ternary", SimpleWalk(), Ternary(0.25)),
        ("lazy+rademacher", LazyWalk(1.0 / 3.0), Rademacher()),
        ("lazy+ternary", LazyWalk(1.0 / 3.0), Ternary(0.25)),
    ]


def criterion_1(ctx: _Context) -> CriterionResult:
    """MC at n = 8 within 4 stderr of exact enumeration, every model."""
    n = CALIBRATION_N
    reps = ctx.reps(CALIBRATION_REPLICAS)
    worst = (0.0, "")
    checks = 0

    def track(dev_se: float, label: str):
        nonlocal worst, checks
        checks += 1
        if dev_se > worst[0]:
            worst = (dev_se, label)

    for j, (label, walk, scen) in enumerate(_rwrs_models()):
        ex = exact_rwrs(n, walk, scen)
        zmax, zmin, t0, _ = _engine.rwrs_curve(ctx.sub_seed(1, j), reps, [n],
                                               walk, scen)
        rng = (zmax[:, 0] - zmin[:, 0] + 1).astype(np.float64)
        se = rng.std(ddof=1) / np.sqrt(reps)
        track(abs(rng.mean() - float(ex.e_range)) / se, f"{label} E[range]")
        for k in range(1, n + 1):
            phat = float(np.mean((t0 == 0) | (t0 > k)))
            pse = np.sqrt(max(phat * (1 - phat), 1e-12) / reps)
            track(abs(phat - float(ex.survival[k])) / pse,
                  f"{label} surv(k={k})")
        if j < 2:  # self-intersections depend on the walk only
            v = _engine.walk_v(ctx.sub_seed(1, 10 + j), 0, reps, n, walk)
            vf = v.astype(np.float64)
            vse = vf.std(ddof=1) / np.sqrt(reps)
            track(abs(vf.mean() - float(ex.e_v)) / vse, f"{label} E[V]")

    exm = exact_mdm(n, 1.0 / 3.0)
    xmax, xmin, t0, _ = _engine.mdm_curve(ctx.sub_seed(1, 20), reps, [n], 1.0 / 3.0)
    rng = (xmax[:, 0] - xmin[:, 0] + 1).astype(np.float64)
    se = rng.std(ddof=1) / np.sqrt(reps)
    track(abs(rng.mean() - float(exm.e_range)) / se, "mdm E[range1]")
    for k in range(1, n + 1):
        phat = float(np.mean((t0 == 0) | (t0 > k)))
        pse = np.sqrt(max(phat * (1 - phat), 1e-12) / reps)
        track(abs(phat - float(exm.survival[k])) / pse, f"mdm surv(k={k})")

    ok = worst[0] <= 4.0
    return CriterionResult(
        1, "oracle calibration", ok,
        f"{checks} estimates at n={n}, {reps} replicas; "
        f"max dev {worst[0]:.2f} se ({worst[1]})")


def criterion_2(ctx: _Context) -> CriterionResult:
    """Mean range = 1 + summed survival: exact at n=8, paired MC at n=64."""
    reps = ctx.reps(IDENTITY_REPLICAS)
    models = [RwrsModel(SimpleWalk(), Rademacher()), MdmModel(p=1.0 / 3.0)]
    parts = []
    ok = True
    for j, model in enumerate(models):
        orc = mean_range_identity_check(model, CALIBRATION_N, mode="oracle")
        mc = mean_range_identity_check(model, IDENTITY_N, replicas=reps,
                                       seed=ctx.sub_seed(2, j), mode="mc")
        ok = ok and orc.passed and mc.passed
        parts.append(f"{model.label}: exact gap {orc.diff:.1e}, "
                     f"mc |D|={abs(mc.diff):.4f} vs 3se={3 * mc.se_diff:.4f}")
    return CriterionResult(2, "range/return identity", ok, "; ".join(parts))


def criterion_3(ctx: _Context) -> CriterionResult:
    res = ctx.mdm_survival()
    fit = res.fit
    ok = fit is not None and abs(fit.exponent + 0.25) <= 0.05
    return CriterionResult(
        3, "layered-walk survival exponent", ok,
        f"exponent {fit.exponent:+.4f} +- {fit.exponent_stderr:.4f} "
        f"(target -0.25 +- 0.05), window [{fit.n_lo}, {fit.n_hi}], "
        f"{res.replicas} replicas")


def criterion_4(ctx: _Context) -> CriterionResult:
    reps = ctx.reps(SURVIVAL_REPLICAS)
    parts = []
    ok = True
    for j, walk in enumerate([SimpleWalk(), LazyWalk(1.0 / 3.0)]):
        res = run_survival_experiment(
            RwrsModel(walk, Rademacher()), grid=SURVIVAL_GRID, replicas=reps,
            seed=ctx.sub_seed(4, j), fit_n_min=SURVIVAL_GRID[0])
        good = res.fit is not None and abs(res.fit.exponent + 0.25) <= 0.05
        ok = ok and good
        parts.append(f"{res.model_label}: {res.fit.exponent:+.4f} "
                     f"+- {res.fit.exponent_stderr:.4f}")
    return CriterionResult(
        4, "scenery-sum survival exponent", ok,
        "; ".join(parts) + " (target -0.25 +- 0.05)")


def criterion_5(ctx: _Context) -> CriterionResult:
    res = run_range_experiment(
        RwrsModel(SimpleWalk(), Rademacher()), grid=RANGE_GRID,
        replicas=ctx.reps(RANGE_REPLICAS), seed=ctx.sub_seed(55))
    fit = res.fit
    slope_ok = fit is not None and abs(fit.exponent - 0.75) <= 0.03
    ext = ctx.ks_extrapolated()
    target = 2.0 * ext.sup_mean
    ratio = res.ratios[-1].value
    ratio_ok = abs(ratio - target) <= 0.10 * target
    return CriterionResult(
        5, "range growth scaling", slope_ok and ratio_ok,
        f"slope {fit.exponent:+.4f} +- {fit.exponent_stderr:.4f} "
        f"(target 0.75 +- 0.03); ratio at n=2^16 {ratio:.4f} vs "
        f"2*sup-estimate {target:.4f} "
        f"({100 * abs(ratio - target) / target:.1f}% off, allow 10%)")


def criterion_6(ctx: _Context) -> CriterionResult:
    res = ctx.mdm_survival()
    ext = ctx.ks_extrapolated()
    kappa_hat = estimate_kappa(ext.sup_mean)
    amp = res.amplitude
    amp_ok = abs(amp - kappa_hat) <= 0.15 * kappa_hat
    algebra_gap = abs(1.5 * k_p(1.0 / 3.0) - (3.0 / 32.0) ** 0.25)
    algebra_ok = algebra_gap <= 1e-14
    return CriterionResult(
        6, "layered-walk constant chain", amp_ok and algebra_ok,
        f"measured amplitude {amp:.4f} vs kappa_hat {kappa_hat:.4f} "
        f"({100 * abs(amp - kappa_hat) / kappa_hat:.1f}% off, allow 15%); "
        f"algebra gap {algebra_gap:.1e}")


def criterion_7(ctx: _Context) -> CriterionResult:
    table = exact_return_probs(SimpleWalk(), 1 << 14)
    ns = [1 << k for k in range(8, 15)]
    pts = [(n, table.e_v[n], 0.0) for n in ns]
    fit = fit_power_law(pts)
    slope_ok = abs(fit.exponent - 1.5) <= 0.02
    n_mc = 1 << 10
    reps = ctx.reps(V_MC_REPLICAS)
    v = _engine.walk_v(ctx.sub_seed(7), 0, reps, n_mc, SimpleWalk()).astype(np.float64)
    se = v.std(ddof=1) / np.sqrt(reps)
    dev = abs(v.mean() - table.e_v[n_mc]) / se
    mc_ok = dev <= 3.0
    return CriterionResult(
        7, "self-intersection growth", slope_ok and mc_ok,
        f"convolution slope {fit.exponent:.4f} (target 1.50 +- 0.02); "
        f"mc E[V] at n={n_mc}: dev {dev:.2f} se (allow 3)")


def _distinct_ratio_batch(seed: int, reps: int, model_kind: str) -> np.ndarray:
    """Per-replica (distinct count / n) at n = 2^15 and 2^16, shape (reps, 2)."""
    n = 1 << 16
    cks = [1 << 15, 1 << 16]
    out = np.empty((reps, 2), dtype=np.float64)
    if model_kind == "zipf":
        chunk = max(1, (1 << 23) // (n + 1))
        done = 0
        walk, scen = SimpleWalk(), SymmetricZipf(0.5)
        while done < reps:
            take = min(chunk, reps - done)
            z = _engine.rwrs_paths(seed, done, take, n, walk, scen)
            for i in range(take):
                c = _engine.distinct_prefix_counts(z[i], cks)
                out[done + i] = c / np.asarray(cks, dtype=np.float64)
            done += take
    else:  # full lattice range of the layered walk
        chunk = max(1, (1 << 22) // (n + 1))
        done = 0
        side = 2 * n + 1
        while done < reps:
            take = min(chunk, reps - done)
            xs, ys = _engine.mdm_paths(seed, done, take, n, 1.0 / 3.0)
            enc = (xs + n) * side + (ys + n)
            for i in range(take):
                c = _engine.distinct_prefix_counts(enc[i], cks)
                out[done + i] = c / np.asarray(cks, dtype=np.float64)
            done += take
    return out


def criterion_8(ctx: _Context) -> CriterionResult:
    reps = ctx.reps(TRANSIENT_REPLICAS, floor=32)
    parts = []
    ok = True
    for j, kind in enumerate(["zipf", "mdm"]):
        a = _distinct_ratio_batch(ctx.sub_seed(8, 2 * j), reps, kind)
        b = _distinct_ratio_batch(ctx.sub_seed(8, 2 * j + 1), reps, kind)
        both = np.vstack([a, b])
        m15, m16 = both[:, 0].mean(), both[:, 1].mean()
        drift = abs(m16 - m15) / m15
        se_a = a[:, 1].std(ddof=1) / np.sqrt(len(a))
        se_b = b[:, 1].std(ddof=1) / np.sqrt(len(b))
        gap = abs(a[:, 1].mean() - b[:, 1].mean())
        comb = np.hypot(se_a, se_b)
        good = drift < 0.02 and gap <= 3.0 * comb
        ok = ok and good
        parts.append(f"{kind}: ratio {m16:.4f}, drift {100 * drift:.2f}%, "
                     f"seed-batch gap {gap:.5f} vs 3se={3 * comb:.5f}")
    return CriterionResult(8, "transient-regime ratios", ok, "; ".join(parts))


def criterion_9(ctx: _Context) -> CriterionResult:
    reps = ctx.reps(INVARIANT_REPLICAS)
    n = 128
    violations = {}

    for label, walk, scen in [("rademacher", SimpleWalk(), Rademacher()),
                              ("ternary", LazyWalk(1.0 / 3.0), Ternary(0.25))]:
        seed = ctx.sub_seed(9, 0 if label == "rademacher" else 1)
        distinct, pairs = _engine.rwrs_pairs(seed, reps, n, walk, scen)
        zmax, zmin, _, _ = _engine.rwrs_curve(seed, reps, [n], walk, scen)
        width = zmax[:, 0] - zmin[:, 0] + 1
        violations[f"contiguous-range/{label}"] = int(np.sum(distinct != width))
        violations[f"pair-bound/{label}"] = int(
            np.sum(np.int64(n) * n > distinct * pairs))

    # layered walk: unit steps, and one orientation per line within a replica
    chunk = 8192
    nn_bad = 0
    orient_bad = 0
    done = 0
    while done < reps:
        take = min(chunk, reps - done)
        xs, ys = _engine.mdm_paths(ctx.sub_seed(9, 2), done, take, 64, 1.0 / 3.0)
        dx = np.diff(xs, axis=1)
        dy = np.diff(ys, axis=1)
        nn_bad += int(np.sum(np.abs(dx) + np.abs(dy) != 1))
        h = dx != 0
        rep_idx = np.broadcast_to(np.arange(take)[:, None], dx.shape)[h]
        line = ys[:, :-1][h]
        sgn = dx[h]
        order = np.lexsort((line, rep_idx))
        r_s, l_s, s_s = rep_idx[order], line[order], sgn[order]
        same_group = (r_s[1:] == r_s[:-1]) & (l_s[1:] == l_s[:-1])
        orient_bad += int(np.sum(same_group & (s_s[1:] != s_s[:-1])))
        done += take
    violations["unit-step"] = nn_bad
    violations["orientation-per-line"] = orient_bad

    # quenched mode: orientation consistent across replicas too
    xs, ys = _engine.mdm_paths(ctx.sub_seed(9, 3), 0, 4096, 64, 1.0 / 3.0,
                               quenched=True)
    dx = np.diff(xs, axis=1)
    h = dx != 0
    line = ys[:, :-1][h]
    sgn = dx[h]
    order = np.argsort(line, kind="stable")
    l_s, s_s = line[order], sgn[order]
    same = l_s[1:] == l_s[:-1]
    violations["quenched-orientation"] = int(np.sum(same & (s_s[1:] != s_s[:-1])))

    total = sum(violations.values())
    detail = ", ".join(f"{k}={v}" for k, v in violations.items())
    return CriterionResult(9, "per-trajectory invariants", total == 0,
                           f"{reps} replicas; violations: {detail}")


def criterion_10(ctx: _Context) -> CriterionResult:
    """Same config + seed, different thread counts: byte-identical outputs."""
    base_args = [sys.executable, "-m", "scenerywalk", "survival",
                 "--model", "rwrs", "--walk", "simple",
                 "--scenery", "rademacher", "--grid", "pow2:8:11",
                 "--replicas", "4096", "--seed", str(ctx.sub_seed(10))]
    tmp = tempfile.mkdtemp(prefix="sw-verify-")
    try:
        # all runs write to the same --out (so the echoed config is identical
        # byte for byte); the directory is set aside between runs
        outdir = os.path.join(tmp, "run")
        outs = []
        for tag, threads in [("t1", "1"), ("t4", "4"), ("t1b", "1")]:
            env = dict(os.environ, NUMBA_NUM_THREADS=threads)
            proc = subprocess.run(base_args + ["--out", outdir],
                                  capture_output=True, text=True, env=env)
            if proc.returncode != 0:
                return CriterionResult(
                    10, "thread-count determinism", False,
                    f"run {tag} exited {proc.returncode}: {proc.stderr[-200:]}")
            kept = os.path.join(tmp, tag)
            os.rename(outdir, kept)
            outs.append(kept)
        names = sorted(os.listdir(outs[0]))
        diffs = []
        for name in names:
            blobs = []
            for d in outs:
                with open(os.path.join(d, name), "rb") as fh:
                    blobs.append(fh.read())
            if not (blobs[0] == blobs[1] == blobs[2]):
                diffs.append(name)
        ok = not diffs
        detail = (f"{len(names)} files identical across thread counts 1/4 "
                  f"and a repeat run" if ok else f"files differ: {diffs}")
        return CriterionResult(10, "thread-count determinism", ok, detail)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_all(seed: int = 1, fast: bool = False, only=None) -> list[CriterionResult]:
    ctx = _Context(seed, fast)
    wanted = sorted(only) if only else sorted(CRITERIA)
    results = []
    for cid in wanted:
        if cid not in CRITERIA:
            raise ValueError(f"no criterion {cid}")
        results.append(CRITERIA[cid](ctx))
    return results
