"""Command-line front end.

One executable, one subcommand per experiment.  Every run resolves its
configuration from defaults < config file < command line, echoes the
resolved config into the output directory, and writes CSV tables plus a
JSON summary (and a rendered figure where there is something to plot).
Outputs are pure functions of the resolved config, so reruns and different
thread counts produce byte-identical files.

Exit codes: 0 success / all PASS, 1 acceptance FAIL, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import _engine, acceptance, figures, reporting
from .estimators import (
    DEFAULT_GRID,
    MdmModel,
    RwrsModel,
    fluctuation_exponent,
    mean_range_identity_check,
    run_range_experiment,
    run_survival_experiment,
)
from .ks_limit import (
    KsGrid,
    estimate_kappa,
    extrapolate_sup,
    sup_ensemble,
    survival_amplitude,
)
from .mdm import MdmConfig, k_p, mdm_ensemble
from .oracle import BudgetExceededError, exact_mdm, exact_return_probs, exact_rwrs
from .samplers import scenery_dist, walk_dist

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

SURVIVAL_TOL = 0.05
RANGE_TOL = 0.03
V_SLOPE_TOL = 0.02


def _grid_spec(text: str) -> list[int]:
    """Either comma-separated sizes or pow2:LO:HI for a dyadic ladder."""
    text = text.strip()
    if text.startswith("pow2:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad grid spec {text!r}, want pow2:LO:HI")
        lo, hi = int(parts[1]), int(parts[2])
        if not 0 <= lo <= hi <= 30:
            raise ValueError(f"bad pow2 bounds in {text!r}")
        return [1 << k for k in range(lo, hi + 1)]
    vals = [int(v) for v in text.split(",") if v.strip()]
    if not vals or any(v < 1 for v in vals):
        raise ValueError(f"bad grid spec {text!r}")
    return vals


# ---------- config resolution ----------

# (flag, config key, type, default) per scope; None default means required
_RUN_KEYS = {
    "seed": (int, 1),
    "replicas": (int, None),  # per-command default applied later
    "threads": (int, 0),      # 0 = use all available
    "out": (str, None),
}

_MODEL_KEYS = {
    "model": (str, "rwrs"),
    "walk": (str, "simple"),
    "walk_p": (float, 1.0 / 3.0),
    "walk_alpha": (float, 1.5),
    "scenery": (str, "rademacher"),
    "scenery_q": (float, 0.25),
    "scenery_beta": (float, 0.5),
    "scenery_sigma": (float, 1.0),
    "p": (float, 1.0 / 3.0),
    "quenched": (bool, False),
}


def _coerce(value: str, typ):
    if typ is bool:
        v = value.strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"bad boolean {value!r}")
    return typ(value)


def _resolve(args: argparse.Namespace, command: str) -> dict:
    """defaults < config file < CLI flags, flattened into one dict."""
    cfg_sections: dict[str, dict] = {}
    if args.config:
        cfg_sections = reporting.read_config(args.config)
    merged: dict = {}
    schema = dict(_RUN_KEYS)
    schema.update(_MODEL_KEYS)
    extra = getattr(args, "_extra_keys", {})
    schema.update(extra)
    for key, (typ, default) in schema.items():
        val = default
        for section in ("run", "model", command):
            if section in cfg_sections and key in cfg_sections[section]:
                val = _coerce(cfg_sections[section][key], typ)
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            val = cli_val
        merged[key] = val
    if merged.get("replicas") is not None and merged["replicas"] < 2:
        # error bars need ddof=1; catch this before any kernel runs
        raise ValueError(f"replicas must be >= 2, got {merged['replicas']}")
    return merged


def _build_model(cfg: dict):
    if cfg["model"] == "rwrs":
        wk = cfg["walk"]
        walk = walk_dist(wk, p=cfg["walk_p"], alpha=cfg["walk_alpha"])
        sk = cfg["scenery"]
        scen = scenery_dist(sk, q=cfg["scenery_q"], beta=cfg["scenery_beta"],
                            sigma=cfg["scenery_sigma"])
        return RwrsModel(walk, scen)
    if cfg["model"] == "mdm":
        return MdmModel(p=cfg["p"], quenched=cfg["quenched"])
    raise ValueError(f"unknown model {cfg['model']!r}")


def _echo(cfg: dict, command: str, outdir: str, extras: dict | None = None):
    os.makedirs(outdir, exist_ok=True)
    sections = {
        "run": {k: cfg[k] for k in _RUN_KEYS},
        "model": {k: cfg[k] for k in _MODEL_KEYS},
    }
    if extras:
        sections[command] = extras
    sections["run"]["command"] = command
    reporting.echo_config(os.path.join(outdir, "config.ini"), sections)


def _apply_threads(cfg: dict) -> None:
    _engine.apply_threads(cfg["threads"] if cfg["threads"] > 0 else None)


# ---------- subcommands ----------


def cmd_simulate(args) -> int:
    cfg = _resolve(args, "simulate")
    cfg.setdefault("replicas", 1024)
    if cfg["replicas"] is None:
        cfg["replicas"] = 1024
    n = args.n
    outdir = cfg["out"] or "runs/simulate"
    mode = args.mode
    per_replica = bool(args.per_replica)
    _echo(cfg, "simulate", outdir,
          {"n": n, "mode": mode, "per_replica": per_replica})
    _apply_threads(cfg)
    model = _build_model(cfg)
    summary: dict = {"command": "simulate", "model": model.label, "n": n,
                     "seed": cfg["seed"], "replicas": cfg["replicas"], "mode": mode}

    if mode in ("mc", "both"):
        ck = np.array([n], dtype=np.int64)
        reps = cfg["replicas"]
        if isinstance(model, MdmModel):
            if per_replica:
                xmax, xmin, t0, origin = _engine.mdm_curve(
                    cfg["seed"], reps, ck, model.p, quenched=model.quenched)
                rows = []
                for r in range(reps):
                    censored = not 0 < t0[r] <= n
                    rows.append([r, n, int(xmax[r, 0]), int(xmin[r, 0]),
                                 int(xmax[r, 0] - xmin[r, 0] + 1),
                                 int(censored),
                                 "" if censored else int(t0[r]),
                                 int(origin[r, 0])])
                header = ["replica", "n", "x_max", "x_min", "range1",
                          "censored", "t0", "origin_2n"]
                reporting.write_csv(os.path.join(outdir, "replicas.csv"),
                                    header, rows)
                rng = xmax[:, 0] - xmin[:, 0] + 1.0
                surv = np.logical_or(t0 == 0, t0 > n).astype(np.float64)
                summary["mean_range1"] = float(rng.mean())
                summary["range1_stderr"] = float(rng.std(ddof=1) / np.sqrt(len(rng)))
                summary["survival"] = float(surv.mean())
                summary["survival_stderr"] = float(
                    np.sqrt(surv.mean() * (1 - surv.mean()) / len(surv)))
            else:
                row = mdm_ensemble(model.p, [n], reps, cfg["seed"],
                                   quenched=model.quenched).rows[0]
                reporting.write_csv(
                    os.path.join(outdir, "ensemble.csv"),
                    ["n", "survival", "survival_stderr", "mean_range1",
                     "range1_stderr", "full_range_over_n", "full_range_stderr",
                     "return_freq", "return_stderr", "replicas"],
                    [[row.n, row.survival, row.survival_stderr, row.mean_range1,
                      row.range1_stderr, row.full_range_over_n,
                      row.full_range_stderr, row.return_freq, row.return_stderr,
                      row.replicas]])
                summary["mean_range1"] = row.mean_range1
                summary["range1_stderr"] = row.range1_stderr
                summary["survival"] = row.survival
                summary["survival_stderr"] = row.survival_stderr
                summary["full_range_over_n"] = row.full_range_over_n
                summary["return_freq"] = row.return_freq
        else:
            walk, scen = model.walk, model.scenery
            if not scen.integer_valued:
                zmax, zmin, zfin = _engine.rwrs_curve_real(
                    cfg["seed"], reps, ck, walk, scen)
                rows = [[r, n, float(zmax[r, 0]), float(zmin[r, 0]), float(zfin[r])]
                        for r in range(reps)]
                header = ["replica", "n", "z_max", "z_min", "z_final"]
                summary["mean_width"] = float((zmax[:, 0] - zmin[:, 0]).mean())
            else:
                zmax, zmin, t0, zfin = _engine.rwrs_curve(
                    cfg["seed"], reps, ck, walk, scen)
                rng_counts = np.empty(reps, dtype=np.int64)
                done = 0
                batch = max(1, (1 << 22) // (n + 1))  # bound the path scratch
                while done < reps:
                    b = min(batch, reps - done)
                    counts, _ = _engine.rwrs_pairs(cfg["seed"], b, n, walk, scen,
                                                   rep0=done)
                    rng_counts[done:done + b] = counts
                    done += b
                rows = []
                for r in range(reps):
                    censored = not 0 < t0[r] <= n
                    rows.append([r, n, int(rng_counts[r]), int(censored),
                                 "" if censored else int(t0[r]),
                                 int(zmax[r, 0]), int(zmin[r, 0]), int(zfin[r])])
                header = ["replica", "n", "range", "censored", "t0",
                          "z_max", "z_min", "z_final"]
                summary["mean_range"] = float(rng_counts.mean())
                summary["range_stderr"] = float(
                    rng_counts.std(ddof=1) / np.sqrt(reps))
                surv = np.logical_or(t0 == 0, t0 > n).astype(np.float64)
                summary["survival"] = float(surv.mean())
            if per_replica:
                reporting.write_csv(os.path.join(outdir, "replicas.csv"),
                                    header, rows)
            else:
                cols = list(zip(*rows)) if rows else []
                ens_rows = []
                for name, col in zip(header[2:], cols[2:]):
                    vals = np.array([c for c in col if c != ""], dtype=np.float64)
                    if len(vals):
                        ens_rows.append([name, float(vals.mean()),
                                         float(vals.std(ddof=1) / np.sqrt(len(vals))),
                                         len(vals)])
                reporting.write_csv(os.path.join(outdir, "ensemble.csv"),
                                    ["column", "mean", "stderr", "count"], ens_rows)

    if mode in ("oracle", "both"):
        try:
            if isinstance(model, MdmModel):
                ex = exact_mdm(n, model.p)
                extra = [["return_prob", t, v] for t, v in ex.return_probs.items()]
            else:
                ex = exact_rwrs(n, model.walk, model.scenery)
                extra = [["e_v", n, ex.e_v]]
            ex_rows = [["e_range", n, ex.e_range]]
            ex_rows += [["survival", k, v] for k, v in ex.survival.items()]
            ex_rows += extra + [["mass", n, ex.mass]]
            reporting.write_csv(
                os.path.join(outdir, "exact.csv"),
                ["quantity", "index", "value", "stderr", "provenance"],
                [[q, i, v, 0, "exact"] for q, i, v in ex_rows])
            summary["oracle_arithmetic"] = ex.arithmetic
            summary["oracle_e_range"] = float(ex.e_range)
        except BudgetExceededError as exc:
            raise ValueError(str(exc)) from exc

    reporting.write_summary(os.path.join(outdir, "summary.json"), summary)
    print(f"simulate: wrote {outdir}")
    return EXIT_OK


def cmd_survival(args) -> int:
    cfg = _resolve(args, "survival")
    if cfg["replicas"] is None:
        cfg["replicas"] = 1 << 16
    grid = _grid_spec(args.grid) if args.grid else list(DEFAULT_GRID)
    outdir = cfg["out"] or "runs/survival"
    _echo(cfg, "survival", outdir,
          {"grid": ",".join(map(str, grid)), "fit_min": args.fit_min or ""})
    _apply_threads(cfg)
    model = _build_model(cfg)
    res = run_survival_experiment(model, grid=grid, replicas=cfg["replicas"],
                                  seed=cfg["seed"], fit_n_min=args.fit_min)
    header, rows = res.table()
    reporting.write_csv(os.path.join(outdir, "table.csv"), header, rows)
    xs = [e.n for e in res.estimates]
    ys = [e.value for e in res.estimates]
    es = [e.stderr for e in res.estimates]
    reporting.write_plot_data(os.path.join(outdir, "plot_data.csv"), xs, ys, es)
    fit = res.fit
    summary = {
        "command": "survival",
        "model": res.model_label,
        "seed": res.seed,
        "replicas": res.replicas,
        "expected_exponent": res.expected_exponent,
        "exponent": fit.exponent if fit else None,
        "exponent_stderr": fit.exponent_stderr if fit else None,
        "exponent_ci95": [fit.exponent - 1.96 * fit.exponent_stderr,
                          fit.exponent + 1.96 * fit.exponent_stderr] if fit else None,
        "amplitude": res.amplitude,
        "amplitude_stderr": res.amplitude_stderr,
        "fit_window": [fit.n_lo, fit.n_hi] if fit else None,
        "r_squared": fit.r_squared if fit else None,
        "uncensored_tail": res.uncensored_tail,
        "exponent_matches_expected": bool(
            fit and abs(fit.exponent - res.expected_exponent) <= SURVIVAL_TOL),
        "warnings": res.warnings,
    }
    if res.logfit is not None:
        summary["log_corrected_fit"] = {
            "exponent": res.logfit.exponent, "log_power": res.logfit.log_power}
    reporting.write_summary(os.path.join(outdir, "summary.json"), summary)
    figures.survival_figure(res, os.path.join(outdir, "survival.png"))
    if fit is None:
        print(f"survival: {res.model_label} no fit "
              f"({'; '.join(res.warnings)}) -> wrote {outdir}")
        return EXIT_FAIL
    print(f"survival: {res.model_label} exponent "
          f"{fit.exponent:+.4f} +- {fit.exponent_stderr:.4f} "
          f"(expected {res.expected_exponent:+.2f}) -> wrote {outdir}")
    return EXIT_OK if summary["exponent_matches_expected"] else EXIT_FAIL


def cmd_range(args) -> int:
    cfg = _resolve(args, "range")
    if cfg["replicas"] is None:
        cfg["replicas"] = 1 << 13
    grid = _grid_spec(args.grid) if args.grid else list(DEFAULT_GRID)
    outdir = cfg["out"] or "runs/range"
    _echo(cfg, "range", outdir,
          {"grid": ",".join(map(str, grid)),
           "distinct_replicas": args.distinct_replicas or ""})
    _apply_threads(cfg)
    model = _build_model(cfg)
    res = run_range_experiment(model, grid=grid, replicas=cfg["replicas"],
                               seed=cfg["seed"], fit_n_min=args.fit_min,
                               distinct_replicas=args.distinct_replicas)
    header, rows = res.table()
    reporting.write_csv(os.path.join(outdir, "table.csv"), header, rows)
    xs = [e.n for e in res.estimates]
    ys = [e.value for e in res.estimates]
    es = [e.stderr for e in res.estimates]
    reporting.write_plot_data(os.path.join(outdir, "plot_data.csv"), xs, ys, es)
    fit = res.fit
    summary = {
        "command": "range",
        "model": res.model_label,
        "seed": res.seed,
        "replicas": res.replicas,
        "expected_exponent": res.expected_exponent,
        "exponent": fit.exponent if fit else None,
        "exponent_stderr": fit.exponent_stderr if fit else None,
        "fit_window": [fit.n_lo, fit.n_hi] if fit else None,
        "r_squared": fit.r_squared if fit else None,
        "ratio_at_max": res.ratios[-1].value,
        "ratio_at_max_stderr": res.ratios[-1].stderr,
        "ratio_quantiles": res.quantiles,
        "fluctuation_exponent": (
            fluctuation_exponent(model.alpha)
            if isinstance(model, RwrsModel) else None),
        "exponent_matches_expected": bool(
            fit and abs(fit.exponent - res.expected_exponent) <= RANGE_TOL),
        "warnings": res.warnings,
    }
    reporting.write_summary(os.path.join(outdir, "summary.json"), summary)
    figures.range_figure(res, os.path.join(outdir, "range.png"))
    if fit is None:
        print(f"range: {res.model_label} no fit "
              f"({'; '.join(res.warnings)}) -> wrote {outdir}")
        return EXIT_FAIL
    print(f"range: {res.model_label} exponent "
          f"{fit.exponent:+.4f} +- {fit.exponent_stderr:.4f} "
          f"(expected {res.expected_exponent:+.2f}) -> wrote {outdir}")
    return EXIT_OK if summary["exponent_matches_expected"] else EXIT_FAIL


def cmd_ks(args) -> int:
    cfg = _resolve(args, "ks")
    if cfg["replicas"] is None:
        cfg["replicas"] = 1 << 12
    m_list = _grid_spec(args.m_list) if args.m_list else [1024, 4096, 16384]
    estimators = (["normalized-rwrs", "direct-grid"]
                  if args.estimator == "both" else [args.estimator])
    outdir = cfg["out"] or "runs/ks"
    _echo(cfg, "ks", outdir,
          {"m_list": ",".join(map(str, m_list)), "estimator": args.estimator,
           "alpha": args.alpha, "beta": args.beta})
    _apply_threads(cfg)
    rows = []
    summary: dict = {"command": "ks", "alpha": args.alpha, "beta": args.beta,
                     "seed": cfg["seed"], "replicas": cfg["replicas"]}
    primary_ext = None
    for est_name in estimators:
        ests = []
        for m in m_list:
            grid = KsGrid(m=m, alpha=args.alpha, beta=args.beta)
            e = sup_ensemble(grid, cfg["replicas"], cfg["seed"], estimator=est_name)
            ests.append(e)
            rows.append([est_name, e.m, e.replicas, e.sup_mean, e.sup_stderr,
                         e.width_mean, e.width_stderr])
        if len(ests) >= 3:
            ext = extrapolate_sup(ests)
            rows.append([est_name + ":extrapolated", ext.m, ext.replicas,
                         ext.sup_mean, ext.sup_stderr,
                         ext.width_mean, ext.width_stderr])
            summary[est_name.replace("-", "_")] = {
                "sup_mean": ext.sup_mean, "sup_stderr": ext.sup_stderr,
                "note": ext.note}
            if primary_ext is None:
                primary_ext = ext
                figures.sup_figure(ests, ext, os.path.join(outdir, "sup.png"))
    header = ["estimator_id", "m", "replicas", "sup_mean", "sup_stderr",
              "supminf_mean", "supminf_stderr"]
    reporting.write_csv(os.path.join(outdir, "table.csv"), header, rows)
    xs = [r[1] for r in rows if ":" not in str(r[0])]
    ys = [r[3] for r in rows if ":" not in str(r[0])]
    es = [r[4] for r in rows if ":" not in str(r[0])]
    reporting.write_plot_data(os.path.join(outdir, "plot_data.csv"), xs, ys, es)
    if primary_ext is not None and args.alpha == 2.0 and args.beta == 2.0:
        summary["kappa_hat"] = estimate_kappa(primary_ext.sup_mean)
        summary["kappa_hat_stderr"] = estimate_kappa(primary_ext.sup_stderr)
        summary["mdm_survival_amplitude_pred"] = survival_amplitude(
            1.0 / 3.0, primary_ext.sup_mean)
    reporting.write_summary(os.path.join(outdir, "summary.json"), summary)
    if "kappa_hat" in summary:
        print(f"ks: kappa_hat = {summary['kappa_hat']:.5f} "
              f"+- {summary['kappa_hat_stderr']:.5f} -> wrote {outdir}")
    else:
        print(f"ks: wrote {outdir}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _resolve(args, "oracle")
    n = args.n
    outdir = cfg["out"] or "runs/oracle"
    _echo(cfg, "oracle", outdir, {"n": n, "dp_nmax": args.dp_nmax or ""})
    model = _build_model(cfg)
    rows = []
    summary: dict = {"command": "oracle", "model": model.label, "n": n}
    try:
        if isinstance(model, MdmModel):
            ex = exact_mdm(n, model.p)
            rows.append(["e_range", n, ex.e_range, 0, "exact"])
            rows += [["survival", k, v, 0, "exact"] for k, v in ex.survival.items()]
            rows += [["return_prob", t, v, 0, "exact"]
                     for t, v in ex.return_probs.items()]
            rows.append(["mass", n, ex.mass, 0, "exact"])
        else:
            ex = exact_rwrs(n, model.walk, model.scenery)
            rows.append(["e_range", n, ex.e_range, 0, "exact"])
            rows += [["survival", k, v, 0, "exact"] for k, v in ex.survival.items()]
            rows.append(["e_v", n, ex.e_v, 0, "exact"])
            rows.append(["mass", n, ex.mass, 0, "exact"])
        summary["arithmetic"] = ex.arithmetic
        summary["leaves"] = ex.leaves
        summary["e_range"] = float(ex.e_range)
        summary["identity_gap"] = float(ex.identity_gap())
        if args.dp_nmax:
            if isinstance(model, MdmModel):
                raise ValueError("dp tables need a walk model, not mdm")
            table = exact_return_probs(model.walk, args.dp_nmax)
            dp_rows = [[k, table.p0[k], table.e_v[k]]
                       for k in range(args.dp_nmax + 1)]
            reporting.write_csv(os.path.join(outdir, "dp_table.csv"),
                                ["k", "p_return", "e_v"], dp_rows)
            summary["dp_nmax"] = args.dp_nmax
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    reporting.write_csv(os.path.join(outdir, "exact.csv"),
                        ["quantity", "index", "value", "stderr", "provenance"],
                        rows)
    reporting.write_summary(os.path.join(outdir, "summary.json"), summary)
    print(f"oracle: {model.label} n={n} E[range]={float(ex.e_range):.6f} "
          f"({ex.arithmetic}) -> wrote {outdir}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _resolve(args, "verify")
    outdir = cfg["out"] or "runs/verify"
    wanted = None
    if args.criteria:
        wanted = sorted({int(c) for c in args.criteria.split(",")})
    _echo(cfg, "verify", outdir,
          {"criteria": args.criteria or "all", "fast": args.fast})
    _apply_threads(cfg)
    results = acceptance.run_all(seed=cfg["seed"], fast=args.fast, only=wanted)
    rows = [[r.cid, r.name, "PASS" if r.passed else "FAIL", r.detail]
            for r in results]
    reporting.write_csv(os.path.join(outdir, "acceptance.csv"),
                        ["criterion", "name", "status", "detail"], rows)
    reporting.write_summary(
        os.path.join(outdir, "summary.json"),
        {"command": "verify",
         "passed": sum(r.passed for r in results),
         "failed": sum(not r.passed for r in results),
         "criteria": {str(r.cid): {"name": r.name, "passed": r.passed,
                                   "detail": r.detail} for r in results}})
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] criterion {r.cid}: "
              f"{r.name} - {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# ---------- parser ----------


def _add_common(sp, default_replicas=None):
    sp.add_argument("--config", help="INI config file")
    sp.add_argument("--seed", type=int, default=None, help="master seed")
    sp.add_argument("--replicas", type=int, default=None,
                    help=f"independent replicas (default {default_replicas})")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker threads; 0 = all available")
    sp.add_argument("--out", default=None, help="output directory")


def _add_model(sp):
    sp.add_argument("--model", choices=["rwrs", "mdm"], default=None)
    sp.add_argument("--walk", choices=["simple", "lazy", "heavy"], default=None)
    sp.add_argument("--walk-p", dest="walk_p", type=float, default=None,
                    help="holding probability of the lazy walk")
    sp.add_argument("--walk-alpha", dest="walk_alpha", type=float, default=None,
                    help="tail index of the heavy-tailed walk")
    sp.add_argument("--scenery",
                    choices=["rademacher", "ternary", "zipf", "gaussian", "stable"],
                    default=None)
    sp.add_argument("--scenery-q", dest="scenery_q", type=float, default=None,
                    help="weight of 0 in the ternary scenery")
    sp.add_argument("--scenery-beta", dest="scenery_beta", type=float, default=None,
                    help="tail index of the zipf/stable scenery")
    sp.add_argument("--scenery-sigma", dest="scenery_sigma", type=float,
                    default=None, help="gaussian scenery scale")
    sp.add_argument("--p", type=float, default=None,
                    help="horizontal-move probability of the layered walk")
    sp.add_argument("--quenched", action="store_const", const=True, default=None,
                    help="share one layer environment across replicas")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="scenerywalk",
        description="Random walks in random scenery: simulation and scaling "
                    "experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="raw replica statistics at one horizon")
    _add_common(sp, 1024)
    _add_model(sp)
    sp.add_argument("--n", type=int, required=True, help="horizon (steps)")
    sp.add_argument("--mode", choices=["mc", "oracle", "both"], default="mc")
    sp.add_argument("--per-replica", action="store_true",
                    help="write one row per replica instead of the ensemble")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("survival", help="first-return survival curve and fit")
    _add_common(sp, 1 << 16)
    _add_model(sp)
    sp.add_argument("--grid", default=None,
                    help="horizons: comma list or pow2:LO:HI (default pow2:8:16)")
    sp.add_argument("--fit-min", dest="fit_min", type=int, default=None,
                    help="smallest n in the fit window")
    sp.set_defaults(func=cmd_survival)

    sp = sub.add_parser("range", help="mean range growth and normalization")
    _add_common(sp, 1 << 13)
    _add_model(sp)
    sp.add_argument("--grid", default=None)
    sp.add_argument("--fit-min", dest="fit_min", type=int, default=None)
    sp.add_argument("--distinct-replicas", dest="distinct_replicas", type=int,
                    default=None,
                    help="replicas for exact distinct-count passes")
    sp.set_defaults(func=cmd_range)

    sp = sub.add_parser("ks", help="running-sup of the continuum limit process")
    _add_common(sp, 1 << 12)
    sp.add_argument("--estimator",
                    choices=["normalized-rwrs", "direct-grid", "both"],
                    default="normalized-rwrs")
    sp.add_argument("--m-list", dest="m_list", default=None,
                    help="grid resolutions (geometric triple enables "
                         "extrapolation)")
    sp.add_argument("--alpha", type=float, default=2.0)
    sp.add_argument("--beta", type=float, default=2.0)
    sp.set_defaults(func=cmd_ks)

    sp = sub.add_parser("oracle", help="exact small-horizon tables")
    _add_common(sp)
    _add_model(sp)
    sp.add_argument("--n", type=int, default=8, help="enumeration horizon")
    sp.add_argument("--dp-nmax", dest="dp_nmax", type=int, default=None,
                    help="also write the return-probability table up to n_max")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    _add_common(sp)
    sp.add_argument("--criteria", default=None,
                    help="comma list of criterion numbers (default all)")
    sp.add_argument("--fast", action="store_true",
                    help="reduced budgets; for smoke testing only")
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
