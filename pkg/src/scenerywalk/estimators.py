"""Ensemble drivers and scaling-law fits.

Experiments run replicas through the compiled kernels, reduce in replica
order, and fit power laws by weighted least squares on log-log points with
weights 1 / (relative stderr)^2.  Survival curves come from one first-return
time per replica, censored at the grid maximum, so the curve is a proper
(monotone) empirical survival function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _engine
from .mdm import MdmConfig
from .rwrs import V_PATH_LIMIT, delta_exponent, norm_sequence
from .samplers import SceneryDist, WalkDist

DEFAULT_GRID = tuple(1 << k for k in range(8, 17))  # 2^8 .. 2^16, dyadic
FIT_DROP_OCTAVES = 2  # the fit window drops the lowest two grid octaves
MIN_FIT_POINTS = 4
R2_FLAG = 0.95


# ---------- model specs ----------


@dataclass(frozen=True)
class RwrsModel:
    """Scenery-sum model: a walk plus an i.i.d. scenery."""

    walk: WalkDist
    scenery: SceneryDist

    @property
    def label(self) -> str:
        return f"rwrs[{type(self.walk).__name__}/{type(self.scenery).__name__}]"

    @property
    def alpha(self) -> float:
        return self.walk.alpha_index

    @property
    def beta(self) -> float:
        return self.scenery.beta_index


@dataclass(frozen=True)
class MdmModel:
    """Layered-medium model with horizontal-step probability p."""

    p: float
    quenched: bool = False

    @property
    def label(self) -> str:
        tag = "quenched" if self.quenched else "annealed"
        return f"mdm[p={self.p:g},{tag}]"


Model = RwrsModel | MdmModel


# ---------- estimates and fits ----------


@dataclass
class EnsembleEstimate:
    """A labeled mean with its Monte Carlo standard error."""

    label: str
    n: int
    value: float
    stderr: float
    replicas: int

    def __post_init__(self):
        if self.replicas < 2:
            raise ValueError("an ensemble estimate needs at least 2 replicas")
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")


@dataclass
class PowerLawFit:
    """Weighted log-log fit value ~ amplitude * n^exponent."""

    exponent: float
    amplitude: float
    exponent_stderr: float
    n_lo: int
    n_hi: int
    r_squared: float
    poor_fit: bool
    points: int


def _as_fit_arrays(points):
    ns = np.asarray([p[0] for p in points], dtype=np.float64)
    vals = np.asarray([p[1] for p in points], dtype=np.float64)
    errs = np.asarray([p[2] for p in points], dtype=np.float64)
    return ns, vals, errs


def fit_power_law(points) -> PowerLawFit:
    """points: iterable of (n, value, stderr); values must be positive.

    With all-positive stderr the fit is weighted by 1/(stderr/value)^2 (the
    delta-method variance of log value); any zero stderr switches the whole
    fit to equal weights, which keeps exact (error-free) inputs exact.
    """
    ns, vals, errs = _as_fit_arrays(points)
    if ns.size < MIN_FIT_POINTS:
        raise ValueError(f"need at least {MIN_FIT_POINTS} points, got {ns.size}")
    if np.any(vals <= 0):
        raise ValueError("power-law fit needs positive values")
    if np.any(errs < 0):
        raise ValueError("negative stderr")
    x = np.log(ns)
    y = np.log(vals)
    weighted = bool(np.all(errs > 0))
    w = (vals / errs) ** 2 if weighted else np.ones_like(x)
    sw = np.sum(w)
    xbar = np.sum(w * x) / sw
    ybar = np.sum(w * y) / sw
    sxx = np.sum(w * (x - xbar) ** 2)
    slope = np.sum(w * (x - xbar) * (y - ybar)) / sxx
    intercept = ybar - slope * xbar
    resid = y - (intercept + slope * x)
    ss_res = np.sum(w * resid ** 2)
    ss_tot = np.sum(w * (y - ybar) ** 2)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    if weighted:
        slope_se = math.sqrt(1.0 / sxx)
    else:
        dof = max(ns.size - 2, 1)
        slope_se = math.sqrt(max(ss_res / dof, 0.0) / sxx)
    return PowerLawFit(
        exponent=float(slope),
        amplitude=float(math.exp(intercept)),
        exponent_stderr=float(slope_se),
        n_lo=int(ns.min()),
        n_hi=int(ns.max()),
        r_squared=float(r2),
        poor_fit=bool(r2 < R2_FLAG),
        points=int(ns.size),
    )


def fit_amplitude(points, exponent: float) -> tuple[float, float]:
    """Amplitude of value ~ A * n^exponent with the exponent held fixed.

    Returns (A, stderr) from the weighted mean of log value - exponent*log n.
    """
    ns, vals, errs = _as_fit_arrays(points)
    if np.any(vals <= 0):
        raise ValueError("amplitude fit needs positive values")
    x = np.log(ns)
    y = np.log(vals) - exponent * x
    weighted = bool(np.all(errs > 0))
    w = (vals / errs) ** 2 if weighted else np.ones_like(x)
    sw = np.sum(w)
    mean = np.sum(w * y) / sw
    se = math.sqrt(1.0 / sw) if weighted else float(np.std(y, ddof=1) / np.sqrt(y.size))
    return float(math.exp(mean)), float(math.exp(mean) * se)


@dataclass
class LogCorrectedFit:
    """Fit of log v = a + b log n + c log log n (slowly varying correction)."""

    amplitude_log: float
    exponent: float
    log_coefficient: float
    r_squared: float


def fit_log_corrected(points) -> LogCorrectedFit:
    """Three-parameter fit for laws like v ~ A n^b (log n)^c; needs n >= 2."""
    ns, vals, errs = _as_fit_arrays(points)
    if ns.size < 4:
        raise ValueError("need at least 4 points")
    if np.any(ns < 2) or np.any(vals <= 0):
        raise ValueError("log-corrected fit needs n >= 2 and positive values")
    x1 = np.log(ns)
    x2 = np.log(np.log(ns))
    y = np.log(vals)
    weighted = bool(np.all(errs > 0))
    w = (vals / errs) ** 2 if weighted else np.ones_like(y)
    A = np.stack([np.ones_like(x1), x1, x2], axis=1)
    Aw = A * np.sqrt(w)[:, None]
    yw = y * np.sqrt(w)
    coef, *_ = np.linalg.lstsq(Aw, yw, rcond=None)
    resid = y - A @ coef
    ss_res = float(np.sum(w * resid ** 2))
    ybar = float(np.sum(w * y) / np.sum(w))
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return LogCorrectedFit(
        amplitude_log=float(coef[0]),
        exponent=float(coef[1]),
        log_coefficient=float(coef[2]),
        r_squared=r2,
    )


def fluctuation_exponent(alpha: float) -> float:
    """max(1 - 1/(2*alpha), 1/2): rate at which second-moment error terms of
    the mean range decay relative to the mean itself for a walk of index
    alpha.  Reported alongside range fits for context; nothing estimates it
    directly (it is not resolvable from the ratio curves at these sizes).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return max(1.0 - 1.0 / (2.0 * alpha), 0.5)


def fit_window(grid, n_min=None):
    """Default fit window: the grid minus its lowest two octaves, kept
    large enough to fit at all."""
    g = sorted(int(n) for n in grid)
    if n_min is not None:
        return [n for n in g if n >= n_min]
    drop = min(FIT_DROP_OCTAVES, max(len(g) - MIN_FIT_POINTS, 0))
    return g[drop:]


# ---------- survival experiment ----------


@dataclass
class SurvivalResult:
    model_label: str
    grid: list[int]
    estimates: list[EnsembleEstimate]
    replicas: int
    seed: int
    horizon: int
    expected_exponent: float
    fit: PowerLawFit | None
    amplitude: float
    amplitude_stderr: float
    uncensored_tail: int
    logfit: LogCorrectedFit | None = None
    warnings: list[str] = field(default_factory=list)

    def table(self):
        header = ["n", "survival", "stderr", "replicas"]
        rows = [[e.n, e.value, e.stderr, e.replicas] for e in self.estimates]
        return header, rows


def _survival_curve(t0: np.ndarray, grid, replicas: int) -> list[EnsembleEstimate]:
    out = []
    for n in grid:
        surv = np.logical_or(t0 == 0, t0 > n)
        p = float(np.mean(surv))
        se = float(np.sqrt(p * (1.0 - p) / replicas))
        out.append(EnsembleEstimate("survival", int(n), p, se, replicas))
    return out


def run_survival_experiment(model: Model, grid=DEFAULT_GRID, replicas: int = 1 << 16,
                            seed: int = 1, fit_n_min: int | None = None) -> SurvivalResult:
    """Empirical survival of the first return time on a dyadic grid,
    with the power-law fit and the fixed-exponent amplitude."""
    grid = sorted(int(n) for n in grid)
    horizon = grid[-1]
    if isinstance(model, RwrsModel):
        if not model.scenery.integer_valued:
            raise ValueError("first returns need integer scenery")
        t0 = _engine.rwrs_t0_sample(seed, replicas, horizon, model.walk, model.scenery)
        alpha, beta = model.alpha, model.beta
        expected = delta_exponent(alpha, beta) - 1.0 if alpha > 1.0 else -0.5
    else:
        t0 = _engine.mdm_t0_sample(seed, replicas, horizon, model.p, model.quenched)
        alpha = 2.0
        expected = -0.25
    estimates = _survival_curve(t0, grid, replicas)

    warnings = []
    window = fit_window(grid, fit_n_min)
    pts = [(e.n, e.value, e.stderr) for e in estimates if e.n in window and e.value > 0]
    if len(pts) < len(window):
        warnings.append("dropped zero-survival grid points from the fit")
    fit = None
    logfit = None
    amplitude = amplitude_se = float("nan")
    if len(pts) >= MIN_FIT_POINTS:
        fit = fit_power_law(pts)
        if fit.poor_fit:
            warnings.append(f"survival fit r^2 = {fit.r_squared:.4f} < {R2_FLAG}")
        amplitude, amplitude_se = fit_amplitude(pts, expected)
        if isinstance(model, RwrsModel) and model.alpha == 1.0:
            logfit = fit_log_corrected(pts)
    else:
        warnings.append("not enough positive survival points to fit")

    n_lo = window[0] if window else horizon
    uncensored_tail = int(np.sum(t0 > n_lo))
    if uncensored_tail < 100:
        warnings.append(
            f"only {uncensored_tail} uncensored returns beyond n = {n_lo}; "
            "amplitude estimate is noisy"
        )
    return SurvivalResult(
        model_label=model.label,
        grid=grid,
        estimates=estimates,
        replicas=replicas,
        seed=seed,
        horizon=horizon,
        expected_exponent=expected,
        fit=fit,
        amplitude=amplitude,
        amplitude_stderr=amplitude_se,
        uncensored_tail=uncensored_tail,
        logfit=logfit,
        warnings=warnings,
    )


# ---------- range experiment ----------


@dataclass
class RangeResult:
    model_label: str
    grid: list[int]
    estimates: list[EnsembleEstimate]     # mean range
    ratios: list[EnsembleEstimate]        # mean range / a_n
    replicas: int
    seed: int
    expected_exponent: float
    fit: PowerLawFit | None
    quantiles: dict[str, float]           # of range/a_n at the largest n
    warnings: list[str] = field(default_factory=list)

    def table(self):
        header = ["n", "mean_range", "stderr", "a_n", "ratio", "ratio_stderr", "replicas"]
        rows = []
        for e, r in zip(self.estimates, self.ratios):
            a_n = e.value / r.value if r.value != 0 else float("nan")
            rows.append([e.n, e.value, e.stderr, a_n, r.value, r.stderr, e.replicas])
        return header, rows


QUANTS = (0.05, 0.25, 0.5, 0.75, 0.95)


def run_range_experiment(model: Model, grid=DEFAULT_GRID, replicas: int = 1 << 13,
                         seed: int = 1, fit_n_min: int | None = None,
                         distinct_replicas: int | None = None) -> RangeResult:
    """Mean range growth along the grid plus the normalized ratio curve.

    Unit-lattice scenery ({-1,0,1} values) certifies range = max - min + 1,
    so the whole curve comes from prefix extrema.  Other integer sceneries
    need true distinct-value counts, which run on a replica subsample
    (distinct_replicas, default min(replicas, 512)).
    """
    grid = sorted(int(n) for n in grid)
    n_max = grid[-1]
    warnings = []
    if isinstance(model, RwrsModel):
        alpha, beta = model.alpha, model.beta
        # the range grows like a_n until a_n passes the ballistic ceiling n
        # (beta <= 1 makes the scenery sum transient and the range linear)
        a_fn = lambda n: min(norm_sequence(alpha, beta, n), float(n))
        if alpha > 1.0:
            expected = min(delta_exponent(alpha, beta), 1.0)
        else:
            expected = min(1.0 / beta, 1.0)
        if getattr(model.scenery, "unit_lattice", False):
            zmax, zmin, _, _ = _engine.rwrs_curve(seed, replicas, grid, model.walk,
                                                  model.scenery)
            ranges = (zmax - zmin + 1).astype(np.float64)
            reps_used = replicas
        elif model.scenery.integer_valued:
            reps_used = min(replicas, 512) if distinct_replicas is None else distinct_replicas
            ranges = _distinct_range_matrix(model, grid, reps_used, seed)
            warnings.append(
                f"distinct-value counting on {reps_used} replicas "
                "(no unit-lattice certificate)"
            )
        else:
            raise ValueError("range counting needs integer scenery")
    else:
        xmax, xmin, _, _ = _engine.mdm_curve(seed, replicas, grid, model.p, model.quenched)
        ranges = (xmax - xmin + 1).astype(np.float64)
        reps_used = replicas
        a_fn = lambda n: float(n) ** 0.75
        expected = 0.75

    estimates = []
    ratios = []
    for j, n in enumerate(grid):
        col = ranges[:, j]
        mean = float(np.mean(col))
        se = float(np.std(col, ddof=1) / np.sqrt(reps_used))
        a_n = a_fn(n)
        estimates.append(EnsembleEstimate("mean_range", n, mean, se, reps_used))
        ratios.append(EnsembleEstimate("range_ratio", n, mean / a_n, se / a_n, reps_used))

    window = fit_window(grid, fit_n_min)
    pts = [(e.n, e.value, e.stderr) for e in estimates if e.n in window]
    fit = None
    if len(pts) >= MIN_FIT_POINTS:
        fit = fit_power_law(pts)
        if fit.poor_fit:
            warnings.append(f"range fit r^2 = {fit.r_squared:.4f} < {R2_FLAG}")
    scaled = ranges[:, -1] / a_fn(n_max)
    quantiles = {f"q{int(100 * q):02d}": float(np.quantile(scaled, q)) for q in QUANTS}
    return RangeResult(
        model_label=model.label,
        grid=grid,
        estimates=estimates,
        ratios=ratios,
        replicas=reps_used,
        seed=seed,
        expected_exponent=expected,
        fit=fit,
        quantiles=quantiles,
        warnings=warnings,
    )


def _distinct_range_matrix(model: RwrsModel, grid, reps: int, seed: int) -> np.ndarray:
    n_max = grid[-1]
    out = np.empty((reps, len(grid)), dtype=np.float64)
    batch = max(1, min(reps, (1 << 23) // max(n_max, 1)))
    done = 0
    cks = np.asarray(grid, dtype=np.int64)
    while done < reps:
        b = min(batch, reps - done)
        z = _engine.rwrs_paths(seed, done, b, n_max, model.walk, model.scenery)
        for i in range(b):
            out[done + i] = _engine.distinct_prefix_counts(z[i], cks)
        done += b
    return out


# ---------- mean-range identity ----------


@dataclass
class IdentityReport:
    """E[range at n] against 1 + sum_{k<=n} P(T0 > k), paired per replica."""

    model_label: str
    n: int
    mode: str
    lhs: float
    rhs: float
    diff: float
    se_diff: float
    passed: bool
    replicas: int = 0


def mean_range_identity_check(model: Model, n: int, replicas: int = 1 << 16,
                              seed: int = 1, mode: str = "mc") -> IdentityReport:
    """Check E[R_n] = 1 + sum_{k=1}^n P(T0 > k).

    In mc mode both sides come from the same replicas, so the difference
    D = (R_n - 1) - #{k <= n : T0 > k} has mean zero under the identity and
    the test is |mean D| <= 3 stderr(D).  In oracle mode the identity is
    checked on exact enumeration values to machine precision.
    """
    if mode == "oracle":
        from .oracle import exact_mdm, exact_rwrs

        if isinstance(model, RwrsModel):
            res = exact_rwrs(n, model.walk, model.scenery)
        else:
            res = exact_mdm(n, model.p)
        lhs = res.e_range
        rhs = 1 + sum(res.survival[k] for k in range(1, n + 1))
        diff = float(lhs - rhs)
        scale = max(abs(float(lhs)), 1.0)
        return IdentityReport(model.label, n, "oracle", float(lhs), float(rhs),
                              diff, 0.0, abs(diff) <= 1e-12 * scale)

    if isinstance(model, RwrsModel):
        if getattr(model.scenery, "unit_lattice", False):
            zmax, zmin, t0, _ = _engine.rwrs_curve(seed, replicas, [n], model.walk,
                                                   model.scenery)
            rng = (zmax[:, 0] - zmin[:, 0] + 1).astype(np.float64)
        else:
            if n > V_PATH_LIMIT:
                raise ValueError("distinct-count identity check limited to small n")
            rng_i, _ = _engine.rwrs_pairs(seed, replicas, n, model.walk, model.scenery)
            _, _, t0, _ = _engine.rwrs_curve(seed, replicas, [n], model.walk, model.scenery)
            rng = rng_i.astype(np.float64)
    else:
        xmax, xmin, t0, _ = _engine.mdm_curve(seed, replicas, [n], model.p, model.quenched)
        rng = (xmax[:, 0] - xmin[:, 0] + 1).astype(np.float64)
    held = np.where(t0 == 0, n, np.minimum(t0 - 1, n)).astype(np.float64)
    d = rng - 1.0 - held
    mean_d = float(np.mean(d))
    se_d = float(np.std(d, ddof=1) / np.sqrt(replicas))
    lhs = float(np.mean(rng))
    rhs = 1.0 + float(np.mean(held))
    return IdentityReport(model.label, n, "mc", lhs, rhs, mean_d, se_d,
                          abs(mean_d) <= 3.0 * se_d, replicas)
