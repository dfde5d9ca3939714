"""Figure rendering for experiment reports.

Figures are a convenience layer over the plot-data files; the CSV tables
remain the primary record.  PNG metadata is stripped so reruns produce
byte-identical images.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_META = {"Software": None}  # keep PNG bytes independent of mpl version string


def _loglog_with_fit(x, y, yerr, fit_exponent, fit_amplitude, ylabel, title, path,
                     fit_label=None):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.errorbar(x, y, yerr=yerr, fmt="o", ms=3.5, lw=1, capsize=2, label="estimate")
    if fit_exponent is not None:
        xs = np.array([x.min(), x.max()])
        ax.plot(xs, fit_amplitude * xs ** fit_exponent, "--", lw=1,
                label=fit_label or f"slope {fit_exponent:.3f}")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)


def survival_figure(result, path: str) -> None:
    ns = [e.n for e in result.estimates]
    ys = [e.value for e in result.estimates]
    es = [e.stderr for e in result.estimates]
    exp = result.fit.exponent if result.fit else None
    amp = result.fit.amplitude if result.fit else None
    _loglog_with_fit(ns, ys, es, exp, amp, "survival", result.model_label, path)


def range_figure(result, path: str) -> None:
    ns = [e.n for e in result.estimates]
    ys = [e.value for e in result.estimates]
    es = [e.stderr for e in result.estimates]
    exp = result.fit.exponent if result.fit else None
    amp = result.fit.amplitude if result.fit else None
    _loglog_with_fit(ns, ys, es, exp, amp, "mean range", result.model_label, path)


def sup_figure(estimates, extrapolated, path: str) -> None:
    """Sup-mean vs grid resolution with the extrapolated level line."""
    ms = np.array([e.m for e in estimates], dtype=float)
    ys = np.array([e.sup_mean for e in estimates])
    es = np.array([e.sup_stderr for e in estimates])
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.errorbar(ms, ys, yerr=es, fmt="o", ms=4, lw=1, capsize=2, label="per-resolution")
    if extrapolated is not None:
        ax.axhline(extrapolated.sup_mean, ls="--", lw=1, color="C1",
                   label=f"extrapolated {extrapolated.sup_mean:.4f}")
        ax.axhspan(extrapolated.sup_mean - extrapolated.sup_stderr,
                   extrapolated.sup_mean + extrapolated.sup_stderr,
                   color="C1", alpha=0.15, lw=0)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("grid resolution m")
    ax.set_ylabel("mean running maximum")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
