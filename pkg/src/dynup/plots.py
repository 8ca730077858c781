"""Figure rendering for the CLI report paths.

Kept out of the estimation modules on purpose: experiments produce plain
data structures, and only the command-line layer turns them into PNGs next
to the delimited output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import numpy as np
import matplotlib.pyplot as plt

__all__ = [
    "plot_regret",
    "plot_diagnostics",
    "plot_stopping_time",
    "plot_calibration",
    "plot_hotel_study",
]


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_regret(report, path) -> None:
    T = np.array([e.horizon for e in report.entries], dtype=float)
    mean = np.array([e.mean for e in report.entries])
    se = np.array([e.se for e in report.entries])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.errorbar(T, mean, yerr=3 * se, fmt="o-", capsize=3, label="mean regret")
    tt = np.geomspace(T[0], T[-1], 200)
    ax1.plot(tt, report.fit_intercept + report.fit_slope * np.log(tt), "--",
             label=f"fit on log T (R²={report.fit_r2:.3f})")
    ax1.set_xscale("log")
    ax1.set_xlabel("horizon T")
    ax1.set_ylabel("regret")
    ax1.set_title(f"policy: {report.policy}")
    ax1.legend(fontsize=8)
    ax2.plot(T, mean / T, "s-")
    ax2.set_xscale("log")
    ax2.set_xlabel("horizon T")
    ax2.set_ylabel("regret / T")
    ax2.set_title("per-period regret")
    _save(fig, path)


def plot_diagnostics(report, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.errorbar(report.checkpoints, report.means, yerr=3 * report.ses,
                fmt="o-", capsize=3, label="mean ± 3·SE")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("period t")
    ax.set_ylabel("process mean")
    ax.set_title(report.name)
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_stopping_time(report, path) -> None:
    counts = np.asarray(report.extras["hist_counts"], dtype=float)
    edges = np.asarray(report.extras["hist_edges"], dtype=float)
    pred = report.extras["predicted_ratio"]
    eta = report.extras["eta"]
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.bar(edges[:-1], counts / counts.sum(), width=np.diff(edges), align="edge",
           alpha=0.7, label="depletion ratio")
    ax.axvspan(pred - eta, pred + eta, color="green", alpha=0.15,
               label=f"predicted ± {eta:g}")
    ax.axvline(pred, color="green", lw=1.0)
    ax.set_xlabel("depletion period / T")
    ax.set_ylabel("fraction of paths")
    ax.set_title(f"violations: {report.extras['violation_fraction']:.4f}")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_calibration(mids, freqs, counts, fit, path, true_params=None) -> None:
    fig, ax = plt.subplots(figsize=(6, 3.6))
    sizes = 10 + 40 * np.asarray(counts, dtype=float) / max(np.max(counts), 1)
    ax.scatter(mids, freqs, s=sizes, alpha=0.7, label="binned acceptance")
    xx = np.linspace(1e-4, 1.0, 300)
    ax.plot(xx, np.exp(-fit.a * xx**fit.b), "r-",
            label=f"fit a={fit.a:.3f}, b={fit.b:.3f}")
    if true_params is not None:
        a0, b0 = true_params
        ax.plot(xx, np.exp(-a0 * xx**b0), "k--", lw=0.8, label=f"true a={a0:g}, b={b0:g}")
    ax.set_xlabel("upgrade proportion")
    ax.set_ylabel("acceptance frequency")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_hotel_study(report, path) -> None:
    days = [d.day for d in report.days]
    static = [d.static_mean for d in report.days]
    dyn = [d.dynamic_mean for d in report.days]
    x = np.arange(len(days))
    fig, ax = plt.subplots(figsize=(max(6, 0.8 * len(days)), 3.6))
    ax.bar(x - 0.2, static, width=0.4, label="static baseline")
    ax.bar(x + 0.2, dyn, width=0.4, label="dynamic upgrading")
    ax.set_xticks(x)
    ax.set_xticklabels([f"d{d}" for d in days], fontsize=8)
    ax.set_ylabel("mean revenue")
    if report.aggregate_improvement_pct is not None:
        ax.set_title(f"aggregate improvement: {report.aggregate_improvement_pct:+.2f}%")
    ax.legend(fontsize=8)
    _save(fig, path)
