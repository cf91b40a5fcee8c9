"""Figure rendering for the report path.

PNG files land next to the delimited output: a partition strip chart over
the demand curve, a per-method time/cost comparison and the T-sweep
trade-off curve.  Everything uses the Agg backend so it works headless.
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .demand import DemandSeries, Partition


def plot_partitions(demand: DemandSeries, partitions: dict, path,
                    candidates=None) -> Path:
    """System demand with one boundary strip per method.

    Multi-period windows are shaded, singleton windows stay dark, the way
    aggregation results are usually displayed; optionally marks the
    periods with flagged congestion candidates.
    """
    path = Path(path)
    t0 = demand.t0
    hours = np.arange(1, t0 + 1) * demand.step_hours
    n = len(partitions)
    fig, axes = plt.subplots(n + 1, 1, sharex=True,
                             figsize=(8, 2.2 + 0.7 * n),
                             gridspec_kw={"height_ratios": [3] + [1] * n})
    ax0 = axes[0] if n else axes
    ax0.plot(hours, demand.system, color="tab:blue", lw=1.2)
    ax0.set_ylabel("system demand (MW)")
    if candidates is not None:
        flagged = [tau for tau in range(1, t0 + 1) if candidates.per_period[tau - 1]]
        if flagged:
            ax0.scatter([hours[tau - 1] for tau in flagged],
                        [demand.system[tau - 1] for tau in flagged],
                        color="tab:red", s=12, zorder=3, label="congestion flagged")
            ax0.legend(loc="upper left", fontsize=8)
    for ax, (name, part) in zip(axes[1:], partitions.items()):
        for ts, tf in part.windows(t0):
            width = (tf - ts + 1) * demand.step_hours
            color = "#1f3d7a" if tf == ts else "#9ec3e6"
            ax.barh(0, width, left=(ts - 1) * demand.step_hours,
                    height=1.0, color=color, edgecolor="white", linewidth=0.4)
        ax.set_yticks([])
        ax.set_ylabel(name, rotation=0, ha="right", va="center")
        ax.set_xlim(0, t0 * demand.step_hours)
    axes[-1].set_xlabel("hour")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_bench(report, path) -> Path:
    """Wall time and cost variation per method."""
    path = Path(path)
    runs = report.runs
    names = [r.method for r in runs]
    times = [r.time_total for r in runs]
    var = [r.cost_variation_pct or 0.0 for r in runs]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
    ax1.bar(names, times, color="tab:blue")
    ax1.set_ylabel("wall time (s)")
    ax2.bar(names, var, color="tab:orange")
    ax2.set_ylabel("cost variation vs BM (%)")
    for ax in (ax1, ax2):
        ax.grid(axis="y", alpha=0.3)
    fig.suptitle(f"{report.case_name}: T={report.periods}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_sweep(report, path) -> Path:
    """Time and cost variation against the number of adaptive periods."""
    path = Path(path)
    t = [e.periods for e in report.entries]
    times = [e.time_total for e in report.entries]
    var = [e.cost_variation_pct for e in report.entries]
    corr = [e.corrections for e in report.entries]
    fig, ax1 = plt.subplots(figsize=(7, 3.6))
    ax1.plot(t, times, "o-", color="tab:blue", label="wall time")
    ax1.axhline(report.bm_time, color="tab:blue", ls="--", lw=0.8, label="BM time")
    ax1.set_xlabel("adaptive periods T")
    ax1.set_ylabel("wall time (s)", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(t, var, "s-", color="tab:orange", label="cost variation")
    ax2.set_ylabel("cost variation vs BM (%)", color="tab:orange")
    for ti, ci in zip(t, corr):
        if ci > 0:
            ax1.annotate(f"{ci} corr", (ti, 0), textcoords="offset points",
                         xytext=(0, -14), fontsize=7, ha="center",
                         color="tab:red", annotation_clip=False)
    if report.min_periods_without_correction is not None:
        ax1.axvline(report.min_periods_without_correction, color="tab:green",
                    ls=":", lw=1.0)
    fig.suptitle(f"{report.case_name}: {report.method} sweep")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
