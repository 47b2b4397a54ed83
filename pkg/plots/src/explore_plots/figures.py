"""Figure builders; all inputs are validated before any file is written."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, find_replicas, load_steps_csv, load_summary


def _aligned_curves(replicas):
    """Stack replica curves on the common time prefix."""
    curves = [load_steps_csv(d / "steps.csv") for d in replicas]
    horizon = min(len(t) for t, _c in curves)
    t0 = curves[0][0][:horizon]
    for t, _c in curves[1:]:
        if not np.array_equal(t[:horizon], t0):
            raise SchemaError("replica time axes disagree on the common prefix")
    stack = np.stack([c[:horizon] for _t, c in curves])
    return t0, stack


def explore_curve(runs_dir, out_path) -> None:
    """Cumulative exploration steps over time: median and IQR band."""
    replicas = find_replicas(runs_dir)
    t, stack = _aligned_curves(replicas)
    changes = None
    summary_path = replicas[0] / "summary.json"
    if summary_path.exists():
        changes = load_summary(summary_path)["change_times"]

    med = np.median(stack, axis=0)
    q1 = np.percentile(stack, 25, axis=0)
    q3 = np.percentile(stack, 75, axis=0)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.fill_between(t, q1, q3, alpha=0.25, label="interquartile band")
    ax.plot(t, med, lw=1.5, label=f"median of {len(replicas)} replicas")
    for i, tc in enumerate(changes or []):
        if tc > 1:
            ax.axvline(tc, color="gray", ls="--", lw=0.8,
                       label="change" if i <= 1 else None)
    ax.set_xlabel("time step")
    ax.set_ylabel("cumulative exploration steps")
    ax.legend(loc="upper left", frameon=False)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def bound_gap(runs_dir, out_path) -> None:
    """Observed exploration steps per replica against the theorem bound."""
    replicas = find_replicas(runs_dir)
    observed, bounds, labels = [], [], []
    for d in replicas:
        doc = load_summary(d / "summary.json")
        observed.append(doc["exploration_steps"])
        bounds.append(doc["bound_report"]["total_bound"])
        labels.append(d.name)
    fig, ax = plt.subplots(figsize=(7, 4))
    x = np.arange(len(labels))
    ax.bar(x, observed, label="observed")
    ax.axhline(min(bounds), color="firebrick", ls="--",
               label=f"step bound ({min(bounds):.2g})")
    ax.set_yscale("log")
    ax.set_xticks(x, labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("exploration steps (log scale)")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
