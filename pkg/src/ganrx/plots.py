"""Figure rendering for the report path. Uses the Agg backend so it works
headless; nothing here is needed for detection or evaluation itself."""

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .ioutil import atomic_write  # noqa: E402


def _save(fig, path, dpi):
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=dpi)
    plt.close(fig)
    atomic_write(path, buf.getvalue())


def save_roc_figure(summaries, path, dpi=150):
    """Plot each method's first-run ROC curve (AUC in the legend) to a file."""
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    for s in summaries:
        ax.plot(s.roc.fpr, s.roc.tpr,
                label=f"{s.method} (AUC={s.mean_auc:.4f})")
    ax.plot([0, 1], [0, 1], ls=":", c="gray", lw=1)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.legend(loc="lower right")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path, dpi)


def save_auc_figure(summaries, path, dpi=150):
    """Bar chart of mean AUC per method with std error bars."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    names = [s.method for s in summaries]
    means = [s.mean_auc for s in summaries]
    stds = [s.std_auc for s in summaries]
    ax.bar(range(len(names)), means, yerr=stds, capsize=4,
           color="steelblue", edgecolor="black", lw=0.5)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names)
    ax.set_ylabel("mean AUC")
    ax.set_ylim(0, 1.05)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    _save(fig, path, dpi)
