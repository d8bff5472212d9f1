"""ROC analysis and the multi-run detector benchmark.

The ROC sweep uses every distinct score value as a threshold, descending, so
tied scores enter a single operating point together; the curve starts at the
sentinel (threshold=inf, fpr=0, tpr=0) and ends at (lowest score, 1, 1). The
trapezoidal AUC of this curve equals the Mann-Whitney statistic with half
credit for ties.

``multi_run`` benchmarks several detectors on one labeled cube. Detectors
with trained networks (gan-rx, ae) are repeated across independent training
seeds and summarized by mean/std AUC; closed-form detectors (rx, wrx) are
deterministic and run once.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import gan
from .detect import ae_detect, gan_rx_detect, rx_detect, wrx_detect
from .errors import DataError, GanrxError
from .hsi import HsiCube, Mask, normalize_cube
from .ioutil import atomic_write

METHODS = ("rx", "wrx", "ae", "gan-rx")


@dataclass
class RocCurve:
    """Operating points of a score/label sweep plus the area under it."""

    thresholds: np.ndarray  # descending, thresholds[0] == inf
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    def __post_init__(self):
        self.thresholds = np.asarray(self.thresholds, dtype=np.float64)
        self.fpr = np.asarray(self.fpr, dtype=np.float64)
        self.tpr = np.asarray(self.tpr, dtype=np.float64)
        if not self.thresholds.shape == self.fpr.shape == self.tpr.shape:
            raise DataError("ROC arrays must have matching lengths")


@dataclass
class MethodSummary:
    """AUC statistics for one detector over repeated runs."""

    method: str
    mean_auc: float
    std_auc: float
    runs: int
    aucs: np.ndarray
    roc: RocCurve  # curve of the first run


def roc_curve(scores, labels) -> RocCurve:
    """ROC of per-pixel scores against binary labels.

    Scores and labels are flattened and must be the same length; labels must
    contain both classes, otherwise no ROC is defined.
    """
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if scores.size != labels.size:
        raise DataError(
            f"{scores.size} scores vs {labels.size} labels"
        )
    if not np.isfinite(scores).all():
        raise DataError("scores must be finite")
    labels = labels.astype(np.int64)
    if not np.isin(labels, (0, 1)).all():
        raise DataError("labels must be 0 or 1")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("ROC needs at least one pixel of each class")

    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    tp = np.cumsum(y)
    fp = np.cumsum(1 - y)
    # last index of each run of equal scores: all tied pixels flip together
    last = np.nonzero(np.diff(s))[0]
    idx = np.concatenate([last, [s.size - 1]])

    thresholds = np.concatenate([[np.inf], s[idx]])
    fpr = np.concatenate([[0.0], fp[idx] / n_neg])
    tpr = np.concatenate([[0.0], tp[idx] / n_pos])
    return RocCurve(thresholds, fpr, tpr, float(np.trapezoid(tpr, fpr)))


def multi_run(cube: HsiCube, mask: Mask, methods, runs: int,
              hyper: gan.GanHyper, *, ridge: float = 1e-6,
              wrx_iterations: int = 5, seed_base: int = 1,
              batch_size: int = 512):
    """Benchmark detectors on one labeled cube; returns a MethodSummary per
    method, in the order given.

    Run r of a trained method uses training seed ``seed_base + r``; the
    reported curve is always the first run's.
    """
    if runs < 1:
        raise DataError("runs must be >= 1")
    for m in methods:
        if m not in METHODS:
            raise DataError(f"unknown method {m!r}; expected one of {METHODS}")
    if (mask.width, mask.height) != (cube.width, cube.height):
        raise DataError("mask dimensions do not match the cube")

    labels = mask.labels.reshape(-1)
    ncube, _ = normalize_cube(cube)
    summaries = []
    for method in methods:
        if method == "rx":
            maps = [rx_detect(cube, ridge=ridge)]
        elif method == "wrx":
            maps = [wrx_detect(cube, iterations=wrx_iterations, ridge=ridge)]
        elif method == "ae":
            maps = []
            for r in range(runs):
                h = replace(hyper, seed=seed_base + r)
                try:
                    generator, _ = gan.train_autoencoder(ncube, h)
                except GanrxError as exc:
                    raise type(exc)(f"run {r} (ae, seed {h.seed}): {exc}") from exc
                maps.append(ae_detect(cube, generator, batch_size=batch_size))
        else:  # gan-rx
            maps = []
            for r in range(runs):
                h = replace(hyper, seed=seed_base + r)
                try:
                    generator, _, _ = gan.train(ncube, h)
                except GanrxError as exc:
                    raise type(exc)(
                        f"run {r} (gan-rx, seed {h.seed}): {exc}"
                    ) from exc
                maps.append(gan_rx_detect(cube, generator, ridge=ridge,
                                          batch_size=batch_size))
        curves = [roc_curve(m.ravel(), labels) for m in maps]
        aucs = np.array([c.auc for c in curves])
        summaries.append(MethodSummary(
            method=method,
            mean_auc=float(aucs.mean()),
            std_auc=float(aucs.std()),
            runs=len(maps),
            aucs=aucs,
            roc=curves[0],
        ))
    return summaries


# --- delimited output --------------------------------------------------------

def roc_csv(curve: RocCurve) -> bytes:
    lines = ["threshold,fpr,tpr"]
    for t, f, p in zip(curve.thresholds, curve.fpr, curve.tpr):
        lines.append(f"{t:.9g},{f:.9g},{p:.9g}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def save_roc(curve: RocCurve, path) -> None:
    """Write an ROC curve as CSV: threshold,fpr,tpr (threshold inf first)."""
    atomic_write(path, roc_csv(curve))


def report_csv(summaries) -> bytes:
    lines = ["method,mean_auc,std_auc,runs"]
    for s in summaries:
        lines.append(f"{s.method},{s.mean_auc:.9g},{s.std_auc:.9g},{s.runs}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def save_report(summaries, path) -> None:
    """Write the benchmark summary as CSV: method,mean_auc,std_auc,runs."""
    atomic_write(path, report_csv(summaries))
