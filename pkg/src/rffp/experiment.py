"""Stratified k-fold plans, classification metrics, cross-validation and the SNR sweep."""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ParameterError, StratificationError
from .nn import architecture_config, canonical_kind, train
from .rng import derive_seed, substream

log = logging.getLogger(__name__)

METRICS = ("accuracy", "precision", "recall", "f1")

# published cross-validated results (percent) per SNR level
PUBLISHED_RESULTS = {
    10: {"CNN": (98.84, 98.83, 98.53, 98.68), "BiLSTM": (97.75, 97.72, 98.12, 97.92),
         "BiGRU": (98.85, 98.13, 98.53, 98.33), "CNN-BiGRU": (99.17, 99.33, 99.53, 99.43)},
    20: {"CNN": (99.32, 99.28, 98.98, 99.13), "BiLSTM": (98.25, 98.19, 98.58, 98.38),
         "BiGRU": (99.34, 98.63, 98.98, 98.80), "CNN-BiGRU": (99.65, 99.80, 99.99, 99.90)},
    30: {"CNN": (100.00, 100.00, 99.91, 99.95), "BiLSTM": (99.61, 99.77, 99.87, 99.82),
         "BiGRU": (99.90, 99.84, 99.68, 99.76), "CNN-BiGRU": (100.00, 99.98, 100.00, 99.99)},
}


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignments: np.ndarray

    def indices(self, fold):
        """``(train_idx, val_idx)`` for one fold."""
        val = np.flatnonzero(self.assignments == fold)
        return np.flatnonzero(self.assignments != fold), val

    def sizes(self):
        return np.bincount(self.assignments, minlength=self.k)


def stratified_kfold(labels, k, seed):
    """Label-stratified fold assignment.

    Samples of each class are shuffled (per-class stream), the classes are laid
    end to end, and fold ids are dealt round-robin along that sequence. Per-class
    and total fold counts therefore differ by at most one.
    """
    y = np.asarray(getattr(labels, "labels", labels))
    if k < 2:
        raise ParameterError("k must be >= 2")
    classes, counts = np.unique(y, return_counts=True)
    if y.size == 0 or counts.min() < k:
        raise StratificationError(f"every class needs >= {k} samples, smallest has {counts.min(initial=0)}")
    order = np.concatenate([substream(seed, 2, int(c)).permutation(np.flatnonzero(y == c)) for c in classes])
    assign = np.empty(y.size, dtype=np.int64)
    assign[order] = np.arange(y.size) % k
    return FoldPlan(k, assign)


def confusion_matrix(y_true, y_pred, n_classes=9):
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return cm


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float

    def percent(self):
        return {m: round(100.0 * getattr(self, m), 2) for m in METRICS}


def per_class_precision_recall(cm):
    cm = np.asarray(cm, dtype=float)
    tp = np.diag(cm)
    pred = cm.sum(axis=0)
    true = cm.sum(axis=1)
    prec = np.divide(tp, pred, out=np.zeros_like(tp), where=pred > 0)
    rec = np.divide(tp, true, out=np.zeros_like(tp), where=true > 0)
    return prec, rec


def metrics(cm):
    """Accuracy plus macro precision/recall and their harmonic mean.

    Macro averages run over the classes that occur in the matrix (a non-zero
    row or column); a class with no predictions has precision 0.
    """
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.sum() <= 0:
        raise ParameterError("metrics need a non-empty square confusion matrix")
    if np.any(cm < 0):
        raise ParameterError("confusion counts must be non-negative")
    prec, rec = per_class_precision_recall(cm)
    present = (cm.sum(axis=0) > 0) | (cm.sum(axis=1) > 0)
    p = float(prec[present].mean())
    r = float(rec[present].mean())
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return Metrics(float(np.trace(cm) / cm.sum()), p, r, f1)


@dataclass
class CVResult:
    model: str
    snr_db: object
    seed: int
    fingerprint: str
    folds: list                 # per-fold Metrics
    confusion: np.ndarray       # summed over folds
    epochs: list = field(default_factory=list)

    @property
    def mean(self):
        return Metrics(*(float(np.mean([getattr(f, m) for f in self.folds])) for m in METRICS))

    def row(self):
        return {"model": self.model, "snr_db": self.snr_db, **self.mean.percent()}


def nn_fit(kind, overrides=None):
    """Default fold trainer: a fresh network of architecture ``kind``."""
    overrides = dict(overrides or {})

    def fit(train_set, val_set, seed):
        cfg = architecture_config(kind, seed=seed, **overrides)
        return train(cfg, train_set, val_set)

    fit.kind = canonical_kind(kind)
    fit.overrides = overrides
    return fit


def _run_fold(args):
    fit, dataset, plan, fold, seed = args
    tr, va = plan.indices(fold)
    fold_seed = derive_seed(seed, 3, fold)
    model = fit(dataset.subset(tr), dataset.subset(va), fold_seed)
    pred = model.predict(dataset.features[va])
    n_epochs = len(getattr(model, "train_log", []))
    return confusion_matrix(dataset.labels[va], pred, len(dataset.class_names)), n_epochs


def worker_count():
    env = os.environ.get("RFFP_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def cross_validate(model_kind, dataset, k=10, seed=42, fit=None, snr_db="clean", workers=None,
                   overrides=None):
    """k-fold CV; each fold trains a fresh model seeded from ``(seed, fold)``.

    The held-out fold doubles as the early-stopping validation set. ``fit``
    may replace the network trainer with any ``fit(train, val, seed)``
    returning an object with ``predict``.
    """
    fit = fit or nn_fit(model_kind, overrides)
    plan = stratified_kfold(dataset.labels, k, seed)
    jobs = [(fit, dataset, plan, f, seed) for f in range(k)]
    workers = min(workers or worker_count(), k)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_fold, jobs))
    else:
        results = [_run_fold(j) for j in jobs]
    cms = [r[0] for r in results]
    kind = getattr(fit, "kind", str(model_kind))
    fp = ""
    if hasattr(fit, "overrides"):
        fp = architecture_config(kind, seed=seed, **fit.overrides).fingerprint()
    res = CVResult(kind, snr_db, seed, fp, [metrics(c) for c in cms], sum(cms), [r[1] for r in results])
    log.info("%s @ %s dB: %s", kind, snr_db, res.mean.percent())
    return res


@dataclass
class EvaluationReport:
    results: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def rows(self):
        return [r.row() for r in self.results]

    def to_dict(self):
        out = []
        for r in self.results:
            out.append({
                **r.row(),
                "seed": r.seed,
                "config_fingerprint": r.fingerprint,
                "folds": [asdict(f) for f in r.folds],
                "epochs": r.epochs,
                "confusion": r.confusion.tolist(),
            })
        return {"meta": self.meta, "results": out}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def table_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "snr_db", *METRICS])
        for row in self.rows():
            w.writerow([row["model"], row["snr_db"], *(f"{row[m]:.2f}" for m in METRICS)])
        return buf.getvalue()

    def bars_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "snr_db", "metric", "value"])
        for row in self.rows():
            for m in METRICS:
                w.writerow([row["model"], row["snr_db"], m, f"{row[m]:.2f}"])
        return buf.getvalue()

    def comparison_text(self):
        """Side-by-side table of these results and the published ones."""
        lines = [f"{'model':<10} {'snr':>5}  " + "  ".join(f"{m:>17}" for m in METRICS),
                 f"{'':<10} {'':>5}  " + "  ".join(f"{'ours / published':>17}" for _ in METRICS)]
        for row in self.rows():
            ref = published(row["model"], row["snr_db"])
            cells = []
            for i, m in enumerate(METRICS):
                theirs = f"{ref[i]:.2f}" if ref else "  -  "
                cells.append(f"{row[m]:>8.2f} / {theirs:>6}")
            lines.append(f"{row['model']:<10} {str(row['snr_db']):>5}  " + "  ".join(cells))
        return "\n".join(lines) + "\n"


def published(model, snr_db):
    """Published (accuracy, precision, recall, f1) for a model; clean data is compared to 30 dB."""
    key = 30 if snr_db in ("clean", None) else snr_db
    try:
        return PUBLISHED_RESULTS[int(key)][canonical_kind(model)]
    except (KeyError, ValueError, TypeError):
        return None


def snr_sweep(model_kinds, snr_levels, dataset_for_snr, seed=42, k=10, workers=None, overrides=None):
    """Cross-validate every model at every SNR level.

    ``dataset_for_snr(snr_db)`` rebuilds the feature dataset from freshly
    noised transients; it is called once per level.
    """
    if not snr_levels:
        raise ParameterError("no SNR levels given")
    if not model_kinds:
        raise ParameterError("no models given")
    report = EvaluationReport(meta={"seed": seed, "k": k, "snr_levels": list(snr_levels),
                                    "models": [canonical_kind(m) for m in model_kinds]})
    for snr in snr_levels:
        ds = dataset_for_snr(snr)
        for kind in model_kinds:
            report.results.append(cross_validate(kind, ds, k, seed, snr_db=snr, workers=workers,
                                                 overrides=overrides))
    return report


def monotone_in_snr(report, tol=1.0):
    """Models whose accuracy drops by more than ``tol`` points as SNR rises."""
    by_model = {}
    for row in report.rows():
        if row["snr_db"] != "clean":
            by_model.setdefault(row["model"], []).append((float(row["snr_db"]), row["accuracy"]))
    bad = []
    for model, pts in by_model.items():
        pts.sort()
        if any(b[1] < a[1] - tol for a, b in itertools.combinations(pts, 2)):
            bad.append(model)
    return bad
