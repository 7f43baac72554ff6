"""k-fold cross-validation over a fold assignment.

Per-hospital folds are merged into global folds by index; each fold is held
out once while the model trains on the rest, evaluating both the training
union and the held-out fold after every boosting round. Validation records
that duplicate training records are deliberately not filtered: the point is
to measure the leakage, not to patch it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boosting import feature_importance, train
from .csvio import fmt_float, write_rows


@dataclass(frozen=True)
class CvResult:
    """Per-fold accuracy curves (k x rounds) and normalized importances."""

    k: int
    rounds: int
    train_curves: np.ndarray
    valid_curves: np.ndarray
    importances: np.ndarray

    @property
    def final_train(self):
        return self.train_curves[:, -1]

    @property
    def final_valid(self):
        return self.valid_curves[:, -1]

    @property
    def mean_train_curve(self):
        return self.train_curves.mean(axis=0)

    @property
    def mean_valid_curve(self):
        return self.valid_curves.mean(axis=0)

    @property
    def mean_final_valid(self):
        return float(self.final_valid.mean())


def accuracy(labels, predictions):
    """Fraction of agreeing pairs."""
    labels = np.asarray(labels)
    predictions = np.asarray(predictions)
    if labels.shape != predictions.shape:
        raise ValueError("length mismatch")
    if labels.size == 0:
        raise ValueError("empty input")
    return float(np.mean(labels == predictions))


def merge_global_folds(fed, assignment):
    """Union the per-hospital folds: k disjoint row-index sets covering fed."""
    if assignment.fold.shape[0] != fed.n_total:
        raise ValueError("fold assignment does not cover every record")
    return [np.flatnonzero(assignment.fold == i) for i in range(assignment.k)]


def run_cv(fed, assignment, config):
    """Train k models, each holding out one global fold.

    Training rows are sorted by storage index, so the result depends only on
    fold contents, never on how an assignment happened to order them.
    """
    folds = merge_global_folds(fed, assignment)
    for i, rows in enumerate(folds):
        if rows.size == 0:
            raise ValueError(f"global fold {i} is empty")
    k = assignment.k
    train_curves = np.empty((k, config.rounds))
    valid_curves = np.empty((k, config.rounds))
    importances = np.empty((k, fed.x.shape[1]))
    for i in range(k):
        train_idx = np.sort(np.concatenate([folds[j] for j in range(k) if j != i]))
        x_tr = fed.x[train_idx]
        y_tr = fed.y[train_idx]
        x_va = fed.x[folds[i]]
        y_va = fed.y[folds[i]]
        model, curves = train(x_tr, y_tr, config, eval_sets=((x_tr, y_tr), (x_va, y_va)))
        train_curves[i] = curves[0]
        valid_curves[i] = curves[1]
        importances[i] = feature_importance(model)
    return CvResult(
        k=k,
        rounds=config.rounds,
        train_curves=train_curves,
        valid_curves=valid_curves,
        importances=importances,
    )


def dump_curves_csv(result, path):
    """Per-iteration accuracies: iteration, fold, phase(train|valid), accuracy."""
    rows = []
    for i in range(result.k):
        for phase, curves in (("train", result.train_curves), ("valid", result.valid_curves)):
            for it in range(result.rounds):
                rows.append((str(it + 1), str(i), phase, fmt_float(curves[i, it])))
    write_rows(path, ("iteration", "fold", "phase", "accuracy"), rows)


def dump_summary_csv(result, path):
    """Per-fold finals and importances: fold, final_train, final_valid, importance_x1.."""
    n_feat = result.importances.shape[1]
    header = ("fold", "final_train", "final_valid") + tuple(
        f"importance_x{j + 1}" for j in range(n_feat)
    )
    rows = []
    for i in range(result.k):
        rows.append(
            (str(i), fmt_float(result.final_train[i]), fmt_float(result.final_valid[i]))
            + tuple(fmt_float(v) for v in result.importances[i])
        )
    write_rows(path, header, rows)
