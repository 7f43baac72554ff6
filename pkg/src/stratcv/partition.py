"""Fold partitioning strategies.

Three ways to assign every record to one of k folds:

  random      shuffle each hospital and cut into k near-equal chunks; copies
              of one individual can land in different folds (leakage)
  stratified  threshold one covariate at pooled quantiles; exact copies share
              the covariate value, so they always share a fold
  unbiased    random partition of the dataset before any duplicates exist,
              the reference the bias is measured against
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .federation import assign_hospitals

FOLDS_HEADER = ("hospital", "record_ordinal", "individual_id", "fold")


class DegenerateStratificationError(ValueError):
    """Raised when a covariate has too few distinct values to form k folds."""


@dataclass(frozen=True)
class FoldAssignment:
    """Fold index per record, aligned with the dataset's storage order."""

    fold: np.ndarray
    k: int

    def __post_init__(self):
        fold = np.asarray(self.fold, dtype=np.int32)
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if fold.size and (fold.min() < 0 or fold.max() >= self.k):
            raise ValueError("fold index out of range")
        object.__setattr__(self, "fold", fold)


@dataclass(frozen=True)
class StratificationSpec:
    """k+1 thresholds over one covariate; fold i is the interval (t_i, t_{i+1}].

    covariate_index is 1-based (x1..x10); None means the caller supplies the
    value column itself (e.g. a hash of an external identifier).
    """

    covariate_index: int | None
    thresholds: np.ndarray
    k: int

    def __post_init__(self):
        thr = np.asarray(self.thresholds, dtype=np.float64)
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.covariate_index is not None and not 1 <= self.covariate_index <= 10:
            raise ValueError("covariate_index must be in 1..10")
        if thr.shape != (self.k + 1,):
            raise ValueError(f"expected {self.k + 1} thresholds, got shape {thr.shape}")
        if not (np.isneginf(thr[0]) and np.isposinf(thr[-1])):
            raise ValueError("thresholds must start at -inf and end at +inf")
        if not np.all(np.isfinite(thr[1:-1])):
            raise ValueError("interior thresholds must be finite")
        if np.any(np.diff(thr) < 0):
            raise ValueError("thresholds must be non-decreasing")
        object.__setattr__(self, "thresholds", thr)


def random_partition(fed, k, rng):
    """Shuffle each hospital and cut into k chunks differing by at most 1.

    The remainder goes to the lowest fold indices. Hospitals smaller than k
    leave some of their per-hospital folds empty; that is permitted but
    flagged with a warning.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    fold = np.empty(fed.n_total, dtype=np.int32)
    for a in range(fed.n_h):
        rows = fed.hospital_rows(a)
        m = rows.size
        if m < k:
            warnings.warn(f"hospital {a} holds {m} records, fewer than k={k}; some folds empty")
        q, r = divmod(m, k)
        sizes = np.full(k, q, dtype=np.int64)
        sizes[:r] += 1
        labels = np.repeat(np.arange(k, dtype=np.int32), sizes)
        perm = rng.permutation(m)
        fold[rows[perm]] = labels
    return FoldAssignment(fold=fold, k=k)


def compute_thresholds(fed, covariate_index, k, values=None):
    """Pooled-quantile thresholds for one covariate (duplicates included).

    Interior threshold t_i is the pooled sorted value at rank floor(i*n/k),
    1-based. Ties never straddle folds because membership is t_i < v <= t_{i+1}.
    Pass either a 1-based covariate_index or an explicit value column, not
    both; a values-based spec carries covariate_index=None, so the same
    column must be handed to stratified_partition again.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if fed.n_total == 0:
        raise ValueError("dataset is empty")
    if (covariate_index is None) == (values is None):
        raise ValueError("pass exactly one of covariate_index and values")
    if values is None:
        vals = fed.x[:, covariate_index - 1]
    else:
        vals = np.asarray(values, dtype=np.float64)
        if vals.shape[0] != fed.n_total:
            raise ValueError("values must cover every record")
    if np.unique(vals).size < k:
        raise DegenerateStratificationError(
            f"covariate has {np.unique(vals).size} distinct values, need >= {k}"
        )
    v = np.sort(vals, kind="stable")
    n = v.size
    interior = v[(np.arange(1, k) * n) // k - 1]
    thr = np.concatenate(([-np.inf], interior, [np.inf]))
    return StratificationSpec(covariate_index=covariate_index, thresholds=thr, k=k)


def stratified_partition(fed, spec, values=None):
    """Assign each record the unique fold i with t_i < v <= t_{i+1}.

    Deterministic, no randomness: exact duplicates share v and therefore the
    fold, so level-3 deduplication holds by construction.
    """
    if spec.covariate_index is not None:
        vals = fed.x[:, spec.covariate_index - 1]
    else:
        if values is None:
            raise ValueError("spec has no covariate_index; pass the value column")
        vals = np.asarray(values, dtype=np.float64)
        if vals.shape[0] != fed.n_total:
            raise ValueError("values must cover every record")
    fold = np.searchsorted(spec.thresholds[1:-1], vals, side="left").astype(np.int32)
    return FoldAssignment(fold=fold, k=spec.k)


def unbiased_partition(records, n_h, k, rng):
    """Hospital assignment plus random folds on the duplicate-free records."""
    fed = assign_hospitals(records, n_h, rng)
    return fed, random_partition(fed, k, rng)


def dump_folds_csv(fed, assignment, path):
    """Write one row per record: hospital, within-hospital ordinal, id, fold."""
    if assignment.fold.shape[0] != fed.n_total:
        raise ValueError("fold assignment does not cover every record")
    counters = np.zeros(fed.n_h, dtype=np.int64)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(FOLDS_HEADER) + "\n")
        for i in range(fed.n_total):
            a = fed.hospital[i]
            fh.write(f"{a},{counters[a]},{fed.individual_id[i]},{assignment.fold[i]}\n")
            counters[a] += 1


def load_folds_csv(fed, path):
    """Read a fold CSV back, validating it against the dataset row by row."""
    counters = np.zeros(fed.n_h, dtype=np.int64)
    fold = np.empty(fed.n_total, dtype=np.int32)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if tuple(header) != FOLDS_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        i = 0
        for line in fh:
            a, ordinal, ind, f = (int(v) for v in line.rstrip("\n").split(","))
            if i >= fed.n_total:
                raise ValueError(f"{path}: more rows than dataset records")
            if a != fed.hospital[i] or ind != fed.individual_id[i] or ordinal != counters[a]:
                raise ValueError(f"{path}: row {i} does not match the dataset")
            counters[a] += 1
            fold[i] = f
            i += 1
    if i != fed.n_total:
        raise ValueError(f"{path}: fewer rows than dataset records")
    return FoldAssignment(fold=fold, k=int(fold.max()) + 1 if fed.n_total else 1)
