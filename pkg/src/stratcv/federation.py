"""Hospital assignment, duplicate injection and deduplication audits.

Records are spread uniformly over hospitals; duplicates are injected by
rejection sampling so that no hospital ever holds two copies of the same
individual. The auditor checks the three deduplication levels using the
ground-truth individual ids (which the partitioning strategies never see):

  level 1  no repeated individual within a hospital
  level 2  no repeated individual across hospitals
  level 3  no repeated individual across distinct fold indices
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .csvio import fmt_float

DATASET_HEADER = ("hospital", "individual_id") + tuple(f"x{i}" for i in range(1, 11)) + ("y",)


@dataclass(frozen=True)
class FederatedDataset:
    """Flat columnar store of all records; `hospital` gives each row's silo."""

    x: np.ndarray
    y: np.ndarray
    individual_id: np.ndarray
    hospital: np.ndarray
    n_h: int
    n_original: int
    n_duplicates: int

    def __post_init__(self):
        n = self.x.shape[0]
        if not (self.y.shape[0] == self.individual_id.shape[0] == self.hospital.shape[0] == n):
            raise ValueError("column lengths disagree")
        if self.n_h < 1:
            raise ValueError("n_h must be >= 1")
        if n and (self.hospital.min() < 0 or self.hospital.max() >= self.n_h):
            raise ValueError("hospital index out of range")
        if self.n_original + self.n_duplicates != n:
            raise ValueError("n_original + n_duplicates must equal the record count")

    @property
    def n_total(self):
        return self.x.shape[0]

    def hospital_rows(self, a):
        """Row indices of hospital a, in storage order."""
        return np.flatnonzero(self.hospital == a)


@dataclass(frozen=True)
class DedupReport:
    """Violations per deduplication level; level 3 is None when no folds given."""

    def1_violations: tuple
    def2_violations: tuple
    def3_violations: tuple | None

    @property
    def def1_satisfied(self):
        return len(self.def1_violations) == 0

    @property
    def def2_satisfied(self):
        return len(self.def2_violations) == 0

    @property
    def def3_satisfied(self):
        if self.def3_violations is None:
            return None
        return len(self.def3_violations) == 0

    def summary(self):
        lines = []
        for name, viol in (
            ("def1", self.def1_violations),
            ("def2", self.def2_violations),
            ("def3", self.def3_violations),
        ):
            if viol is None:
                lines.append(f"{name}: not checked (no fold assignment)")
            elif len(viol) == 0:
                lines.append(f"{name}: satisfied")
            else:
                lines.append(f"{name}: violated ({len(viol)} individuals)")
        return "\n".join(lines)


def assign_hospitals(records, n_h, rng):
    """Place each record in one of n_h hospitals, independently and uniformly."""
    if n_h < 1:
        raise ValueError("n_h must be >= 1")
    n = len(records)
    hosp = rng.integers(0, n_h, size=n).astype(np.int32)
    n_uniq = int(np.unique(records.individual_id).size)
    return FederatedDataset(
        x=records.x,
        y=records.y,
        individual_id=records.individual_id,
        hospital=hosp,
        n_h=n_h,
        n_original=n_uniq,
        n_duplicates=n - n_uniq,
    )


def inject_duplicates(fed, n_dup, rng):
    """Append n_dup exact copies via rejection sampling.

    Each attempt draws (individual, hospital) uniformly and is rejected when
    that hospital already holds a copy of that individual, so level-1
    deduplication holds on the output by construction. The capacity bound
    n_dup <= n_original * (n_h - 1) guarantees termination.
    """
    if n_dup < 0:
        raise ValueError("n_dup must be >= 0")
    ids = fed.individual_id
    uniq, first_row = np.unique(ids, return_index=True)
    n_orig = uniq.size
    capacity = n_orig * (fed.n_h - 1) - fed.n_duplicates
    if n_dup > capacity:
        raise ValueError(
            f"n_dup={n_dup} exceeds remaining capacity {capacity} "
            f"({n_orig} individuals x {fed.n_h} hospitals)"
        )
    presence = np.zeros((n_orig, fed.n_h), dtype=bool)
    presence[np.searchsorted(uniq, ids), fed.hospital] = True

    src_rows = np.empty(n_dup, dtype=np.int64)
    new_hosp = np.empty(n_dup, dtype=np.int32)
    accepted = 0
    while accepted < n_dup:
        i = int(rng.integers(0, n_orig))
        a = int(rng.integers(0, fed.n_h))
        if presence[i, a]:
            continue
        presence[i, a] = True
        src_rows[accepted] = first_row[i]
        new_hosp[accepted] = a
        accepted += 1

    return FederatedDataset(
        x=np.concatenate([fed.x, fed.x[src_rows]]),
        y=np.concatenate([fed.y, fed.y[src_rows]]),
        individual_id=np.concatenate([fed.individual_id, fed.individual_id[src_rows]]),
        hospital=np.concatenate([fed.hospital, new_hosp]),
        n_h=fed.n_h,
        n_original=fed.n_original,
        n_duplicates=fed.n_duplicates + n_dup,
    )


def audit(fed, folds=None):
    """Check the three deduplication levels; level 3 only when folds are given."""
    if folds is not None and folds.fold.shape[0] != fed.n_total:
        raise ValueError("fold assignment does not cover every record")
    order = np.argsort(fed.individual_id, kind="stable")
    ids_sorted = fed.individual_id[order]
    starts = np.flatnonzero(np.r_[True, ids_sorted[1:] != ids_sorted[:-1]])
    ends = np.r_[starts[1:], ids_sorted.size]

    def1 = []
    def2 = []
    def3 = [] if folds is not None else None
    for s, e in zip(starts, ends):
        if e - s < 2:
            continue
        rows = order[s:e]
        ind = int(ids_sorted[s])
        hosps, counts = np.unique(fed.hospital[rows], return_counts=True)
        for a in hosps[counts >= 2]:
            def1.append((ind, int(a)))
        if hosps.size >= 2:
            def2.append((ind, tuple(int(a) for a in hosps)))
        if folds is not None:
            fids = np.unique(folds.fold[rows])
            if fids.size >= 2:
                def3.append((ind, tuple(int(f) for f in fids)))
    return DedupReport(
        def1_violations=tuple(def1),
        def2_violations=tuple(def2),
        def3_violations=tuple(def3) if def3 is not None else None,
    )


def dump_dataset_csv(fed, path):
    """Write the dataset as CSV; floats carry 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(DATASET_HEADER) + "\n")
        for i in range(fed.n_total):
            xs = ",".join(fmt_float(v) for v in fed.x[i])
            fh.write(f"{fed.hospital[i]},{fed.individual_id[i]},{xs},{fed.y[i]}\n")


def load_dataset_csv(path):
    """Inverse of dump_dataset_csv; bit-exact for the dumped records.

    n_h is recovered as max(hospital)+1, so trailing hospitals that happen
    to hold no records are not preserved.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if tuple(header) != DATASET_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        hosp, ids, xs, ys = [], [], [], []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            hosp.append(int(parts[0]))
            ids.append(int(parts[1]))
            xs.append([float(v) for v in parts[2:12]])
            ys.append(int(parts[12]))
    hosp = np.asarray(hosp, dtype=np.int32)
    ids = np.asarray(ids, dtype=np.int64)
    n = ids.size
    n_uniq = int(np.unique(ids).size) if n else 0
    return FederatedDataset(
        x=np.asarray(xs, dtype=np.float64).reshape(n, len(DATASET_HEADER) - 3),
        y=np.asarray(ys, dtype=np.int8),
        individual_id=ids,
        hospital=hosp,
        n_h=int(hosp.max()) + 1 if n else 1,
        n_original=n_uniq,
        n_duplicates=n - n_uniq,
    )
