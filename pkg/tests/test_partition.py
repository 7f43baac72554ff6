import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import quantile_fold_oracle
from stratcv.datagen import Records
from stratcv.federation import assign_hospitals, audit, inject_duplicates
from stratcv.partition import (
    FOLDS_HEADER,
    DegenerateStratificationError,
    FoldAssignment,
    StratificationSpec,
    compute_thresholds,
    dump_folds_csv,
    load_folds_csv,
    random_partition,
    stratified_partition,
    unbiased_partition,
)
from stratcv.rng import stream


def make_fed(n, n_h=3, seed=0, n_dup=0):
    rng = stream(seed, "rec")
    rec = Records(
        x=rng.standard_normal((n, 10)),
        y=(rng.random(n) < 0.5).astype(np.int8),
        individual_id=np.arange(n, dtype=np.int64),
    )
    fed = assign_hospitals(rec, n_h, stream(seed, "h"))
    if n_dup:
        fed = inject_duplicates(fed, n_dup, stream(seed, "d"))
    return fed


# -------------------------------------------------------------------- random


def test_random_partition_balanced_within_hospital():
    fed = make_fed(500, n_h=4, seed=1)
    fa = random_partition(fed, 5, stream(1, "f"))
    assert fa.k == 5
    for a in range(4):
        rows = fed.hospital_rows(a)
        counts = np.bincount(fa.fold[rows], minlength=5)
        assert counts.max() - counts.min() <= 1
        assert np.all(np.diff(counts) <= 0)  # remainder goes to the lowest folds


def test_random_partition_covers_everything():
    fed = make_fed(101, n_h=3, seed=2)
    fa = random_partition(fed, 5, stream(2, "f"))
    assert fa.fold.shape == (101,)
    assert fa.fold.min() >= 0 and fa.fold.max() < 5


def test_random_partition_small_hospital_warns():
    fed = make_fed(6, n_h=3, seed=3)
    with pytest.warns(UserWarning):
        random_partition(fed, 5, stream(3, "f"))


def test_random_partition_rejects_k1():
    with pytest.raises(ValueError):
        random_partition(make_fed(10), 1, stream(0, "f"))


def test_random_partition_deterministic():
    fed = make_fed(200, seed=4)
    a = random_partition(fed, 5, stream(4, "f"))
    b = random_partition(fed, 5, stream(4, "f"))
    assert np.array_equal(a.fold, b.fold)


# ---------------------------------------------------------------- thresholds


def test_thresholds_hand_case():
    # pooled values 1..10, k=5: cut ranks 2,4,6,8 (1-based)
    fed = make_fed(10, n_h=1, seed=5)
    vals = np.arange(10.0)[::-1] + 1.0
    spec = compute_thresholds(fed, None, 5, values=vals)
    assert np.isneginf(spec.thresholds[0]) and np.isposinf(spec.thresholds[-1])
    assert np.array_equal(spec.thresholds[1:-1], [2.0, 4.0, 6.0, 8.0])
    fa = stratified_partition(fed, spec, values=vals)
    assert np.bincount(fa.fold, minlength=5).tolist() == [2, 2, 2, 2, 2]


def test_ties_share_folds():
    fed = make_fed(5, n_h=1, seed=6)
    vals = np.array([1.0, 1.0, 1.0, 2.0, 3.0])
    spec = compute_thresholds(fed, None, 2, values=vals)
    fa = stratified_partition(fed, spec, values=vals)
    assert np.array_equal(fa.fold, [0, 0, 0, 1, 1])


def test_degenerate_covariate_rejected():
    fed = make_fed(20, n_h=1, seed=7)
    with pytest.raises(DegenerateStratificationError):
        compute_thresholds(fed, None, 3, values=np.ones(20))
    with pytest.raises(DegenerateStratificationError):
        compute_thresholds(fed, None, 3, values=np.repeat([1.0, 2.0], 10))


def test_thresholds_index_and_values_are_exclusive():
    fed = make_fed(10, n_h=1, seed=5)
    with pytest.raises(ValueError):
        compute_thresholds(fed, 1, 2, values=np.arange(10.0))
    with pytest.raises(ValueError):
        compute_thresholds(fed, None, 2)


def test_spec_validation():
    with pytest.raises(ValueError):
        StratificationSpec(covariate_index=1, thresholds=np.array([0.0, 1.0, 2.0]), k=2)
    with pytest.raises(ValueError):
        StratificationSpec(
            covariate_index=11, thresholds=np.array([-np.inf, 1.0, np.inf]), k=2
        )
    with pytest.raises(ValueError):
        StratificationSpec(
            covariate_index=1, thresholds=np.array([-np.inf, 2.0, 1.0, np.inf]), k=3
        )


@settings(max_examples=50, deadline=None)
@given(
    n=st.integers(5, 200),
    k=st.integers(2, 7),
    seed=st.integers(0, 2**32 - 1),
    grid=st.booleans(),
)
def test_membership_matches_interval_oracle(n, k, seed, grid):
    fed = make_fed(n, n_h=2, seed=seed)
    rng = stream(seed, "vals")
    # a coarse grid forces heavy ties, the interesting case for quantile cuts
    vals = np.round(rng.uniform(-2, 2, n), 1) if grid else rng.standard_normal(n)
    try:
        spec = compute_thresholds(fed, None, k, values=vals)
    except DegenerateStratificationError:
        assert np.unique(vals).size < k
        return
    fa = stratified_partition(fed, spec, values=vals)
    assert np.array_equal(fa.fold, quantile_fold_oracle(vals, spec.thresholds))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(10, 150), cov=st.integers(1, 10), seed=st.integers(0, 2**32 - 1))
def test_stratified_duplicates_never_split(n, cov, seed):
    fed = make_fed(n, n_h=4, seed=seed, n_dup=n)
    spec = compute_thresholds(fed, cov, 5)
    fa = stratified_partition(fed, spec)
    assert audit(fed, fa).def3_satisfied


def test_fold_sizes_roughly_balanced_on_continuous_data():
    fed = make_fed(1000, n_h=5, seed=8)
    for cov in range(1, 11):
        fa = stratified_partition(fed, compute_thresholds(fed, cov, 5))
        counts = np.bincount(fa.fold, minlength=5)
        assert counts.min() >= 180  # 200 each on untied data


def test_unbiased_partition_consistent():
    rec = Records(
        x=stream(9, "x").standard_normal((60, 10)),
        y=np.zeros(60, np.int8),
        individual_id=np.arange(60, dtype=np.int64),
    )
    fed, fa = unbiased_partition(rec, 3, 5, stream(9, "u"))
    assert fed.n_total == 60 and fa.fold.shape == (60,)
    assert audit(fed, fa).def3_satisfied  # no duplicates, trivially clean


def test_fold_assignment_validation():
    with pytest.raises(ValueError):
        FoldAssignment(fold=np.array([0, 5]), k=3)
    with pytest.raises(ValueError):
        FoldAssignment(fold=np.array([0]), k=0)


# ----------------------------------------------------------------------- csv


def test_folds_csv_roundtrip(tmp_path):
    fed = make_fed(80, n_h=4, seed=10, n_dup=20)
    fa = random_partition(fed, 5, stream(10, "f"))
    path = tmp_path / "folds.csv"
    dump_folds_csv(fed, fa, path)
    assert path.read_text().splitlines()[0] == ",".join(FOLDS_HEADER)
    back = load_folds_csv(fed, path)
    assert np.array_equal(back.fold, fa.fold)
    assert back.k == fa.k


def test_folds_csv_rejects_foreign_dataset(tmp_path):
    fed = make_fed(30, n_h=2, seed=11)
    fa = random_partition(fed, 3, stream(11, "f"))
    path = tmp_path / "folds.csv"
    dump_folds_csv(fed, fa, path)
    other = make_fed(30, n_h=2, seed=12)
    with pytest.raises(ValueError):
        load_folds_csv(other, path)


def test_folds_csv_rejects_truncation(tmp_path):
    fed = make_fed(30, n_h=2, seed=13)
    fa = random_partition(fed, 3, stream(13, "f"))
    path = tmp_path / "folds.csv"
    dump_folds_csv(fed, fa, path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(ValueError):
        load_folds_csv(fed, path)
