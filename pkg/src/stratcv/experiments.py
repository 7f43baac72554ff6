"""The three replication experiments and their CSV exports.

fig2  one simulation, learning curves per strategy (unbiased, random,
      stratified on x1), plus the optimal-accuracy constant
fig3  n_sims simulations under one fixed generator, final validation
      accuracy for unbiased, random and all ten stratifications
fig4  n_datasets fresh generators (eigenvalues U[1,3], Haar basis, outcome
      coefficients U[-5,5]); correlates the stratifying covariate's
      importance in the unbiased model with the stratified/unbiased
      accuracy ratio

Simulations are embarrassingly parallel; derived seed streams are keyed by
("sim", j) or ("ds", d), and rows are assembled in index order, so worker
count and scheduling never change the output bytes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .crossval import run_cv
from .csvio import fmt_float, write_rows
from .datagen import (
    CovarianceSpec,
    OutcomeParams,
    build_covariance,
    build_orthogonal,
    generate_records,
    optimal_accuracy,
)
from .federation import assign_hospitals, audit, dump_dataset_csv, inject_duplicates, load_dataset_csv
from .partition import (
    DegenerateStratificationError,
    compute_thresholds,
    dump_folds_csv,
    load_folds_csv,
    random_partition,
    stratified_partition,
)
from .rng import stream

FIG2_HEADER = ("iteration", "strategy", "phase", "accuracy")
FIG3_HEADER = ("sim", "strategy", "accuracy")
FIG4_HEADER = ("dataset", "covariate", "importance", "accuracy_ratio")

N_COV = 10


class UndefinedCorrelationError(ValueError):
    """Raised when a Pearson correlation is requested for constant input."""


def pearson(xs, ys):
    """Sample Pearson correlation; errors on constant input."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape:
        raise ValueError("inputs must be 1-d and equally long")
    if xs.size < 2:
        raise ValueError("need at least 2 points")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = math.sqrt(float(np.sum(dx * dx)))
    sy = math.sqrt(float(np.sum(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for constant input")
    return float(np.sum(dx * dy)) / (sx * sy)


def _generator_parts(cfg):
    """Fixed generator shared by fig2/fig3: one Haar basis per master seed."""
    orth = build_orthogonal(N_COV - 1, stream(cfg.master_seed, "orth"))
    cov = build_covariance(CovarianceSpec(eigenvalues=np.asarray(cfg.eigenvalues), orthogonal=orth))
    params = OutcomeParams(a=np.asarray(cfg.outcome_a))
    return cov, np.asarray(cfg.mu), params


def _simulate(cfg, cov, mu, params, j):
    """One simulation: records, hospitals, unbiased folds, duplicates, random folds."""
    seed = cfg.master_seed
    records = generate_records(cov, mu, params, cfg.n_gen, stream(seed, "sim", j, "records"))
    fed0 = assign_hospitals(records, cfg.n_h, stream(seed, "sim", j, "hospitals"))
    folds_unb = random_partition(fed0, cfg.k, stream(seed, "sim", j, "folds-unbiased"))
    fed1 = inject_duplicates(fed0, cfg.n_dup, stream(seed, "sim", j, "duplicates"))
    folds_rnd = random_partition(fed1, cfg.k, stream(seed, "sim", j, "folds-random"))
    return fed0, folds_unb, fed1, folds_rnd


def _parallel_map(fn, jobs, threads):
    if threads <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


def exp_learning_curves(cfg, threads=1):
    """Fig2 rows: (iteration, strategy, phase, accuracy), oracle row last."""
    cfg = cfg.scaled()
    cov, mu, params = _generator_parts(cfg)
    fed0, folds_unb, fed1, folds_rnd = _simulate(cfg, cov, mu, params, 0)
    runs = (
        ("unbiased", fed0, folds_unb),
        ("random", fed1, folds_rnd),
        ("stratified_x1", fed1, stratified_partition(fed1, compute_thresholds(fed1, 1, cfg.k))),
    )
    rows = []
    for name, fed, folds in runs:
        cv = run_cv(fed, folds, cfg.train)
        for phase, curve in (("train", cv.mean_train_curve), ("valid", cv.mean_valid_curve)):
            rows.extend((it + 1, name, phase, curve[it]) for it in range(cfg.train.rounds))
    opt = optimal_accuracy(cov, mu, params, cfg.n_mc, stream(cfg.master_seed, "oracle"))
    rows.append((0, "oracle", "optimal", opt))
    return rows


def _fig3_job(arg):
    cfg, j = arg
    cov, mu, params = _generator_parts(cfg)
    fed0, folds_unb, fed1, folds_rnd = _simulate(cfg, cov, mu, params, j)
    out = [
        ("unbiased", run_cv(fed0, folds_unb, cfg.train).mean_final_valid),
        ("random", run_cv(fed1, folds_rnd, cfg.train).mean_final_valid),
    ]
    for i in range(1, N_COV + 1):
        folds = stratified_partition(fed1, compute_thresholds(fed1, i, cfg.k))
        out.append((f"stratified_x{i}", run_cv(fed1, folds, cfg.train).mean_final_valid))
    return j, out


def exp_bias_distribution(cfg, n_sims=None, threads=1):
    """Fig3 rows: (sim, strategy, accuracy), 12 strategies per simulation."""
    cfg = cfg.scaled()
    n_sims = cfg.n_sims if n_sims is None else n_sims
    if n_sims < 1:
        raise ValueError("n_sims must be >= 1")
    results = _parallel_map(_fig3_job, [(cfg, j) for j in range(n_sims)], threads)
    return [(j, name, acc) for j, out in results for name, acc in out]


def _fig4_job(arg):
    cfg, d = arg
    seed = cfg.master_seed
    lam = stream(seed, "ds", d, "eigenvalues").uniform(1.0, 3.0, size=N_COV)
    orth = build_orthogonal(N_COV - 1, stream(seed, "ds", d, "orthogonal"))
    cov = build_covariance(CovarianceSpec(eigenvalues=lam, orthogonal=orth))
    params = OutcomeParams(a=stream(seed, "ds", d, "outcome").uniform(-5.0, 5.0, size=8))
    mu = np.asarray(cfg.mu)
    records = generate_records(cov, mu, params, cfg.n_gen, stream(seed, "ds", d, "records"))
    fed0 = assign_hospitals(records, cfg.n_h, stream(seed, "ds", d, "hospitals"))
    folds_unb = random_partition(fed0, cfg.k, stream(seed, "ds", d, "folds-unbiased"))
    cv_unb = run_cv(fed0, folds_unb, cfg.train)
    acc_unb = cv_unb.mean_final_valid
    imp = cv_unb.importances.mean(axis=0)
    fed1 = inject_duplicates(fed0, cfg.n_dup, stream(seed, "ds", d, "duplicates"))
    out = []
    for i in range(1, N_COV + 1):
        try:
            spec = compute_thresholds(fed1, i, cfg.k)
        except DegenerateStratificationError:
            out.append((f"x{i}", float(imp[i - 1]), float("nan")))
            continue
        acc = run_cv(fed1, stratified_partition(fed1, spec), cfg.train).mean_final_valid
        out.append((f"x{i}", float(imp[i - 1]), acc / acc_unb))
    return d, out


def exp_importance_correlation(cfg, n_datasets=None, threads=1):
    """Fig4 rows (dataset, covariate, importance, accuracy_ratio) and pearson r.

    A covariate too degenerate to stratify yields a NaN ratio row; such rows
    are excluded from the correlation. r is None when the correlation is
    undefined (constant inputs).
    """
    cfg = cfg.scaled()
    n_datasets = cfg.n_datasets if n_datasets is None else n_datasets
    if n_datasets < 2:
        raise ValueError("n_datasets must be >= 2")
    results = _parallel_map(_fig4_job, [(cfg, d) for d in range(n_datasets)], threads)
    rows = [(d, name, imp, ratio) for d, out in results for name, imp, ratio in out]
    ok = [(imp, ratio) for _, _, imp, ratio in rows if not math.isnan(ratio)]
    try:
        r = pearson([v for v, _ in ok], [v for _, v in ok])
    except (UndefinedCorrelationError, ValueError):
        r = None
    return rows, r


def write_fig2_csv(rows, path):
    write_rows(path, FIG2_HEADER, [(str(it), s, p, fmt_float(a)) for it, s, p, a in rows])


def write_fig3_csv(rows, path):
    write_rows(path, FIG3_HEADER, [(str(j), s, fmt_float(a)) for j, s, a in rows])


def write_fig4_csv(rows, path):
    write_rows(
        path,
        FIG4_HEADER,
        [(str(d), c, fmt_float(imp), fmt_float(ratio)) for d, c, imp, ratio in rows],
    )


def write_fig4_summary(r, path):
    write_rows(path, ("pearson_r",), [(fmt_float(r if r is not None else float("nan")),)])


def cmd_oracle(cfg):
    """Optimal accuracy under the config's fixed generator."""
    cfg = cfg.scaled()
    cov, mu, params = _generator_parts(cfg)
    return optimal_accuracy(cov, mu, params, cfg.n_mc, stream(cfg.master_seed, "oracle"))


def cmd_gen(cfg, out_dir):
    """Dump the duplicated simulation-0 dataset plus its two fold files.

    Streams match exp_learning_curves, so the exported records are exactly
    the fig2 dataset. Returns the written paths.
    """
    cfg = cfg.scaled()
    cov, mu, params = _generator_parts(cfg)
    _, _, fed1, folds_rnd = _simulate(cfg, cov, mu, params, 0)
    folds_str = stratified_partition(fed1, compute_thresholds(fed1, 1, cfg.k))
    paths = (
        out_dir / "dataset.csv",
        out_dir / "folds_random.csv",
        out_dir / "folds_stratified_x1.csv",
    )
    dump_dataset_csv(fed1, paths[0])
    dump_folds_csv(fed1, folds_rnd, paths[1])
    dump_folds_csv(fed1, folds_str, paths[2])
    return paths


def cmd_audit(dataset_path, folds_path=None):
    """Audit a dumped dataset (and optional fold file) for duplicate leakage."""
    fed = load_dataset_csv(dataset_path)
    folds = load_folds_csv(fed, folds_path) if folds_path is not None else None
    return audit(fed, folds)
