"""Command-line interface.

Subcommands: oracle, gen, audit, fig2, fig3, fig4. Common flags may follow
the subcommand: --config PATH, --seed U64, --out DIR, --scale REAL,
--threads N. Outputs land in --out (default: current directory); all runs
are bitwise-reproducible from (config, seed), whatever the worker count.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import experiments
from .config import ExperimentConfig, load_config
from .csvio import fmt_float


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--seed", type=int, help="master seed override")
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--scale", type=float, help="shrink experiment sizes by this factor")
    common.add_argument("--threads", type=int, default=1, help="worker processes (default: 1)")

    p = argparse.ArgumentParser(prog="stratcv", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("oracle", parents=[common], help="print the optimal accuracy")
    sub.add_parser("gen", parents=[common], help="dump the simulated federated dataset")
    audit_p = sub.add_parser("audit", parents=[common], help="audit a dumped dataset")
    audit_p.add_argument("--dataset", required=True, help="dataset CSV written by gen")
    audit_p.add_argument("--folds", help="fold CSV for the level-3 check")
    sub.add_parser("fig2", parents=[common], help="learning-curve experiment")
    sub.add_parser("fig3", parents=[common], help="bias-distribution experiment")
    sub.add_parser("fig4", parents=[common], help="importance-correlation experiment")
    return p


def _resolve_config(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.scale is not None:
        cfg = replace(cfg, scale=args.scale)
    return cfg


def main(argv=None):
    args = _build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = _resolve_config(args)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "oracle":
            v = experiments.cmd_oracle(cfg)
            line = f"optimal_accuracy,{fmt_float(v)}"
            (out / "oracle.txt").write_text(line + "\n", encoding="utf-8")
            print(line)
        elif args.command == "gen":
            paths = experiments.cmd_gen(cfg, out)
            print("wrote " + " ".join(str(p) for p in paths))
        elif args.command == "audit":
            report = experiments.cmd_audit(args.dataset, args.folds)
            (out / "audit_report.txt").write_text(report.summary() + "\n", encoding="utf-8")
            print(report.summary())
        elif args.command == "fig2":
            rows = experiments.exp_learning_curves(cfg, threads=args.threads)
            experiments.write_fig2_csv(rows, out / "fig2.csv")
            print(f"wrote {out / 'fig2.csv'} ({len(rows)} rows)")
        elif args.command == "fig3":
            rows = experiments.exp_bias_distribution(cfg, threads=args.threads)
            experiments.write_fig3_csv(rows, out / "fig3.csv")
            print(f"wrote {out / 'fig3.csv'} ({len(rows)} rows)")
        elif args.command == "fig4":
            rows, r = experiments.exp_importance_correlation(cfg, threads=args.threads)
            experiments.write_fig4_csv(rows, out / "fig4.csv")
            experiments.write_fig4_summary(r, out / "fig4_summary.csv")
            if r is None:
                print("error: UndefinedCorrelationError: constant importance or ratio",
                      file=sys.stderr)
                return 2
            print(f"wrote {out / 'fig4.csv'} ({len(rows)} rows), pearson_r = {fmt_float(r)}")
    except (ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
