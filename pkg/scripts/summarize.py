#!/usr/bin/env python3
"""Print headline numbers from a results directory.

Usage: scripts/summarize.py [RESULTS_DIR]

Reads whichever of oracle.txt, fig2.csv, fig3.csv, fig4.csv,
fig4_summary.csv exist under RESULTS_DIR (default results/) and prints a
short report: the optimal-accuracy constant, final learning-curve values
and the random-vs-unbiased gap, per-strategy fig3 means, and the fig4
Pearson correlation.
"""

import csv
import math
import sys
from collections import defaultdict
from pathlib import Path


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        return list(reader)


def summarize_oracle(out):
    text = (out / "oracle.txt").read_text(encoding="utf-8").strip()
    value = float(text.split(",")[1])
    print(f"optimal accuracy        {value:.4f}")


def summarize_fig2(out):
    rows = read_rows(out / "fig2.csv")
    final = {}
    last_iter = max(int(r[0]) for r in rows)
    for it, strategy, phase, acc in rows:
        if phase == "valid" and int(it) == last_iter:
            final[strategy] = float(acc)
    print(f"fig2 final validation accuracy (iteration {last_iter}):")
    for strategy in ("unbiased", "random", "stratified_x1"):
        print(f"  {strategy:<16} {final[strategy]:.4f}")
    print(f"  random - unbiased gap  {final['random'] - final['unbiased']:+.4f}")


def summarize_fig3(out):
    rows = read_rows(out / "fig3.csv")
    acc = defaultdict(list)
    for _, strategy, a in rows:
        acc[strategy].append(float(a))
    mean = {s: sum(v) / len(v) for s, v in acc.items()}
    unb = mean["unbiased"]
    n_sims = len(acc["unbiased"])
    print(f"fig3 mean final accuracy over {n_sims} simulations:")
    order = ["unbiased", "random"] + [f"stratified_x{i}" for i in range(1, 11)]
    for strategy in order:
        if strategy in mean:
            delta = mean[strategy] - unb
            print(f"  {strategy:<16} {mean[strategy]:.4f}  (vs unbiased {delta:+.4f})")


def summarize_fig4(out):
    rows = read_rows(out / "fig4.csv")
    usable = sum(1 for r in rows if not math.isnan(float(r[3])))
    with open(out / "fig4_summary.csv", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        r = float(next(reader)[0])
    print(f"fig4 importance vs accuracy-ratio: pearson r = {r:+.4f} "
          f"({usable}/{len(rows)} usable points)")


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("results")
    sections = [
        ("oracle.txt", summarize_oracle),
        ("fig2.csv", summarize_fig2),
        ("fig3.csv", summarize_fig3),
        ("fig4.csv", summarize_fig4),
    ]
    seen = False
    for name, fn in sections:
        if (out / name).exists():
            fn(out)
            seen = True
    if not seen:
        print(f"no result files found under {out}/", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
