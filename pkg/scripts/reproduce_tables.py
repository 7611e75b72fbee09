"""Monte Carlo reproduction of the four simulation tables.

    python3 scripts/reproduce_tables.py --table 2 --reps 200 --out-dir results/

Each scenario is written as CSV plus an aligned text table.  The default
replication count (1000) takes hours on one core for tables 2-4; lower --reps
for a quick look.
"""
import argparse
import time
from pathlib import Path

from adaptlq.data import SeedSpec
from adaptlq.simulate import DgpSpec, Family, TestConfig, run_mc

Q = (2, 4, 6)
SETS = ((2, 4), (2, 6))


def table1():
    tests = [TestConfig("mean", Q, SETS), TestConfig("spatial-sign", Q, SETS)]
    grid = {Family.SHIFT_GAUSSIAN: [(0, None), (0.3, 2), (0.1, None)],
            Family.SHIFT_T3: [(0, None), (0.4, 2), (0.1, None)]}
    for family, cells in grid.items():
        for delta, r in cells:
            yield DgpSpec(family, 100, 100, delta=delta, sparsity_r=r), tests


def table2():
    tests = [TestConfig("kendall", Q, SETS, B=100)]
    cells = [(0, None), (0.5, 3), (0.3, 4), (0.25, 6), (0.15, 10), (0.05, None)]
    for family in (Family.BANDED_COV_GAUSSIAN, Family.BANDED_COV_T3):
        for delta, r in cells:
            yield DgpSpec(family, 100, 50, delta=delta, sparsity_r=r), tests


def table3():
    tests = [TestConfig("linreg", Q, SETS, B=100)]
    for (n, p), dense in (((100, 50), 0.05), ((200, 100), 0.035)):
        for delta, r in ((0, None), (0.25, 2), (dense, None)):
            for rho in (0.0, 0.5):
                yield DgpSpec(Family.AR1_LINREG, n, p, delta=delta, sparsity_r=r, rho=rho), tests


def table4():
    tests = [TestConfig("two-sample-spatial-sign", Q, SETS, B=100)]
    grid = {Family.TWO_SAMPLE_GAUSSIAN: [(0, None), (1, 2), (0.3, None)],
            Family.TWO_SAMPLE_T3: [(0, None), (1, 2), (0.5, None)]}
    for family, cells in grid.items():
        for delta, r in cells:
            yield DgpSpec(family, 50, 100, m=50, delta=delta, sparsity_r=r), tests


TABLES = {1: table1, 2: table2, 3: table3, 4: table4}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--table", type=int, choices=sorted(TABLES), required=True)
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    args = ap.parse_args(argv)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for k, (dgp, tests) in enumerate(TABLES[args.table]()):
        t0 = time.perf_counter()
        rep = run_mc(dgp, tests, args.reps, SeedSpec(args.seed, k), n_jobs=args.threads)
        stem = args.out_dir / f"table{args.table}_{k:02d}"
        rep.to_csv(stem.with_suffix(".csv"))
        text = rep.to_text()
        stem.with_suffix(".txt").write_text(text + "\n")
        print(text)
        print(f"({time.perf_counter() - t0:.0f}s)\n", flush=True)


if __name__ == "__main__":
    main()
