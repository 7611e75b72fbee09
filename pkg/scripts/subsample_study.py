"""Size and power of the two-sample spatial-sign test by repeated subsampling.

    python3 scripts/subsample_study.py rocks.csv metal.csv --size 40 --reps 1000

Size uses two disjoint subsamples of the null group; power draws one
subsample from each group.
"""
import argparse

from adaptlq.data import SeedSpec, TwoSampleData, load_csv
from adaptlq.simulate import TestConfig, subsample_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("group1")
    ap.add_argument("group2")
    ap.add_argument("--header", action="store_true")
    ap.add_argument("--size", type=int, default=40)
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--null-group", type=int, choices=(1, 2), default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    data = TwoSampleData(load_csv(args.group1, has_header=args.header),
                         load_csv(args.group2, has_header=args.header))
    test = TestConfig("two-sample-spatial-sign", (2, 4, 6), ((2, 4), (2, 6)), B=100)
    rep = subsample_experiment(data, args.size, args.reps, [test], SeedSpec(args.seed),
                               null_group=args.null_group)
    print(rep.to_text())


if __name__ == "__main__":
    main()
