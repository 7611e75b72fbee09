"""Command-line interface: test, simulate, subsample, plan and oracle-check."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import power
from .data import PairedSample, SampleMatrix, SeedSpec, TwoSampleData, load_csv
from .exceptions import LqError
from .kernels import Arity, KernelSpec, Problem
from .procedure import lq_test
from .simulate import DgpSpec, Family, TestConfig, run_mc, subsample_experiment
from .ustat import (Variant, brute_force_u, brute_force_u_monotone, dp_monotone,
                    dp_order1_full, two_sample_brute, two_sample_dp)

SEED_ENV = "ADAPTLQ_SEED"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(LqError):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _seed(args) -> int:
    return _default_seed() if args.seed is None else args.seed


def _q_list(text: str) -> list:
    try:
        qs = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad q list {text!r}") from None
    if not qs:
        raise argparse.ArgumentTypeError("empty q list")
    return qs


def _threads(args) -> int:
    return args.threads if args.threads else (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# test


def _load_vector(path, p: int) -> np.ndarray:
    v = load_csv(path).values.ravel()
    if v.shape != (p,):
        raise UsageError(f"{path}: expected {p} values, found {v.size}")
    return v


def _build_data(args, spec: KernelSpec):
    first = load_csv(args.input, has_header=args.header)
    if spec.sample_arity is Arity.TWO_SAMPLE:
        if args.input2 is None:
            raise UsageError(f"{spec.problem.value} is a two-sample problem: pass --input2")
        return TwoSampleData(first, load_csv(args.input2, has_header=args.header))
    if args.input2 is not None:
        raise UsageError(f"{spec.problem.value} is a one-sample problem: drop --input2")
    if spec.problem is Problem.LINREG:
        if args.response_col is None:
            raise UsageError("linreg needs --response-col K (1-based column of the response)")
        k = args.response_col
        if not 1 <= k <= first.p:
            raise UsageError(f"--response-col {k} outside 1..{first.p}")
        X = np.delete(first.values, k - 1, axis=1)
        return PairedSample(SampleMatrix(X), first.values[:, k - 1])
    if args.response_col is not None:
        raise UsageError("--response-col only applies to linreg")
    return first


def _build_spec(args, p: int) -> KernelSpec:
    problem = Problem.from_name(args.problem)
    given = {"mu0": args.mu0, "beta0": args.beta0, "sigma0": args.sigma0}
    wanted = {Problem.MEAN: "mu0", Problem.LINREG: "beta0", Problem.COVARIANCE: "sigma0"}
    for name, path in given.items():
        if path is not None and wanted.get(problem) != name:
            raise UsageError(f"--{name} does not apply to {problem.value}")
    if args.band is not None and problem is not Problem.COVARIANCE:
        raise UsageError("--band only applies to covariance")
    null = None
    if problem is Problem.COVARIANCE:
        if args.sigma0 is None and args.band is None:
            raise UsageError("covariance needs --sigma0 PATH or --band d")
        if args.sigma0 is not None:
            null = load_csv(args.sigma0).values
    elif problem in (Problem.MEAN, Problem.LINREG) and given[wanted[problem]] is not None:
        null = _load_vector(given[wanted[problem]], p)
    spec = KernelSpec(problem, null, args.band)
    spec.check_dimension(p)
    return spec


def _finite(x: float):
    return x if math.isfinite(x) else None


def run_test(args) -> dict:
    t0 = time.perf_counter()
    problem = Problem.from_name(args.problem)
    seed = _seed(args)
    probe = KernelSpec(problem)
    data = _build_data(args, probe)
    if isinstance(data, PairedSample):
        p = data.covariates.p
    else:
        p = data.p
    spec = _build_spec(args, p)
    q_values = sorted(set(args.q))
    q_sets = [tuple(q_values)] if args.adaptive else []
    if args.adaptive and len(q_values) < 2:
        raise UsageError("--adaptive needs at least two q values")
    res = lq_test(data, spec, q_values, args.variance, args.permutations, SeedSpec(seed),
                  args.alpha, q_sets)
    per_q = []
    for q in q_values:
        st, sd = res.statistics[q], res.studentized[q]
        per_q.append({
            "q": q,
            "variant": st.variant.value,
            "u": st.value,
            "variance": sd.variance_estimate,
            "t": _finite(sd.statistic_T),
            "pvalue": sd.pvalue,
            "reject": bool(sd.pvalue <= args.alpha),
        })
    adaptive = None
    decision = None
    if args.adaptive:
        a = res.adaptive[tuple(q_values)]
        adaptive = {"q_set": list(a.q_set), "p_ada": a.p_ada,
                    "combined_pvalue": a.combined_pvalue, "reject": bool(a.reject)}
        decision = "reject" if a.reject else "accept"
    elif len(per_q) == 1:
        decision = "reject" if per_q[0]["reject"] else "accept"
    return {
        "problem": problem.value,
        "q": q_values,
        "variance_method": res.method.value,
        "alpha": args.alpha,
        "permutations": args.permutations if res.null_draws is not None else None,
        "per_q": per_q,
        "adaptive": adaptive,
        "decision": decision,
        "seed": seed,
        "timing_seconds": round(time.perf_counter() - t0, 6),
    }


def _print_human(report: dict) -> None:
    err = sys.stderr
    print(f"{report['problem']} ({report['variance_method']} variance), seed {report['seed']}",
          file=err)
    print(f"{'q':>3} {'variant':>9} {'U':>13} {'T':>9} {'p-value':>9} reject", file=err)
    for row in report["per_q"]:
        t = "nan" if row["t"] is None else f"{row['t']:.4f}"
        print(f"{row['q']:>3} {row['variant']:>9} {row['u']:>13.6g} {t:>9} "
              f"{row['pvalue']:>9.4f} {'yes' if row['reject'] else 'no'}", file=err)
    if report["adaptive"]:
        a = report["adaptive"]
        print(f"adaptive {a['q_set']}: combined p = {a['combined_pvalue']:.4f}", file=err)
    if report["decision"]:
        print(f"decision: {report['decision']}", file=err)


def cmd_test(args) -> int:
    report = run_test(args)
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    if args.verbose:
        _print_human(report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate / subsample

_SCENARIOS = {
    # scenario: (gaussian family, t3 family, default n, default p, tests)
    "spatial-sign": (Family.SHIFT_GAUSSIAN, Family.SHIFT_T3, 100, 100,
                     [("mean", "analytic"), ("spatial-sign", "analytic")]),
    "kendall": (Family.BANDED_COV_GAUSSIAN, Family.BANDED_COV_T3, 100, 50,
                [("kendall", "perm")]),
    "linreg": (Family.AR1_LINREG, None, 100, 50, [("linreg", "perm")]),
    "two-sample": (Family.TWO_SAMPLE_GAUSSIAN, Family.TWO_SAMPLE_T3, 50, 100,
                   [("two-sample-spatial-sign", "perm")]),
}


def _sparsity(text: str | None, p: int):
    if text is None or text == "p":
        return p
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"--sparsity must be an integer or 'p', got {text!r}") from None


def _test_configs(args, pairs):
    q_values = sorted(set(args.q))
    if args.q_set:
        q_sets = [tuple(s) for s in args.q_set]
    else:
        q_sets = [s for s in ((2, 4), (2, 6)) if set(s) <= set(q_values)]
    for s in q_sets:
        if not set(s) <= set(q_values):
            raise UsageError(f"--q-set {','.join(map(str, s))} uses q outside --q")
    return [TestConfig(Problem(name), tuple(q_values), tuple(q_sets), method,
                       args.permutations, args.alpha) for name, method in pairs]


def _write_report(report, out: str | None) -> None:
    text = report.to_text()
    print(text)
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        report.to_csv(path)
        path.with_suffix(".txt").write_text(text + "\n", encoding="utf-8")


def cmd_simulate(args) -> int:
    gauss, t3, n0, p0, pairs = _SCENARIOS[args.scenario]
    if args.dist == "t3" and t3 is None:
        raise UsageError(f"scenario {args.scenario} has no t3 variant")
    family = t3 if args.dist == "t3" else gauss
    n = args.n or n0
    p = args.p or p0
    if args.rho is not None and args.scenario != "linreg":
        raise UsageError("--rho only applies to the linreg scenario")
    if args.m is not None and args.scenario != "two-sample":
        raise UsageError("--m only applies to the two-sample scenario")
    rho = 0.5 if args.rho is None and args.scenario == "linreg" else (args.rho or 0.0)
    dgp = DgpSpec(family, n, p, args.delta, _sparsity(args.sparsity, p), args.m, rho)
    report = run_mc(dgp, _test_configs(args, pairs), args.reps, SeedSpec(_seed(args)),
                    n_jobs=_threads(args), title=f"scenario {args.scenario}")
    _write_report(report, args.out)
    return EXIT_OK


def cmd_subsample(args) -> int:
    data = TwoSampleData(load_csv(args.input, has_header=args.header),
                         load_csv(args.input2, has_header=args.header))
    tests = _test_configs(args, [("two-sample-spatial-sign", "perm")])
    report = subsample_experiment(data, args.size, args.reps, tests,
                                  SeedSpec(_seed(args)), args.null_group)
    _write_report(report, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# plan


def cmd_plan(args) -> int:
    plan = power.PowerPlanInput(d=args.d, N=args.N, R=args.R, r=args.r, s=args.s,
                                a=args.a, n=args.n, q_max=args.qmax)
    table = power.delta_table(plan)
    best = power.optimal_q(plan)
    print(f"D = sqrt(N) R / d = {plan.D:.6g}")
    print(f"{'q':>4}  {'delta(q)':>14}")
    for q, dq in table.items():
        mark = "  <- optimal" if q == best else ""
        print(f"{q:>4}  {dq:>14.6g}{mark}")
    print(f"optimal q = {best}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle-check


def _oracle_data(problem: Problem, n: int, p: int, rng: np.random.Generator):
    if problem is Problem.LINREG:
        X = rng.standard_normal((n, p))
        return PairedSample(SampleMatrix(X), X[:, 0] * 0.3 + rng.standard_normal(n))
    if problem in (Problem.TWO_SAMPLE_SPATIAL_SIGN, Problem.TWO_SAMPLE_MEAN):
        return TwoSampleData(SampleMatrix(rng.standard_normal((n, p)) + 0.2),
                             SampleMatrix(rng.standard_normal((n, p))))
    return SampleMatrix(rng.standard_normal((n, p)) + 0.2)


def oracle_pair(data, spec: KernelSpec, q: int):
    """(dp value, brute-force value) for the engine matching the kernel."""
    if spec.sample_arity is Arity.TWO_SAMPLE:
        return two_sample_dp(data, spec, q).value, \
            two_sample_brute(data, spec, q, Variant.MONOTONE).value
    if spec.order_r == 1:
        return dp_order1_full(data, spec, q).value, brute_force_u(data, spec, q).value
    return dp_monotone(data, spec, q).value, brute_force_u_monotone(data, spec, q).value


def relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def cmd_oracle_check(args) -> int:
    problem = Problem.from_name(args.problem)
    spec = KernelSpec(problem)
    spec.check_dimension(args.p)
    rng = SeedSpec(_seed(args)).generator()
    worst = 0.0
    for _ in range(args.trials):
        data = _oracle_data(problem, args.n, args.p, rng)
        worst = max(worst, relative_gap(*oracle_pair(data, spec, args.q)))
    ok = worst <= args.tol
    print(f"{problem.value} n={args.n} p={args.p} q={args.q} trials={args.trials}: "
          f"max relative discrepancy {worst:.3e} -> {'pass' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="adaptlq",
                                 description="Adaptive L_q-norm U-statistic tests.")
    sub = ap.add_subparsers(dest="command", required=True)
    problems = [p.value for p in Problem]

    def seed_arg(p):
        p.add_argument("--seed", type=int, default=None,
                       help=f"master seed (default: ${SEED_ENV} or 0)")

    t = sub.add_parser("test", help="run a test on CSV data, print JSON")
    t.add_argument("--input", required=True)
    t.add_argument("--input2")
    t.add_argument("--header", action="store_true", help="CSV files have a header row")
    t.add_argument("--response-col", type=int)
    t.add_argument("--problem", required=True, choices=problems)
    t.add_argument("--q", type=_q_list, default=[2, 6])
    t.add_argument("--adaptive", action="store_true")
    t.add_argument("--variance", choices=["analytic", "perm", "perm-empirical"])
    t.add_argument("--permutations", type=int, default=100)
    seed_arg(t)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--mu0")
    t.add_argument("--beta0")
    t.add_argument("--sigma0")
    t.add_argument("--band", type=int,
                   help="test only covariances at lag >= BAND (null value zero)")
    t.add_argument("--verbose", action="store_true")
    t.set_defaults(func=cmd_test)

    def mc_args(p):
        p.add_argument("--q", type=_q_list, default=[2, 4, 6])
        p.add_argument("--q-set", type=_q_list, action="append",
                       help="adaptive set, repeatable (default: 2,4 and 2,6)")
        p.add_argument("--reps", type=int, default=1000)
        p.add_argument("--permutations", type=int, default=100)
        p.add_argument("--alpha", type=float, default=0.05)
        seed_arg(p)
        p.add_argument("--out", help="CSV path; the text table goes next to it as .txt")

    s = sub.add_parser("simulate", help="Monte Carlo size/power for a scenario")
    s.add_argument("--scenario", required=True, choices=sorted(_SCENARIOS))
    s.add_argument("--dist", choices=["gaussian", "t3"], default="gaussian")
    s.add_argument("--n", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--p", type=int)
    s.add_argument("--delta", type=float, default=0.0)
    s.add_argument("--sparsity", help="number of signal components, or 'p'")
    s.add_argument("--rho", type=float)
    mc_args(s)
    s.add_argument("--threads", type=int, help="worker processes (default: all cores)")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("subsample", help="size/power by subsampling two observed groups")
    b.add_argument("--input", required=True)
    b.add_argument("--input2", required=True)
    b.add_argument("--header", action="store_true")
    b.add_argument("--size", type=int, default=40, help="subsample size per group")
    b.add_argument("--null-group", type=int, choices=[1, 2], default=2)
    mc_args(b)
    b.set_defaults(func=cmd_subsample)

    pl = sub.add_parser("plan", help="required signal per q and the optimal q")
    pl.add_argument("--d", type=float, required=True)
    pl.add_argument("--N", type=float, required=True)
    pl.add_argument("--R", type=float, required=True)
    pl.add_argument("--s", type=int, default=1)
    pl.add_argument("--r", type=int, default=1)
    pl.add_argument("--a", type=float, default=1.0)
    pl.add_argument("--n", type=int, default=100)
    pl.add_argument("--qmax", type=int, default=20)
    pl.set_defaults(func=cmd_plan)

    o = sub.add_parser("oracle-check", help="compare DP engines with brute force")
    o.add_argument("--problem", required=True, choices=problems)
    o.add_argument("--n", type=int, default=8)
    o.add_argument("--p", type=int, default=3)
    o.add_argument("--q", type=int, default=2)
    o.add_argument("--trials", type=int, default=20)
    o.add_argument("--tol", type=float, default=1e-10)
    seed_arg(o)
    o.set_defaults(func=cmd_oracle_check)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
