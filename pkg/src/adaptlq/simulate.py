"""Data-generating processes and the Monte Carlo size/power harness."""
from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import PairedSample, SampleMatrix, SeedSpec, TwoSampleData, derive_stream
from .exceptions import LqError
from .kernels import KernelSpec, Problem
from .procedure import lq_test


class Family(enum.Enum):
    SHIFT_GAUSSIAN = "shift-gaussian"
    SHIFT_T3 = "shift-t3"
    BANDED_COV_GAUSSIAN = "banded-gaussian"
    BANDED_COV_T3 = "banded-t3"
    AR1_LINREG = "ar1-linreg"
    TWO_SAMPLE_GAUSSIAN = "two-sample-gaussian"
    TWO_SAMPLE_T3 = "two-sample-t3"


_T3 = {Family.SHIFT_T3, Family.BANDED_COV_T3, Family.TWO_SAMPLE_T3}
_BANDED = {Family.BANDED_COV_GAUSSIAN, Family.BANDED_COV_T3}
_TWO = {Family.TWO_SAMPLE_GAUSSIAN, Family.TWO_SAMPLE_T3}


@dataclass(frozen=True)
class DgpSpec:
    """One simulation scenario.

    `sparsity_r` is the number of leading components carrying the signal
    (None means all p).  For the banded families `delta` is the within-block
    correlation; for the shift and two-sample families it is the mean shift;
    for ar1-linreg it is the size of the nonzero coefficients.
    """

    family: Family
    n: int
    p: int
    delta: float = 0.0
    sparsity_r: int | None = None
    m: int | None = None
    rho: float = 0.0
    df: int = 3

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.n < 1 or self.p < 1:
            raise LqError("n and p must be positive")
        r = self.p if self.sparsity_r is None else self.sparsity_r
        if not 0 <= r <= self.p:
            raise LqError(f"sparsity_r must lie in [0, p], got {r}")
        object.__setattr__(self, "sparsity_r", r)
        if not abs(self.rho) < 1:
            raise LqError("|rho| must be < 1")
        if self.family in _BANDED and not 0 <= self.delta < 1:
            raise LqError("banded covariance needs delta in [0, 1)")
        if self.family in _TWO:
            if self.m is None:
                object.__setattr__(self, "m", self.n)
            elif self.m < 1:
                raise LqError("m must be positive")
        if self.df != 3:
            raise LqError("only t with 3 degrees of freedom is supported")

    def describe(self) -> str:
        parts = [self.family.value, f"n={self.n}"]
        if self.family in _TWO:
            parts.append(f"m={self.m}")
        parts += [f"p={self.p}", f"delta={self.delta:g}", f"r={self.sparsity_r}"]
        if self.family is Family.AR1_LINREG:
            parts.append(f"rho={self.rho:g}")
        return " ".join(parts)


def banded_sqrt(delta: float, r: int, p: int) -> np.ndarray:
    """Symmetric square root of (1-delta) I + delta 1{a<=r, b<=r}, in closed form.

    The leading block (1-delta) I + delta J has eigenvalue 1-delta+delta*r on
    the all-ones direction and 1-delta elsewhere.
    """
    lo = math.sqrt(1.0 - delta)
    S = lo * np.eye(p)
    if r > 0:
        hi = math.sqrt(1.0 - delta + delta * r)
        S[:r, :r] += (hi - lo) / r
    return S


def banded_cov(delta: float, r: int, p: int) -> np.ndarray:
    sigma = (1.0 - delta) * np.eye(p)
    sigma[:r, :r] += delta
    return sigma


def _noise(family: Family, rng: np.random.Generator, shape) -> np.ndarray:
    if family in _T3:
        return rng.standard_t(3, size=shape)
    return rng.standard_normal(shape)


def _shift(dgp: DgpSpec) -> np.ndarray:
    mu = np.zeros(dgp.p)
    mu[:dgp.sparsity_r] = dgp.delta
    return mu


def sample(dgp: DgpSpec, seed: SeedSpec):
    """One draw of the scenario: SampleMatrix, PairedSample or TwoSampleData."""
    rng = seed.generator()
    fam, n, p, r = dgp.family, dgp.n, dgp.p, dgp.sparsity_r
    if fam in (Family.SHIFT_GAUSSIAN, Family.SHIFT_T3):
        return SampleMatrix(_noise(fam, rng, (n, p)) + _shift(dgp))
    if fam in _BANDED:
        # Z @ banded_sqrt(...) without forming the p x p matrix
        Z = _noise(fam, rng, (n, p))
        lo = math.sqrt(1.0 - dgp.delta)
        hi = math.sqrt(1.0 - dgp.delta + dgp.delta * r)
        out = lo * Z
        if r > 0:
            out[:, :r] += ((hi - lo) / r) * Z[:, :r].sum(axis=1, keepdims=True)
        return SampleMatrix(out)
    if fam is Family.AR1_LINREG:
        Z = rng.standard_normal((n, p))
        X = np.empty((n, p))
        X[:, 0] = Z[:, 0]
        scale = math.sqrt(1.0 - dgp.rho ** 2)
        for j in range(1, p):
            X[:, j] = dgp.rho * X[:, j - 1] + scale * Z[:, j]
        eps = rng.standard_normal(n)
        return PairedSample(SampleMatrix(X), X @ _shift(dgp) + eps)
    if fam in _TWO:
        X = _noise(fam, rng, (n, p)) + _shift(dgp)
        Y = _noise(fam, rng, (dgp.m, p))
        return TwoSampleData(SampleMatrix(X), SampleMatrix(Y))
    raise LqError(f"unhandled family {fam}")


@dataclass(frozen=True)
class TestConfig:
    """One test applied to every replication: single-q tests plus adaptive sets."""

    __test__ = False  # keep pytest from collecting this class

    problem: Problem
    q_values: tuple = (2, 4, 6)
    q_sets: tuple = ((2, 4), (2, 6))
    method: str | None = None
    B: int = 100
    alpha: float = 0.05
    null_param: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "problem", Problem(self.problem))
        object.__setattr__(self, "q_values", tuple(sorted(self.q_values)))
        object.__setattr__(self, "q_sets", tuple(tuple(sorted(s)) for s in self.q_sets))
        for s in self.q_sets:
            if not set(s) <= set(self.q_values):
                raise LqError(f"q set {s} uses q values outside {self.q_values}")

    def spec(self) -> KernelSpec:
        return KernelSpec(self.problem, self.null_param)

    def columns(self) -> list:
        cols = [f"q={q}" for q in self.q_values]
        return cols + ["q=" + ",".join(map(str, s)) for s in self.q_sets]


def _decisions(data, test: TestConfig, seed: SeedSpec) -> dict:
    res = lq_test(data, test.spec(), test.q_values, test.method, test.B, seed,
                  test.alpha, test.q_sets)
    out = {f"q={q}": res.studentized[q].pvalue <= test.alpha for q in test.q_values}
    for s, a in res.adaptive.items():
        out["q=" + ",".join(map(str, s))] = a.reject
    return out


@dataclass
class MonteCarloReport:
    dgp: DgpSpec | None
    tests: list
    reps: int
    seed: SeedSpec
    rejection_rates: dict          # (row, column) -> rate
    mc_standard_errors: dict       # (row, column) -> standard error
    title: str = ""

    def rate(self, row: str, column: str) -> float:
        return self.rejection_rates[(row, column)]

    def rows(self) -> list:
        seen = []
        for row, _ in self.rejection_rates:
            if row not in seen:
                seen.append(row)
        return seen

    def columns(self) -> list:
        seen = []
        for _, col in self.rejection_rates:
            if col not in seen:
                seen.append(col)
        return seen

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["row", "test", "rate", "se", "reps"])
            for (row, col), rate in self.rejection_rates.items():
                w.writerow([row, col, f"{rate:.6f}",
                            f"{self.mc_standard_errors[(row, col)]:.6f}", self.reps])

    def to_text(self) -> str:
        """Aligned table with rejection rates in percent, one row per test."""
        cols = self.columns()
        rows = self.rows()
        w0 = max([len("test")] + [len(r) for r in rows])
        widths = [max(len(c), 6) for c in cols]
        head = "test".ljust(w0) + " | " + " | ".join(c.rjust(w) for c, w in zip(cols, widths))
        lines = []
        if self.title:
            lines.append(self.title)
        if self.dgp is not None:
            lines.append(self.dgp.describe())
        lines.append(f"reps={self.reps} seed={self.seed.master_seed}")
        lines += [head, "-" * len(head)]
        for row in rows:
            cells = []
            for c, w in zip(cols, widths):
                v = self.rejection_rates.get((row, c))
                cells.append(("" if v is None else f"{100 * v:.1f}").rjust(w))
            lines.append(row.ljust(w0) + " | " + " | ".join(cells))
        return "\n".join(lines)


def _replicate(dgp: DgpSpec, tests, seed: SeedSpec, k: int) -> dict:
    rep_seed = derive_stream(seed, k)
    try:
        data = sample(dgp, derive_stream(rep_seed, 0))
        out = {}
        for j, test in enumerate(tests):
            for col, rej in _decisions(data, test, derive_stream(rep_seed, 1 + j)).items():
                out[(test.problem.value, col)] = rej
        return out
    except Exception as exc:
        raise LqError(f"replication {k} failed: {exc}") from exc


def _replicate_block(args):
    dgp, tests, seed, ks = args
    counts: dict = {}
    for k in ks:
        for key, rej in _replicate(dgp, tests, seed, k).items():
            counts[key] = counts.get(key, 0) + int(rej)
    return counts


def _report(dgp, tests, reps, seed, counts, order, title="") -> MonteCarloReport:
    rates = {key: counts.get(key, 0) / reps for key in order}
    ses = {key: math.sqrt(r * (1 - r) / reps) for key, r in rates.items()}
    return MonteCarloReport(dgp, list(tests), reps, seed, rates, ses, title)


def run_mc(dgp: DgpSpec, tests, reps: int, seed: SeedSpec, n_jobs: int = 1,
           title: str = "") -> MonteCarloReport:
    """Rejection frequencies of each test over `reps` independent replications.

    Replication k draws everything from derive_stream(seed, k), and only
    integer rejection counts are aggregated, so the report does not depend on
    n_jobs or scheduling.
    """
    if reps < 1:
        raise LqError("reps must be >= 1")
    tests = list(tests)
    order = [(t.problem.value, c) for t in tests for c in t.columns()]
    if n_jobs <= 1:
        counts = _replicate_block((dgp, tests, seed, range(reps)))
    else:
        blocks = [(dgp, tests, seed, range(i, reps, n_jobs)) for i in range(n_jobs)]
        counts = {}
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            for part in pool.map(_replicate_block, blocks):
                for key, v in part.items():
                    counts[key] = counts.get(key, 0) + v
    return _report(dgp, tests, reps, seed, counts, order, title)


def subsample_experiment(data: TwoSampleData, subsample_n: int, reps: int, tests,
                         seed: SeedSpec, null_group: int = 2) -> MonteCarloReport:
    """Size and power by repeated subsampling from two observed groups.

    Size: two disjoint subsamples of size subsample_n from group `null_group`.
    Power: one subsample from each group.  Rows of the report are
    "size" and "power".
    """
    if null_group not in (1, 2):
        raise LqError("null_group must be 1 or 2")
    groups = (data.first.values, data.second.values)
    null = groups[null_group - 1]
    if 2 * subsample_n > null.shape[0]:
        raise LqError(f"size run needs 2 x {subsample_n} rows but group {null_group} "
                      f"has {null.shape[0]}")
    for g, arr in enumerate(groups, start=1):
        if subsample_n > arr.shape[0]:
            raise LqError(f"subsample_n={subsample_n} exceeds group {g} size {arr.shape[0]}")
    tests = list(tests)
    counts: dict = {}
    order = []
    for row in ("size", "power"):
        order += [(row, f"{t.problem.value} {c}") for t in tests for c in t.columns()]
    for row_idx, row in enumerate(("size", "power")):
        row_seed = derive_stream(seed, row_idx)
        for k in range(reps):
            rep_seed = derive_stream(row_seed, k)
            rng = derive_stream(rep_seed, 0).generator()
            if row == "size":
                idx = rng.choice(null.shape[0], 2 * subsample_n, replace=False)
                a, b = null[idx[:subsample_n]], null[idx[subsample_n:]]
            else:
                a = groups[0][rng.choice(groups[0].shape[0], subsample_n, replace=False)]
                b = groups[1][rng.choice(groups[1].shape[0], subsample_n, replace=False)]
            sub = TwoSampleData(SampleMatrix(a), SampleMatrix(b))
            for j, test in enumerate(tests):
                try:
                    dec = _decisions(sub, test, derive_stream(rep_seed, 1 + j))
                except Exception as exc:
                    raise LqError(f"{row} replication {k} failed: {exc}") from exc
                for col, rej in dec.items():
                    key = (row, f"{test.problem.value} {col}")
                    counts[key] = counts.get(key, 0) + int(rej)
    return _report(None, tests, reps, seed, counts, order, "subsampling experiment")
