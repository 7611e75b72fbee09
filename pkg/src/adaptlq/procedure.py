"""End-to-end single-q and adaptive tests on one dataset."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adaptive import AdaptiveResult, combine
from .data import SeedSpec
from .exceptions import DegenerateVarianceError, LqError
from .kernels import Arity, KernelSpec
from .ustat import (LqStatistic, Variant, check_q, monotone_levels, order1_levels,
                    sample_sizes, statistic_from_levels)
from .variance import (Method, PermutationPlan, StudentizedResult, analytic_variances,
                       default_method, empirical_pvalue, permutation_null,
                       studentize_monotone, studentize_r1)


@dataclass
class LqTestResult:
    spec: KernelSpec
    method: Method
    statistics: dict            # q -> LqStatistic
    studentized: dict           # q -> StudentizedResult
    adaptive: dict = field(default_factory=dict)  # q_set tuple -> AdaptiveResult
    null_draws: np.ndarray | None = None

    @property
    def pvalues(self) -> dict:
        return {q: r.pvalue for q, r in self.studentized.items()}


def resolve_method(spec: KernelSpec, method) -> Method:
    if method is None or method == "auto":
        return default_method(spec)
    method = Method(method)
    one_sample_r1 = spec.order_r == 1 and spec.sample_arity is Arity.ONE_SAMPLE
    if method is Method.ANALYTIC_R1 and not one_sample_r1:
        raise LqError(f"analytic variance is only available for order-one one-sample "
                      f"kernels, not {spec.problem.value}")
    return method


def lq_test(data, spec: KernelSpec, q_values=(2, 6), method=None, B: int = 100,
            seed: SeedSpec | None = None, alpha: float = 0.05, q_sets=None) -> LqTestResult:
    """Studentised statistics for every q plus adaptive combinations over q_sets."""
    q_values = sorted({check_q(q) for q in q_values})
    method = resolve_method(spec, method)
    seed = seed if seed is not None else SeedSpec(0)
    qmax = max(q_values)
    sizes = sample_sizes(data)
    stats: dict = {}
    studs: dict = {}
    draws = None
    if method is Method.ANALYTIC_R1:
        levels = order1_levels(data, spec, qmax)
        if sizes[0] < qmax:
            raise LqError(f"need n >= q = {qmax}, got n = {sizes[0]}")
        sigmas = analytic_variances(data, spec, q_values)
        for q in q_values:
            stats[q] = statistic_from_levels(levels, spec, sizes, q, Variant.FULL)
            if not sigmas[q] > 0 and not (sigmas[q] == 0.0 and stats[q].value == 0.0):
                raise DegenerateVarianceError(
                    f"analytic variance estimate for q={q} is {sigmas[q]:.3g}; "
                    "try the permutation variance")
            studs[q] = studentize_r1(stats[q], sigmas[q], sizes[0])
    else:
        if min(sizes) < qmax * spec.order_r:
            raise LqError(f"need sample size(s) >= q*r = {qmax * spec.order_r}, got {sizes}")
        levels = monotone_levels(data, spec, qmax)
        plan = PermutationPlan(B=B, seed=seed)
        draws = permutation_null(data, spec, q_values, plan)
        for j, q in enumerate(q_values):
            stats[q] = statistic_from_levels(levels, spec, sizes, q, Variant.MONOTONE)
            V = float(np.var(draws[:, j], ddof=1))
            if not V > 0 and stats[q].value != 0.0:
                raise DegenerateVarianceError(
                    f"permutation variance for q={q} is {V:.3g}: all {B} permuted "
                    "statistics are equal")
            res = studentize_monotone(stats[q], V)
            if method is Method.PERMUTATION_EMPIRICAL:
                res = StudentizedResult(q, res.statistic_T, V,
                                        empirical_pvalue(stats[q].value, draws[:, j]),
                                        Method.PERMUTATION_EMPIRICAL)
            studs[q] = res
    result = LqTestResult(spec, method, stats, studs, null_draws=draws)
    for qs in q_sets or ():
        qs = tuple(sorted(qs))
        missing = [q for q in qs if q not in studs]
        if missing:
            raise LqError(f"q values {missing} of set {qs} were not computed")
        result.adaptive[qs] = combine({q: studs[q].pvalue for q in qs}, alpha)
    return result


__all__ = ["lq_test", "LqTestResult", "resolve_method", "AdaptiveResult", "LqStatistic"]
