import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adaptlq.data import PairedSample, SampleMatrix, SeedSpec, TwoSampleData
from adaptlq.exceptions import DegenerateVarianceError, LqError
from adaptlq.kernels import KernelSpec, Problem, component_set, eval_kernel
from adaptlq.ustat import LqStatistic, Variant, dp_monotone
from adaptlq.variance import (Method, PermutationPlan, Scheme, analytic_variance_r1,
                              analytic_variances, apply_permutation, draw_permutation,
                              empirical_pvalue, normal_quantile, permutation_null,
                              permutation_variance, permute, studentize_monotone,
                              studentize_r1, upper_tail)


def _stat(value, q=2, problem=Problem.MEAN, variant=Variant.FULL):
    return LqStatistic(q, variant, value, 1.0, KernelSpec(problem))


def brute_sigma(X, spec, q):
    """Direct enumeration over L^2 and ordered distinct q-tuples of centered products."""
    n, p = X.shape
    comps = component_set(spec, p)
    H = np.array([[eval_kernel(spec, l, (X[i],)) for l in comps] for i in range(n)])
    H = H - H.mean(axis=0)
    total = 0.0
    for a in range(len(comps)):
        for b in range(len(comps)):
            for idx in itertools.permutations(range(n), q):
                total += math.prod(H[i, a] * H[i, b] for i in idx)
    return total / math.perm(n, q)


def test_alternating_example():
    x = SampleMatrix(np.array([[1.0], [-1.0], [1.0], [-1.0]]))
    assert analytic_variance_r1(x, KernelSpec(Problem.MEAN), 2) == pytest.approx(1.0, rel=1e-14)


def test_constant_rows_degenerate():
    x = SampleMatrix(np.ones((6, 3)))
    with pytest.raises(DegenerateVarianceError, match="permutation"):
        analytic_variance_r1(x, KernelSpec(Problem.MEAN), 2)


@pytest.mark.parametrize("problem", [Problem.MEAN, Problem.SPATIAL_SIGN, Problem.COVARIANCE])
@pytest.mark.parametrize("n,q", [(6, 2), (6, 4), (5, 2)])
def test_analytic_matches_brute(rng, problem, n, q):
    X = rng.standard_normal((n, 3)) + 0.2
    spec = KernelSpec(problem)
    got = analytic_variances(SampleMatrix(X), spec, [q])[q]
    assert got == pytest.approx(brute_sigma(X, spec, q), rel=1e-10, abs=1e-14)


def test_analytic_chunking_irrelevant(rng):
    X = SampleMatrix(rng.standard_normal((30, 8)))
    spec = KernelSpec(Problem.COVARIANCE)
    a = analytic_variances(X, spec, [2, 4, 6])
    b = analytic_variances(X, spec, [2, 4, 6], chunk_cells=500)
    for q in a:
        assert a[q] == pytest.approx(b[q], rel=1e-12)


@given(st.permutations(list(range(8))))
def test_analytic_row_permutation_invariant(perm):
    X = np.sin(np.arange(32, dtype=float).reshape(8, 4) * 0.9)
    spec = KernelSpec(Problem.SPATIAL_SIGN)
    a = analytic_variances(SampleMatrix(X), spec, [2, 4])
    b = analytic_variances(SampleMatrix(X[list(perm)]), spec, [2, 4])
    for q in (2, 4):
        assert b[q] == pytest.approx(a[q], rel=1e-10)


def test_studentize_r1_examples():
    assert studentize_r1(_stat(0.0), 4.0, 100).pvalue == 0.5
    res = studentize_r1(_stat(0.02), 4.0, 100)
    assert res.statistic_T == pytest.approx(1 / math.sqrt(2), rel=1e-12)
    assert res.method is Method.ANALYTIC_R1
    with pytest.raises(DegenerateVarianceError):
        studentize_r1(_stat(0.02), 0.0, 100)
    with pytest.raises(DegenerateVarianceError):
        studentize_r1(_stat(0.0), -1.0, 100)


def test_zero_statistic_zero_variance_is_null():
    # constant data: nothing to studentize, report the null centre
    assert studentize_r1(_stat(0.0), 0.0, 50).pvalue == 0.5
    assert studentize_monotone(_stat(0.0, variant=Variant.MONOTONE), 0.0).statistic_T == 0.0


def test_studentize_monotone_examples():
    assert studentize_monotone(_stat(0.0, variant=Variant.MONOTONE), 3.0).pvalue == 0.5
    res = studentize_monotone(_stat(2.0, variant=Variant.MONOTONE), 4.0)
    assert res.statistic_T == 1.0
    assert res.pvalue == pytest.approx(0.15865525393145707, abs=1e-15)
    with pytest.raises(DegenerateVarianceError):
        studentize_monotone(_stat(1.0, variant=Variant.MONOTONE), 0.0)


@pytest.mark.parametrize("t", [-8.0, -3.0, -1.0, 0.0, 0.5, 1.6448536269514722, 4.0, 9.0])
def test_normal_tail_accuracy(t):
    assert abs(upper_tail(t) - 0.5 * math.erfc(t / math.sqrt(2))) <= 1e-15
    u = 1 - upper_tail(t)
    if 1e-12 < u < 1 - 1e-12:
        assert normal_quantile(u) == pytest.approx(t, abs=1e-9)


def test_empirical_pvalue():
    draws = np.linspace(-1, 1, 100)
    assert empirical_pvalue(5.0, draws) == pytest.approx(1 / 101)
    assert empirical_pvalue(-5.0, draws) == 1.0
    assert abs(empirical_pvalue(float(np.median(draws)), draws) - 0.5) < 0.02
    with pytest.raises(LqError):
        empirical_pvalue(0.0, [])


def test_identity_permutations(rng):
    X = SampleMatrix(rng.standard_normal((5, 3)))
    ident = np.tile(np.arange(5)[:, None], (1, 3))
    assert np.array_equal(apply_permutation(X, Scheme.COLUMNS_INDEPENDENT, ident).values,
                          X.values)
    paired = PairedSample(X, rng.standard_normal(5))
    out = apply_permutation(paired, Scheme.RESPONSE_SHUFFLE, np.arange(5))
    assert np.array_equal(out.response, paired.response)
    two = TwoSampleData(X, SampleMatrix(rng.standard_normal((4, 3))))
    out = apply_permutation(two, Scheme.POOLED_RELABEL, np.arange(9))
    assert np.array_equal(out.first.values, two.first.values)
    assert np.array_equal(out.second.values, two.second.values)


def test_permutation_invariants(rng):
    X = SampleMatrix(rng.standard_normal((12, 4)))
    Xp = permute(X, Scheme.COLUMNS_INDEPENDENT, SeedSpec(3))
    for k in range(4):
        assert np.array_equal(np.sort(Xp.values[:, k]), np.sort(X.values[:, k]))
    two = TwoSampleData(X, SampleMatrix(rng.standard_normal((7, 4))))
    tp = permute(two, Scheme.POOLED_RELABEL, SeedSpec(3))
    assert (tp.n, tp.m) == (12, 7)
    pooled = lambda d: sorted(map(tuple, np.vstack([d.first.values, d.second.values])))
    assert pooled(tp) == pooled(two)
    paired = PairedSample(X, rng.standard_normal(12))
    pp = permute(paired, Scheme.RESPONSE_SHUFFLE, SeedSpec(3))
    assert pp.covariates is paired.covariates
    assert np.array_equal(np.sort(pp.response), np.sort(paired.response))


def test_response_shuffle_with_beta0(rng):
    X = rng.standard_normal((10, 2))
    beta0 = np.array([1.0, -2.0])
    e = rng.standard_normal(10)
    paired = PairedSample(SampleMatrix(X), X @ beta0 + e)
    perm = rng.permutation(10)
    out = apply_permutation(paired, Scheme.RESPONSE_SHUFFLE, perm, beta0=beta0)
    np.testing.assert_allclose(out.response - X @ beta0, e[perm], atol=1e-12)


def test_scheme_compatibility():
    plan = PermutationPlan(B=10, scheme=Scheme.RESPONSE_SHUFFLE)
    with pytest.raises(LqError):
        plan.resolve(KernelSpec(Problem.KENDALL))
    with pytest.raises(LqError):
        PermutationPlan(B=10).resolve(KernelSpec(Problem.MEAN))
    with pytest.raises(LqError):
        PermutationPlan(B=1)
    with pytest.raises(LqError):
        draw_permutation(SampleMatrix(np.ones((3, 2))), Scheme.POOLED_RELABEL,
                         np.random.default_rng(0))


def test_permutation_variance_deterministic(rng):
    X = SampleMatrix(rng.standard_normal((20, 4)))
    spec = KernelSpec(Problem.KENDALL)
    plan = PermutationPlan(B=30, seed=SeedSpec(11))
    v1, d1 = permutation_variance(X, spec, 2, plan)
    v2, d2 = permutation_variance(X, spec, 2, plan)
    assert v1 == v2 and d1.tobytes() == d2.tobytes()
    assert v1 == pytest.approx(np.var(d1, ddof=1))
    draws = permutation_null(X, spec, [2, 4], plan)
    assert draws.shape == (30, 2)
    assert draws[:, 0].tobytes() == d1.tobytes()
    v3, _ = permutation_variance(X, spec, 2, PermutationPlan(B=30, seed=SeedSpec(12)))
    assert v3 != v1


def test_permutation_draws_use_monotone_dp(rng):
    X = SampleMatrix(rng.standard_normal((10, 3)))
    spec = KernelSpec(Problem.KENDALL)
    plan = PermutationPlan(B=3, seed=SeedSpec(5))
    from adaptlq.data import derive_stream
    draws = permutation_null(X, spec, [2], plan)[:, 0]
    for b in range(3):
        Xb = permute(X, Scheme.COLUMNS_INDEPENDENT, derive_stream(plan.seed, b))
        assert draws[b] == pytest.approx(dp_monotone(Xb, spec, 2).value, rel=1e-14)


def test_constant_data_permutation_degenerate():
    X = SampleMatrix(np.ones((10, 3)))
    with pytest.raises(DegenerateVarianceError):
        permutation_variance(X, KernelSpec(Problem.KENDALL), 2, PermutationPlan(B=5))


@pytest.mark.slow
def test_kendall_null_size_small_scale():
    from adaptlq.procedure import lq_test
    from adaptlq.data import derive_stream
    master = SeedSpec(77)
    spec = KernelSpec(Problem.KENDALL)
    rejects = 0
    reps = 1000
    for k in range(reps):
        s = derive_stream(master, k)
        X = SampleMatrix(derive_stream(s, 0).generator().standard_normal((50, 10)))
        res = lq_test(X, spec, (2,), B=100, seed=derive_stream(s, 1))
        rejects += res.studentized[2].pvalue <= 0.05
    assert 0.03 <= rejects / reps <= 0.07
