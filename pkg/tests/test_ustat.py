import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adaptlq.data import PairedSample, SampleMatrix, TwoSampleData
from adaptlq.exceptions import GuardExceeded, LqError
from adaptlq.kernels import KernelSpec, Problem
from adaptlq.ustat import (Variant, brute_force_u, brute_force_u_monotone, dp_monotone,
                           dp_order1_full, two_sample_brute, two_sample_dp)

R1 = [Problem.MEAN, Problem.SPATIAL_SIGN, Problem.COVARIANCE]


def rel(a, b):
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def gaussian(rng, n, p, shift=0.3):
    return SampleMatrix(rng.standard_normal((n, p)) + shift)


def test_mean_example():
    x = SampleMatrix([[1.0], [2.0], [3.0]])
    spec = KernelSpec(Problem.MEAN)
    assert brute_force_u(x, spec, 2).value == pytest.approx(22 / 6, rel=1e-15)
    assert dp_order1_full(x, spec, 2).value == pytest.approx(22 / 6, rel=1e-15)


@pytest.mark.parametrize("q", [2, 4])
def test_zero_data(q):
    z = SampleMatrix(np.zeros((9, 3)))
    spec = KernelSpec(Problem.MEAN)
    for f in (brute_force_u, brute_force_u_monotone, dp_order1_full, dp_monotone):
        assert f(z, spec, q).value == 0.0


def test_constant_data_centered_mean():
    x = SampleMatrix(np.full((6, 2), 1.5))
    spec = KernelSpec(Problem.MEAN, np.array([1.5, 1.5]))
    assert dp_order1_full(x, spec, 2).value == 0.0


def _sgn(v):
    return int(v > 0) - int(v < 0)


def test_kendall_full_against_hand_enumeration(rng):
    X = rng.standard_normal((5, 2))
    total = 0
    count = 0
    for i1, j1, i2, j2 in itertools.permutations(range(5), 4):
        h1 = _sgn(X[i1, 0] - X[j1, 0]) * _sgn(X[i1, 1] - X[j1, 1])
        h2 = _sgn(X[i2, 0] - X[j2, 0]) * _sgn(X[i2, 1] - X[j2, 1])
        total += h1 * h2
        count += 1
    assert count == 120
    u = brute_force_u(SampleMatrix(X), KernelSpec(Problem.KENDALL), 2)
    assert u.n_terms_normalizer == 120
    assert u.value == pytest.approx(total / 120, rel=1e-14)


def test_monotone_equals_full_for_order_one(rng):
    x = gaussian(rng, 6, 3)
    spec = KernelSpec(Problem.MEAN)
    a = brute_force_u(x, spec, 2).value
    b = brute_force_u_monotone(x, spec, 2).value
    assert rel(a, b) <= 1e-13


@pytest.mark.parametrize("problem", R1)
@pytest.mark.parametrize("q", [2, 4])
@pytest.mark.parametrize("n", [5, 8, 10])
def test_order1_dp_matches_brute(rng, problem, q, n):
    spec = KernelSpec(problem)
    for _ in range(3):
        x = gaussian(rng, n, 3)
        assert rel(dp_order1_full(x, spec, q).value, brute_force_u(x, spec, q).value) <= 1e-10


def test_spatial_sign_n20_q4(rng):
    spec = KernelSpec(Problem.SPATIAL_SIGN)
    x = gaussian(rng, 20, 5)
    assert rel(dp_order1_full(x, spec, 4).value, brute_force_u(x, spec, 4).value) <= 1e-10


@pytest.mark.parametrize("problem,n,q", [
    (Problem.MEAN, 8, 4), (Problem.COVARIANCE, 7, 2), (Problem.SPATIAL_SIGN, 9, 4),
    (Problem.KENDALL, 8, 2), (Problem.KENDALL, 10, 4), (Problem.SPEARMAN, 9, 2),
    (Problem.SPEARMAN, 13, 4), (Problem.LINREG, 8, 2), (Problem.LINREG, 9, 4)])
def test_monotone_dp_matches_brute(rng, problem, n, q):
    spec = KernelSpec(problem)
    for _ in range(3):
        if problem is Problem.LINREG:
            X = rng.standard_normal((n, 3))
            data = PairedSample(SampleMatrix(X), X[:, 0] + rng.standard_normal(n))
        else:
            data = gaussian(rng, n, 3)
        a = dp_monotone(data, spec, q)
        b = brute_force_u_monotone(data, spec, q)
        assert a.n_terms_normalizer == math.comb(n, q * spec.order_r)
        assert rel(a.value, b.value) <= 1e-10


def test_kendall_with_ties(rng):
    X = np.round(rng.standard_normal((9, 3)))
    x = SampleMatrix(X)
    spec = KernelSpec(Problem.KENDALL)
    assert rel(dp_monotone(x, spec, 2).value, brute_force_u_monotone(x, spec, 2).value) <= 1e-10


def test_linreg_zero_response():
    X = np.arange(24, dtype=float).reshape(8, 3) ** 0.5
    data = PairedSample(SampleMatrix(X), np.zeros(8))
    assert dp_monotone(data, KernelSpec(Problem.LINREG), 2).value == 0.0


def test_linreg_needs_paired_sample():
    with pytest.raises(LqError):
        dp_monotone(SampleMatrix(np.ones((8, 2))), KernelSpec(Problem.LINREG), 2)


def test_two_sample_constant_zero():
    a = SampleMatrix(np.full((6, 3), 2.0))
    d = TwoSampleData(a, SampleMatrix(np.full((6, 3), 2.0)))
    assert two_sample_dp(d, KernelSpec(Problem.TWO_SAMPLE_MEAN), 2).value == 0.0
    assert two_sample_brute(d, KernelSpec(Problem.TWO_SAMPLE_MEAN), 2).value == 0.0


@pytest.mark.parametrize("q", [2, 4])
@pytest.mark.parametrize("problem", [Problem.TWO_SAMPLE_SPATIAL_SIGN, Problem.TWO_SAMPLE_MEAN])
def test_two_sample_dp_matches_brute(rng, q, problem):
    spec = KernelSpec(problem)
    for _ in range(3):
        d = TwoSampleData(gaussian(rng, 6, 3), gaussian(rng, 6, 3, 0.0))
        a = two_sample_dp(d, spec, q)
        b = two_sample_brute(d, spec, q, Variant.MONOTONE)
        assert a.n_terms_normalizer == math.comb(6, q) ** 2
        assert rel(a.value, b.value) <= 1e-10


def test_two_sample_full_hand_computation():
    X = np.array([[0.5, 1.0], [1.5, -1.0], [2.0, 0.0], [-0.5, 2.0], [1.0, 1.0]])
    Y = np.array([[0.0, 0.0], [1.0, -0.5], [0.5, 0.5], [-1.0, 1.0], [2.0, 0.0]])
    total = 0.0
    for i1, i2 in itertools.permutations(range(5), 2):
        for j1, j2 in itertools.permutations(range(5), 2):
            for l in range(2):
                total += (X[i1, l] - Y[j1, l]) * (X[i2, l] - Y[j2, l])
    want = total / (20 * 20)
    d = TwoSampleData(SampleMatrix(X), SampleMatrix(Y))
    got = two_sample_brute(d, KernelSpec(Problem.TWO_SAMPLE_MEAN), 2, Variant.FULL)
    assert got.n_terms_normalizer == 400
    assert got.value == pytest.approx(want, rel=1e-13)


def test_two_sample_too_small():
    d = TwoSampleData(SampleMatrix(np.ones((3, 2))), SampleMatrix(np.ones((6, 2))))
    with pytest.raises(LqError):
        two_sample_dp(d, KernelSpec(Problem.TWO_SAMPLE_MEAN), 4)


@given(st.permutations(list(range(7))))
def test_full_statistics_row_permutation_invariant(perm):
    X = np.sin(np.arange(21, dtype=float).reshape(7, 3) * 1.7) + 0.2
    spec = KernelSpec(Problem.SPATIAL_SIGN)
    base = dp_order1_full(SampleMatrix(X), spec, 4).value
    moved = SampleMatrix(X[list(perm)])
    assert rel(dp_order1_full(moved, spec, 4).value, base) <= 1e-10
    assert rel(brute_force_u(moved, spec, 2).value,
               brute_force_u(SampleMatrix(X), spec, 2).value) <= 1e-10


def test_component_additivity(rng):
    X = rng.standard_normal((12, 5)) + 0.4
    spec = KernelSpec(Problem.MEAN)
    whole = dp_order1_full(SampleMatrix(X), spec, 4)
    left = dp_order1_full(SampleMatrix(X[:, :2]), spec, 4).value
    right = dp_order1_full(SampleMatrix(X[:, 2:]), spec, 4).value
    assert whole.value == pytest.approx(left + right, rel=1e-13)
    assert whole.per_component.sum() == pytest.approx(whole.value, rel=1e-13)
    ks = KernelSpec(Problem.KENDALL)
    Z = SampleMatrix(rng.standard_normal((10, 3)))
    parts = [dp_monotone(SampleMatrix(Z.values[:, list(c)]), ks, 2).value
             for c in ((0, 1), (0, 2), (1, 2))]
    assert dp_monotone(Z, ks, 2).value == pytest.approx(sum(parts), rel=1e-13)


@given(st.floats(0.1, 10), st.sampled_from([2, 4, 6]))
def test_mean_scaling(c, q):
    X = np.cos(np.arange(40, dtype=float).reshape(10, 4)) + 0.3
    spec = KernelSpec(Problem.MEAN)
    a = dp_order1_full(SampleMatrix(X), spec, q).value
    b = dp_order1_full(SampleMatrix(c * X), spec, q).value
    assert b == pytest.approx(c ** q * a, rel=1e-11)


def test_normalizers(rng):
    x = gaussian(rng, 9, 2)
    spec = KernelSpec(Problem.MEAN)
    assert dp_order1_full(x, spec, 4).n_terms_normalizer == math.perm(9, 4)
    assert brute_force_u(x, spec, 4).n_terms_normalizer == math.perm(9, 4)
    assert dp_monotone(x, KernelSpec(Problem.KENDALL), 2).n_terms_normalizer == math.comb(9, 4)


def test_guards_and_preconditions(rng):
    spec = KernelSpec(Problem.KENDALL)
    with pytest.raises(LqError):
        dp_monotone(gaussian(rng, 7, 2), spec, 4)
    with pytest.raises(LqError):
        dp_monotone(gaussian(rng, 9, 2), spec, 3)
    with pytest.raises(GuardExceeded):
        brute_force_u(gaussian(rng, 60, 2), spec, 4)
    with pytest.raises(LqError):
        dp_order1_full(gaussian(rng, 9, 2), spec, 2)


def test_large_normalizer_finite(rng):
    x = gaussian(rng, 200, 3)
    u = dp_order1_full(x, KernelSpec(Problem.MEAN), 12)
    assert math.isfinite(u.n_terms_normalizer) and math.isfinite(u.value)
    assert u.n_terms_normalizer == pytest.approx(math.perm(200, 12), rel=1e-12)
