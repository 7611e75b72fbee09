"""L_q-norm U-statistics: brute-force oracles and dynamic-programming engines.

Two families of statistics are computed:

* the full symmetric statistic, averaging prod_c h_l(block c) over all ordered
  tuples of q*r distinct indices (normaliser P^n_{qr} = n!/(n-qr)!);
* the monotone-index statistic, summing only over increasing index tuples
  (normaliser C(n, qr)).

For order-one kernels the two coincide.  The brute-force functions evaluate the
kernel through `kernels.eval_kernel` and share no code with the DP engines, so
they act as an independent oracle.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _engines
from .data import PairedSample, SampleMatrix, TwoSampleData
from .exceptions import GuardExceeded, KernelError, LqError
from .kernels import (Arity, KernelSpec, Problem, component_array, component_set,
                      eval_kernel, order1_matrix, residuals, sign_tensor,
                      two_sample_tensor)

MAX_TUPLES = 10**8
_CHUNK = 200_000


class Variant(enum.Enum):
    FULL = "full"
    MONOTONE = "monotone"


@dataclass(frozen=True, eq=False)
class LqStatistic:
    q: int
    variant: Variant
    value: float
    n_terms_normalizer: float
    kernel: KernelSpec
    # normalised contribution of each component, in component_set order
    per_component: np.ndarray = field(default=None, repr=False)


def perm_count(n: int, k: int) -> float:
    """P^n_k = n!/(n-k)! as a running double product."""
    out = 1.0
    for j in range(k):
        out *= n - j
    return out


def binom(n: int, k: int) -> float:
    """C(n, k) as a running product of ratios."""
    if k < 0 or k > n:
        return 0.0
    k = min(k, n - k)
    out = 1.0
    for j in range(1, k + 1):
        out = out * (n - k + j) / j
    return out


def check_q(q: int) -> int:
    if int(q) != q or q < 2 or q % 2:
        raise LqError(f"q must be an even integer >= 2, got {q}")
    return int(q)


def _rows(data, spec: KernelSpec):
    """Split input into (X, e) for one-sample problems; e is None unless linreg."""
    if spec.sample_arity is Arity.TWO_SAMPLE:
        raise KernelError(f"{spec.problem.value} needs two-sample data")
    if spec.problem is Problem.LINREG:
        if not isinstance(data, PairedSample):
            raise KernelError("linreg needs PairedSample data (covariates and response)")
        X = data.covariates.values
        spec.check_dimension(X.shape[1])
        return X, residuals(spec, X, data.response)
    if isinstance(data, PairedSample):
        raise KernelError(f"{spec.problem.value} takes a SampleMatrix, not paired data")
    X = data.values if isinstance(data, SampleMatrix) else SampleMatrix(data).values
    spec.check_dimension(X.shape[1])
    return X, None


def _two_rows(data, spec: KernelSpec):
    if spec.sample_arity is not Arity.TWO_SAMPLE:
        raise KernelError(f"{spec.problem.value} is a one-sample problem")
    if not isinstance(data, TwoSampleData):
        raise KernelError("two-sample problems need TwoSampleData")
    spec.check_dimension(data.p)
    return data.first.values, data.second.values


# ---------------------------------------------------------------------------
# brute-force oracles


def _kernel_table(data, spec: KernelSpec) -> np.ndarray:
    """T[i_1, ..., i_r, l] = h_l(X_{i_1}, ..., X_{i_r}) over distinct ordered tuples."""
    if spec.problem is Problem.LINREG:
        X, y = data.covariates.values, data.response
        obs = [(X[i], y[i]) for i in range(X.shape[0])]
    else:
        X = data.values if isinstance(data, SampleMatrix) else np.asarray(data)
        obs = list(X)
    n = len(obs)
    comps = component_set(spec, X.shape[1])
    r = spec.order_r
    T = np.zeros((n,) * r + (len(comps),))
    for idx in itertools.permutations(range(n), r):
        args = [obs[i] for i in idx]
        T[idx] = [eval_kernel(spec, l, args) for l in comps]
    return T


def _tuple_chunks(n: int, k: int, monotone: bool):
    it = itertools.combinations(range(n), k) if monotone else itertools.permutations(range(n), k)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(len(block), k)


def _guard(count: float) -> None:
    if count > MAX_TUPLES:
        raise GuardExceeded(f"brute force needs {count:.3g} tuples (limit {MAX_TUPLES:.0e})")


def _brute_one_sample(data, spec: KernelSpec, q: int, monotone: bool) -> LqStatistic:
    q = check_q(q)
    X, _ = _rows(data, spec)
    n = X.shape[0]
    r = spec.order_r
    k = q * r
    if n < k:
        raise LqError(f"need n >= q*r = {k}, got n = {n}")
    norm = binom(n, k) if monotone else perm_count(n, k)
    _guard(norm)
    T = _kernel_table(data, spec)
    sums = np.zeros(T.shape[-1])
    for tuples in _tuple_chunks(n, k, monotone):
        prod = np.ones((tuples.shape[0], T.shape[-1]))
        for c in range(q):
            block = tuple(tuples[:, c * r + j] for j in range(r))
            prod *= T[block]
        sums += prod.sum(axis=0)
    per = sums / norm
    return LqStatistic(q, Variant.MONOTONE if monotone else Variant.FULL,
                       float(sums.sum() / norm), norm, spec, per)


def brute_force_u(data, spec: KernelSpec, q: int) -> LqStatistic:
    """Full symmetric U-statistic by enumerating every ordered distinct tuple."""
    return _brute_one_sample(data, spec, q, monotone=False)


def brute_force_u_monotone(data, spec: KernelSpec, q: int) -> LqStatistic:
    """Monotone-index U-statistic by enumerating increasing tuples."""
    return _brute_one_sample(data, spec, q, monotone=True)


def two_sample_brute(data: TwoSampleData, spec: KernelSpec, q: int,
                     variant: Variant = Variant.FULL) -> LqStatistic:
    q = check_q(q)
    variant = Variant(variant)
    X, Y = _two_rows(data, spec)
    n, m = X.shape[0], Y.shape[0]
    if n < q or m < q:
        raise LqError(f"need n, m >= q = {q}, got n = {n}, m = {m}")
    monotone = variant is Variant.MONOTONE
    if monotone:
        norm = binom(n, q) * binom(m, q)
    else:
        norm = perm_count(n, q) * perm_count(m, q)
    _guard(norm)
    comps = component_set(spec, data.p)
    T = np.array([[[eval_kernel(spec, l, (X[i], Y[j])) for l in comps]
                   for j in range(m)] for i in range(n)])
    ys = np.concatenate(list(_tuple_chunks(m, q, monotone)))
    sums = np.zeros(len(comps))
    for xs in _tuple_chunks(n, q, monotone):
        for row in xs:
            prod = np.ones((ys.shape[0], len(comps)))
            for c in range(q):
                prod *= T[row[c], ys[:, c]]
            sums += prod.sum(axis=0)
    return LqStatistic(q, variant, float(sums.sum() / norm), norm, spec, sums / norm)


# ---------------------------------------------------------------------------
# dynamic programming


def order1_levels(data, spec: KernelSpec, qmax: int) -> np.ndarray:
    """Level sums D_{c,l}(n), shape (qmax, L), for an order-one kernel."""
    if spec.order_r != 1 or spec.sample_arity is not Arity.ONE_SAMPLE:
        raise KernelError(f"{spec.problem.value} is not an order-one one-sample kernel")
    X, _ = _rows(data, spec)
    return _engines.order1_levels(order1_matrix(spec, X), qmax)


def monotone_levels(data, spec: KernelSpec, qmax: int) -> np.ndarray:
    """Level sums D^M_{c,l}(n) for c = 1..qmax, shape (qmax, L)."""
    if spec.sample_arity is Arity.TWO_SAMPLE:
        X, Y = _two_rows(data, spec)
        K = two_sample_tensor(spec, X, Y)
        return _engines.monotone_two_sample(K, qmax).T.copy()
    if spec.order_r == 1:
        return order1_levels(data, spec, qmax)
    X, e = _rows(data, spec)
    if spec.problem is Problem.KENDALL:
        pairs = component_array(spec, X.shape[1])
        return _engines.monotone_r2_signs(sign_tensor(X), pairs, qmax).T.copy()
    if spec.problem is Problem.SPEARMAN:
        pairs = component_array(spec, X.shape[1])
        return _engines.monotone_r3_spearman(sign_tensor(X), pairs, qmax).T.copy()
    if spec.problem is Problem.LINREG:
        return _engines.monotone_r2_linreg(np.ascontiguousarray(X), e, qmax).T.copy()
    raise KernelError(f"no monotone engine for {spec.problem.value}")


def sample_sizes(data) -> tuple:
    if isinstance(data, TwoSampleData):
        return data.n, data.m
    if isinstance(data, (SampleMatrix, PairedSample)):
        return (data.n,)
    return (np.asarray(data).shape[0],)


def monotone_normalizer(spec: KernelSpec, sizes: tuple, q: int) -> float:
    if spec.sample_arity is Arity.TWO_SAMPLE:
        n, m = sizes
        return binom(n, q * spec.order_r) * binom(m, q * spec.order_r)
    return binom(sizes[0], q * spec.order_r)


def _check_size(spec: KernelSpec, sizes: tuple, q: int) -> None:
    need = q * spec.order_r
    if min(sizes) < need:
        raise LqError(f"need sample size(s) >= q*r = {need}, got {sizes}")


def statistic_from_levels(levels: np.ndarray, spec: KernelSpec, sizes: tuple, q: int,
                          variant: Variant = Variant.MONOTONE) -> LqStatistic:
    """Normalise level sums into an LqStatistic for one q."""
    norm = monotone_normalizer(spec, sizes, q)
    per = levels[q - 1] / norm
    value = float(levels[q - 1].sum() / norm)
    if variant is Variant.FULL:
        # order-one kernels only: full and monotone coincide
        reported = perm_count(sizes[0], q)
    else:
        reported = norm
    return LqStatistic(q, variant, value, reported, spec, per)


def dp_order1_full(data, spec: KernelSpec, q: int) -> LqStatistic:
    """Exact full U-statistic for an order-one kernel in O(q n L)."""
    q = check_q(q)
    if spec.order_r != 1 or spec.sample_arity is not Arity.ONE_SAMPLE:
        raise KernelError("dp_order1_full needs an order-one one-sample kernel")
    sizes = sample_sizes(data)
    _check_size(spec, sizes, q)
    levels = order1_levels(data, spec, q)
    return statistic_from_levels(levels, spec, sizes, q, Variant.FULL)


def dp_monotone(data, spec: KernelSpec, q: int) -> LqStatistic:
    """Monotone-index U-statistic in O(q n^r L)."""
    q = check_q(q)
    if spec.sample_arity is Arity.TWO_SAMPLE:
        return two_sample_dp(data, spec, q)
    sizes = sample_sizes(data)
    _check_size(spec, sizes, q)
    return statistic_from_levels(monotone_levels(data, spec, q), spec, sizes, q)


def two_sample_dp(data: TwoSampleData, spec: KernelSpec, q: int) -> LqStatistic:
    """Monotone two-sample U-statistic in O(q n m L)."""
    q = check_q(q)
    X, Y = _two_rows(data, spec)
    sizes = (X.shape[0], Y.shape[0])
    _check_size(spec, sizes, q)
    return statistic_from_levels(monotone_levels(data, spec, q), spec, sizes, q)


def full_or_monotone(data, spec: KernelSpec, q: int) -> LqStatistic:
    """The production statistic: full for order-one kernels, monotone otherwise."""
    if spec.order_r == 1 and spec.sample_arity is Arity.ONE_SAMPLE:
        return dp_order1_full(data, spec, q)
    return dp_monotone(data, spec, q)


__all__ = [
    "LqStatistic", "Variant", "brute_force_u", "brute_force_u_monotone", "dp_order1_full",
    "dp_monotone", "two_sample_dp", "two_sample_brute", "order1_levels", "monotone_levels",
    "statistic_from_levels", "perm_count", "binom", "full_or_monotone", "MAX_TUPLES",
]
