"""Variance estimation, studentisation and p-values.

Normal tail probabilities use scipy.special.ndtr / ndtri (Cephes), whose
relative error is below 1e-15 over the range used here; the upper tail is
evaluated as ndtr(-t) so small p-values keep full relative precision.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from . import _engines
from .data import PairedSample, SampleMatrix, SeedSpec, TwoSampleData, derive_stream
from .exceptions import DegenerateVarianceError, KernelError, LqError
from .kernels import Arity, KernelSpec, Problem, order1_matrix
from .ustat import (LqStatistic, Variant, binom, check_q, monotone_levels,
                    monotone_normalizer, sample_sizes)


class Scheme(enum.Enum):
    COLUMNS_INDEPENDENT = "columns-independent"
    RESPONSE_SHUFFLE = "response-shuffle"
    POOLED_RELABEL = "pooled-relabel"


class Method(enum.Enum):
    ANALYTIC_R1 = "analytic"
    PERMUTATION_VARIANCE = "perm"
    PERMUTATION_EMPIRICAL = "perm-empirical"


_SCHEME_FOR = {
    Problem.KENDALL: Scheme.COLUMNS_INDEPENDENT,
    Problem.SPEARMAN: Scheme.COLUMNS_INDEPENDENT,
    Problem.LINREG: Scheme.RESPONSE_SHUFFLE,
    Problem.TWO_SAMPLE_SPATIAL_SIGN: Scheme.POOLED_RELABEL,
    Problem.TWO_SAMPLE_MEAN: Scheme.POOLED_RELABEL,
}


def default_scheme(spec: KernelSpec) -> Scheme | None:
    return _SCHEME_FOR.get(spec.problem)


def default_method(spec: KernelSpec) -> Method:
    if spec.order_r == 1 and spec.sample_arity is Arity.ONE_SAMPLE:
        return Method.ANALYTIC_R1
    return Method.PERMUTATION_VARIANCE


@dataclass(frozen=True)
class PermutationPlan:
    B: int = 100
    seed: SeedSpec = field(default_factory=lambda: SeedSpec(0))
    scheme: Scheme | None = None

    def __post_init__(self):
        if self.B < 2:
            raise LqError("need at least B = 2 permutations")
        if self.scheme is not None:
            object.__setattr__(self, "scheme", Scheme(self.scheme))

    def resolve(self, spec: KernelSpec) -> Scheme:
        want = default_scheme(spec)
        if want is None:
            raise LqError(f"no null-preserving permutation scheme for {spec.problem.value}; "
                          "use the analytic variance")
        if self.scheme is not None and self.scheme is not want:
            raise LqError(f"scheme {self.scheme.value} is incompatible with "
                          f"{spec.problem.value} (expected {want.value})")
        return want


@dataclass(frozen=True)
class StudentizedResult:
    q: int
    statistic_T: float
    variance_estimate: float
    pvalue: float
    method: Method


def upper_tail(t: float) -> float:
    """1 - Phi(t), via scipy's Cephes ndtr (absolute error below 1e-15)."""
    return float(ndtr(-t))


def normal_quantile(u: float) -> float:
    return float(ndtri(u))


# ---------------------------------------------------------------------------
# analytic estimator for order-one kernels


def analytic_variances(data, spec: KernelSpec, q_values, chunk_cells: int = 4_000_000) -> dict:
    """Centered-product estimates of the null variance constant, one per q.

    With centred kernels a_il = h_l(X_i) - mean_i h_l, the estimate for q is
    sum_{l1, l2} (P^n_q)^{-1} sum* prod_c a_{i_c l1} a_{i_c l2}, obtained by
    running the order-one recursion over the product component set.
    """
    q_values = [check_q(q) for q in q_values]
    if spec.order_r != 1 or spec.sample_arity is not Arity.ONE_SAMPLE:
        raise KernelError("the analytic variance needs an order-one one-sample kernel; "
                          "use the permutation variance")
    X = data.values if isinstance(data, SampleMatrix) else SampleMatrix(data).values
    spec.check_dimension(X.shape[1])
    n = X.shape[0]
    qmax = max(q_values)
    if n < qmax:
        raise LqError(f"need n >= q = {qmax}, got n = {n}")
    H = order1_matrix(spec, X)
    H = H - H.mean(axis=0, keepdims=True)
    L = H.shape[1]
    step = max(1, chunk_cells // max(1, n * L))
    totals = np.zeros(qmax)
    for start in range(0, L, step):
        block = H[:, start:start + step, None] * H[:, None, :]
        levels = _engines.order1_levels(block.reshape(n, -1), qmax)
        totals += levels.sum(axis=1)
    return {q: float(totals[q - 1] / binom(n, q)) for q in q_values}


def analytic_variance_r1(data, spec: KernelSpec, q: int) -> float:
    """Estimate of the variance constant for order-one kernels; raises if not positive."""
    q = check_q(q)
    value = analytic_variances(data, spec, [q])[q]
    if not value > 0:
        raise DegenerateVarianceError(
            f"analytic variance estimate for q={q} is {value:.3g} (not positive); "
            "the data may be degenerate - try the permutation variance")
    return value


def _null_by_zero(u: float, var: float) -> bool:
    # an exactly zero statistic with exactly zero spread (e.g. constant data)
    # carries no evidence against the null: report T = 0 rather than 0/0
    return u == 0.0 and var == 0.0


def studentize_r1(u: LqStatistic, sigma_hat: float, n: int) -> StudentizedResult:
    """T = [(qs)!]^{-1/2} C(r,s)^{-q} n^{qs/2} sigma_hat^{-1/2} U, one-sided p-value."""
    q = u.q
    if _null_by_zero(u.value, sigma_hat):
        t = 0.0
    else:
        if not sigma_hat > 0:
            raise DegenerateVarianceError(f"variance estimate {sigma_hat!r} is not positive")
        r, s = u.kernel.order_r, u.kernel.degeneracy_s
        log_scale = (-0.5 * math.lgamma(q * s + 1) - q * math.log(math.comb(r, s))
                     + 0.5 * q * s * math.log(n) - 0.5 * math.log(sigma_hat))
        t = math.exp(log_scale) * u.value
    return StudentizedResult(q, t, sigma_hat, upper_tail(t), Method.ANALYTIC_R1)


# ---------------------------------------------------------------------------
# permutation machinery


def draw_permutation(data, scheme: Scheme, rng: np.random.Generator):
    """Random permutation(s) in the form expected by `apply_permutation`."""
    scheme = Scheme(scheme)
    if scheme is Scheme.COLUMNS_INDEPENDENT:
        n, p = _matrix(data).shape
        return np.stack([rng.permutation(n) for _ in range(p)], axis=1)
    if scheme is Scheme.RESPONSE_SHUFFLE:
        if not isinstance(data, PairedSample):
            raise LqError("response-shuffle needs PairedSample data")
        return rng.permutation(data.n)
    if scheme is Scheme.POOLED_RELABEL:
        if not isinstance(data, TwoSampleData):
            raise LqError("pooled-relabel needs TwoSampleData")
        return rng.permutation(data.n + data.m)
    raise LqError(f"unknown scheme {scheme}")


def _matrix(data) -> np.ndarray:
    if isinstance(data, SampleMatrix):
        return data.values
    if isinstance(data, (PairedSample, TwoSampleData)):
        raise LqError("columns-independent permutation needs a SampleMatrix")
    return np.asarray(data, dtype=np.float64)


def apply_permutation(data, scheme: Scheme, perm, beta0=None):
    """Apply an explicit permutation.

    columns-independent: perm is (n, p), column k reordered by perm[:, k].
    response-shuffle: the residuals y - X beta0 are reordered (with beta0 = 0
    this is a plain shuffle of y).  pooled-relabel: the first n rows of the
    reordered stack form the new first sample.
    """
    scheme = Scheme(scheme)
    perm = np.asarray(perm)
    if scheme is Scheme.COLUMNS_INDEPENDENT:
        X = _matrix(data)
        if perm.shape != X.shape:
            raise LqError(f"permutation shape {perm.shape} != data shape {X.shape}")
        return SampleMatrix(np.take_along_axis(X, perm, axis=0))
    if scheme is Scheme.RESPONSE_SHUFFLE:
        if not isinstance(data, PairedSample):
            raise LqError("response-shuffle needs PairedSample data")
        X = data.covariates.values
        fit = np.zeros(data.n) if beta0 is None else X @ np.asarray(beta0, dtype=np.float64)
        resid = data.response - fit
        return PairedSample(data.covariates, fit + resid[perm])
    if scheme is Scheme.POOLED_RELABEL:
        if not isinstance(data, TwoSampleData):
            raise LqError("pooled-relabel needs TwoSampleData")
        pooled = np.vstack([data.first.values, data.second.values])[perm]
        return TwoSampleData(SampleMatrix(pooled[:data.n]), SampleMatrix(pooled[data.n:]))
    raise LqError(f"unknown scheme {scheme}")


def permute(data, scheme: Scheme, seed: SeedSpec, beta0=None):
    perm = draw_permutation(data, scheme, seed.generator())
    return apply_permutation(data, scheme, perm, beta0=beta0)


def permutation_null(data, spec: KernelSpec, q_values, plan: PermutationPlan) -> np.ndarray:
    """Statistics recomputed on B permuted datasets; shape (B, len(q_values)).

    Permutation b uses the stream derive_stream(plan.seed, b), so the draws do
    not depend on evaluation order.
    """
    q_values = [check_q(q) for q in q_values]
    scheme = plan.resolve(spec)
    beta0 = spec.null_param if spec.problem is Problem.LINREG else None
    qmax = max(q_values)
    sizes = sample_sizes(data)
    norms = np.array([monotone_normalizer(spec, sizes, q) for q in q_values])
    idx = np.array(q_values) - 1
    draws = np.empty((plan.B, len(q_values)))
    for b in range(plan.B):
        permuted = permute(data, scheme, derive_stream(plan.seed, b), beta0=beta0)
        levels = monotone_levels(permuted, spec, qmax)
        draws[b] = levels[idx].sum(axis=1) / norms
    return draws


def permutation_variance(data, spec: KernelSpec, q: int, plan: PermutationPlan):
    """(V, null_draws): sample variance (ddof=1) of B permutation statistics."""
    draws = permutation_null(data, spec, [q], plan)[:, 0]
    V = float(np.var(draws, ddof=1))
    if not V > 0:
        raise DegenerateVarianceError(
            f"permutation variance is {V!r}: all {plan.B} permuted statistics are equal")
    return V, draws


def studentize_monotone(u_m: LqStatistic, V: float) -> StudentizedResult:
    """T^M = U^M / sqrt(V) with one-sided normal p-value."""
    if _null_by_zero(u_m.value, V):
        t = 0.0
    elif not V > 0:
        raise DegenerateVarianceError(f"permutation variance {V!r} is not positive")
    else:
        t = u_m.value / math.sqrt(V)
    return StudentizedResult(u_m.q, t, V, upper_tail(t), Method.PERMUTATION_VARIANCE)


def empirical_pvalue(observed: float, null_draws) -> float:
    """(1 + #{draws >= observed}) / (B + 1)."""
    draws = np.asarray(null_draws, dtype=np.float64).reshape(-1)
    if draws.size == 0:
        raise LqError("need at least one null draw")
    return float((1 + np.count_nonzero(draws >= observed)) / (draws.size + 1))


__all__ = [
    "Scheme", "Method", "PermutationPlan", "StudentizedResult", "analytic_variance_r1",
    "analytic_variances", "studentize_r1", "permute", "apply_permutation",
    "draw_permutation", "permutation_null", "permutation_variance",
    "studentize_monotone", "empirical_pvalue", "upper_tail", "normal_quantile",
    "default_method", "default_scheme", "Variant",
]
