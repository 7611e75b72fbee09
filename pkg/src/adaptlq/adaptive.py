"""Combination of single-q p-values into the adaptive test."""
from __future__ import annotations

from dataclasses import dataclass

from .exceptions import LqError
from .variance import normal_quantile


@dataclass(frozen=True)
class AdaptiveResult:
    q_set: tuple
    per_q_pvalues: dict
    p_ada: float
    combined_pvalue: float
    alpha: float
    reject: bool


def _validate(pvalues: dict) -> dict:
    if not pvalues:
        raise LqError("need at least one p-value to combine")
    out = {}
    for q, p in pvalues.items():
        if int(q) != q or q < 2 or q % 2:
            raise LqError(f"q must be an even integer >= 2, got {q}")
        if not 0.0 <= p <= 1.0:
            raise LqError(f"p-value for q={q} is out of [0, 1]: {p}")
        out[int(q)] = float(p)
    return out


def combine(pvalues: dict, alpha: float = 0.05) -> AdaptiveResult:
    """Minimum p-value, corrected as 1 - (1 - p_min)^k for k combined tests."""
    pvalues = _validate(pvalues)
    p_ada = min(pvalues.values())
    combined = 1.0 - (1.0 - p_ada) ** len(pvalues)
    combined = min(max(combined, 0.0), 1.0)
    return AdaptiveResult(tuple(sorted(pvalues)), pvalues, p_ada, combined, alpha,
                          combined <= alpha)


def per_test_level(alpha: float, k: int) -> float:
    """Level 1 - (1 - alpha)^{1/k} at which each of k single tests is run."""
    return 1.0 - (1.0 - alpha) ** (1.0 / k)


def critical_value(alpha: float, k: int) -> float:
    """Normal critical value each studentised statistic is compared with."""
    return normal_quantile((1.0 - alpha) ** (1.0 / k))


def threshold_reject(pvalues: dict, alpha: float = 0.05) -> bool:
    """Max-of-single-tests form: reject if some p_q <= 1 - (1 - alpha)^{1/k}."""
    pvalues = _validate(pvalues)
    level = per_test_level(alpha, len(pvalues))
    return any(p <= level for p in pvalues.values())
