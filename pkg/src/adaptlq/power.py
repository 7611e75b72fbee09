"""Power planning: signal level, required effect size and the optimal q.

For a flat alternative with d nonzero components of size delta, and a null
variance constant growing like a^q N, the effect size needed to reach power
Phi(R - z_{1-alpha}) with the order-q statistic is

    delta(q) = C(r,s) sqrt(a) [(qs)!]^{1/(2q)} (sqrt(N) R / d)^{1/q} n^{-s/2}.

Only f(q) = [(qs)!]^{1/(2q)} D^{1/q}, with D = sqrt(N) R / d, depends on q.
Factorials are handled in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import LqError


@dataclass(frozen=True)
class PowerPlanInput:
    d: float
    N: float
    R: float
    r: int = 1
    s: int = 1
    a: float = 1.0
    n: int = 100
    q_max: int = 20

    def __post_init__(self):
        if not self.d >= 1:
            raise LqError("d must be >= 1")
        for name in ("N", "R", "a"):
            if not getattr(self, name) > 0:
                raise LqError(f"{name} must be positive")
        if self.n < 1:
            raise LqError("n must be >= 1")
        if not 1 <= self.s <= self.r:
            raise LqError("need 1 <= s <= r")
        if self.q_max < 2 or self.q_max % 2:
            raise LqError("q_max must be an even integer >= 2")

    @property
    def D(self) -> float:
        return math.sqrt(self.N) * self.R / self.d


def signal_level(n: int, q: int, s: int, theta_lq_norm_q: float, sigma_tilde: float) -> float:
    """gamma = n^{qs/2} sigma_tilde^{-1/2} ||Theta||_q^q."""
    if not sigma_tilde > 0:
        raise LqError("sigma_tilde must be positive")
    return n ** (q * s / 2) / math.sqrt(sigma_tilde) * theta_lq_norm_q


def log_f(q: int, s: int, D: float) -> float:
    """log of the q-dependent factor [(qs)!]^{1/(2q)} D^{1/q}."""
    return math.lgamma(q * s + 1) / (2 * q) + math.log(D) / q


def delta_required(plan: PowerPlanInput, q: int) -> float:
    if int(q) != q or q < 2 or q % 2 or q > plan.q_max:
        raise LqError(f"q must be even with 2 <= q <= {plan.q_max}, got {q}")
    s = plan.s
    log_pref = (math.log(math.comb(plan.r, s)) + 0.5 * math.log(plan.a)
                - 0.5 * s * math.log(plan.n))
    return math.exp(log_pref + log_f(q, s, plan.D))


def delta_table(plan: PowerPlanInput) -> dict:
    return {q: delta_required(plan, q) for q in range(2, plan.q_max + 1, 2)}


def optimal_q(plan: PowerPlanInput) -> int:
    """Even q in [2, q_max] minimising delta(q); ties go to the smaller q."""
    best_q, best = 2, log_f(2, plan.s, plan.D)
    for q in range(4, plan.q_max + 1, 2):
        val = log_f(q, plan.s, plan.D)
        if val < best:
            best_q, best = q, val
    return best_q


def log_g(q: int, s: int) -> float:
    """log of g(q) = (P^{(q+1)s}_s)^q / (qs)!; f(q+1) > f(q) iff g(q) > D^2."""
    log_perm = math.lgamma((q + 1) * s + 1) - math.lgamma(q * s + 1)
    return q * log_perm - math.lgamma(q * s + 1)


def threshold_q(D: float, s: int = 1, q_limit: int = 10_000) -> int:
    """Smallest integer q >= 1 with g(q) >= D^2 (the integer-q minimiser of f)."""
    target = 2 * math.log(D) if D > 0 else -math.inf
    for q in range(1, q_limit + 1):
        if log_g(q, s) >= target:
            return q
    raise LqError(f"no q <= {q_limit} reaches g(q) >= D^2 for D = {D}")
