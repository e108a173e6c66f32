"""Guarantee constants: truncated Poisson means, the interview-policy factor
1 - e^{-k} k^k / k!, the simultaneous-offering bounds alpha/beta with their
optimal truncation levels, and the threshold below which they coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

FOC_TOL = 1e-10


def _pois_pmf(lam: float, j: int) -> float:
    # log-space per term; underflow degrades gracefully to 0
    if lam == 0.0:
        return 1.0 if j == 0 else 0.0
    return math.exp(j * math.log(lam) - lam - math.lgamma(j + 1))


def pois_tail(lam: float, k: int) -> float:
    """P(Pois(lam) >= k), by complementary summation."""
    if k <= 0:
        return 1.0
    return max(0.0, 1.0 - math.fsum(_pois_pmf(lam, j) for j in range(k)))


def poisson_truncated_mean(lam: float, k: int) -> float:
    """E[min(Pois(lam), k)] = k - sum_{j<k} (k - j) P(Pois(lam) = j)."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if lam == 0.0:
        return 0.0
    return k - math.fsum((k - j) * _pois_pmf(lam, j) for j in range(k))


def guarantee_ptk(k: int) -> float:
    """Approximation factor of the committed interview policy."""
    if k < 1 or k != int(k):
        raise ValueError("k must be a positive integer")
    return -math.expm1(k * math.log(k) - k - math.lgamma(k + 1))


def tightness_threshold(k: int) -> float:
    """Largest tau at which the alpha and beta bounds still coincide:
    P(Pois(k) >= k)."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    return pois_tail(float(k), k)


def sim_objective(s: float, k: int, tau: float) -> float:
    """Shared objective behind alpha and beta:
    s - s/tau + E[min(Pois(sk), k)] / (tau k)."""
    return s - s / tau + poisson_truncated_mean(s * k, k) / (tau * k)


def _s_beta(k: int, tau: float) -> float:
    """Root of the first-order condition tau = P(Pois(sk) >= k)."""
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    lo, hi = 1e-12, 1.0
    while pois_tail(hi * k, k) < tau:
        hi *= 2.0
        if hi > 2.0**60:
            raise ArithmeticError("first-order condition bracket did not close")
    while hi - lo > FOC_TOL:
        mid = 0.5 * (lo + hi)
        if pois_tail(mid * k, k) < tau:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def optimal_s(k: int, tau: float) -> float:
    """Optimal truncation level for the simultaneous policy, clamped to 1."""
    return min(_s_beta(k, tau), 1.0)


def alpha(k: int, tau: float) -> tuple[float, float]:
    """(alpha value, maximizing s in [0, 1])."""
    s = optimal_s(k, tau)
    return sim_objective(s, k, tau), s


def beta(k: int, tau: float) -> tuple[float, float]:
    """(beta value, maximizing s >= 0): the value-ordered upper bound."""
    s = _s_beta(k, tau)
    return sim_objective(s, k, tau), s


@dataclass(frozen=True)
class GuaranteeConstants:
    k: int
    tau: float
    s_alpha: float
    s_beta: float
    alpha: float
    beta: float
    threshold: float


def compute_constants(k: int, tau: float) -> GuaranteeConstants:
    a, s_a = alpha(k, tau)
    b, s_b = beta(k, tau)
    return GuaranteeConstants(k=k, tau=tau, s_alpha=s_a, s_beta=s_b,
                              alpha=a, beta=b, threshold=tightness_threshold(k))
