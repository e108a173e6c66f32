"""Brute-force optimal values on small instances, used as ground truth.

Each oracle enforces a hard size cap and raises rather than approximate.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import evaluate
from .errors import SizeCapError
from .instances import ParInstance, ProbeTopKInstance, SeqInstance, SimInstance
from .policies import OfferLists

PTK_CAPS = {"n": 8, "J": 4, "k": 3}
SEQ_CAP_N = 15
SIM_CAP_N = 20
PAR_CAPS = {"n": 8, "k": 2, "T": 3}


def opt_ptk_bruteforce(instance: ProbeTopKInstance) -> float:
    """Optimal adaptive, non-committed interview value.

    State: candidates still available, interviews left, and the multiset of
    the k best values observed so far. Only the best k observed matter
    because the remaining candidates' values are independent of the past.
    """
    support, q = instance.global_support()
    if instance.n > PTK_CAPS["n"] or support.size > PTK_CAPS["J"] or instance.k > PTK_CAPS["k"]:
        raise SizeCapError(f"opt_ptk_bruteforce caps: {PTK_CAPS}")
    n, k = instance.n, instance.k
    atoms = [[(float(r), float(pr)) for r, pr in zip(d.support, d.probs)]
             for d in instance.distributions]

    def merge(topk: tuple, value: float) -> tuple:
        if value <= 0.0:
            return topk
        merged = sorted(topk + (value,), reverse=True)[:k]
        return tuple(merged)

    @lru_cache(maxsize=None)
    def best(avail: int, left: int, topk: tuple) -> float:
        stop = sum(topk)
        if left == 0 or avail == 0:
            return stop
        out = stop
        for i in range(n):
            if not avail & (1 << i):
                continue
            val = 0.0
            for r, pr in atoms[i]:
                val += pr * best(avail & ~(1 << i), left - 1, merge(topk, r))
            out = max(out, val)
        return out

    try:
        return best((1 << n) - 1, instance.T, ())
    finally:
        best.cache_clear()


def opt_seq_bruteforce(instance: SeqInstance) -> float:
    """Optimal adaptive sequential-offering value (any order), by a subset DP.

    Every offer removes one candidate and one time unit, so the remaining
    time is determined by the remaining set.
    """
    if instance.n > SEQ_CAP_N:
        raise SizeCapError(f"opt_seq_bruteforce cap: n <= {SEQ_CAP_N}")
    n, k, T = instance.n, instance.k, instance.T
    p, v = instance.p, instance.v
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def best(remaining: int, hires_left: int) -> float:
        t_left = T - (n - bin(remaining).count("1"))
        if hires_left == 0 or t_left <= 0 or remaining == 0:
            return 0.0
        out = 0.0
        for i in range(n):
            bit = 1 << i
            if not remaining & bit:
                continue
            nxt = remaining & ~bit
            val = p[i] * (v[i] + best(nxt, hires_left - 1)) + (1.0 - p[i]) * best(nxt, hires_left)
            out = max(out, val)
        return out

    try:
        return best(full, k)
    finally:
        best.cache_clear()


def opt_sim_bruteforce(instance: SimInstance) -> tuple[float, tuple[int, ...]]:
    """Exhaustive best offer subset with its exact value.

    Randomizing over subsets cannot beat the best one (the expected reward is
    linear in the randomization), so deterministic search is exact. Ties go
    to smaller, then lexicographically smaller, subsets.
    """
    if instance.n > SIM_CAP_N:
        raise SizeCapError(f"opt_sim_bruteforce cap: n <= {SIM_CAP_N}")
    n, k = instance.n, instance.k
    p, v = instance.p, instance.v
    counts = np.arange(n + 2)
    best_val, best_set = 0.0, ()

    dist = np.zeros(n + 1)
    dist[0] = 1.0
    chosen: list[int] = []

    def value_now(m: int) -> float:
        pen = float((np.maximum(counts[: m + 1] - k, 0) * dist[: m + 1]).sum())
        return sum(v[i] * p[i] for i in chosen) - pen

    def recurse(i: int) -> None:
        nonlocal best_val, best_set
        if i == n:
            val = value_now(len(chosen))
            if val > best_val + 1e-15:
                best_val, best_set = val, tuple(chosen)
            return
        recurse(i + 1)  # exclude first: ties prefer smaller subsets
        pi = p[i]
        m = len(chosen)
        saved = dist[: m + 2].copy()
        dist[1 : m + 2] = dist[1 : m + 2] * (1.0 - pi) + dist[: m + 1] * pi
        dist[0] *= 1.0 - pi
        chosen.append(i)
        recurse(i + 1)
        chosen.pop()
        dist[: m + 2] = saved

    recurse(0)
    return best_val, best_set


def opt_par_nonadaptive_bruteforce(instance: ParInstance) -> float:
    """Best fixed disjoint offer lists, searched exhaustively.

    Within a chosen set for one position, offering in decreasing value is
    optimal (adjacent exchange), so the search is over assignments of
    candidates to positions (or none) with at most T per position. This
    lower-bounds the adaptive optimum, whose oracle is out of scope; the LP
    is the upper bound used in ratio checks.
    """
    if instance.n > PAR_CAPS["n"] or instance.k > PAR_CAPS["k"] or instance.T > PAR_CAPS["T"]:
        raise SizeCapError(f"opt_par_nonadaptive_bruteforce caps: {PAR_CAPS}")
    n, k, T = instance.n, instance.k, instance.T
    _, v = instance.arrays()
    best = 0.0
    assign = [0] * n  # 0 = no offer, j = position j

    def recurse(i: int) -> None:
        nonlocal best
        if i == n:
            lists = []
            for j in range(1, k + 1):
                members = np.array([c for c in range(n) if assign[c] == j], dtype=int)
                if members.size > T:
                    return
                order = members[np.argsort(-v[members, j - 1], kind="stable")]
                lists.append(tuple(int(c) for c in order))
            val = evaluate.eval_par_exact(
                instance, OfferLists(lists=tuple(lists), k=k, T=T)).mean
            best = max(best, val)
            return
        for j in range(k + 1):
            assign[i] = j
            recurse(i + 1)
        assign[i] = 0

    recurse(0)
    return best
