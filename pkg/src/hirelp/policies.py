"""Policies for the four offering models.

LP-guided policies: the committed interview policy (round the interview LP,
order by conditional value, accept by the LP hire ratio), its sequential
specialization, the GKPS-rounded parallel lists, and the truncated-mass
simultaneous policy. Benchmarks from the experiments: padded LP lists,
the adaptive value-ordered DP, plain value-/expected-value-ordered lists,
and the marginal-gain greedy for simultaneous offers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import evaluate, lp, rounding
from .constants import optimal_s
from .instances import ParInstance, ProbeTopKInstance, SeqInstance, SimInstance, seq_to_ptk


@dataclass(frozen=True)
class CommittedOrderPolicy:
    """A fixed interview/offer order with per-value acceptance probabilities.

    accept_prob maps (candidate, global support index) to the probability of
    hiring that candidate upon observing that value.
    """

    order: tuple[int, ...]
    accept_prob: dict
    k: int
    T: int

    def __post_init__(self):
        if len(set(self.order)) != len(self.order):
            raise ValueError("order contains duplicate candidates")
        if any(a < -1e-12 or a > 1.0 + 1e-12 for a in self.accept_prob.values()):
            raise ValueError("acceptance probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class OfferLists:
    """One offer list per position, disjoint, each at most T long."""

    lists: tuple[tuple[int, ...], ...]
    k: int
    T: int

    def __post_init__(self):
        if len(self.lists) != self.k:
            raise ValueError("need exactly one list per position")
        flat = [i for lst in self.lists for i in lst]
        if len(set(flat)) != len(flat):
            raise ValueError("offer lists must be pairwise disjoint")
        if any(len(lst) > self.T for lst in self.lists):
            raise ValueError("offer list longer than the round budget")


@dataclass(frozen=True)
class OfferProbabilities:
    """Independent per-candidate offer probabilities with prefix structure."""

    y_prime: tuple[float, ...]
    mass: float


def _desc_order(values: np.ndarray) -> np.ndarray:
    """Indices sorted by value descending, ties broken by candidate index."""
    return np.argsort(-np.asarray(values, dtype=float), kind="stable")


# ---------------------------------------------------------------------------
# Interview model


def _ptk_policy_from_bits(instance, sol, bits) -> CommittedOrderPolicy:
    support, q = instance.global_support()
    x, y = sol.x, sol.y
    xsum = x.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        v_derived = np.where(xsum > 0, (x @ support) / np.where(xsum > 0, xsum, 1.0), 0.0)
    accept = {}
    for i in range(instance.n):
        if not bits[i]:
            continue
        for j in range(support.size):
            if q[i, j] > 0 and y[i] > 0:
                accept[(i, j)] = float(min(max(x[i, j] / (y[i] * q[i, j]), 0.0), 1.0))
    order = tuple(int(i) for i in _desc_order(v_derived) if bits[i])
    return CommittedOrderPolicy(order=order, accept_prob=accept, k=instance.k, T=instance.T)


def alg_ptk_outcomes(instance: ProbeTopKInstance, lp_solution=None):
    """The one or two (probability, policy) pairs the rounding can produce."""
    sol = lp_solution if lp_solution is not None else lp.solve_lp_ptk(instance)
    return [(out.probability, _ptk_policy_from_bits(instance, sol, out.bits))
            for out in rounding.dr_outcomes(sol.y)]


def _pick(outcome_policies, instance, mode, rng):
    if mode == "randomized":
        if rng is None:
            raise ValueError("randomized mode needs an rng")
        u = rng.random()
        acc = 0.0
        for prob, policy in outcome_policies:
            acc += prob
            if u < acc:
                return policy
        return outcome_policies[-1][1]
    if mode == "derandomized":
        vals = [evaluate.eval_committed_order_exact(instance, pol).mean
                for _, pol in outcome_policies]
        return outcome_policies[int(np.argmax(vals))][1]
    raise ValueError(f"unknown mode {mode!r}")


def alg_ptk(instance: ProbeTopKInstance, mode: str = "derandomized",
            rng: np.random.Generator | None = None, lp_solution=None) -> CommittedOrderPolicy:
    """LP-guided committed interview policy."""
    return _pick(alg_ptk_outcomes(instance, lp_solution), instance, mode, rng)


# ---------------------------------------------------------------------------
# Sequential offering


def _seq_support_index(instance: SeqInstance):
    ptk = seq_to_ptk(instance)
    return ptk, ptk.support_index()


def _seq_policy(instance: SeqInstance, chosen) -> CommittedOrderPolicy:
    """Offer to ``chosen`` in value order, hiring every positive acceptance."""
    _, idx = _seq_support_index(instance)
    v = np.asarray(instance.v)
    accept = {}
    chosen_set = {int(c) for c in chosen}
    for i in chosen_set:
        j = idx.get(float(instance.v[i]))  # absent when v_i = 0 or p_i = 0
        if instance.v[i] > 0 and j is not None:
            accept[(i, j)] = 1.0
    order = tuple(int(i) for i in _desc_order(v) if int(i) in chosen_set)
    return CommittedOrderPolicy(order=order, accept_prob=accept, k=instance.k, T=instance.T)


def alg_seq_outcomes(instance: SeqInstance, lp_solution=None):
    sol = lp_solution if lp_solution is not None else lp.solve_lp_seq(instance)
    pairs = []
    for out in rounding.dr_outcomes(sol.y):
        chosen = [i for i in range(instance.n) if out.bits[i]]
        pairs.append((out.probability, _seq_policy(instance, chosen)))
    return pairs


def alg_seq(instance: SeqInstance, mode: str = "derandomized",
            rng: np.random.Generator | None = None, lp_solution=None) -> CommittedOrderPolicy:
    """The interview policy specialized to weighted Bernoulli values; always
    hires on acceptance, which makes it admissible for sequential offering."""
    return _pick(alg_seq_outcomes(instance, lp_solution), instance, mode, rng)


def alg_seq_prime(instance: SeqInstance, lp_solution=None) -> CommittedOrderPolicy:
    """Derandomized sequential policy with its lists padded to T offers by
    unused candidates in decreasing value."""
    sol = lp_solution if lp_solution is not None else lp.solve_lp_seq(instance)
    v = np.asarray(instance.v)
    by_value = _desc_order(v)
    candidates = []
    for out in rounding.dr_outcomes(sol.y):
        chosen = {i for i in range(instance.n) if out.bits[i]}
        for i in by_value:
            if len(chosen) >= instance.T:
                break
            chosen.add(int(i))
        candidates.append(_seq_policy(instance, sorted(chosen)))
    vals = [evaluate.eval_committed_order_exact(instance, pol).mean for pol in candidates]
    return candidates[int(np.argmax(vals))]


@dataclass(frozen=True)
class AdaptiveSeqResult:
    value: float
    order: tuple[int, ...]                # candidates in decreasing value
    offer: np.ndarray = field(repr=False)  # offer[pos, hires_left, time_left]
    value_by_budget: np.ndarray = field(repr=False)  # optimal value per offer budget


def adaptive_seq_dp(instance: SeqInstance) -> AdaptiveSeqResult:
    """Optimal adaptive policy among those offering in decreasing value.

    S(i, l, t) = best expected reward from candidates i.. with l hires and
    t offers left; each offer consumes a time step whatever the response.
    """
    order = _desc_order(np.asarray(instance.v))
    k, T = instance.k, instance.T
    S = np.zeros((k + 1, T + 1))
    offer = np.zeros((instance.n, k + 1, T + 1), dtype=bool)
    for pos in range(instance.n - 1, -1, -1):
        i = int(order[pos])
        pi, vi = instance.p[i], instance.v[i]
        take = np.zeros_like(S)
        take[1:, 1:] = pi * (vi + S[:-1, :-1]) + (1.0 - pi) * S[1:, :-1]
        offer[pos] = take >= S - 1e-15
        S = np.maximum(take, S)
    return AdaptiveSeqResult(value=float(S[k, T]),
                             order=tuple(int(i) for i in order), offer=offer,
                             value_by_budget=S[k].copy())


def value_ordered_seq(instance: SeqInstance) -> CommittedOrderPolicy:
    chosen = _desc_order(np.asarray(instance.v))[: instance.T]
    return _seq_policy(instance, chosen)


def ev_ordered_seq(instance: SeqInstance) -> CommittedOrderPolicy:
    ev = np.asarray(instance.v) * np.asarray(instance.p)
    chosen = _desc_order(ev)[: instance.T]
    _, idx = _seq_support_index(instance)
    accept = {}
    for i in chosen:
        j = idx.get(float(instance.v[i]))
        if instance.v[i] > 0 and j is not None:
            accept[(int(i), j)] = 1.0
    # offers go out in decreasing v*p, not decreasing v
    return CommittedOrderPolicy(order=tuple(int(i) for i in chosen),
                                accept_prob=accept, k=instance.k, T=instance.T)


# ---------------------------------------------------------------------------
# Parallel offering


def lists_from_bits(instance: ParInstance, bits: np.ndarray) -> OfferLists:
    """Offer lists from a rounded LP matrix, each sorted by position value."""
    _, v = instance.arrays()
    lists = []
    for j in range(instance.k):
        members = np.flatnonzero(bits[:, j])
        lists.append(tuple(int(i) for i in members[_desc_order(v[members, j])]))
    return OfferLists(lists=tuple(lists), k=instance.k, T=instance.T)


def alg_par(instance: ParInstance, mode: str = "randomized",
            rng: np.random.Generator | None = None, samples: int = 32,
            lp_solution=None) -> OfferLists:
    """GKPS-rounded parallel offer lists.

    ``derandomized_sampled`` draws several roundings and keeps the best by
    exact evaluation (the two-outcome derandomization of the interview model
    has no analogue here, so this is a sampled strengthening).
    """
    sol = lp_solution if lp_solution is not None else lp.solve_lp_par(instance)
    if rng is None:
        raise ValueError("alg_par needs an rng")
    if mode == "randomized":
        return lists_from_bits(instance, rounding.gkps_round(sol.y, rng))
    if mode == "derandomized_sampled":
        best, best_val = None, -np.inf
        for bits in rounding.gkps_sample_batch(sol.y, samples, rng):
            lists = lists_from_bits(instance, bits)
            val = evaluate.eval_par_exact(instance, lists).mean
            if val > best_val:
                best, best_val = lists, val
        return best
    raise ValueError(f"unknown mode {mode!r}")


def alg_par_expectation(instance: ParInstance, lp_solution=None,
                        max_outcomes: int = 1 << 18) -> float:
    """Exact expected value of the randomized parallel policy, by enumerating
    the rounding's outcome tree (audit-sized instances only)."""
    sol = lp_solution if lp_solution is not None else lp.solve_lp_par(instance)
    total = 0.0
    for out in rounding.enumerate_gkps_outcomes(sol.y, max_outcomes=max_outcomes):
        lists = lists_from_bits(instance, out.bits)
        total += out.probability * evaluate.eval_par_exact(instance, lists).mean
    return total


def alg_par_prime(instance: ParInstance, lp_solution=None) -> OfferLists:
    """Identical-position heuristic: solve the kT-budget sequential LP, pad
    both rounding outcomes, then deal candidates to the emptiest list."""
    twin = lp.seq_twin(instance)
    sol = lp_solution if lp_solution is not None else lp.solve_lp_seq(twin)
    v = np.asarray(twin.v)
    p = np.asarray(twin.p)
    by_value = _desc_order(v)
    configs = []
    for out in rounding.dr_outcomes(sol.y):
        chosen = {i for i in range(instance.n) if out.bits[i]}
        for i in by_value:
            if len(chosen) >= twin.T:
                break
            chosen.add(int(i))
        lists: list[list[int]] = [[] for _ in range(instance.k)]
        mass = [0.0] * instance.k
        for i in by_value:
            if int(i) not in chosen:
                continue
            open_lists = [j for j in range(instance.k) if len(lists[j]) < instance.T]
            if not open_lists:
                break
            j = min(open_lists, key=lambda jj: (mass[jj], jj))
            lists[j].append(int(i))
            mass[j] += float(p[i])
        configs.append(OfferLists(lists=tuple(tuple(l) for l in lists),
                                  k=instance.k, T=instance.T))
    vals = [evaluate.eval_par_exact(instance, cfg).mean for cfg in configs]
    return configs[int(np.argmax(vals))]


# ---------------------------------------------------------------------------
# Simultaneous offering


def alg_sim(instance: SimInstance, s: float, lp_solution=None) -> OfferProbabilities:
    """Scale the LP solution's total mass by s and refill a value-sorted
    prefix to that mass; offers then go out independently."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    sol = lp_solution if lp_solution is not None else lp.solve_lp_sim(instance)
    p = np.asarray(instance.p)
    kappa = s * sol.total_mass
    kappa = min(kappa, float(p.sum()))  # guard against float slack only
    y = np.zeros(instance.n)
    remaining = kappa
    for i in lp.sim_order(instance):
        if remaining <= 0.0:
            break
        if p[i] <= remaining:
            y[i] = 1.0
            remaining -= p[i]
        else:
            y[i] = remaining / p[i]
            remaining = 0.0
            break
    return OfferProbabilities(y_prime=tuple(float(t) for t in y), mass=float(kappa))


def high_value_mass(instance: SimInstance) -> float:
    p = np.asarray(instance.p)
    v = np.asarray(instance.v)
    return float(p[v > 1.0].sum())


def alg_sim_auto(instance: SimInstance, tau: float) -> tuple[OfferProbabilities, float]:
    """Tuned policy: s* from the first-order condition, except that instances
    whose high-value candidates exceed capacity in expectation keep s = 1
    (shrinking them can only hurt)."""
    s = 1.0 if high_value_mass(instance) > instance.k else optimal_s(instance.k, tau)
    return alg_sim(instance, s), s


def _best_prefix(instance: SimInstance, order: np.ndarray) -> tuple[int, float]:
    """Exact best prefix size along ``order``; ties go to the smaller m."""
    p = np.asarray(instance.p)
    v = np.asarray(instance.v)
    best_m, best_val = 0, 0.0
    dist = np.zeros(instance.n + 1)
    dist[0] = 1.0
    cum = 0.0
    counts = np.arange(instance.n + 1)
    for m, i in enumerate(order, start=1):
        pi = p[i]
        dist[1 : m + 1] = dist[1 : m + 1] * (1.0 - pi) + dist[:m] * pi
        dist[0] *= 1.0 - pi
        cum += v[i] * pi
        val = cum - float((np.maximum(counts[: m + 1] - instance.k, 0) * dist[: m + 1]).sum())
        if val > best_val + 1e-15:
            best_m, best_val = m, val
    return best_m, best_val


def value_ordered_sim(instance: SimInstance) -> tuple[int, float]:
    """Best number of offers down the value ordering, with its exact value."""
    return _best_prefix(instance, _desc_order(np.asarray(instance.v)))


def ev_ordered_sim(instance: SimInstance) -> tuple[int, float]:
    """Best number of offers down the expected-value ordering."""
    ev = np.asarray(instance.v) * np.asarray(instance.p)
    return _best_prefix(instance, _desc_order(ev))


def greedy_sim(instance: SimInstance) -> tuple[tuple[int, ...], float]:
    """Add the candidate with the best exact marginal gain until none helps.

    The marginal of adding i to a set with acceptance count C is
    p_i * (v_i - P(C >= k)), so one tail probability prices every candidate.
    """
    p = np.asarray(instance.p)
    v = np.asarray(instance.v)
    selected: list[int] = []
    free = np.ones(instance.n, dtype=bool)
    dist = np.zeros(instance.n + 1)
    dist[0] = 1.0
    m = 0
    while True:
        tail = float(dist[instance.k :].sum()) if m >= instance.k else 0.0
        gains = np.where(free, p * (v - tail), -np.inf)
        best = int(np.argmax(gains))
        if not np.isfinite(gains[best]) or gains[best] <= 0.0:
            break
        selected.append(best)
        free[best] = False
        pi = p[best]
        dist[1 : m + 2] = dist[1 : m + 2] * (1.0 - pi) + dist[: m + 1] * pi
        dist[0] *= 1.0 - pi
        m += 1
    subset = tuple(sorted(selected))
    return subset, evaluate.eval_sim_exact(instance, subset).mean
