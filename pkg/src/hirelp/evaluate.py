"""Exact expected-reward evaluators and seeded Monte Carlo twins.

Exact evaluation is a small dynamic program in every model: a hire-count
distribution walked along a committed order, independent survival products
per offer list, and a Poisson-binomial count distribution for the
simultaneous penalty. The simulators exist as cross-checks; replications are
split into fixed-size chunks with seeds derived per chunk and per candidate,
so results are reproducible regardless of scheduling and common random
numbers are shared by policies evaluated under the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .instances import ParInstance, ProbeTopKInstance, SeqInstance, SimInstance, seq_to_ptk

CHUNK = 1 << 14


@dataclass(frozen=True)
class EvalResult:
    mean: float
    half_width: float
    replications: int
    seed: int | None = None

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError("half_width must be nonnegative")
        if self.replications == 0 and self.half_width != 0.0:
            raise ValueError("exact results have zero half-width")


def exact(mean: float) -> EvalResult:
    return EvalResult(mean=float(mean), half_width=0.0, replications=0)


def _policy_steps(instance: ProbeTopKInstance | SeqInstance, policy):
    """Per-ordered-candidate (hire probability, conditional value * prob)."""
    inst = seq_to_ptk(instance) if isinstance(instance, SeqInstance) else instance
    index = inst.support_index()
    accept = policy.accept_prob
    steps = []
    for i in policy.order[: policy.T]:
        if not 0 <= i < inst.n:
            raise ValueError(f"order references unknown candidate {i}")
        d = inst.distributions[i]
        hire_p = contrib = 0.0
        for r, pr in zip(d.support, d.probs):
            a = accept.get((i, index[r]), 0.0)
            hire_p += pr * a
            contrib += r * pr * a
        steps.append((i, float(hire_p), float(contrib)))
    return inst, steps


def eval_committed_order_exact(instance, policy) -> EvalResult:
    """Exact value of a committed interview/offer order.

    Walks the order once, tracking the distribution of hires so far; the
    candidate at each step contributes its conditional value whenever fewer
    than k hires were made before it.
    """
    _, steps = _policy_steps(instance, policy)
    k = policy.k
    dist = np.zeros(k + 1)
    dist[0] = 1.0
    total = 0.0
    for _, hire_p, contrib in steps:
        open_mass = dist[:k].sum()
        if open_mass <= 0.0:
            break
        total += contrib * open_mass
        moved = dist[:k] * hire_p
        dist[1 : k + 1] += moved
        dist[:k] -= moved
    return exact(total)


def _chunk_seeds(seed: int, reps: int) -> list[tuple[np.random.SeedSequence, int]]:
    chunks = []
    start = 0
    c = 0
    while start < reps:
        size = min(CHUNK, reps - start)
        chunks.append((np.random.SeedSequence(entropy=seed, spawn_key=(c,)), size))
        start += size
        c += 1
    return chunks


def _merge_mc(sums: float, sqsums: float, reps: int, seed: int) -> EvalResult:
    mean = sums / reps
    var = max(sqsums / reps - mean * mean, 0.0) * reps / max(reps - 1, 1)
    half = 1.96 * np.sqrt(var / reps)
    return EvalResult(mean=float(mean), half_width=float(half), replications=reps, seed=seed)


def simulate_ptk(instance, policy, reps: int, seed: int) -> EvalResult:
    """Monte Carlo twin of :func:`eval_committed_order_exact` (CRN by
    candidate id: two policies simulated with the same seed share draws)."""
    inst, steps = _policy_steps(instance, policy)
    support, q = inst.global_support()
    k = policy.k
    cum = {i: np.cumsum(q[i]) for i, _, _ in steps}
    acc_tab = {
        i: np.array([policy.accept_prob.get((i, j), 0.0) for j in range(support.size)])
        for i, _, _ in steps
    }
    sums = sqsums = 0.0
    for ss, size in _chunk_seeds(seed, reps):
        draws = {
            i: np.random.default_rng(np.random.SeedSequence(
                entropy=ss.entropy, spawn_key=ss.spawn_key + (i,))).random((size, 2))
            for i, _, _ in steps
        }
        hires = np.zeros(size, dtype=np.int64)
        reward = np.zeros(size)
        for i, _, _ in steps:
            u = draws[i]
            j = np.searchsorted(cum[i], u[:, 0], side="right")
            j = np.minimum(j, support.size - 1)
            active = hires < k
            hired = active & (u[:, 1] < acc_tab[i][j])
            reward += np.where(hired, support[j], 0.0)
            hires += hired
        sums += reward.sum()
        sqsums += (reward * reward).sum()
    return _merge_mc(sums, sqsums, reps, seed)


def eval_par_exact(instance: ParInstance, lists) -> EvalResult:
    """Exact value of disjoint per-position offer lists run in parallel."""
    p, v = instance.arrays()
    seen: set[int] = set()
    total = 0.0
    for j, lst in enumerate(lists.lists):
        alive = 1.0
        for i in lst[: instance.T]:
            if i in seen:
                raise ValueError("offer lists must be disjoint")
            seen.add(i)
            total += alive * p[i, j] * v[i, j]
            alive *= 1.0 - p[i, j]
    return exact(total)


def simulate_par(instance: ParInstance, lists, reps: int, seed: int) -> EvalResult:
    p, v = instance.arrays()
    sums = sqsums = 0.0
    for ss, size in _chunk_seeds(seed, reps):
        reward = np.zeros(size)
        for j, lst in enumerate(lists.lists):
            alive = np.ones(size, dtype=bool)
            for i in lst[: instance.T]:
                rng = np.random.default_rng(
                    np.random.SeedSequence(entropy=ss.entropy, spawn_key=ss.spawn_key + (i,)))
                accept = rng.random(size) < p[i, j]
                take = alive & accept
                reward += np.where(take, v[i, j], 0.0)
                alive &= ~accept
        sums += reward.sum()
        sqsums += (reward * reward).sum()
    return _merge_mc(sums, sqsums, reps, seed)


def penalty_expectation(probs, k: int) -> float:
    """E[max(sum of independent Bernoullis - k, 0)] by the exact count DP."""
    probs = np.asarray(probs, dtype=float)
    dist = np.zeros(probs.size + 1)
    dist[0] = 1.0
    m = 0
    for p in probs:
        dist[1 : m + 2] = dist[1 : m + 2] * (1.0 - p) + dist[: m + 1] * p
        dist[0] *= 1.0 - p
        m += 1
    counts = np.arange(dist.size)
    return float((np.maximum(counts - k, 0) * dist).sum())


def _offer_probs(instance: SimInstance, offers) -> np.ndarray:
    p = np.asarray(instance.p)
    if hasattr(offers, "y_prime"):
        y = np.asarray(offers.y_prime, dtype=float)
        if y.size != instance.n:
            raise ValueError("offer probabilities have the wrong length")
        return y * p
    members = sorted(set(int(i) for i in offers))
    if members and not (0 <= members[0] and members[-1] < instance.n):
        raise ValueError("offer subset references unknown candidates")
    q = np.zeros(instance.n)
    q[members] = p[members]
    return q


def eval_sim_exact(instance: SimInstance, offers) -> EvalResult:
    """Exact value of a simultaneous-offer policy (subset or probabilities)."""
    q = _offer_probs(instance, offers)
    v = np.asarray(instance.v)
    return exact(float((v * q).sum()) - penalty_expectation(q, instance.k))


def simulate_sim(instance: SimInstance, offers, reps: int, seed: int) -> EvalResult:
    q = _offer_probs(instance, offers)
    v = np.asarray(instance.v)
    sums = sqsums = 0.0
    for ss, size in _chunk_seeds(seed, reps):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=ss.entropy, spawn_key=ss.spawn_key + (0,)))
        accepted = rng.random((size, instance.n)) < q[None, :]
        reward = accepted @ v - np.maximum(accepted.sum(axis=1) - instance.k, 0)
        sums += reward.sum()
        sqsums += (reward * reward).sum()
    return _merge_mc(sums, sqsums, reps, seed)
