"""Shared helpers for the policy and acceptance tests."""

import itertools

from hirelp import evaluate, lp, policies


def expected_committed(instance, outcome_policies):
    return sum(prob * evaluate.eval_committed_order_exact(instance, pol).mean
               for prob, pol in outcome_policies)


def independent_rounding_value(inst, sol):
    """Expected value when the two fractional candidates are kept or dropped
    independently; the both-kept branch may interview T+1 candidates."""
    i1, i2 = lp.verify_bfs_structure(sol).fractional_indices
    y1, y2 = sol.y[i1], sol.y[i2]
    base = [i for i in range(inst.n) if sol.y[i] >= 1 - 1e-9]
    total = 0.0
    for keep1, keep2 in itertools.product([False, True], repeat=2):
        prob = (y1 if keep1 else 1 - y1) * (y2 if keep2 else 1 - y2)
        chosen = base + [i for keep, i in ((keep1, i1), (keep2, i2)) if keep]
        pol = policies._seq_policy(inst, chosen)
        relaxed = policies.CommittedOrderPolicy(order=pol.order,
                                                accept_prob=pol.accept_prob,
                                                k=inst.k, T=inst.T + 1)
        total += prob * evaluate.eval_committed_order_exact(inst, relaxed).mean
    return total
