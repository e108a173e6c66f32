"""Dependent rounding schemes: the two-fractional star rounding used by the
interview policies, and GKPS bipartite rounding used by the parallel policy.

Guarantees (asserted by the test suite):
  P1  marginals are preserved exactly;
  P2  every row/column sum of a sample lies in {floor, ceil} of its
      fractional degree;
  P3  edges sharing a vertex are negatively correlated (GKPS).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _gkps_py, backend

FRAC_TOL = 1e-9


@dataclass(frozen=True)
class RoundingOutcome:
    bits: np.ndarray
    probability: float


def _fractional_indices(y: np.ndarray) -> np.ndarray:
    return np.flatnonzero((y > FRAC_TOL) & (y < 1.0 - FRAC_TOL))


def _check_dr_input(y: np.ndarray) -> np.ndarray:
    frac = _fractional_indices(y)
    if frac.size > 2:
        raise ValueError(f"simple rounding needs at most 2 fractional entries, got {frac.size}")
    if frac.size == 2 and abs(y[frac[0]] + y[frac[1]] - 1.0) > FRAC_TOL:
        raise ValueError("two fractional entries must sum to 1")
    return frac


def dr_outcomes(y) -> list[RoundingOutcome]:
    """Full enumeration of the simple dependent rounding: one outcome for an
    integral vector, otherwise exactly two."""
    y = np.asarray(y, dtype=float)
    frac = _check_dr_input(y)
    base = (y > 0.5).astype(np.int8)
    if frac.size == 0:
        return [RoundingOutcome(bits=base, probability=1.0)]
    if frac.size == 1:
        i = int(frac[0])
        hi = base.copy()
        hi[i] = 1
        lo = base.copy()
        lo[i] = 0
        return [RoundingOutcome(hi, float(y[i])), RoundingOutcome(lo, float(1.0 - y[i]))]
    i1, i2 = int(frac[0]), int(frac[1])
    first = base.copy()
    first[i1], first[i2] = 1, 0
    second = base.copy()
    second[i1], second[i2] = 0, 1
    return [RoundingOutcome(first, float(y[i1])), RoundingOutcome(second, float(1.0 - y[i1]))]


def simple_dr(y, rng: np.random.Generator) -> np.ndarray:
    """Sample the simple dependent rounding of a near-integral vector."""
    outcomes = dr_outcomes(y)
    if len(outcomes) == 1:
        return outcomes[0].bits.copy()
    pick = rng.random()
    chosen = outcomes[0] if pick < outcomes[0].probability else outcomes[1]
    return chosen.bits.copy()


def _as_matrix(weights) -> tuple[np.ndarray, bool]:
    w = np.asarray(weights, dtype=float)
    if w.ndim == 1:
        return w[:, None].copy(), True
    if w.ndim != 2:
        raise ValueError("weights must be a vector or a matrix")
    return w.copy(), False


def _uniform_budget(mat: np.ndarray) -> int:
    # one uniform per rotation; every rotation makes at least one edge integral
    return int(np.count_nonzero((mat > _gkps_py.SNAP) & (mat < 1.0 - _gkps_py.SNAP)))


def gkps_round(weights, rng: np.random.Generator) -> np.ndarray:
    """One GKPS dependent-rounding sample of a weight matrix in [0,1]^(n x k).

    A 1-D input is treated as a star graph and returns a 1-D binary vector.
    """
    mat, was_vector = _as_matrix(weights)
    if np.any(mat < -FRAC_TOL) or np.any(mat > 1.0 + FRAC_TOL):
        raise ValueError("weights must lie in [0, 1]")
    np.clip(mat, 0.0, 1.0, out=mat)
    budget = _uniform_budget(mat)
    uniforms = rng.random(size=budget) if budget else np.empty(0)
    backend.gkps_core(mat, uniforms)
    bits = (mat > 0.5).astype(np.int8)
    return bits[:, 0] if was_vector else bits


def gkps_sample_batch(weights, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of GKPS samples, shape (samples, n, k); uses the fast kernel."""
    mat, _ = _as_matrix(weights)
    np.clip(mat, 0.0, 1.0, out=mat)
    budget = max(_uniform_budget(mat), 1)
    uniforms = rng.random(size=(samples, budget))
    out = np.empty((samples,) + mat.shape, dtype=np.uint8)
    backend.gkps_batch(mat, uniforms, out)
    return out


def enumerate_gkps_outcomes(weights, max_outcomes: int = 1 << 18) -> list[RoundingOutcome]:
    """Exact outcome distribution of the GKPS procedure on a small matrix.

    The rounding branches on one binary choice per rotation; this walks both
    branches, so it is only meant for the matrices the audits use.
    """
    mat, was_vector = _as_matrix(weights)
    np.clip(mat, 0.0, 1.0, out=mat)
    results: list[RoundingOutcome] = []

    def recurse(m: np.ndarray, prob: float) -> None:
        if len(results) >= max_outcomes:
            raise RuntimeError("GKPS outcome enumeration exceeded its cap")
        edges = _gkps_py.find_walk(m)
        if edges is None:
            bits = (m > 0.5).astype(np.int8)
            results.append(RoundingOutcome(bits[:, 0] if was_vector else bits, prob))
            return
        alpha, beta = _gkps_py.rotation_amounts(m, edges)
        p_up = beta / (alpha + beta)
        up = m.copy()
        _gkps_py.apply_rotation(up, edges, alpha)
        recurse(up, prob * p_up)
        down = m.copy()
        _gkps_py.apply_rotation(down, edges, -beta)
        recurse(down, prob * (1.0 - p_up))

    recurse(mat, 1.0)
    return results
