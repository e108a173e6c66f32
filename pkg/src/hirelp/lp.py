"""LP relaxations for the four models, returning vertex solutions.

The interview and offering LPs share the dense bounded-variable simplex in
:mod:`hirelp.simplex`. Two reductions keep large instances fast, both exact:

* weighted-Bernoulli interview instances collapse to the sequential LP over
  y alone, with the hire variables recovered as x_i = y_i * q_i;
* identical-position parallel instances collapse to the sequential LP with a
  kT offer budget, spread back as y_ij = y_i / k.

The simultaneous-offering LP has a closed-form optimal solution (fill a
value-sorted prefix up to the optimal mass), used directly; a generic solve
is kept behind a flag for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import simplex
from .errors import SolverError
from .instances import ParInstance, ProbeTopKInstance, SeqInstance, SimInstance

FRAC_TOL = 1e-9

# above these sizes the exact reductions are used instead of the tableau
GENERIC_PTK_LIMIT = 400   # n * (J + 1)
GENERIC_PAR_LIMIT = 600   # n * k


@dataclass(frozen=True)
class PtkLpSolution:
    y: np.ndarray          # length n, interview probabilities
    x: np.ndarray          # n x J over the instance's global support
    support: np.ndarray    # global support values (length J)
    objective: float


@dataclass(frozen=True)
class SeqLpSolution:
    y: np.ndarray
    objective: float


@dataclass(frozen=True)
class ParLpSolution:
    y: np.ndarray          # n x k offer probabilities
    objective: float


@dataclass(frozen=True)
class SimLpSolution:
    y: np.ndarray
    z: float
    objective: float
    total_mass: float


@dataclass(frozen=True)
class BfsReport:
    fractional_indices: tuple[int, ...]
    fractional_count: int
    pair_sum_ok: bool

    @property
    def ok(self) -> bool:
        return self.fractional_count <= 2 and self.pair_sum_ok


def verify_bfs_structure(solution: PtkLpSolution | SeqLpSolution) -> BfsReport:
    """Check the vertex structure of y: at most two fractional entries, and
    if exactly two, they sum to 1."""
    y = np.asarray(solution.y)
    frac = np.flatnonzero((y > FRAC_TOL) & (y < 1.0 - FRAC_TOL))
    pair_ok = True
    if frac.size == 2:
        pair_ok = abs(y[frac[0]] + y[frac[1]] - 1.0) <= FRAC_TOL
    elif frac.size > 2:
        pair_ok = False
    return BfsReport(tuple(int(i) for i in frac), int(frac.size), pair_ok)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.flags.writeable = False
    return arr


def _snap_unit(arr: np.ndarray, tol: float = FRAC_TOL) -> np.ndarray:
    arr = np.where(np.abs(arr) <= tol, 0.0, arr)
    return np.where(np.abs(arr - 1.0) <= tol, 1.0, arr)


def _vertex_or_repair(y: np.ndarray, check) -> np.ndarray:
    """Return y with the vertex structure verified; one repair attempt with a
    coarser snap before giving up."""
    if check(y).ok:
        return y
    resnapped = _snap_unit(y, tol=10 * FRAC_TOL)
    if check(resnapped).ok:
        return resnapped
    raise SolverError("LP solution lost its vertex structure")


def solve_lp_seq(instance: SeqInstance) -> SeqLpSolution:
    """max sum v_i p_i y_i  s.t.  sum y_i <= T, sum p_i y_i <= k, y in [0,1]^n."""
    p = np.asarray(instance.p, dtype=float)
    v = np.asarray(instance.v, dtype=float)
    n = instance.n
    res = simplex.solve(
        c=v * p,
        A=np.vstack([np.ones(n), p]),
        b=np.array([float(instance.T), float(instance.k)]),
        upper=np.ones(n),
    )
    y = _vertex_or_repair(_snap_unit(res.x),
                          lambda arr: verify_bfs_structure(SeqLpSolution(arr, 0.0)))
    return SeqLpSolution(y=_freeze(y), objective=res.objective)


def _bernoulli_view(instance: ProbeTopKInstance):
    """(v, p) arrays if every candidate is weighted Bernoulli, else None."""
    vs, ps = [], []
    for d in instance.distributions:
        ber = d.as_bernoulli()
        if ber is None:
            return None
        vs.append(ber[0])
        ps.append(ber[1])
    return np.asarray(vs), np.asarray(ps)


def solve_lp_ptk(instance: ProbeTopKInstance, method: str = "auto") -> PtkLpSolution:
    """Interview LP: max sum_ij r_j x_ij with x_ij <= y_i q_ij,
    sum y_i <= T, sum x_ij <= k.

    ``method``: "auto" (reduction for large Bernoulli instances), "simplex"
    (always the generic tableau), or "reduction" (require the Bernoulli path).
    """
    support, q = instance.global_support()
    n, nsup = instance.n, support.size
    ber = _bernoulli_view(instance)
    use_reduction = method == "reduction" or (
        method == "auto" and ber is not None and n * (nsup + 1) > GENERIC_PTK_LIMIT
    )
    if use_reduction:
        if ber is None:
            raise SolverError("Bernoulli reduction requested on a non-Bernoulli instance")
        v, p = ber
        seq = solve_lp_seq(SeqInstance(k=instance.k, T=instance.T, n=n,
                                       p=tuple(p), v=tuple(v)))
        x = np.zeros((n, nsup))
        idx = {float(r): j for j, r in enumerate(support)}
        for i in range(n):
            if v[i] > 0:
                x[i, idx[float(v[i])]] = seq.y[i] * p[i]
        return PtkLpSolution(y=_freeze(seq.y.copy()), x=_freeze(x),
                             support=_freeze(support), objective=seq.objective)
    if method not in ("auto", "simplex"):
        raise ValueError(f"unknown method {method!r}")

    # generic tableau: variables y_0..y_{n-1} then x columns for the
    # positive-probability, positive-value support points (others are 0)
    cols = [(i, j) for i in range(n) for j in range(nsup)
            if q[i, j] > 0.0 and support[j] > 0.0]
    nx = len(cols)
    nvar = n + nx
    rows = []
    b = []
    for col, (i, j) in enumerate(cols):
        row = np.zeros(nvar)
        row[n + col] = 1.0
        row[i] = -q[i, j]
        rows.append(row)
        b.append(0.0)
    row_t = np.zeros(nvar)
    row_t[:n] = 1.0
    rows.append(row_t)
    b.append(float(instance.T))
    row_k = np.zeros(nvar)
    row_k[n:] = 1.0
    rows.append(row_k)
    b.append(float(instance.k))

    c = np.zeros(nvar)
    for col, (i, j) in enumerate(cols):
        c[n + col] = support[j]
    upper = np.concatenate([np.ones(n), np.full(nx, np.inf)])
    res = simplex.solve(c=c, A=np.vstack(rows), b=np.asarray(b), upper=upper)

    y = _vertex_or_repair(_snap_unit(res.x[:n]),
                          lambda arr: verify_bfs_structure(SeqLpSolution(arr, 0.0)))
    x = np.zeros((n, nsup))
    for col, (i, j) in enumerate(cols):
        x[i, j] = max(res.x[n + col], 0.0)
    return PtkLpSolution(y=_freeze(y), x=_freeze(x), support=_freeze(support),
                         objective=res.objective)


def batching_budget(instance: ParInstance) -> int:
    """Offer budget of the sequential twin of an identical-position instance."""
    return min(instance.k * instance.T, instance.n)


def seq_twin(instance: ParInstance) -> SeqInstance:
    """Identical-position parallel instance as a kT-budget sequential one."""
    if not instance.identical_positions():
        raise ValueError("sequential twin requires identical positions")
    p, v = instance.arrays()
    return SeqInstance(k=instance.k, T=batching_budget(instance), n=instance.n,
                       p=tuple(p[:, 0]), v=tuple(v[:, 0]))


def solve_lp_par(instance: ParInstance, method: str = "auto") -> ParLpSolution:
    """Parallel-offering LP over the n x k offer-probability matrix."""
    p, v = instance.arrays()
    n, k = instance.n, instance.k
    use_reduction = method == "reduction" or (
        method == "auto" and instance.identical_positions() and n * k > GENERIC_PAR_LIMIT
    )
    if use_reduction:
        seq = solve_lp_seq(seq_twin(instance))
        y = np.repeat(seq.y[:, None] / k, k, axis=1)
        return ParLpSolution(y=_freeze(y), objective=seq.objective)
    if method not in ("auto", "simplex"):
        raise ValueError(f"unknown method {method!r}")

    nvar = n * k  # column-major pairing: var (i, j) at index i * k + j
    rows = []
    b = []
    for j in range(k):
        row = np.zeros(nvar)
        row[j::k] = 1.0
        rows.append(row)
        b.append(float(instance.T))
    for j in range(k):
        row = np.zeros(nvar)
        row[j::k] = p[:, j]
        rows.append(row)
        b.append(1.0)
    for i in range(n):
        row = np.zeros(nvar)
        row[i * k:(i + 1) * k] = 1.0
        rows.append(row)
        b.append(1.0)
    res = simplex.solve(c=(v * p).reshape(-1), A=np.vstack(rows),
                        b=np.asarray(b), upper=np.ones(nvar))
    y = _snap_unit(res.x.reshape(n, k))
    return ParLpSolution(y=_freeze(y), objective=res.objective)


def sim_order(instance: SimInstance) -> np.ndarray:
    """Candidate indices sorted by value descending, ties by index."""
    v = np.asarray(instance.v)
    return np.argsort(-v, kind="stable")


def solve_lp_sim(instance: SimInstance, check_generic: bool = False) -> SimLpSolution:
    """Closed-form solve of the simultaneous-offering relaxation.

    If the high-value candidates (v > 1) carry more than k expected
    acceptances, the optimum is exactly their indicator; otherwise a
    value-sorted prefix is filled until the mass reaches min(k, sum p).
    """
    p = np.asarray(instance.p, dtype=float)
    v = np.asarray(instance.v, dtype=float)
    order = sim_order(instance)
    y = np.zeros(instance.n)
    high = v > 1.0
    p_high = float(p[high].sum())
    if p_high > instance.k:
        y[high] = 1.0
        mass = p_high
    else:
        target = min(float(instance.k), float(p.sum()))
        mass = 0.0
        for i in order:
            room = target - mass
            if room <= 0.0:
                break
            if p[i] <= room:
                y[i] = 1.0
                mass += p[i]
            else:
                y[i] = room / p[i]
                mass = target
                break
        mass = min(mass, target)
    z = min(0.0, instance.k - mass)
    objective = float((v * p * y).sum() + z)
    sol = SimLpSolution(y=_freeze(y), z=z, objective=objective, total_mass=mass)
    if check_generic:
        generic = _solve_lp_sim_generic(instance)
        if abs(generic - objective) > 1e-9 * max(1.0, abs(objective)):
            raise SolverError(
                f"closed-form sim LP ({objective}) disagrees with generic solve ({generic})"
            )
    return sol


def _solve_lp_sim_generic(instance: SimInstance) -> float:
    # variables: y_1..y_n and w = -z >= 0; max sum v p y - w, sum p y - w <= k
    p = np.asarray(instance.p, dtype=float)
    v = np.asarray(instance.v, dtype=float)
    n = instance.n
    c = np.concatenate([v * p, [-1.0]])
    A = np.concatenate([p, [-1.0]])[None, :]
    res = simplex.solve(c=c, A=A, b=np.array([float(instance.k)]),
                        upper=np.concatenate([np.ones(n), [np.inf]]))
    return res.objective
