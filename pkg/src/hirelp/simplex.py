"""Dense tableau simplex with Bland's rule and implicit variable upper bounds.

Solves   max c.x   s.t.   A x <= b,   0 <= x <= u
with b >= 0 (so the all-slack basis is feasible and no phase 1 is needed).
Upper bounds are handled by the standard bounded-variable technique:
nonbasic variables rest at 0 or at their upper bound, and a ratio test can
end in a bound flip instead of a pivot. The returned point is always a basic
feasible solution, i.e. a vertex of the feasible polytope, which downstream
rounding relies on.

All the LPs in this package are small and dense; anti-cycling comes from
Bland's smallest-index rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError

FEAS_TOL = 1e-9


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    objective: float
    iterations: int


def _solve_once(c, A, b, upper, entering_tol, max_iter):
    m, n = A.shape
    total = n + m
    tab = np.hstack([A.astype(float), np.eye(m)])
    u = np.concatenate([upper, np.full(m, np.inf)])
    red = np.concatenate([c.astype(float), np.zeros(m)])
    basis = np.arange(n, total)
    in_basis = np.zeros(total, dtype=bool)
    in_basis[basis] = True
    at_upper = np.zeros(total, dtype=bool)
    xb = b.astype(float).copy()

    fixed = u <= 0.0  # zero-width variables can never move off their bound

    for it in range(max_iter):
        eligible = ~in_basis & ~fixed & (
            (~at_upper & (red > entering_tol)) | (at_upper & (red < -entering_tol))
        )
        if not eligible.any():
            x = np.zeros(total)
            x[at_upper] = u[at_upper]
            x[basis] = xb
            x = np.clip(x[:n], 0.0, np.where(np.isfinite(upper), upper, np.inf))
            return SimplexResult(x=x, objective=float(c @ x), iterations=it)

        j = int(np.argmax(eligible))  # Bland: first eligible index
        sigma = -1.0 if at_upper[j] else 1.0
        w = sigma * tab[:, j]

        # ratio test: basic to lower, basic to upper, entering bound flip
        t_best = u[j]
        leave_row = -1
        leave_to_upper = False
        ub = u[basis]
        with np.errstate(divide="ignore", invalid="ignore"):
            lower_hits = np.where(w > FEAS_TOL, xb / w, np.inf)
            upper_hits = np.where((w < -FEAS_TOL) & np.isfinite(ub), (ub - xb) / (-w), np.inf)
        lower_hits = np.maximum(lower_hits, 0.0)
        upper_hits = np.maximum(upper_hits, 0.0)
        row_hits = np.minimum(lower_hits, upper_hits)
        t_rows = row_hits.min() if row_hits.size else np.inf
        # a bound flip on a tie is preferred: it always makes strict progress
        if t_rows < t_best - FEAS_TOL or not np.isfinite(t_best):
            tie = np.flatnonzero(row_hits == t_rows)
            if tie.size:
                leave_row = int(tie[np.argmin(basis[tie])])  # Bland leaving rule
                t_best = t_rows
                leave_to_upper = upper_hits[leave_row] < lower_hits[leave_row]

        if not np.isfinite(t_best):
            raise SolverError("LP is unbounded")

        if leave_row < 0:
            # bound flip, no basis change
            xb -= t_best * w
            at_upper[j] = ~at_upper[j]
            continue

        t = max(t_best, 0.0)
        xb -= t * w
        xb[leave_row] = t if sigma > 0 else u[j] - t
        lvar = basis[leave_row]
        in_basis[lvar] = False
        at_upper[lvar] = leave_to_upper
        basis[leave_row] = j
        in_basis[j] = True
        at_upper[j] = False

        piv = tab[leave_row, j]
        if abs(piv) < 1e-12:
            raise SolverError("vanishing pivot element")
        tab[leave_row] /= piv
        col = tab[:, j].copy()
        col[leave_row] = 0.0
        tab -= np.outer(col, tab[leave_row])
        red = red - red[j] * tab[leave_row]

    raise SolverError("simplex iteration limit reached")


def solve(c, A, b, upper, max_iter: int | None = None) -> SimplexResult:
    """Maximize c.x over {A x <= b, 0 <= x <= u}; returns a vertex solution."""
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(b < -FEAS_TOL):
        raise SolverError("solver requires b >= 0 (slack basis start)")
    b = np.maximum(b, 0.0)
    if max_iter is None:
        max_iter = 2000 + 200 * (A.shape[0] + A.shape[1])
    last_exc: SolverError | None = None
    for tol in (1e-9, 1e-8):
        try:
            return _solve_once(c, A, b, upper, tol, max_iter)
        except SolverError as exc:
            last_exc = exc
    raise SolverError(f"simplex failed after retries: {last_exc}")
