"""Pure-Python bipartite dependent-rounding core.

Fallback twin of the compiled kernel in ``_kernels.pyx``. Both consume one
uniform per rotation in the same order, so given the same uniform buffer the
outputs are bitwise identical.
"""

from __future__ import annotations

import numpy as np

SNAP = 1e-12


def _is_frac(x: float) -> bool:
    return SNAP < x < 1.0 - SNAP


def find_walk(mat: np.ndarray):
    """Find a cycle or maximal path in the fractional-edge subgraph.

    Returns a list of edges (i, j) or None when the matrix is integral.
    Cycles are returned whenever the walk closes on itself; otherwise both
    endpoints have fractional degree one, so the path is maximal and
    rounding it keeps every degree within floor/ceil of its fractional value.
    """
    n, k = mat.shape
    frac = (mat > SNAP) & (mat < 1.0 - SNAP)
    row_deg = frac.sum(axis=1)
    if not row_deg.any():
        return None
    col_deg = frac.sum(axis=0)

    rows_deg1 = np.flatnonzero(row_deg == 1)
    if rows_deg1.size:
        start = int(rows_deg1[0])
    else:
        cols_deg1 = np.flatnonzero(col_deg == 1)
        if cols_deg1.size:
            start = n + int(cols_deg1[0])
        else:
            start = int(np.flatnonzero(row_deg)[0])

    visited = np.full(n + k, -1, dtype=int)
    visited[start] = 0
    edges: list[tuple[int, int]] = []
    current = start
    prev_i, prev_j = -1, -1
    while True:
        nxt = -1
        edge = None
        if current < n:
            i = current
            for j in np.flatnonzero(frac[i]):
                if not (i == prev_i and j == prev_j):
                    nxt, edge = n + int(j), (i, int(j))
                    break
        else:
            j = current - n
            for i in np.flatnonzero(frac[:, j]):
                if not (i == prev_i and j == prev_j):
                    nxt, edge = int(i), (int(i), j)
                    break
        if nxt < 0:
            return edges  # maximal path: both endpoints have degree one
        if visited[nxt] >= 0:
            return edges[visited[nxt]:] + [edge]  # closed a cycle
        edges.append(edge)
        visited[nxt] = len(edges)
        current = nxt
        prev_i, prev_j = edge


def rotation_amounts(mat: np.ndarray, edges) -> tuple[float, float]:
    """Largest alternating shifts (alpha up on even edges, beta down)."""
    alpha = np.inf
    beta = np.inf
    for t, (i, j) in enumerate(edges):
        x = mat[i, j]
        if t % 2 == 0:
            alpha = min(alpha, 1.0 - x)
            beta = min(beta, x)
        else:
            alpha = min(alpha, x)
            beta = min(beta, 1.0 - x)
    return alpha, beta


def apply_rotation(mat: np.ndarray, edges, delta: float) -> None:
    """Shift even-position edges by +delta and odd ones by -delta, snapping."""
    for t, (i, j) in enumerate(edges):
        x = mat[i, j] + (delta if t % 2 == 0 else -delta)
        if x <= SNAP:
            x = 0.0
        elif x >= 1.0 - SNAP:
            x = 1.0
        mat[i, j] = x


def gkps_core(mat: np.ndarray, uniforms: np.ndarray) -> int:
    """Round ``mat`` in place to a binary matrix; returns uniforms consumed."""
    used = 0
    while True:
        edges = find_walk(mat)
        if edges is None:
            return used
        alpha, beta = rotation_amounts(mat, edges)
        u = uniforms[used]
        used += 1
        if u < beta / (alpha + beta):
            apply_rotation(mat, edges, alpha)
        else:
            apply_rotation(mat, edges, -beta)


def gkps_batch(weights: np.ndarray, uniforms: np.ndarray, out: np.ndarray) -> None:
    """Round ``weights`` once per row of ``uniforms`` into ``out`` (uint8)."""
    for s in range(out.shape[0]):
        work = weights.copy()
        gkps_core(work, uniforms[s])
        out[s] = work > 0.5
