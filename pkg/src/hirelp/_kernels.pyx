# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled rounding kernel: twin of ``_gkps_py`` with identical semantics.

Consumes one uniform per rotation in the same order as the pure-Python core,
so both produce bitwise-identical samples from the same uniform buffer.
"""

import numpy as np

from libc.math cimport INFINITY

cdef double SNAP = 1e-12


cdef inline bint _is_frac(double x) noexcept nogil:
    return SNAP < x < 1.0 - SNAP


cdef Py_ssize_t _walk(double[:, ::1] mat, Py_ssize_t n, Py_ssize_t k,
                      Py_ssize_t* ei, Py_ssize_t* ej, Py_ssize_t* visited) noexcept nogil:
    """Fill (ei, ej) with a cycle or maximal path; returns its edge count."""
    cdef Py_ssize_t i, j, deg, start, current, nxt, cnt, q, m
    cdef Py_ssize_t prev_i = -1, prev_j = -1
    cdef bint any_frac = False

    start = -1
    for i in range(n):
        deg = 0
        for j in range(k):
            if _is_frac(mat[i, j]):
                deg += 1
        if deg > 0:
            any_frac = True
            if deg == 1 and start < 0:
                start = i
    if not any_frac:
        return 0
    if start < 0:
        for j in range(k):
            deg = 0
            for i in range(n):
                if _is_frac(mat[i, j]):
                    deg += 1
            if deg == 1:
                start = n + j
                break
    if start < 0:
        for i in range(n):
            if start >= 0:
                break
            for j in range(k):
                if _is_frac(mat[i, j]):
                    start = i
                    break

    for i in range(n + k):
        visited[i] = -1
    visited[start] = 0
    current = start
    cnt = 0
    while True:
        nxt = -1
        i = -1
        j = -1
        if current < n:
            i = current
            for j in range(k):
                if _is_frac(mat[i, j]) and not (i == prev_i and j == prev_j):
                    nxt = n + j
                    break
        else:
            j = current - n
            for i in range(n):
                if _is_frac(mat[i, j]) and not (i == prev_i and j == prev_j):
                    nxt = i
                    break
        if nxt < 0:
            return cnt  # maximal path
        if visited[nxt] >= 0:
            q = visited[nxt]  # closed a cycle: keep edges q.. plus this one
            for m in range(q, cnt):
                ei[m - q] = ei[m]
                ej[m - q] = ej[m]
            ei[cnt - q] = i
            ej[cnt - q] = j
            return cnt - q + 1
        ei[cnt] = i
        ej[cnt] = j
        cnt += 1
        visited[nxt] = cnt
        current = nxt
        prev_i = i
        prev_j = j


cdef void _rotate(double[:, ::1] mat, Py_ssize_t* ei, Py_ssize_t* ej,
                  Py_ssize_t cnt, double delta) noexcept nogil:
    cdef Py_ssize_t t
    cdef double x
    for t in range(cnt):
        if t % 2 == 0:
            x = mat[ei[t], ej[t]] + delta
        else:
            x = mat[ei[t], ej[t]] - delta
        if x <= SNAP:
            x = 0.0
        elif x >= 1.0 - SNAP:
            x = 1.0
        mat[ei[t], ej[t]] = x


cdef Py_ssize_t _core(double[:, ::1] mat, double[:] uniforms,
                      Py_ssize_t* ei, Py_ssize_t* ej, Py_ssize_t* visited) noexcept nogil:
    cdef Py_ssize_t n = mat.shape[0], k = mat.shape[1]
    cdef Py_ssize_t used = 0, cnt, t
    cdef double alpha, beta, x, u
    while True:
        cnt = _walk(mat, n, k, ei, ej, visited)
        if cnt == 0:
            return used
        alpha = INFINITY
        beta = INFINITY
        for t in range(cnt):
            x = mat[ei[t], ej[t]]
            if t % 2 == 0:
                if 1.0 - x < alpha:
                    alpha = 1.0 - x
                if x < beta:
                    beta = x
            else:
                if x < alpha:
                    alpha = x
                if 1.0 - x < beta:
                    beta = 1.0 - x
        u = uniforms[used]
        used += 1
        if u < beta / (alpha + beta):
            _rotate(mat, ei, ej, cnt, alpha)
        else:
            _rotate(mat, ei, ej, cnt, -beta)


def gkps_core(mat, uniforms):
    """Round ``mat`` in place to a binary matrix; returns uniforms consumed."""
    cdef double[:, ::1] m = mat
    u_arr = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef double[:] u = u_arr
    cdef Py_ssize_t n = m.shape[0], k = m.shape[1]
    scratch = np.empty(2 * n * k + n + k + 2, dtype=np.intp)
    cdef Py_ssize_t[:] sc = scratch
    cdef Py_ssize_t used
    with nogil:
        used = _core(m, u, &sc[0], &sc[n * k + 1], &sc[2 * n * k + 2])
    return int(used)


def gkps_batch(weights, uniforms, out):
    """Round ``weights`` once per row of ``uniforms`` into ``out`` (uint8)."""
    w_arr = np.ascontiguousarray(weights, dtype=np.float64)
    u_arr = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef double[:, ::1] w = w_arr
    cdef double[:, ::1] u = u_arr
    cdef unsigned char[:, :, ::1] o = out
    cdef Py_ssize_t n = w.shape[0], k = w.shape[1]
    work = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] wk = work
    scratch = np.empty(2 * n * k + n + k + 2, dtype=np.intp)
    cdef Py_ssize_t[:] sc = scratch
    cdef Py_ssize_t s, i, j, samples = o.shape[0]
    with nogil:
        for s in range(samples):
            for i in range(n):
                for j in range(k):
                    wk[i, j] = w[i, j]
            _core(wk, u[s], &sc[0], &sc[n * k + 1], &sc[2 * n * k + 2])
            for i in range(n):
                for j in range(k):
                    o[s, i, j] = 1 if wk[i, j] > 0.5 else 0
