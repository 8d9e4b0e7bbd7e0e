# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled add-compare-select trellis kernel.

Same contract as the NumPy fallback in ``_viterbi_np``; see that module for
the argument semantics.  The inner loop runs over (state, incoming branch)
per sample, which dominates Monte Carlo detection runtime.
"""

from libc.math cimport INFINITY

import numpy as np


def run_trellis(const double complex[::1] z,
                const double complex[:, ::1] out,
                const int[:, ::1] src,
                const signed char[:, ::1] sym,
                const double[::1] corr,
                Py_ssize_t n_free):
    cdef Py_ssize_t T = z.shape[0]
    cdef Py_ssize_t S = out.shape[0]
    cdef Py_ssize_t K = out.shape[1]
    if K > 64:
        raise ValueError("kernel supports at most 64 symbols")

    bp_arr = np.empty((T, S), dtype=np.uint8)
    pm_arr = np.full(S, np.inf)
    npm_arr = np.empty(S, dtype=np.float64)
    cdef unsigned char[:, ::1] bp = bp_arr
    cdef double[::1] pm = pm_arr
    cdef double[::1] npm = npm_arr
    cdef double[::1] tmp

    cdef double cand[64]
    cdef double complex zn, o
    cdef double best, c, dr, di
    cdef Py_ssize_t n, sp, m, mbest
    cdef long long ties = 0
    cdef bint tail

    pm[0] = 0.0
    for n in range(T):
        zn = z[n]
        tail = n >= n_free
        for sp in range(S):
            best = INFINITY
            for m in range(K):
                if tail and sym[sp, m] != 0:
                    cand[m] = INFINITY
                    continue
                o = out[sp, m]
                dr = zn.real - o.real
                di = zn.imag - o.imag
                c = pm[src[sp, m]] + dr * dr + di * di - corr[sym[sp, m]]
                cand[m] = c
                if c < best:
                    best = c
            mbest = 0
            if best != INFINITY:
                mbest = -1
                for m in range(K):
                    if cand[m] == best:
                        if mbest < 0:
                            mbest = m
                        else:
                            ties += 1
            bp[n, sp] = <unsigned char> mbest
            npm[sp] = best
        tmp = pm
        pm = npm
        npm = tmp

    cdef double metric = pm[0]
    path_arr = np.empty(T, dtype=np.int32)
    cdef int[::1] path = path_arr
    cdef Py_ssize_t s = 0, f
    for n in range(T - 1, -1, -1):
        f = (<Py_ssize_t> bp[n, s]) * S + s
        path[n] = <int> (f % K)
        s = f // K
    return path_arr, float(metric), int(ties)
