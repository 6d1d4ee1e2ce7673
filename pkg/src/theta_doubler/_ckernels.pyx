# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels over prime fields.

Mirrors ``_pykernels`` exactly; ``kernels`` picks one at import.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


cdef inline int64_t _inv(int64_t a, int64_t p):
    cdef int64_t r = 1, e = p - 2, b = a % p
    while e:
        if e & 1:
            r = r * b % p
        b = b * b % p
        e >>= 1
    return r


def rref_modp(int64_t[:, ::1] A, int64_t p, Py_ssize_t ncols=-1):
    """Reduced row echelon form in place; returns the pivot columns.

    Rows ``0..len(pivots)-1`` of ``A`` hold the reduced basis afterwards and
    the remaining rows are zero.  Pivots are searched in the first ``ncols``
    columns only; row operations span the full width.
    """
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]
    cdef Py_ssize_t rank = 0, c, i, j, piv
    cdef int64_t f, inv, t
    cdef int64_t* prow
    cdef int64_t* irow
    if ncols < 0 or ncols > n:
        ncols = n
    pivots = []
    for i in range(m):
        for j in range(n):
            A[i, j] = A[i, j] % p
            if A[i, j] < 0:
                A[i, j] += p
    for c in range(ncols):
        if rank == m:
            break
        piv = -1
        for i in range(rank, m):
            if A[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != rank:
            for j in range(c, n):
                t = A[piv, j]
                A[piv, j] = A[rank, j]
                A[rank, j] = t
        prow = &A[rank, 0]
        inv = _inv(prow[c], p)
        if inv != 1:
            for j in range(c, n):
                prow[j] = prow[j] * inv % p
        for i in range(m):
            if i == rank:
                continue
            irow = &A[i, 0]
            f = irow[c]
            if f == 0:
                continue
            f = p - f
            for j in range(c, n):
                if prow[j]:
                    irow[j] = (irow[j] + f * prow[j]) % p
        pivots.append(c)
        rank += 1
    return pivots


def divisor_accumulate(int64_t[:, ::1] out, int64_t[::1] phi_exp, int64_t[::1] dpow,
                       int64_t[::1] psi_exp, int64_t L, int64_t p, int64_t t=1):
    """Accumulate sum_{d | n} psi(n/d) phi(d) d^(k-1) into ``out[n*t, exponent]``.

    Character values are roots of unity encoded by their exponent mod ``L``
    (``-1`` for zero); ``dpow[d] = d^(k-1) mod p``.  Rows of ``out`` index the
    exponent of q after the scaling q -> q^t.
    """
    cdef Py_ssize_t P = out.shape[0]
    cdef Py_ssize_t d, m, n, nmax
    cdef int64_t ed, em, w
    nmax = (P - 1) // t
    for d in range(1, nmax + 1):
        ed = phi_exp[d]
        if ed < 0:
            continue
        w = dpow[d]
        if w == 0:
            continue
        m = 1
        n = d
        while n <= nmax:
            em = psi_exp[m]
            if em >= 0:
                out[n * t, (ed + em) % L] += w
            m += 1
            n += d
    for n in range(P):
        for m in range(L):
            out[n, m] = out[n, m] % p
