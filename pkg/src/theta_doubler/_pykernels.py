"""Pure numpy versions of the compiled kernels (same signatures, same results)."""

from __future__ import annotations

import numpy as np


def rref_modp(A, p, ncols=-1):
    """Reduced row echelon form in place; returns the pivot columns."""
    m, n = A.shape
    if ncols < 0 or ncols > n:
        ncols = n
    A %= p
    rank = 0
    pivots = []
    for c in range(ncols):
        if rank == m:
            break
        nz = np.flatnonzero(A[rank:, c])
        if len(nz) == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            A[[rank, piv], c:] = A[[piv, rank], c:]
        inv = pow(int(A[rank, c]), p - 2, p)
        if inv != 1:
            A[rank, c:] = A[rank, c:] * inv % p
        col = A[:, c].copy()
        col[rank] = 0
        rows = np.flatnonzero(col)
        if len(rows):
            A[rows, c:] = (A[rows, c:] - np.outer(col[rows], A[rank, c:])) % p
        pivots.append(c)
        rank += 1
    return pivots


def divisor_accumulate(out, phi_exp, dpow, psi_exp, L, p, t=1):
    """Accumulate sum_{d | n} psi(n/d) phi(d) d^(k-1) into ``out[n*t, exponent]``."""
    P = out.shape[0]
    nmax = (P - 1) // t
    for d in range(1, nmax + 1):
        ed = phi_exp[d]
        w = dpow[d]
        if ed < 0 or w == 0:
            continue
        m = np.arange(1, nmax // d + 1)
        em = psi_exp[m]
        keep = em >= 0
        n = d * m[keep] * t
        np.add.at(out, (n, (ed + em[keep]) % L), w)
    out %= p
