"""Dense exact linear algebra over F_{p^r}.

Matrices are int64 arrays of field encodings.  Over a prime field the row
reduction runs in the compiled kernel and products go through BLAS in
float64 (exact while ``inner_dim * (p-1)**2 < 2**53``).  Extension fields use
the generic vectorised path.

Operator matrices follow the column convention: column ``i`` holds the
coordinates of the image of basis vector ``i``.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import DivisionByZero, NotInSpan
from .ff import FieldCtx

_EXACT = 2**52


def asmat(A) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(A, dtype=np.int64))


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def matmul(A, B, ctx: FieldCtx) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.shape[-1] == 0:
        return np.zeros(A.shape[:-1] + B.shape[1:], dtype=np.int64)
    p = ctx.p
    if ctx.r == 1:
        return _matmul_prime(A, B, p)
    Ad = ctx.digits(A)
    Bd = ctx.digits(B)
    r = ctx.r
    out = np.zeros(A.shape[:-1] + B.shape[1:] + (2 * r - 1,), dtype=np.int64)
    for i in range(r):
        for j in range(r):
            out[..., i + j] += _matmul_prime(Ad[..., i], Bd[..., j], p)
    return ctx.from_digits(ctx.reduce_digits(out))


def _matmul_prime(A, B, p):
    K = A.shape[-1]
    if K * (p - 1) ** 2 < _EXACT:
        C = np.asarray(A, dtype=np.float64) @ np.asarray(B, dtype=np.float64)
        return np.rint(C).astype(np.int64) % p
    step = max(1, _EXACT // (p - 1) ** 2)
    C = np.zeros(A.shape[:-1] + B.shape[1:], dtype=np.int64)
    for s in range(0, K, step):
        C = (C + _matmul_prime(A[..., s : s + step], B[s : s + step], p)) % p
    return C


def rref(A, ctx: FieldCtx, ncols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form: (nonzero rows, pivot columns)."""
    R = asmat(A).copy()
    if R.ndim != 2:
        raise ValueError("rref expects a 2-d array")
    if R.shape[0] == 0 or R.shape[1] == 0:
        return R[:0], []
    nc = R.shape[1] if ncols is None else ncols
    if ctx.r == 1:
        pivots = list(kernels.rref_modp(R, ctx.p, nc))
    else:
        pivots = _rref_generic(R, ctx, nc)
    return R[: len(pivots)].copy(), pivots


def _rref_generic(R, ctx, ncols):
    m = R.shape[0]
    rank = 0
    pivots = []
    for c in range(ncols):
        if rank == m:
            break
        nz = np.flatnonzero(R[rank:, c])
        if len(nz) == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            R[[rank, piv]] = R[[piv, rank]]
        R[rank] = ctx.mul(R[rank], int(ctx.inv(R[rank, c])))
        col = R[:, c].copy()
        col[rank] = 0
        rows = np.flatnonzero(col)
        if len(rows):
            R[rows] = ctx.sub(R[rows], ctx.mul(col[rows, None], R[rank][None, :]))
        pivots.append(c)
        rank += 1
    return pivots


def rank(A, ctx: FieldCtx) -> int:
    return len(rref(A, ctx)[1])


def nullspace(A, ctx: FieldCtx) -> np.ndarray:
    """Rows spanning {x : A x = 0}, in reduced echelon form."""
    A = asmat(A)
    n = A.shape[1]
    R, piv = rref(A, ctx)
    free = [j for j in range(n) if j not in set(piv)]
    N = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        N[k, f] = 1
        for i, pc in enumerate(piv):
            N[k, pc] = int(ctx.neg(R[i, f]))
    if len(free):
        N, _ = rref(N, ctx)
    return N


def inverse(A, ctx: FieldCtx) -> np.ndarray:
    A = asmat(A)
    n = A.shape[0]
    aug = np.hstack([A, identity(n)])
    R, piv = rref(aug, ctx, ncols=n)
    if piv != list(range(n)):
        raise DivisionByZero("matrix is singular")
    return R[:, n:].copy()


def matpow(A, e: int, ctx: FieldCtx) -> np.ndarray:
    A = asmat(A)
    out = identity(A.shape[0])
    base = A
    while e:
        if e & 1:
            out = matmul(out, base, ctx)
        base = matmul(base, base, ctx)
        e >>= 1
    return out


def coords_in_rref(V, R, pivots, ctx: FieldCtx) -> np.ndarray:
    """Coordinates of the rows of V in the echelon basis R (exact check).

    Raises NotInSpan if some row is not in the row space of R.
    """
    V = asmat(V)
    if V.ndim == 1:
        V = V[None, :]
    C = V[:, pivots] if len(pivots) else np.zeros((V.shape[0], 0), dtype=np.int64)
    resid = ctx.sub(V, matmul(C, R, ctx)) if len(pivots) else V % ctx.p
    bad = np.flatnonzero(np.any(resid != 0, axis=1))
    if len(bad):
        raise NotInSpan(f"{len(bad)} vector(s) outside the span", rows=bad.tolist())
    return C


def in_span(V, R, pivots, ctx: FieldCtx) -> np.ndarray:
    V = asmat(V)
    if V.ndim == 1:
        V = V[None, :]
    C = V[:, pivots] if len(pivots) else np.zeros((V.shape[0], 0), dtype=np.int64)
    resid = ctx.sub(V, matmul(C, R, ctx)) if len(pivots) else V
    return ~np.any(resid != 0, axis=1)


def gen_kernel(M, ctx: FieldCtx) -> np.ndarray:
    """Rows spanning the generalised kernel of the square matrix M (column convention)."""
    M = asmat(M)
    n = M.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    P = M
    prev = rank(P, ctx)
    e = 1
    while e < n:
        P = matmul(P, P, ctx)
        e *= 2
        cur = rank(P, ctx)
        if cur == prev:
            break
        prev = cur
    return nullspace(P, ctx)


def is_nilpotent(M, ctx: FieldCtx) -> bool:
    M = asmat(M)
    n = M.shape[0]
    if n == 0:
        return True
    P = M
    e = 1
    while e < n:
        P = matmul(P, P, ctx)
        e *= 2
    return not np.any(P)


def charpoly(A, ctx: FieldCtx) -> list[int]:
    """Characteristic polynomial det(X - A), coefficients low->high (encodings).

    Hessenberg reduction followed by the standard recurrence; O(n^3).
    """
    H = asmat(A).copy()
    n = H.shape[0]
    for j in range(n - 2):
        nz = np.flatnonzero(H[j + 1 :, j])
        if len(nz) == 0:
            continue
        i = j + 1 + nz[0]
        if i != j + 1:
            H[[i, j + 1]] = H[[j + 1, i]]
            H[:, [i, j + 1]] = H[:, [j + 1, i]]
        pinv = int(ctx.inv(H[j + 1, j]))
        for i in range(j + 2, n):
            u = int(ctx.mul(H[i, j], pinv))
            if u:
                H[i] = ctx.sub(H[i], ctx.mul(u, H[j + 1]))
                H[:, j + 1] = ctx.add(H[:, j + 1], ctx.mul(u, H[:, i]))
    # polys[m] = charpoly of leading m x m block
    polys = [[1]]
    for m in range(1, n + 1):
        # (X - h_mm) * p_{m-1}
        prev = polys[m - 1]
        new = [0] + list(prev)
        hmm = int(H[m - 1, m - 1])
        for i, c in enumerate(prev):
            new[i] = int(ctx.sub(new[i], ctx.mul(hmm, c)))
        t = 1
        for i in range(1, m):
            t = int(ctx.mul(t, H[m - i, m - i - 1]))
            coef = int(ctx.mul(t, H[m - i - 1, m - 1]))
            if coef:
                for k, c in enumerate(polys[m - i - 1]):
                    new[k] = int(ctx.sub(new[k], ctx.mul(coef, c)))
        polys.append(new)
    return polys[n]


def commute(A, B, ctx: FieldCtx) -> bool:
    return bool(np.array_equal(matmul(A, B, ctx), matmul(B, A, ctx)))


def row_space_sum(A, B, ctx: FieldCtx) -> tuple[np.ndarray, list[int]]:
    return rref(np.vstack([asmat(A), asmat(B)]), ctx)


def restrict(M, W, ctx: FieldCtx) -> np.ndarray:
    """Matrix (column convention) of M on the row space of W, in the basis rref(W).

    The row space must be stable under M (NotInSpan otherwise).
    """
    R, piv = rref(W, ctx)
    images = matmul(R, asmat(M).T, ctx)  # row i = M applied to basis vector i
    C = coords_in_rref(images, R, piv, ctx)
    return C.T.copy()
