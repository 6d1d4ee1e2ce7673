"""Commutative matrix algebras over a finite field, and the dual-number relation check.

Algebras are concrete: subalgebras of n x n matrices, stored as an
echelon basis of flattened matrices.  Lengths are dimensions over the
ambient field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import NonCommuting, NotSubalgebra, PreconditionError
from .ff import FieldCtx, FieldElement, poly_roots


def _flat(Ms) -> np.ndarray:
    Ms = list(Ms)
    if not Ms:
        return np.zeros((0, 0), dtype=np.int64)
    return np.vstack([linalg.asmat(M).reshape(1, -1) for M in Ms])


class FiniteAlgebra:
    """The unital algebra generated by commuting matrices."""

    def __init__(self, ctx: FieldCtx, n: int, gens, basis: np.ndarray, pivots):
        self.ctx = ctx
        self.n = n
        self.gens = [linalg.asmat(g) for g in gens]
        self._R = basis
        self._piv = list(pivots)

    @property
    def length(self) -> int:
        return len(self._piv)

    @property
    def unit(self) -> np.ndarray:
        return linalg.identity(self.n)

    def basis(self) -> list[np.ndarray]:
        return [r.reshape(self.n, self.n) for r in self._R]

    def contains(self, M) -> bool:
        v = linalg.asmat(M).reshape(1, -1)
        if self.length == 0:
            return not v.any()
        return bool(linalg.in_span(v, self._R, self._piv, self.ctx).all())

    def coords(self, Ms) -> np.ndarray:
        return linalg.coords_in_rref(_flat(Ms), self._R, self._piv, self.ctx)

    def is_closed(self) -> bool:
        B = self.basis()
        return all(self.contains(linalg.matmul(a, b, self.ctx)) for a in B for b in B)

    def residue_eigenvalues(self) -> list[list[int]]:
        """Distinct eigenvalues (encodings) of each generator."""
        out = []
        for g in self.gens:
            cp = linalg.charpoly(g, self.ctx)
            out.append(sorted({int(r) for r in poly_roots(cp, self.ctx)}) if len(cp) > 1 else [])
        return out

    def is_local(self) -> bool:
        return all(len(v) == 1 for v in self.residue_eigenvalues())

    def maximal_ideal_generators(self) -> list[np.ndarray]:
        """g - lambda(g) for each generator; needs a local algebra."""
        ev = self.residue_eigenvalues()
        if not all(len(v) == 1 for v in ev):
            raise PreconditionError("algebra is not local")
        return [self.ctx.sub(g, linalg.identity(self.n) * v[0]) for g, v in zip(self.gens, ev)]

    def maximal_ideals(self) -> list[tuple[int, ...]]:
        """Common eigenvalue systems of the generators, one per maximal ideal."""
        ctx = self.ctx
        parts = [(linalg.identity(self.n), ())]
        for g in self.gens:
            new = []
            for W, sys in parts:
                M = linalg.restrict(g, W, ctx)
                cp = linalg.charpoly(M, ctx)
                vals = sorted({int(r) for r in poly_roots(cp, ctx)}) if len(cp) > 1 else []
                for a in vals:
                    K = linalg.gen_kernel(ctx.sub(M, linalg.identity(M.shape[0]) * a), ctx)
                    R, _ = linalg.rref(W, ctx)
                    new.append((linalg.matmul(K, R, ctx), sys + (a,)))
            parts = new
        return [sys for _, sys in parts]


def algebra_closure(gens, ctx: FieldCtx, n: int | None = None) -> FiniteAlgebra:
    """Vector-space basis of the unital algebra generated by pairwise commuting matrices."""
    gens = [linalg.asmat(g) for g in gens]
    if n is None:
        if not gens:
            raise ValueError("need generators or the matrix size")
        n = gens[0].shape[0]
    for g in gens:
        if g.shape != (n, n):
            raise ValueError("generators must be square of the same size")
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if not linalg.commute(gens[i], gens[j], ctx):
                raise NonCommuting(f"generators {i} and {j} do not commute")
    R, piv = linalg.rref(linalg.identity(n).reshape(1, -1), ctx)
    frontier = [linalg.identity(n)]
    while frontier:
        cand = [linalg.matmul(a, g, ctx) for a in frontier for g in gens]
        if not cand:
            break
        X = _flat(cand)
        keep = ~linalg.in_span(X, R, piv, ctx)
        if not keep.any():
            break
        # add one at a time to keep the frontier free of redundancy
        frontier = []
        for i in np.flatnonzero(keep):
            if not linalg.in_span(X[i : i + 1], R, piv, ctx).all():
                R, piv = linalg.rref(np.vstack([R, X[i : i + 1]]), ctx)
                frontier.append(cand[i])
    return FiniteAlgebra(ctx, n, gens, R, piv)


def ideal_from(alg: FiniteAlgebra, Ms) -> FiniteAlgebra:
    """Subspace object (same class) holding a list of matrices as a basis."""
    X = _flat(Ms)
    if len(X):
        R, piv = linalg.rref(X, alg.ctx)
    else:
        R, piv = np.zeros((0, alg.n * alg.n), dtype=np.int64), []
    return FiniteAlgebra(alg.ctx, alg.n, [], R, piv)


def annihilator_of_quotient(T: FiniteAlgebra, Tt: FiniteAlgebra) -> FiniteAlgebra:
    """J = {a in T : a x in T for all x in Tt}, checked to be an ideal of Tt."""
    ctx = T.ctx
    if T.n != Tt.n:
        raise NotSubalgebra("algebras act on different spaces")
    TB = T.basis()
    for a in TB:
        if not Tt.contains(a):
            raise NotSubalgebra("T is not contained in T~")
    TtB = Tt.basis()
    # residual of v modulo T is linear in v: v - v[piv] R
    def resid(v):
        v = v.reshape(1, -1)
        return ctx.sub(v, linalg.matmul(v[:, T._piv], T._R, ctx))[0]

    blocks = []
    for x in TtB:
        cols = [resid(linalg.matmul(a, x, ctx)) for a in TB]
        blocks.append(np.vstack(cols).T)  # (n^2, dim T): column i = residual of t_i x
    A = np.vstack(blocks)
    coeffs = linalg.nullspace(A, ctx)  # x with A x = 0 as rows
    Tmat = T._R
    Jrows = linalg.matmul(coeffs, Tmat, ctx) if len(coeffs) else np.zeros((0, T.n * T.n), dtype=np.int64)
    J = ideal_from(T, [r.reshape(T.n, T.n) for r in Jrows])
    for a in J.basis():
        for x in TtB:
            if not J.contains(linalg.matmul(a, x, ctx)):
                raise NotSubalgebra("J is not an ideal of T~")
    return J


def is_ideal(J: FiniteAlgebra, A: FiniteAlgebra) -> bool:
    ctx = J.ctx
    return all(J.contains(linalg.matmul(a, x, ctx)) for a in J.basis() for x in A.basis())


def simultaneous_kernel(Ms, d: int, ctx: FieldCtx) -> np.ndarray:
    """Rows v (column vectors) with M v = 0 for every M."""
    Ms = [linalg.asmat(M) for M in Ms]
    if not Ms:
        return linalg.identity(d)
    return linalg.nullspace(np.vstack(Ms), ctx)


def m_torsion_dim(module, alg: FiniteAlgebra) -> int:
    """dim of the [m]-torsion: common kernel of g - lambda(g) over the generators of alg."""
    d = module.dim if hasattr(module, "dim") else int(module)
    if d != alg.n:
        raise PreconditionError(f"module of dimension {d} but algebra acts on {alg.n}")
    if d == 0:
        return 0
    return len(simultaneous_kernel(alg.maximal_ideal_generators(), d, alg.ctx))


def restriction_length(alg: FiniteAlgebra, W: np.ndarray) -> int:
    """length of alg / Ann(W) for a stable subspace W (rows): rank of restriction."""
    ctx = alg.ctx
    if len(W) == 0:
        return 0
    R, _ = linalg.rref(W, ctx)
    imgs = [linalg.restrict(a, R, ctx).reshape(1, -1) for a in alg.basis()]
    return linalg.rank(np.vstack(imgs), ctx)


# --------------------------------------------------------------------------
# dual numbers


def _dmul(A, B, ctx):
    """Product of matrices over k[e]/e^2 stored as (real, eps) pairs."""
    a0, a1 = A
    b0, b1 = B
    return (linalg.matmul(a0, b0, ctx), ctx.add(linalg.matmul(a0, b1, ctx), linalg.matmul(a1, b0, ctx)))


def _dsub_scalar(A, s, ctx):
    n = A[0].shape[0]
    I = linalg.identity(n)
    return (ctx.sub(A[0], I * s[0]), ctx.sub(A[1], I * s[1]))


def _dinv_scalar(s, ctx):
    """(a + b e)^-1 = a^-1 - b a^-2 e."""
    a, b = int(s[0]), int(s[1])
    ai = int(ctx.inv(a))
    return (ai, int(ctx.neg(ctx.mul(b, ctx.mul(ai, ai)))))


def _is_zero(A) -> bool:
    return not (np.any(A[0]) or np.any(A[1]))


@dataclass(frozen=True)
class DualNumberRep:
    """rho(tau), rho(phi) in GL_2(k[e]/e^2) and alpha in k[e]/e^2, as (real, eps) parts."""

    ctx: FieldCtx
    tau: tuple
    phi: tuple
    alpha: tuple

    def __post_init__(self):
        ctx = self.ctx
        for name in ("tau", "phi"):
            a, b = getattr(self, name)
            object.__setattr__(self, name, (linalg.asmat(a) % ctx.q, linalg.asmat(b) % ctx.q))
        if not np.array_equal(self.tau[0], linalg.identity(2)):
            raise PreconditionError("rho(tau) must reduce to the identity")
        if int(self.alpha[0]) == 0:
            raise PreconditionError("alpha must be a unit")
        object.__setattr__(self, "alpha", (int(self.alpha[0]), int(self.alpha[1])))

    @property
    def a(self) -> FieldElement:
        return FieldElement(self.ctx, self.alpha[0])

    def det_phi(self) -> tuple[int, int]:
        ctx = self.ctx
        (p, q) = self.phi
        d0 = ctx.sub(ctx.mul(p[0, 0], p[1, 1]), ctx.mul(p[0, 1], p[1, 0]))
        d1 = ctx.add(
            ctx.sub(ctx.mul(p[0, 0], q[1, 1]), ctx.mul(p[0, 1], q[1, 0])),
            ctx.sub(ctx.mul(q[0, 0], p[1, 1]), ctx.mul(q[0, 1], p[1, 0])),
        )
        return int(d0), int(d1)


def dual_number_check(rep: DualNumberRep) -> dict:
    """Evaluate the five relations exactly; 'all' is their conjunction."""
    ctx = rep.ctx
    one = (1, 0)
    tr = (int(ctx.add(rep.tau[0][0, 0], rep.tau[0][1, 1])), int(ctx.add(rep.tau[1][0, 0], rep.tau[1][1, 1])))
    t1 = _dsub_scalar(rep.tau, one, ctx)
    pa = _dsub_scalar(rep.phi, rep.alpha, ctx)
    pai = _dsub_scalar(rep.phi, _dinv_scalar(rep.alpha, ctx), ctx)
    out = {
        "trace_tau_is_2": tr == (2 % ctx.p, 0),
        "tau_unipotent": _is_zero(_dmul(t1, t1, ctx)),
        "tau_phi_alpha": _is_zero(_dmul(t1, pa, ctx)),
        "phi_alpha_inv_tau": _is_zero(_dmul(pai, t1, ctx)),
        "phi_quadratic": _is_zero(_dmul(pa, pai, ctx)),
    }
    out["all"] = all(out.values())
    return out
