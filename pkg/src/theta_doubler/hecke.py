"""Hecke operators on q-expansions and on spaces, and localization at eigensystems.

Matrices of operators use the column convention: column j holds the
coordinates of the image of basis vector j.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd, lcm

import numpy as np
from sympy import GF, Poly, divisors, primerange, symbols

from . import linalg
from .characters import DirichletChar
from .eisbasis import ModFormSpace
from .errors import (
    AmbiguousSolve,
    FieldTooSmall,
    InsufficientPrecision,
    NonOrdinary,
    NotAnEigenvalue,
    NotInSpan,
    PreconditionError,
    UsageError,
)
from .ff import FieldCtx, FieldElement, poly_roots
from .qseries import QExpansion, scale_q

log = logging.getLogger(__name__)

_X = symbols("x")


# --------------------------------------------------------------------------
# operators on q-expansions


def _coef(chi: DirichletChar, d: int, k: int, ctx: FieldCtx) -> int:
    """chi(d) d^(k-1) as an encoding."""
    if gcd(d, chi.N) != 1:
        return 0
    return int(ctx.mul(int(chi.values(np.array([d]))[0]), pow(d, k - 1, ctx.p)))


def hecke_rows(V: np.ndarray, n: int, k: int, chi: DirichletChar) -> np.ndarray:
    """T_n applied to each row of V (coefficient arrays over chi.ctx).

    a_m(T_n f) = sum_{d | (m, n)} chi(d) d^(k-1) a_{mn/d^2}(f), which gives
    U_l for l | N since chi vanishes there.  The output has the
    ceil(prec/n) coefficients that the input determines.
    """
    ctx = chi.ctx
    V = np.atleast_2d(V)
    P = V.shape[1]
    L = (P - 1) // n + 1 if P else 0
    out = np.zeros((V.shape[0], L), dtype=np.int64)
    for d in divisors(n):
        c = 1 if d == 1 else _coef(chi, d, k, ctx)
        if c == 0:
            continue
        j = np.arange(0, L, d)
        src = (j // d) * (n // d)
        out[:, j] = ctx.add(out[:, j], ctx.mul(c, V[:, src]))
    return out


def apply_Tn(f: QExpansion, n: int, k: int, chi: DirichletChar, prec: int | None = None) -> QExpansion:
    """T_n f for the level chi.N; U_l when l divides the level."""
    if n < 1:
        raise UsageError("n must be positive")
    L = (f.prec - 1) // n + 1 if f.prec else 0
    if prec is not None and prec > L:
        raise InsufficientPrecision(f"T_{n} to precision {prec} needs {n * (prec - 1) + 1} input terms, have {f.prec}")
    if f.ctx is None:
        out = [Fraction(0)] * L
        for d in divisors(n):
            c = 1 if d == 1 else (chi.sign(d) * d ** (k - 1) if gcd(d, chi.N) == 1 else 0)
            if c:
                for j in range(0, L, d):
                    out[j] += c * f.coeffs[(j // d) * (n // d)]
        g = QExpansion(out)
    else:
        g = QExpansion(hecke_rows(f.coeffs, n, k, chi.with_ctx(f.ctx))[0], f.ctx)
    return g if prec is None else g.truncate(prec)


# --------------------------------------------------------------------------
# operator descriptors


@dataclass(frozen=True)
class Op:
    """T_n (U_n when n divides the level), the diamond <d>, or the zero map."""

    kind: str  # "T", "diamond", "zero"
    n: int = 1

    @classmethod
    def parse(cls, s) -> "Op":
        if isinstance(s, Op):
            return s
        m = re.fullmatch(r"\s*([TU])\s*(\d+)\s*", s)
        if m:
            return cls("T", int(m.group(2)))
        m = re.fullmatch(r"\s*<\s*(\d+)\s*>\s*", s)
        if m:
            return cls("diamond", int(m.group(1)))
        if s.strip() == "0":
            return cls("zero")
        raise UsageError(f"unknown operator {s!r}")

    def name(self, N: int) -> str:
        if self.kind == "diamond":
            return f"<{self.n}>"
        if self.kind == "zero":
            return "0"
        return f"U{self.n}" if gcd(self.n, N) > 1 else f"T{self.n}"


# --------------------------------------------------------------------------
# eigensystems and components


@dataclass(frozen=True)
class Eigensystem:
    """a_l for primes l not dividing pN, plus optional U_l (l | N) and T_p values."""

    ctx: FieldCtx
    values: dict  # l -> encoding
    extended: dict = field(default_factory=dict)

    def a(self, ell: int) -> FieldElement:
        v = self.values.get(ell, self.extended.get(ell))
        if v is None:
            raise KeyError(ell)
        return FieldElement(self.ctx, v)

    def anemic(self) -> "Eigensystem":
        return Eigensystem(self.ctx, dict(self.values))

    def extend(self, extra: dict) -> "Eigensystem":
        return Eigensystem(self.ctx, dict(self.values), {**self.extended, **{int(k): int(v) for k, v in extra.items()}})

    def to_json(self) -> dict:
        return {
            "field": self.ctx.label,
            "a": {str(k): str(FieldElement(self.ctx, v)) for k, v in sorted(self.values.items())},
            "extended": {str(k): str(FieldElement(self.ctx, v)) for k, v in sorted(self.extended.items())},
        }


def eigensystem_from_qexp(f: QExpansion, N: int, bound: int | None = None) -> Eigensystem:
    """Anaemic eigensystem read off a normalized eigenform mod p."""
    ctx = f.ctx
    bound = f.prec - 1 if bound is None else bound
    if bound >= f.prec:
        raise InsufficientPrecision(f"a_l for l <= {bound} needs precision {bound + 1}")
    vals = {int(ell): int(f.coeffs[ell]) for ell in primerange(2, bound + 1) if (N * ctx.p) % ell}
    return Eigensystem(ctx, vals)


@dataclass(frozen=True, eq=False)
class LocalComponent:
    """A Hecke-stable subspace of a ModFormSpace with restricted operators.

    ``coords`` are rows in reduced echelon form, in coordinates of the
    space basis; ``rows`` caches their q-expansions at some precision.
    """

    space: ModFormSpace
    eigensystem: Eigensystem
    coords: np.ndarray
    ops: dict = field(default_factory=dict)
    rows: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    @property
    def ctx(self) -> FieldCtx:
        return self.space.ctx

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    @property
    def pivots(self) -> list[int]:
        return [int(np.flatnonzero(r)[0]) for r in self.coords]

    @property
    def sturm(self) -> int:
        return self.space.sturm

    def rows_at(self, prec: int) -> np.ndarray:
        if self.rows is not None and self.rows.shape[1] >= prec:
            return self.rows[:, :prec]
        return self.space.rows_at(prec, self.coords)

    def with_rows(self, prec: int) -> "LocalComponent":
        """Same component with q-expansions cached to ``prec``."""
        if self.rows is not None and self.rows.shape[1] >= prec:
            return self
        return replace(self, rows=self.rows_at(prec))

    def series(self, i: int, prec: int | None = None) -> QExpansion:
        prec = self.space.prec if prec is None else prec
        return QExpansion(self.rows_at(prec)[i], self.ctx)

    def qexp(self, x, prec: int | None = None) -> np.ndarray:
        """q-expansion of the component vector with coordinates x (length dim)."""
        prec = self.space.prec if prec is None else prec
        return linalg.matmul(linalg.asmat(x).reshape(1, -1), self.rows_at(prec), self.ctx)[0]

    def op(self, name: str) -> np.ndarray:
        return self.ops[name]

    def subcomponent(self, K: np.ndarray, eigensystem: Eigensystem | None = None) -> "LocalComponent":
        """The subspace spanned by the rows of K (coordinates in this component's basis)."""
        return _sub(self, K, eigensystem or self.eigensystem)


def _sub(comp: LocalComponent, K: np.ndarray, es: Eigensystem) -> LocalComponent:
    ctx = comp.ctx
    K = linalg.asmat(K)
    W_new, _ = linalg.rref(linalg.matmul(K, comp.coords, ctx), ctx)
    # coordinates of the new rows in the old basis
    X = linalg.coords_in_rref(W_new, comp.coords, comp.pivots, ctx) if len(W_new) else np.zeros((0, comp.dim), dtype=np.int64)
    rows = linalg.matmul(X, comp.rows, ctx) if comp.rows is not None else None
    piv_new = [int(np.flatnonzero(r)[0]) for r in W_new]
    ops = {}
    for name, M in comp.ops.items():
        img = linalg.matmul(linalg.matmul(X, M.T, ctx), comp.coords, ctx)  # images in space coordinates
        ops[name] = linalg.coords_in_rref(img, W_new, piv_new, ctx).T.copy() if len(W_new) else np.zeros((0, 0), dtype=np.int64)
    return LocalComponent(comp.space, es, W_new, ops, rows, dict(comp.info))


def whole_space(space: ModFormSpace) -> LocalComponent:
    return LocalComponent(space, Eigensystem(space.ctx, {}), linalg.identity(space.dim), {}, None)


# --------------------------------------------------------------------------
# operator matrices


def _needed_prec(op: Op, B: int) -> int:
    return op.n * (B - 1) + 1


def _images(comp: LocalComponent, op: Op) -> np.ndarray:
    """Images of the component rows under T_n, in space coordinates (exact residual check)."""
    space = comp.space
    B = space.sturm
    P = _needed_prec(op, B)
    if comp.rows is None or comp.rows.shape[1] < P:
        if P > space.prec and space.recipe is None:
            raise AmbiguousSolve(f"T_{op.n} needs precision {P} but the space has {space.prec} and no recipe")
    G = comp.rows_at(P)
    H = hecke_rows(G, op.n, space.k, space.chi)
    L = min(H.shape[1], space.prec)
    if L < B:
        raise AmbiguousSolve(f"image precision {L} below the Sturm bound {B}")
    return linalg.coords_in_rref(H[:, :L], space.matrix[:, :L], list(space.basis.pivots), space.ctx)


def operator_matrix(obj, op) -> np.ndarray:
    """Matrix of an operator on a ModFormSpace or a LocalComponent."""
    comp = whole_space(obj) if isinstance(obj, ModFormSpace) else obj
    op = Op.parse(op)
    ctx = comp.ctx
    d = comp.dim
    N = comp.space.N
    if op.kind == "zero":
        return np.zeros((d, d), dtype=np.int64)
    if op.kind == "diamond":
        if gcd(op.n, N) != 1:
            raise UsageError(f"<{op.n}> needs d prime to the level {N}")
        return linalg.identity(d) * int(comp.space.chi.values(np.array([op.n]))[0])
    if d == 0:
        return np.zeros((0, 0), dtype=np.int64)
    Y = _images(comp, op)
    try:
        X = linalg.coords_in_rref(Y, comp.coords, comp.pivots, ctx)
    except NotInSpan as e:
        raise NotInSpan(f"{op.name(N)} does not preserve the component") from e
    return X.T.copy()


def with_ops(comp: LocalComponent, ops) -> LocalComponent:
    """Component with the matrices of ``ops`` computed and stored."""
    new = dict(comp.ops)
    for o in ops:
        o = Op.parse(o)
        name = o.name(comp.space.N)
        if name not in new:
            new[name] = operator_matrix(comp, o)
    return replace(comp, ops=new)


# --------------------------------------------------------------------------
# decomposition


def _distinct_roots(M: np.ndarray, ctx: FieldCtx) -> tuple[list[int], int]:
    """Distinct eigenvalues in ctx and the number of eigenvalues (with multiplicity) found."""
    cp = linalg.charpoly(M, ctx)
    roots = poly_roots(cp, ctx) if len(cp) > 1 else []
    vals = sorted({int(r) for r in roots})
    return vals, len(roots)


def _min_extension(M: np.ndarray, ctx: FieldCtx) -> int | None:
    if ctx.r != 1:
        return None
    cp = linalg.charpoly(M, ctx)
    _, facs = Poly(list(reversed([int(c) for c in cp])), _X, domain=GF(ctx.p)).factor_list()
    return lcm(*[f.degree() for f, _ in facs]) if facs else 1


def _split(comp: LocalComponent, name: str, M: np.ndarray, ell: int, target: int | None, strict: bool):
    ctx = comp.ctx
    d = comp.dim
    if target is not None:
        K = linalg.gen_kernel(ctx.sub(M, linalg.identity(d) * target), ctx)
        return [(target, K)] if len(K) else []
    vals, nroots = _distinct_roots(M, ctx)
    if nroots < d and strict:
        r = _min_extension(M, ctx)
        raise FieldTooSmall(f"{name} has eigenvalues outside {ctx.label}", min_r=r)
    out = []
    for a in vals:
        out.append((a, linalg.gen_kernel(ctx.sub(M, linalg.identity(d) * a), ctx)))
    return out


def anemic_decompose(
    space: ModFormSpace,
    ell_bound: int | None = None,
    target: Eigensystem | None = None,
    patience: int | None = None,
    strict: bool = True,
    lookahead: int = 6,
    prec_hint: int = 0,
) -> list[tuple[Eigensystem, LocalComponent]]:
    """Generalized eigenspaces for T_l, l <= ell_bound prime to pN.

    With ``target`` only the component of that eigensystem is followed.
    With ``patience`` the loop stops once all dimensions have been stable
    for that many consecutive primes.  Non-strict mode drops the part of
    the space whose eigenvalues lie outside the field.  Proper
    subcomponents get q-expansions to at least ``prec_hint`` in one go.
    """
    ctx = space.ctx
    N = space.N
    B = space.sturm
    ell_bound = B if ell_bound is None else ell_bound
    primes = [int(ell) for ell in primerange(2, ell_bound + 1) if (N * ctx.p) % ell]
    comps = [whole_space(space)]
    stable = 0
    used = []
    for i, ell in enumerate(primes):
        op = Op("T", ell)
        name = op.name(N)
        new = []
        changed = False
        for comp in comps:
            want = _needed_prec(op, B)
            if comp.rows is None or comp.rows.shape[1] < want:
                ahead = primes[min(i + lookahead, len(primes) - 1)]
                P = max(want, _needed_prec(Op("T", ahead), B), prec_hint) if comp.dim < space.dim else want
                comp = replace(comp, rows=comp.rows_at(P))
            M = operator_matrix(comp, op)
            comp = replace(comp, ops={**comp.ops, name: M})
            t = None if target is None else target.values.get(ell)
            if target is not None and t is None:
                raise PreconditionError(f"target eigensystem lacks a_{ell}")
            parts = _split(comp, name, M, ell, t, strict)
            if target is not None and not parts:
                raise NotAnEigenvalue(f"a_{ell} = {FieldElement(ctx, t)} is not an eigenvalue of {name} on the component")
            for a, K in parts:
                es = Eigensystem(ctx, {**comp.eigensystem.values, ell: a})
                sub = comp if len(K) == comp.dim else comp.subcomponent(K, es)
                if len(K) != comp.dim:
                    changed = True
                else:
                    sub = replace(sub, eigensystem=es)
                new.append(sub)
            if sum(len(K) for _, K in parts) != comp.dim:
                changed = True
        comps = new
        used.append(ell)
        stable = 0 if changed else stable + 1
        log.info("T_%d: %s", ell, [c.dim for c in comps])
        if patience is not None and stable >= patience:
            break
    for c in comps:
        c.info.update({"primes_used": used, "stopped_early": used != primes, "ell_bound": ell_bound})
    return [(c.eigensystem, c) for c in comps if c.dim]


def localize(space: ModFormSpace, target: Eigensystem, **kw) -> LocalComponent:
    """The generalized eigenspace of a single anaemic eigensystem."""
    out = anemic_decompose(space, target=target, **kw)
    if not out:
        raise NotAnEigenvalue("the eigensystem does not occur in the space")
    return out[0][1]


def localize_extended(comp: LocalComponent, extra: dict) -> LocalComponent:
    """Cut further by (U_l - a_l) for l | N and (T_p - a_p)."""
    ctx = comp.ctx
    N = comp.space.N
    for ell, a in extra.items():
        ell = int(ell)
        a = int(ctx(a)) if not isinstance(a, FieldElement) else int(a)
        if gcd(ell, N) == 1 and ell != ctx.p:
            raise UsageError(f"{ell} neither divides the level nor equals p")
        op = Op("T", ell)
        name = op.name(N)
        comp = with_ops(comp, [op])
        M = comp.ops[name]
        vals, _ = _distinct_roots(M, ctx)
        if a not in vals:
            raise NotAnEigenvalue(f"{FieldElement(ctx, a)} is not an eigenvalue of {name}")
        K = linalg.gen_kernel(ctx.sub(M, linalg.identity(comp.dim) * a), ctx)
        es = comp.eigensystem.extend({ell: a})
        comp = comp.subcomponent(K, es) if len(K) != comp.dim else replace(comp, eigensystem=es)
    return comp


def eigenvalues(comp: LocalComponent, op) -> list[FieldElement]:
    """Distinct eigenvalues of an operator on the component (within its field)."""
    op = Op.parse(op)
    comp = with_ops(comp, [op])
    vals, _ = _distinct_roots(comp.ops[op.name(comp.space.N)], comp.ctx)
    return [FieldElement(comp.ctx, v) for v in vals]


# --------------------------------------------------------------------------
# oldforms at an auxiliary prime


def oldform_embed(f: QExpansion, N: int, ell: int, space: ModFormSpace | None = None) -> tuple[QExpansion, QExpansion]:
    """(f(q), f(q^l)) at the precision of f; checked against the level-Nl space if given."""
    if N % ell == 0:
        raise PreconditionError(f"{ell} divides the level {N}")
    g1 = f
    g2 = scale_q(f, ell, f.prec)
    if space is not None:
        if space.N != N * ell:
            raise UsageError(f"space has level {space.N}, expected {N * ell}")
        if f.prec < space.prec:
            raise InsufficientPrecision(f"membership needs precision {space.prec}, have {f.prec}")
        for g in (g1, g2):
            if not space.contains(g.truncate(space.prec)):
                raise NotInSpan("oldform not in the level-raised space")
    return g1, g2


@dataclass(frozen=True)
class UlBlock:
    ell: int
    matrix: list  # basis (g(q), g(q^l)), column convention
    normalized: list  # basis (g(q), c g(q^l)) with c = chi(l) l^(k-1)
    expected: list  # [[t, c], [-1, 0]]
    verdict: bool
    literal_match: bool
    double_root: int | None
    nonsemisimple: bool | None


def Ul_block_check(g: QExpansion, ell: int, t_ell, k: int, chi: DirichletChar, sturm: int) -> UlBlock:
    """Matrix of U_l on span(g(q), g(q^l)) at level N l, against [[t, c], [-1, 0]].

    ``chi`` is the character at level N l; the image is resolved to the
    ``sturm`` bound of that space, so g must be known to l (sturm - 1) + 1.
    """
    ctx = g.ctx
    N = chi.N
    if N % ell:
        raise UsageError("chi must live at the raised level")
    need = ell * (sturm - 1) + 1
    if g.prec < need:
        raise InsufficientPrecision(f"U_{ell} block needs g to precision {need}, have {g.prec}")
    P = need
    G = np.vstack([g.coeffs[:P], scale_q(g, ell, P).coeffs])
    H = hecke_rows(G, ell, k, chi)[:, :sturm]
    R, piv = linalg.rref(G[:, :sturm], ctx)
    if len(piv) != 2:
        raise PreconditionError("g(q) and g(q^l) are dependent")
    Cr = linalg.coords_in_rref(H, R, piv, ctx)
    # coordinates relative to (g, g(q^l)) rather than the echelon rows
    T = linalg.coords_in_rref(G[:, :sturm], R, piv, ctx)
    X = linalg.matmul(Cr, linalg.inverse(T, ctx), ctx)
    M = X.T.copy()
    lower = chi.primitive().with_ctx(ctx)  # chi(l) at the lower level
    c = int(ctx.mul(int(lower.values(np.array([ell]))[0]), pow(ell, k - 1, ctx.p)))
    t = int(ctx(t_ell)) if not isinstance(t_ell, FieldElement) else int(t_ell)
    expected = np.array([[t, c], [int(ctx.neg(1)), 0]], dtype=np.int64)
    # basis (g, c g(q^l)): conjugate by diag(1, c)
    if c:
        D = np.array([[1, 0], [0, c]], dtype=np.int64)
        Dinv = linalg.inverse(D, ctx)
        Mn = linalg.matmul(linalg.matmul(Dinv, M, ctx), D, ctx)
    else:
        Mn = M
    disc = ctx.sub(ctx.mul(t, t), ctx.mul(4, c))
    double = None
    nonss = None
    if int(disc) == 0:
        b = int(ctx.div(t, 2))
        double = b
        Z = ctx.sub(M, linalg.identity(2) * b)
        nonss = bool(not linalg.matmul(Z, Z, ctx).any() and Z.any())
    return UlBlock(
        ell,
        M.tolist(),
        Mn.tolist(),
        expected.tolist(),
        bool(np.array_equal(Mn, expected)),
        bool(np.array_equal(M, expected)),
        double,
        nonss,
    )


def unit_root_Up(comp: LocalComponent) -> tuple[FieldElement, bool]:
    """The unit root of X^2 - T_p X + chi(p) p^(p-1) mod p, i.e. the T_p eigenvalue.

    Returns (root, degenerate) where degenerate flags that p^(p-1) = 0 mod p
    collapsed the quadratic.
    """
    ctx = comp.ctx
    p = ctx.p
    comp = with_ops(comp, [Op("T", p)])
    vals, n = _distinct_roots(comp.ops[f"T{p}"], ctx)
    if len(vals) != 1 or n != comp.dim:
        raise PreconditionError(f"T_{p} has eigenvalues {vals} on the component; localize at a_p first")
    if vals[0] == 0:
        raise NonOrdinary(f"a_{p} = 0")
    return FieldElement(ctx, vals[0]), True
