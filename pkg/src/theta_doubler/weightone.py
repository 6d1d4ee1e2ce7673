"""Weight one mod p through weight p: the theta kernel, the count identity,
doubled submodules, the a_1 pairing and the non-lifting verdict.

Weight-one forms are never computed directly.  A weight-one form f gives
V f in weight p, whose q-expansion is supported on multiples of p; every
such weight-p form comes from weight one, so the weight-one space at m
is read off the component as {g : a_n(g) = 0 for p not dividing n}.
"""

from __future__ import annotations

import copy
import logging
import time
from dataclasses import dataclass, field, fields

import numpy as np
from sympy import primefactors, primerange

from . import hecke, linalg
from .characters import DirichletChar, enumerate_chars, representable_chars
from .eisbasis import weight_k_basis
from .errors import (
    CandidateInconclusive,
    CountIdentityViolation,
    EisensteinComponent,
    FieldTooSmall,
    InsufficientPrecision,
    PreconditionError,
)
from .ff import FieldCtx, FieldElement
from .localalg import (
    FiniteAlgebra,
    algebra_closure,
    annihilator_of_quotient,
    is_ideal,
    m_torsion_dim,
    restriction_length,
    simultaneous_kernel,
)
from .qseries import QExpansion

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# weight one inside weight p


def _theta_kernel(comp: hecke.LocalComponent, prec: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(X, G): rows X of component coordinates spanning ker(theta), and the q-expansions G."""
    ctx = comp.ctx
    p = ctx.p
    if prec is None:
        prec = comp.rows.shape[1] if comp.rows is not None else comp.space.prec
    if prec < comp.sturm:
        raise InsufficientPrecision(f"theta kernel needs the Sturm bound {comp.sturm}, have {prec}")
    G = comp.rows_at(prec)
    cols = np.flatnonzero(np.arange(prec) % p)
    X = linalg.nullspace(G[:, cols].T, ctx)  # x with x G[:, cols] = 0
    return X, G


def weight_one_coords(comp: hecke.LocalComponent, prec: int | None = None) -> np.ndarray:
    """Component coordinates of V(weight-one space at the component)."""
    return _theta_kernel(comp, prec)[0]


def weight_one_space(comp: hecke.LocalComponent, prec: int | None = None, min_prec: int = 1) -> list[QExpansion]:
    """Weight-one forms f with V f in the weight-p component, at precision ceil(prec/p)."""
    ctx = comp.ctx
    p = ctx.p
    if comp.space.k != p:
        raise PreconditionError(f"component has weight {comp.space.k}, need weight p = {p}")
    X, G = _theta_kernel(comp, prec)
    out_prec = (G.shape[1] - 1) // p + 1
    if out_prec < min_prec:
        raise InsufficientPrecision(f"weight-one precision {out_prec} below {min_prec}")
    if len(X) == 0:
        return []
    W = linalg.matmul(X, G, ctx)[:, ::p]
    W, _ = linalg.rref(W, ctx)
    return [QExpansion(w, ctx) for w in W]


# --------------------------------------------------------------------------
# Hecke algebras on a component


def hecke_algebras(comp: hecke.LocalComponent) -> tuple[FiniteAlgebra, FiniteAlgebra]:
    """(T, T~): the stored T_l and U_l generate T; T~ adds T_p."""
    p = comp.ctx.p
    names = sorted(k for k in comp.ops if k[0] in "TU" and k != f"T{p}")
    comp = hecke.with_ops(comp, [f"T{p}"])
    gens = [comp.ops[k] for k in names]
    T = algebra_closure(gens, comp.ctx, comp.dim)
    Tt = algebra_closure(gens + [comp.ops[f"T{p}"]], comp.ctx, comp.dim)
    return T, Tt


def _residues(alg: FiniteAlgebra) -> list[np.ndarray]:
    return alg.maximal_ideal_generators()


def is_eisenstein(es: hecke.Eigensystem, N: int, k: int, chi: DirichletChar) -> bool:
    """Does a_l = psi(l) + phi(l) l^(k-1) for some psi phi = chi, at every stored l?"""
    ctx = es.ctx
    chi = chi.with_ctx(ctx)
    try:
        chars = enumerate_chars(N, ctx)
    except FieldTooSmall:
        # psi with values outside ctx cannot give a_l in ctx for all l at once
        chars = representable_chars(N, ctx)
    for psi in chars:
        psi = psi.with_ctx(ctx)
        phi = chi / psi
        ok = True
        for ell, a in es.values.items():
            v = ctx.add(int(psi.values(np.array([ell]))[0]), ctx.mul(int(phi.values(np.array([ell]))[0]), pow(ell, k - 1, ctx.p)))
            if int(v) != a:
                ok = False
                break
        if ok:
            return True
    return False


# --------------------------------------------------------------------------
# dimension count at m


@dataclass
class CountResult:
    d_tilde: dict  # T_p eigenvalue -> dim of the m~-torsion
    d_anemic: int
    d_w1: int  # weight-one [m]-torsion
    d_w1_local: int  # weight-one forms in the whole component
    verdict: bool


def count_identity(comp: hecke.LocalComponent, choices=None, allow_eisenstein: bool = False) -> CountResult:
    """dim[m~] per T_p eigenvalue, dim[m], and dim of weight one at m."""
    ctx = comp.ctx
    p = ctx.p
    if not allow_eisenstein and is_eisenstein(comp.eigensystem, comp.space.N, comp.space.k, comp.space.chi):
        raise EisensteinComponent("the eigensystem is Eisenstein; the count identity is for cuspidal m")
    T, Tt = hecke_algebras(comp)
    comp = hecke.with_ops(comp, [f"T{p}"])
    Tp = comp.ops[f"T{p}"]
    mgens = _residues(T)
    d_anemic = m_torsion_dim(comp, T)
    if choices is None:
        choices = [int(v) for v in hecke.eigenvalues(comp, f"T{p}")]
    d_tilde = {}
    for a in choices:
        a = int(ctx(a)) if not isinstance(a, FieldElement) else int(a)
        K = simultaneous_kernel(mgens + [ctx.sub(Tp, linalg.identity(comp.dim) * a)], comp.dim, ctx)
        d_tilde[str(FieldElement(ctx, a))] = len(K)
    X = weight_one_coords(comp)
    d_local = len(X)
    # weight-one [m]-torsion: theta-kernel vectors killed by m
    if d_local:
        ker_m = simultaneous_kernel(mgens, comp.dim, ctx)
        both = np.vstack([X, ker_m]) if len(ker_m) else X
        d_w1 = len(X) + len(ker_m) - linalg.rank(both, ctx) if len(ker_m) else 0
    else:
        d_w1 = 0
    verdict = all(v == 1 for v in d_tilde.values()) and d_anemic == 1 + d_w1 and d_w1 <= 1
    if d_w1 > 1:
        raise CountIdentityViolation(f"weight-one [m]-torsion has dimension {d_w1} > 1")
    return CountResult(d_tilde, d_anemic, d_w1, d_local, verdict)


def eigenforms(comp: hecke.LocalComponent, prec: int | None = None) -> list[QExpansion]:
    """a_1-normalized eigenforms for m~, one per T_p eigenvalue whose [m~]-torsion is a line."""
    ctx = comp.ctx
    p = ctx.p
    T, _ = hecke_algebras(comp)
    comp = hecke.with_ops(comp, [f"T{p}"])
    mgens = _residues(T)
    Tp = comp.ops[f"T{p}"]
    prec = comp.sturm if prec is None else prec
    out = []
    for a in hecke.eigenvalues(comp, f"T{p}"):
        K = simultaneous_kernel(mgens + [ctx.sub(Tp, linalg.identity(comp.dim) * int(a))], comp.dim, ctx)
        if len(K) != 1:
            continue
        g = comp.qexp(K[0], prec)
        if int(g[1]) == 0:
            continue
        out.append(QExpansion(ctx.div(g, int(g[1])), ctx))
    return out


# --------------------------------------------------------------------------
# doubling and pairing


@dataclass
class DoubledResult:
    J: FiniteAlgebra
    MJ: np.ndarray  # rows (component coordinates) spanning M[J]
    length_T: int
    length_Tt: int
    length_T_I: int
    length_Tt_It: int
    length_T_J: int
    J_is_ideal: bool
    doubled: bool


def doubled_submodule(comp: hecke.LocalComponent, T: FiniteAlgebra, Tt: FiniteAlgebra) -> DoubledResult:
    ctx = comp.ctx
    J = annihilator_of_quotient(T, Tt)
    MJ = simultaneous_kernel(J.basis(), comp.dim, ctx)
    lT = restriction_length(T, MJ)
    lTt = restriction_length(Tt, MJ)
    return DoubledResult(
        J,
        MJ,
        T.length,
        Tt.length,
        lT,
        lTt,
        T.length - J.length,
        is_ideal(J, Tt),
        lTt == 2 * lT and len(MJ) > 0,
    )


def _complement(sub: np.ndarray, amb: np.ndarray, ctx: FieldCtx) -> np.ndarray:
    """Rows of amb completing rows of sub to a basis of span(sub) + span(amb)."""
    R, piv = (linalg.rref(sub, ctx) if len(sub) else (np.zeros((0, amb.shape[1]), dtype=np.int64), []))
    out = []
    for v in amb:
        if len(piv) and linalg.in_span(v, R, piv, ctx).all():
            continue
        if not len(piv) and not v.any():
            continue
        out.append(v)
        R, piv = linalg.rref(np.vstack([R, v[None, :]]), ctx)
    return np.vstack(out) if out else np.zeros((0, amb.shape[1]), dtype=np.int64)


@dataclass
class PairingResult:
    gram: np.ndarray
    rank: int
    length_T_J: int
    dim_M_mod_ker: int
    perfect: bool


def pairing_gram(comp: hecke.LocalComponent, T: FiniteAlgebra, J: FiniteAlgebra, MJ: np.ndarray) -> PairingResult:
    """G_ij = a_1(t_i f_j) for t_i spanning T mod J and f_j spanning M[J] mod ker(theta)."""
    ctx = comp.ctx
    n = comp.dim
    flatT = np.vstack([b.reshape(1, -1) for b in T.basis()])
    flatJ = np.vstack([b.reshape(1, -1) for b in J.basis()]) if J.length else np.zeros((0, n * n), dtype=np.int64)
    tq = [r.reshape(n, n) for r in _complement(flatJ, flatT, ctx)]
    X, _ = _theta_kernel(comp)
    # ker_M(theta) = M[J] meet ker(theta)
    if len(MJ) and len(X):
        Z = linalg.nullspace(np.vstack([MJ, X]).T, ctx)  # relations a MJ + b X = 0
        kerM = linalg.matmul(Z[:, : len(MJ)], MJ, ctx) if len(Z) else np.zeros((0, n), dtype=np.int64)
        kerM = kerM[np.any(kerM != 0, axis=1)]
    else:
        kerM = np.zeros((0, n), dtype=np.int64)
    fq = _complement(kerM, MJ, ctx) if len(MJ) else np.zeros((0, n), dtype=np.int64)
    a1 = comp.rows_at(2)[:, 1]  # a_1 of each basis vector
    G = np.zeros((len(tq), len(fq)), dtype=np.int64)
    for i, t in enumerate(tq):
        img = linalg.matmul(t, fq.T, ctx) if len(fq) else np.zeros((n, 0), dtype=np.int64)  # columns t f_j
        G[i] = linalg.matmul(a1[None, :], img, ctx)[0]
    r = linalg.rank(G, ctx) if G.size else 0
    lTJ = T.length - J.length
    return PairingResult(G, r, lTJ, len(fq), r == lTJ == len(fq))


# --------------------------------------------------------------------------
# full reports


@dataclass
class DoublingReport:
    N: int
    p: int
    chi: str
    ell: int | None
    eigensystem: dict
    component_dim: int
    d_tilde: dict
    d_anemic: int
    d_w1: int  # weight-one forms at m (whole component)
    d_w1_torsion: int
    count_verdict: bool
    lengths: dict
    J_dim: int
    J_is_ideal: bool
    doubled: bool
    gram: list
    gram_rank: int
    perfect: bool
    weight_one_basis: list  # coefficient strings, first terms
    charzero_dim: int | None
    lift_surjective: bool | None
    timings: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    component: object = field(default=None, repr=False, compare=False)  # not serialized

    def to_json(self) -> dict:
        return {f.name: copy.deepcopy(getattr(self, f.name)) for f in fields(self) if f.name != "component"}


def doubling_analysis(comp: hecke.LocalComponent, ell: int | None = None, show: int = 30, allow_eisenstein: bool = False) -> DoublingReport:
    """All of the weight-p / weight-one bookkeeping for one component."""
    ctx = comp.ctx
    t0 = time.time()
    cnt = count_identity(comp, allow_eisenstein=allow_eisenstein)
    comp = hecke.with_ops(comp, [f"T{ctx.p}"])
    T, Tt = hecke_algebras(comp)
    dbl = doubled_submodule(comp, T, Tt)
    pr = pairing_gram(comp, T, dbl.J, dbl.MJ)
    w1 = weight_one_space(comp)
    return DoublingReport(
        N=comp.space.N,
        p=ctx.p,
        chi=comp.space.chi.label,
        ell=ell,
        eigensystem=comp.eigensystem.to_json(),
        component_dim=comp.dim,
        d_tilde=cnt.d_tilde,
        d_anemic=cnt.d_anemic,
        d_w1=cnt.d_w1_local,
        d_w1_torsion=cnt.d_w1,
        count_verdict=cnt.verdict,
        lengths={
            "T": dbl.length_T,
            "T~": dbl.length_Tt,
            "T/I": dbl.length_T_I,
            "T~/I~": dbl.length_Tt_It,
            "T/J": dbl.length_T_J,
            "M[J]": int(len(dbl.MJ)),
        },
        J_dim=dbl.J.length,
        J_is_ideal=dbl.J_is_ideal,
        doubled=dbl.doubled,
        gram=pr.gram.tolist(),
        gram_rank=pr.rank,
        perfect=pr.perfect,
        weight_one_basis=[[str(FieldElement(ctx, int(c))) for c in f.coeffs[:show]] for f in w1],
        charzero_dim=None,
        lift_surjective=None,
        timings={"analysis_s": round(time.time() - t0, 3)},
        component=comp,
    )


def rho_bar_trivial_at(f_modp: QExpansion, chi: DirichletChar, ell: int) -> bool:
    """rho-bar(Frob_l) = 1 needs trace a_l = 2 and determinant chi(l) = 1 (l = 1 mod p)."""
    ctx = f_modp.ctx
    c = chi.with_ctx(ctx)
    return int(f_modp.coeffs[ell]) == 2 % ctx.p and int(c.values(np.array([ell]))[0]) == 1


def nonlift_report(
    N: int,
    ell: int,
    p: int,
    f_modp: QExpansion,
    chi: DirichletChar,
    charzero_newforms: int = 1,
    patience: int = 8,
    max_factors: int = 3,
    check_rho: bool = True,
    space=None,
) -> DoublingReport:
    """Weight-one forms at the eigensystem of f at level N l against the two oldforms per newform.

    ``f_modp`` is the reduction of a level-N weight-one newform (to at least
    l times the Sturm bound at level N l), ``charzero_newforms`` the number of
    characteristic-zero weight-one newforms of level N at the same m.
    A prebuilt ``space`` (M_p(N l, chi) over the same field) skips the basis step.
    """
    ctx = f_modp.ctx
    if ctx.p != p:
        raise PreconditionError("f_modp lives in the wrong characteristic")
    if (p * N) % ell == 0:
        raise PreconditionError(f"l = {ell} must be prime to pN")
    if ell % p != 1:
        raise PreconditionError(f"l = {ell} is not 1 mod {p}")
    if check_rho and not rho_bar_trivial_at(f_modp, chi, ell):
        raise PreconditionError(f"rho-bar(Frob_{ell}) is not trivial")
    timings = {}
    t0 = time.time()
    M = N * ell
    chiM = chi.with_ctx(None).extend(M)
    if space is None:
        space = weight_k_basis(M, p, chiM, ctx, max_factors=max_factors)
    elif (space.N, space.k, space.ctx) != (M, p, ctx):
        raise PreconditionError(f"supplied space is not M_{p}({M}) over {ctx.label}")
    timings["basis_s"] = round(time.time() - t0, 3)
    B = space.sturm
    P = ell * (B - 1) + 1
    if f_modp.prec < P:
        raise InsufficientPrecision(f"f needs precision {P}, have {f_modp.prec}")
    t1 = time.time()
    target = hecke.eigensystem_from_qexp(f_modp, M, B)
    comp = hecke.localize(space, target, patience=patience, prec_hint=P)
    timings["localize_s"] = round(time.time() - t1, 3)
    t2 = time.time()
    comp = comp.with_rows(P)
    # every T_l up to l, then U_q for q | N l: the algebra T on the component
    extra = [int(q) for q in primerange(2, ell + 1) if (M * p) % q]
    comp = hecke.with_ops(comp, [f"T{q}" for q in extra])
    cut = {}
    for q in primefactors(M):
        vals = [int(v) for v in hecke.eigenvalues(comp, f"U{q}")]
        want = int(f_modp.coeffs[q]) if q != ell else None
        if q == ell:
            # U_l on the oldform plane: roots of X^2 - a_l X + chi(l) l^(p-1), here 1 twice
            cand = [v for v in vals if int(ctx.sub(ctx.add(ctx.mul(v, v), int(chi.with_ctx(ctx).values(np.array([ell]))[0])), ctx.mul(int(f_modp.coeffs[ell]), v))) == 0]
            want = cand[0] if len(cand) == 1 else None
        if want is not None and len(vals) > 1:
            cut[q] = want
    if cut:
        comp = hecke.localize_extended(comp, cut)
    comp = hecke.with_ops(comp, [f"U{q}" for q in primefactors(M)] + [f"T{p}"])
    timings["operators_s"] = round(time.time() - t2, 3)
    rep = doubling_analysis(comp, ell=ell)
    rep.timings.update(timings)
    rep.charzero_dim = 2 * charzero_newforms
    rep.lift_surjective = rep.d_w1 <= rep.charzero_dim
    rep.notes.append(f"anaemic localization used primes {comp.info.get('primes_used')}")
    rep.notes.append(f"T generated by T_q for q <= {ell} prime to {p * M}, and U_q for q | {M}")
    if rep.d_w1 == rep.charzero_dim:
        exc = CandidateInconclusive(f"l = {ell}: weight-one dimension {rep.d_w1} equals the characteristic-zero count")
        exc.report = rep
        raise exc
    return rep
