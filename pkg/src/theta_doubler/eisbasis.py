"""Eisenstein series, dimension formulas and bases of M_k(N, chi) mod p.

Bases are generated from Eisenstein series and their products.  Characters
whose values need a bigger field F_{p^R} are used anyway: a product then lies
in M tensor F_{p^R}, and its R coordinates over F_p each lie in M (the space
is defined over F_p), so every coordinate is a candidate.

Every space remembers how it was built (which candidates, and the matrix
taking them to the echelon basis), so its q-expansions can be recomputed to
any precision without redoing the selection.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm

import numpy as np
from sympy import Poly, divisors, primefactors, symbols
from sympy.polys.appellseqs import bernoulli_poly

from . import kernels, linalg
from .characters import DirichletChar, char_group, kronecker_character, min_degree_for
from .cyclo import Cyclo
from .dihedral import QuadForm, class_pairs, is_fundamental, reduced_forms, theta_counts
from .errors import (
    FieldTooSmall,
    ParityMismatch,
    PDividesDenominator,
    PreconditionError,
    SpanDeficient,
    WeightOneUnsupported,
)
from .ff import FieldCtx, make_field
from .qseries import Basis, QExpansion, gamma0_index, series_mul, sturm_bound

log = logging.getLogger(__name__)

_X = symbols("x")


# --------------------------------------------------------------------------
# Bernoulli numbers and Eisenstein series


def _bernoulli_poly_coeffs(k: int) -> list[Fraction]:
    return [Fraction(int(c.p), int(c.q)) for c in reversed(Poly(bernoulli_poly(k, _X), _X).all_coeffs())]


def gen_bernoulli(k: int, phi: DirichletChar) -> Cyclo:
    """B_{k,phi} = f^(k-1) sum_{a=1}^f phi(a) B_k(a/f), f the conductor (exact)."""
    if k < 1:
        raise ValueError("k must be positive")
    phi = phi.primitive()
    f = phi.N
    o = phi.order
    bk = _bernoulli_poly_coeffs(k)
    vec = [Fraction(0)] * o
    scale = Fraction(f) ** (k - 1)
    for a in range(1, f + 1):
        e = int(phi.exp_table[a % f])
        if e < 0:
            continue
        x = Fraction(a, f)
        val = Fraction(0)
        for c in reversed(bk):
            val = val * x + c
        vec[e] += val * scale
    return Cyclo(o, vec).simplify()


@dataclass(frozen=True)
class EisDescriptor:
    """E_k(psi, phi) at q -> q^t; ``e2`` marks E_2(q) - t E_2(q^t)."""

    k: int
    psi: str
    phi: str
    t: int
    e2: bool = False

    def __str__(self):
        if self.e2:
            return f"E2-{self.t}E2(q^{self.t})"
        return f"E{self.k}({self.psi},{self.phi};{self.t})"


@dataclass(frozen=True)
class EisensteinSeries:
    k: int
    psi: DirichletChar
    phi: DirichletChar
    t: int
    qexp: QExpansion
    constant: Cyclo
    normalized: bool  # scaled by 1/constant because the constant was not p-integral

    @property
    def descriptor(self) -> EisDescriptor:
        return EisDescriptor(self.k, self.psi.label, self.phi.label, self.t, self.k == 2 and self.psi.is_trivial and self.phi.is_trivial)


def _power_table(k: int, n: int, p: int) -> np.ndarray:
    """d^(k-1) mod p for d < n."""
    base = np.arange(n, dtype=np.int64) % p
    out = np.ones(n, dtype=np.int64)
    for _ in range(k - 1):
        out = out * base % p
    return out


def _divisor_sum_series(k, psi, phi, t, prec, ctx) -> np.ndarray:
    """Encodings of sum_{d | n} psi(n/d) phi(d) d^(k-1) placed at q^(n t), n >= 1."""
    L = lcm(psi.order, phi.order)
    nmax = max(0, (prec - 1) // t)
    idx = np.arange(nmax + 1, dtype=np.int64)
    phi_exp = np.ascontiguousarray(phi.exps_mod(L, idx), dtype=np.int64)
    psi_exp = np.ascontiguousarray(psi.exps_mod(L, idx), dtype=np.int64)
    dpow = _power_table(k, nmax + 1, ctx.p)
    counts = np.zeros((prec, L), dtype=np.int64)
    if nmax >= 1:
        kernels.divisor_accumulate(counts, phi_exp, dpow, psi_exp, L, ctx.p, t)
    if L == 1:
        return counts[:, 0] % ctx.p
    z = int(ctx.root_of_unity(L))
    zp = np.ones(L, dtype=np.int64)
    for j in range(1, L):
        zp[j] = ctx.mul(zp[j - 1], z)
    if ctx.r == 1:
        return linalg.matmul(counts, zp[:, None], ctx)[:, 0]
    d = linalg.matmul(counts, ctx.digits(zp), make_field(ctx.p))
    return ctx.from_digits(d)


def eisenstein_constant(k: int, psi: DirichletChar, phi: DirichletChar) -> Cyclo:
    """Constant term: -B_{k,phi}/2k if psi is trivial, plus -B_{1,psi}/2 when k = 1 and phi is trivial."""
    c = Cyclo.rational(0)
    if psi.conductor == 1:
        c = c + gen_bernoulli(k, phi).scale(Fraction(-1, 2 * k))
    if k == 1 and phi.conductor == 1:
        c = c + gen_bernoulli(1, psi).scale(Fraction(-1, 2))
    return c.simplify()


def eisenstein_qexp(k: int, psi: DirichletChar, phi: DirichletChar, t: int, prec: int, ctx: FieldCtx) -> EisensteinSeries:
    """E_k(psi, phi; q^t) reduced into ctx.

    ``psi``, ``phi`` may be given at any modulus; their primitive versions are
    used.  For psi = phi = 1 and k = 2 this returns E_2(q) - t E_2(q^t) (t > 1).
    A constant term that is not p-integral is handled by rescaling to constant
    term 1 when it is rational, and by PDividesDenominator otherwise.
    """
    psi = psi.with_ctx(None).primitive()
    phi = phi.with_ctx(None).primitive()
    sign = (-1 if psi.is_odd else 1) * (-1 if phi.is_odd else 1)
    if sign != (-1) ** k:
        raise ParityMismatch(f"psi(-1)phi(-1) = {sign} but k = {k}")
    if t < 1:
        raise ValueError("t must be positive")
    psi_w = psi.with_ctx(ctx)
    phi_w = phi.with_ctx(ctx)
    if k == 2 and psi.is_trivial and phi.is_trivial:
        if t == 1:
            raise PreconditionError("E_2 is not modular; use E_2(q) - t E_2(q^t) with t > 1")
        a = _divisor_sum_series(2, psi_w, phi_w, 1, prec, ctx)
        b = _divisor_sum_series(2, psi_w, phi_w, t, prec, ctx)
        coeffs = ctx.sub(a, ctx.scalar_mul(t, b))
        const = Cyclo.rational(Fraction(t - 1, 24))
        series = _with_constant(coeffs, const, ctx)
        if series is None:
            series = _normalized(coeffs, const, ctx)
            return EisensteinSeries(k, psi, phi, t, series, const, True)
        return EisensteinSeries(k, psi, phi, t, series, const, False)
    coeffs = _divisor_sum_series(k, psi_w, phi_w, t, prec, ctx)
    const = eisenstein_constant(k, psi, phi)
    series = _with_constant(coeffs, const, ctx)
    if series is None:
        if not const.is_rational():
            raise PDividesDenominator(f"constant term of E_{k}({psi.label},{phi.label}) is not {ctx.p}-integral")
        return EisensteinSeries(k, psi, phi, t, _normalized(coeffs, const, ctx), const, True)
    return EisensteinSeries(k, psi, phi, t, series, const, False)


def _with_constant(coeffs, const: Cyclo, ctx) -> QExpansion | None:
    if not const.is_p_integral(ctx.p):
        return None
    out = np.array(coeffs, dtype=np.int64)
    if len(out):
        out[0] = const.reduce(ctx)
    return QExpansion(out, ctx)


def _normalized(coeffs, const: Cyclo, ctx) -> QExpansion:
    """c^-1 E for a rational constant c that is not p-integral: constant term 1."""
    inv = 1 / const.to_fraction()  # p divides the numerator, so this reduces to 0
    s = inv.numerator * pow(inv.denominator, -1, ctx.p) % ctx.p
    out = np.array(ctx.scalar_mul(s, np.asarray(coeffs, dtype=np.int64)), dtype=np.int64)
    if len(out):
        out[0] = 1
    return QExpansion(out, ctx)


# --------------------------------------------------------------------------
# dimensions


def _cusp_lambda(r: int, s: int, ell: int) -> int:
    if 2 * s <= r:
        if r % 2 == 0:
            rp = r // 2
            return ell**rp + ell ** (rp - 1)
        return 2 * ell ** ((r - 1) // 2)
    return 2 * ell ** (r - s)


def _unit_circle_real(e: int, o: int, period: int) -> Fraction:
    """Real part of zeta_o^e, a period-th root of unity with period 3 or 4."""
    turn = Fraction(e, o) % 1
    table = {
        4: {Fraction(0): 1, Fraction(1, 4): 0, Fraction(1, 2): -1, Fraction(3, 4): 0},
        3: {Fraction(0): 1, Fraction(1, 3): Fraction(-1, 2), Fraction(2, 3): Fraction(-1, 2)},
    }[period]
    return Fraction(table[turn])


def cusp_dimension(N: int, k: int, chi: DirichletChar) -> int:
    """dim S_k(Gamma_1(N), chi) for k >= 2 (Cohen-Oesterle)."""
    if k < 2:
        raise WeightOneUnsupported("weight-one dimensions are not given by a formula")
    if chi.N != N:
        chi = chi.extend(N)
    if (-1 if chi.is_odd else 1) != (-1) ** k:
        return 0
    f = chi.conductor
    total = Fraction(k - 1, 12) * gamma0_index(N)
    prod = 1
    for ell in primefactors(N):
        r = _val(N, ell)
        s = _val(f, ell)
        prod *= _cusp_lambda(r, s, ell)
    total -= Fraction(prod, 2)
    g4 = {0: Fraction(1, 4), 2: Fraction(-1, 4)}.get(k % 4, Fraction(0))
    g3 = {0: Fraction(1, 3), 1: Fraction(0), 2: Fraction(-1, 3)}[k % 3]
    if g4:
        acc = Fraction(0)
        for x in range(N):
            if (x * x + 1) % N == 0:
                acc += _unit_circle_real(int(chi.exp_table[x]), chi.order, 4)
        total += g4 * acc
    if g3:
        acc = Fraction(0)
        for x in range(N):
            if (x * x + x + 1) % N == 0:
                acc += _unit_circle_real(int(chi.exp_table[x]), chi.order, 3)
        total += g3 * acc
    if k == 2 and chi.is_trivial:
        total += 1
    if total.denominator != 1 or total < 0:
        raise AssertionError(f"dimension formula produced {total}")
    return int(total)


def _val(n: int, ell: int) -> int:
    v = 0
    while n % ell == 0:
        n //= ell
        v += 1
    return v


def eisenstein_triples(N: int, k: int, chi: DirichletChar):
    """(psi, phi, t) with psi, phi primitive, psi phi = chi mod N, f_psi f_phi t | N."""
    G = char_group(N)
    chi = chi.with_ctx(None)
    if chi.N != N:
        chi = chi.extend(N)
    out = []
    for e in G.all_exponents():
        fp = G.conductor_of(e)
        if N % fp:
            continue
        e_phi = tuple((c - x) % o for c, x, o in zip(chi.exps, e, G.orders))
        ff = G.conductor_of(e_phi)
        if N % (fp * ff):
            continue
        psi = DirichletChar(N, e).primitive()
        phi = DirichletChar(N, e_phi).primitive()
        for t in divisors(N // (fp * ff)):
            if k == 2 and t == 1 and psi.is_trivial and phi.is_trivial:
                continue
            out.append((psi, phi, int(t)))
    return out


def eisenstein_dimension(N: int, k: int, chi: DirichletChar) -> int:
    if k < 2:
        raise WeightOneUnsupported("weight-one dimensions are not given by a formula")
    if (-1 if chi.is_odd else 1) != (-1) ** k:
        return 0
    return len(eisenstein_triples(N, k, chi))


def dimension_formula(N: int, k: int, chi: DirichletChar) -> int:
    """dim M_k(Gamma_1(N), chi), k >= 2."""
    if k < 2:
        raise WeightOneUnsupported("weight-one dimensions are not given by a formula")
    if chi.N != N:
        chi = chi.extend(N)
    if (-1 if chi.is_odd else 1) != (-1) ** k:
        return 0
    return cusp_dimension(N, k, chi) + eisenstein_dimension(N, k, chi)


# --------------------------------------------------------------------------
# candidate generation


@dataclass(frozen=True)
class ThetaDescriptor:
    """Theta series of a reduced form of discriminant D, at q -> q^t (weight 1, character (D/.))."""

    D: int
    a: int
    b: int
    c: int
    t: int = 1
    k: int = 1

    def __str__(self):
        s = f"Theta({self.a},{self.b},{self.c})"
        return s if self.t == 1 else f"{s}(q^{self.t})"


def _factor_json(f):
    if isinstance(f, ThetaDescriptor):
        return ["theta", f.D, f.a, f.b, f.c, f.t]
    return [f.k, f.psi, f.phi, f.t, f.e2]


def _factor_from_json(x):
    if x[0] == "theta":
        return ThetaDescriptor(*(int(v) for v in x[1:]))
    a, b, c, t, e = x
    return EisDescriptor(int(a), b, c, int(t), bool(e))


@dataclass(frozen=True)
class Candidate:
    """A product of Eisenstein (or theta) series, possibly one F_p-coordinate of it."""

    factors: tuple[EisDescriptor, ...]
    coord: int = -1  # -1: the product itself (work field = space field)

    def __str__(self):
        s = "*".join(str(f) for f in self.factors)
        return s if self.coord < 0 else f"{s}[{self.coord}]"

    def to_json(self):
        return {
            "factors": [_factor_json(f) for f in self.factors],
            "coord": self.coord,
        }

    @classmethod
    def from_json(cls, d):
        return cls(tuple(_factor_from_json(x) for x in d["factors"]), int(d["coord"]))


class SeriesFactory:
    """Computes (and memoizes) Eisenstein series and products in a work field."""

    def __init__(self, work: FieldCtx, prec: int):
        self.work = work
        self.prec = prec
        self._eis: dict[EisDescriptor, np.ndarray] = {}
        self.excluded: list[str] = []

    def eis(self, d) -> np.ndarray | None:
        if d not in self._eis and isinstance(d, ThetaDescriptor):
            th = theta_counts(QuadForm(d.a, d.b, d.c), -(-self.prec // d.t))
            v = np.zeros(self.prec, dtype=np.int64)
            v[:: d.t] = th[: len(v[:: d.t])] % self.work.p
            self._eis[d] = v
        if d not in self._eis:
            psi = DirichletChar.from_label(d.psi)
            phi = DirichletChar.from_label(d.phi)
            try:
                e = eisenstein_qexp(d.k, psi, phi, d.t, self.prec, self.work)
                self._eis[d] = e.qexp.coeffs
            except PDividesDenominator:
                self.excluded.append(str(d))
                self._eis[d] = None
        return self._eis[d]

    def product(self, factors) -> np.ndarray | None:
        acc = None
        for d in factors:
            v = self.eis(d)
            if v is None:
                return None
            acc = v if acc is None else series_mul(acc, v, self.work, self.prec)
        return acc

    def candidate(self, c: Candidate, space_ctx: FieldCtx) -> np.ndarray | None:
        v = self.product(c.factors)
        if v is None:
            return None
        if c.coord < 0:
            return v
        return self.work.digits(v)[:, c.coord]


def _work_field(N: int, ctx: FieldCtx, chi: DirichletChar) -> FieldCtx:
    """Field holding the characters used for generation."""
    p = ctx.p
    try:
        R = min_degree_for(N, p)
    except ValueError:
        R = 1
    R = lcm(R, ctx.r)
    if R <= 8 and (ctx.r == 1 or R == ctx.r):
        return make_field(p, R)
    if ctx.r > 1:
        return ctx
    # too big: use the largest-coverage field of degree <= 8
    G = char_group(N)
    best, best_n = 1, -1
    for r in range(1, 9):
        q = p**r
        n = sum(1 for e in G.all_exponents() if G.order_of(e) % p and (q - 1) % G.order_of(e) == 0)
        if n > best_n:
            best, best_n = r, n
    return make_field(p, best)


def _usable_chars(N: int, work: FieldCtx):
    G = char_group(N)
    out = []
    for e in G.all_exponents():
        o = G.order_of(e)
        if o % work.p and (work.q - 1) % o == 0:
            out.append(DirichletChar(N, e))
    return out


def eisenstein_descriptors(N: int, k: int, chi: DirichletChar, work: FieldCtx) -> list[EisDescriptor]:
    """All Eisenstein series of weight k and character chi mod N usable in ``work``."""
    out = []
    seen = set()
    for psi, phi, t in eisenstein_triples(N, k, chi):
        if all(c.order % work.p and (work.q - 1) % c.order == 0 for c in (psi, phi)):
            if k == 1:
                key = (frozenset([psi.label, phi.label]), t)
                if key in seen:
                    continue  # E_1(psi, phi) = E_1(phi, psi)
                seen.add(key)
            e2 = k == 2 and psi.is_trivial and phi.is_trivial
            out.append(EisDescriptor(k, psi.label, phi.label, t, e2))
    return out


def theta_descriptors(N: int) -> dict[int, list[ThetaDescriptor]]:
    """{D: theta series Theta_A(q^t)} for fundamental D < 0 with |D| t | N."""
    out = {}
    for d in divisors(N):
        if d < 3 or not is_fundamental(-d):
            continue
        _, reps = class_pairs(-d)
        forms = [reduced_forms(-d)[0]] + reps
        out[-d] = [ThetaDescriptor(-d, Q.a, Q.b, Q.c, t) for t in divisors(N // d) for Q in forms]
    return out


def _eis_table(N: int, k: int, chars, work: FieldCtx):
    """{(weight, char label): [descriptors]} for weights 1..k."""
    table = {}
    for j in range(1, k + 1):
        for eps in chars:
            if (-1 if eps.is_odd else 1) != (-1) ** j:
                continue
            descs = eisenstein_descriptors(N, j, eps, work)
            if descs:
                table[(j, eps.exps)] = descs
    return table


def candidate_stream(N: int, k: int, chi: DirichletChar, work: FieldCtx, max_factors: int = 3, thetas: bool = False):
    """Yield factor tuples: single series, then pairs, then triples, ...

    With ``thetas`` the weight-one theta series join the table and only
    tuples containing at least one of them are produced.
    """
    chars = _usable_chars(N, work)
    by_exps = {c.exps: c for c in chars}
    table = _eis_table(N, k, chars, work)
    if thetas:
        for D, descs in theta_descriptors(N).items():
            key = (1, kronecker_character(D).extend(N).exps)
            if key[1] in by_exps:
                table[key] = table.get(key, []) + descs
    chi_e = chi.with_ctx(None).extend(N).exps if chi.N != N else chi.exps
    G = char_group(N)

    def mul_e(a, b):
        return tuple((x + y) % o for x, y, o in zip(a, b, G.orders))

    def div_e(a, b):
        return tuple((x - y) % o for x, y, o in zip(a, b, G.orders))

    def wanted(combo):
        return not thetas or any(isinstance(f, ThetaDescriptor) for f in combo)

    for d in table.get((k, chi_e), []):
        if wanted((d,)):
            yield (d,)
    for nf in range(2, max_factors + 1):
        for weights in _partitions(k, nf):
            # assign characters to all but the last factor, last one is forced
            keys_per = [[e for (j, e) in table if j == w] for w in weights[:-1]]
            for es in itertools.product(*keys_per):
                if any(weights[i] == weights[i + 1] and es[i] > es[i + 1] for i in range(len(es) - 1)):
                    continue
                acc = tuple(0 for _ in G.orders)
                for e in es:
                    acc = mul_e(acc, e)
                last = div_e(chi_e, acc)
                if last not in by_exps or (weights[-1], last) not in table:
                    continue
                if len(es) and weights[-1] == weights[-2] and es[-1] > last:
                    continue
                keys = list(zip(weights[:-1], es)) + [(weights[-1], last)]
                lists = [table[key] for key in keys]
                for combo in itertools.product(*lists):
                    # equal keys: only non-decreasing picks, the product is symmetric
                    if any(keys[i] == keys[i + 1] and str(combo[i]) > str(combo[i + 1]) for i in range(nf - 1)):
                        continue
                    if wanted(combo):
                        yield tuple(combo)


def _partitions(k: int, n: int):
    """Non-decreasing n-tuples of positive integers summing to k."""

    def rec(rem, parts, lo):
        if parts == 1:
            if rem >= lo:
                yield (rem,)
            return
        for a in range(lo, rem // parts + 1):
            for rest in rec(rem - a, parts - 1, a):
                yield (a,) + rest

    return list(rec(k, n, 1))


# --------------------------------------------------------------------------
# spaces


@dataclass
class Recipe:
    work_label: str
    work_r: int
    candidates: list[Candidate]
    transform: np.ndarray  # basis = transform @ candidate matrix


@dataclass
class ModFormSpace:
    N: int
    k: int
    chi: DirichletChar
    ctx: FieldCtx
    basis: Basis
    formula_dim: int
    recipe: Recipe | None
    excluded: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    _hi: np.ndarray | None = field(default=None, repr=False, compare=False)

    # q-expansions of the whole basis are cached up to this many entries
    CACHE_ENTRIES = 2**25

    @property
    def dim(self) -> int:
        return self.basis.rank

    @property
    def prec(self) -> int:
        return self.basis.prec

    @property
    def matrix(self) -> np.ndarray:
        return self.basis.matrix

    @property
    def sturm(self) -> int:
        return sturm_bound(self.k, self.N).bound

    def series(self, i: int) -> QExpansion:
        return QExpansion(self.basis.matrix[i], self.ctx)

    def coordinates(self, f) -> np.ndarray:
        return self.basis.coordinates(f)

    def contains(self, f) -> bool:
        return self.basis.contains(f)

    def combination_at(self, C: np.ndarray, prec: int) -> np.ndarray:
        """Rows C @ basis, recomputed at precision ``prec`` from the recipe."""
        C = linalg.asmat(C)
        if prec <= self.prec:
            return linalg.matmul(C, self.basis.matrix[:, :prec], self.ctx)
        if self.recipe is None:
            raise PreconditionError("space has no recipe; cannot extend precision")
        W = linalg.matmul(C, self.recipe.transform, self.ctx)
        work = make_field(self.ctx.p, self.recipe.work_r)
        fac = SeriesFactory(work, prec)
        out = np.zeros((C.shape[0], prec), dtype=np.int64)
        for i, cand in enumerate(self.recipe.candidates):
            col = W[:, i]
            if not col.any():
                continue
            v = fac.candidate(cand, self.ctx)
            out = self.ctx.add(out, self.ctx.mul(col[:, None], v[None, :]))
        return out

    def rows_at(self, prec: int, C=None) -> np.ndarray:
        """Rows C @ basis (all basis rows if C is None) at precision ``prec``, cached when cheap."""
        if prec <= self.prec:
            M = self.basis.matrix[:, :prec]
        elif self._hi is not None and self._hi.shape[1] >= prec:
            M = self._hi[:, :prec]
        elif self.dim * prec <= self.CACHE_ENTRIES or C is None:
            M = self.combination_at(linalg.identity(self.dim), prec)
            if self.dim * prec <= self.CACHE_ENTRIES:
                self._hi = M
        else:
            return self.combination_at(C, prec)
        return M if C is None else linalg.matmul(C, M, self.ctx)

    def extend_precision(self, prec: int) -> "ModFormSpace":
        if prec <= self.prec:
            return self
        M = self.combination_at(linalg.identity(self.dim), prec)
        piv = tuple(self.basis.pivots)
        return ModFormSpace(self.N, self.k, self.chi, self.ctx, Basis(M, piv, self.ctx), self.formula_dim, self.recipe, self.excluded, self.stats)


def weight_k_basis(
    N: int,
    k: int,
    chi: DirichletChar,
    ctx: FieldCtx,
    prec: int | None = None,
    max_factors: int = 3,
    batch: int = 256,
) -> ModFormSpace:
    """Echelon basis of M_k(Gamma_1(N), chi) over ctx from Eisenstein products."""
    if k < 2:
        raise WeightOneUnsupported("weight one is only reached through weight p")
    if N % ctx.p == 0:
        raise PreconditionError(f"p = {ctx.p} divides the level {N}")
    chi = chi.with_ctx(None)
    if chi.N != N:
        chi = chi.extend(N)
    try:
        chi.with_ctx(ctx)
    except FieldTooSmall:
        raise
    B = sturm_bound(k, N).bound
    prec = B if prec is None else prec
    if prec < B:
        raise PreconditionError(f"precision {prec} is below the Sturm bound {B}")
    target = dimension_formula(N, k, chi)
    chi_f = chi.with_ctx(ctx)
    if target == 0:
        return ModFormSpace(N, k, chi_f, ctx, Basis(np.zeros((0, prec), dtype=np.int64), (), ctx), 0, Recipe(ctx.label, ctx.r, [], np.zeros((0, 0), dtype=np.int64)))
    work = _work_field(N, ctx, chi)
    split = work != ctx
    fac = SeriesFactory(work, prec)

    sel_rows = np.zeros((0, prec), dtype=np.int64)  # raw selected candidate vectors
    selected: list[Candidate] = []
    E = np.zeros((0, prec), dtype=np.int64)
    piv: list[int] = []
    seen = 0
    pending_c: list[Candidate] = []
    pending_v: list[np.ndarray] = []

    def flush():
        nonlocal E, piv, sel_rows
        if not pending_v:
            return
        X = np.vstack(pending_v)
        if piv:
            X = ctx.sub(X, linalg.matmul(X[:, piv], E, ctx))
        nz = np.flatnonzero(X.any(axis=1))
        if len(nz):
            # independent rows, greedily in order: pivots of rref(X^T)
            _, keep = linalg.rref(X[nz].T, ctx)
            keep = [int(nz[i]) for i in keep]
            E, piv = linalg.rref(np.vstack([E, X[keep]]), ctx)
            sel_rows = np.vstack([sel_rows, np.vstack([pending_v[i] for i in keep])])
            selected.extend(pending_c[i] for i in keep)
        pending_c.clear()
        pending_v.clear()

    eis_rank = None
    for thetas in (False, True):
        if thetas:
            eis_rank = len(piv)
            if eis_rank == target:
                break
            log.info("Eisenstein products give %d of %d; adding theta series", eis_rank, target)
        for factors in candidate_stream(N, k, chi, work, max(max_factors, k) if thetas else max_factors, thetas=thetas):
            v = fac.product(factors)
            if v is None:
                continue
            seen += 1
            if split:
                digs = work.digits(v)
                for j in range(work.r):
                    col = digs[:, j]
                    if col.any():
                        pending_c.append(Candidate(tuple(factors), j))
                        pending_v.append(col)
            else:
                pending_c.append(Candidate(tuple(factors), -1))
                pending_v.append(v)
            if len(pending_v) >= batch:
                flush()
                if len(piv) > target:
                    raise AssertionError(f"rank {len(piv)} exceeds the dimension formula {target}")
                if len(piv) == target:
                    break
        flush()
    rank = len(piv)
    stats = {
        "candidates_tried": seen,
        "work_field": work.label,
        "target": target,
        "eisenstein_rank": eis_rank if eis_rank is not None else rank,
        "theta_generators": eis_rank is not None and eis_rank < target,
    }
    log.info("M_%d(%d, %s): rank %d of %d from %d products over %s", k, N, chi.label, rank, target, seen, work.label)
    if rank > target:
        raise AssertionError(f"rank {rank} exceeds the dimension formula {target}: precision or q-expansion bug")
    if rank < target:
        raise SpanDeficient(
            f"Eisenstein products span {rank} of {target} dimensions of M_{k}({N}, {chi.label}) mod {ctx.p}",
            achieved=rank,
            expected=target,
        )
    T = linalg.inverse(sel_rows[:, piv], ctx)
    recipe = Recipe(work.label, work.r, selected, T)
    return ModFormSpace(N, k, chi_f, ctx, Basis(E, tuple(piv), ctx), target, recipe, list(fac.excluded), stats)
