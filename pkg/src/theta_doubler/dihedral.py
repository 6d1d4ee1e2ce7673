"""Binary quadratic forms, theta series and dihedral weight-one newforms.

For a negative fundamental discriminant D with class number h an odd prime,
every nontrivial class character chi gives the weight-one newform

    f_chi = 1/2 * sum_A chi(A) Theta_A

of level |D| and nebentypus (D/.).  Since Theta_A = Theta_{A^-1} only the
real parts chi(A) + chi(A)^-1 matter, so coefficients lie in Z[zeta_h]^+.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import gcd, isqrt

import numpy as np
from sympy import Poly, discriminant, factor_list, factorint, isprime, symbols

from .characters import DirichletChar, kronecker_character
from .cyclo import Cyclo, cyclotomic_coeffs
from .errors import NotFundamental, UnknownDiscriminant, UnsupportedClassNumber
from .ff import FieldCtx
from .qseries import QExpansion

_X = symbols("x")


@dataclass(frozen=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def __call__(self, x, y):
        return self.a * x * x + self.b * x * y + self.c * y * y

    def opposite(self) -> "QuadForm":
        return QuadForm(self.a, -self.b, self.c)

    def __str__(self):
        return f"({self.a},{self.b},{self.c})"


def is_fundamental(D: int) -> bool:
    if D % 4 == 1:
        return all(e == 1 for e in factorint(abs(D)).values())
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and all(e == 1 for e in factorint(abs(m)).values())
    return False


def reduced_forms(D: int) -> list[QuadForm]:
    """All reduced primitive positive definite forms of discriminant D."""
    if D >= 0 or D % 4 not in (0, 1) or not is_fundamental(D):
        raise NotFundamental(f"{D} is not a negative fundamental discriminant")
    out = []
    amax = isqrt(-D // 3) + 1
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            Q = QuadForm(a, b, c)
            if c >= a and Q.reduced and gcd(gcd(a, b), c) == 1:
                out.append(Q)
    return sorted(out, key=lambda Q: (Q.a, abs(Q.b), Q.b < 0))


def class_number(D: int) -> int:
    return len(reduced_forms(D))


def theta_counts(Q: QuadForm, prec: int) -> np.ndarray:
    """r_Q(n) = #{(x, y) : Q(x, y) = n} for n < prec."""
    a, b, c = Q.a, Q.b, Q.c
    D = -Q.disc
    if a <= 0 or D <= 0:
        raise ValueError("theta series needs a positive definite form")
    counts = np.zeros(prec, dtype=np.int64)
    # Q = a (x + b y / 2a)^2 + D y^2 / 4a
    ymax = isqrt(4 * a * (prec - 1) // D) + 1 if prec > 0 else 0
    for y in range(-ymax, ymax + 1):
        rest = prec - 1 - Fraction(D * y * y, 4 * a)
        if rest < 0:
            continue
        centre = Fraction(-b * y, 2 * a)
        span = isqrt(int(rest / a)) + 2
        xs = np.arange(int(centre) - span, int(centre) + span + 1, dtype=np.int64)
        vals = a * xs * xs + b * xs * y + c * y * y
        vals = vals[(vals >= 0) & (vals < prec)]
        counts += np.bincount(vals, minlength=prec)[:prec]
    return counts


def theta_series(Q: QuadForm, prec: int) -> QExpansion:
    """sum_{x, y} q^{Q(x, y)} over Q."""
    return QExpansion(theta_counts(Q, prec).tolist())


@dataclass(frozen=True)
class DihedralForm:
    """A weight-one dihedral newform with coefficients in Z[zeta_h] (power basis)."""

    D: int
    h: int
    assignment: tuple[str, ...]  # class representatives for chi = zeta, zeta^2, ...
    coeffs: np.ndarray  # (prec, phi(h)) integers

    @property
    def level(self) -> int:
        return abs(self.D)

    @property
    def prec(self) -> int:
        return self.coeffs.shape[0]

    @property
    def character(self) -> DirichletChar:
        return kronecker_character(self.D)

    @property
    def is_rational(self) -> bool:
        return not self.coeffs[:, 1:].any()

    def coefficient(self, n: int) -> Cyclo:
        return Cyclo(self.h, [int(x) for x in self.coeffs[n]])

    def rational_qexp(self) -> QExpansion:
        if not self.is_rational:
            raise ValueError("coefficients are not rational")
        return QExpansion(self.coeffs[:, 0].tolist())

    def reduce(self, ctx: FieldCtx) -> QExpansion:
        """Reduction mod p; zeta_h goes to the coherent root of unity (to 1 if h = p)."""
        p = ctx.p
        if self.is_rational:
            return QExpansion(self.coeffs[:, 0] % p, ctx)
        z = 1 if self.h == p else int(ctx.root_of_unity(self.h))
        zp = [1]
        for _ in range(1, self.coeffs.shape[1]):
            zp.append(int(ctx.mul(zp[-1], z)))
        acc = np.zeros(self.prec, dtype=np.int64)
        for j, zj in enumerate(zp):
            acc = ctx.add(acc, ctx.mul(self.coeffs[:, j] % p, zj))
        return QExpansion(acc, ctx)

    def is_multiplicative(self, bound: int | None = None) -> bool:
        bound = min(self.prec, bound or self.prec)
        a = {n: self.coefficient(n) for n in range(1, bound)}
        for m in range(2, bound):
            for n in range(m + 1, bound // m + 1):
                if m * n < bound and gcd(m, n) == 1:
                    if _cmul(a[m], a[n]) != a[m * n]:
                        return False
        return True


def _cmul(x: Cyclo, y: Cyclo) -> Cyclo:
    m = x.m if x.m == y.m else x.m * y.m
    x, y = x.lift(m), y.lift(m)
    vec = [Fraction(0)] * (2 * len(x.coeffs))
    for i, a in enumerate(x.coeffs):
        if a:
            for j, b in enumerate(y.coeffs):
                vec[i + j] += a * b
    return Cyclo(m, vec)


def class_pairs(D: int) -> tuple[QuadForm, list[QuadForm]]:
    """Principal form and one representative per pair {A, A^-1} of other classes."""
    forms = reduced_forms(D)
    principal = forms[0]
    reps = []
    for Q in forms[1:]:
        rep = Q if Q.b >= 0 else Q.opposite()
        if rep not in reps:
            reps.append(rep)
    return principal, reps


def weight_one_newform(D: int, prec: int) -> list[DihedralForm]:
    """The dihedral newforms attached to the nontrivial class characters (h an odd prime)."""
    forms = reduced_forms(D)
    h = len(forms)
    if h not in (3, 5) or not isprime(h):
        raise UnsupportedClassNumber(f"class number {h} of {D} is out of scope")
    principal, reps = class_pairs(D)
    th_p = theta_counts(principal, prec)
    th = {str(Q): theta_counts(Q, prec) for Q in reps}
    phi_h = len(cyclotomic_coeffs(h)) - 1
    # w_j = zeta^j + zeta^-j in the power basis
    w = [np.array([int(c) for c in Cyclo(h, [1 if i in (j, h - j) else 0 for i in range(h)]).coeffs], dtype=np.int64) for j in range(1, (h - 1) // 2 + 1)]
    out = []
    seen = set()
    for perm in itertools.permutations(reps):
        M = np.zeros((prec, phi_h), dtype=np.int64)
        M[:, 0] += th_p
        for Q, wj in zip(perm, w):
            M += th[str(Q)][:, None] * wj[None, :]
        if np.any(M % 2):
            continue
        M //= 2
        key = M.tobytes()
        if key in seen:
            continue
        f = DihedralForm(D, h, tuple(str(Q) for Q in perm), M)
        if f.coeffs[1, 0] != 1 or not f.is_multiplicative(min(prec, 60)):
            continue
        seen.add(key)
        out.append(f)
    return out


# --------------------------------------------------------------------------
# splitting fields


@lru_cache(maxsize=1)
def _shipped() -> dict:
    text = resources.files("theta_doubler").joinpath("data/dihedral.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class SplittingPoly:
    D: int
    coeffs: tuple[int, ...]  # low -> high, monic
    validated: bool
    source: str

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __str__(self):
        return str(Poly(list(reversed(self.coeffs)), _X).as_expr())


def validate_splitting_poly(D: int, coeffs) -> bool:
    """Irreducible, monic, degree h and disc = D^((h-1)/2) times a square."""
    coeffs = [int(c) for c in coeffs]
    if coeffs[-1] != 1:
        return False
    n = len(coeffs) - 1
    f = Poly(list(reversed(coeffs)), _X)
    _, facs = factor_list(f.as_expr())
    if len(facs) != 1 or facs[0][1] != 1:
        return False
    if n % 2 == 0:
        return False
    d = int(discriminant(f.as_expr(), _X))
    base = D ** ((n - 1) // 2)
    if d % base:
        return False
    sq = d // base
    return sq > 0 and isqrt(sq) ** 2 == sq


def splitting_poly(D: int, override=None) -> SplittingPoly:
    """Polynomial cutting out the degree-h subfield of the Hilbert class field of Q(sqrt D)."""
    if override is not None:
        return SplittingPoly(D, tuple(int(c) for c in override), False, "override")
    entry = _shipped()["discriminants"].get(str(D))
    if entry is None:
        raise UnknownDiscriminant(f"no shipped class-field polynomial for D = {D}")
    coeffs = tuple(entry["splitting_poly"])
    if not validate_splitting_poly(D, coeffs):
        raise UnknownDiscriminant(f"shipped polynomial for D = {D} fails validation")
    return SplittingPoly(D, coeffs, True, "shipped")


def checked_splitting_poly(D: int, coeffs) -> SplittingPoly:
    """Validate a user polynomial; UnknownDiscriminant if it fails."""
    if not validate_splitting_poly(D, coeffs):
        raise UnknownDiscriminant(f"polynomial {list(coeffs)} does not cut out a class field for D = {D}")
    return SplittingPoly(D, tuple(int(c) for c in coeffs), True, "user")
