"""Exact elements of Q(zeta_m) in the power basis 1, z, ..., z^(phi(m)-1)."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import lcm

from sympy import Poly, cyclotomic_poly, symbols

from .errors import PDividesDenominator
from .ff import FieldCtx

_X = symbols("x")


@lru_cache(maxsize=None)
def cyclotomic_coeffs(m: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_m, low -> high."""
    return tuple(int(c) for c in reversed(Poly(cyclotomic_poly(m, _X), _X).all_coeffs()))


class Cyclo:
    """An element of Q(zeta_m); immutable, canonical (reduced mod Phi_m)."""

    __slots__ = ("m", "coeffs")

    def __init__(self, m: int, vec):
        phi = cyclotomic_coeffs(m)
        d = len(phi) - 1
        c = [Fraction(x) for x in vec]
        # z^m = 1 first, then long division by the monic Phi_m
        if len(c) > m:
            folded = [Fraction(0)] * m
            for i, x in enumerate(c):
                folded[i % m] += x
            c = folded
        for i in range(len(c) - 1, d - 1, -1):
            lead = c[i]
            if lead:
                for j in range(d + 1):
                    c[i - d + j] -= lead * phi[j]
        c = c[:d] + [Fraction(0)] * (d - len(c))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "coeffs", tuple(c))

    def __setattr__(self, name, val):
        raise AttributeError("Cyclo is immutable")

    @classmethod
    def rational(cls, x) -> "Cyclo":
        return cls(1, [x])

    def lift(self, L: int) -> "Cyclo":
        if L % self.m:
            raise ValueError(f"Q(zeta_{self.m}) is not inside Q(zeta_{L})")
        step = L // self.m
        vec = [Fraction(0)] * L
        for i, c in enumerate(self.coeffs):
            vec[i * step % L] += c
        return Cyclo(L, vec)

    def __add__(self, other: "Cyclo") -> "Cyclo":
        L = lcm(self.m, other.m)
        a, b = self.lift(L), other.lift(L)
        return Cyclo(L, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    def __neg__(self):
        return Cyclo(self.m, [-x for x in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, x) -> "Cyclo":
        x = Fraction(x)
        return Cyclo(self.m, [c * x for c in self.coeffs])

    def __eq__(self, other):
        if not isinstance(other, Cyclo):
            return NotImplemented
        L = lcm(self.m, other.m)
        return self.lift(L).coeffs == other.lift(L).coeffs

    def __hash__(self):
        return hash(self.simplify().coeffs)

    def simplify(self) -> "Cyclo":
        """Drop to Q when the element is rational."""
        if all(c == 0 for c in self.coeffs[1:]):
            return Cyclo(1, [self.coeffs[0] if self.coeffs else 0])
        return self

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational number")
        return self.coeffs[0] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_p_integral(self, p: int) -> bool:
        # the power basis is an integral basis of Z[zeta_m]
        return all(c.denominator % p for c in self.coeffs)

    def reduce(self, ctx: FieldCtx) -> int:
        """Image in ctx under zeta_m -> the coherent root of unity (an encoding)."""
        if not self.is_p_integral(ctx.p):
            raise PDividesDenominator(f"{self} is not {ctx.p}-integral")
        z = int(ctx.root_of_unity(self.m)) if self.m > 1 else 1
        acc, zi = 0, 1
        for c in self.coeffs:
            cr = c.numerator * pow(c.denominator, -1, ctx.p) % ctx.p
            acc = int(ctx.add(acc, ctx.mul(cr, zi)))
            zi = int(ctx.mul(zi, z))
        return acc

    def __repr__(self):
        if self.is_rational():
            return f"Cyclo({self.to_fraction()})"
        terms = [f"{c}*z^{i}" for i, c in enumerate(self.coeffs) if c]
        return f"Cyclo[{self.m}]({' + '.join(terms)})"
