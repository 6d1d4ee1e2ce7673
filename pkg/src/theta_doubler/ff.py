"""Arithmetic in F_p and F_{p^r}.

Elements are encoded as integers ``sum(c_i * p**i)`` where ``c_i`` are the
coefficients of the polynomial representative (constant term first).  The
prime field embeds into every extension with the identity on encodings, so a
matrix over F_p is already a matrix over F_{p^r}.

Array operations (``ctx.add``, ``ctx.mul`` ...) act elementwise on int64
numpy arrays of encodings; :class:`FieldElement` is the scalar wrapper.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
from sympy.ntheory import factorint, isprime

from .errors import (
    ContextMismatch,
    DegreeTooLarge,
    DivisionByZero,
    FieldTooSmall,
    NotPrime,
    UnsupportedCharacteristic,
)

MAX_DEGREE = 8


def _poly_mod(a, m, p):
    a = [c % p for c in a]
    while a and a[-1] == 0:
        a.pop()
    dm = len(m) - 1
    inv = pow(m[-1], -1, p)
    while len(a) - 1 >= dm and a:
        c = a[-1] * inv % p
        shift = len(a) - 1 - dm
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
        while a and a[-1] == 0:
            a.pop()
    return a


def _poly_gcd(a, b, p):
    a = [c % p for c in a]
    while a and a[-1] == 0:
        a.pop()
    b = [c % p for c in b]
    while b and b[-1] == 0:
        b.pop()
    while b:
        a, b = b, _poly_mod(a, b, p)
    return a


def _poly_powmod_x(e, m, p):
    """x**e modulo m over F_p, by square and multiply."""
    result = [1]
    base = _poly_mod([0, 1], m, p)
    while e:
        if e & 1:
            result = _poly_mod(_poly_mul(result, base, p), m, p)
        base = _poly_mod(_poly_mul(base, base, p), m, p)
        e >>= 1
    return result


def _poly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def is_irreducible(modulus, p: int) -> bool:
    """Rabin-style test: no factor of degree <= r/2 (monic input, low->high)."""
    r = len(modulus) - 1
    if r <= 1:
        return r == 1
    if modulus[0] % p == 0:
        return False
    for i in range(1, r // 2 + 1):
        xq = _poly_powmod_x(p**i, list(modulus), p)
        diff = xq + [0] * max(0, 2 - len(xq))
        diff[1] = (diff[1] - 1) % p
        g = _poly_gcd(list(modulus), diff, p)
        if len(g) - 1 >= 1:
            return False
    return True


class FieldCtx:
    """The field F_{p^r} = F_p[x]/(modulus)."""

    def __init__(self, p: int, r: int, modulus: tuple[int, ...]):
        self.p = p
        self.r = r
        self.modulus = tuple(modulus)
        self.q = p**r
        self._powers = np.array([p**i for i in range(r)], dtype=np.int64)
        self._gen = None

    # -- identity -----------------------------------------------------
    def __repr__(self):
        return f"FieldCtx({self.label})"

    @property
    def label(self) -> str:
        if self.r == 1:
            return f"F{self.p}"
        terms = []
        for i in range(self.r, -1, -1):
            c = self.modulus[i]
            if c == 0:
                continue
            mon = "1" if i == 0 else ("x" if i == 1 else f"x^{i}")
            terms.append(mon if c == 1 and i else f"{c}" if i == 0 else f"{c}*{mon}")
        return f"F{self.p}^{self.r}[{'+'.join(terms)}]"

    def __eq__(self, other):
        return isinstance(other, FieldCtx) and (self.p, self.modulus) == (other.p, other.modulus)

    def __hash__(self):
        return hash((self.p, self.modulus))

    def __reduce__(self):
        return (make_field, (self.p, self.r))

    # -- scalar constructors -----------------------------------------
    def __call__(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.ctx != self:
                if value.ctx.p == self.p and value.ctx.r == 1:
                    return FieldElement(self, value.value)
                raise ContextMismatch(f"{value.ctx.label} vs {self.label}")
            return value
        if isinstance(value, (list, tuple)):
            return FieldElement(self, self.encode(value))
        return FieldElement(self, int(value) % self.p)

    def encode(self, coeffs) -> int:
        coeffs = list(coeffs) + [0] * (self.r - len(coeffs))
        return int(sum((int(c) % self.p) * self.p**i for i, c in enumerate(coeffs[: self.r])))

    def decode(self, value: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.r):
            value, c = divmod(value, self.p)
            out.append(c)
        return tuple(out)

    @property
    def zero(self):
        return FieldElement(self, 0)

    @property
    def one(self):
        return FieldElement(self, 1)

    def x(self):
        """The class of x (a generator of the field over F_p when r > 1)."""
        return FieldElement(self, self.p if self.r > 1 else 0)

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    # -- vectorised arithmetic on encodings -------------------------------
    def digits(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] // self._powers) % self.p

    def from_digits(self, d) -> np.ndarray:
        d = np.asarray(d, dtype=np.int64) % self.p
        return d @ self._powers

    def reduce_int(self, n):
        """Image of integers in the prime field (array or scalar)."""
        return np.asarray(n, dtype=np.int64) % self.p if not isinstance(n, int) else n % self.p

    def add(self, a, b):
        if self.r == 1:
            return (np.asarray(a) + np.asarray(b)) % self.p
        return self.from_digits(self.digits(a) + self.digits(b))

    def sub(self, a, b):
        if self.r == 1:
            return (np.asarray(a) - np.asarray(b)) % self.p
        return self.from_digits(self.digits(a) - self.digits(b))

    def neg(self, a):
        if self.r == 1:
            return (-np.asarray(a)) % self.p
        return self.from_digits(-self.digits(a))

    def reduce_digits(self, prod) -> np.ndarray:
        """Reduce polynomial digit arrays of length >= r modulo the modulus."""
        prod = np.array(prod, dtype=np.int64) % self.p
        r = self.r
        m = np.array(self.modulus[:r], dtype=np.int64)
        for j in range(prod.shape[-1] - 1, r - 1, -1):
            c = prod[..., j] % self.p
            prod[..., j - r : j] -= c[..., None] * m
            prod[..., j] = 0
            prod %= self.p
        return prod[..., :r] % self.p

    def mul(self, a, b):
        if self.r == 1:
            return (np.asarray(a, dtype=np.int64) * np.asarray(b, dtype=np.int64)) % self.p
        da, db = np.broadcast_arrays(self.digits(a), self.digits(b))
        r = self.r
        prod = np.zeros(da.shape[:-1] + (2 * r - 1,), dtype=np.int64)
        for i in range(r):
            prod[..., i : i + r] += da[..., i : i + 1] * db
        return self.from_digits(self.reduce_digits(prod))

    def scalar_mul(self, c: int, a):
        """Multiply encodings by a prime-field integer c."""
        if self.r == 1:
            return (np.asarray(a, dtype=np.int64) * (c % self.p)) % self.p
        return self.from_digits(self.digits(a) * (c % self.p))

    def pow(self, a, e: int):
        a = np.asarray(a, dtype=np.int64)
        if e < 0:
            return self.pow(self.inv(a), -e)
        if self.r == 1:
            out = np.ones_like(a)
            base = a % self.p
            while e:
                if e & 1:
                    out = out * base % self.p
                base = base * base % self.p
                e >>= 1
            return out
        out = np.ones_like(a)
        base = a
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise DivisionByZero("inverse of zero")
        return self.pow(a, self.q - 2)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    # -- structure ------------------------------------------------------------
    def generator(self) -> "FieldElement":
        """Smallest-encoding generator of the multiplicative group."""
        if self._gen is None:
            n = self.q - 1
            primes = list(factorint(n))
            cands = np.arange(1, self.q, dtype=np.int64)
            ok = np.ones(len(cands), dtype=bool)
            for ell in primes:
                ok &= self.pow(cands, n // ell) != 1
            self._gen = int(cands[np.argmax(ok)])
        return FieldElement(self, self._gen)

    def root_of_unity(self, m: int) -> "FieldElement":
        """The coherent primitive m-th root g**((q-1)/m) for the fixed generator g."""
        if (self.q - 1) % m:
            raise FieldTooSmall(
                f"no primitive {m}-th root of unity in {self.label}",
                min_r=multiplicative_order(self.p, m) if m % self.p else None,
            )
        return self.generator() ** ((self.q - 1) // m)

    def frobenius(self, a):
        return self.pow(a, self.p)


class FieldElement:
    """An element of F_{p^r}; immutable."""

    __slots__ = ("ctx", "value")

    def __init__(self, ctx: FieldCtx, value: int):
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "value", int(value))

    def __setattr__(self, name, val):
        raise AttributeError("FieldElement is immutable")

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.ctx.decode(self.value)

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.ctx != self.ctx:
                raise ContextMismatch(f"{self.ctx.label} vs {other.ctx.label}")
            return other
        if isinstance(other, (int, np.integer)):
            return FieldElement(self.ctx, int(other) % self.ctx.p)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.ctx, int(self.ctx.add(self.value, o.value)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.ctx, int(self.ctx.sub(self.value, o.value)))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return FieldElement(self.ctx, int(self.ctx.neg(self.value)))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.ctx, int(self.ctx.mul(self.value, o.value)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.value == 0:
            raise DivisionByZero("division by zero in " + self.ctx.label)
        return FieldElement(self.ctx, int(self.ctx.div(self.value, o.value)))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, e: int):
        if e < 0 and self.value == 0:
            raise DivisionByZero("inverse of zero")
        return FieldElement(self.ctx, int(self.ctx.pow(self.value, e)))

    def inverse(self):
        return self ** -1

    def frobenius(self):
        return self ** self.ctx.p

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.ctx == other.ctx and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.ctx.p
        return NotImplemented

    def __hash__(self):
        return hash((self.ctx, self.value))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __repr__(self):
        return f"{self.ctx.label}({self})"

    def __str__(self):
        if self.ctx.r == 1:
            return str(self.value)
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                parts.append(str(c) if i == 0 else (f"{c}*x" if i == 1 else f"{c}*x^{i}"))
        return "+".join(parts) or "0"


@lru_cache(maxsize=None)
def make_field(p: int, r: int = 1) -> FieldCtx:
    if not isprime(p):
        raise NotPrime(f"{p} is not prime")
    if p < 5:
        raise UnsupportedCharacteristic(f"characteristic {p} is out of scope (need p >= 5)")
    if r < 1 or r > MAX_DEGREE:
        raise DegreeTooLarge(f"extension degree {r} not in [1, {MAX_DEGREE}]")
    if r == 1:
        return FieldCtx(p, 1, (0, 1))
    # lexicographically first monic irreducible: scan sum(c_i p^i) upward
    for m in range(p**r):
        low = [(m // p**i) % p for i in range(r)]
        modulus = tuple(low) + (1,)
        if is_irreducible(modulus, p):
            return FieldCtx(p, r, modulus)
    raise AssertionError("no irreducible polynomial found")


def multiplicative_order(a: int, m: int) -> int:
    """Order of a in (Z/m)^x (m >= 1, gcd(a, m) = 1)."""
    if m == 1:
        return 1
    for e in itertools.count(1):
        if pow(a, e, m) == 1:
            return e


def field_containing(p: int, m: int, base_r: int = 1) -> FieldCtx:
    """Smallest F_{p^R} with base_r | R holding the m-th roots of unity."""
    r = multiplicative_order(p, m)
    R = r * base_r // np.gcd(r, base_r)
    return make_field(p, int(R))


def poly_eval(coeffs, x, ctx: FieldCtx):
    """Evaluate sum coeffs[i] x^i (encodings) at an array of encodings, Horner."""
    x = np.asarray(x, dtype=np.int64)
    acc = np.zeros_like(x)
    for c in reversed(list(coeffs)):
        acc = ctx.add(ctx.mul(acc, x), int(c))
    return acc


def _synthetic_div(coeffs, root, ctx):
    """Divide by (X - root); returns (quotient, remainder) as encodings."""
    n = len(coeffs) - 1
    out = [0] * n
    acc = 0
    for i in range(n, 0, -1):
        acc = int(ctx.add(ctx.mul(acc, root), coeffs[i]))
        out[i - 1] = acc
    rem = int(ctx.add(ctx.mul(acc, root), coeffs[0]))
    return out, rem


def poly_roots(f, ctx: FieldCtx) -> list[FieldElement]:
    """All roots of f (coefficients low->high) in ctx, with multiplicity.

    Exhaustive evaluation over the field; multiplicities by repeated
    synthetic division.  Sorted by encoding.
    """
    coeffs = [int(ctx(c)) if not isinstance(c, FieldElement) else c.value for c in f]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) < 2:
        raise ValueError("poly_roots needs a polynomial of degree >= 1")
    vals = poly_eval(coeffs, ctx.elements(), ctx)
    roots = []
    for a in np.flatnonzero(vals == 0):
        a = int(a)
        cur = coeffs
        while len(cur) > 1:
            q, rem = _synthetic_div(cur, a, ctx)
            if rem != 0:
                break
            roots.append(FieldElement(ctx, a))
            cur = q
    return roots
