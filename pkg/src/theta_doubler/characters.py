"""Dirichlet characters mod N with values in F_{p^r}.

(Z/N)^x is presented by one generator per odd prime power (its smallest
primitive root, lifted by CRT) and by -1, 5 for 2^a, a >= 3 (just -1 for
a = 2).  A character is an exponent vector ``e``: generator ``g_i`` of order
``o_i`` goes to ``zeta_{o_i}^{e_i}``.  Roots of unity in a field are the
coherent ones from :meth:`FieldCtx.root_of_unity`, so the same label means
the same Teichmuller-compatible character in every field that contains its
values.  Characters with ``ctx=None`` are abstract (used for counting).
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd, lcm

import numpy as np
from sympy import factorint, kronecker_symbol, primitive_root

from .errors import ContextMismatch, FieldTooSmall, UsageError
from .ff import FieldCtx, FieldElement, multiplicative_order


def _crt_lift(residue: int, modulus: int, N: int) -> int:
    """The unit of Z/N that is ``residue`` mod ``modulus`` and 1 mod N/modulus."""
    other = N // modulus
    if other == 1:
        return residue % N
    # x = residue + modulus * t  with x = 1 mod other
    t = (1 - residue) * pow(modulus, -1, other) % other
    return (residue + modulus * t) % N


class CharGroup:
    """Generators, orders and discrete logs for (Z/N)^x."""

    def __init__(self, N: int):
        if N < 1:
            raise UsageError("modulus must be positive")
        self.N = N
        self.factors = sorted(factorint(N).items())
        gens, orders, comps = [], [], []
        for ell, a in self.factors:
            q = ell**a
            if ell == 2:
                if a >= 2:
                    gens.append(_crt_lift(q - 1, q, N))
                    orders.append(2)
                    comps.append((ell, a, "sign"))
                if a >= 3:
                    gens.append(_crt_lift(5, q, N))
                    orders.append(2 ** (a - 2))
                    comps.append((ell, a, "five"))
            else:
                g = primitive_root(q)
                gens.append(_crt_lift(g, q, N))
                orders.append(q // ell * (ell - 1))
                comps.append((ell, a, "cyclic"))
        self.gens = tuple(gens)
        self.orders = tuple(orders)
        self.components = tuple(comps)
        self.exponent = lcm(*orders) if orders else 1
        self.size = int(np.prod(orders)) if orders else 1
        self._logs = None
        self.units = np.gcd(np.arange(N), N) == 1

    @property
    def logs(self) -> np.ndarray:
        """(N, ngens) table of discrete logs, -1 on non-units."""
        if self._logs is None:
            ng = len(self.gens)
            logs = -np.ones((self.N, ng), dtype=np.int64)
            if self.N == 1:
                logs = np.zeros((1, 0), dtype=np.int64)
            else:
                n = np.array([1], dtype=np.int64)
                idx = np.zeros((1, ng), dtype=np.int64)
                for i, (g, o) in enumerate(zip(self.gens, self.orders)):
                    pw = np.array([pow(g, k, self.N) for k in range(o)], dtype=np.int64)
                    n = (n[:, None] * pw[None, :] % self.N).ravel()
                    new_idx = np.repeat(idx, o, axis=0)
                    new_idx[:, i] = np.tile(np.arange(o), len(idx))
                    idx = new_idx
                logs[n] = idx
            self._logs = logs
        return self._logs

    def log(self, n: int) -> tuple[int, ...] | None:
        row = self.logs[n % self.N]
        if not self.units[n % self.N]:
            return None
        return tuple(int(x) for x in row)

    def order_of(self, e) -> int:
        return lcm(1, *(o // gcd(x, o) for x, o in zip(e, self.orders)))

    def conductor_of(self, e) -> int:
        f = 1
        for ell, a in self.factors:
            idx = [i for i, c in enumerate(self.components) if c[0] == ell]
            if ell == 2:
                sign = five = 0
                for i in idx:
                    if self.components[i][2] == "sign":
                        sign = e[i] % 2
                    else:
                        five = self.orders[i] // gcd(e[i], self.orders[i])
                if five > 1:
                    f *= 2 ** (2 + five.bit_length() - 1)
                elif sign:
                    f *= 4
                continue
            (i,) = idx
            oc = self.orders[i] // gcd(e[i], self.orders[i])
            if oc > 1:
                v = 0
                while oc % ell == 0:
                    oc //= ell
                    v += 1
                f *= ell ** (1 + v)
        return f

    def all_exponents(self):
        """Every exponent vector, lexicographically."""
        out = [()]
        for o in self.orders:
            out = [e + (x,) for e in out for x in range(o)]
        return out


@lru_cache(maxsize=None)
def char_group(N: int) -> CharGroup:
    return CharGroup(N)


class DirichletChar:
    """A Dirichlet character mod N, optionally with values in a finite field."""

    def __init__(self, N: int, exps, ctx: FieldCtx | None = None):
        G = char_group(N)
        exps = tuple(int(x) % o for x, o in zip(exps, G.orders))
        if len(exps) != len(G.orders):
            raise UsageError(f"character mod {N} needs {len(G.orders)} exponents, got {len(exps)}")
        self.N = N
        self.group = G
        self.exps = exps
        self.ctx = ctx
        self.order = G.order_of(exps)
        self.conductor = G.conductor_of(exps)
        o = self.order
        # exponent of chi(n) in units of zeta_order; -1 on non-units
        logs = G.logs
        if N == 1:
            tab = np.zeros(1, dtype=np.int64)
        else:
            tab = np.zeros(N, dtype=np.int64)
            for i, (x, oi) in enumerate(zip(exps, G.orders)):
                tab = tab + logs[:, i] * (x * o // oi)
            tab %= o
            tab[~G.units] = -1
        tab.setflags(write=False)
        self.exp_table = tab
        if ctx is not None and (ctx.q - 1) % o:
            raise FieldTooSmall(
                f"character {self.label} of order {o} needs a larger field than {ctx.label}",
                min_r=multiplicative_order(ctx.p, o),
            )
        self._vals = None

    # -- naming ------------------------------------------------------------
    @property
    def label(self) -> str:
        return f"{self.N}:" + ",".join(str(x) for x in self.exps)

    @classmethod
    def from_label(cls, label: str, ctx: FieldCtx | None = None) -> "DirichletChar":
        core = label.strip().split("-", 1)[0]
        try:
            if ":" not in core:
                N = int(core)
                return cls.trivial(N, ctx)
            n_str, e_str = core.split(":", 1)
            N = int(n_str)
            if e_str in ("", "trivial"):
                return cls.trivial(N, ctx)
            exps = [int(x) for x in e_str.split(",")]
        except ValueError as exc:
            raise UsageError(f"malformed character label {label!r}") from exc
        if N < 1 or len(exps) != len(char_group(N).orders):
            raise UsageError(f"malformed character label {label!r}")
        return cls(N, exps, ctx)

    @classmethod
    def trivial(cls, N: int, ctx: FieldCtx | None = None) -> "DirichletChar":
        return cls(N, [0] * len(char_group(N).orders), ctx)

    @classmethod
    def from_function(cls, N: int, fn, ctx: FieldCtx | None = None) -> "DirichletChar":
        """Character from a +-1-valued function on units (quadratic characters)."""
        G = char_group(N)
        exps = []
        for g, o in zip(G.gens, G.orders):
            v = fn(g)
            if v == 1:
                exps.append(0)
            elif v == -1 and o % 2 == 0:
                exps.append(o // 2)
            else:
                raise UsageError("from_function expects a +-1 valued character")
        chi = cls(N, exps, ctx)
        for n in range(1, min(N, 200)):
            if gcd(n, N) == 1 and chi.sign(n) != fn(n):
                raise UsageError("function is not multiplicative")
        return chi

    def __repr__(self):
        field = self.ctx.label if self.ctx is not None else "abstract"
        return f"DirichletChar({self.label}, order={self.order}, conductor={self.conductor}, {field})"

    def __eq__(self, other):
        return isinstance(other, DirichletChar) and (self.N, self.exps, self.ctx) == (other.N, other.exps, other.ctx)

    def __hash__(self):
        return hash((self.N, self.exps))

    # -- structure ------------------------------------------------------------
    @property
    def is_trivial(self) -> bool:
        return self.order == 1

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.N

    @property
    def parity(self) -> str:
        return "odd" if self.is_odd else "even"

    @property
    def is_odd(self) -> bool:
        if self.N <= 2:
            return False
        e = int(self.exp_table[self.N - 1])
        return 2 * e == self.order

    def sign(self, n: int) -> int:
        """chi(n) for a character of order <= 2, as an integer in {-1, 0, 1}."""
        if self.order > 2:
            raise ValueError("sign() is for characters of order at most 2")
        e = int(self.exp_table[n % self.N])
        return 0 if e < 0 else (1 if e == 0 else -1)

    def with_ctx(self, ctx: FieldCtx | None) -> "DirichletChar":
        return DirichletChar(self.N, self.exps, ctx)

    def _same(self, other: "DirichletChar"):
        if self.N != other.N:
            raise ContextMismatch(f"characters mod {self.N} and {other.N}")

    def __mul__(self, other: "DirichletChar") -> "DirichletChar":
        self._same(other)
        return DirichletChar(self.N, [a + b for a, b in zip(self.exps, other.exps)], self.ctx or other.ctx)

    def __truediv__(self, other: "DirichletChar") -> "DirichletChar":
        self._same(other)
        return DirichletChar(self.N, [a - b for a, b in zip(self.exps, other.exps)], self.ctx or other.ctx)

    def conj(self) -> "DirichletChar":
        return DirichletChar(self.N, [-a for a in self.exps], self.ctx)

    def extend(self, M: int) -> "DirichletChar":
        """The character mod a multiple M of N induced by this one."""
        if M % self.N:
            raise UsageError(f"{M} is not a multiple of {self.N}")
        G = char_group(M)
        exps = []
        for g, o in zip(G.gens, G.orders):
            e = int(self.exp_table[g % self.N])
            # chi(g) = zeta_order^e and must equal zeta_o^x
            exps.append(e * o // self.order if e >= 0 else 0)
        return DirichletChar(M, exps, self.ctx)

    def primitive(self) -> "DirichletChar":
        """The primitive character mod the conductor inducing this one."""
        f = self.conductor
        if f == self.N:
            return self
        G = char_group(f)
        exps = []
        for g, o in zip(G.gens, G.orders):
            m = g
            while gcd(m, self.N) != 1:
                m += f
            e = int(self.exp_table[m % self.N])
            exps.append(e * o // self.order)
        return DirichletChar(f, exps, self.ctx)

    # -- values -----------------------------------------------------------------
    def exps_mod(self, L: int, n) -> np.ndarray:
        """Exponents of chi(n) in units of zeta_L (L a multiple of the order), -1 on non-units."""
        if L % self.order:
            raise ValueError(f"{L} is not a multiple of the order {self.order}")
        e = self.exp_table[np.asarray(n, dtype=np.int64) % self.N]
        return np.where(e < 0, -1, e * (L // self.order))

    def _value_table(self) -> np.ndarray:
        if self.ctx is None:
            raise ContextMismatch("abstract character has no field values")
        if self._vals is None:
            z = int(self.ctx.root_of_unity(self.order))
            pw = np.ones(self.order, dtype=np.int64)
            for i in range(1, self.order):
                pw[i] = self.ctx.mul(pw[i - 1], z)
            self._vals = pw
        return self._vals

    def values(self, n) -> np.ndarray:
        """Encodings of chi(n) for an array of integers."""
        pw = self._value_table()
        e = self.exp_table[np.asarray(n, dtype=np.int64) % self.N]
        return np.where(e < 0, 0, pw[np.maximum(e, 0)])

    def __call__(self, n: int) -> FieldElement:
        return FieldElement(self.ctx, int(self.values(np.array([n]))[0]))


def enumerate_chars(N: int, ctx: FieldCtx) -> list[DirichletChar]:
    """All characters mod N of order prime to p, with values in ctx."""
    G = char_group(N)
    p = ctx.p
    e_prime = G.exponent
    while e_prime % p == 0:
        e_prime //= p
    if (ctx.q - 1) % e_prime:
        raise FieldTooSmall(
            f"characters mod {N} of order prime to {p} need F_{p}^{multiplicative_order(p, e_prime)}",
            min_r=multiplicative_order(p, e_prime),
        )
    out = []
    for e in G.all_exponents():
        if G.order_of(e) % p:
            out.append(DirichletChar(N, e, ctx))
    return out


def representable_chars(N: int, ctx: FieldCtx) -> list[DirichletChar]:
    """The characters mod N of order prime to p whose values already lie in ctx."""
    G = char_group(N)
    out = []
    for e in G.all_exponents():
        o = G.order_of(e)
        if o % ctx.p and (ctx.q - 1) % o == 0:
            out.append(DirichletChar(N, e, ctx))
    return out


def kronecker_character(D: int, ctx: FieldCtx | None = None) -> DirichletChar:
    """n -> (D/n) as a character mod |D| (D a discriminant)."""
    N = abs(D)
    return DirichletChar.from_function(N, lambda n: int(kronecker_symbol(D, n)), ctx)


def min_degree_for(N: int, p: int) -> int:
    """Smallest r such that F_{p^r} holds all prime-to-p order characters mod N."""
    e = char_group(N).exponent
    while e % p == 0:
        e //= p
    return multiplicative_order(p, e)
