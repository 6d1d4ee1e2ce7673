"""Truncated q-expansions and the weight-shifting maps A, V and theta.

A :class:`QExpansion` stores ``a_0 .. a_{prec-1}``.  Coefficients live either
in a finite field (``ctx`` a :class:`FieldCtx`, int64 encodings) or in Q
(``ctx is None``, an object array of :class:`fractions.Fraction`).  Nothing is
ever claimed past ``prec``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

import numpy as np
from sympy import primefactors

from . import linalg
from .errors import ContextMismatch, InsufficientPrecision, PDividesDenominator, RationalContext
from .ff import FieldCtx

# float64 FFT convolution is exact (after rounding) well below this bound
_FFT_SAFE = 2**44
_DIRECT_MAX = 256


def _conv_direct(a, b, n):
    return np.convolve(a[:n], b[:n])[:n]


def _rfft_conv(planes_a, planes_b, n):
    """All pairwise convolutions sum_{i+j=s} a_i * b_j of integer planes, truncated to n."""
    size = 1 << max(1, (2 * n - 1).bit_length())
    fa = [np.fft.rfft(x[:n].astype(np.float64), size) for x in planes_a]
    fb = [np.fft.rfft(y[:n].astype(np.float64), size) for y in planes_b]
    out = []
    for s in range(len(fa) + len(fb) - 1):
        acc = 0
        for i in range(max(0, s - len(fb) + 1), min(s, len(fa) - 1) + 1):
            acc = acc + fa[i] * fb[s - i]
        out.append(np.rint(np.fft.irfft(acc, size)[:n]).astype(np.int64))
    return out


def _conv_modp(a, b, p, n):
    """Truncated convolution of two F_p arrays."""
    if n <= _DIRECT_MAX:
        return _conv_direct(a, b, n) % p
    if n * (p - 1) ** 2 < _FFT_SAFE:
        return _rfft_conv([a], [b], n)[0] % p
    # split each value as lo + s*hi so every partial product stays small
    s = int(ceil(p**0.5))
    lo_a, hi_a = a % s, a // s
    lo_b, hi_b = b % s, b // s
    c0, c1, c2 = _rfft_conv([lo_a, hi_a], [lo_b, hi_b], n)
    return (c0 + (c1 % p) * s + (c2 % p) * (s * s % p)) % p


def series_mul(a: np.ndarray, b: np.ndarray, ctx: FieldCtx, n: int) -> np.ndarray:
    """Product of two encoded coefficient arrays over ctx, truncated to n terms."""
    p = ctx.p
    if ctx.r == 1:
        return _conv_modp(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64), p, n)
    da = ctx.digits(np.asarray(a[:n]))
    db = ctx.digits(np.asarray(b[:n]))
    r = ctx.r
    if n <= _DIRECT_MAX:
        planes = []
        for s in range(2 * r - 1):
            acc = np.zeros(n, dtype=np.int64)
            for i in range(max(0, s - r + 1), min(s, r - 1) + 1):
                acc += _conv_direct(da[:, i], db[:, s - i], n)
            planes.append(acc % p)
    elif n * r * (p - 1) ** 2 < _FFT_SAFE:
        planes = [c % p for c in _rfft_conv(list(da.T), list(db.T), n)]
    else:
        planes = []
        for s in range(2 * r - 1):
            acc = np.zeros(n, dtype=np.int64)
            for i in range(max(0, s - r + 1), min(s, r - 1) + 1):
                acc = (acc + _conv_modp(da[:, i], db[:, s - i], p, n)) % p
            planes.append(acc)
    return ctx.from_digits(ctx.reduce_digits(np.stack(planes, axis=-1)))


class QExpansion:
    """Truncated power series sum_{n < prec} a_n q^n; immutable."""

    __slots__ = ("ctx", "_c")

    def __init__(self, coeffs, ctx: FieldCtx | None = None, prec: int | None = None):
        if ctx is None:
            c = np.array([Fraction(x) for x in coeffs], dtype=object)
        else:
            c = np.asarray(coeffs)
            if c.dtype == object:
                c = np.array([_reduce_scalar(x, ctx) for x in c], dtype=np.int64)
            else:
                c = c.astype(np.int64, copy=True)
                if ctx.r == 1:
                    c %= ctx.p
                elif c.size and (c.min() < 0 or c.max() >= ctx.q):
                    raise ValueError("encodings out of range")
        if prec is not None:
            if prec < len(c):
                c = c[:prec]
            elif prec > len(c):
                pad = np.zeros(prec - len(c), dtype=c.dtype)
                if ctx is None:
                    pad[:] = Fraction(0)
                c = np.concatenate([c, pad])
        c.setflags(write=False)
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "_c", c)

    def __setattr__(self, name, val):
        raise AttributeError("QExpansion is immutable")

    @classmethod
    def zero(cls, prec: int, ctx: FieldCtx | None = None) -> "QExpansion":
        return cls([0] * prec, ctx)

    @classmethod
    def one(cls, prec: int, ctx: FieldCtx | None = None) -> "QExpansion":
        return cls([1] + [0] * (prec - 1), ctx)

    @property
    def prec(self) -> int:
        return len(self._c)

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def is_rational(self) -> bool:
        return self.ctx is None

    def __len__(self):
        return self.prec

    def __getitem__(self, n):
        if isinstance(n, slice):
            return self._c[n]
        if n < 0 or n >= self.prec:
            raise InsufficientPrecision(f"coefficient {n} requested, precision is {self.prec}")
        return self._c[n]

    def list(self) -> list:
        return list(self._c)

    def __repr__(self):
        terms = []
        for n, a in enumerate(self._c[:12]):
            if a:
                terms.append(f"{a}*q^{n}" if n else f"{a}")
        field = "QQ" if self.ctx is None else self.ctx.label
        return f"QExpansion[{field}]({' + '.join(terms) or '0'} + O(q^{self.prec}))"

    def __eq__(self, other):
        if not isinstance(other, QExpansion):
            return NotImplemented
        return self.ctx == other.ctx and self.prec == other.prec and bool(np.all(self._c == other._c))

    __hash__ = None

    def _check(self, other: "QExpansion"):
        if self.ctx != other.ctx:
            raise ContextMismatch("q-expansions over different coefficient rings")

    def truncate(self, prec: int) -> "QExpansion":
        if prec > self.prec:
            raise InsufficientPrecision(f"cannot extend precision {self.prec} to {prec}")
        return QExpansion(self._c[:prec], self.ctx)

    def __add__(self, other):
        self._check(other)
        n = min(self.prec, other.prec)
        if self.ctx is None:
            return QExpansion(self._c[:n] + other._c[:n])
        return QExpansion(self.ctx.add(self._c[:n], other._c[:n]), self.ctx)

    def __sub__(self, other):
        self._check(other)
        n = min(self.prec, other.prec)
        if self.ctx is None:
            return QExpansion(self._c[:n] - other._c[:n])
        return QExpansion(self.ctx.sub(self._c[:n], other._c[:n]), self.ctx)

    def __neg__(self):
        if self.ctx is None:
            return QExpansion(-self._c)
        return QExpansion(self.ctx.neg(self._c), self.ctx)

    def scale(self, c) -> "QExpansion":
        """Multiply by a scalar: a rational (reduced mod p over a field) or a FieldElement."""
        if self.ctx is None:
            return QExpansion(self._c * Fraction(c))
        return QExpansion(self.ctx.mul(self._c, _reduce_scalar(c, self.ctx)), self.ctx)

    def __mul__(self, other):
        if isinstance(other, QExpansion):
            return mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def reduce(self, ctx: FieldCtx) -> "QExpansion":
        """Image of a rational series in ctx (PDividesDenominator if not p-integral)."""
        if self.ctx is not None:
            if self.ctx == ctx:
                return self
            if self.ctx.p == ctx.p and self.ctx.r == 1:
                return QExpansion(self._c, ctx)
            raise ContextMismatch(f"cannot move {self.ctx.label} series to {ctx.label}")
        return QExpansion([_reduce_scalar(x, ctx) for x in self._c], ctx)

    def valuation(self) -> int | None:
        nz = np.flatnonzero(self._c != 0)
        return int(nz[0]) if len(nz) else None

    def is_zero(self) -> bool:
        return not np.any(self._c != 0)


def _reduce_scalar(x, ctx: FieldCtx) -> int:
    if hasattr(x, "ctx") and hasattr(x, "value"):
        return int(ctx(x))
    x = Fraction(x)
    if x.denominator % ctx.p == 0:
        raise PDividesDenominator(f"{x} is not {ctx.p}-integral")
    return x.numerator * pow(x.denominator, -1, ctx.p) % ctx.p


def mul(f: QExpansion, g: QExpansion) -> QExpansion:
    """Cauchy product at precision min(prec_f, prec_g)."""
    f._check(g)
    n = min(f.prec, g.prec)
    if n == 0:
        return QExpansion([], f.ctx)
    if f.ctx is None:
        return QExpansion(_conv_direct(f.coeffs, g.coeffs, n))
    return QExpansion(series_mul(f.coeffs, g.coeffs, f.ctx, n), f.ctx)


def theta(f: QExpansion) -> QExpansion:
    """sum n a_n q^n mod p (the weight shift k -> k + p + 1 is the caller's business)."""
    if f.ctx is None:
        raise RationalContext("theta is defined in positive characteristic only")
    n = np.arange(f.prec, dtype=np.int64) % f.ctx.p
    return QExpansion(f.ctx.mul(f.coeffs, n), f.ctx)


def scale_q(f: QExpansion, t: int, prec: int | None = None) -> QExpansion:
    """f(q^t) at precision ``prec`` (default: same as f).

    Needs f known to ceil(prec/t) terms.
    """
    if t < 1:
        raise ValueError("scaling factor must be positive")
    prec = f.prec if prec is None else prec
    need = -(-prec // t)
    if f.prec < need:
        raise InsufficientPrecision(f"q -> q^{t} to precision {prec} needs {need} input terms, have {f.prec}")
    if f.ctx is None:
        out = np.array([Fraction(0)] * prec, dtype=object)
    else:
        out = np.zeros(prec, dtype=np.int64)
    out[::t] = f.coeffs[:need]
    return QExpansion(out, f.ctx)


def V_op(f: QExpansion, p: int, prec: int | None = None) -> QExpansion:
    """The map q -> q^p; output precision defaults to the input precision."""
    return scale_q(f, p, prec)


def hasse_shift(f: QExpansion, from_weight: int) -> tuple[QExpansion, int]:
    """Multiplication by the Hasse invariant: same q-expansion, weight k + p - 1."""
    if f.ctx is None:
        raise RationalContext("the Hasse invariant lives in characteristic p")
    return f, from_weight + f.ctx.p - 1


@dataclass(frozen=True)
class SturmBound:
    k: int
    N: int
    mu: int
    bound: int


def gamma0_index(N: int) -> int:
    mu = N
    for ell in primefactors(N):
        mu = mu // ell * (ell + 1)
    return mu


def sturm_bound(k: int, N: int) -> SturmBound:
    """ceil(k * mu / 12) + 1 with mu = [SL_2(Z) : Gamma_0(N)]."""
    if k < 1 or N < 1:
        raise ValueError("weight and level must be positive")
    mu = gamma0_index(N)
    return SturmBound(k, N, mu, -(-k * mu // 12) + 1)


@dataclass(frozen=True)
class Basis:
    """Echelon basis of a span of q-expansions."""

    matrix: np.ndarray
    pivots: tuple[int, ...]
    ctx: FieldCtx

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def prec(self) -> int:
        return self.matrix.shape[1]

    def series(self) -> list[QExpansion]:
        return [QExpansion(row, self.ctx) for row in self.matrix]

    def coordinates(self, f) -> np.ndarray:
        """Coordinates of a series (or rows) in this basis; NotInSpan if outside."""
        v = f.coeffs if isinstance(f, QExpansion) else np.asarray(f)
        return linalg.coords_in_rref(v, self.matrix, list(self.pivots), self.ctx)

    def contains(self, f) -> bool:
        v = f.coeffs if isinstance(f, QExpansion) else np.asarray(f)
        return bool(linalg.in_span(v, self.matrix, list(self.pivots), self.ctx).all())


def row_space(vectors, ctx: FieldCtx | None = None) -> Basis:
    """Reduced echelon basis of the span of q-expansions with common ctx and precision."""
    vectors = list(vectors)
    if not vectors:
        if ctx is None:
            raise ValueError("empty input needs an explicit ctx")
        return Basis(np.zeros((0, 0), dtype=np.int64), (), ctx)
    ctx = vectors[0].ctx
    prec = vectors[0].prec
    for v in vectors:
        if v.ctx != ctx:
            raise ContextMismatch("row_space over mixed coefficient rings")
        if v.prec != prec:
            raise InsufficientPrecision("row_space needs a common precision")
    if ctx is None:
        raise RationalContext("row_space works over finite fields")
    R, piv = linalg.rref(np.vstack([v.coeffs for v in vectors]), ctx)
    return Basis(R, tuple(piv), ctx)
