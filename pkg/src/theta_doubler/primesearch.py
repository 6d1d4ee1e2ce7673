"""Auxiliary primes l: l = 1 mod p and Frob_l trivial in the Hilbert class field of Q(sqrt D).

Only this necessary condition is sieved for; whether a candidate actually
produces a non-liftable weight-one form is decided downstream.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache

from sympy import Poly, discriminant, isprime, jacobi_symbol, primerange, symbols

from .dihedral import class_number, splitting_poly
from .errors import DiscriminantDivisible, NotPrime

_X = symbols("x")


def _polymulmod(a: list[int], b: list[int], f: list[int], ell: int) -> list[int]:
    """a b mod (f, l); coefficient lists low -> high, f monic."""
    n = len(f) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    for d in range(len(prod) - 1, n - 1, -1):
        c = prod[d] % ell
        if c:
            for i in range(n):
                prod[d - n + i] -= c * f[i]
        prod[d] = 0
    return [c % ell for c in prod[:n]] + [0] * (n - len(prod[:n]))


def x_power_mod(e: int, f, ell: int) -> list[int]:
    """x^e mod (f, l) by square-and-multiply."""
    f = [int(c) % ell for c in f]
    n = len(f) - 1
    result = [1] + [0] * (n - 1)
    base = ([0, 1] + [0] * (n - 2)) if n >= 2 else [(-f[0]) % ell]
    while e:
        if e & 1:
            result = _polymulmod(result, base, f, ell)
        base = _polymulmod(base, base, f, ell)
        e >>= 1
    return result


@lru_cache(maxsize=64)
def _disc(coeffs: tuple[int, ...]) -> int:
    return int(discriminant(Poly(list(reversed(coeffs)), _X).as_expr(), _X))


def splits_completely(f, ell: int) -> bool:
    """Does the monic integer polynomial f (low -> high) have deg f distinct roots mod l?"""
    coeffs = tuple(int(c) for c in f)
    if coeffs[-1] != 1:
        raise ValueError("polynomial must be monic")
    if not isprime(ell):
        raise NotPrime(f"{ell} is not prime")
    n = len(coeffs) - 1
    if n <= 1:
        return True
    if _disc(coeffs) % ell == 0:
        raise DiscriminantDivisible(f"{ell} divides the discriminant of {list(coeffs)}")
    # squarefree mod l, so f | x^l - x iff f splits into distinct linear factors
    xl = x_power_mod(ell, coeffs, ell)
    xl[1] = (xl[1] - 1) % ell
    return not any(xl)


@dataclass(frozen=True)
class CandidatePrime:
    ell: int
    p: int
    D: int
    checks: dict

    @property
    def status(self) -> str:
        return "candidate" if all(self.checks.values()) else "rejected"

    def to_json(self) -> dict:
        return {**asdict(self), "status": self.status}


def check_prime(ell: int, p: int, D: int, N: int, poly=None) -> CandidatePrime:
    """All four sieve conditions for one prime, evaluated independently."""
    coeffs = poly if poly is not None else splitting_poly(D).coeffs
    checks = {
        "one_mod_p": ell % p == 1,
        "split_in_K": jacobi_symbol(D % ell, ell) == 1 if ell > 2 else D % 8 == 1,
        "splits_completely": False,
        "prime_to_N": N % ell != 0,
    }
    if checks["prime_to_N"] and ell != p:
        try:
            checks["splits_completely"] = splits_completely(coeffs, ell)
        except DiscriminantDivisible:
            pass
    return CandidatePrime(ell, p, D, checks)


@dataclass
class SieveResult:
    p: int
    D: int
    N: int
    limit: int
    candidates: list
    scanned: int
    predicted_density: float

    @property
    def observed_density(self) -> float:
        return len(self.candidates) / self.scanned if self.scanned else 0.0

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "D": self.D,
            "N": self.N,
            "limit": self.limit,
            "candidates": [c.to_json() for c in self.candidates],
            "scanned_primes": self.scanned,
            "observed_density": self.observed_density,
            "predicted_density": self.predicted_density,
        }


def sieve(p: int, D: int, N: int | None = None, limit: int = 10**4, count: int = 3, poly=None) -> SieveResult:
    """First ``count`` primes l <= limit passing every check, in increasing order.

    The density diagnostic compares against 1/(2 h (p - 1)), the Chebotarev
    density of primes split completely in H(zeta_p) when the two are disjoint.
    """
    N = abs(D) if N is None else N
    coeffs = poly if poly is not None else splitting_poly(D).coeffs
    h = class_number(D)
    out = []
    scanned = 0
    for ell in primerange(2, limit + 1):
        scanned += 1
        c = check_prime(int(ell), p, D, N, coeffs)
        if c.status == "candidate":
            out.append(c)
            if len(out) >= count:
                break
    return SieveResult(p, D, N, limit, out, scanned, 1.0 / (2 * h * (p - 1)))
