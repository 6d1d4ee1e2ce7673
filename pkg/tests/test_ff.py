import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import first_irreducible_quadratic, polymod
from theta_doubler.errors import (
    ContextMismatch,
    DegreeTooLarge,
    DivisionByZero,
    NotPrime,
    UnsupportedCharacteristic,
)
from theta_doubler.ff import FieldElement, is_irreducible, make_field, multiplicative_order, poly_roots


def test_prime_field():
    F = make_field(5, 1)
    assert F.q == 5 and F.modulus == (0, 1) and F.label == "F5"


def test_f25_modulus_matches_scan():
    F = make_field(5, 2)
    assert F.modulus == first_irreducible_quadratic(5)


def test_rejects():
    with pytest.raises(NotPrime):
        make_field(4, 1)
    with pytest.raises(UnsupportedCharacteristic):
        make_field(3)
    with pytest.raises(DegreeTooLarge):
        make_field(5, 9)


def test_small_arith():
    F = make_field(5)
    assert F(3) * F(4) == F(2)
    assert F(2).inverse() == F(3)
    assert F(1) / F(2) == F(3)
    with pytest.raises(DivisionByZero):
        F(0).inverse()


def test_f25_square_of_x():
    F = make_field(5, 2)
    x = F.x()
    want = polymod([0, 0, 1], list(F.modulus), 5)
    assert (x * x).coeffs == tuple(want)


def test_mixed_fields_refused():
    with pytest.raises(ContextMismatch):
        make_field(5, 2).x() + make_field(7, 2).x()


def test_roots():
    F = make_field(5)
    assert [int(r) for r in poly_roots([-1, 0, 1], F)] == [1, 4]
    assert [int(r) for r in poly_roots([1, 0, 1], F)] == [2, 3]
    assert poly_roots([2, 0, 1], F) == []
    assert [int(r) for r in poly_roots([1, 2, 1], F)] == [4, 4]


def test_roots_escalate_to_f25():
    F = make_field(5, 2)
    rs = poly_roots([2, 0, 1], F)
    assert len(rs) == 2 and all(r * r == F(-2) for r in rs)


@pytest.mark.parametrize("r", [2, 3, 4])
def test_roots_match_exhaustive_evaluation(r):
    F = make_field(5, r)
    rng = np.random.default_rng(r)
    for _ in range(5):
        coeffs = [int(c) for c in rng.integers(0, F.q, 4)] + [1]
        got = sorted({int(x) for x in poly_roots([FieldElement(F, c) for c in coeffs], F)})
        want = []
        for a in range(F.q):
            acc = F(0)
            for c in reversed(coeffs):
                acc = acc * FieldElement(F, a) + FieldElement(F, c)
            if not acc:
                want.append(a)
        assert got == want


def test_modulus_irreducible_up_to_8():
    for r in range(1, 9):
        F = make_field(5, r)
        assert is_irreducible(F.modulus, 5)


def test_root_of_unity_coherent():
    F = make_field(5, 2)
    z24 = F.root_of_unity(24)
    assert F.root_of_unity(8) == z24**3
    assert multiplicative_order(5, 11) == 5


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31))
def test_inverse_random(r, seed):
    F = make_field(7, r)
    a = np.random.default_rng(seed).integers(1, F.q, 1000)
    assert np.all(F.mul(a, F.inv(a)) == 1)


def test_frobenius_f25():
    F = make_field(5, 2)
    a = F.elements()
    fa = F.pow(a, 5)
    b = a[::-1]
    assert np.array_equal(F.pow(F.add(a, b), 5), F.add(fa, F.pow(b, 5)))
    assert np.array_equal(F.pow(F.mul(a, b), 5), F.mul(fa, F.pow(b, 5)))
    assert set(np.flatnonzero(fa == a)) == {0, 1, 2, 3, 4}
