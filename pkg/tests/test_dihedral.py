import pytest

from oracles import eta_product_23, legendre, multiplicative, theta_brute
from theta_doubler.dihedral import (
    QuadForm,
    checked_splitting_poly,
    class_number,
    reduced_forms,
    splitting_poly,
    theta_counts,
    weight_one_newform,
)
from theta_doubler.errors import NotFundamental, UnknownDiscriminant


def test_forms_23():
    assert [(Q.a, Q.b, Q.c) for Q in reduced_forms(-23)] == [(1, 1, 6), (2, 1, 3), (2, -1, 3)]
    assert class_number(-23) == 3 and class_number(-47) == 5 and class_number(-4) == 1
    with pytest.raises(NotFundamental):
        reduced_forms(-12)


@pytest.mark.parametrize("Q", [QuadForm(1, 0, 1), QuadForm(1, 1, 6), QuadForm(2, 1, 3), QuadForm(3, 1, 4)])
def test_theta_brute(Q):
    assert theta_counts(Q, 80).tolist() == theta_brute(Q.a, Q.b, Q.c, 80)


def test_theta_small():
    assert theta_counts(QuadForm(1, 0, 1), 6).tolist() == [1, 4, 4, 0, 4, 8]
    assert theta_counts(QuadForm(1, 1, 6), 2)[1] == 2
    assert theta_counts(QuadForm(2, 1, 3), 2)[1] == 0


def test_f23_matches_eta(f23_int):
    assert f23_int.is_rational
    a = [int(x) for x in f23_int.coeffs[:501, 0]]
    assert a == eta_product_23(500)
    assert a[:9] == [0, 1, -1, -1, 0, 0, 1, 0, 1]


def test_f23_properties(f23_int):
    a = [int(x) for x in f23_int.coeffs[:, 0]]
    assert multiplicative(a, 300)
    for ell in range(2, 300):
        if all(ell % d for d in range(2, ell)) and ell != 23:
            assert (a[ell] == 0) == (legendre(-23, ell) == -1)


def test_level_47_pair():
    forms = weight_one_newform(-47, 200)
    assert len(forms) == 2
    for f in forms:
        assert f.coefficient(1).to_fraction() == 1 and f.is_multiplicative()


def test_splitting_poly():
    P = splitting_poly(-23)
    assert P.coeffs == (-1, -1, 0, 1) and P.validated
    # disc(x^3 + a x + b) = -4 a^3 - 27 b^2
    assert -4 * (-1) ** 3 - 27 * (-1) ** 2 == -23
    with pytest.raises(UnknownDiscriminant):
        checked_splitting_poly(-23, [1, 0, 0, 1])
    assert splitting_poly(-23, override=[1, 1, 0, 1]).source == "override"
    assert splitting_poly(-47).degree == 5
