from fractions import Fraction

import numpy as np
import pytest

from oracles import bernoulli_1_quadratic, dim_S_prime_level_odd_quadratic, eis1_chi_coeff, sigma
from theta_doubler import linalg
from theta_doubler.characters import DirichletChar, kronecker_character
from theta_doubler.eisbasis import (
    cusp_dimension,
    dimension_formula,
    eisenstein_qexp,
    gen_bernoulli,
    weight_k_basis,
)
from theta_doubler.errors import ParityMismatch, WeightOneUnsupported
from theta_doubler.ff import make_field
from theta_doubler.qseries import QExpansion, mul

ONE = DirichletChar.trivial(1)


def test_bernoulli():
    assert gen_bernoulli(2, ONE).to_fraction() == Fraction(1, 6)
    assert gen_bernoulli(4, ONE).to_fraction() == Fraction(-1, 30)
    assert gen_bernoulli(1, kronecker_character(-23)).to_fraction() == bernoulli_1_quadratic(23) == -3


def test_weight_one_eisenstein_coeffs():
    F = make_field(5)
    chi = kronecker_character(-23)
    e = eisenstein_qexp(1, ONE, chi, 1, 60, F)
    assert int(e.qexp[2]) == 2
    assert [int(x) for x in e.qexp.coeffs[1:]] == [eis1_chi_coeff(n, 23) % 5 for n in range(1, 60)]
    assert int(e.qexp[1]) == 1


@pytest.mark.parametrize("p,k", [(5, 4), (7, 6), (11, 10), (13, 12)])
def test_hasse_realization(p, k):
    F = make_field(p)
    e = eisenstein_qexp(k, ONE, ONE, 1, 200, F).qexp
    assert e == QExpansion.one(200, F)
    # rational route: 1 - (2k / B_k) sum sigma_{k-1}(n) q^n has every n >= 1 term divisible by p
    bk = gen_bernoulli(k, ONE).to_fraction()
    assert all((Fraction(-2 * k) / bk * sigma(k - 1, n)).numerator % p == 0 for n in range(1, 200))


def test_parity():
    chi = kronecker_character(-23)
    assert dimension_formula(23, 4, chi) == 0
    with pytest.raises(ParityMismatch):
        eisenstein_qexp(4, ONE, chi, 1, 10, make_field(5))


def test_dimension_examples():
    assert dimension_formula(23, 2, DirichletChar.trivial(23)) == 3
    assert dimension_formula(1, 12, ONE) == 2
    chi = kronecker_character(-23)
    for k in (3, 5, 7, 9):
        assert cusp_dimension(23, k, chi) == dim_S_prime_level_odd_quadratic(k, 23)
        assert dimension_formula(23, k, chi) == dim_S_prime_level_odd_quadratic(k, 23) + 2


def test_dim_23_weight_5(S23):
    assert S23.dim == S23.formula_dim == 9


def test_level_one():
    F = make_field(5)
    S = weight_k_basis(1, 4, ONE, F)
    assert S.dim == 1 and S.series(0) == QExpansion.one(S.prec, F)
    S4 = weight_k_basis(1, 4, ONE, F, prec=50)
    assert S4.contains(QExpansion.one(50, F))


def test_weight_one_refused():
    with pytest.raises(WeightOneUnsupported):
        weight_k_basis(23, 1, kronecker_character(-23), make_field(5))


def test_products_land_in_double_weight():
    F = make_field(7)
    chi = DirichletChar.trivial(11)
    S2 = weight_k_basis(11, 2, chi, F, prec=40)
    S4 = weight_k_basis(11, 4, chi, F, prec=40)
    for i in range(S2.dim):
        for j in range(i, S2.dim):
            assert S4.contains(mul(S2.series(i), S2.series(j)))


def test_recipe_extends_precision(S23):
    hi = S23.combination_at(linalg.identity(S23.dim), 3 * S23.prec)
    assert np.array_equal(hi[:, : S23.prec], S23.matrix)
