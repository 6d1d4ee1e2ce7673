from fractions import Fraction

import numpy as np
import pytest

from oracles import eta_product_23, gamma0_index
from theta_doubler.errors import InsufficientPrecision, PDividesDenominator, RationalContext
from theta_doubler.ff import make_field
from theta_doubler.qseries import QExpansion, V_op, hasse_shift, mul, row_space, scale_q, sturm_bound, theta

F5 = make_field(5)


def test_mul_small():
    assert mul(QExpansion([1, 1, 0]), QExpansion([1, -1, 0])) == QExpansion([1, 0, -1])
    f = QExpansion([3, 1, 4, 1, 5], F5)
    assert mul(f, QExpansion.one(5, F5)) == f


def test_eta_partial_product():
    prec = 10
    f = QExpansion.one(prec)
    for n in range(1, 7):
        for m in (n, 23 * n):
            if m < prec:
                f = mul(f, QExpansion([1] + [0] * (m - 1) + [-1] + [0] * (prec - m - 1)))
    want = eta_product_23(prec)  # q * product
    assert [int(x) for x in f.coeffs[:7]] == want[1:8]


def test_theta_examples():
    assert theta(QExpansion.one(6, F5)).is_zero()
    f = QExpansion([0, 1, 0, 2, 0, 0], F5)
    assert theta(f) == QExpansion([0, 1, 0, 1, 0, 0], F5)
    with pytest.raises(RationalContext):
        theta(QExpansion([1, 2]))


def test_V_examples():
    q = QExpansion([0, 1, 0, 0, 0, 0, 0], F5)
    assert V_op(q, 5).list() == [0, 0, 0, 0, 0, 1, 0]
    assert V_op(QExpansion([1, 1, 1], F5), 5, 11).list() == [1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1]
    with pytest.raises(InsufficientPrecision):
        scale_q(QExpansion([1, 1], F5), 5, 11)


def test_hasse_shift():
    f = QExpansion([0, 1, 2], F5)
    g, k = hasse_shift(f, 1)
    assert g == f and k == 5
    assert hasse_shift(g, k)[1] == 9


@pytest.mark.parametrize("k,N,mu,B", [(5, 23, 24, 11), (5, 2323, 2448, 1021), (1, 1, 1, 2)])
def test_sturm(k, N, mu, B):
    s = sturm_bound(k, N)
    assert (s.mu, s.bound) == (mu, B)
    assert s.mu == gamma0_index(N)


def test_row_space():
    b = row_space([QExpansion([1, 1], F5), QExpansion([0, 1], F5)])
    assert b.rank == 2 and b.matrix.tolist() == [[1, 0], [0, 1]]
    f = QExpansion([1, 2, 3], F5)
    assert row_space([f, f]).rank == 1


def test_row_space_random():
    rng = np.random.default_rng(0)
    b = row_space([QExpansion(rng.integers(0, 5, 50), F5) for _ in range(100)])
    assert b.rank <= 50
    assert np.array_equal(row_space(b.series()).matrix, b.matrix)


def test_rational_reduction():
    f = QExpansion([Fraction(1, 2), 3])
    assert f.reduce(F5).list() == [3, 3]
    with pytest.raises(PDividesDenominator):
        QExpansion([Fraction(1, 5)]).reduce(F5)


def test_precision_is_min():
    assert mul(QExpansion([1, 2, 3], F5), QExpansion([1, 1], F5)).prec == 2
