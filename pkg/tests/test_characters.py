import numpy as np
import pytest

from oracles import legendre
from theta_doubler.characters import DirichletChar, enumerate_chars, kronecker_character, representable_chars
from theta_doubler.errors import FieldTooSmall, UsageError
from theta_doubler.ff import make_field, multiplicative_order


def test_chi23_values():
    F = make_field(5)
    chi = kronecker_character(-23, F)
    assert chi.label == "23:11"
    assert chi(2) == F(1)
    assert chi(-1) == F(-1) and chi.is_odd
    assert chi(1) == F(1) and chi(23) == F(0)
    for n in range(1, 100):
        assert chi.sign(n) == legendre(n, 23)


def test_label_roundtrip_and_suffix():
    chi = DirichletChar.from_label("23:11-quadratic")
    assert chi.label == "23:11"
    assert DirichletChar.from_label(chi.label) == chi
    with pytest.raises(UsageError):
        DirichletChar.from_label("23:1,2")
    with pytest.raises(UsageError):
        DirichletChar.from_label("abc")


def test_enumeration_needs_degree_5():
    with pytest.raises(FieldTooSmall) as e:
        enumerate_chars(23, make_field(5))
    assert e.value.min_r == 5 == multiplicative_order(5, 22)
    assert len(enumerate_chars(23, make_field(5, 5))) == 22
    assert [c.order for c in representable_chars(23, make_field(5))] == [1, 2]


def test_trivial_level_one():
    chars = enumerate_chars(1, make_field(5))
    assert len(chars) == 1 and chars[0].is_trivial


def test_prime_to_p_count():
    # |(Z/11)^x| = 10, prime-to-5 part 2
    assert len(enumerate_chars(11, make_field(5, 2))) == 2


def test_extend_and_primitive():
    chi = kronecker_character(-23)
    big = chi.extend(2323)
    assert big.label == "2323:11,0"
    assert big.conductor == 23 and big.primitive() == chi
    F = make_field(5)
    for n in range(1, 300):
        if n % 101:
            assert big.with_ctx(F)(n) == chi.with_ctx(F)(n)


def test_multiplicative_random():
    F = make_field(5, 5)
    rng = np.random.default_rng(1)
    for chi in enumerate_chars(23, F):
        a, b = rng.integers(1, 10**6, 2)
        assert chi(int(a * b)) == chi(int(a)) * chi(int(b))
        assert (chi(-1) == F(-1)) == chi.is_odd
