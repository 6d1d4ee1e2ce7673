import numpy as np
import pytest

from theta_doubler import linalg
from theta_doubler.errors import NonCommuting, NotSubalgebra, PreconditionError
from theta_doubler.ff import make_field
from theta_doubler.localalg import (
    DualNumberRep,
    algebra_closure,
    annihilator_of_quotient,
    dual_number_check,
    is_ideal,
    m_torsion_dim,
    restriction_length,
)

F5 = make_field(5)
NIL = np.array([[0, 1], [0, 0]])


def test_closure_small():
    assert algebra_closure([linalg.identity(2)], F5).length == 1
    A = algebra_closure([NIL], F5)
    assert A.length == 2 and A.is_closed() and A.is_local()
    with pytest.raises(NonCommuting):
        algebra_closure([NIL, NIL.T], F5)


def test_closure_diagonal_semilocal():
    A = algebra_closure([np.diag([1, 2, 2])], F5)
    assert A.length == 2 and not A.is_local()
    assert sorted(A.maximal_ideals()) == [(1,), (2,)]
    with pytest.raises(PreconditionError):
        A.maximal_ideal_generators()


def test_annihilator_trivial_case():
    A = algebra_closure([NIL], F5)
    J = annihilator_of_quotient(A, A)
    assert J.length == A.length and is_ideal(J, A)


def test_annihilator_free_rank_two():
    # T = k[e]/e^2 acting diagonally on two copies; T~ = T[s]/(s^2) with s swapping copies
    e = np.kron(np.eye(2, dtype=np.int64), NIL)
    s = np.kron(NIL, np.eye(2, dtype=np.int64))
    T = algebra_closure([e], F5)
    Tt = algebra_closure([e, s], F5)
    assert (T.length, Tt.length) == (2, 4)
    J = annihilator_of_quotient(T, Tt)
    assert is_ideal(J, Tt)
    # J is the largest: every a in T with a Tt in T lies in J
    for a in T.basis():
        if all(T.contains(linalg.matmul(a, x, F5)) for x in Tt.basis()):
            assert J.contains(a)
    with pytest.raises(NotSubalgebra):
        annihilator_of_quotient(Tt, T)


def test_torsion_and_restriction():
    A = algebra_closure([NIL], F5)
    assert m_torsion_dim(2, A) == 1
    assert m_torsion_dim(1, algebra_closure([np.eye(1, dtype=np.int64)], F5)) == 1
    assert restriction_length(A, linalg.identity(2)) == 2
    assert restriction_length(A, np.array([[1, 0]])) == 1


def _rep(tau_eps, phi0, phi1, alpha):
    return DualNumberRep(F5, (linalg.identity(2), tau_eps), (phi0, phi1), alpha)


def test_dual_number_examples():
    a = 2
    det = 1  # the quadratic relation makes the eigenvalues alpha, alpha^-1
    phi = np.diag([a, det * pow(a, -1, 5) % 5])
    r = _rep(np.zeros((2, 2), dtype=np.int64), phi, np.zeros((2, 2), dtype=np.int64), (a, 0))
    assert dual_number_check(r)["all"]
    # rho-bar trivial: tau = I + e I has trace 2 + 2e; the other relations sit in e^2 = 0
    bad = _rep(np.eye(2, dtype=np.int64), linalg.identity(2), NIL, (1, 3))
    out = dual_number_check(bad)
    assert not out["trace_tau_is_2"] and not out["all"]
    assert out["tau_unipotent"] and out["tau_phi_alpha"] and out["phi_alpha_inv_tau"]
    with pytest.raises(PreconditionError):
        DualNumberRep(F5, (NIL, NIL), (phi, phi), (a, 0))
    assert r.det_phi() == (det, 0)
    off = _rep(np.zeros((2, 2), dtype=np.int64), np.diag([a, 3 * pow(a, -1, 5) % 5]), np.zeros((2, 2), dtype=np.int64), (a, 0))
    assert not dual_number_check(off)["phi_quadratic"]
