import numpy as np
import pytest

from oracles import multiplicative
from theta_doubler import hecke, linalg, weightone
from theta_doubler.characters import DirichletChar
from theta_doubler.eisbasis import weight_k_basis
from theta_doubler.errors import EisensteinComponent, PreconditionError
from theta_doubler.qseries import V_op, theta


def test_weight_one_is_f23(comp23, f23_int, F5):
    w1 = weightone.weight_one_space(comp23)
    assert len(w1) == 1
    f = f23_int.reduce(F5)
    g = w1[0]
    assert g == f.truncate(g.prec).scale(int(g[1]))
    Vg = V_op(g, 5, comp23.rows.shape[1] if comp23.rows is not None else comp23.sturm)
    assert theta(Vg).is_zero()


def test_count_23_5(comp23):
    res = weightone.count_identity(comp23)
    assert res.d_tilde == {"1": 1, "4": 1}
    assert (res.d_anemic, res.d_w1, res.verdict) == (2, 1, True)


def test_count_level_one(F5):
    S = weight_k_basis(1, 12, DirichletChar.trivial(1), F5)
    parts = hecke.anemic_decompose(S)
    delta = [c for es, c in parts if not weightone.is_eisenstein(es, 1, 12, S.chi)][0]
    res = weightone.count_identity(delta)
    assert (res.d_anemic, res.d_w1) == (1, 0)


def test_eisenstein_refused(S23):
    parts = hecke.anemic_decompose(S23, strict=False)
    eis = [c for es, c in parts if int(es.a(2)) == 2][0]
    with pytest.raises(EisensteinComponent):
        weightone.count_identity(eis)


def test_weight_one_needs_weight_p(F5):
    S = weight_k_basis(1, 12, DirichletChar.trivial(1), F5)
    with pytest.raises(PreconditionError):
        weightone.weight_one_space(hecke.whole_space(S))


def test_doubled_and_pairing(comp23):
    T, Tt = weightone.hecke_algebras(comp23)
    d = weightone.doubled_submodule(comp23, T, Tt)
    assert d.doubled and len(d.MJ) == 2 and d.J_is_ideal
    assert d.length_Tt_It == 2 * d.length_T_I
    # M[J] is T~-stable
    for B in Tt.basis():
        img = linalg.matmul(B, d.MJ.T, comp23.ctx).T
        R, piv = linalg.rref(d.MJ, comp23.ctx)
        assert linalg.in_span(img, R, piv, comp23.ctx).all()
    pr = weightone.pairing_gram(comp23, T, d.J, d.MJ)
    assert pr.perfect and pr.rank == 1


def test_theta_kernel_pairs_to_zero(comp23):
    X = weightone.weight_one_coords(comp23)
    T, _ = weightone.hecke_algebras(comp23)
    a1 = comp23.rows_at(2)[:, 1]
    for t in T.basis():
        for x in X:
            v = linalg.matmul(t, x[:, None], comp23.ctx)[:, 0]
            assert int(np.dot(a1, v)) % 5 == 0


def test_eigenforms_multiplicative(comp23):
    forms = weightone.eigenforms(comp23)
    assert len(forms) == 2
    for g in forms:
        assert multiplicative([int(x) for x in g.coeffs], g.prec, 5)


def test_nonlift_preconditions(F5, chi23, f23_int):
    f = f23_int.reduce(F5)
    with pytest.raises(PreconditionError):
        weightone.nonlift_report(23, 31, 5, f, chi23)  # Frob_31 is not trivial
    with pytest.raises(PreconditionError):
        weightone.nonlift_report(23, 13, 5, f, chi23)  # 13 != 1 mod 5
    with pytest.raises(PreconditionError):
        weightone.nonlift_report(23, 23, 5, f, chi23)
