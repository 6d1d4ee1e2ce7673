import numpy as np
import pytest

from theta_doubler import hecke, linalg
from theta_doubler.characters import DirichletChar, kronecker_character
from theta_doubler.eisbasis import weight_k_basis
from theta_doubler.errors import NonOrdinary, NotAnEigenvalue, PreconditionError
from theta_doubler.ff import make_field
from theta_doubler.qseries import QExpansion, scale_q

# frozen after the first verified run (M_5(23, chi_23) mod 5)
TRACE_T2_23_5 = 1


def test_apply_Tn_basics(F5, chi23, f23_int):
    g = QExpansion(np.arange(40) % 5, F5)
    assert int(hecke.apply_Tn(g, 23, 5, chi23.extend(23).with_ctx(F5))[1]) == int(g[23])
    assert hecke.apply_Tn(QExpansion.zero(40, F5), 2, 5, chi23.with_ctx(F5)).is_zero()
    f = f23_int.rational_qexp()
    T2f = hecke.apply_Tn(f, 2, 1, chi23)
    assert T2f == f.truncate(T2f.prec).scale(-1)


def test_operator_matrix(S23, F5, chi23):
    M = hecke.operator_matrix(S23, "T2")
    assert M.shape == (9, 9) and int(np.trace(M)) % 5 == TRACE_T2_23_5
    D = hecke.operator_matrix(S23, "<2>")
    assert np.array_equal(D, linalg.identity(9) * int(chi23.with_ctx(F5)(2)))
    assert not hecke.operator_matrix(S23, "0").any()
    assert linalg.commute(M, hecke.operator_matrix(S23, "T3"), F5)


def test_decomposition_dims(S23):
    parts = hecke.anemic_decompose(S23, strict=False)
    assert sum(c.dim for _, c in parts) <= S23.dim
    assert any(int(es.a(2)) == 4 and int(es.a(3)) == 4 for es, _ in parts)  # a_2 = a_3 = -1


def test_strict_decomposition_needs_extension(S23):
    from theta_doubler.errors import FieldTooSmall

    with pytest.raises(FieldTooSmall):
        hecke.anemic_decompose(S23)


def test_decomposition_reconstructs_space(F5):
    # all eigenvalues in F_5 for level 1 weight 12
    S = weight_k_basis(1, 12, DirichletChar.trivial(1), F5)
    parts = hecke.anemic_decompose(S)
    assert len(parts) == 2 and sum(c.dim for _, c in parts) == S.dim
    stacked = np.vstack([c.coords for _, c in parts])
    assert linalg.rank(stacked, F5) == S.dim


def test_component_ops_commute(comp23):
    names = list(comp23.ops)
    assert {"U23", "T5", "<2>"} <= set(names)
    for a in names:
        for b in names:
            assert linalg.commute(comp23.ops[a], comp23.ops[b], comp23.ctx)
    for name, M in comp23.ops.items():
        if name.startswith("T") and name != "T5":
            ell = int(name[1:])
            Z = comp23.ctx.sub(M, linalg.identity(comp23.dim) * int(comp23.eigensystem.a(ell)))
            assert linalg.is_nilpotent(Z, comp23.ctx)


def test_localize_extended(comp23, F5):
    with pytest.raises(NotAnEigenvalue):
        hecke.localize_extended(comp23, {23: 2})
    assert hecke.localize_extended(comp23, {}).dim == comp23.dim
    split = [hecke.localize_extended(comp23, {5: a}).dim for a in (1, 4)]
    assert split == [1, 1]


def test_unit_root(comp23):
    with pytest.raises(PreconditionError):
        hecke.unit_root_Up(comp23)
    one = hecke.localize_extended(comp23, {5: 1})
    assert int(hecke.unit_root_Up(one)[0]) == 1


def test_non_ordinary(F5):
    S = weight_k_basis(1, 12, DirichletChar.trivial(1), F5)
    delta = [c for es, c in hecke.anemic_decompose(S) if int(es.a(2)) == (-24) % 5][0]
    # tau(5) = 4830 = 0 mod 5
    with pytest.raises(NonOrdinary):
        hecke.unit_root_Up(delta)


def test_oldform_embed(F5, f23_int):
    f = f23_int.reduce(F5)
    g1, g2 = hecke.oldform_embed(f, 23, 101)
    assert int(g2[1]) == 0 and int(g2[101]) == 1 and g1 == f
    with pytest.raises(PreconditionError):
        hecke.oldform_embed(f, 23, 23)


def test_Ul_block_small_level(F5, chi23, f23_int):
    # l = 2 at level 46: discriminant t^2 - 4c decides the double root
    f = f23_int.reduce(F5)
    chi = chi23.extend(46).with_ctx(F5)
    sturm = weight_k_basis(46, 5, chi23, F5).sturm
    blk = hecke.Ul_block_check(f, 2, f[2], 5, chi, sturm)
    assert blk.verdict
    t, c = blk.expected[0]
    M = np.array(blk.normalized)
    cp = linalg.charpoly(M, F5)
    assert cp == [c % 5, (-t) % 5, 1]
