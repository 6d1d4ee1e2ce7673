"""Randomized identities: theta and V, series arithmetic, dual-number relations."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from theta_doubler import linalg
from theta_doubler.ff import make_field
from theta_doubler.localalg import DualNumberRep, dual_number_check
from theta_doubler.qseries import QExpansion, V_op, mul, theta

FIELDS = [make_field(5), make_field(7), make_field(5, 2), make_field(11)]


@st.composite
def series(draw, n=None, ctx=None):
    ctx = ctx or draw(st.sampled_from(FIELDS))
    n = n or draw(st.integers(1, 40))
    c = draw(st.lists(st.integers(0, ctx.q - 1), min_size=n, max_size=n))
    return QExpansion(np.array(c, dtype=np.int64), ctx)


@st.composite
def pairs(draw):
    ctx = draw(st.sampled_from(FIELDS))
    n = draw(st.integers(1, 40))
    return draw(series(n, ctx)), draw(series(n, ctx))


@settings(max_examples=1000, deadline=None)
@given(series())
def test_theta_kills_V(f):
    assert theta(V_op(f, f.ctx.p)).is_zero()


@settings(max_examples=1000, deadline=None)
@given(pairs())
def test_theta_is_derivation(fg):
    f, g = fg
    assert theta(mul(f, g)) == mul(theta(f), g) + mul(f, theta(g))


@settings(max_examples=300, deadline=None)
@given(pairs())
def test_V_ring_hom(fg):
    f, g = fg
    p = f.ctx.p
    P = f.prec * p
    assert V_op(mul(f, g), p, P) == mul(V_op(f, p, P), V_op(g, p, P))
    assert V_op(f + g, p, P) == V_op(f, p, P) + V_op(g, p, P)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_mul_assoc_comm(data):
    ctx = data.draw(st.sampled_from(FIELDS))
    n = data.draw(st.integers(1, 30))
    f, g, h = (data.draw(series(n, ctx)) for _ in range(3))
    assert mul(f, g) == mul(g, f)
    assert mul(mul(f, g), h) == mul(f, mul(g, h))


@st.composite
def trivial_residual_reps(draw):
    """rho-bar trivial: rho(tau), rho(phi) = I mod e and alpha = 1 mod e."""
    ctx = draw(st.sampled_from([make_field(5), make_field(7), make_field(5, 2)]))
    m = lambda: np.array(draw(st.lists(st.integers(0, ctx.q - 1), min_size=4, max_size=4)), dtype=np.int64).reshape(2, 2)
    tau_eps = m()
    if draw(st.booleans()):
        tau_eps[1, 1] = int(ctx.neg(int(tau_eps[0, 0])))  # force trace 2
    I = linalg.identity(2)
    return DualNumberRep(ctx, (I, tau_eps), (I, m()), (1, draw(st.integers(0, ctx.q - 1))))


@settings(max_examples=1000, deadline=None)
@given(trivial_residual_reps())
def test_dual_numbers_only_trace_matters(rep):
    out = dual_number_check(rep)
    ctx = rep.ctx
    tr_eps = int(ctx.add(int(rep.tau[1][0, 0]), int(rep.tau[1][1, 1])))
    assert out["all"] == (tr_eps == 0)
    assert out["tau_unipotent"] and out["tau_phi_alpha"] and out["phi_alpha_inv_tau"] and out["phi_quadratic"]
