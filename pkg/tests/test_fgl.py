"""Group-law tests: built-in laws, inverses, n-fold sums, specialization."""

import random
from fractions import Fraction as Q

import pytest

from orient import (
    OrientError,
    TruncatedSeries,
    Variable,
    VariableTable,
    dual_class,
    fgl_add,
    formal_inverse,
    make_fgl,
    n_series,
    specialize_universal,
)
from orient.fgl import InverseSeries, inverse_class_series


def law_identities(fgl):
    table, order = fgl.table, fgl.order
    u = fgl.u()
    v = fgl.v()
    zero = TruncatedSeries.zero(table, order)
    assert fgl.law.substitute({"u": u, "v": zero}, table, order) == u
    assert fgl.law.substitute({"u": zero, "v": v}, table, order) == v
    swapped = fgl.law.substitute({"u": v, "v": u}, table, order)
    assert swapped == fgl.law
    wtab = VariableTable(tuple(fgl.table.variables) + (Variable("w", 1),))
    uu = TruncatedSeries.variable(wtab, "u", order)
    vv = TruncatedSeries.variable(wtab, "v", order)
    ww = TruncatedSeries.variable(wtab, "w", order)
    inner = fgl.law.substitute({"u": vv, "v": ww}, wtab, order)
    lhs = fgl.law.substitute({"u": uu, "v": inner}, wtab, order)
    inner2 = fgl.law.substitute({"u": uu, "v": vv}, wtab, order)
    rhs = fgl.law.substitute({"u": inner2, "v": ww}, wtab, order)
    assert lhs == rhs


def test_additive_law():
    fgl = make_fgl("additive", 6)
    assert fgl.law == fgl.u() + fgl.v()
    law_identities(fgl)


def test_multiplicative_law():
    fgl = make_fgl("multiplicative", 3)
    beta = TruncatedSeries.variable(fgl.table, "beta", 3)
    assert fgl.law == fgl.u() + fgl.v() - beta * fgl.u() * fgl.v()
    law_identities(fgl)


def test_universal_law_degree_two_oracle():
    # composing the inverted logarithm with l(u) + l(v) by hand gives
    # -2*m1 as the u*v coefficient
    fgl = make_fgl("universal", 3)
    assert fgl.law.coefficient({"u": 1, "v": 1, "m1": 1}) == -2
    assert fgl.law.coefficient({"u": 1}) == 1
    assert fgl.law.coefficient({"v": 1}) == 1
    law_identities(fgl)


def test_universal_law_is_codegree_homogeneous():
    fgl = make_fgl("universal", 6)
    assert {fgl.table.codegree(e) for e in fgl.law.coeffs} == {1}


def test_order_validation():
    with pytest.raises(OrientError):
        make_fgl("additive", 1)


def test_formal_inverse_additive():
    g = formal_inverse(make_fgl("additive", 8)).g
    assert g == TruncatedSeries.constant(g.table, -1, g.pos_bound)


def test_formal_inverse_multiplicative():
    fgl = make_fgl("multiplicative", 5)
    g = formal_inverse(fgl).g
    beta = TruncatedSeries.variable(fgl.table, "beta", 4)
    u = TruncatedSeries.variable(fgl.table, "u", 4)
    expect = TruncatedSeries.zero(fgl.table, 4)
    for k in range(5):
        expect = expect - beta ** k * u ** k
    assert g == expect
    # defining identity inside the truncated ring
    w = fgl.u() * g
    assert fgl.law.substitute({"u": fgl.u(), "v": w}, fgl.table, fgl.order).is_zero()


def test_formal_inverse_constant_terms():
    for kind in ("additive", "multiplicative", "universal"):
        inv = formal_inverse(make_fgl(kind, 6))
        assert inv.g.constant_term() == -1
        assert inv.verified


def test_inverse_uniqueness_negative_control():
    # perturbing any inverse coefficient breaks the defining identity
    fgl = make_fgl("multiplicative", 6)
    g = formal_inverse(fgl).g
    u3 = TruncatedSeries.monomial(fgl.table, {"u": 3}, 1, g.pos_bound)
    bad = g + u3
    w = fgl.u() * bad
    residual = fgl.law.substitute({"u": fgl.u(), "v": w}, fgl.table, fgl.order)
    assert not residual.is_zero()


def test_n_series_additive():
    fgl = make_fgl("additive", 6)
    assert n_series(fgl, 7) == fgl.u().scale(7).with_profile(5, None)
    assert n_series(fgl, 0).is_zero()


def test_n_series_multiplicative():
    fgl = make_fgl("multiplicative", 6)
    beta = TruncatedSeries.variable(fgl.table, "beta", 5)
    u = TruncatedSeries.variable(fgl.table, "u", 5)
    assert n_series(fgl, 2) == u.scale(2) - beta * u * u


def test_n_series_negative_matches_inverse_expansion():
    fgl = make_fgl("multiplicative", 4)
    beta = TruncatedSeries.variable(fgl.table, "beta", 3)
    u = TruncatedSeries.variable(fgl.table, "u", 3)
    assert n_series(fgl, -1) == -(u + beta * u ** 2 + beta ** 2 * u ** 3)


def test_n_series_linear_coefficient():
    for kind in ("additive", "multiplicative", "universal"):
        fgl = make_fgl(kind, 5)
        for n in range(-3, 4):
            assert n_series(fgl, n).coefficient({"u": 1}) == n


def test_n_series_homomorphism():
    for kind in ("additive", "multiplicative", "universal"):
        fgl = make_fgl(kind, 8)
        for m in range(-4, 5):
            for n in range(-4, 5):
                lhs = fgl.law.substitute(
                    {"u": n_series(fgl, m), "v": n_series(fgl, n)},
                    fgl.table, fgl.order - 1)
                assert lhs == n_series(fgl, m + n), (kind, m, n)


def nilpotent_pair_table(fgl):
    extra = (Variable("x", 1, cap=1), Variable("y", 1, cap=1))
    return VariableTable(tuple(
        v for v in fgl.table.variables if v.name not in ("u", "v")) + extra)


def test_fgl_add_on_square_zero_classes():
    fgl = make_fgl("multiplicative", 6)
    t = nilpotent_pair_table(fgl)
    x = TruncatedSeries.variable(t, "x")
    y = TruncatedSeries.variable(t, "y")
    beta = TruncatedSeries.variable(t, "beta")
    assert fgl_add(fgl, x, y) == x + y - beta * x * y


def test_fgl_add_unit():
    for kind in ("additive", "multiplicative", "universal"):
        fgl = make_fgl(kind, 6)
        t = nilpotent_pair_table(fgl)
        x = TruncatedSeries.variable(t, "x")
        assert fgl_add(fgl, x, TruncatedSeries.zero(t)) == x


def test_fgl_add_formal_inverse_cancels():
    for kind in ("additive", "multiplicative", "universal"):
        fgl = make_fgl(kind, 6)
        t = VariableTable(tuple(
            v for v in fgl.table.variables if v.name not in ("u", "v"))
            + (Variable("x", 1, cap=4),))
        x = TruncatedSeries.variable(t, "x")
        assert fgl_add(fgl, x, dual_class(fgl, x)).is_zero()


def test_fgl_add_rejects_constant_terms():
    fgl = make_fgl("additive", 4)
    t = nilpotent_pair_table(fgl)
    x = TruncatedSeries.variable(t, "x")
    with pytest.raises(Exception):
        fgl_add(fgl, x, x + TruncatedSeries.constant(t, 1))


def test_specialize_universal_to_additive():
    fgl = make_fgl("universal", 5)
    s = specialize_universal(fgl.law, "additive")
    u = TruncatedSeries.variable(s.table, "u", 5)
    v = TruncatedSeries.variable(s.table, "v", 5)
    assert s == u + v


def test_specialize_universal_to_multiplicative():
    fgl = make_fgl("universal", 4)
    s = specialize_universal(fgl.law, "multiplicative")
    target = make_fgl("multiplicative", 4)
    assert s == target.law.convert(s.table, 4)


def test_multiplicative_logarithm_oracle():
    # the logarithm with coefficients beta^i/(i+1) linearizes the
    # multiplicative law: l(F(u,v)) = l(u) + l(v)
    order = 6
    fgl = make_fgl("multiplicative", order)
    t = fgl.table
    log = TruncatedSeries.variable(t, "u", order)
    for i in range(1, order):
        log = log + TruncatedSeries.monomial(t, {"beta": i, "u": i + 1},
                                             Q(1, i + 1), order)
    lhs = log.substitute({"u": fgl.law}, t, order)
    rhs = log + log.substitute({"u": fgl.v()}, t, order)
    assert lhs == rhs


def test_specialize_constant_m1():
    fgl = make_fgl("universal", 3)
    m1 = TruncatedSeries.variable(fgl.table, "m1")
    s = specialize_universal(m1, "multiplicative")
    assert s == TruncatedSeries.monomial(s.table, {"beta": 1}, Q(1, 2))


def test_specialize_commutes_with_fgl_add_and_inverse():
    rng = random.Random(5)
    fgl = make_fgl("universal", 6)
    base = tuple(v for v in fgl.table.variables if v.name not in ("u", "v"))
    t = VariableTable(base + (Variable("x", 1, cap=2), Variable("y", 1, cap=2)))
    for target in ("additive", "multiplicative"):
        tgt = make_fgl(target, 6)
        for _ in range(6):
            x = TruncatedSeries.variable(t, "x").scale(rng.randint(1, 3))
            y = TruncatedSeries.variable(t, "y").scale(rng.randint(-3, -1))
            lhs = specialize_universal(fgl_add(fgl, x, y), target)
            xs = specialize_universal(x, target)
            ys = specialize_universal(y, target)
            assert lhs == fgl_add(tgt, xs, ys)
            lhs_inv = specialize_universal(dual_class(fgl, x), target)
            assert lhs_inv == dual_class(tgt, xs)


def test_inverse_series_type():
    fgl = make_fgl("multiplicative", 4)
    inv = formal_inverse(fgl)
    assert isinstance(inv, InverseSeries)
    assert inv.fgl is fgl
    assert inverse_class_series(fgl) == fgl.u() * inv.g
