import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spraylab.catalog import catalog_get, catalog_parts
from spraylab.errors import DivisionByZero, ExprSyntaxError, IndexOutOfRange, SingularJet, UnknownIdentifier
from spraylab.expr import evaluate, evaluate_jet, parse, reverse_field, substitute, to_string
from spraylab.jet import lift_point
from spraylab.models import ExprField

from conftest import pts

FUNK = "(sqrt((1-dot_xx)*dot_yy+dot_xy^2)+dot_xy)/(1-dot_xx)"
KLEIN = "sqrt((1-dot_xx)*dot_yy+dot_xy^2)/(1-dot_xx)"
P0 = (0.1, 0.0, 1.0, 0.0)


def test_dot_sugar_expands():
    assert parse("x1*y1 + x2*y2", 2) == parse("dot_xy", 2)


def test_covector_sugar():
    e = parse("-(dot_a_y)/(1+dot_a_x)", 2, {"a": (1, 0)})
    assert evaluate(e, (0.2, 0.7, 1.0, 1.0)) == pytest.approx(-1 / 1.2)


def test_precedence():
    assert evaluate(parse("-x1^2", 1), (3.0, 0.0)) == -9.0
    assert evaluate(parse("1-2-3", 1), (0, 0)) == -4.0
    assert evaluate(parse("2*3^2/6", 1), (0, 0)) == 3.0
    assert evaluate(parse("8/2/2", 1), (0, 0)) == 2.0


@pytest.mark.parametrize("src, offset", [("sqrt(", 5), ("1/", 2), ("", 0), ("x1^1.5", 3), ("(x1", 3)])
def test_syntax_errors_carry_offset(src, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(src, 2)
    assert info.value.offset == offset


def test_chained_power_rejected():
    with pytest.raises(ExprSyntaxError):
        parse("x1^2^3", 2)


def test_identifier_errors():
    with pytest.raises(IndexOutOfRange):
        parse("x3", 2)
    with pytest.raises(UnknownIdentifier):
        parse("foo + 1", 2)
    with pytest.raises(UnknownIdentifier):
        parse("dot_b_y", 2, {"a": (1, 0)})


def test_plain_division_by_zero():
    with pytest.raises(DivisionByZero):
        evaluate(parse("1/x1", 2), (0, 0, 1, 1))


def test_closed_form_values():
    assert evaluate(parse(FUNK, 2), P0) == pytest.approx(10 / 9, rel=1e-15)
    assert evaluate(parse(KLEIN, 2), P0) == pytest.approx(100 / 99, rel=1e-15)
    assert evaluate(parse("3", 2), (0.4, -1, 2, 7)) == 3.0


def test_reverse_examples():
    e = parse("dot_xy", 2)
    r = reverse_field(e)
    for p in np.random.default_rng(0).uniform(-1, 1, (20, 4)):
        assert evaluate(r, p) == pytest.approx(-evaluate(e, p))
    assert evaluate(reverse_field(parse(FUNK, 2)), P0) == pytest.approx(10 / 11, rel=1e-15)


def test_substitute_locals():
    f = parse("t^2 + 1", 2, locals=("t",))
    e = substitute(f, {"t": parse("x1*y2", 2)})
    assert evaluate(e, (2, 0, 0, 3)) == 37.0


def test_jet_value_equals_plain_value():
    e = parse(FUNK + " + atan(x2/x1) - ln(1+dot_yy)*exp(-x1)/3", 2)
    p = (0.3, 0.2, 0.9, -1.1)
    for d in range(5):
        assert evaluate_jet(e, lift_point(p, d)).value == evaluate(e, p)


# properties over the catalog ---------------------------------------------------

def catalog_fields():
    out = []
    for cid, part in [("ball_funk", None), ("oneform_funk", None), ("funk_metric", "metric"), ("klein_metric", None),
                      ("euclidean", None), ("mu_family", "Q"), ("mu_family", "P"), ("complex_funk_pair", "P"),
                      ("complex_funk_pair", "Q"), ("hfs002", "Q"), ("eehf1", "Q")]:
        obj = catalog_parts(cid)[part] if part else catalog_get(cid)
        out.append(pytest.param(obj, id=f"{cid}:{part}" if part else cid))
    return out


def central_difference(e, p, v, h=1e-6):
    a, b = list(p), list(p)
    a[v] += h
    b[v] -= h
    return (evaluate(e, a) - evaluate(e, b)) / (2 * h)


@pytest.mark.parametrize("field", catalog_fields())
def test_first_derivatives_match_finite_differences(field):
    assert isinstance(field, ExprField)
    for p in pts(field, 50, seed=11):
        j = evaluate_jet(field.expr, lift_point(p, 1))
        for v in range(4):
            fd = central_difference(field.expr, p, v)
            assert abs(j.diff(v).value - fd) <= 1e-6 * max(1.0, abs(fd))


@pytest.mark.parametrize("field", catalog_fields())
def test_second_derivatives_match_finite_differences(field):
    for p in pts(field, 10, seed=12):
        j = evaluate_jet(field.expr, lift_point(p, 2))
        for v in range(4):
            h = 1e-4
            a, b = list(p), list(p)
            a[v] += h
            b[v] -= h
            fd = (evaluate(field.expr, a) - 2 * evaluate(field.expr, p) + evaluate(field.expr, b)) / h**2
            assert abs(j.diff(v).diff(v).value - fd) <= 1e-5 * max(1.0, abs(fd))


@pytest.mark.parametrize("field", catalog_fields())
def test_euler_homogeneity(field):
    for p in pts(field, 50, seed=13):
        j = evaluate_jet(field.expr, lift_point(p, 1))
        euler = sum(p[2 + i] * j.diff(2 + i).value for i in range(2))
        assert abs(euler - field.degree * j.value) <= 1e-10 * max(1.0, abs(j.value))


# round trips -----------------------------------------------------------------------

atoms = st.sampled_from(["x1", "x2", "y1", "y2", "2", "0.5", "dot_xy", "dot_yy"])


def exprs():
    return st.recursive(
        atoms,
        lambda inner: st.one_of(
            st.tuples(inner, st.sampled_from(["+", "-", "*", "/"]), inner).map(lambda t: f"({t[0]}) {t[1]} ({t[2]})"),
            st.tuples(inner, st.integers(1, 3)).map(lambda t: f"({t[0]})^{t[1]}"),
            st.tuples(st.sampled_from(["exp", "atan", "sin", "cos"]), inner).map(lambda t: f"{t[0]}({t[1]})"),
            inner.map(lambda s: f"-({s})"),
        ),
        max_leaves=8,
    )


@settings(max_examples=150, deadline=None)
@given(exprs())
def test_parse_print_parse(src):
    e = parse(src, 2)
    assert parse(to_string(e), 2) == e


@settings(max_examples=100, deadline=None)
@given(exprs(), st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_reverse_is_an_involution(src, p):
    e = parse(src, 2)
    try:
        v = evaluate(e, p)
    except (ZeroDivisionError, OverflowError):
        return
    w = evaluate(reverse_field(reverse_field(e)), p)
    assert w == v or (math.isnan(v) and math.isnan(w))


@pytest.mark.parametrize("src, point", [("sqrt(x1)", (-1, 0, 1, 1)), ("ln(x1)", (0, 0, 1, 1))])
def test_float_domain_errors_are_singular(src, point):
    with pytest.raises(SingularJet):
        evaluate(parse(src, 2), point)
