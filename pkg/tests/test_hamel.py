import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spraylab.catalog import catalog_get, catalog_parts
from spraylab.curvature import curvature_at, riemann3
from spraylab.errors import DegreeMismatch, KindMismatch, UnsupportedOrder
from spraylab.expr import parse
from spraylab.hamel import (check_complex_funk_pair, construct_hamel, funk_ratios, h_derivative, h_derivative0,
                            is_funk, is_hamel, is_weak_funk, projective_invariant_T, reversal_bracket,
                            reversibility_residual, second_h_derivative, vertical_of_horizontal)
from spraylab.models import ClosedOneForm, Domain, ExprField, SprayModel, zero_field
from spraylab.projective import deform

from conftest import P_GEN, common_pts, pts, vals

# frozen from tests/oracles/symbolic.py
T_NONHAMEL_ON_FUNK = [-0.32, -0.56]
POWER1_AT_05 = 4 / 9
POWER2_GENERIC = -0.031555221637866265965


def field(src, degree=1, dom=None):
    return ExprField.from_string(src, 2, degree, domain=dom or Domain.box(2))


NONHAMEL = field("x2*y1 + x1*x2*y2")


# horizontal derivatives --------------------------------------------------------------

def test_h_derivative_examples(flat, ball_funk):
    assert np.all(vals(h_derivative(field("2*y1 - y2"), flat, P_GEN)) == 0)
    np.testing.assert_allclose(vals(h_derivative(ball_funk, flat, (0, 0, 1, 0))), [1.0, 0.0], atol=1e-15)


def test_metric_is_parallel_along_its_spray():
    parts = catalog_parts("funk_metric")
    F, s = parts["metric"], parts["spray"]
    for p in pts(s, 30):
        assert np.max(np.abs(vals(h_derivative(F, s, p)))) < 1e-9


def test_flat_second_derivative_is_hessian(flat, ball_funk):
    for p in pts(ball_funk, 10):
        H = second_h_derivative(ball_funk, flat, p)
        q = ball_funk.jet(p, 2)
        np.testing.assert_allclose(H, [[q.diff(i).diff(j).value for j in range(2)] for i in range(2)],
                                   rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(H, H.T, atol=1e-12)


def commutator(Q, s, p):
    """Q_{;i;j} - Q_{;j;i} + Q_{.r} R^r_{ij}"""
    H = second_h_derivative(Q, s, p)
    qdot = np.array([Q.jet(p, Q.consumed + 1).diff(2 + r).value for r in range(2)])
    return H - H.T + np.einsum("r,rij->ij", qdot, riemann3(s, p))


@pytest.mark.parametrize("cid", ["eehf3", "eehf1", "mu_family"])
def test_commutator_identity(cid):
    parts = catalog_parts(cid)
    s, Q = parts["spray"], parts["Q"]
    for p in common_pts(s, Q, count=20):
        assert np.max(np.abs(commutator(Q, s, p))) < 1e-7


def test_commutator_identity_for_a_general_field(funk_spray):
    for p in pts(funk_spray, 20):
        assert np.max(np.abs(commutator(NONHAMEL, funk_spray, p))) < 1e-7


# predicates ------------------------------------------------------------------------

def test_oneform_funk_on_flat(flat):
    Q = catalog_get("oneform_funk")
    assert is_funk(Q, flat, common_pts(flat, Q)).passed


def test_eehf1_funk_and_constant_ratio(eehf1):
    s, Q = eehf1["spray"], eehf1["Q"]
    points = pts(s, 30)
    assert is_funk(Q, s, points).passed
    for p in points:
        R = curvature_at(s, p).R_scalar
        assert abs(Q.value(p) ** 2 + R / 2) < 1e-10


def test_klein_is_hamel_not_funk(flat, klein):
    points = common_pts(flat, klein)
    assert is_hamel(klein, flat, points).passed
    chk = is_funk(klein, flat, points)
    assert not chk.passed and chk.max_residual > 1e-3


PAIRS = [
    ("ball_funk", "minkowski"), ("oneform_funk", "minkowski"), ("klein_metric", "minkowski"),
    ("eehf1:Q", "eehf1:spray"), ("eehf3:Q", "eehf3:spray"), ("mu_family:Q", "minkowski"),
    ("mu_family:P", "minkowski"), ("funk_metric", "funk_spray"), ("klein_metric", "funk_spray"),
]


@pytest.mark.parametrize("qid, sid", PAIRS)
def test_funk_implies_hamel_implies_weak_funk(qid, sid):
    Q, s = catalog_get(qid), catalog_get(sid)
    points = common_pts(Q, s, count=20)
    funk, hamel, weak = is_funk(Q, s, points), is_hamel(Q, s, points), is_weak_funk(Q, s, points)
    assert not funk.passed or (hamel.passed and weak.passed)


def test_nonhamel_fails_everything(funk_spray):
    points = pts(funk_spray, 20)
    assert is_hamel(NONHAMEL, funk_spray, points).max_residual > 1e-3
    assert is_funk(NONHAMEL, funk_spray, points).max_residual > 1e-3


def test_degree_checked(flat):
    with pytest.raises(DegreeMismatch):
        is_hamel(field("y2/y1", 0), flat, [(0, 0, 1, 1)])


# projective invariant T ------------------------------------------------------------

def test_T_examples(flat, funk_spray):
    np.testing.assert_allclose(projective_invariant_T(field("x2*y1"), flat, (0, 0, 1, 0)), [0.0, -1.0], atol=1e-15)
    np.testing.assert_allclose(projective_invariant_T(NONHAMEL, funk_spray, P_GEN), T_NONHAMEL_ON_FUNK, atol=1e-14)


@pytest.mark.parametrize("sid", ["minkowski", "funk_spray", "eehf1:spray", "eehf3:spray", "mu_family:spray"])
def test_T_of_closed_forms_vanishes(sid):
    s = catalog_get(sid)
    Q = ClosedOneForm(2, parse("x1^2*x2 + sin(x1 - x2)", 2), s.domain, "closed")
    for p in pts(s, 20):
        assert np.max(np.abs(projective_invariant_T(Q, s, p))) < 1e-10


@pytest.mark.parametrize("sid", ["minkowski", "funk_spray"])
def test_T_is_projectively_invariant(sid):
    s = catalog_get(sid)
    P = field("x1*y2 + x2^2*y1 + sqrt(y1^2 + 2*y2^2)")
    d = deform(s, P)
    for Q in (NONHAMEL, catalog_get("klein_metric"), field("y1 + x1*y2")):
        for p in common_pts(s, Q, count=30):
            np.testing.assert_allclose(projective_invariant_T(Q, d, p), projective_invariant_T(Q, s, p),
                                       atol=1e-9)


@pytest.mark.parametrize("qid, sid", PAIRS)
def test_hamel_verdict_is_projectively_invariant(qid, sid):
    Q, s = catalog_get(qid), catalog_get(sid)
    points = common_pts(Q, s, count=15)
    d = deform(s, field("x2*y1 - x1^2*y2"))
    assert is_hamel(Q, s, points).passed == is_hamel(Q, d, points).passed


# constructions ------------------------------------------------------------------------

def test_power_constructions(flat):
    P = catalog_get("oneform_funk")
    p0 = construct_hamel("power", P=P, k=0)
    for p in pts(P, 5):
        assert p0.value(p) == P.value(p)
    assert construct_hamel("power", P=P, k=1).value((0.5, 0, 1, 0)) == pytest.approx(POWER1_AT_05, rel=1e-15)
    assert construct_hamel("power", P=P, k=2).value(P_GEN) == pytest.approx(POWER2_GENERIC, rel=1e-13)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("pid", ["oneform_funk", "ball_funk"])
def test_power_construction_is_hamel(flat, pid, k):
    Q = construct_hamel("power", P=catalog_get(pid), k=k)
    assert is_hamel(Q, flat, common_pts(Q, flat, count=20)).passed


def test_construction_errors():
    P = catalog_get("oneform_funk")
    with pytest.raises(KindMismatch):
        construct_hamel("power", P=P)
    with pytest.raises(KindMismatch):
        construct_hamel("mystery", P=P)
    with pytest.raises(UnsupportedOrder):
        construct_hamel("power", P=P, k=-1)
    with pytest.raises(DegreeMismatch):
        construct_hamel("power", P=field("y2/y1", 0), k=1)
    with pytest.raises(KindMismatch):
        construct_hamel("linear_combo", fields=[P], coeffs=[1.0, 2.0])


def ratio_check(Qt, Pt, s, points):
    """Qt_{;0} / (2 Qt) = Pt and (Pt^2 - Pt_{;0}) / Qt^2 = -1"""
    used = 0
    for p in points:
        q = Qt.value(p)
        if abs(q) < 1e-3:
            continue
        used += 1
        assert h_derivative0(Qt, s, p) / (2 * q) == pytest.approx(Pt.value(p), rel=1e-9, abs=1e-10)
        assert (Pt.value(p) ** 2 - h_derivative0(Pt, s, p)) / q**2 == pytest.approx(-1.0, rel=1e-9)
    assert used > len(points) // 2


def test_symmetrized_construction(flat, ball_funk):
    Qt = construct_hamel("symmetrized", Q=ball_funk)
    Pt = construct_hamel("linear_combo", fields=[ball_funk, ball_funk.reflected()], coeffs=[0.5, -0.5])
    points = pts(ball_funk, 30)
    assert is_hamel(Qt, flat, points).passed
    for p in points:
        assert Qt.value(p) == pytest.approx(catalog_get("klein_metric").value(p), rel=1e-14)
    ratio_check(Qt, Pt, flat, points)


def test_difference_construction(flat, ball_funk):
    Q1 = catalog_get("oneform_funk")
    Qt = construct_hamel("difference", Q=ball_funk, Qbar=Q1)
    Pt = construct_hamel("linear_combo", fields=[ball_funk, Q1], coeffs=[0.5, 0.5])
    points = common_pts(ball_funk, Q1, count=30)
    assert is_hamel(Qt, flat, points).passed
    ratio_check(Qt, Pt, flat, points)


@pytest.mark.parametrize("psi", ["sqrt(y1^2 + 2*y2^2)", "y1 - 3*y2", "sqrt(dot_yy) + 0.3*y1"])
def test_transport_construction_is_hamel(flat, ball_funk, psi):
    Q = construct_hamel("transport", P=ball_funk, psi=parse(psi, 2))
    points = pts(ball_funk, 20)
    assert is_hamel(Q, flat, points).passed


def test_transport_at_origin_is_seed(ball_funk):
    psi = parse("sqrt(y1^2 + 2*y2^2)", 2)
    Q = construct_hamel("transport", P=ball_funk, psi=psi)
    assert Q.value((0, 0, 1, 1)) == pytest.approx(3 ** 0.5, rel=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_linear_combinations_stay_hamel(a, b):
    flat = catalog_get("minkowski")
    Q1, Q2 = catalog_get("ball_funk"), catalog_get("oneform_funk")
    Q = construct_hamel("linear_combo", fields=[Q1, Q2], coeffs=[a, b])
    assert is_hamel(Q, flat, common_pts(Q1, Q2, count=8, seed=6)).passed


# Funk identities ------------------------------------------------------------------------

FUNK_PAIRS = [("ball_funk", "minkowski"), ("oneform_funk", "minkowski"), ("eehf1:Q", "eehf1:spray"),
              ("eehf3:Q", "eehf3:spray")]


@pytest.mark.parametrize("qid, sid", FUNK_PAIRS)
def test_funk_symmetry(qid, sid):
    Q, s = catalog_get(qid), catalog_get(sid)
    for p in common_pts(Q, s, count=20):
        V = vertical_of_horizontal(Q, s, p)
        assert np.max(np.abs(V - V.T)) < 1e-9 * max(1.0, np.max(np.abs(V)))


@pytest.mark.parametrize("qid, sid", FUNK_PAIRS)
def test_funk_ratios(qid, sid):
    Q, s = catalog_get(qid), catalog_get(sid)
    out, skipped = funk_ratios(Q, s, common_pts(Q, s, count=20))
    assert len(out) + skipped == 20 and len(out) > 10
    assert max(max(abs(a), abs(b)) for a, b in out) < 1e-9


@pytest.mark.parametrize("qid, sid", [("eehf1:Q", "eehf1:spray"), ("eehf3:Q", "eehf3:spray")])
def test_scalar_curvature_obstruction(qid, sid):
    # R Q_{.k} = Q tau_k for a Funk function of a scalar-curvature spray
    Q, s = catalog_get(qid), catalog_get(sid)
    for p in common_pts(Q, s, count=20):
        rep = curvature_at(s, p)
        q = Q.jet(p, Q.consumed + 1)
        qdot = np.array([q.diff(2 + k).value for k in range(2)])
        assert np.max(np.abs(rep.R_scalar * qdot - q.value * rep.tau)) < 1e-9


# complex pairs and reversibility ------------------------------------------------------

def test_complex_pair_passes(flat):
    parts = catalog_parts("complex_funk_pair")
    assert check_complex_funk_pair(parts["P"], parts["Q"], flat, pts(parts["P"], 30)).passed


def test_complex_pair_degenerate(flat):
    assert check_complex_funk_pair(zero_field(2), zero_field(2), flat, pts(flat, 10)).passed
    # with P = 0 the second equation reads 0 = -Q Q_{.k}, so a nonzero 1-form fails it
    rep = check_complex_funk_pair(zero_field(2), field("2*y1 - y2"), flat, pts(flat, 10))
    assert rep.max_residual("Q_eq") == 0 and rep.max_residual("P_eq") > 1e-3


def test_complex_pair_fails_for_unrelated_fields(flat):
    P = catalog_get("oneform_funk")
    rep = check_complex_funk_pair(P, field("y1"), flat, pts(P, 20))
    assert not rep.passed and rep.max_residual("Q_eq") > 1e-3


def test_reversibility_on_flat(flat, ball_funk):
    points = pts(ball_funk, 20)
    for p in points:
        assert np.all(reversal_bracket(ball_funk, flat, p) == 0)
        assert np.max(np.abs(reversibility_residual(ball_funk, flat, p))) < 1e-9
    assert is_hamel(ball_funk.reflected(), flat, points).passed


@pytest.mark.parametrize("sid, qid", [("eehf3:spray", "eehf3:Q"), ("funk_spray", "funk_metric"),
                                      ("funk_spray", "klein_metric")])
def test_reversibility_residual_vanishes_for_hamel(sid, qid):
    s, Q = catalog_get(sid), catalog_get(qid)
    for p in common_pts(s, Q, count=20):
        assert np.max(np.abs(reversibility_residual(Q, s, p))) < 1e-8


def test_reversibility_zero_field(funk_spray):
    assert np.all(reversibility_residual(zero_field(2), funk_spray, P_GEN) == 0)


def test_reverse_stays_hamel_on_projectively_flat_spray():
    # G(y) - G(-y) is parallel to y, so the bracket vanishes by homogeneity
    s, F = catalog_get("funk_spray"), catalog_get("funk_metric")
    points = pts(s, 20)
    for p in points:
        assert np.max(np.abs(reversal_bracket(F, s, p))) < 1e-12
    assert is_hamel(F.reflected(), s, points).passed


def test_bracket_nonzero_on_irreversible_spray(ball_funk):
    s = SprayModel.from_strings(["y2*sqrt(dot_yy)", "0"], 2, domain=Domain.box(2))
    assert max(np.max(np.abs(reversal_bracket(ball_funk, s, p))) for p in pts(ball_funk, 10)) > 1e-3
