import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spraylab.catalog import catalog_get
from spraylab.curvature import (berwald_connection, berwald_curvature, classify, curvature_at, riemann, riemann3,
                                riemann3_from_nonlinear, s_curvature)
from spraylab.errors import EmptyPointSet, NonpositiveDensity
from spraylab.expr import parse
from spraylab.projective import mth1_family

from conftest import P_GEN, pts

# frozen from tests/oracles/symbolic.py
FUNK_R_GENERIC = [[-0.024594361922288177224, -0.043040133364004310142],
                  [-0.081234166568583914492, -0.14215979149502185036]]
EEHF1_R_GENERIC = [[0.0, 0.0], [-0.051423324150596877870, -0.089990817263544536272]]
MTH1_03_R_GENERIC = [[0.12031599580581207240, 0.21055299266017112670],
                     [0.10966491031572711796, 0.19191359305252245643]]
MTH1_03_R3_GENERIC = [[[0.0, 0.30078998951453018100], [-0.30078998951453018100, 0.0]],
                      [[0.0, 0.27416227578931779490], [-0.27416227578931779490, 0.0]]]
EEHF3_R_AT = [[1.0, 0.0], [0.0, 0.0]]
EEHF3_R3_AT = [[[0.0, -1.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
FUNK_S_GENERIC = 1.2250662760666421382

SPRAYS = ["minkowski", "funk_spray", "eehf1:spray", "eehf2:spray", "eehf3:spray", "mu_family:spray",
          "eehf1_rflat:spray"]


def spray(cid):
    return catalog_get(cid)


# connection ---------------------------------------------------------------------

def test_flat_connection_vanishes(flat):
    N, gam = berwald_connection(flat, P_GEN)
    assert all(j.value == 0 for row in N for j in row)
    assert all(j.value == 0 for m in gam for row in m for j in row)


def test_eehf1_nonlinear_connection_example(eehf1):
    N, _ = berwald_connection(eehf1["spray"], (0, 0, 1, 1))
    assert N[0][0].value == pytest.approx(-2 / 3, rel=1e-15)


@pytest.mark.parametrize("cid", SPRAYS)
def test_connection_symmetry_and_euler(cid):
    s = spray(cid)
    for p in pts(s, 20):
        N, gam = berwald_connection(s, p)
        y = p[2:]
        for i in range(2):
            for k in range(2):
                assert gam[i][0][k].value == gam[i][k][0].value
                contracted = sum(y[j] * gam[i][j][k].value for j in range(2))
                assert contracted == pytest.approx(N[i][k].value, rel=1e-10, abs=1e-12)


# Riemann --------------------------------------------------------------------------

def test_flat_riemann(flat):
    rep = riemann(flat, P_GEN)
    assert np.all(rep.R_mat == 0) and rep.ric == 0


def test_funk_riemann_at_origin(funk_spray):
    np.testing.assert_allclose(riemann(funk_spray, (0, 0, 1, 0)).R_mat, [[0, 0], [0, -0.25]], atol=1e-15)


@pytest.mark.parametrize("cid, ref", [
    ("funk_spray", FUNK_R_GENERIC),
    ("eehf1:spray", EEHF1_R_GENERIC),
])
def test_riemann_frozen_generic(cid, ref):
    np.testing.assert_allclose(riemann(spray(cid), P_GEN).R_mat, ref, rtol=1e-13, atol=1e-15)


def test_mth1_riemann_frozen():
    s = mth1_family(0.3)
    np.testing.assert_allclose(riemann(s, P_GEN).R_mat, MTH1_03_R_GENERIC, rtol=1e-13)
    np.testing.assert_allclose(riemann3(s, P_GEN), MTH1_03_R3_GENERIC, rtol=1e-13, atol=1e-15)


def test_eehf3_curvature_at_reference_point(eehf3):
    p = (1, 0, 0, 1)
    np.testing.assert_allclose(riemann(eehf3["spray"], p).R_mat, EEHF3_R_AT, atol=1e-14)
    np.testing.assert_allclose(riemann3(eehf3["spray"], p), EEHF3_R3_AT, atol=1e-14)


def test_eehf3_riemann3_closed_form(eehf3):
    s = eehf3["spray"]
    for p in pts(s, 20):
        x, y = np.array(p[:2]), np.array(p[2:])
        xx = x @ x
        Rdot = 2 * (xx * y - (x @ y) * x) / xx**2
        ref = 0.5 * (np.einsum("j,ik->ijk", Rdot, np.eye(2)) - np.einsum("k,ij->ijk", Rdot, np.eye(2)))
        np.testing.assert_allclose(riemann3(s, p), ref, atol=1e-8)


@pytest.mark.parametrize("cid", SPRAYS)
def test_riemann_annihilates_y(cid):
    s = spray(cid)
    for p in pts(s, 30, seed=8):
        R = riemann(s, p).R_mat
        assert np.max(np.abs(R @ np.array(p[2:]))) < 1e-9 * max(1.0, np.max(np.abs(R)))


@pytest.mark.parametrize("cid", SPRAYS)
def test_riemann3_antisymmetric_and_contracts(cid):
    s = spray(cid)
    for p in pts(s, 20, seed=9):
        R3 = riemann3(s, p)
        np.testing.assert_array_equal(R3, -R3.transpose(0, 2, 1))
        contracted = np.einsum("j,ijk->ik", np.array(p[2:]), R3)
        np.testing.assert_allclose(contracted, riemann(s, p).R_mat, rtol=1e-9, atol=1e-10)


def test_riemann3_contraction_on_funk_spray(funk_spray):
    for p in pts(funk_spray, 50):
        contracted = np.einsum("j,ijk->ik", np.array(p[2:]), riemann3(funk_spray, p))
        np.testing.assert_allclose(contracted, riemann(funk_spray, p).R_mat, atol=1e-10)


@pytest.mark.parametrize("cid", ["funk_spray", "eehf1:spray", "eehf3:spray", "mu_family:spray"])
def test_riemann3_agrees_with_nonlinear_route_for_scalar_curvature(cid):
    # both routes coincide for sprays of scalar curvature
    s = spray(cid)
    for p in pts(s, 10):
        np.testing.assert_allclose(riemann3(s, p), riemann3_from_nonlinear(s, p), atol=1e-9)


# Berwald curvature ------------------------------------------------------------------

def test_berwald_curvature_examples(flat, eehf1, funk_spray):
    assert np.all(berwald_curvature(flat, P_GEN) == 0)
    for p in pts(eehf1["spray"], 20):
        assert np.max(np.abs(berwald_curvature(eehf1["spray"], p))) < 1e-12
    assert np.max(np.abs(berwald_curvature(funk_spray, (0.1, 0.1, 1.0, 0.0)))) > 1e-3


def test_berwald_curvature_symmetric(funk_spray):
    B = berwald_curvature(funk_spray, P_GEN)
    for perm in [(0, 2, 1, 3), (0, 1, 3, 2), (0, 3, 2, 1)]:
        np.testing.assert_allclose(B, B.transpose(perm), atol=1e-12)


# S-curvature ------------------------------------------------------------------------

def test_s_curvature_examples(flat, funk_spray):
    one = parse("1", 2)
    assert s_curvature(flat, one, P_GEN) == 0
    assert s_curvature(funk_spray, one, (0, 0, 1, 0)) == pytest.approx(1.5, rel=1e-15)
    assert s_curvature(funk_spray, one, P_GEN) == pytest.approx(FUNK_S_GENERIC, rel=1e-14)


def test_s_curvature_density_shift(funk_spray):
    sigma = parse("exp(x1 - 2*x2)", 2)
    p = P_GEN
    assert s_curvature(funk_spray, sigma, p) == pytest.approx(FUNK_S_GENERIC - (p[2] - 2 * p[3]), rel=1e-13)


def test_nonpositive_density(funk_spray):
    with pytest.raises(NonpositiveDensity):
        s_curvature(funk_spray, parse("x1", 2), (-0.1, 0, 1, 0))


# classification ---------------------------------------------------------------------

def test_classify_funk_spray(funk_spray):
    c = classify(funk_spray, pts(funk_spray, 30))
    assert c.flags == {"scalar": True, "isotropic": True, "constant": True, "r_flat": False}


def test_classify_mth1_one():
    s = mth1_family(1.0)
    c = classify(s, pts(s, 30))
    assert c.flags["scalar"] and c.flags["isotropic"] and not c.flags["constant"]
    assert c.definitely_not("constant")


def test_classify_minkowski(flat):
    c = classify(flat, pts(flat, 10))
    assert c.flags["r_flat"] and c.flags["constant"]


@pytest.mark.parametrize("cid", ["eehf2:spray", "eehf1_rflat:spray", "eehf3:spray", "mu_family:spray"])
def test_catalog_constant_curvature(cid):
    s = spray(cid)
    assert classify(s, pts(s, 30)).flags["constant"]


def test_eehf1_rflat_is_rflat():
    s = spray("eehf1_rflat:spray")
    assert classify(s, pts(s, 30)).flags["r_flat"]


def test_eehf1_isotropic_scalar_matches_closed_form(eehf1):
    # f(t) = t gives R = -(f'' + f'(1 + f')) sigma_0^2 = -2 sigma_0^2
    s, Q = eehf1["spray"], eehf1["Q"]
    for p in pts(s, 30):
        rep = curvature_at(s, p)
        assert rep.flags["isotropic"]
        assert rep.R_scalar == pytest.approx(-2 * Q.value(p) ** 2, rel=1e-10)


def test_eehf1_is_not_constant(eehf1):
    c = classify(eehf1["spray"], pts(eehf1["spray"], 30))
    assert c.flags["isotropic"] and c.definitely_not("constant")


@pytest.mark.parametrize("cid", SPRAYS + ["mth1"])
def test_trace_consistency(cid):
    s = mth1_family(0.7) if cid == "mth1" else spray(cid)
    for p in pts(s, 20):
        rep = curvature_at(s, p)
        if rep.residual_scalar < 1e-8:
            tau0 = float(rep.tau @ np.array(p[2:]))
            assert abs(tau0 - rep.R_scalar) < 1e-8 * max(1.0, abs(rep.R_scalar))


def test_rflat_implies_constant(flat):
    for p in pts(flat, 5):
        f = curvature_at(flat, p).flags
        assert f["r_flat"] and f["constant"]


def test_empty_point_set(flat):
    with pytest.raises(EmptyPointSet):
        classify(flat, [])


@settings(max_examples=30, deadline=None)
@given(st.floats(-1.5, 1.5))
def test_mth1_scalar_for_every_c(c):
    # every member of the cF(-y) family is of isotropic curvature
    s = mth1_family(c)
    for p in pts(s, 3, seed=4):
        assert curvature_at(s, p).flags["isotropic"]


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0, 2 * np.pi), st.floats(0.1, 1))
def test_riemann_is_quadratic_in_y(lam, t, r):
    s = catalog_get("funk_spray")
    p = (0.2, -0.3, r * np.cos(t), r * np.sin(t))
    q = (0.2, -0.3, lam * p[2], lam * p[3])
    np.testing.assert_allclose(riemann(s, q).R_mat, lam**2 * riemann(s, p).R_mat, rtol=1e-10, atol=1e-12)

