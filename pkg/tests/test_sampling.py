import numpy as np
import pytest

from spraylab.catalog import catalog_get
from spraylab.errors import EmptyDomain
from spraylab.expr import parse
from spraylab.models import Domain
from spraylab.sampling import sample_points


def test_deterministic_for_fixed_seed():
    dom = catalog_get("ball_funk").domain
    assert sample_points(dom, 10, 7) == sample_points(dom, 10, 7)
    assert sample_points(dom, 10, 7) != sample_points(dom, 10, 8)


def test_ball_margin():
    pts = sample_points(catalog_get("ball_funk").domain, 200, 1)
    assert max(np.hypot(p[0], p[1]) for p in pts) <= 0.9


def test_box_margin_and_y_scale():
    pts = sample_points(Domain.box(2, -2.0, 2.0), 200, 2)
    x = np.array([p[:2] for p in pts])
    r = np.array([np.hypot(*p[2:]) for p in pts])
    assert np.all(np.abs(x) <= 1.8)
    assert r.min() >= 0.5 and r.max() <= 2.0


def test_sphere_scaled_companions():
    pts = sample_points(catalog_get("ball_funk").domain, 10, 7, y_mode="sphere_scaled")
    assert len(pts) == 30
    for base, half, double in zip(pts[::3], pts[1::3], pts[2::3]):
        assert base[:2] == half[:2] == double[:2]
        np.testing.assert_allclose(half[2:], 0.5 * np.array(base[2:]), rtol=1e-15)
        np.testing.assert_allclose(double[2:], 2.0 * np.array(base[2:]), rtol=1e-15)


def test_constraints_respected():
    dom = catalog_get("eehf3:Q").domain
    assert all(dom.contains(p) for p in sample_points(dom, 50, 0))


def test_custom_box_is_clipped_to_domain():
    pts = sample_points(Domain.box(2), 20, 0, x_box=[(0.0, 5.0), (-0.1, 0.1)])
    assert all(0.0 < p[0] < 1.0 and abs(p[1]) < 0.1 for p in pts)


def test_empty_domain():
    with pytest.raises(EmptyDomain):
        sample_points(Domain(((-1, 1), (-1, 1)), constraints=(parse("-1 - x1^2", 2),)), 5, 0)
    with pytest.raises(EmptyDomain):
        sample_points(Domain.box(2), 5, 0, x_box=[(2.0, 3.0), (0.0, 1.0)])
