import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from torustwist import (
    CylinderPoint,
    Deck,
    PlanePoint,
    TorusPoint,
    frac_split,
    lift,
    mod1,
    project_cylinder,
    project_torus,
    torus_distance,
    translate,
)

finite = st.floats(min_value=-1e6, max_value=1e6,
                   allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("phi,i,exp_phi,exp_i", [
    (0.25, 3.7, 0.25, 3.7),
    (2.25, -1.5, 0.25, -1.5),
    (-0.1, 0.0, 0.9, 0.0),
])
def test_project_cylinder(phi, i, exp_phi, exp_i):
    out = project_cylinder(PlanePoint(phi, i))
    assert isinstance(out, CylinderPoint)
    assert out.phi == pytest.approx(exp_phi, abs=1e-15)
    assert out.i == exp_i


@pytest.mark.parametrize("phi,i,exp_phi,exp_i", [
    (2.25, -1.5, 0.25, 0.5),
    (0.0, 0.0, 0.0, 0.0),
    (-0.25, 3.0, 0.75, 0.0),
])
def test_project_torus(phi, i, exp_phi, exp_i):
    out = project_torus(PlanePoint(phi, i))
    assert isinstance(out, TorusPoint)
    assert out.phi == pytest.approx(exp_phi, abs=1e-15)
    assert out.i == pytest.approx(exp_i, abs=1e-15)


def test_lift_translate_roundtrip():
    x = TorusPoint(0.3, 0.8)
    z = lift(x, Deck(2, -1))
    assert z.phi == pytest.approx(2.3) and z.i == pytest.approx(-0.2)
    back = project_torus(z)
    assert back.phi == pytest.approx(0.3) and back.i == pytest.approx(0.8)
    w = translate(z, Deck(-2, 1))
    assert (w.phi, w.i) == (pytest.approx(0.3), pytest.approx(0.8))


@given(finite)
def test_frac_split_reconstructs(x):
    frac, whole = frac_split(x)
    assert 0.0 <= frac < 1.0
    assert whole == math.floor(whole)
    # reconstruction is exact except when x - floor(x) rounded up to 1.0,
    # where the clamp costs at most one ulp
    assert abs((frac + whole) - x) <= np.spacing(max(1.0, abs(x)))


def test_frac_split_arrays():
    x = np.array([-0.25, 0.0, 1.75, -3.0])
    frac, whole = frac_split(x)
    assert np.all((frac >= 0.0) & (frac < 1.0))
    np.testing.assert_array_equal(whole, [-1.0, 0.0, 1.0, -3.0])
    np.testing.assert_allclose(frac + whole, x)


@given(finite)
def test_mod1_range(x):
    m = mod1(x)
    assert 0.0 <= m < 1.0


def test_torus_distance_wraps():
    # 0.95 and 0.05 are 0.1 apart around the circle, not 0.9
    assert torus_distance((0.95, 0.5), (0.05, 0.5)) == pytest.approx(0.1)
    assert torus_distance(TorusPoint(0.0, 0.0), TorusPoint(0.5, 0.5)) == 0.5
    # batched: max over coordinates, elementwise over leading axes
    a = np.array([[0.0, 0.0], [0.2, 0.9]])
    b = np.array([[0.5, 0.1], [0.2, 0.1]])
    np.testing.assert_allclose(torus_distance(a, b), [0.5, 0.2])


@given(finite, finite, st.integers(-3, 3), st.integers(-3, 3))
def test_projection_kills_deck(phi, i, di, dj):
    z = PlanePoint(phi, i)
    moved = translate(z, Deck(di, dj))
    assert torus_distance(project_torus(z), project_torus(moved)) < 1e-6
