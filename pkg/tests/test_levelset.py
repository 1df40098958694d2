import math

import numpy as np
import pytest

from torustwist import levelset, maps
from torustwist.errors import ParameterError

TWO_PI = 2.0 * math.pi


def _standard_c01_curve(k, phis):
    # hand-derived root of p1(T(phi,I)) = phi: phi' = phi + I' forces
    # I' = 0, i.e. I = (k/2pi) sin(2*pi*phi)
    return (k / TWO_PI) * np.sin(TWO_PI * phis)


@pytest.mark.parametrize("k", [0.5, 1.0, 5.0])
def test_c01_matches_closed_form(k):
    comp = levelset.compute_levelset(maps.builtin_standard(k), 0, 1, n_phi=256)
    want = _standard_c01_curve(k, comp.phis)
    assert np.max(np.abs(comp.mu_minus - want)) < 1e-9
    # q=1 with twist: a single root per angle, graphs coincide
    np.testing.assert_array_equal(comp.mu_minus, comp.mu_plus)
    assert comp.cardinality_jumps == ()
    # C(0,1) maps into the zero level: nu is identically 0
    assert np.max(np.abs(comp.nu_minus)) < 1e-9
    assert np.max(np.abs(comp.nu_plus)) < 1e-9


def test_components_of_distinct_levels_are_disjoint():
    fam = maps.builtin_standard(1.0)
    c0 = levelset.compute_levelset(fam, 0, 1, n_phi=128)
    c1 = levelset.compute_levelset(fam, 1, 1, n_phi=128)
    # C(1,1) sits exactly one twist unit above C(0,1) for the standard family
    assert np.min(c1.mu_minus - c0.mu_plus) > 0.5


def test_roots_sorted_and_inside_bracket():
    fam = maps.builtin_standard(5.0)
    comp = levelset.compute_levelset(fam, 0, 2, n_phi=128)
    lo, hi = comp.bracket
    for roots in comp.roots_per_phi:
        assert roots.size >= 1
        assert np.all(np.diff(roots) > 0.0) or roots.size == 1
        assert np.all((roots >= lo) & (roots <= hi))
    np.testing.assert_array_equal(comp.mu_minus,
                                  [r[0] for r in comp.roots_per_phi])
    np.testing.assert_array_equal(comp.mu_plus,
                                  [r[-1] for r in comp.roots_per_phi])
    assert np.all(comp.mu_minus <= comp.mu_plus)


@pytest.mark.parametrize("fam,p,q", [
    (maps.builtin_standard(1.0), 0, 1),
    (maps.builtin_standard(1.0), 0, 2),
    (maps.builtin_standard(5.0), 1, 2),
    (maps.builtin_circle_diffeo(0.2, 0.5), 0, 1),
    (maps.builtin_saddle_center(2.0, 0.7), 0, 2),
], ids=["std1-01", "std1-02", "std5-12", "circle-01", "saddle-02"])
def test_exchange_identity(fam, p, q):
    comp = levelset.compute_levelset(fam, p, q, n_phi=128)
    assert levelset.verify_exchange(comp, fam) < 1e-8


def test_translation_covariance():
    # C(p + l*q, q) is C(p, q) shifted up by l: compare a fresh computation
    # against the translated component, root for root
    fam = maps.builtin_standard(1.0)
    base = levelset.compute_levelset(fam, 0, 2, n_phi=64)
    moved = levelset.translate_component(base, 3)
    fresh = levelset.compute_levelset(fam, 6, 2, n_phi=64)
    assert moved.p == fresh.p == 6
    np.testing.assert_allclose(moved.mu_minus, fresh.mu_minus, atol=1e-9)
    np.testing.assert_allclose(moved.mu_plus, fresh.mu_plus, atol=1e-9)
    np.testing.assert_allclose(moved.nu_minus, fresh.nu_minus, atol=1e-9)
    assert levelset.verify_exchange(moved, fam) < 1e-8
    assert levelset.translate_component(base, 0) is base


def test_solve_roots_at_arbitrary_angles():
    fam = maps.builtin_standard(1.0)
    comp = levelset.compute_levelset(fam, 0, 1, n_phi=64)
    phis = np.array([0.1234, 0.567, 0.9999])
    roots = levelset.solve_roots_at(fam, 0, 1, phis, comp.bracket)
    want = _standard_c01_curve(1.0, phis)
    for r, w in zip(roots, want):
        assert r.size == 1
        assert r[0] == pytest.approx(w, abs=1e-10)


def test_component_cache_returns_same_object():
    fam = maps.builtin_standard(0.75)
    a = levelset.compute_levelset(fam, 0, 1, n_phi=64)
    b = levelset.compute_levelset(fam, 0, 1, n_phi=64)
    assert a is b
    c = levelset.compute_levelset(fam, 0, 1, n_phi=128)
    assert c is not a


def test_parameter_validation():
    fam = maps.builtin_standard(1.0)
    with pytest.raises(ParameterError):
        levelset.compute_levelset(fam, 0, 0)
    with pytest.raises(ParameterError):
        levelset.compute_levelset(fam, 0, 1, n_phi=4)
    with pytest.raises(ParameterError):
        levelset.compute_levelset(fam, 0, 1, root_tol=0.0)


def test_integrable_two_step_level_is_constant_half():
    # k = 0: the angle gains 2I in two steps, so C(1,2) is I = 1/2 exactly
    comp = levelset.compute_levelset(maps.builtin_standard(0.0), 1, 2,
                                     n_phi=64)
    assert np.all(comp.mu_minus == 0.5)
    assert np.all(comp.mu_plus == 0.5)
