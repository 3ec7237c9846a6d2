import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from restriction_lab.spectral import fit_slope
from restriction_lab.surfaces import (Density, PhaseResolutionError, affine, gaussian_curvature,
                                      hemisphere, measure_ft, midpoint_density, oscillatory_sum,
                                      paraboloid, polynomial_curve, surface_eval, transversality,
                                      transversality_batch, unit_normal)


def test_paraboloid_eval_example():
    v, g, h = surface_eval(paraboloid(2), [0.5])
    assert v == 0.25 and g.tolist() == [1.0] and h.tolist() == [[2.0]]


def test_hemisphere_eval_example():
    v, g, h = surface_eval(hemisphere(3), [0.0, 0.0])
    assert v == 1.0 and np.all(g == 0) and np.allclose(h, -np.eye(2))


@pytest.mark.parametrize("surf", [paraboloid(3), hemisphere(3), hemisphere(2, sign=-1),
                                  polynomial_curve([0.1, -0.3, 1.0, 0.5]), affine([0.3, -0.7])])
def test_gradient_and_hessian_match_finite_differences(surf, rng):
    d = surf.param_dim
    lo = np.array([a for a, _ in surf.domain]) * 0.9
    hi = np.array([b for _, b in surf.domain]) * 0.9
    eps = 1e-6
    for xi in rng.uniform(lo, hi, size=(20, d)):
        g = surf.gradient(xi)
        h = surf.hessian(xi)
        for k in range(d):
            e = np.zeros(d)
            e[k] = eps
            fd = (surf.psi(xi + e) - surf.psi(xi - e)) / (2 * eps)
            assert abs(fd - g[k]) < 1e-6
            fd2 = (surf.gradient(xi + e) - surf.gradient(xi - e)) / (2 * eps)
            assert np.max(np.abs(fd2 - h[:, k])) < 1e-5


@pytest.mark.parametrize("surf", [paraboloid(3), hemisphere(3), polynomial_curve([0, 0, 1, 1])])
def test_smoothness_bound_dominates_dense_sample(surf, rng):
    lo = [a for a, _ in surf.domain]
    hi = [b for _, b in surf.domain]
    xi = rng.uniform(lo, hi, size=(2000, surf.param_dim))
    sup = max(np.abs(surf.psi(xi)).max(), np.linalg.norm(surf.gradient(xi), axis=-1).max(),
              np.linalg.norm(surf.hessian(xi), ord=2, axis=(-2, -1)).max())
    assert surf.smoothness_bound >= sup * (1 - 1e-9)


def test_hemisphere_domain_must_stay_inside_ball():
    with pytest.raises(ValueError):
        hemisphere(2, domain=[(-1.0, 1.0)])
    with pytest.raises(ValueError):
        hemisphere(2, sign=0)


def test_curvature_examples(rng):
    assert gaussian_curvature(paraboloid(3), [0, 0]) == pytest.approx(4.0, abs=1e-12)
    assert gaussian_curvature(affine([0.2, 0.4]), [0.1, -0.3]) == 0.0
    for xi in rng.uniform(-0.5, 0.5, size=(20, 2)):
        assert gaussian_curvature(hemisphere(3), xi) == pytest.approx(1.0, abs=1e-8)


def test_curvature_rejects_outside_point():
    with pytest.raises(ValueError):
        gaussian_curvature(paraboloid(2), [3.0])


def test_unit_normals():
    n = unit_normal(paraboloid(2), [0.5])
    assert np.allclose(n, np.array([-1.0, 1.0]) / math.sqrt(2))


def test_transversality_examples():
    p = paraboloid(2)
    assert transversality([(p, [0.5]), (p, [-0.5])]) == pytest.approx(1.0, abs=1e-12)
    assert transversality([(p, [0.2]), (p, [0.2])]) == 0.0
    # horizontal plane plus two vertical-ish planes cannot be graphs; use tilted ones with
    # orthonormal normals: rotations of the coordinate frame
    q = np.linalg.qr(np.array([[1.0, 0.2, 0.1], [0.3, 1.0, 0.2], [0.1, 0.4, 1.0]]))[0]
    q = q * np.sign(q[-1])  # last coordinate positive so each column is a graph normal
    surfs = [(affine(-q[:2, j] / q[2, j]), [0.0, 0.0]) for j in range(3)]
    assert transversality(surfs) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        transversality([(p, [0.1])])


def test_transversality_batch_is_minimum():
    p = paraboloid(2)
    a, b = np.array([[0.4], [0.6]]), np.array([[-0.6], [-0.4]])
    direct = min(transversality([(p, x), (p, y)]) for x in a for y in b)
    assert transversality_batch([(p, a), (p, b)]) == pytest.approx(direct, abs=1e-15)


def test_midpoint_weights_sum_to_domain_measure():
    f = midpoint_density(paraboloid(3, [(-1, 1), (0, 0.5)]), [37, 11])
    assert f.weights.sum() == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        midpoint_density(paraboloid(2), 8, box=[(0, 2)])


def test_density_validation():
    s = paraboloid(2)
    with pytest.raises(ValueError):
        Density(s, np.zeros((2, 1)), np.array([1.0, -1.0]), np.ones(2), (1.0,))
    with pytest.raises(ValueError):
        Density(s, np.zeros((2, 1)), np.ones(2), np.array([1.0, np.inf]), (1.0,))


def test_measure_ft_at_origin_is_domain_measure():
    assert measure_ft(paraboloid(2), [0.0, 0.0]) == pytest.approx(2.0)
    assert measure_ft(hemisphere(3), [0.0, 0.0, 0.0]) == pytest.approx(2 * 0.9 ** 2)


def test_affine_measure_has_no_decay_along_normal():
    s = affine([0.0])
    vals = measure_ft(s, np.array([[0.0, t] for t in 2.0 ** np.arange(4, 11)]))
    assert np.allclose(np.abs(vals), 2.0, atol=1e-12)


def test_parabola_measure_decays_like_inverse_sqrt():
    ts = 2.0 ** np.arange(4, 11)
    vals = np.abs(measure_ft(paraboloid(2), np.array([[0.0, t] for t in ts])))
    fit = fit_slope(zip(ts, vals))
    assert abs(fit.exponent + 0.5) <= 0.1


def test_fresnel_oracle():
    # int_{-1}^{1} exp(-2 pi i t xi^2) d xi in closed form via Fresnel integrals
    from scipy.special import fresnel
    t = 40.0
    S, C = fresnel(2 * math.sqrt(t))
    exact = (C - 1j * S) / math.sqrt(t)
    fine = midpoint_density(paraboloid(2), 20000)
    assert measure_ft(paraboloid(2), [0.0, t], fine) == pytest.approx(exact, abs=1e-6)


def test_phase_guard_refuses_coarse_quadrature():
    f = midpoint_density(paraboloid(2), 8)
    with pytest.raises(PhaseResolutionError):
        oscillatory_sum(f, np.array([[100.0, 0.0]]), 1)


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_separable_fast_path_matches_generic(x1, x2):
    s = paraboloid(3)
    fast = midpoint_density(s, 160, [np.cos, lambda t: 1 + t])
    slow = Density(s, fast.nodes, fast.weights, fast.values, fast.spacing)
    pts = np.array([[x1, x2, 0.7 * x1]])
    assert oscillatory_sum(fast, pts, 1) == pytest.approx(oscillatory_sum(slow, pts, 1), abs=1e-11)
