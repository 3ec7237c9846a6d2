import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from restriction_lab.extension import adjoint_defect, extend, rescale_defect, restrict, restrict_density
from restriction_lab.spectral import SampledField, bump_profile, make_grid
from restriction_lab.surfaces import Density, midpoint_density, paraboloid


def smooth(xi):
    x = xi[..., 0] if np.ndim(xi) > 1 else xi
    return bump_profile(np.abs(x)) * np.exp(1j * 3 * x)


def test_extension_of_one_at_origin():
    f = midpoint_density(paraboloid(2), 64)
    assert extend(f, [[0.0, 0.0]])[0] == pytest.approx(2.0)


@given(st.floats(-3, 3), st.floats(-4, 4), st.floats(-2, 2))
def test_modulation_law(a, x1, x2):
    f = midpoint_density(paraboloid(2), 256, smooth)
    g = f.with_values(f.values * np.exp(-2j * np.pi * a * f.nodes[:, 0]))
    lhs = extend(g, [[x1, x2]])[0]
    rhs = extend(f, [[x1 - a, x2]])[0]
    assert abs(lhs - rhs) <= 1e-10


def test_extension_agrees_with_double_resolution_oracle(rng):
    pts = rng.uniform(-10, 10, size=(50, 2))
    coarse = extend(midpoint_density(paraboloid(2), 512, smooth), pts)
    fine = extend(midpoint_density(paraboloid(2), 1024, smooth), pts)
    assert np.max(np.abs(coarse - fine)) < 1e-6


def gaussian_field(dim, half=4.0, n=32):
    g = make_grid([(-half, half)] * dim, [n] * dim)
    r2 = sum(m ** 2 for m in g.mesh())
    return SampledField(g, np.exp(-np.pi * r2))


def test_restriction_of_gaussian():
    s = paraboloid(2)
    r = restrict(gaussian_field(2), s, 64)
    xi = r.nodes[:, 0]
    expected = np.exp(-np.pi * (xi ** 2 + s.psi(r.nodes) ** 2))
    assert np.max(np.abs(r.values - expected)) < 1e-6


def test_restriction_zero_and_linearity(rng):
    s = paraboloid(2)
    base = gaussian_field(2)
    zero = restrict(base.with_values(np.zeros(base.grid.shape)), s, 16)
    assert np.all(zero.values == 0)
    a = base.with_values(base.values * rng.standard_normal(base.grid.shape))
    b = base.with_values(base.values * rng.standard_normal(base.grid.shape))
    ra, rb = restrict(a, s, 16), restrict(b, s, 16)
    rab = restrict(a.with_values(a.values + b.values), s, 16)
    assert np.max(np.abs(rab.values - ra.values - rb.values)) <= 1e-12 * np.abs(rab.values).max()


def test_restriction_guards():
    s = paraboloid(2)
    flat = SampledField(make_grid([(-4, 4)] * 2, [32, 32]), np.ones((32, 32)))
    with pytest.raises(ValueError, match="decay"):
        restrict(flat, s, 16)
    coarse = gaussian_field(2, half=8.0, n=8)
    with pytest.raises(ValueError, match="frequency range"):
        restrict(coarse, s, 16)


def random_decaying_field(rng):
    g = gaussian_field(2)
    noise = rng.standard_normal(g.grid.shape) + 1j * rng.standard_normal(g.grid.shape)
    return g.with_values(g.values * noise)


def test_adjointness_matched_quadrature(rng):
    s = paraboloid(2)
    worst = 0.0
    for _ in range(10):
        g = random_decaying_field(rng)
        f = midpoint_density(s, 128).with_values(rng.standard_normal(128) + 1j * rng.standard_normal(128))
        worst = max(worst, adjoint_defect(g, f))
    assert worst <= 1e-8


def test_adjointness_zero_density(rng):
    f = midpoint_density(paraboloid(2), 128).with_values(np.zeros(128))
    assert adjoint_defect(random_decaying_field(rng), f) == 0.0


def test_adjointness_mismatch_shrinks_under_refinement(rng):
    s = paraboloid(2)
    g = random_decaying_field(rng)
    fn = lambda xi: np.cos(2 * xi[:, 0]) + 1j * xi[:, 0] ** 2
    f = midpoint_density(s, 128, fn)
    defects = [adjoint_defect(g, f, midpoint_density(s, m, fn)) for m in (16, 32, 64)]
    assert defects[0] > defects[1] > defects[2]
    # at least first order: halving h at least halves the defect
    assert defects[1] <= defects[0] / 2 and defects[2] <= defects[1] / 2


def test_rescaling_identity_map_is_exact(rng):
    f = midpoint_density(paraboloid(2), 128, smooth)
    pts = rng.uniform(-5, 5, size=(20, 2))
    assert rescale_defect(f, [(-1, 1)], [0.0], 1.0, pts) == 0.0


@pytest.mark.parametrize("D", [1.0, 0.5, 0.25])
def test_rescaling_with_matched_nodes(D, rng):
    s = paraboloid(3)
    f = midpoint_density(s, 96).with_values(rng.standard_normal(96 ** 2) + 0j)
    xi0 = [0.25, -0.25]
    omega = [(0.25 - D / 2, 0.25 + D / 2), (-0.25 - D / 2, -0.25 + D / 2)]
    omega = [(max(lo, -1), min(hi, 1)) for lo, hi in omega]
    pts = rng.uniform(-4, 4, size=(30, 3))
    assert rescale_defect(f, omega, xi0, D, pts) <= 1e-8


def test_rescaling_refinement_with_independent_quadrature(rng):
    s = paraboloid(2)
    xi0, D = 0.5, 0.25
    omega = [(0.25, 0.75)]
    fn = lambda xi: np.exp(-((xi[:, 0] - 0.5) / 0.1) ** 2)
    f = midpoint_density(s, 2048, fn)
    pts = rng.uniform(-3, 3, size=(20, 2))
    lsurf = paraboloid(2, [((-1 - xi0) / D, (1 - xi0) / D)])
    defects = []
    for m in (16, 32, 64):
        resc = midpoint_density(lsurf, m, lambda u: fn(xi0 + D * u), box=[(-1, 1)])
        defects.append(rescale_defect(f, omega, [xi0], D, pts, resc))
    assert defects[0] > defects[1] > defects[2]


def test_rescaling_rejects_non_paraboloid():
    from restriction_lab.surfaces import hemisphere
    f = midpoint_density(hemisphere(2), 16)
    with pytest.raises(ValueError):
        rescale_defect(f, [(-0.1, 0.1)], [0.0], 0.5, np.zeros((1, 2)))
