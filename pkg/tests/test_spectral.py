import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from restriction_lab.spectral import (Grid, SampledField, fit_slope, lp_norm, make_bump, make_grid,
                                      make_majorant, reciprocal_grid, smooth_step, sup_row_integral,
                                      transform)


def gaussian(grid):
    r2 = sum(m ** 2 for m in grid.mesh())
    return SampledField(grid, np.exp(-np.pi * r2))


@pytest.mark.parametrize("dim", [1, 2])
def test_gaussian_is_self_dual(dim):
    g = make_grid([(-8, 8)] * dim, [256] * dim)
    F = transform(gaussian(g))
    # analytic oracle: exp(-pi |xi|^2)
    expected = gaussian(F.grid).values
    assert np.max(np.abs(F.values - expected)) < 1e-6


def test_modulated_gaussian_oracle():
    g = make_grid([(-8, 8)], [256])
    x = g.axes()[0]
    f = SampledField(g, np.exp(-np.pi * x ** 2) * np.exp(2j * np.pi * 1.5 * x))
    F = transform(f)
    xi = F.grid.axes()[0]
    assert np.max(np.abs(F.values - np.exp(-np.pi * (xi - 1.5) ** 2))) < 1e-10


@given(st.integers(min_value=0, max_value=2**31 - 1), st.sampled_from([(1, 64), (2, 32), (3, 16)]))
def test_parseval_and_round_trip(seed, shape):
    dim, n = shape
    r = np.random.default_rng(seed)
    g = make_grid([(-3, 5)] * dim, [n] * dim)
    f = SampledField(g, r.standard_normal(g.shape) + 1j * r.standard_normal(g.shape))
    F = transform(f)
    assert abs(lp_norm(F, 2) - lp_norm(f, 2)) <= 1e-10 * lp_norm(f, 2)
    back = transform(F, "inverse")
    assert back.grid == g
    assert np.max(np.abs(back.values - f.values)) <= 1e-10 * np.max(np.abs(f.values))


def test_reciprocal_grid_spacing():
    g = make_grid([(0, 4), (-1, 1)], [64, 32])
    r = reciprocal_grid(g)
    for h, dy, n in zip(g.spacing, r.spacing, g.samples):
        assert h * dy * n == pytest.approx(1.0)


def test_transform_rejects_non_reciprocal_target():
    g = make_grid([(-1, 1)], [16])
    with pytest.raises(ValueError):
        transform(SampledField(g, np.ones(16)), target=make_grid([(-1, 1)], [16]))


def test_grid_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        make_grid([(0, 1)], [100])


def test_field_rejects_nonfinite():
    g = make_grid([(0, 1)], [8])
    with pytest.raises(ValueError):
        SampledField(g, np.full(8, np.nan))


def test_lp_norm_oracles():
    g = make_grid([(0, 1)], [1024])
    one = SampledField(g, np.ones(1024))
    assert lp_norm(one, 3) == pytest.approx(1.0)
    assert lp_norm(one, math.inf) == 1.0
    q = lp_norm(one, 0.5)
    assert q == pytest.approx(1.0) and q.quasi
    with pytest.raises(ValueError):
        lp_norm(one, 0)


def test_smooth_step_limits_and_monotone():
    u = np.linspace(-1, 2, 301)
    s = smooth_step(u)
    assert np.all(s[u <= 0] == 1) and np.all(s[u >= 1] == 0)
    assert np.all(np.diff(s) <= 0)
    assert smooth_step(np.array([0.5]))[0] == pytest.approx(0.5)


def test_bump_support_and_plateau():
    g = make_grid([(-2, 2)], [256])
    b = make_bump(g, [0.0], 1.0)
    x = g.axes()[0]
    assert np.all(b.values[np.abs(x) >= 1] == 0)
    assert b.values[np.argmin(np.abs(x))].real == pytest.approx(1.0, abs=1e-3)
    p = make_bump(g, [0.0], 1.0, plateau=0.5)
    assert np.all(p.values[np.abs(x) <= 0.5] == 1)
    with pytest.raises(ValueError):
        make_bump(g, [10.0], 1.0)


def test_majorant_dominates_square_and_is_band_limited():
    R = 2.0
    g = make_grid([(-16, 16)] * 2, [256, 256])
    eta = make_majorant(R, g)
    x1, x2 = g.mesh()
    inside = (np.abs(x1) <= R) & (np.abs(x2) <= R)
    assert np.min(eta.values.real[inside]) >= 1 - 1e-9
    with pytest.raises(ValueError):
        make_majorant(R, make_grid([(-2, 2)] * 2, [64, 64]))


def test_sup_row_integral_oracle():
    g = make_grid([(0, 1), (0, 2)], [8, 16])
    x1, x2 = g.mesh()
    f = SampledField(g, (1 + x1) * np.ones_like(x2))
    # sup over x1 is (1 + max x1)^2, integrated over an x2 range of length 2
    assert sup_row_integral(f) == pytest.approx((1 + g.axes()[0].max()) ** 2 * 2)


@given(st.floats(-3, 3), st.floats(0.1, 10))
def test_fit_slope_recovers_power_law(a, c):
    xs = [2.0 ** k for k in range(1, 7)]
    fit = fit_slope([(x, c * x ** a) for x in xs])
    assert fit.exponent == pytest.approx(a, abs=1e-9)
    assert fit.residual < 1e-18 and fit.point_count == 6


def test_fit_slope_rejects_degenerate():
    with pytest.raises(ValueError):
        fit_slope([(1.0, 1.0)])
    with pytest.raises(ValueError):
        fit_slope([(2.0, 1.0), (2.0, 3.0)])
    with pytest.raises(ValueError):
        fit_slope([(1.0, -1.0), (2.0, 1.0)])


def test_grid_examples():
    assert make_grid([(0, 1)], [8]).spacing == (0.125,)
    assert make_grid([(-1, 1), (-1, 1)], [16, 16]).size == 256
    with pytest.raises(ValueError):
        make_grid([(0, 0)], [8])


def test_indicator_transform_at_zero():
    g = make_grid([(-1, 3)], [64])
    x = g.axes()[0]
    F = transform(SampledField(g, ((x >= 0) & (x < 1)).astype(float)))
    k0 = np.argmin(np.abs(F.grid.axes()[0]))
    assert F.grid.axes()[0][k0] == 0.0
    assert F.values[k0] == pytest.approx(1.0)


def test_fft_path_matches_direct_sum_oracle():
    g = make_grid([(-8, 8)], [256])
    x = g.axes()[0]
    f = np.exp(-np.pi * x ** 2)
    F = transform(SampledField(g, f))
    xi = F.grid.axes()[0]
    keep = np.abs(xi) <= 2
    # separately coded O(N^2) quadrature
    direct = np.array([np.sum(f * np.exp(-2j * np.pi * x * k)) * g.spacing[0] for k in xi[keep]])
    assert np.max(np.abs(F.values[keep] - direct)) < 1e-12
    assert np.max(np.abs(direct - np.exp(-np.pi * xi[keep] ** 2))) < 1e-6


def test_lp_norm_examples():
    g = make_grid([(0, 1)], [4])
    assert lp_norm(SampledField(g, np.full(4, 2.0)), 2) == pytest.approx(2.0)
    g3 = make_grid([(0, 1)], [4])
    assert lp_norm(SampledField(g3, [1, -3, 2j, 0]), math.inf) == 3.0


@given(st.floats(-0.9, 0.9))
def test_bump_values_in_unit_interval(c):
    g = make_grid([(-2, 2)], [128])
    v = make_bump(g, [c], 0.7).values
    assert np.all(v.real >= 0) and np.all(v.real <= 1) and np.all(v.imag == 0)


def test_fit_slope_examples():
    assert fit_slope([(1, 1), (2, 2), (4, 4)]).exponent == pytest.approx(1.0)
    assert fit_slope([(1, 1), (2, 2), (4, 4)]).residual == pytest.approx(0.0, abs=1e-25)
    assert fit_slope([(1, 5), (2, 5), (4, 5)]).exponent == pytest.approx(0.0, abs=1e-12)
    assert fit_slope([(1, 1), (4, 2), (16, 4)]).exponent == pytest.approx(0.5)


def test_majorant_leakage_and_row_integral_scale_with_R():
    ratios = []
    for R in (1.0, 2.0):
        g = make_grid([(-32, 32)] * 2, [256, 256])
        eta = make_majorant(R, g)
        ratios.append(sup_row_integral(eta) / R)
    # the constant C in the row-sup bound stays of the same size
    assert max(ratios) / min(ratios) < 2.5
