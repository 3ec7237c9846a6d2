import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from restriction_lab.probes import lw_ratio, make_config, partition_window, run_probe


def run(name, **kw):
    r = run_probe(make_config(name, **kw))
    assert r.error is None, r.error
    return r


def test_lw_indicator_faces_are_sharp():
    k = 4
    assert lw_ratio([np.ones((k, k))] * 3) == pytest.approx(1.0, abs=1e-14)


def test_lw_product_case_is_equality(rng):
    g1, g2 = rng.random(7), rng.random(5)
    # n = 1: z in Z^2, faces are functions of one coordinate each
    assert lw_ratio([g1, g2]) == pytest.approx(1.0, abs=1e-14)


@given(arrays(float, (3, 4, 4), elements=st.floats(0, 10)))
def test_lw_random_faces_bounded(faces):
    assert lw_ratio(list(faces)) <= 1 + 1e-12


def test_lw_guards():
    with pytest.raises(ValueError):
        lw_ratio([np.ones((2, 2)), np.ones((3, 3)), np.ones((2, 2))])
    with pytest.raises(ValueError):
        lw_ratio([np.ones(3)])


def test_loomis_whitney_probe_small():
    r = run("loomis_whitney", trials=100)
    assert r.verdict == "pass" and r.constant <= 1 + 1e-12


def test_partition_window_has_unit_mass():
    x = np.linspace(-400, 400, 400_001)[:, None]
    mass = np.sum(partition_window(x, 1)) * (x[1, 0] - x[0, 0])
    assert mass == pytest.approx(1.0, abs=1e-6)


def test_lattice_partition_one_dimension():
    r = run("lattice_partition", scales=(1, 2), options={"points": 2000})
    assert r.check("partition_deviation").value <= 1e-6
    assert all(np.isfinite(r.measured))


def test_lattice_partition_zero_field():
    r = run("lattice_partition", scales=(1,), options={"points": 500, "field": "zero"})
    assert r.measured == [0.0]


def test_commutation_first_and_second_order():
    r = run("commutation", trials=4)
    assert r.check("defect_N=1").value <= 1e-6
    assert r.check("defect_N=2").value <= 1e-5
    assert r.check("flat_multiplier").value <= 1e-8


def test_commutation_two_dimensions():
    r = run("commutation", scales=(1,), trials=2, options={"dim": 2, "times": [0.0, 1.0, 5.0]})
    assert r.verdict == "pass"


def test_mr_growth_affine_small():
    r = run("mr_growth", scales=(16, 32, 64), trials=3)
    assert r.fit.exponent <= 0.1
    assert r.check("accepted_margin_violations").value == 0
    assert r.check("flat_loomis_whitney").passed
    assert r.rejected > 0


def test_mr_growth_two_dimensions():
    r = run("mr_growth", params={"d": 2}, scales=(16, 32, 64), trials=3)
    assert r.fit.exponent <= 0.1


def test_mr_growth_tight_margin_rejects_everything():
    r = run_probe(make_config("mr_growth", scales=(16, 32), trials=2,
                              options={"support_range": [5.0, 6.0]}))
    assert r.verdict == "fail" and r.rejected > 0
