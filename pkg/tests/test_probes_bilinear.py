import math

import numpy as np
import pytest

from restriction_lab.probes import make_config, run_probe, superposition_checks
from restriction_lab.spectral import SampledField, make_grid, transform


def run(name, **kw):
    r = run_probe(make_config(name, **kw))
    assert r.error is None, r.error
    return r


def test_reverse_square_single_cap_ratio_is_one():
    r = run("reverse_square", scales=(1 / 8, 1 / 16), trials=2, options={"field": "single_cap"})
    assert all(m == pytest.approx(1.0, abs=1e-12) for m in r.measured)
    assert r.verdict == "pass"


def test_reverse_square_zero_field_is_skipped():
    r = run_probe(make_config("reverse_square", scales=(1 / 8, 1 / 16), trials=2,
                              options={"field": "zero"}))
    assert r.rejected == 4 and r.verdict == "fail"


def test_reverse_square_random_is_flat():
    r = run("reverse_square", scales=(1 / 8, 1 / 16, 1 / 32), trials=3)
    assert abs(r.fit.exponent) <= 0.1


def test_transverse_packets_small():
    r = run("transverse_packets", scales=(1 / 8, 1 / 16, 1 / 32), trials=2)
    assert abs(r.fit.exponent - 1.0) <= 0.15
    assert r.check("packet_prediction").passed


def test_transverse_packets_margin_guard():
    r = run_probe(make_config("transverse_packets", options={"angle": 0.1}))
    assert r.error is not None and "margin" in r.error.lower() or r.error


def test_bilinear_zero_field_skipped():
    r = run_probe(make_config("bilinear", scales=(16, 32), trials=2, options={"field": "zero"}))
    assert r.rejected == 2 and r.verdict == "fail"
    assert all(math.isnan(m) for m in r.measured)


def test_bilinear_small_sweep():
    r = run("bilinear", scales=(16, 32, 64), trials=2)
    assert abs(r.fit.exponent) <= 0.1
    assert r.extras["alias_defect"] <= 1e-10


def test_bilinear_distance_power():
    r = run("bilinear", scales=(16, 32), trials=1,
            options={"distance_sweep": [1.0], "sweep_trials": 2})
    row = r.extras["distance_sweep"][0]
    assert row["exponent"] == pytest.approx(-0.25, abs=0.1)


def test_bilinear_rejects_long_sweep_interval():
    r = run_probe(make_config("bilinear", scales=(16, 32), trials=1,
                              options={"distance_sweep": [4.0]}))
    assert r.error is not None


def test_whitney_assembly_one_and_zero():
    one = run("whitney_assembly", scales=(3, 4, 5))
    assert one.verdict == "pass"
    assert all(d <= b * (1 + 1e-9) for d, b in zip(one.measured, one.extras["strip_bounds"]))
    zero = run("whitney_assembly", scales=(3, 4), options={"field": "zero"})
    assert all(d == 0 for d in zero.measured)


def test_subadditivity_equality_for_disjoint_supports():
    g = make_grid([(0, 4)], [64])
    x = g.axes()[0]
    a = SampledField(g, (x < 1).astype(float))
    b = SampledField(g, ((x >= 2) & (x < 3)).astype(float))
    r = superposition_checks([a, b], 0.5)
    assert r.extras["slack"] == pytest.approx(0.0, abs=1e-12)


def test_subadditivity_random(rng):
    g = make_grid([(0, 4)], [64])
    fam = [SampledField(g, rng.standard_normal(64)) for _ in range(5)]
    for s in (0.25, 0.5, 1.0):
        r = superposition_checks(fam, s)
        assert r.extras["slack"] >= 0 and r.verdict == "pass"
    with pytest.raises(ValueError):
        superposition_checks(fam, 1.5)


def fourier_separated(rng, centers, half=0.5):
    g = make_grid([(-16, 16)], [256])
    spec = transform(SampledField(g, np.zeros(256)))
    xi = spec.grid.axes()[0]
    fam, boxes = [], []
    for c in centers:
        inside = np.abs(xi - c) < half
        vals = (rng.standard_normal(256) + 1j * rng.standard_normal(256)) * inside
        fam.append(transform(spec.with_values(vals), "inverse"))
        boxes.append([[c - half, c + half]])
    return fam, boxes


def test_superposition_orthogonality_at_two(rng):
    fam, boxes = fourier_separated(rng, [-3.0, 0.0, 3.0])
    r = superposition_checks(fam, 2.0, mode="lemma37", boxes=boxes)
    assert r.constant == pytest.approx(1.0, abs=1e-10)


def test_superposition_guards(rng):
    fam, boxes = fourier_separated(rng, [0.0, 1.2])
    with pytest.raises(ValueError, match="dilation"):
        superposition_checks(fam, 2.0, mode="lemma37", boxes=boxes)
    fam, boxes = fourier_separated(rng, [-3.0, 3.0])
    narrow = [[[c - 0.1, c + 0.1]] for c in (-3.0, 3.0)]
    with pytest.raises(ValueError, match="band"):
        superposition_checks(fam, 2.0, mode="lemma37", boxes=narrow)


def test_superposition_probe():
    r = run("superposition", trials=4)
    assert r.verdict == "pass"
