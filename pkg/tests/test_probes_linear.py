import numpy as np
import pytest

from restriction_lab.probes import make_config, run_probe


def run(name, **kw):
    r = run_probe(make_config(name, **kw))
    assert r.error is None, r.error
    return r


def test_hausdorff_young_gaussian_plancherel():
    r = run("hausdorff_young", params={"p": 2.0}, options={"field": "gaussian"}, scales=(128, 256))
    assert all(abs(m - 1) <= 1e-8 for m in r.measured)


@pytest.mark.parametrize("p", [1.0, 1.5])
def test_hausdorff_young_random_fields(p):
    r = run("hausdorff_young", params={"p": p}, scales=(64, 128), trials=10)
    assert r.constant <= 1 + 1e-6 and r.verdict == "pass"


def test_hausdorff_young_two_dimensional():
    r = run("hausdorff_young", options={"dim": 2}, scales=(32, 64), trials=3)
    assert r.verdict == "pass"


def test_hausdorff_young_rejects_large_p():
    r = run_probe(make_config("hausdorff_young", params={"p": 3.0}))
    assert r.error is not None


def test_khintchine_single_bump_sign_invariant():
    r = run("khintchine", scales=(1,), trials=20)
    norms = {round(t["hat_norm"], 12) for t in r.trials}
    assert len(norms) == 1
    assert r.fit is None and r.verdict == "fail"


def test_khintchine_growth():
    r = run("khintchine", trials=100)
    assert abs(r.fit.exponent - 0.5) <= 0.05
    assert abs(r.extras["norm_fit"] - 0.75) <= 0.02


def test_khintchine_trial_doubling_is_stable():
    a = run("khintchine", trials=100)
    b = run("khintchine", trials=200)
    assert abs(a.fit.exponent - b.fit.exponent) <= 0.02


def test_khintchine_rejects_overlapping_bumps():
    assert run_probe(make_config("khintchine", options={"spacing": 1.0})).error is not None


def test_knapp_endpoint_and_off_endpoint():
    end = run("knapp", scales=(1 / 16, 1 / 32, 1 / 64))
    assert abs(end.fit.exponent) <= 0.05 and end.verdict == "pass"
    off = run("knapp", params={"q_prime": 2.0}, scales=(1 / 16, 1 / 32, 1 / 64))
    assert off.fit.exponent < -0.15
    assert off.fit.exponent == pytest.approx(-0.25, abs=0.02)
    assert off.extras["divergent"] and not off.extras["admissible"]


def test_knapp_single_scale_has_no_fit():
    r = run("knapp", scales=(1 / 16,))
    assert r.fit is None and r.constant is not None and r.notes and r.verdict == "fail"


def test_knapp_requires_decreasing_delta():
    assert run_probe(make_config("knapp", scales=(1 / 64, 1 / 32))).error is not None


def test_stein_tomas_two_dimensions():
    r = run("stein_tomas", scales=(2, 3, 4, 5))
    assert r.check("kernel_decay").value <= -0.4
    assert r.check("transform_growth").value <= 1.1
    assert r.check("telescoping").value <= 1e-12
