import math

import pytest

from restriction_lab.probes.base import (Check, ProbeConfig, fit_or_none, make_config, probe_names,
                                    run_probe, trial_rng, with_defaults)


def test_registry_lists_every_probe():
    assert set(probe_names()) == {
        "hausdorff_young", "khintchine", "knapp", "stein_tomas", "reverse_square",
        "transverse_packets", "bilinear", "whitney_assembly", "superposition", "loomis_whitney",
        "lattice_partition", "commutation", "mr_growth"}


def test_config_validation():
    with pytest.raises(ValueError):
        ProbeConfig("knapp", scales=(1, 3, 2))
    with pytest.raises(ValueError):
        ProbeConfig("knapp", trials=0)
    with pytest.raises(ValueError):
        ProbeConfig("knapp", slope_tol=-1)


def test_defaults_fill_but_do_not_override():
    cfg = with_defaults(ProbeConfig("bilinear", options={"modes": 3}))
    assert cfg.trials == 20 and cfg.option("modes") == 3 and cfg.option("J1") == [-1.0, -0.5]
    with pytest.raises(KeyError):
        with_defaults(ProbeConfig("nope"))


@pytest.mark.parametrize("kind,value,target,tol,ok", [
    ("slope", 0.04, 0.0, 0.05, True), ("slope", -0.06, 0.0, 0.05, False),
    ("slope_upper", -3.0, 0.0, 0.1, True), ("slope_upper", 0.2, 0.0, 0.1, False),
    ("bound", 1.0 + 1e-13, 1.0, 1e-12, True), ("bound", 1.1, 1.0, 1e-12, False),
    ("defect", 1e-9, 0.0, 1e-8, True), ("defect", math.nan, 0.0, 1.0, False),
])
def test_check_kinds(kind, value, target, tol, ok):
    assert Check("c", kind, value, target, tol).passed is ok


def test_trial_rng_is_keyed():
    a = trial_rng(3, 1, 2).random()
    assert a == trial_rng(3, 1, 2).random()
    assert a != trial_rng(3, 2, 1).random()


def test_fit_or_none_degenerate():
    notes = []
    assert fit_or_none([1.0], [2.0], notes) is None and notes


def test_run_probe_turns_exceptions_into_errors():
    cfg = make_config("transverse_packets", options={"angle": 0.01})
    r = run_probe(cfg)
    assert r.error is not None and r.verdict == "fail"
