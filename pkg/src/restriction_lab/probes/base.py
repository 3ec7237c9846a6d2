"""Probe configuration, reports, verdict logic and the probe registry."""

from __future__ import annotations

import math
import time
import functools
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np

from ..spectral import SlopeFit, fit_slope

__all__ = [
    "ProbeConfig",
    "ProbeReport",
    "Check",
    "PROBES",
    "register",
    "probe_names",
    "run_probe",
    "trial_rng",
    "fit_or_none",
    "complex_gaussian",
    "slope_check",
    "DEFAULTS",
    "with_defaults",
    "make_config",
]


@dataclass(frozen=True)
class ProbeConfig:
    """One probe invocation.

    ``params`` holds exponent parameters (``p``, ``q``, ``p_prime``, ``q_prime``...)
    and ``options`` holds probe-specific knobs; both fall back to per-probe defaults.
    """

    probe: str
    label: str = ""
    surface: str = ""
    params: dict = field(default_factory=dict)
    scales: tuple[float, ...] = ()
    trials: int | None = None
    seed: int = 0
    slope_tol: float | None = None
    defect_tol: float | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        sc = tuple(float(s) for s in self.scales)
        object.__setattr__(self, "scales", sc)
        if not self.label:
            object.__setattr__(self, "label", self.probe)
        if len(sc) > 1:
            d = np.diff(np.asarray(sc))
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError(f"{self.label}: scale list must be strictly monotone")
        if any(not math.isfinite(s) and s != math.inf for s in sc):
            raise ValueError(f"{self.label}: scales must be numbers")
        if self.trials is not None and int(self.trials) < 1:
            raise ValueError(f"{self.label}: trials must be >= 1")
        for tol in (self.slope_tol, self.defect_tol):
            if tol is not None and not tol > 0:
                raise ValueError(f"{self.label}: tolerances must be positive")

    def param(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)

    def option(self, key: str, default: Any = None) -> Any:
        return self.options.get(key, default)


@dataclass
class Check:
    """One pass/fail condition inside a report.

    ``kind`` is ``slope`` (two-sided), ``slope_upper``, ``bound`` (value at most
    ``target * (1 + tol)``) or ``defect`` (value at most ``tol``).
    """

    name: str
    kind: str
    value: float
    target: float
    tol: float

    @property
    def passed(self) -> bool:
        v = self.value
        if v is None or not math.isfinite(v):
            return False
        if self.kind == "slope":
            return bool(abs(v - self.target) <= self.tol)
        if self.kind == "slope_upper":
            return bool(v <= self.target + self.tol)
        if self.kind == "bound":
            return bool(v <= self.target * (1.0 + self.tol))
        if self.kind == "defect":
            return bool(v <= self.tol)
        raise ValueError(f"unknown check kind {self.kind!r}")

    def as_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "value": self.value,
                "target": self.target, "tol": self.tol, "passed": self.passed}


@dataclass
class ProbeReport:
    probe_id: str
    probe: str
    scales: list[float]
    measured: list[float]
    fit: SlopeFit | None
    constant: float | None
    target_exponent: float | None
    provenance: str
    checks: list[Check]
    seed: int
    runtime_ms: float = 0.0
    trials: list[dict] = field(default_factory=list)
    rejected: int = 0
    extras: dict = field(default_factory=dict)
    error: str | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if self.error is not None or not self.checks:
            return "fail"
        return "pass" if all(c.passed for c in self.checks) else "fail"

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


PROBES: dict[str, Callable[[ProbeConfig], ProbeReport]] = {}
DEFAULTS: dict[str, dict] = {}


_BASE_DEFAULTS = {"trials": 1, "slope_tol": 0.05, "defect_tol": 1e-6}


def with_defaults(config: ProbeConfig) -> ProbeConfig:
    """Fill unset fields of ``config`` from its probe's registered defaults."""
    if config.probe not in DEFAULTS:
        raise KeyError(f"unknown probe id {config.probe!r}")
    d = {**_BASE_DEFAULTS, **DEFAULTS[config.probe]}
    return replace(
        config,
        scales=config.scales or tuple(d.get("scales", ())),
        trials=config.trials if config.trials is not None else d["trials"],
        slope_tol=config.slope_tol if config.slope_tol is not None else d["slope_tol"],
        defect_tol=config.defect_tol if config.defect_tol is not None else d["defect_tol"],
        surface=config.surface or d.get("surface", ""),
        params={**d.get("params", {}), **config.params},
        options={**d.get("options", {}), **config.options},
    )


def make_config(probe: str, **fields: Any) -> ProbeConfig:
    return with_defaults(ProbeConfig(probe, **fields))


def register(name: str, **defaults: Any) -> Callable:
    """Register a probe under ``name``; the wrapped function sees a filled config."""

    def wrap(fn: Callable[[ProbeConfig], ProbeReport]) -> Callable[[ProbeConfig], ProbeReport]:
        @functools.wraps(fn)
        def call(config: ProbeConfig) -> ProbeReport:
            return fn(with_defaults(config))

        PROBES[name] = call
        DEFAULTS[name] = defaults
        return call

    return wrap


def probe_names() -> list[str]:
    return sorted(PROBES)


def run_probe(config: ProbeConfig) -> ProbeReport:
    """Run a probe, timing it and turning exceptions into error reports."""
    if config.probe not in PROBES:
        raise KeyError(f"unknown probe id {config.probe!r}")
    start = time.perf_counter()
    try:
        report = PROBES[config.probe](config)
    except Exception as exc:  # reported, not raised
        report = ProbeReport(config.label, config.probe, list(config.scales), [], None, None,
                             None, "", [], config.seed,
                             error=f"{type(exc).__name__}: {exc}")
    report.runtime_ms = (time.perf_counter() - start) * 1e3
    return report


def trial_rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator keyed by (seed, keys...), independent of scheduling order."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *map(int, keys)]))


def complex_gaussian(rng: np.random.Generator, shape: Any) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def fit_or_none(xs: Sequence[float], ys: Sequence[float], notes: list[str]) -> SlopeFit | None:
    """Slope fit over positive pairs; ``None`` (with a note) when degenerate."""
    pts = [(x, y) for x, y in zip(xs, ys) if x > 0 and y is not None and y > 0 and math.isfinite(y)]
    if len(pts) < 2:
        notes.append("fewer than two usable scales: no slope fit")
        return None
    return fit_slope(pts)


def slope_check(name: str, fit: SlopeFit | None, target: float, tol: float,
                upper: bool = False) -> Check:
    value = fit.exponent if fit is not None else math.nan
    return Check(name, "slope_upper" if upper else "slope", value, target, tol)
