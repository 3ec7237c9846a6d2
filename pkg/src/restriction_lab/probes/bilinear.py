"""Bilinear probes: reverse square function, transverse packets, bilinear restriction,
Whitney assembly and superposition inequalities.

The L^4 and L^2 products of the first two probes are computed exactly on a
periodic lattice: with frequencies on an integer lattice, ``||f g||_2^2`` over a
period equals the period volume times the sum of squared convolution
coefficients, which ``np.bincount`` evaluates over integer keys.
"""

from __future__ import annotations

import math

import numpy as np

from ..dyadic import ParabolicCap, cap_mask
from ..spectral import bump_profile, dft_axis
from ..packets import OrientedBox, dual_box, overlap_volume, rotation_2d
from .base import (Check, ProbeConfig, ProbeReport, complex_gaussian, fit_or_none, register,
                   slope_check, trial_rng)

__all__ = ["reverse_square_probe", "transverse_packet_probe", "bilinear_probe",
           "whitney_assembly_check", "superposition_checks", "superposition_probe"]


class _ConvolutionKeys:
    """Integer keys for all pairwise frequency sums of two lattice sets."""

    def __init__(self, idx1: np.ndarray, idx2: np.ndarray, groups1: np.ndarray | None = None,
                 groups2: np.ndarray | None = None) -> None:
        sums = (idx1[:, None, :] + idx2[None, :, :]).reshape(-1, idx1.shape[1])
        sums = sums - sums.min(axis=0)
        span = sums.max(axis=0) + 1
        key = np.zeros(len(sums), dtype=np.int64)
        for k in range(sums.shape[1]):
            key = key * int(span[k]) + sums[:, k]
        _, self.inverse = np.unique(key, return_inverse=True)
        self.size = int(self.inverse.max()) + 1
        self.grouped = None
        if groups1 is not None:
            g = (groups1[:, None] * (int(groups2.max()) + 1) + groups2[None, :]).ravel()
            _, self.grouped = np.unique(self.inverse.astype(np.int64) * (int(g.max()) + 1) + g,
                                        return_inverse=True)

    @staticmethod
    def _energy(products: np.ndarray, labels: np.ndarray) -> float:
        re = np.bincount(labels, weights=products.real)
        im = np.bincount(labels, weights=products.imag)
        return float(np.sum(re * re + im * im))

    def energy(self, a: np.ndarray, b: np.ndarray) -> float:
        """Sum over frequencies of |sum_{xi + eta = zeta} a b|^2."""
        return self._energy(np.outer(a, b).ravel(), self.inverse)

    def grouped_energy(self, a: np.ndarray, b: np.ndarray) -> float:
        """Same, with the inner sums split by group pair and the squares added."""
        return self._energy(np.outer(a, b).ravel(), self.grouped)


def _cap_lattice(J: tuple[float, float], delta: float,
                 divisions: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Lattice indices of N_J(delta^2) and the index of the delta-cap of each point."""
    d1, d2 = delta / divisions, delta * delta / 2
    a, b = J
    i1 = np.arange(int(math.floor(a / d1)) - 1, int(math.ceil(b / d1)) + 1)
    xi1 = (i1 + 0.5) * d1
    i2 = np.arange(int(math.floor((min(a * a, b * b) - delta ** 2) / d2)) - 1,
                   int(math.ceil((max(a * a, b * b) + delta ** 2) / d2)) + 2)
    I1, I2 = np.meshgrid(i1, i2, indexing="ij")
    X1, X2 = (I1 + 0.5) * d1, I2 * d2
    keep = cap_mask(X1, X2, ParabolicCap(a, b - a, delta * delta))
    x1 = X1[keep]
    caps = np.floor((x1 - a) / delta + 1e-9).astype(np.int64)
    return np.stack([I1[keep], I2[keep]], axis=-1).astype(np.int64), caps


@register("reverse_square", scales=(1 / 8, 1 / 16, 1 / 32, 1 / 64), trials=20, slope_tol=0.1,
          defect_tol=1e-12, options={"J1": [-1.0, -0.5], "J2": [0.5, 1.0], "field": "random",
                   "tangent_divisions": 16})
def reverse_square_probe(config: ProbeConfig) -> ProbeReport:
    """``|| |f1 f2|^(1/2) ||_4`` against the cap square functions of f1 and f2.

    Coefficients are complex Gaussian on the lattice points of each
    ``N_J(delta^2)``; ``field = "single_cap"`` keeps one cap per side and
    ``field = "zero"`` exercises the skipped-trial path.
    """
    J1 = tuple(float(v) for v in config.option("J1"))
    J2 = tuple(float(v) for v in config.option("J2"))
    if not (J1[1] < J2[0] or J2[1] < J1[0]):
        raise ValueError("J1 and J2 must be separated")
    kind = config.option("field")
    divs = int(config.option("tangent_divisions"))
    measured, trials, rejected = [], [], 0
    deltas = list(config.scales)
    for si, delta in enumerate(deltas):
        for J in (J1, J2):
            q = (J[1] - J[0]) / delta
            if abs(q - round(q)) > 1e-9:
                raise ValueError(f"delta = {delta} does not divide |J| = {J[1] - J[0]}")
        idx1, caps1 = _cap_lattice(J1, delta, divs)
        idx2, caps2 = _cap_lattice(J2, delta, divs)
        keys = _ConvolutionKeys(idx1, idx2, caps1, caps2)
        worst = math.nan
        for t in range(config.trials):
            rng = trial_rng(config.seed, si, t)
            a = complex_gaussian(rng, len(idx1))
            b = complex_gaussian(rng, len(idx2))
            if kind == "single_cap":
                a = np.where(caps1 == rng.integers(caps1.max() + 1), a, 0)
                b = np.where(caps2 == rng.integers(caps2.max() + 1), b, 0)
            elif kind == "zero":
                a = np.zeros_like(a)
            rhs = keys.grouped_energy(a, b)
            if rhs == 0.0:
                rejected += 1
                trials.append({"scale": delta, "trial": t, "skipped": "zero square function"})
                continue
            ratio = (keys.energy(a, b) / rhs) ** 0.25
            worst = ratio if math.isnan(worst) else max(worst, ratio)
            trials.append({"scale": delta, "trial": t, "ratio": ratio})
        measured.append(worst)
    notes: list[str] = []
    fit = fit_or_none(deltas, measured, notes)
    valid = [m for m in measured if not math.isnan(m)]
    const = max(valid) if valid else None
    checks = [slope_check("slope", fit, 0.0, config.slope_tol)]
    if kind == "single_cap" and valid:
        checks = [Check("single_cap_equality", "defect", max(abs(m - 1.0) for m in valid), 0.0,
                        config.defect_tol)]
    return ProbeReport(
        config.label, config.probe, deltas, measured, fit, const, 0.0,
        "reverse square function bound: no power of delta", checks, config.seed,
        trials=trials, rejected=rejected, notes=notes)


def _box_lattice(box: OrientedBox, step: float) -> np.ndarray:
    reach = float(np.sqrt(np.sum(np.asarray(box.half_lengths) ** 2)))
    lo = np.floor((np.asarray(box.center) - reach) / step).astype(int)
    hi = np.ceil((np.asarray(box.center) + reach) / step).astype(int)
    axes = [np.arange(l, h + 1) for l, h in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    idx = np.stack([m.ravel() for m in mesh], axis=-1)
    return idx[box.contains(idx * step)].astype(np.int64)


def _transverse_ratio(keys: _ConvolutionKeys, a: np.ndarray, b: np.ndarray, step: float) -> float:
    # ||f1 f2||_2^(1/2) / (||f1|| ||f2||)^(1/2), with the lattice period volume cancelled
    return (step ** 2 * keys.energy(a, b) / (np.sum(np.abs(a) ** 2) * np.sum(np.abs(b) ** 2))) ** 0.25


@register("transverse_packets", scales=(1 / 8, 1 / 16, 1 / 32, 1 / 64), trials=8, slope_tol=0.15,
          params={"n": 2},
          options={"angle": math.pi / 4, "margin": 4.0, "packets": 4, "prediction_tol": 0.2,
                   "overlap_samples": 1 << 16})
def transverse_packet_probe(config: ProbeConfig) -> ProbeReport:
    """``|| |f1 f2|^(1/2) ||_2 / (||f1|| ||f2||)^(1/2)`` for fields on delta x delta^2 boxes
    at angle ``nu``, against the exponent ``(n + 2) / 4``.

    Each field is a sum of a few packets at random positions inside its dual box.
    A single packet per side is compared with the dual-box overlap volume.
    """
    n = int(config.param("n"))
    if n != 2:
        raise ValueError("the transverse packet probe is implemented for n = 2")
    nu = float(config.option("angle"))
    margin = float(config.option("margin"))
    deltas = list(config.scales)
    if nu < margin * max(deltas):
        raise ValueError(f"angle {nu:.4g} is below the transversality margin {margin} * delta")
    K = int(config.option("packets"))
    measured, trials, predictions = [], [], []
    for si, delta in enumerate(deltas):
        step = delta * delta / 4
        half = (delta / 2, delta * delta / 2)
        B1 = OrientedBox.make((0.0, 0.0), None, half)
        B2 = OrientedBox.make((0.0, 0.0), rotation_2d(nu), half)
        idx1, idx2 = _box_lattice(B1, step), _box_lattice(B2, step)
        keys = _ConvolutionKeys(idx1, idx2)
        pts1, pts2 = idx1 * step, idx2 * step
        T1, T2 = dual_box(B1), dual_box(B2)
        single = _transverse_ratio(keys, np.ones(len(idx1)), np.ones(len(idx2)), step)
        ov = overlap_volume(T1, T2, samples=int(config.option("overlap_samples")), seed=config.seed)
        predicted = (ov.volume / (T1.volume * T2.volume)) ** 0.25
        predictions.append({"scale": delta, "single_packet": single, "predicted": predicted,
                            "ratio4": (single / predicted) ** 4, "angle": ov.angle})
        worst = 0.0
        for t in range(config.trials):
            rng = trial_rng(config.seed, si, t)
            fields = []
            for T, pts in ((T1, pts1), (T2, pts2)):
                loc = (2 * rng.random((K, 2)) - 1) * np.asarray(T.half_lengths)
                ys = loc @ T.axis_matrix.T
                c = complex_gaussian(rng, K)
                fields.append(np.exp(-2j * np.pi * pts @ ys.T) @ c)
            ratio = _transverse_ratio(keys, fields[0], fields[1], step)
            worst = max(worst, ratio)
            trials.append({"scale": delta, "trial": t, "ratio": ratio})
        measured.append(worst)
    notes: list[str] = []
    fit = fit_or_none(deltas, measured, notes)
    target = (n + 2) / 4
    pred_err = max(abs(p["ratio4"] - 1.0) for p in predictions)
    checks = [Check("packet_prediction", "defect", pred_err, 0.0, float(config.option("prediction_tol")))]
    checks.insert(0, slope_check("slope", fit, target, config.slope_tol))
    return ProbeReport(
        config.label, config.probe, deltas, measured, fit, max(measured), target,
        "transverse bilinear gain delta^((n+2)/4)", checks, config.seed, trials=trials,
        notes=notes, extras={"angle": nu, "single_packet": predictions})


def _smooth_random(rng: np.random.Generator, modes: int) -> np.ndarray:
    return complex_gaussian(rng, modes)


def _interval_field(coeffs: np.ndarray, J: tuple[float, float], xi: np.ndarray) -> np.ndarray:
    """Bump window on J times a short random Fourier series in the rescaled variable."""
    a, b = J
    u = (xi - a) / (b - a)
    window = bump_profile(np.abs(2 * u - 1), 0.0)
    k = np.arange(len(coeffs))
    return window * (np.exp(2j * np.pi * np.outer(u, k)) @ coeffs)


class _StripExtension:
    """Extension over an interval of the parabola, on the square grid ``[-R, R)^2``.

    Rows in ``x2`` are chirped, then one exact DFT per row maps nodes of spacing
    ``1 / (alias R)`` to ``x1`` with spacing ``h``.  By Poisson summation the
    midpoint sum equals the extension plus copies shifted by multiples of
    ``alias * R`` in ``x1``; the copies sit outside the window because the
    extension of a field on an interval of length at most 1 is concentrated in
    ``|x1| <= 2 R + O(1)`` when ``|x2| <= R``.
    """

    def __init__(self, J: tuple[float, float], R: float, h: float = 0.5, alias: int = 8,
                 chunk: int = 128) -> None:
        a, b = J
        self.J, self.R, self.h = J, R, h
        self.dxi = 1.0 / (alias * R)
        self.size = int(round(1.0 / (h * self.dxi)))
        count = int(math.ceil((b - a) / self.dxi))
        if count > self.size:
            raise ValueError("interval too long for the alias period")
        self.xi = a + (np.arange(count) + 0.5) * ((b - a) / count)
        self.w = (b - a) / count
        self.x = -R + h * np.arange(int(round(2 * R / h)))
        self.chunk = chunk
        self.chirp = np.exp(2j * np.pi * np.outer(self.x, self.xi ** 2))

    def __call__(self, f: np.ndarray) -> np.ndarray:
        nx = len(self.x)
        out = np.empty((nx, nx), dtype=complex)
        lo_x = self.xi[0]
        step = self.w
        n = int(round(1.0 / (self.h * step)))
        for s in range(0, nx, self.chunk):
            rows = np.zeros((min(self.chunk, nx - s), n), dtype=complex)
            rows[:, :len(self.xi)] = self.chirp[s:s + self.chunk] * f
            vals = dft_axis(rows, 1, (lo_x, step, n), (-self.R, self.h, n), sign=1)
            out[s:s + self.chunk] = vals[:, :nx]
        return out  # indexed [x2, x1]

    def l2(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(f) ** 2) * self.w))


def _disc_energies(E1: np.ndarray, E2: np.ndarray, x: np.ndarray, radii: list[float],
                   h: float) -> list[float]:
    dens = np.abs(E1 * E2) ** 2
    r2 = x[:, None] ** 2 + x[None, :] ** 2
    return [float(dens[r2 <= R * R].sum() * h * h) for R in radii]


@register("bilinear", scales=(16, 32, 64, 128, 256, 512), trials=20, slope_tol=0.1,
          params={"p": 4.0, "q": 2.0, "n": 2},
          options={"J1": [-1.0, -0.5], "J2": [0.5, 1.0], "modes": 6, "field": "random",
                   "distance_sweep": [], "sweep_radius": 256.0, "sweep_trials": 4,
                   "sweep_tol": 0.1, "alias_check_points": 8})
def bilinear_probe(config: ProbeConfig) -> ProbeReport:
    """Empirical bilinear constant ``max || |E1 f1 E2 f2|^(1/2) ||_{L^4(B_R)} / (||f1|| ||f2||)^(1/2)``.

    Both extensions are computed once on ``[-R_max, R_max)^2`` and the norm is
    integrated over nested discs.  With ``distance_sweep = [D, ...]`` the
    constant is also measured for intervals ``[-D, -D/2]`` and ``[D/2, D]`` at
    distance D and D/2, and the log2 ratio is compared with ``(n-1)/q' - (n+1)/p``.
    """
    p, q, n = float(config.param("p")), float(config.param("q")), int(config.param("n"))
    if n != 2 or p != 4.0:
        raise ValueError("the bilinear probe evaluates the L^4 endpoint in the plane")
    J1 = tuple(float(v) for v in config.option("J1"))
    J2 = tuple(float(v) for v in config.option("J2"))
    if not (J1[1] < J2[0] or J2[1] < J1[0]):
        raise ValueError("J1 and J2 must be at positive distance")
    radii = [float(r) for r in config.scales]
    Rmax = max(radii)
    modes = int(config.option("modes"))
    ops = [_StripExtension(J, Rmax) for J in (J1, J2)]
    measured = [math.nan] * len(radii)
    trials, rejected = [], 0
    alias_defect = 0.0
    for t in range(config.trials):
        rng = trial_rng(config.seed, t)
        fs = [_interval_field(_smooth_random(rng, modes), J, op.xi) for J, op in zip((J1, J2), ops)]
        if config.option("field") == "zero":
            fs[0] = np.zeros_like(fs[0])
        norm = math.sqrt(ops[0].l2(fs[0]) * ops[1].l2(fs[1]))
        if norm == 0.0:
            rejected += 1
            trials.append({"trial": t, "skipped": "zero field"})
            continue
        E = [op(f) for op, f in zip(ops, fs)]
        if t == 0:
            alias_defect = _alias_check(ops[0], fs[0], E[0], int(config.option("alias_check_points")), rng)
        energies = _disc_energies(E[0], E[1], ops[0].x, radii, ops[0].h)
        ratios = [e ** 0.25 / norm for e in energies]
        for i, r in enumerate(ratios):
            measured[i] = r if math.isnan(measured[i]) else max(measured[i], r)
        trials.append({"trial": t, "ratios": ratios})
    notes: list[str] = []
    fit = fit_or_none(radii, measured, notes)
    checks = [slope_check("slope", fit, 0.0, config.slope_tol)]
    extras: dict = {"alias_defect": alias_defect}
    sweep = [float(D) for D in config.option("distance_sweep")]
    if any(not 0 < D <= 2 for D in sweep):
        raise ValueError("distance_sweep values must lie in (0, 2]: intervals have length D/2 <= 1")
    if sweep:
        predicted = (n - 1) / (q / (q - 1)) - (n + 1) / p
        rows = []
        for D in sweep:
            cs = [_distance_constant(Dk, float(config.option("sweep_radius")), modes,
                                     int(config.option("sweep_trials")), config.seed)
                  for Dk in (D, D / 2)]
            exponent = math.log(cs[0] / cs[1]) / math.log(2.0)
            rows.append({"D": D, "constant": cs[0], "constant_half": cs[1], "exponent": exponent})
            checks.append(Check(f"distance_power_D={D:g}", "slope", exponent, predicted,
                                float(config.option("sweep_tol"))))
        extras["distance_sweep"] = rows
        extras["distance_power"] = predicted
    const = max(m for m in measured if not math.isnan(m)) if fit is not None else None
    return ProbeReport(
        config.label, config.probe, radii, measured, fit, const, 0.0,
        "bilinear L^4 endpoint: constant bounded uniformly in R", checks, config.seed,
        trials=trials, rejected=rejected, notes=notes, extras=extras)


def _alias_check(op: _StripExtension, f: np.ndarray, E: np.ndarray, count: int,
                 rng: np.random.Generator) -> float:
    """Compare the strip extension with direct summation at random grid points."""
    if count <= 0:
        return 0.0
    nx = len(op.x)
    i = rng.integers(nx, size=count)
    j = rng.integers(nx, size=count)
    x1, x2 = op.x[j], op.x[i]
    direct = np.exp(2j * np.pi * (np.outer(x1, op.xi) + np.outer(x2, op.xi ** 2))) @ (f * op.w)
    scale = float(np.abs(E).max())
    return float(np.max(np.abs(direct - E[i, j])) / scale)


def _distance_constant(D: float, R: float, modes: int, trials: int, seed: int) -> float:
    J1, J2 = (-D, -D / 2), (D / 2, D)
    ops = [_StripExtension(J, R) for J in (J1, J2)]
    best = 0.0
    for t in range(trials):
        # the same coefficients at every D, so the fields are rescaled copies
        rng = trial_rng(seed, 7919, t)
        fs = [_interval_field(_smooth_random(rng, modes), J, op.xi) for J, op in zip((J1, J2), ops)]
        E = [op(f) for op, f in zip(ops, fs)]
        energy = float(np.sum(np.abs(E[0] * E[1]) ** 2) * ops[0].h ** 2)
        best = max(best, energy ** 0.25 / math.sqrt(ops[0].l2(fs[0]) * ops[1].l2(fs[1])))
    return best


@register("whitney_assembly", scales=(3, 4, 5, 6), defect_tol=1e-9,
          options={"field": "one", "node_level": 9, "points": 64, "extent": 4.0, "modes": 6})
def whitney_assembly_check(config: ProbeConfig) -> ProbeReport:
    """``(E f)^2`` against the sum of ``E_{Omega1} f E_{Omega2} f`` over Whitney pairs of
    ``[-1, 1]^2`` down to level ``-k_max``.

    With midpoint nodes on a dyadic grid every pair is a union of node blocks, so
    the remainder is the sum over node pairs in the uncovered strip and is
    bounded by ``sup|f|^2`` times the strip area.  Defects are relative to ``sup|f|^2``.
    """
    from ..dyadic import whitney_pairs
    from ..surfaces import midpoint_density, oscillatory_sum, paraboloid

    ks = [int(k) for k in config.scales]
    level = int(config.option("node_level"))
    if max(ks) + 1 > level:
        raise ValueError("node grid must be finer than the smallest Whitney cube")
    m = 2 << level
    h = 2.0 / m
    xi = -1.0 + (np.arange(m) + 0.5) * h
    kind = config.option("field")
    rng = trial_rng(config.seed, 0)
    if kind == "one":
        f = np.ones(m, dtype=complex)
    elif kind == "zero":
        f = np.zeros(m, dtype=complex)
    else:
        f = _interval_field(_smooth_random(rng, int(config.option("modes"))), (-1.0, 1.0), xi)
    ext = float(config.option("extent"))
    pts = np.vstack([[0.0, 0.0], (2 * rng.random((int(config.option("points")), 2)) - 1) * ext])
    dens = midpoint_density(paraboloid(2), m).with_values(f)
    full = oscillatory_sum(dens, pts, sign=1)  # enforces the phase guard
    terms = np.exp(2j * np.pi * (np.outer(pts[:, 0], xi) + np.outer(pts[:, 1], xi ** 2))) * (f * h)
    prefix = np.concatenate([np.zeros((len(pts), 1)), np.cumsum(terms, axis=1)], axis=1)
    sup2 = float(np.max(np.abs(f)) ** 2)
    defects, bounds = [], []
    for k in ks:
        pairs = whitney_pairs(1, -k)
        idx = np.array([[int(round((p.omega1.lo[0] + 1) / h)), int(round((p.omega1.hi[0] + 1) / h)),
                         int(round((p.omega2.lo[0] + 1) / h)), int(round((p.omega2.hi[0] + 1) / h))]
                        for p in pairs])
        e1 = prefix[:, idx[:, 1]] - prefix[:, idx[:, 0]]
        e2 = prefix[:, idx[:, 3]] - prefix[:, idx[:, 2]]
        assembled = np.sum(e1 * e2, axis=1)
        strip = 4.0 - sum(p.side ** 2 for p in pairs)
        gap = float(np.max(np.abs(full ** 2 - assembled)))
        defects.append(gap / sup2 if sup2 > 0 else gap)
        bounds.append(strip)
    checks = [Check(f"strip_bound_k={k}", "bound", dv, b, config.defect_tol)
              for k, dv, b in zip(ks, defects, bounds)]
    if kind == "one" and len(defects) > 1:
        rise = max(0.0, max(b - a for a, b in zip(defects, defects[1:])))
        checks.append(Check("non_increasing", "defect", rise, 0.0, config.defect_tol))
    return ProbeReport(
        config.label, config.probe, list(config.scales), defects, None, max(defects), None,
        "remainder bounded by the uncovered diagonal strip", checks, config.seed,
        extras={"strip_bounds": bounds, "points": len(pts)})


def _box_disjoint_after_dilation(boxes: list[np.ndarray]) -> bool:
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            a, b = boxes[i], boxes[j]
            ca, ha = a.mean(axis=1), (a[:, 1] - a[:, 0])
            cb, hb = b.mean(axis=1), (b[:, 1] - b[:, 0])
            # dilation by 2 about the centre doubles each half-length
            if np.all(np.abs(ca - cb) < ha + hb):
                return False
    return True


def superposition_checks(family: list, s: float, mode: str = "lemma41",
                         boxes: list | None = None, bound: float = 4.0,
                         band_tol: float = 1e-10, equality_tol: float = 1e-10) -> ProbeReport:
    """Superposition inequalities for a family of fields on one grid.

    ``lemma41``: ``||sum f||_s^s <= sum ||f||_s^s`` for ``0 < s <= 1``.
    ``lemma37``: fields with transforms in boxes that stay disjoint after
    dilation by 2; reports ``C = ||sum F||_s / (sum ||F||_s^r)^(1/r)`` with
    ``r = min(s, s')``.  At ``s = 2`` the family is orthogonal and C = 1.
    """
    from ..packets import OrientedBox, box_mass_outside
    from ..spectral import lp_norm

    if not family:
        raise ValueError("empty family")
    grid = family[0].grid
    if any(f.grid != grid for f in family):
        raise ValueError("fields must share a grid")
    total = family[0].with_values(sum(f.values for f in family))
    s = float(s)
    if mode == "lemma41":
        if not 0 < s <= 1:
            raise ValueError("s must lie in (0, 1]")
        lhs = float(lp_norm(total, s)) ** s
        rhs = sum(float(lp_norm(f, s)) ** s for f in family)
        slack = rhs - lhs
        checks = [Check("subadditivity", "bound", lhs, rhs, 1e-12)]
        return ProbeReport("superposition", "superposition", [s], [slack / rhs if rhs else 0.0],
                           None, lhs / rhs if rhs else 0.0, None, "p-th power subadditivity",
                           checks, 0, extras={"lhs": lhs, "rhs": rhs, "slack": slack})
    if mode != "lemma37":
        raise ValueError(f"unknown mode {mode!r}")
    if boxes is None or len(boxes) != len(family):
        raise ValueError("lemma37 mode needs one frequency box per field")
    arr = [np.asarray(b, dtype=float).reshape(grid.dim, 2) for b in boxes]
    if not _box_disjoint_after_dilation(arr):
        raise ValueError("frequency boxes are not disjoint after dilation by 2")
    for f, b in zip(family, arr):
        box = OrientedBox.make(b.mean(axis=1), None, (b[:, 1] - b[:, 0]) / 2)
        if box_mass_outside(f, box) > band_tol:
            raise ValueError("a field is not band-limited to its box")
    r = s if s <= 2 else (1.0 if math.isinf(s) else s / (s - 1))
    norms = [float(lp_norm(f, s)) for f in family]
    denom = sum(nv ** r for nv in norms) ** (1 / r)
    C = float(lp_norm(total, s)) / denom if denom > 0 else 0.0
    if s == 2:
        checks = [Check("orthogonality", "defect", abs(C - 1.0), 0.0, equality_tol)]
    else:
        checks = [Check("constant", "bound", C, bound, 1e-12)]
    return ProbeReport("superposition", "superposition", [s], [C], None, C, None,
                       "superposition over Fourier-separated boxes", checks, 0,
                       extras={"exponent": r})


@register("superposition", scales=(1.0, 1.5, 2.0, math.inf), trials=20,
          options={"mode": "lemma37", "members": 4, "half_width": 0.5, "gap": 3.0,
                   "bound": 4.0, "samples": 1024, "extent": 32.0})
def superposition_probe(config: ProbeConfig) -> ProbeReport:
    """Random families for :func:`superposition_checks`, one exponent per scale."""
    from ..spectral import SampledField, make_grid, transform

    mode = config.option("mode")
    K = int(config.option("members"))
    L = float(config.option("extent"))
    n = int(config.option("samples"))
    grid = make_grid([(-L, L)], [n])
    freq = transform(SampledField(grid, np.zeros(n)))
    xi = freq.grid.axes()[0]
    r, gap = float(config.option("half_width")), float(config.option("gap"))
    centers = gap * (np.arange(K) - (K - 1) / 2)
    boxes = [[(c - r, c + r)] for c in centers]
    measured, trials, checks = [], [], []
    for si, s in enumerate(config.scales):
        worst = -math.inf
        for t in range(config.trials):
            rng = trial_rng(config.seed, si, t)
            fam = []
            for c in centers:
                if mode == "lemma41":
                    vals = np.abs(rng.standard_normal(n)) * (rng.random(n) < 0.3)
                    fam.append(SampledField(grid, vals))
                else:
                    spec = np.where(np.abs(xi - c) < r - 1e-12, complex_gaussian(rng, n), 0.0)
                    fam.append(transform(freq.with_values(spec), "inverse"))
            rep = superposition_checks(fam, s, mode, boxes if mode == "lemma37" else None,
                                       bound=float(config.option("bound")))
            worst = max(worst, rep.measured[0])
            trials.append({"scale": s, "trial": t, "value": rep.measured[0],
                           "passed": rep.verdict == "pass"})
            if rep.verdict != "pass":
                checks.extend(c for c in rep.checks if not c.passed)
        measured.append(worst)
        if mode == "lemma41":
            # worst relative slack must stay non-negative
            checks.append(Check(f"slack_s={s:g}", "defect", -min(
                tr["value"] for tr in trials if tr["scale"] == s), 0.0, 1e-12))
        elif s == 2:
            checks.append(Check("orthogonality", "defect", max(
                abs(tr["value"] - 1.0) for tr in trials if tr["scale"] == s), 0.0, 1e-10))
        else:
            checks.append(Check(f"constant_s={s:g}", "bound", worst, float(config.option("bound")), 1e-12))
    return ProbeReport(config.label, config.probe, list(config.scales), measured, None,
                       max(measured), None, "superposition constants per exponent", checks,
                       config.seed, trials=trials)
