"""Multilinear probes: discrete Loomis-Whitney, lattice partitions of unity, the
commutation identity for extension operators and multilinear growth."""

from __future__ import annotations

import math

import numpy as np

from ..spectral import SampledField, bump_profile, make_grid, transform
from ..surfaces import PHASE_GUARD, normal_determinant
from .base import (Check, ProbeConfig, ProbeReport, complex_gaussian, fit_or_none, register,
                   slope_check, trial_rng)

__all__ = ["loomis_whitney_check", "lattice_partition_check", "commutation_check",
           "mr_growth_probe", "lw_ratio", "partition_window"]

_BRUTE_FORCE_LIMIT = 10_000_000


def lw_ratio(faces: list[np.ndarray]) -> float:
    """``||prod_j g_j(pi_j z)||_{l^(2/n)} / prod_j ||g_j||_{l^2}`` on a box of Z^(n+1).

    ``faces[j]`` is indexed by the coordinates of z with coordinate j removed.
    """
    m = len(faces)
    n = m - 1
    if n < 1:
        raise ValueError("need at least two faces")
    shape = [0] * m
    for j, g in enumerate(faces):
        if g.ndim != n:
            raise ValueError("face arrays must have n = (count - 1) axes")
        others = [k for k in range(m) if k != j]
        for k, size in zip(others, g.shape):
            if shape[k] and shape[k] != size:
                raise ValueError("face shapes are inconsistent")
            shape[k] = size
    if int(np.prod(shape)) > _BRUTE_FORCE_LIMIT:
        raise ValueError("lattice extent too large for brute-force summation")
    e = 2.0 / n
    prod = np.ones(shape)
    for j, g in enumerate(faces):
        prod = prod * np.expand_dims(np.abs(g) ** e, axis=j)
    lhs = float(np.sum(prod)) ** (n / 2.0)
    rhs = float(np.prod([np.sqrt(np.sum(np.abs(g) ** 2)) for g in faces]))
    return lhs / rhs if rhs > 0 else 0.0


@register("loomis_whitney", scales=(4,), trials=1000, defect_tol=1e-12,
          params={"n": 2}, options={"normals": None})
def loomis_whitney_check(config: ProbeConfig) -> ProbeReport:
    """Brute-force discrete Loomis-Whitney ratios on k^(n+1) lattice boxes.

    Independent normals are accepted and reduced to the coordinate case by the
    linear change of variables taking them to the standard basis, which maps the
    lattice and its projections onto coordinate ones.
    """
    n = int(config.param("n"))
    normals = config.option("normals")
    det = 1.0
    if normals is not None:
        N = np.asarray(normals, dtype=float)
        if N.shape != (n + 1, n + 1):
            raise ValueError("need n + 1 normals in R^(n+1)")
        det = normal_determinant(N / np.linalg.norm(N, axis=1, keepdims=True))
        if det < 1e-12:
            raise ValueError("normals are not linearly independent")
    measured, trials = [], []
    for si, k in enumerate(config.scales):
        k = int(k)
        if k ** (n + 1) > _BRUTE_FORCE_LIMIT:
            raise ValueError("lattice extent too large for brute-force summation")
        worst = 0.0
        for t in range(config.trials):
            rng = trial_rng(config.seed, si, t)
            faces = [rng.random((k,) * n) * (rng.random((k,) * n) < 0.7) for _ in range(n + 1)]
            r = lw_ratio(faces)
            worst = max(worst, r)
            trials.append({"scale": float(k), "trial": t, "ratio": r})
        measured.append(worst)
    k0 = int(config.scales[0])
    indicator = lw_ratio([np.ones((k0,) * n) for _ in range(n + 1)])
    rng = trial_rng(config.seed, 10 ** 6)
    product = lw_ratio([rng.random(k0), rng.random(k0)])
    checks = [Check("max_ratio", "bound", max(measured), 1.0, config.defect_tol),
              Check("indicator_equality", "defect", abs(indicator - 1.0), 0.0, config.defect_tol),
              Check("product_equality", "defect", abs(product - 1.0), 0.0, config.defect_tol)]
    return ProbeReport(
        config.label, config.probe, list(config.scales), measured, None, max(measured), None,
        "sharp constant 1 for coordinate projections", checks, config.seed, trials=trials,
        extras={"indicator_ratio": indicator, "product_ratio": product, "normal_determinant": det})


def partition_window(x: np.ndarray, n: int) -> np.ndarray:
    """Unit-mass window on R^n whose transform lives in ``[-1/sqrt(n), 1/sqrt(n)]^n``.

    Each factor is ``(3a/2) sinc^4(a t)`` with ``a = 1/(2 sqrt(n))``: the square
    of the inverse transform of a triangle kernel on ``[-a, a]``, normalised.
    """
    a = 0.5 / math.sqrt(n)
    x = np.atleast_2d(x)
    return np.prod(1.5 * a * np.sinc(a * x) ** 4, axis=-1)


def _lattice_sum_1d(y: np.ndarray, a: float, terms: int) -> np.ndarray:
    base = np.floor(y)
    m = np.arange(-terms, terms + 1)
    return np.sum(1.5 * a * np.sinc(a * (y[:, None] - base[:, None] - m[None, :])) ** 4, axis=1)


def _window_guard(n: int, tol: float) -> dict:
    a = 0.5 / math.sqrt(n)
    # one factor suffices: the window is a product of identical factors
    grid = make_grid([(-512.0, 512.0)], [1 << 16])
    x = grid.axes()[0]
    vals = 1.5 * a * np.sinc(a * x) ** 4
    mass = float(vals.sum() * grid.spacing[0])
    spec = transform(SampledField(grid, vals))
    xi = spec.grid.axes()[0]
    energy = np.abs(spec.values) ** 2
    leak = float(energy[np.abs(xi) > 2 * a + 1e-3].sum() / energy.sum())
    if float(vals.min()) < 0 or abs(mass - 1.0) > tol or leak > tol:
        raise ValueError("window construction guard failed")
    return {"mass_defect": abs(mass - 1.0), "leakage": leak, "support_radius": 2 * a * math.sqrt(n)}


@register("lattice_partition", scales=(1, 2), defect_tol=1e-6, trials=4,
          params={"n": 1}, options={"r": 1.0, "points": 10_000, "terms": 600, "field": "random"})
def lattice_partition_check(config: ProbeConfig) -> ProbeReport:
    """Partition of unity by lattice translates of the window, and the weighted
    localisation constants ``C_N`` for each N in the scale list."""
    n = int(config.param("n"))
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    r = float(config.option("r"))
    guard = _window_guard(n, config.defect_tol)
    a = 0.5 / math.sqrt(n)
    rng = trial_rng(config.seed, 0)
    y = rng.random((int(config.option("points")), n)) * 10.0
    total = np.ones(len(y))
    for k in range(n):
        total *= _lattice_sum_1d(y[:, k], a, int(config.option("terms")))
    deviation = float(np.max(np.abs(total - 1.0)))
    # weighted sums on a grid covering the support of g with margin
    half, h = (16.0, 1 / 8) if n == 1 else (8.0, 1 / 4)
    ax = -half + h * (np.arange(int(2 * half / h)) + 0.5)
    X = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1).reshape(-1, n) * r
    qr = np.arange(-int(3 * half), int(3 * half) + 1)
    Q = np.stack(np.meshgrid(*([qr] * n), indexing="ij"), axis=-1).reshape(-1, n).astype(float)
    envelope = bump_profile(np.linalg.norm(X, axis=1) / (0.75 * half * r), 0.0)
    measured, trials, sups = [], [], []
    for N in (int(s) for s in config.scales):
        W = np.zeros(len(X))
        for s in range(0, len(Q), 256):
            diff = (X[:, None, :] - r * Q[None, s:s + 256, :]) / r
            chi = partition_window(diff.reshape(-1, n), n).reshape(diff.shape[:2])
            W += np.sum((1.0 + np.sum(diff ** 2, axis=-1)) ** N * chi ** 2, axis=1)
        sups.append(float(W.max()))
        worst = 0.0
        for t in range(config.trials):
            g = complex_gaussian(trial_rng(config.seed, N, t), len(X)) * envelope
            if config.option("field") == "zero":
                g = np.zeros_like(g)
            norm2 = float(np.sum(np.abs(g) ** 2))
            weighted = float(np.sum(W * np.abs(g) ** 2))
            ratio = weighted / norm2 if norm2 > 0 else 0.0
            worst = max(worst, ratio)
            trials.append({"scale": float(N), "trial": t, "weighted": weighted, "ratio": ratio})
        measured.append(worst)
    checks = [Check("partition_deviation", "defect", deviation, 0.0, config.defect_tol)]
    checks += [Check(f"C_{int(N)}_finite", "bound", c, s, 1e-9)
               for N, c, s in zip(config.scales, measured, sups)]
    return ProbeReport(
        config.label, config.probe, list(config.scales), measured, None, max(measured), None,
        "partition of unity; localisation constant measured, not assumed to be 1", checks,
        config.seed, trials=trials,
        extras={"deviation": deviation, "weight_sup": sups, **guard, "n": n, "r": r})


def _edge_ratio(vals: np.ndarray) -> float:
    peak = float(np.abs(vals).max())
    if peak == 0:
        return 0.0
    edge = 0.0
    for ax in range(vals.ndim):
        edge = max(edge, float(np.abs(np.take(vals, 0, axis=ax)).max()),
                   float(np.abs(np.take(vals, -1, axis=ax)).max()))
    return edge / peak


@register("commutation", scales=(1, 2), trials=20, defect_tol=1e-6,
          options={"dim": 1, "samples": 1024, "half_band": 4.0, "width": 0.05,
                   "times": [0.0, 1.0, 5.0, 20.0], "second_order_tol": 1e-5, "flat_tol": 1e-8,
                   "band_tol": 1e-12})
def commutation_check(config: ProbeConfig) -> ProbeReport:
    """``(x'_k - x0_k + t d_k phi(D))^N E f = E(F((y_k - x0_k)^N F^-1 f))`` for the
    paraboloid phase ``phi(xi) = |xi|^2``, per axis k.

    ``d_k phi(D)`` is applied as transform, multiply by ``d_k phi``, invert.
    """
    d = int(config.option("dim"))
    if d not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    orders = [int(s) for s in config.scales]
    if any(N not in (1, 2) for N in orders):
        raise ValueError("N must be 1 or 2")
    B = float(config.option("half_band"))
    n_s = int(config.option("samples")) if d == 1 else min(512, int(config.option("samples")))
    fgrid = make_grid([(-B, B)] * d, [n_s] * d)
    mesh = fgrid.mesh()
    phi = sum(m ** 2 for m in mesh)
    grad = [2.0 * m for m in mesh]
    band_tol = float(config.option("band_tol"))
    width = float(config.option("width"))
    times = [float(t) for t in config.option("times")]
    worst = {N: 0.0 for N in orders}
    flat = 0.0
    trials = []
    for trial in range(config.trials):
        rng = trial_rng(config.seed, trial)
        c = rng.uniform(-0.3, 0.3, d)
        coef = complex_gaussian(rng, 3)
        u = sum((m - ci) for m, ci in zip(mesh, c)) / width
        f = np.exp(-sum((m - ci) ** 2 for m, ci in zip(mesh, c)) / (2 * width ** 2)) * (
            coef[0] + coef[1] * u + coef[2] * u * u)
        F = SampledField(fgrid, f)
        g = transform(F, "inverse")  # F^-1 f on the spatial grid
        if max(_edge_ratio(f), _edge_ratio(g.values)) > band_tol:
            raise ValueError("test field is not band-limited within the grid")
        x0 = rng.uniform(-2.0, 2.0, d)
        y = g.grid.mesh()
        for t in times:
            carrier = np.exp(2j * np.pi * t * phi)
            Ef = transform(F.with_values(f * carrier), "inverse")
            if _edge_ratio(Ef.values) > band_tol:
                raise ValueError("extension leaves the spatial window")
            for k in range(d):
                def A(h: np.ndarray) -> np.ndarray:
                    spec = transform(Ef.with_values(h), "forward")
                    mult = transform(spec.with_values(grad[k] * spec.values), "inverse").values
                    return (y[k] - x0[k]) * h + t * mult

                lhs = Ef.values
                rhs_spec = f
                for N in range(1, max(orders) + 1):
                    lhs = A(lhs)
                    weight = transform(F.with_values(rhs_spec), "inverse")
                    rhs_spec = transform(weight.with_values((y[k] - x0[k]) * weight.values),
                                         "forward").values
                    rhs = transform(F.with_values(rhs_spec * carrier), "inverse").values
                    defect = float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
                    if N in worst:
                        worst[N] = max(worst[N], defect)
                    if t == 0.0 and N == 1:
                        flat = max(flat, defect)
                    trials.append({"trial": trial, "t": t, "axis": k, "N": N, "defect": defect})
    measured = [worst[N] for N in orders]
    tol = {1: config.defect_tol, 2: float(config.option("second_order_tol"))}
    checks = [Check(f"defect_N={N}", "defect", worst[N], 0.0, tol[N]) for N in orders]
    if 0.0 in times:
        checks.append(Check("flat_multiplier", "defect", flat, 0.0, float(config.option("flat_tol"))))
    return ProbeReport(
        config.label, config.probe, list(config.scales), measured, None, max(measured), None,
        "exact identity; defects are discretisation error", checks, config.seed, trials=trials,
        extras={"flat_defect": flat, "dim": d})


def _patch_normals(d: int, kappa: float, xi: np.ndarray, j: int) -> np.ndarray:
    """Unit normals of patch j (graph over the coordinates other than j)."""
    out = np.zeros((len(xi), d))
    others = [k for k in range(d) if k != j]
    out[:, j] = 1.0
    for c, k in enumerate(others):
        out[:, k] = -2.0 * kappa * xi[:, c]
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def _patch_transversality(d: int, kappa: float, delta: float, rng: np.random.Generator,
                          combos: int = 512) -> float:
    pts = [(2 * rng.random((combos, d - 1)) - 1) * delta / math.sqrt(d - 1) for _ in range(d)]
    normals = [_patch_normals(d, kappa, p, j) for j, p in enumerate(pts)]
    stack = np.stack(normals, axis=1)
    return float(np.min(np.abs(np.linalg.det(stack))))


def _factor_extension(coef: np.ndarray, s: float, x: np.ndarray, kappa: float) -> tuple[np.ndarray, float]:
    """1D extensions ``A_r(u, t)`` of rank-one factors on ``[-s, s]``, shape (Nu, Nt, r).

    Returns the array and the quadrature weight.
    """
    rate = float(np.max(np.abs(x))) * (1.0 + 2.0 * kappa * s)
    m = max(16, int(math.ceil(2 * s * rate / (PHASE_GUARD / 2))))
    h = 2 * s / m
    xi = -s + h * (np.arange(m) + 0.5)
    window = bump_profile(np.abs(xi) / s, 0.0)
    k = np.arange(coef.shape[0])
    vals = window[:, None] * (np.exp(1j * np.pi * np.outer(xi / s, k)) @ coef)  # (m, r)
    eu = np.exp(2j * np.pi * np.outer(x, xi))
    et = np.exp(2j * np.pi * kappa * np.outer(xi ** 2, x))
    A = np.einsum("um,mr,mt->utr", eu, vals * h, et)
    gram = (vals.conj().T * h) @ vals
    return A, gram


@register("mr_growth", surface="affine", scales=(16, 32, 64, 128, 256), trials=20, slope_tol=0.1,
          params={"d": 3},
          options={"delta": 0.25, "grid": 128, "rank": 3, "modes": 3, "nu_min": 0.5,
                   "support_range": [0.5, 1.2], "max_attempts": 10})
def mr_growth_probe(config: ProbeConfig) -> ProbeReport:
    """Empirical lower bound of the multilinear constant on cubes of side R.

    Patch j is the graph ``x_j = kappa |xi|^2`` over the other coordinates
    (``kappa = 0`` for affine, 1 for the paraboloid).  Each f_j is a random
    rank-r tensor product supported on a centred square whose half-diagonal is
    drawn from ``support_range`` times ``R^(-1/2)``; draws that break the margin
    condition are rejected and counted.
    """
    d = int(config.param("d"))
    if d not in (2, 3):
        raise ValueError("ambient dimension d must be 2 or 3")
    kappa = {"affine": 0.0, "paraboloid": 1.0}.get(config.surface)
    if kappa is None:
        raise ValueError("surface must be 'affine' or 'paraboloid'")
    delta = float(config.option("delta"))
    Rs = [float(R) for R in config.scales]
    if min(Rs) < delta ** -2 - 1e-9:
        raise ValueError("R must be at least delta^-2")
    nu = _patch_transversality(d, kappa, delta, trial_rng(config.seed, 99))
    if nu < float(config.option("nu_min")):
        raise ValueError(f"patches are not transverse enough (nu = {nu:.3g})")
    N = int(config.option("grid"))
    rank = int(config.option("rank")) if d == 3 else 1
    modes = int(config.option("modes"))
    lo_f, hi_f = (float(v) for v in config.option("support_range"))
    attempts_cap = int(config.option("max_attempts")) * config.trials
    measured, trials, lw_worst = [], [], 0.0
    rejected = violations = 0
    for si, R in enumerate(Rs):
        h = R / N
        x = -R / 2 + h * (np.arange(N) + 0.5)
        best = math.nan
        accepted = attempt = 0
        while accepted < config.trials and attempt < attempts_cap:
            rng = trial_rng(config.seed, si, attempt)
            attempt += 1
            radii = rng.uniform(lo_f, hi_f, d) / math.sqrt(R)  # half-diagonals of the supports
            margins = delta - radii
            if np.any(margins < delta - R ** -0.5):
                rejected += 1
                trials.append({"scale": R, "attempt": attempt - 1, "rejected": "margin",
                               "margin": float(margins.min())})
                continue
            accepted += 1
            E, norms = [], []
            for j in range(d):
                s = radii[j] / math.sqrt(d - 1)
                if d == 2:
                    A, gram = _factor_extension(complex_gaussian(rng, (modes, 1)), s, x, kappa)
                    E.append(A[:, :, 0].T if j == 0 else A[:, :, 0])
                    norms.append(math.sqrt(abs(gram[0, 0])))
                    continue
                A, ga = _factor_extension(complex_gaussian(rng, (modes, rank)), s, x, kappa)
                B, gb = _factor_extension(complex_gaussian(rng, (modes, rank)), s, x, kappa)
                spec = ("utr,vtr->tuv", "utr,vtr->utv", "utr,vtr->uvt")[j]
                E.append(np.einsum(spec, A, B))
                norms.append(math.sqrt(abs(np.sum(ga * gb))))
            if d == 3:
                mod = np.abs(E[0]) * np.abs(E[1]) * np.abs(E[2])
                lhs = float(mod.sum() * h ** 3)
            else:
                lhs = math.sqrt(float(np.sum(np.abs(E[0] * E[1]) ** 2) * h ** 2))
            ratio = lhs / float(np.prod(norms))
            if kappa == 0.0 and d == 3:
                faces = [np.abs(E[0][0]), np.abs(E[1][:, 0, :]), np.abs(E[2][:, :, 0])]
                lw_worst = max(lw_worst, lw_ratio(faces))
            best = ratio if math.isnan(best) else max(best, ratio)
            trials.append({"scale": R, "attempt": attempt - 1, "ratio": ratio,
                           "margin": float(margins.min())})
            violations += int(np.any(margins < delta - R ** -0.5))
        measured.append(best)
    notes: list[str] = []
    fit = fit_or_none(Rs, measured, notes)
    checks = [Check("accepted_margin_violations", "defect", float(violations), 0.0, 0.5)]
    checks.insert(0, slope_check("growth", fit, 0.0, config.slope_tol, upper=True))
    if kappa == 0.0 and d == 3:
        checks.append(Check("flat_loomis_whitney", "bound", lw_worst, 1.0, 1e-12))
    valid = [m for m in measured if not math.isnan(m)]
    return ProbeReport(
        config.label, config.probe, Rs, measured, fit, max(valid) if valid else None, 0.0,
        "lower bound of the multilinear constant; growth at most R^epsilon; surfaces assumed "
        "bounded in C^2", checks, config.seed, trials=trials, rejected=rejected, notes=notes,
        extras={"transversality": nu, "kappa": kappa, "d": d, "linearity": d,
                "lw_ratio_max": lw_worst, "accepted_violations": violations})
