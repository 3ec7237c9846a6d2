"""Linear probes: Hausdorff-Young, random sign sums, Knapp caps, dyadic surface pieces."""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy import special

from ..spectral import (SampledField, bump_profile, lp_norm, make_bump, make_grid, smooth_step,
                        transform)
from ..surfaces import PHASE_GUARD, midpoint_density, oscillatory_sum, paraboloid
from .base import (Check, ProbeConfig, ProbeReport, complex_gaussian, fit_or_none, register,
                   slope_check, trial_rng)

__all__ = ["hausdorff_young_probe", "khintchine_probe", "knapp_probe", "stein_tomas_pieces"]


def _conjugate(p: float) -> float:
    return math.inf if p == 1 else p / (p - 1)


@register("hausdorff_young", scales=(64, 128, 256), trials=100, defect_tol=1e-6,
          params={"p": 1.5}, options={"dim": 1, "field": "random", "half_width": 8.0})
def hausdorff_young_probe(config: ProbeConfig) -> ProbeReport:
    """Max of ``||F f||_{p'} / ||f||_p`` over trials, per grid size."""
    p = float(config.param("p"))
    if not 1.0 <= p <= 2.0:
        raise ValueError(f"p must lie in [1, 2], got {p}")
    pp = _conjugate(p)
    dim = int(config.option("dim"))
    L = float(config.option("half_width"))
    kind = config.option("field")
    measured, trials = [], []
    for si, n in enumerate(config.scales):
        grid = make_grid([(-L, L)] * dim, [int(n)] * dim)
        envelope = make_bump(grid, [0.0] * dim, 0.75 * L).values
        worst = 0.0
        for t in range(config.trials if kind == "random" else 1):
            if kind == "gaussian":
                vals = np.exp(-np.pi * sum(m ** 2 for m in grid.mesh()))
            else:
                vals = complex_gaussian(trial_rng(config.seed, si, t), grid.shape) * envelope
            f = SampledField(grid, vals)
            ratio = float(lp_norm(transform(f), pp)) / float(lp_norm(f, p))
            worst = max(worst, ratio)
            trials.append({"scale": float(n), "trial": t, "ratio": ratio})
        measured.append(worst)
    notes: list[str] = []
    const = max(measured)
    return ProbeReport(
        config.label, config.probe, list(config.scales), measured,
        fit_or_none(config.scales, measured, notes), const, None,
        "bound 1 for 1 <= p <= 2", [Check("max_ratio", "bound", const, 1.0, config.defect_tol)],
        config.seed, trials=trials, notes=notes, extras={"p": p, "p_prime": pp})


@register("khintchine", scales=(4, 8, 16, 32, 64), trials=200, slope_tol=0.05,
          params={"p_prime": 4.0},
          options={"spacing": 2.5, "radius": 1.0, "step": 1 / 16, "norm_tol": 0.02})
def khintchine_probe(config: ProbeConfig) -> ProbeReport:
    """Random sign sums of separated bumps on the line.

    Fits mean ``||F f||_{p'}`` and ``||f||_p`` against the number of bumps m.
    Centres sit on grid points, so every shifted bump is an exact grid shift.
    """
    pp = float(config.param("p_prime"))
    if not pp > 2:
        raise ValueError("p' must exceed 2")
    p = pp / (pp - 1)
    spacing, radius, h = (float(config.option(k)) for k in ("spacing", "radius", "step"))
    if spacing < 2 * radius:
        raise ValueError(f"bump spacing {spacing} violates the disjointness requirement {2 * radius}")
    if abs(spacing / h - round(spacing / h)) > 1e-9:
        raise ValueError("spacing must be a multiple of the grid step")
    ms = [int(m) for m in config.scales]
    span = spacing * (max(ms) - 1) + 4 * radius
    n = 1 << int(math.ceil(math.log2(span / h)))
    lo = -2 * radius
    grid = make_grid([(lo, lo + n * h)], [n])
    base = make_bump(grid, [0.0], radius)
    base_hat = transform(base)
    xi = base_hat.grid.axes()[0]
    shift = int(round(spacing / h))
    mean_hat, mean_f, trials = [], [], []
    for si, m in enumerate(ms):
        centers = spacing * np.arange(m)
        # rows: translated bumps, and their transforms via exact modulation
        rows = np.stack([np.roll(base.values, j * shift) for j in range(m)])
        phases = np.exp(-2j * np.pi * np.outer(centers, xi)) * base_hat.values
        signs = trial_rng(config.seed, si).choice([-1.0, 1.0], size=(config.trials, m))
        f_vals = signs @ rows
        F_vals = signs @ phases
        nf = (np.sum(np.abs(f_vals) ** p, axis=1) * h) ** (1 / p)
        nF = (np.sum(np.abs(F_vals) ** pp, axis=1) * base_hat.grid.spacing[0]) ** (1 / pp)
        mean_hat.append(float(nF.mean()))
        mean_f.append(float(nf.mean()))
        trials.extend({"scale": float(m), "trial": t, "hat_norm": float(a), "norm": float(b)}
                      for t, (a, b) in enumerate(zip(nF, nf)))
    notes: list[str] = []
    fit = fit_or_none(ms, mean_hat, notes)
    fit_f = fit_or_none(ms, mean_f, [])
    checks = [slope_check("hat_exponent", fit, 0.5, config.slope_tol),
              slope_check("norm_exponent", fit_f, 1 / p, float(config.option("norm_tol")))]
    return ProbeReport(
        config.label, config.probe, list(config.scales), mean_hat, fit, max(mean_hat), 0.5,
        "mean transform norm grows like m^(1/2); the function norm like m^(1/p)",
        checks, config.seed, trials=trials, notes=notes,
        extras={"norm_means": mean_f, "norm_fit": None if fit_f is None else fit_f.exponent,
                "p": p, "p_prime": pp})


def _midpoints(lo: float, hi: float, count: int) -> np.ndarray:
    step = (hi - lo) / count
    return lo + step * (np.arange(count) + 0.5)


@register("knapp", surface="paraboloid", scales=(1 / 16, 1 / 32, 1 / 64, 1 / 128, 1 / 256),
          slope_tol=0.05, params={"p_prime": 4.0, "q_prime": 4.0, "n": 2},
          options={"slab": 8.0, "tangent_points": 256, "normal_points": 64})
def knapp_probe(config: ProbeConfig) -> ProbeReport:
    """``||E 1_cap||_{L^p'(B(0, 1/delta^2))} / ||1_cap||_{q'}`` for a delta-cap at the vertex.

    The norm is taken over the slab ``|x'| <= slab / delta`` of the ball, which
    carries the tube where the extension is large; the fitted slope is compared
    with ``(n-1) - (n+1)/p' - (n-1)/q'``.
    """
    pp, qq = float(config.param("p_prime")), float(config.param("q_prime"))
    n = int(config.param("n"))
    if n not in (2, 3):
        raise ValueError("the Knapp probe supports n in {2, 3}")
    if config.surface not in ("paraboloid", "parabola"):
        raise ValueError("the Knapp probe needs the parabola or paraboloid")
    deltas = list(config.scales)
    if len(deltas) > 1 and deltas[0] < deltas[-1]:
        raise ValueError("delta list must be decreasing")
    d = n - 1
    c = float(config.option("slab"))
    nt = int(config.option("tangent_points")) // (1 if n == 2 else 4)
    nn = int(config.option("normal_points"))
    surf = paraboloid(n)
    # rate * h <= (c + 2) / nodes must respect the phase guard
    nodes = 1 << int(math.ceil(math.log2((c + 2.0) / (PHASE_GUARD / 2))))
    target = d - (n + 1) / pp - d / qq
    measured = []
    for delta in deltas:
        dens = midpoint_density(surf, nodes, box=[(0.0, delta)] * d)
        yt = _midpoints(-c, c, nt)
        yn = _midpoints(-1.0, 1.0, nn)
        mesh = np.meshgrid(*([yt] * d + [yn]), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        pts[:, :d] /= delta
        pts[:, d] /= delta ** 2
        inside = np.sum(pts ** 2, axis=1) <= delta ** -4
        pts = pts[inside]
        weight = (2 * c / nt / delta) ** d * (2.0 / nn / delta ** 2)
        ef = oscillatory_sum(dens, pts, sign=1)
        lhs = (np.sum(np.abs(ef) ** pp) * weight) ** (1 / pp)
        measured.append(float(lhs / dens.lp_norm(qq)))
    notes: list[str] = []
    fit = fit_or_none(deltas, measured, notes)
    checks = [slope_check("slope", fit, target, config.slope_tol)]
    admissible = d / (qq / (qq - 1)) >= (n + 1) / pp if qq > 1 else True
    return ProbeReport(
        config.label, config.probe, deltas, measured, fit, max(measured), target,
        "tube computation: slope (n-1) - (n+1)/p' - (n-1)/q'", checks, config.seed, notes=notes,
        extras={"p_prime": pp, "q_prime": qq, "n": n, "admissible": admissible,
                "divergent": fit is not None and fit.exponent < -config.slope_tol})


@functools.lru_cache(maxsize=4)
def _radial_bump_transform(n: int, plateau: float, rho_max: float = 64.0,
                           step: float = 1 / 128, nodes: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """Table of the transform of the radial plateau bump, as a function of |xi|."""
    r = (np.arange(nodes) + 0.5) / nodes
    prof = bump_profile(r, plateau) / nodes
    rho = np.arange(0.0, rho_max + step / 2, step)
    out = np.empty_like(rho)
    for s in range(0, len(rho), 512):
        arg = 2 * np.pi * np.outer(rho[s:s + 512], r)
        if n == 2:
            out[s:s + 512] = 2 * np.pi * (special.j0(arg) * r) @ prof
        else:
            # sin(2 pi rho r) / (pi rho) written through sinc to keep rho = 0 finite
            out[s:s + 512] = 4 * np.pi * (np.sinc(2 * rho[s:s + 512, None] * r) * r * r) @ prof
    return rho, out


def _piece_transform(j: int, rad: np.ndarray, n: int, table: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    rho, phi_hat = table
    big = np.interp(2.0 ** j * rad, rho, phi_hat, right=0.0)
    small = np.interp(2.0 ** (j - 1) * rad, rho, phi_hat, right=0.0)
    return 2.0 ** (j * n) * big - 2.0 ** ((j - 1) * n) * small


def _sphere_directions(n: int, count: int) -> np.ndarray:
    # the cut-off measure is even in each tangential axis, so one quadrant suffices
    if n == 2:
        th = (np.arange(count // 2) + 0.5) * (np.pi / 2) / (count // 2)
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    pol = (np.arange(count // 4) + 0.5) * (np.pi / 2) / (count // 4)
    az = (np.arange(count // 8) + 0.5) * (np.pi / 2) / (count // 8)
    P, A = np.meshgrid(pol, az, indexing="ij")
    return np.stack([np.sin(P) * np.cos(A), np.sin(P) * np.sin(A), np.cos(P)], axis=-1).reshape(-1, 3)


@register("stein_tomas", surface="paraboloid", scales=(2, 3, 4, 5, 6, 7), slope_tol=0.1,
          params={"n": 2},
          options={"plateau": 0.5, "directions": 96, "radii": 32, "window": 16.0,
                   "offsets": [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0], "telescope_tol": 1e-12})
def stein_tomas_pieces(config: ProbeConfig) -> ProbeReport:
    """Dyadic pieces ``K_j = phi_j * (transform of the cut-off surface measure)``.

    ``sup |K_j|`` is sampled over the annulus carrying ``phi_j``; ``sup |K_j hat|``
    is sampled near the vertex of the surface through the convolution
    ``K_j hat(zeta) = int w(eta) phi_j hat(zeta + Sigma(eta)) d eta``.
    """
    n = int(config.param("n"))
    if n not in (2, 3):
        raise ValueError("n must be 2 or 3")
    js = [int(j) for j in config.scales]
    if min(js) < 1:
        raise ValueError("j must be at least 1")
    plateau = float(config.option("plateau"))
    d = n - 1
    surf = paraboloid(n)

    def cutoff(t: np.ndarray) -> np.ndarray:
        return smooth_step(2.0 * np.abs(t) - 1.0)

    # telescoping partition
    J = max(js)
    r = np.linspace(0.0, 2.0 ** (J + 1), 20001)
    total = bump_profile(r, plateau)
    for j in range(1, J + 1):
        total = total + bump_profile(r / 2.0 ** j, plateau) - bump_profile(r / 2.0 ** (j - 1), plateau)
    tele = float(np.max(np.abs(total - bump_profile(r / 2.0 ** J, plateau))))

    dirs = _sphere_directions(n, int(config.option("directions")))
    table = _radial_bump_transform(n, plateau)
    k_sup, khat_sup = [], []
    for j in js:
        radii = np.linspace(2.0 ** (j - 2), 2.0 ** j, int(config.option("radii")))
        pts = (radii[:, None, None] * dirs[None]).reshape(-1, n)
        rate = 3.0 * 2.0 ** j
        nodes = int(math.ceil(2.0 * rate / (PHASE_GUARD / 2)))
        dens = midpoint_density(surf, nodes, values=[cutoff] * d)
        sig = oscillatory_sum(dens, pts, sign=-1)
        phi_j = bump_profile(radii / 2.0 ** j, plateau) - bump_profile(radii / 2.0 ** (j - 1), plateau)
        k_sup.append(float(np.max(np.abs(sig.reshape(len(radii), -1)) * phi_j[:, None])))
        # transform of K_j near zeta = -(0, s)
        half = min(1.0, float(config.option("window")) * 2.0 ** -j)
        per_axis = 2 * int(math.ceil(half * 2.0 ** j * 8))
        eta = -half + (np.arange(per_axis) + 0.5) * (2 * half / per_axis)
        mesh = np.meshgrid(*([eta] * d), indexing="ij")
        sq = sum(m ** 2 for m in mesh).ravel()
        wts = np.prod([cutoff(m) for m in mesh], axis=0).ravel() * (2 * half / per_axis) ** d
        best = 0.0
        for s in config.option("offsets"):
            shift = float(s) * 2.0 ** -j
            rad = np.sqrt(sq + (sq - shift) ** 2)
            best = max(best, abs(float(np.sum(wts * _piece_transform(j, rad, n, table)))))
        khat_sup.append(best)
    notes: list[str] = []
    xs = [2.0 ** j for j in js]
    fit = fit_or_none(xs, k_sup, notes)
    fit_hat = fit_or_none(xs, khat_sup, [])
    target = -(n - 1) / 2
    checks = [slope_check("kernel_decay", fit, target, config.slope_tol, upper=True),
              slope_check("transform_growth", fit_hat, 1.0, config.slope_tol, upper=True),
              Check("telescoping", "defect", tele, 0.0, float(config.option("telescope_tol")))]
    return ProbeReport(
        config.label, config.probe, list(config.scales), k_sup, fit, max(k_sup), target,
        "sup |K_j| ~ 2^(-j(n-1)/2) and sup |K_j hat| ~ 2^j; slopes against 2^j", checks,
        config.seed, notes=notes,
        extras={"transform_sup": khat_sup,
                "transform_fit": None if fit_hat is None else fit_hat.exponent,
                "telescoping_defect": tele, "n": n})
