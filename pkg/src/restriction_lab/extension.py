"""Extension and restriction operators over graph hypersurfaces.

``extend`` evaluates ``E f(x) = int_U f(xi) exp(2 pi i (x'.xi + x_n psi(xi))) dxi``
by direct summation at arbitrary points; ``restrict`` evaluates the transform of a
sampled field on the surface.  Both are plain quadratures, so their discrete
forms are exact transposes of each other.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .spectral import SampledField
from .surfaces import Density, Hypersurface, midpoint_density, oscillatory_sum, paraboloid

__all__ = ["extend", "restrict", "adjoint_defect", "rescale_defect", "restrict_density"]


def extend(f: Density, points: np.ndarray | Sequence[Sequence[float]]) -> np.ndarray:
    """Extension of ``f`` at each row of ``points`` (shape ``(P, n)``)."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise ValueError("empty point set")
    return oscillatory_sum(f, np.atleast_2d(pts), sign=1)


def _boundary_guard(field: SampledField, tol: float) -> None:
    vals = np.abs(field.values)
    peak = float(vals.max())
    if peak == 0.0:
        return
    edge = 0.0
    for ax in range(vals.ndim):
        edge = max(edge, float(np.take(vals, 0, axis=ax).max()),
                   float(np.take(vals, -1, axis=ax).max()))
    if edge > tol * peak:
        raise ValueError(f"field does not decay at the box boundary ({edge / peak:.2e} relative)")


def restrict_density(field: SampledField, template: Density, decay_tol: float = 1e-8) -> Density:
    """Transform of ``field`` evaluated at the surface points over ``template``'s nodes."""
    surf = template.surface
    grid = field.grid
    if grid.dim != surf.ambient_dim:
        raise ValueError("field dimension does not match the surface")
    _boundary_guard(field, decay_tol)
    freq = np.concatenate([template.nodes, surf.psi(template.nodes)[:, None]], axis=1)
    nyq = np.array([0.5 / h for h in grid.spacing])
    if np.any(np.abs(freq) > nyq):
        raise ValueError("surface leaves the frequency range resolved by the grid")
    pts = grid.points()
    vals = field.values.ravel()
    out = np.empty(len(freq), dtype=complex)
    step = max(1, 4_000_000 // len(pts))
    for s in range(0, len(freq), step):
        ph = np.exp(-2j * np.pi * (freq[s:s + step] @ pts.T))
        out[s:s + step] = ph @ vals
    return template.with_values(out * grid.cell_volume)


def restrict(field: SampledField, surface: Hypersurface, samples: int | Sequence[int] = 64,
             decay_tol: float = 1e-8) -> Density:
    """Restriction of the transform of ``field`` to ``surface`` on a midpoint grid of U."""
    return restrict_density(field, midpoint_density(surface, samples), decay_tol)


def _inner(a: np.ndarray, b: np.ndarray, w: np.ndarray | float) -> complex:
    return complex(np.sum(w * a * np.conj(b)))


def adjoint_defect(g: SampledField, f: Density, f_alt: Density | None = None,
                   eps: float = 1e-300) -> float:
    """Relative gap between ``<g, E f>`` and ``<R g, f>``.

    ``f_alt`` (same function on other nodes) is used on the restriction side
    when given, which isolates quadrature mismatch from the identity itself.
    """
    right_density = f_alt if f_alt is not None else f
    if right_density.surface != f.surface:
        raise ValueError("densities must share a surface")
    pts = g.grid.points()
    ef = extend(f, pts)
    lhs = _inner(g.values.ravel(), ef, g.grid.cell_volume)
    rg = restrict_density(g, right_density, decay_tol=np.inf)
    rhs = _inner(rg.values, right_density.values, right_density.weights)
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + eps)


def _restrict_to_box(f: Density, box: Sequence[Sequence[float]]) -> Density:
    mask = np.ones(len(f.nodes), dtype=bool)
    for k, (lo, hi) in enumerate(box):
        mask &= (f.nodes[:, k] >= lo) & (f.nodes[:, k] <= hi)
    if not mask.any():
        raise ValueError("box contains no quadrature nodes")
    return Density(f.surface, f.nodes[mask], f.weights[mask], f.values[mask], f.spacing)


def rescale_defect(f: Density, omega: Sequence[Sequence[float]], xi0: Sequence[float], D: float,
                   points: np.ndarray, rescaled: Density | None = None) -> float:
    """Parabolic rescaling check for the paraboloid.

    Compares ``|E_Omega f(xbar, x_n)|`` with
    ``D^(n-1) |E_{L(Omega)} f_L(D (xbar + 2 x_n xi0), D^2 x_n)|`` where
    ``L(xi) = (xi - xi0) / D``.  By default ``f_L`` re-indexes the same samples;
    pass ``rescaled`` to use an independent quadrature on ``L(Omega)``.
    Returns the max defect relative to ``sup |E_Omega f|`` over the points.
    """
    surf = f.surface
    if surf.kind != "paraboloid":
        raise ValueError("rescaling identity is stated for the paraboloid")
    if not D > 0:
        raise ValueError("D must be positive")
    d = surf.param_dim
    xi0 = np.asarray(xi0, dtype=float).reshape(d)
    box = [(float(lo), float(hi)) for lo, hi in omega]
    for (lo, hi), (ulo, uhi) in zip(box, surf.domain):
        if lo < ulo - 1e-12 or hi > uhi + 1e-12 or not lo < hi:
            raise ValueError("Omega must be a nondegenerate box inside U")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    sub = _restrict_to_box(f, box)
    lhs = np.abs(extend(sub, pts))
    if rescaled is None:
        ldom = [((ulo - c) / D, (uhi - c) / D) for (ulo, uhi), c in zip(surf.domain, xi0)]
        lsurf = paraboloid(surf.ambient_dim, ldom)
        rescaled = Density(lsurf, (sub.nodes - xi0) / D, sub.weights / D ** d, sub.values,
                           tuple(h / D for h in sub.spacing))
    xbar, xn = pts[:, :d], pts[:, d]
    mapped = np.concatenate([D * (xbar + 2 * xn[:, None] * xi0), (D * D * xn)[:, None]], axis=1)
    rhs = D ** d * np.abs(extend(rescaled, mapped))
    scale = float(lhs.max())
    if scale == 0.0:
        return float(rhs.max())
    return float(np.max(np.abs(lhs - rhs)) / scale)
