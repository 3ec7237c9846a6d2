"""Graph hypersurfaces, their differential geometry and surface-measure transforms.

A hypersurface in R^n is the graph ``{(xi, psi(xi)) : xi in U}`` over a box
``U`` in R^(n-1).  Surface measure is the pullback of Lebesgue measure on U
(no area factor), and integrals over U use the midpoint rule.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Hypersurface",
    "Density",
    "paraboloid",
    "hemisphere",
    "polynomial_curve",
    "affine",
    "midpoint_density",
    "surface_eval",
    "gaussian_curvature",
    "unit_normal",
    "transversality",
    "transversality_batch",
    "normal_determinant",
    "measure_ft",
    "oscillatory_sum",
    "PhaseResolutionError",
]

# max phase advance per quadrature cell, in cycles
PHASE_GUARD = 0.25


class PhaseResolutionError(ValueError):
    """The quadrature is too coarse for the requested oscillation."""


@dataclass(frozen=True)
class Hypersurface:
    ambient_dim: int
    domain: tuple[tuple[float, float], ...]
    kind: str
    params: tuple = ()
    smoothness_bound: float = 0.0

    @property
    def param_dim(self) -> int:
        return self.ambient_dim - 1

    @property
    def separable(self) -> bool:
        """True when psi is a sum of one-variable terms plus a constant."""
        return self.kind in ("paraboloid", "affine", "polynomial")

    # -- vectorised analytic evaluation on arrays of shape (..., d) --------
    def psi(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if self.kind == "paraboloid":
            return np.sum(xi ** 2, axis=-1)
        if self.kind == "hemisphere":
            return self.params[0] * np.sqrt(1.0 - np.sum(xi ** 2, axis=-1))
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(xi[..., 0], self.params)
        grad, offset = self.params
        return xi @ np.asarray(grad) + offset

    def gradient(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if self.kind == "paraboloid":
            return 2.0 * xi
        if self.kind == "hemisphere":
            root = np.sqrt(1.0 - np.sum(xi ** 2, axis=-1, keepdims=True))
            return -self.params[0] * xi / root
        if self.kind == "polynomial":
            der = np.polynomial.polynomial.polyder(self.params)
            return np.polynomial.polynomial.polyval(xi[..., :1], der)
        grad, _ = self.params
        return np.broadcast_to(np.asarray(grad, dtype=float), xi.shape).copy()

    def hessian(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        d = self.param_dim
        eye = np.eye(d)
        if self.kind == "paraboloid":
            return np.broadcast_to(2.0 * eye, xi.shape[:-1] + (d, d)).copy()
        if self.kind == "hemisphere":
            s = 1.0 - np.sum(xi ** 2, axis=-1)[..., None, None]
            outer = xi[..., :, None] * xi[..., None, :]
            return -self.params[0] * (eye / np.sqrt(s) + outer / s ** 1.5)
        if self.kind == "polynomial":
            der2 = np.polynomial.polynomial.polyder(self.params, 2)
            return np.polynomial.polynomial.polyval(xi[..., :1], der2)[..., None]
        return np.zeros(xi.shape[:-1] + (d, d))

    def axis_term(self, k: int, t: np.ndarray) -> np.ndarray:
        """One-variable term of a separable psi (constant excluded)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "paraboloid":
            return t ** 2
        if self.kind == "polynomial":
            coeffs = np.array(self.params, dtype=float)
            coeffs[0] = 0.0
            return np.polynomial.polynomial.polyval(t, coeffs)
        if self.kind == "affine":
            return self.params[0][k] * t
        raise ValueError(f"{self.kind} surface is not separable")

    @property
    def constant_term(self) -> float:
        if self.kind == "polynomial":
            return float(self.params[0])
        if self.kind == "affine":
            return float(self.params[1])
        return 0.0

    def max_abs_gradient(self) -> np.ndarray:
        """Per-axis sup of |d psi / d xi_k| over U (corner-and-sample estimate)."""
        pts = _dense_sample(self.domain, 17)
        return np.max(np.abs(self.gradient(pts)), axis=0)

    def contains(self, xi: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        ok = np.ones(xi.shape[:-1], dtype=bool)
        for k, (lo, hi) in enumerate(self.domain):
            ok &= (xi[..., k] >= lo - tol) & (xi[..., k] <= hi + tol)
        return ok


def _dense_sample(domain: Sequence[tuple[float, float]], per_axis: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in domain]
    return np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=-1)


def _finish(surface: Hypersurface) -> Hypersurface:
    pts = _dense_sample(surface.domain, 33 if surface.param_dim <= 2 else 9)
    bound = max(
        float(np.max(np.abs(surface.psi(pts)))),
        float(np.max(np.linalg.norm(surface.gradient(pts), axis=-1))),
        float(np.max(np.linalg.norm(surface.hessian(pts), ord=2, axis=(-2, -1)))),
    )
    return Hypersurface(surface.ambient_dim, surface.domain, surface.kind, surface.params,
                        bound * (1 + 1e-12))


def _check_domain(domain: Sequence[Sequence[float]], d: int) -> tuple[tuple[float, float], ...]:
    dom = tuple((float(lo), float(hi)) for lo, hi in domain)
    if len(dom) != d:
        raise ValueError(f"domain must have {d} axes")
    for lo, hi in dom:
        if not lo < hi:
            raise ValueError(f"degenerate domain axis ({lo}, {hi})")
    return dom


def paraboloid(n: int, domain: Sequence[Sequence[float]] | None = None) -> Hypersurface:
    """``psi(xi) = |xi|^2`` in R^n."""
    if n < 2:
        raise ValueError("ambient dimension must be at least 2")
    dom = _check_domain(domain if domain is not None else [(-1.0, 1.0)] * (n - 1), n - 1)
    return _finish(Hypersurface(n, dom, "paraboloid"))


def hemisphere(n: int, sign: int = 1, domain: Sequence[Sequence[float]] | None = None) -> Hypersurface:
    """``psi(xi) = sign * sqrt(1 - |xi|^2)``; U must stay strictly inside the unit ball."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if n < 2:
        raise ValueError("ambient dimension must be at least 2")
    r = 0.9 / math.sqrt(n - 1)
    dom = _check_domain(domain if domain is not None else [(-r, r)] * (n - 1), n - 1)
    far = math.sqrt(sum(max(lo * lo, hi * hi) for lo, hi in dom))
    if far >= 1.0:
        raise ValueError("hemisphere domain must satisfy sup |xi| < 1")
    return _finish(Hypersurface(n, dom, "hemisphere", (float(sign),)))


def polynomial_curve(coeffs: Sequence[float], domain: Sequence[float] = (-1.0, 1.0)) -> Hypersurface:
    """Curve ``psi(xi) = sum_k c_k xi^k`` in R^2 (coefficients in increasing degree)."""
    c = tuple(float(v) for v in coeffs)
    if not c:
        raise ValueError("need at least one coefficient")
    return _finish(Hypersurface(2, _check_domain([domain], 1), "polynomial", c))


def affine(gradient: Sequence[float], offset: float = 0.0,
           domain: Sequence[Sequence[float]] | None = None) -> Hypersurface:
    g = tuple(float(v) for v in gradient)
    d = len(g)
    dom = _check_domain(domain if domain is not None else [(-1.0, 1.0)] * d, d)
    return _finish(Hypersurface(d + 1, dom, "affine", (g, float(offset))))


@dataclass(frozen=True)
class Density:
    """Function samples on U with quadrature weights.

    ``factors`` is set when the samples form a tensor product of one-variable
    samples; each entry is ``(nodes_k, weights_k, values_k)``.
    """

    surface: Hypersurface
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    spacing: tuple[float, ...]
    factors: tuple | None = None

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float).reshape(-1, self.surface.param_dim)
        w = np.asarray(self.weights, dtype=float).ravel()
        v = np.asarray(self.values, dtype=complex).ravel()
        if not (len(nodes) == len(w) == len(v)):
            raise ValueError("nodes, weights and values must have equal length")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray) -> "Density":
        return Density(self.surface, self.nodes, self.weights, values, self.spacing)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(self.values) ** 2)))

    def lp_norm(self, p: float) -> float:
        if math.isinf(p):
            return float(np.abs(self.values).max())
        return float(np.sum(self.weights * np.abs(self.values) ** p) ** (1.0 / p))


def midpoint_density(surface: Hypersurface, samples: int | Sequence[int],
                     values: Callable | Sequence[Callable] | None = None,
                     box: Sequence[Sequence[float]] | None = None) -> Density:
    """Midpoint-rule density on ``box`` (default: all of U).

    ``values`` may be a callable on arrays of shape ``(M, d)``, or a sequence of
    one-variable callables whose product gives a separable density.
    """
    d = surface.param_dim
    dom = _check_domain(box if box is not None else surface.domain, d)
    for (lo, hi), (ulo, uhi) in zip(dom, surface.domain):
        if lo < ulo - 1e-12 or hi > uhi + 1e-12:
            raise ValueError("density box must lie inside the surface domain")
    counts = [int(samples)] * d if np.isscalar(samples) else [int(s) for s in samples]
    if len(counts) != d or min(counts) < 1:
        raise ValueError("bad sample counts")
    axes, widths = [], []
    for (lo, hi), m in zip(dom, counts):
        h = (hi - lo) / m
        axes.append(lo + h * (np.arange(m) + 0.5))
        widths.append(h)
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    weights = np.full(len(nodes), float(np.prod(widths)))
    factors = None
    if values is None:
        vals = np.ones(len(nodes), dtype=complex)
        factors = tuple((a, np.full(len(a), h), np.ones(len(a), dtype=complex))
                        for a, h in zip(axes, widths))
    elif callable(values):
        vals = np.asarray(values(nodes), dtype=complex).ravel()
    else:
        fns = list(values)
        if len(fns) != d:
            raise ValueError("need one factor per parameter axis")
        per_axis = [np.asarray(fn(a), dtype=complex) for fn, a in zip(fns, axes)]
        vals = per_axis[0]
        for extra in per_axis[1:]:
            vals = np.multiply.outer(vals, extra)
        vals = np.asarray(vals).ravel()
        factors = tuple((a, np.full(len(a), h), v) for a, h, v in zip(axes, widths, per_axis))
    return Density(surface, nodes, weights, vals, tuple(widths), factors)


def _check_point(surface: Hypersurface, xi: Sequence[float]) -> np.ndarray:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (surface.param_dim,):
        raise ValueError("point dimension does not match the surface")
    if not surface.contains(xi):
        raise ValueError("point lies outside the surface domain")
    if surface.kind == "hemisphere" and float(xi @ xi) >= 1.0:
        raise ValueError("hemisphere requires |xi| < 1")
    return xi


def surface_eval(surface: Hypersurface, xi: Sequence[float]) -> tuple[float, np.ndarray, np.ndarray]:
    p = _check_point(surface, xi)
    return float(surface.psi(p)), surface.gradient(p), surface.hessian(p)


def gaussian_curvature(surface: Hypersurface, xi: Sequence[float]) -> float:
    """``det Hess psi / (1 + |grad psi|^2)^((n+1)/2)``; equals det Hess at critical points."""
    p = _check_point(surface, xi)
    g = surface.gradient(p)
    h = surface.hessian(p)
    if not np.any(h):
        return 0.0
    n = surface.ambient_dim
    return float(np.linalg.det(h) / (1.0 + g @ g) ** ((n + 1) / 2))


def _normals(surface: Hypersurface, xi: np.ndarray) -> np.ndarray:
    g = surface.gradient(xi)
    raw = np.concatenate([-g, np.ones(g.shape[:-1] + (1,))], axis=-1)
    return raw / np.linalg.norm(raw, axis=-1, keepdims=True)


def unit_normal(surface: Hypersurface, xi: Sequence[float]) -> np.ndarray:
    return _normals(surface, _check_point(surface, xi))


def normal_determinant(normals: np.ndarray) -> float:
    """``|det|`` of a square matrix whose columns are unit normals."""
    m = np.asarray(normals, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("need n normals in R^n")
    n = m.shape[1]
    if any(np.array_equal(m[:, i], m[:, j]) for i in range(n) for j in range(i + 1, n)):
        return 0.0
    return float(abs(np.linalg.det(m)))


def transversality(points: Sequence[tuple[Hypersurface, Sequence[float]]]) -> float:
    """``|det(N_1(xi_1), ..., N_n(xi_n))|`` for one point on each of n patches."""
    n = len(points)
    cols = []
    for surf, xi in points:
        if surf.ambient_dim != n:
            raise ValueError("dimension mismatch: need exactly n patches in R^n")
        cols.append(unit_normal(surf, xi))
    return normal_determinant(np.stack(cols, axis=1))


def transversality_batch(patches: Sequence[tuple[Hypersurface, np.ndarray]]) -> float:
    """Minimum of ``|det|`` over all tuples drawn from per-patch sample sets."""
    n = len(patches)
    normal_sets = []
    for surf, pts in patches:
        if surf.ambient_dim != n:
            raise ValueError("dimension mismatch: need exactly n patches in R^n")
        normal_sets.append(_normals(surf, np.asarray(pts, dtype=float).reshape(-1, n - 1)))
    best = math.inf
    idx_lists = [range(len(s)) for s in normal_sets]
    combos = np.array(list(itertools.product(*idx_lists)), dtype=int)
    for start in range(0, len(combos), 65536):
        chunk = combos[start:start + 65536]
        mats = np.stack([normal_sets[j][chunk[:, j]] for j in range(n)], axis=-1)
        best = min(best, float(np.min(np.abs(np.linalg.det(mats)))))
    return best


def _phase_guard(density: Density, points: np.ndarray) -> None:
    d = density.surface.param_dim
    grad_sup = np.max(np.abs(density.surface.gradient(density.nodes)), axis=0)
    xn = np.max(np.abs(points[:, d]))
    for k in range(d):
        rate = float(np.max(np.abs(points[:, k]))) + xn * float(grad_sup[k])
        if rate * density.spacing[k] > PHASE_GUARD:
            raise PhaseResolutionError(
                f"unresolved phase on axis {k}: rate*h = {rate * density.spacing[k]:.3g} > {PHASE_GUARD}"
            )


def oscillatory_sum(density: Density, points: np.ndarray, sign: int) -> np.ndarray:
    """``sum w f exp(sign 2 pi i (x'.xi + x_n psi(xi)))`` for each point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    surf = density.surface
    d = surf.param_dim
    if pts.shape[-1] != surf.ambient_dim:
        raise ValueError("point dimension does not match the surface")
    if len(pts) == 0:
        raise ValueError("empty point set")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    _phase_guard(density, pts)
    tau = sign * 2j * np.pi
    if density.factors is not None and surf.separable:
        out = np.exp(tau * pts[:, d] * surf.constant_term)
        for k, (a, w, v) in enumerate(density.factors):
            term = surf.axis_term(k, a)
            step = max(1, 4_000_000 // len(a))
            for s in range(0, len(pts), step):
                p = pts[s:s + step]
                ph = np.exp(tau * (np.outer(p[:, k], a) + np.outer(p[:, d], term)))
                out[s:s + step] *= ph @ (w * v)
        return out
    psi = surf.psi(density.nodes)
    wv = density.weights * density.values
    out = np.empty(len(pts), dtype=complex)
    step = max(1, 4_000_000 // max(1, len(wv)))
    for s in range(0, len(pts), step):
        p = pts[s:s + step]
        phase = p[:, :d] @ density.nodes.T + np.outer(p[:, d], psi)
        out[s:s + step] = np.exp(tau * phase) @ wv
    return out


def _auto_density(surface: Hypersurface, points: np.ndarray, margin: float = 1 / 16,
                  max_nodes: int = 1 << 16) -> Density:
    d = surface.param_dim
    grad_sup = surface.max_abs_gradient()
    xn = float(np.max(np.abs(points[:, d])))
    counts = []
    for k, (lo, hi) in enumerate(surface.domain):
        rate = float(np.max(np.abs(points[:, k]))) + xn * float(grad_sup[k])
        counts.append(max(16, int(math.ceil((hi - lo) * rate / margin))))
    if max(counts) > max_nodes:
        raise PhaseResolutionError("requested point needs more quadrature nodes than allowed")
    return midpoint_density(surface, counts)


def measure_ft(surface: Hypersurface, x: Sequence[float] | np.ndarray,
               cutoff: Density | None = None) -> complex | np.ndarray:
    """Transform of the pullback surface measure, optionally weighted by ``cutoff``.

    ``x`` may be one point or an array of points of shape ``(P, n)``.
    """
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    pts = np.atleast_2d(arr)
    dens = cutoff if cutoff is not None else _auto_density(surface, pts)
    if dens.surface != surface:
        raise ValueError("cutoff density belongs to a different surface")
    vals = oscillatory_sum(dens, pts, sign=-1)
    return complex(vals[0]) if single else vals
