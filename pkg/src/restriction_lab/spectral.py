"""Uniform grids, Riemann-sum Fourier transforms, L^p norms, bumps and slope fits.

Conventions
-----------
The forward transform is ``F(xi) = int f(x) exp(-2 pi i x.xi) dx`` and the inverse
uses the opposite sign.  On a grid both are realised as Riemann sums, so every
discrete value approximates the continuum integral directly.  A spatial grid with
spacing ``h`` and ``N`` samples per axis is paired with the centred reciprocal grid
of spacing ``1/(N h)`` and the same sample count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

__all__ = [
    "Grid",
    "SampledField",
    "SlopeFit",
    "NormValue",
    "make_grid",
    "reciprocal_grid",
    "transform",
    "lp_norm",
    "smooth_step",
    "bump_profile",
    "dft_axis",
    "make_bump",
    "make_majorant",
    "sup_row_integral",
    "fit_slope",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform grid of cell left-endpoints over an axis-aligned box."""

    box: tuple[tuple[float, float], ...]
    samples: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.box) != len(self.samples) or not self.box:
            raise ValueError("box and samples must have the same positive length")
        for (lo, hi), n in zip(self.box, self.samples):
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
                raise ValueError(f"degenerate box axis ({lo}, {hi})")
            if not _is_power_of_two(int(n)):
                raise ValueError(f"samples must be a power of two >= 2, got {n}")

    @property
    def dim(self) -> int:
        return len(self.samples)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.samples)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.box, self.samples))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def size(self) -> int:
        return int(np.prod(self.samples))

    def axes(self) -> list[np.ndarray]:
        """Per-axis sample coordinates ``lo + j h``."""
        return [lo + h * np.arange(n) for (lo, _), h, n in zip(self.box, self.spacing, self.samples)]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def points(self) -> np.ndarray:
        """All sample points as an array of shape ``(size, dim)``."""
        return np.stack([m.ravel() for m in self.mesh()], axis=-1)


@dataclass(frozen=True)
class SampledField:
    """Complex samples on a grid.

    ``partner`` records the grid a transformed field came from, so that the
    inverse transform lands back on the original spatial samples.
    """

    grid: Grid
    values: np.ndarray
    partner: Grid | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        if vals.size != self.grid.size:
            raise ValueError("value count does not match grid cell count")
        vals = vals.reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", vals)

    def with_values(self, values: np.ndarray) -> "SampledField":
        return SampledField(self.grid, values, self.partner)


@dataclass(frozen=True)
class SlopeFit:
    exponent: float
    intercept: float
    residual: float
    point_count: int


class NormValue(float):
    """A float carrying a ``quasi`` flag (set when 0 < p < 1)."""

    quasi: bool

    def __new__(cls, value: float, quasi: bool = False) -> "NormValue":
        obj = super().__new__(cls, value)
        obj.quasi = quasi
        return obj


def make_grid(box: Sequence[Sequence[float]], samples: Sequence[int]) -> Grid:
    return Grid(tuple((float(lo), float(hi)) for lo, hi in box), tuple(int(n) for n in samples))


def reciprocal_grid(grid: Grid) -> Grid:
    """Centred frequency grid with spacing ``1/(N h)`` and the same counts."""
    box = tuple((-0.5 / h, 0.5 / h) for h in grid.spacing)
    return Grid(box, grid.samples)


def dft_axis(values: np.ndarray, axis: int, src: tuple[float, float, int],
             dst: tuple[float, float, int], sign: int) -> np.ndarray:
    """Riemann-sum DFT along one axis between reciprocal uniform axes.

    ``src = (lo_x, h, n)`` and ``dst = (lo_y, dy, n)`` with ``h * dy * n = 1``;
    computes ``h * sum_j v_j exp(sign 2 pi i x_j y_k)``.
    """
    lo_x, h, n = src
    lo_y, dy, _ = dst
    j = np.arange(n)
    shape = [1] * values.ndim
    shape[axis] = n
    # phases reach ~n/2 cycles; reduce each term mod 1 before exponentiating
    pre_cycles = np.mod(j * math.fmod(h * lo_y, 1.0), 1.0)
    post_cycles = np.mod(math.fmod(lo_x * lo_y, 1.0) + np.mod(j * math.fmod(lo_x * dy, 1.0), 1.0), 1.0)
    pre = np.exp(sign * 2j * np.pi * pre_cycles).reshape(shape)
    post = (h * np.exp(sign * 2j * np.pi * post_cycles)).reshape(shape)
    work = values * pre
    if sign < 0:
        work = np.fft.fft(work, axis=axis)
    else:
        work = np.fft.ifft(work, axis=axis) * n
    return work * post


def transform(f: SampledField, direction: Literal["forward", "inverse"] = "forward",
              target: Grid | None = None) -> SampledField:
    """Riemann-sum Fourier transform.

    ``target`` defaults to the centred reciprocal grid, except that an inverse
    transform of a field produced by :func:`transform` returns to its partner grid.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"unknown direction {direction!r}")
    sign = -1 if direction == "forward" else 1
    src = f.grid
    if target is None:
        target = f.partner if (direction == "inverse" and f.partner is not None) else reciprocal_grid(src)
    if target.samples != src.samples:
        raise ValueError("target grid must have the same sample counts")
    for h, dy, n in zip(src.spacing, target.spacing, src.samples):
        if abs(h * dy * n - 1.0) > 1e-9:
            raise ValueError("target grid is not reciprocal to the source grid")
    vals = f.values
    for ax in range(src.dim):
        vals = dft_axis(
            vals, ax,
            (src.box[ax][0], src.spacing[ax], src.samples[ax]),
            (target.box[ax][0], target.spacing[ax], target.samples[ax]),
            sign,
        )
    return SampledField(target, vals, partner=src)


def lp_norm(f: SampledField, p: float) -> NormValue:
    """Grid-weighted L^p norm; ``p = inf`` gives the max modulus."""
    p = float(p)
    if not p > 0:
        raise ValueError("p must be positive")
    mod = np.abs(f.values)
    if math.isinf(p):
        return NormValue(float(mod.max()))
    total = f.grid.cell_volume * np.sum(mod ** p)
    return NormValue(float(total ** (1.0 / p)), quasi=p < 1)


def smooth_step(u: np.ndarray) -> np.ndarray:
    """C-infinity step: 1 for u <= 0, 0 for u >= 1."""
    u = np.asarray(u, dtype=float)

    def e(t: np.ndarray) -> np.ndarray:
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos])
        return out

    a, b = e(1.0 - u), e(u)
    return a / (a + b)


def bump_profile(t: np.ndarray, plateau: float = 0.0) -> np.ndarray:
    """Radial bump profile in ``t = |x - c| / r`` (see :func:`make_bump`)."""
    t = np.asarray(t, dtype=float)
    if plateau > 0:
        return smooth_step((t - plateau) / (1.0 - plateau))
    out = np.zeros_like(t)
    inside = t < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


def make_bump(grid: Grid, center: Sequence[float], radius: float,
              plateau: float = 0.0) -> SampledField:
    """Bump ``exp(1 - 1/(1 - t^2))`` with ``t = |x - c| / r``.

    With ``0 < plateau < 1`` the profile is instead identically 1 for
    ``t <= plateau`` and falls smoothly to 0 at ``t = 1``.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    if not 0 <= plateau < 1:
        raise ValueError("plateau must lie in [0, 1)")
    c = np.asarray(center, dtype=float)
    if c.shape != (grid.dim,):
        raise ValueError("center dimension does not match grid")
    gap = sum(max(lo - ci, 0.0, ci - hi) ** 2 for (lo, hi), ci in zip(grid.box, c))
    if math.sqrt(gap) >= radius:
        raise ValueError("bump support does not meet the grid box")
    r2 = sum((m - ci) ** 2 for m, ci in zip(grid.mesh(), c))
    return SampledField(grid, bump_profile(np.sqrt(r2) / radius, plateau))


def _bump_inverse_ft(x: np.ndarray, half_width: float, nodes: int = 513) -> np.ndarray:
    # inverse transform of the even 1D bump supported on [-half_width, half_width]
    xi = np.linspace(-half_width, half_width, nodes)
    w = bump_profile(np.abs(xi) / half_width, 0.0)
    dxi = xi[1] - xi[0]
    return (np.cos(2 * np.pi * np.outer(x, xi)) @ w) * dxi


def make_majorant(R: float, grid: Grid, leakage_budget: float = 1e-8) -> SampledField:
    """Band-limited majorant of the square ``[-R, R]^2``.

    Built as a tensor product of squared inverse transforms of a 1D bump, so the
    transform is the autocorrelation of a compactly supported kernel and sits in a
    square inscribed in ``B(0, 1/R)``.  The result is scaled so that its minimum
    over ``[-R, R]^2`` equals 1.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    if grid.dim != 2:
        raise ValueError("majorant is defined on a 2D grid")
    for lo, hi in grid.box:
        if lo > -2 * R or hi < 2 * R:
            raise ValueError("grid box must contain [-2R, 2R]^2")
    # square half-width w has corners at sqrt(2) w < 1/R
    w = 0.98 / (math.sqrt(2.0) * R)
    half = w / 2
    edge = _bump_inverse_ft(np.array([R]), half)[0]
    factors = [(_bump_inverse_ft(ax, half) / edge) ** 2 for ax in grid.axes()]
    eta = np.multiply.outer(factors[0], factors[1])
    out = SampledField(grid, eta)
    spec = transform(out, "forward")
    k1, k2 = spec.grid.mesh()
    energy = np.abs(spec.values) ** 2
    leak = float(energy[np.hypot(k1, k2) > 1.0 / R].sum() / energy.sum())
    if leak > leakage_budget:
        raise ValueError(
            f"grid too small to resolve the 1/R frequency support (leakage {leak:.3e})"
        )
    return out


def sup_row_integral(f: SampledField) -> float:
    """``int sup_{x1} |f(x1, x2)|^2 dx2`` on a 2D grid."""
    if f.grid.dim != 2:
        raise ValueError("expects a 2D field")
    return float(np.max(np.abs(f.values) ** 2, axis=0).sum() * f.grid.spacing[1])


def fit_slope(points: Iterable[tuple[float, float]]) -> SlopeFit:
    """Least-squares line through ``(log x, log y)``."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two points")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise ValueError("coordinates must be positive and finite")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(lx) == 0:
        raise ValueError("abscissae must not all coincide")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.sum((ly - (slope * lx + intercept)) ** 2))
    return SlopeFit(float(slope), float(intercept), resid, int(pts.shape[0]))
