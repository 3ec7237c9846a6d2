"""Dual boxes, wave-packet frames on a periodic grid and box intersection volumes.

A packet family for a frequency box B lives on a spatial grid whose frequency
bins tile 2B exactly.  Tiles T are dual to 2B and their centres ``u_T`` form a
lattice covering the grid's period, so analysis followed by synthesis is an exact
finite Fourier series on the bins of 2B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from .spectral import Grid, SampledField, make_grid, smooth_step, transform

__all__ = [
    "OrientedBox",
    "PacketFamily",
    "PacketCoefficients",
    "OverlapResult",
    "dual_box",
    "packet_family",
    "packet",
    "packet_transform",
    "synthesize",
    "overlap_volume",
    "rotation_2d",
    "box_mass_outside",
]


@dataclass(frozen=True)
class OrientedBox:
    center: tuple[float, ...]
    axes: tuple[tuple[float, ...], ...]  # columns are directions, stored row-major
    half_lengths: tuple[float, ...]

    def __post_init__(self) -> None:
        a = self.axis_matrix
        n = len(self.center)
        if a.shape != (n, n) or len(self.half_lengths) != n:
            raise ValueError("inconsistent box dimensions")
        if not np.allclose(a.T @ a, np.eye(n), atol=1e-12):
            raise ValueError("axes must be orthonormal")
        if any(not h > 0 for h in self.half_lengths):
            raise ValueError("half lengths must be positive")

    @staticmethod
    def make(center: Sequence[float], axes: np.ndarray | None, half_lengths: Sequence[float]) -> "OrientedBox":
        n = len(center)
        a = np.eye(n) if axes is None else np.asarray(axes, dtype=float)
        return OrientedBox(tuple(float(c) for c in center), tuple(tuple(map(float, r)) for r in a),
                           tuple(float(h) for h in half_lengths))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def axis_matrix(self) -> np.ndarray:
        return np.asarray(self.axes, dtype=float)

    @property
    def sides(self) -> np.ndarray:
        return 2.0 * np.asarray(self.half_lengths)

    @property
    def volume(self) -> float:
        return float(np.prod(self.sides))

    def scaled(self, factor: float) -> "OrientedBox":
        return OrientedBox(self.center, self.axes, tuple(factor * h for h in self.half_lengths))

    def local(self, pts: np.ndarray) -> np.ndarray:
        """Coordinates along the box axes relative to the centre."""
        return (np.asarray(pts) - np.asarray(self.center)) @ self.axis_matrix

    def contains(self, pts: np.ndarray) -> np.ndarray:
        loc = self.local(pts)
        return np.all(np.abs(loc) <= np.asarray(self.half_lengths), axis=-1)

    def long_axis(self) -> np.ndarray:
        return self.axis_matrix[:, int(np.argmax(self.half_lengths))]


def rotation_2d(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def dual_box(B: OrientedBox) -> OrientedBox:
    """Same axes, centred at 0, reciprocal side lengths."""
    return OrientedBox(tuple(0.0 for _ in B.center), B.axes,
                       tuple(1.0 / (4.0 * h) for h in B.half_lengths))


@dataclass(frozen=True)
class PacketFamily:
    base: OrientedBox
    grid: Grid
    tile: OrientedBox  # dual of 2B, centred at 0
    offsets: tuple[np.ndarray, ...]  # per-axis tile centres
    block: tuple[np.ndarray, ...]  # per-axis indices of frequency bins in 2B
    window: tuple[np.ndarray, ...]  # per-axis cutoff on the block bins

    @property
    def count(self) -> int:
        return int(np.prod([len(o) for o in self.offsets]))

    @property
    def tile_volume(self) -> float:
        return self.tile.volume

    def centers(self) -> np.ndarray:
        mesh = np.meshgrid(*self.offsets, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def tiles(self) -> list[OrientedBox]:
        return [OrientedBox(tuple(map(float, c)), self.tile.axes, self.tile.half_lengths)
                for c in self.centers()]


@dataclass(frozen=True)
class PacketCoefficients:
    centers: np.ndarray
    values: np.ndarray  # tensor indexed like the per-axis offsets

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))


def _axis_aligned(B: OrientedBox) -> bool:
    a = np.abs(B.axis_matrix)
    return bool(np.allclose(a, np.eye(B.dim), atol=1e-12))


def packet_family(B: OrientedBox, extent: Sequence[Sequence[float]],
                  samples: Sequence[int] | None = None) -> PacketFamily:
    """Wave packets for the frequency box B over a periodic spatial extent.

    The window is a product of smooth cutoffs, equal to 1 on B and vanishing
    outside 2B.  The extent must make 2B span a power-of-two number of
    frequency bins per axis, starting on a bin boundary.
    """
    if not _axis_aligned(B):
        raise ValueError("packet frames need a frequency box aligned with the grid axes")
    ext = [(float(lo), float(hi)) for lo, hi in extent]
    if len(ext) != B.dim or any(not lo < hi for lo, hi in ext):
        raise ValueError("degenerate extent")
    if samples is None:
        samples = []
        for (lo, hi), c, h in zip(ext, B.center, B.half_lengths):
            need = 2.0 * (abs(c) + 2 * h) * (hi - lo) + 2
            samples.append(1 << max(1, int(math.ceil(math.log2(need)))))
    grid = make_grid(ext, samples)
    freq_axes = [lo + dx * np.arange(n) for (lo, _), dx, n in
                 zip(((-0.5 / h, 0.5 / h) for h in grid.spacing),
                     (1.0 / (hi - lo) for lo, hi in ext), grid.samples)]
    offsets, block, window = [], [], []
    for k, ((lo, hi), c, h) in enumerate(zip(ext, B.center, B.half_lengths)):
        L = hi - lo
        K_float = 4.0 * h * L
        K = int(round(K_float))
        if abs(K - K_float) > 1e-9 or K < 1 or (K & (K - 1)) or grid.samples[k] % K:
            raise ValueError(f"axis {k}: 2B must span a power-of-two bin count dividing the samples")
        start = (c - 2 * h) * L
        if abs(start - round(start)) > 1e-9:
            raise ValueError(f"axis {k}: 2B must start on a frequency bin boundary")
        xi = freq_axes[k]
        idx = np.nonzero((xi >= c - 2 * h - 1e-12 / L) & (xi < c + 2 * h - 1e-12 / L))[0]
        if len(idx) != K:
            raise ValueError(f"axis {k}: 2B is not inside the resolved frequency range")
        block.append(idx)
        window.append(smooth_step(np.abs(xi[idx] - c) / h - 1.0))
        offsets.append(lo + (L / K) * np.arange(K))
    tile = dual_box(B.scaled(2.0))
    return PacketFamily(B, grid, tile, tuple(offsets), tuple(block), tuple(window))


def _phase_matrices(family: PacketFamily, sign: int) -> list[np.ndarray]:
    freq = transform(SampledField(family.grid, np.zeros(family.grid.shape)), "forward").grid.axes()
    mats = []
    for k in range(family.grid.dim):
        xi = freq[k][family.block[k]]
        mats.append(np.exp(sign * 2j * np.pi * np.outer(family.offsets[k], xi)))
    return mats


def box_mass_outside(F: SampledField, box: OrientedBox) -> float:
    """Relative transform energy of F outside ``box``."""
    spec = transform(F, "forward")
    pts = np.stack([m.ravel() for m in spec.grid.mesh()], axis=-1)
    inside = box.contains(pts).reshape(spec.grid.shape)
    energy = np.abs(spec.values) ** 2
    total = energy.sum()
    return float(energy[~inside].sum() / total) if total > 0 else 0.0


def packet(family: PacketFamily, index: Sequence[int]) -> SampledField:
    """The packet ``W_T`` for the tile with per-axis index ``index``."""
    spec = np.zeros(family.grid.shape, dtype=complex)
    freq = transform(SampledField(family.grid, spec), "forward")
    axes = freq.grid.axes()
    amp = math.sqrt(family.tile_volume)
    factors = []
    for k, i in enumerate(index):
        xi = axes[k][family.block[k]]
        factors.append(np.exp(-2j * np.pi * family.offsets[k][i] * xi) * family.window[k])
    blockvals = factors[0]
    for f in factors[1:]:
        blockvals = np.multiply.outer(blockvals, f)
    spec[np.ix_(*family.block)] = amp * blockvals
    return transform(freq.with_values(spec), "inverse")


def packet_transform(F: SampledField, family: PacketFamily,
                     band_tol: float = 1e-8) -> tuple[PacketCoefficients, float]:
    """Coefficients ``w_T = <F, W_T>`` and the relative L2 reconstruction defect."""
    if F.grid != family.grid:
        raise ValueError("field must live on the family grid")
    if box_mass_outside(F, family.base) > band_tol:
        raise ValueError("field is not band-limited to B")
    spec = transform(F, "forward")
    G = spec.values[np.ix_(*family.block)]
    for k, wk in enumerate(family.window):
        shape = [1] * G.ndim
        shape[k] = -1
        G = G * wk.reshape(shape)
    dxi = float(np.prod(spec.grid.spacing))
    coeffs = G
    for k, mat in enumerate(_phase_matrices(family, +1)):
        coeffs = np.moveaxis(np.tensordot(mat, coeffs, axes=([1], [k])), 0, k)
    coeffs = coeffs * (dxi * math.sqrt(family.tile_volume))
    pc = PacketCoefficients(family.centers(), coeffs)
    rec = synthesize(pc, family)
    denom = float(np.linalg.norm(F.values))
    defect = float(np.linalg.norm(rec.values - F.values) / denom) if denom > 0 else 0.0
    return pc, defect


def synthesize(coeffs: PacketCoefficients, family: PacketFamily) -> SampledField:
    """``sum_T w_T W_T`` evaluated on the family grid."""
    acc = coeffs.values
    for k, mat in enumerate(_phase_matrices(family, -1)):
        acc = np.moveaxis(np.tensordot(mat.T, acc, axes=([1], [k])), 0, k)
    for k, wk in enumerate(family.window):
        shape = [1] * acc.ndim
        shape[k] = -1
        acc = acc * wk.reshape(shape)
    spec = transform(SampledField(family.grid, np.zeros(family.grid.shape)), "forward")
    full = np.zeros(family.grid.shape, dtype=complex)
    full[np.ix_(*family.block)] = acc * math.sqrt(family.tile_volume)
    return transform(spec.with_values(full), "inverse")


@dataclass(frozen=True)
class OverlapResult:
    volume: float
    angle: float
    transverse: bool
    samples: int


def overlap_volume(T1: OrientedBox, T2: OrientedBox, samples: int = 1 << 18,
                   seed: int = 0) -> OverlapResult:
    """Quasi-Monte Carlo volume of ``T1 cap T2`` and the angle between long axes.

    Points are drawn from a scrambled Sobol sequence in the smaller box, so the
    estimate is deterministic for a given seed.
    """
    if T1.dim != T2.dim:
        raise ValueError("boxes must share a dimension")
    small, big = (T1, T2) if T1.volume <= T2.volume else (T2, T1)
    m = int(math.ceil(math.log2(max(2, samples))))
    u = qmc.Sobol(d=small.dim, scramble=True, seed=seed).random_base2(m)
    local = (2.0 * u - 1.0) * np.asarray(small.half_lengths)
    pts = np.asarray(small.center) + local @ small.axis_matrix.T
    frac = float(np.mean(big.contains(pts)))
    cosang = abs(float(T1.long_axis() @ T2.long_axis()))
    angle = math.acos(min(1.0, cosang))
    aspect = max(min(b.half_lengths) / max(b.half_lengths) for b in (T1, T2))
    return OverlapResult(frac * small.volume, angle, angle >= aspect, 1 << m)
