"""Dyadic cubes, Whitney decompositions, parabolic caps and cap projections."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .spectral import SampledField, transform

__all__ = [
    "DyadicCube",
    "CubePair",
    "ParabolicCap",
    "WhitneyDecomposition",
    "CapSeparation",
    "IntervalPartition",
    "interiors_disjoint",
    "cube_distance",
    "whitney_decompose",
    "whitney_pairs",
    "cap_separation_test",
    "cap_hypothesis",
    "partition_interval",
    "cap_project",
    "cap_mask",
    "cap_ball_radius",
]


@dataclass(frozen=True, order=True)
class DyadicCube:
    """``prod_j [l_j 2^k, (l_j + 1) 2^k]``."""

    level: int
    corner: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.corner)

    @property
    def side(self) -> float:
        return math.ldexp(1.0, self.level)

    @property
    def lo(self) -> np.ndarray:
        return np.array(self.corner, dtype=float) * self.side

    @property
    def hi(self) -> np.ndarray:
        return (np.array(self.corner, dtype=float) + 1.0) * self.side

    @property
    def center(self) -> np.ndarray:
        return (np.array(self.corner, dtype=float) + 0.5) * self.side

    def children(self) -> list["DyadicCube"]:
        out = []
        for bits in range(1 << self.dim):
            corner = tuple(2 * c + ((bits >> j) & 1) for j, c in enumerate(self.corner))
            out.append(DyadicCube(self.level - 1, corner))
        return out

    def volume_units(self, level: int) -> int:
        """Volume in units of level-``level`` cubes (exact integer)."""
        return 1 << (self.dim * (self.level - level))


@dataclass(frozen=True)
class CubePair:
    omega1: DyadicCube
    omega2: DyadicCube

    @property
    def level(self) -> int:
        return self.omega1.level

    @property
    def side(self) -> float:
        return self.omega1.side


def interiors_disjoint(a: DyadicCube, b: DyadicCube) -> bool:
    """Exact test by integer arithmetic at the finer level."""
    if a.dim != b.dim:
        raise ValueError("cubes of different dimension")
    if a.level > b.level:
        a, b = b, a
    scale = 1 << (b.level - a.level)
    for la, lb in zip(a.corner, b.corner):
        if not (lb * scale <= la < (lb + 1) * scale):
            return True
    return False


def cube_distance(lo1: np.ndarray, hi1: np.ndarray, lo2: np.ndarray, hi2: np.ndarray) -> float:
    """Euclidean distance between two closed boxes."""
    gap = np.maximum(0.0, np.maximum(np.asarray(lo1) - hi2, np.asarray(lo2) - hi1))
    return float(np.linalg.norm(gap))


@dataclass
class WhitneyDecomposition:
    """Emitted cubes plus the level-``k_min`` cubes left unresolved near S.

    Every point with ``d(x, S) >= coverage_constant * 2**k_min`` lies in an
    emitted cube.
    """

    cubes: list[DyadicCube]
    truncated: list[DyadicCube]
    k_min: int
    top_level: int
    coverage_constant: float
    upper_ratio: float = field(default=0.0)

    def __iter__(self) -> Iterator[DyadicCube]:
        return iter(self.cubes)

    def __len__(self) -> int:
        return len(self.cubes)

    def __getitem__(self, i):
        return self.cubes[i]


def _vectorized(oracle: Callable) -> Callable[[np.ndarray], np.ndarray]:
    def call(pts: np.ndarray) -> np.ndarray:
        try:
            out = np.asarray(oracle(pts), dtype=float)
            if out.shape == (len(pts),):
                return out
        except Exception:
            pass
        return np.array([float(oracle(p)) for p in pts])

    return call


def _alignment_level(box: Sequence[tuple[float, float]], k_min: int) -> int:
    longest = max(hi - lo for lo, hi in box)
    k = int(math.floor(math.log2(longest)))
    while k >= k_min:
        unit = Fraction(2) ** k
        if all((Fraction(lo) / unit).denominator == 1 and (Fraction(hi) / unit).denominator == 1
               for lo, hi in box):
            return k
        k -= 1
    raise ValueError("box is not dyadically alignable at levels >= k_min")


def _lipschitz_spot_check(dist: Callable, box: Sequence[tuple[float, float]], checks: int,
                          seed: int) -> None:
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    x = rng.uniform(lo, hi, size=(checks, len(box)))
    y = x + rng.normal(scale=0.05 * (hi - lo), size=x.shape)
    dx, dy = dist(x), dist(y)
    if np.any(dx < 0) or np.any(dy < 0):
        raise ValueError("distance oracle returned a negative value")
    gap = np.abs(dx - dy) - np.linalg.norm(x - y, axis=1)
    if np.any(gap > 1e-9):
        raise ValueError("distance oracle is not 1-Lipschitz")


def whitney_decompose(distance_oracle: Callable, box: Sequence[Sequence[float]], k_min: int,
                      lipschitz_checks: int = 256, seed: int = 0) -> WhitneyDecomposition:
    """Maximal dyadic cubes with ``d(Q, S) >= 4 l(Q)`` certified by the oracle.

    A cube is accepted when ``d(center, S) - halfdiag >= 4 l``, a lower bound
    for ``d(Q, S)`` valid for any 1-Lipschitz oracle.  Maximality then gives
    ``d(Q, S) < (8 + 1.5 sqrt(m)) l`` for every cube below the top level.
    """
    b = [(float(lo), float(hi)) for lo, hi in box]
    m = len(b)
    if any(not lo < hi for lo, hi in b):
        raise ValueError("degenerate box")
    dist = _vectorized(distance_oracle)
    _lipschitz_spot_check(dist, b, lipschitz_checks, seed)
    top = _alignment_level(b, k_min)
    unit = math.ldexp(1.0, top)
    ranges = [range(int(round(lo / unit)), int(round(hi / unit))) for lo, hi in b]
    frontier = [DyadicCube(top, tuple(c)) for c in np.ndindex(*[len(r) for r in ranges])]
    frontier = [DyadicCube(top, tuple(r[i] for r, i in zip(ranges, c.corner))) for c in frontier]
    emitted: list[DyadicCube] = []
    truncated: list[DyadicCube] = []
    root_m = math.sqrt(m)
    level = top
    while frontier:
        side = math.ldexp(1.0, level)
        centers = np.array([c.center for c in frontier])
        lower = dist(centers) - 0.5 * root_m * side
        nxt = []
        for cube, lb in zip(frontier, lower):
            if lb >= 4.0 * side:
                emitted.append(cube)
            elif level > k_min:
                nxt.extend(cube.children())
            else:
                truncated.append(cube)
        frontier = nxt
        level -= 1
    emitted.sort()
    truncated.sort()
    return WhitneyDecomposition(emitted, truncated, k_min, top, 4.0 + root_m, 8.0 + 1.5 * root_m)


def whitney_pairs(d: int, k_min: int) -> list[CubePair]:
    """Diagonal Whitney decomposition of ``[-1, 1]^d x [-1, 1]^d``."""
    if d < 1:
        raise ValueError("d must be positive")

    def diag(pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.linalg.norm(pts[:, :d] - pts[:, d:], axis=1) / math.sqrt(2.0)

    dec = whitney_decompose(diag, [(-1.0, 1.0)] * (2 * d), k_min)
    return [CubePair(DyadicCube(c.level, c.corner[:d]), DyadicCube(c.level, c.corner[d:]))
            for c in dec.cubes]


# ---------------------------------------------------------------------------
# parabolic caps


@dataclass(frozen=True)
class ParabolicCap:
    """``N_I(sigma) = {(xi, xi^2 + t) : xi in [a, a + delta], |t| <= sigma}``."""

    a: float
    delta: float
    sigma: float

    def __post_init__(self) -> None:
        if not (self.delta > 0 and self.sigma > 0):
            raise ValueError("delta and sigma must be positive")

    @property
    def interval(self) -> tuple[float, float]:
        return (self.a, self.a + self.delta)

    @property
    def midpoint(self) -> float:
        return self.a + 0.5 * self.delta


def cap_ball_radius(cap: ParabolicCap) -> float:
    """Max distance from ``(c, c^2)`` to the cap, attained on its corners."""
    c = cap.midpoint
    best = 0.0
    for xi in (cap.a, cap.a + cap.delta):
        for t in (-cap.sigma, cap.sigma):
            best = max(best, math.hypot(xi - c, xi * xi + t - c * c))
    return best


def cap_mask(xi1: np.ndarray, xi2: np.ndarray, cap: ParabolicCap) -> np.ndarray:
    """Bin-centre membership; the interval is taken half-open on the right so a
    partition of J tiles exactly."""
    lo, hi = cap.interval
    return (xi1 >= lo) & (xi1 < hi) & (np.abs(xi2 - xi1 ** 2) <= cap.sigma)


def cap_project(f: SampledField, cap: ParabolicCap) -> SampledField:
    """Fourier projection of a 2D field onto the cap."""
    if f.grid.dim != 2:
        raise ValueError("cap projection needs a 2-dimensional field")
    spec = transform(f, "forward")
    (l1, h1), (l2, h2) = spec.grid.box
    lo, hi = cap.interval
    top = max(lo * lo, hi * hi) + cap.sigma
    bottom = (0.0 if lo <= 0 <= hi else min(lo * lo, hi * hi)) - cap.sigma
    if lo < l1 or hi > h1 or bottom < l2 or top > h2:
        raise ValueError("cap lies outside the frequency box")
    k1, k2 = spec.grid.mesh()
    masked = spec.with_values(np.where(cap_mask(k1, k2, cap), spec.values, 0.0))
    return transform(masked, "inverse")


# ---------------------------------------------------------------------------
# interval partitions


@dataclass(frozen=True)
class IntervalPartition:
    intervals: list[tuple[float, float]]
    families: list[list[tuple[float, float]]]
    shortened: bool


def partition_interval(J: Sequence[float], delta: float, N: int) -> IntervalPartition:
    """Consecutive delta-intervals of J, split into N+1 families by index mod N+1."""
    a, b = float(J[0]), float(J[1])
    if not delta > 0 or delta >= b - a:
        raise ValueError("delta must be positive and smaller than |J|")
    if N < 1:
        raise ValueError("N must be a positive integer")
    count = int(math.floor((b - a) / delta + 1e-9))
    intervals = [(a + k * delta, a + (k + 1) * delta) for k in range(count)]
    shortened = False
    if intervals[-1][1] < b - 1e-12 * max(1.0, abs(b)):
        intervals.append((intervals[-1][1], b))
        shortened = True
    else:
        intervals[-1] = (intervals[-1][0], b)
    families = [[iv for k, iv in enumerate(intervals) if k % (N + 1) == r] for r in range(N + 1)]
    return IntervalPartition(intervals, families, shortened)


# ---------------------------------------------------------------------------
# difference sets of caps


@dataclass(frozen=True)
class CapSeparation:
    disjoint: bool
    witness: tuple[float, float] | None
    min_gap: float
    threshold: float
    hypothesis: str
    ball_certificate: bool
    mc_witness: bool
    mc_agrees: bool


def _gap(d: float) -> float:
    return max(0.0, d)


def _interval_distance(p: tuple[float, float], q: tuple[float, float]) -> float:
    return _gap(max(q[0] - p[1], p[0] - q[1]))


def cap_hypothesis(I1, I1p, I2, I2p, delta: float, N: float) -> str:
    """Which hypothesis shape of the separation statement holds."""
    d1 = _interval_distance(I1, I1p)
    d2 = _interval_distance(I2, I2p)
    tol = 1e-12
    if tuple(I1) == tuple(I1p) and d2 >= N * delta - tol:
        return "i"
    if d1 >= N * delta - tol and d2 >= N * delta - tol:
        return "ii-both"
    if max(d1, d2) >= N * delta - tol:
        return "ii-max"
    return "none"


def _difference_gap(I1, I1p, I2, I2p) -> tuple[float, float, float, float] | None:
    """Exact ``min |v| dist(A(v), B(v))`` over common differences v.

    ``A(v) = I1 cap (I1' + v)`` and ``B(v) = I2 cap (I2' + v)``.  Returns the
    minimum with an optimal ``(v, a, b)`` or ``None`` when no common difference
    exists.
    """
    lo = max(I1[0] - I1p[1], I2[0] - I2p[1])
    hi = min(I1[1] - I1p[0], I2[1] - I2p[0])
    if lo > hi:
        return None

    def parts(v: float):
        A = (max(I1[0], I1p[0] + v), min(I1[1], I1p[1] + v))
        B = (max(I2[0], I2p[0] + v), min(I2[1], I2p[1] + v))
        return A, B

    def g(v: float) -> tuple[float, float, float]:
        A, B = parts(v)
        if B[0] > A[1]:
            a, b = A[1], B[0]
        elif A[0] > B[1]:
            a, b = A[0], B[1]
        else:
            a = b = max(A[0], B[0])
        return abs(v) * abs(a - b), a, b

    cand = {lo, hi}
    if lo <= 0.0 <= hi:
        cand.add(0.0)
    # kinks of the endpoint functions and zero crossings of the gap
    for p in (I1[0] - I1p[0], I1[1] - I1p[1], I2[0] - I2p[0], I2[1] - I2p[1]):
        cand.add(p)
    lo_b = [(I2[0], 0.0), (I2p[0], 1.0)]
    hi_a = [(I1[1], 0.0), (I1p[1], 1.0)]
    lo_a = [(I1[0], 0.0), (I1p[0], 1.0)]
    hi_b = [(I2[1], 0.0), (I2p[1], 1.0)]
    for first, second in ((lo_b, hi_a), (lo_a, hi_b)):
        for c1, s1 in first:
            for c2, s2 in second:
                if s1 != s2:
                    cand.add((c2 - c1) / (s1 - s2))
    pts = sorted(v for v in cand if lo <= v <= hi)
    best = (math.inf, 0.0, 0.0, 0.0)
    # zero first so that ties resolve to the origin
    for v in ([0.0] if lo <= 0.0 <= hi else []) + pts:
        val, a, b = g(v)
        if val < best[0]:
            best = (val, v, a, b)
    # quadratic pieces between consecutive breakpoints: check the vertex
    for p, q in zip(pts[:-1], pts[1:]):
        if q - p <= 0:
            continue
        m = 0.5 * (p + q)
        gp, gm, gq = g(p)[0], g(m)[0], g(q)[0]
        curv = gp - 2 * gm + gq
        if curv > 0:
            t = 0.5 + 0.25 * (gp - gq) / curv
            if 0.0 < t < 1.0:
                v = p + t * (q - p)
                val, a, b = g(v)
                if val < best[0]:
                    best = (val, v, a, b)
    return best


def _mc_search(I1, I1p, I2, I2p, sigma: float, samples: int, rng: np.random.Generator) -> bool:
    """Sample points of each difference set and test exact membership in the other."""

    half = max(1, samples // 2)

    def sample_and_test(P, Pp, Q, Qp) -> bool:
        a = rng.uniform(P[0], P[1], half)
        ap = rng.uniform(Pp[0], Pp[1], half)
        s = rng.uniform(-2 * sigma, 2 * sigma, half)
        v = a - ap
        y = a * a - ap * ap + s
        b_lo = np.maximum(Q[0], Qp[0] + v)
        b_hi = np.minimum(Q[1], Qp[1] + v)
        ok = b_lo <= b_hi
        # second coordinate v(2b - v) is monotone in b
        e1 = v * (2 * b_lo - v)
        e2 = v * (2 * b_hi - v)
        lo_y = np.minimum(e1, e2) - 2 * sigma
        hi_y = np.maximum(e1, e2) + 2 * sigma
        return bool(np.any(ok & (y >= lo_y) & (y <= hi_y)))

    return sample_and_test(I1, I1p, I2, I2p) or sample_and_test(I2, I2p, I1, I1p)


def cap_separation_test(I1, I1p, I2, I2p, delta: float, N: float = 10.0,
                        samples: int = 100_000, seed: int = 0) -> CapSeparation:
    """Decide whether ``(N_I1 - N_I1') cap (N_I2 - N_I2') = empty`` at thickness delta^2.

    A point of the first difference set is ``(v, v (2a - v) + s)`` with
    ``v = a - a'`` and ``|s| <= 2 delta^2``, so the sets meet exactly when some
    common difference v admits ``|v| |a - b| <= 2 delta^2``.  That minimum is
    computed exactly; Monte Carlo sampling of both sets cross-checks it.
    """
    ivs = [tuple(float(t) for t in iv) for iv in (I1, I1p, I2, I2p)]
    if not 0 < delta <= 1.0 / 16:
        raise ValueError("delta must lie in (0, 1/16]")
    for iv in ivs:
        if abs((iv[1] - iv[0]) - delta) > 1e-12:
            raise ValueError("every interval must have length delta")
    sigma = delta * delta
    threshold = 2.0 * sigma
    hyp = cap_hypothesis(*ivs, delta, N)
    # ball containment: each difference set lies in a ball of radius 4 delta
    c = [0.5 * (iv[0] + iv[1]) for iv in ivs]
    p1 = np.array([c[0] - c[1], c[0] ** 2 - c[1] ** 2])
    p2 = np.array([c[2] - c[3], c[2] ** 2 - c[3] ** 2])
    ball_cert = bool(np.linalg.norm(p1 - p2) > 8.0 * delta)
    res = _difference_gap(*ivs)
    if res is None:
        disjoint, witness, gap = True, None, math.inf
    else:
        gap, v, a, b = res
        disjoint = gap > threshold * (1 + 1e-12)
        witness = None
        if not disjoint:
            y1, y2 = v * (2 * a - v), v * (2 * b - v)
            witness = (float(v), float(0.5 * (y1 + y2)))
    rng = np.random.default_rng(seed)
    mc = _mc_search(*ivs, sigma, samples, rng) if samples > 0 else False
    agrees = (not mc) if disjoint else True
    return CapSeparation(disjoint, witness, float(gap), threshold, hyp, ball_cert, mc, agrees)
