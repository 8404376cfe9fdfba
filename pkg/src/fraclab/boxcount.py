"""Box counting on origin-anchored dyadic meshes.

A point p lies in the cell with integer index floor((p - origin) * 2^m).
Scaling by a power of two is exact in binary floating point, so cell
indices at a coarser mesh are the finer indices shifted right.

Coordinates generated from a system carry rounding error, so there a
coordinate within BOUNDARY_TOL below a cell boundary is put on the
boundary.  Clouds passed in directly use the plain floor.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResourceError
from .ifs import (
    DEFAULT_IMAGE_BUDGET,
    PointCloud,
    discretize_images,
    iter_orbit_levels,
    _pack_rows,
)
from .parallel import resolve_threads, shard_map


BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class CountCurve:
    entries: dict
    origin: tuple = ()
    meta: dict = field(default_factory=dict)
    truncated: bool = False

    def __post_init__(self):
        ent = {int(m): int(n) for m, n in sorted(self.entries.items())}
        if any(n <= 0 for n in ent.values()):
            raise DomainError("counts must be positive")
        object.__setattr__(self, "entries", ent)

    @property
    def ms(self) -> np.ndarray:
        return np.array(list(self.entries), dtype=int)

    @property
    def counts(self) -> np.ndarray:
        return np.array(list(self.entries.values()), dtype=np.int64)

    def log2counts(self) -> np.ndarray:
        return np.log2(self.counts.astype(float))

    def to_csv(self, dest=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "delta", "count", "log2count"])
        for m, n in self.entries.items():
            w.writerow([m, repr(2.0**-m), n, repr(math.log2(n))])
        text = buf.getvalue()
        if dest is not None:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
        return text


@dataclass(frozen=True)
class DimensionEstimate:
    slope: float
    intercept: float
    window: tuple
    residual_max: float


@dataclass(frozen=True)
class RateFit:
    constant: float
    max_deviation: float
    max_abs: float
    values: dict


# ---------------------------------------------------------------- cells


def cell_indices(points: np.ndarray, m: int, origin=None, boundary_tol: float = 0.0) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if origin is not None:
        pts = pts - np.asarray(origin, dtype=float)
    if boundary_tol:
        pts = pts + boundary_tol
    scaled = np.floor(np.ldexp(pts, m))
    if np.any(np.abs(scaled) > 2.0**62):
        raise DomainError("cell index overflow; mesh too fine for coordinates")
    return scaled.astype(np.int64)


def _count_unique(cells: np.ndarray) -> int:
    packed = _pack_rows(cells)
    if packed is not None:
        return int(np.unique(packed).size)
    return int(np.unique(cells, axis=0).shape[0])


def _shards_by_first_axis(cells: np.ndarray, threads: int):
    if threads <= 1 or cells.shape[0] < 50_000:
        return [cells]
    sel = np.mod(cells[:, 0], threads)
    shards = [cells[sel == t] for t in range(threads)]
    return [c for c in shards if c.shape[0]]


def count_boxes(cloud, m: int, origin=None, threads: int | None = None, boundary_tol: float = 0.0) -> int:
    """Number of half-open 2^-m mesh cells containing at least one point."""
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] == 0:
        raise DomainError("cannot count an empty cloud")
    if m < 0:
        raise DomainError("mesh exponent must be nonnegative")
    cells = cell_indices(pts, m, origin, boundary_tol)
    # shards are disjoint in cell space, so the union is a plain sum
    parts = shard_map(_count_unique, _shards_by_first_axis(cells, resolve_threads(threads)), resolve_threads(threads))
    return int(sum(parts))


# ---------------------------------------------------------------- runs


class RunSet:
    """Union of axis-aligned runs of cells at a fixed finest exponent.

    A run is a fixed cell in all but the last coordinate together with an
    inclusive interval [lo, hi] of cells in the last coordinate.
    """

    def __init__(self, d: int, m: int, compact_every: int = 4_000_000):
        self.d = d
        self.m = m
        self._parts = []
        self._pending = 0
        self._compact_every = compact_every
        self._base = (np.zeros((0, d - 1), np.int64), np.zeros(0, np.int64), np.zeros(0, np.int64))

    def add(self, cols: np.ndarray, lo: np.ndarray, hi: np.ndarray):
        if lo.size == 0:
            return
        self._parts.append((cols, lo, hi))
        self._pending += lo.size
        if self._pending > self._compact_every:
            self.compact()

    def add_cells(self, cells: np.ndarray):
        self.add(cells[:, :-1], cells[:, -1], cells[:, -1])

    def _all(self):
        cols = np.concatenate([self._base[0]] + [p[0] for p in self._parts])
        lo = np.concatenate([self._base[1]] + [p[1] for p in self._parts])
        hi = np.concatenate([self._base[2]] + [p[2] for p in self._parts])
        return cols, lo, hi

    def compact(self):
        self._base = _merge_runs(*self._all())
        self._parts = []
        self._pending = 0

    def count(self, m: int | None = None, threads: int | None = None) -> int:
        """Cell count at exponent m <= finest exponent."""
        self.compact()
        cols, lo, hi = self._base
        if lo.size == 0:
            return 0
        m = self.m if m is None else m
        if m > self.m:
            raise DomainError(f"runs were built at exponent {self.m}; cannot count at {m}")
        k = self.m - m
        if not k:
            return int(np.sum(hi - lo + 1))
        cols, lo, hi = cols >> k, lo >> k, hi >> k
        n_threads = resolve_threads(threads)
        if n_threads > 1 and cols.shape[1] and lo.size > 50_000:
            # runs with different keys never merge, so shard by key
            sel = np.mod(cols[:, 0], n_threads)
            shards = [np.flatnonzero(sel == t) for t in range(n_threads)]
        else:
            shards = [np.arange(lo.size)]

        def one(ix):
            _, a, b = _merge_runs(cols[ix], lo[ix], hi[ix])
            return int(np.sum(b - a + 1))

        return int(sum(shard_map(one, shards, n_threads)))


def _merge_runs(cols, lo, hi):
    """Canonical disjoint, non-adjacent runs sorted by (cols, lo)."""
    n = lo.size
    if n == 0:
        return cols, lo, hi
    if cols.shape[1] == 0:
        key = np.zeros(n, dtype=np.int64)
    else:
        key = _pack_rows(cols)
        if key is None:
            _, key = np.unique(cols, axis=0, return_inverse=True)
            key = key.reshape(-1).astype(np.int64)
    order = np.lexsort((lo, key))
    key, lo, hi, cols = key[order], lo[order], hi[order], cols[order]
    new_group = np.ones(n, dtype=bool)
    new_group[1:] = key[1:] != key[:-1]
    gid = np.cumsum(new_group) - 1
    base = int(lo.min()) - 2
    width = int(hi.max()) - base + 2
    if (int(gid[-1]) + 1) * width > 2**62:
        raise ResourceError("run merge key overflow")
    v = gid * width + (hi - base)
    cm = np.maximum.accumulate(v)
    prev_hi = np.empty(n, dtype=np.int64)
    prev_hi[0] = base
    prev_hi[1:] = cm[:-1] - gid[1:] * width + base
    prev_hi[new_group] = base
    start = new_group | (lo > prev_hi + 1)
    idx = np.flatnonzero(start)
    return cols[idx], lo[idx], np.maximum.reduceat(hi, idx)


def images_to_runs(runs: RunSet, images: np.ndarray, kind: str | None, spacing: float, origin=None):
    """Add the cells met by a batch of condensation images."""
    m = runs.m
    n, a, d = images.shape
    if kind in ("segment", "polyline") and a > 1:
        p = images[:, :-1, :].reshape(-1, d)
        q = images[:, 1:, :].reshape(-1, d)
        pc = cell_indices(p, m, origin, BOUNDARY_TOL)
        qc = cell_indices(q, m, origin, BOUNDARY_TOL)
        straight = np.all(pc[:, :-1] == qc[:, :-1], axis=1)
        if np.any(straight):
            # coordinates vary monotonically along a segment, so every cell
            # between the end cells in the last coordinate is met
            lo = np.minimum(pc[straight, -1], qc[straight, -1])
            hi = np.maximum(pc[straight, -1], qc[straight, -1])
            runs.add(pc[straight, :-1], lo, hi)
        if not np.all(straight):
            bent = ~straight
            seg = np.stack([p[bent], q[bent]], axis=1)
            runs.add_cells(cell_indices(discretize_images(seg, "segment", spacing), m, origin, BOUNDARY_TOL))
    else:
        runs.add_cells(cell_indices(images.reshape(-1, d), m, origin, BOUNDARY_TOL))


def _system_runs(system, m_fine: int, delta: float, origin, budget, tol):
    kind = system.condensation.kind if system.condensation is not None else None
    runs = RunSet(system.dimension, m_fine)
    depth = 0
    for depth, images in enumerate(iter_orbit_levels(system, delta, budget=budget, tol=tol)):
        images_to_runs(runs, images, kind, delta / 4, origin)
    return runs, depth


def _origin_tuple(origin, d):
    return tuple(float(v) for v in (np.zeros(d) if origin is None else np.asarray(origin, float)))


def count_curve(
    source,
    m_range,
    delta_matching: bool = False,
    *,
    origin=None,
    threads: int | None = None,
    budget: int = DEFAULT_IMAGE_BUDGET,
    tol: float = 1.0 / 16,
) -> CountCurve:
    """Box counts over a range of mesh exponents.

    ``source`` is a point cloud or a system.  For a system the orbital set
    is generated at delta = 2^-m: once at the finest m (coarser counts reuse
    the same cells) or, with ``delta_matching``, afresh for every m.
    """
    ms = sorted(int(m) for m in m_range)
    if not ms:
        raise DomainError("empty mesh range")
    if ms[0] < 0:
        raise DomainError("mesh exponents must be nonnegative")
    if isinstance(source, (PointCloud, np.ndarray)):
        cloud = source if isinstance(source, PointCloud) else PointCloud(source)
        org = _origin_tuple(origin, cloud.dimension)
        entries = {m: count_boxes(cloud, m, origin, threads) for m in ms}
        return CountCurve(entries, org, {"source": "cloud", "points": len(cloud)})
    name = getattr(source, "name", "system")
    org = _origin_tuple(origin, source.dimension)
    if not delta_matching:
        try:
            runs, depth = _system_runs(source, ms[-1], 2.0 ** -ms[-1], origin, budget, tol)
            entries = {m: runs.count(m, threads) for m in ms}
            return CountCurve(
                entries, org, {"source": name, "delta_matching": False, "generated_at": ms[-1], "depth": depth}
            )
        except ResourceError:
            pass
    entries, notes = {}, {}
    truncated = False
    for m in ms:
        try:
            runs, depth = _system_runs(source, m, 2.0**-m, origin, budget, tol)
        except ResourceError:
            truncated = True
            break
        entries[m] = runs.count(m, threads)
        notes[m] = f"regenerated at delta=2^-{m}, depth {depth}"
    if not entries:
        raise ResourceError(f"budget exceeded already at m={ms[0]}")
    return CountCurve(entries, org, {"source": name, "delta_matching": True, "per_m": notes}, truncated)


# ---------------------------------------------------------------- fits


def default_window(curve: CountCurve) -> tuple[int, int]:
    ms = curve.ms
    if ms.size >= 6:
        return int(ms[2]), int(ms[-2])
    return int(ms[0]), int(ms[-1])


def estimate_dimension(curve: CountCurve, window=None) -> DimensionEstimate:
    """Least-squares slope of log2 N against m over the window (inclusive)."""
    lo, hi = default_window(curve) if window is None else (int(window[0]), int(window[1]))
    if lo >= hi:
        raise DomainError("window must satisfy m_lo < m_hi")
    ms = curve.ms
    sel = (ms >= lo) & (ms <= hi)
    if sel.sum() < 3:
        raise DomainError("window needs at least three scales")
    x = ms[sel].astype(float)
    y = curve.log2counts()[sel]
    design = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    return DimensionEstimate(float(slope), float(intercept), (lo, hi), float(np.max(np.abs(resid))))


def fit_rate(curve: CountCurve, dim_limit: float, window=None) -> RateFit:
    """Fit (log2 N(m)/m - dim) * m to a constant."""
    ms = curve.ms
    if window is not None:
        ms = ms[(ms >= window[0]) & (ms <= window[1])]
    if ms.size < 5:
        raise DomainError("rate fit needs at least five scales")
    vals = {int(m): math.log2(curve.entries[int(m)]) - dim_limit * m for m in ms}
    arr = np.array(list(vals.values()))
    const = float(arr.mean())
    return RateFit(const, float(np.max(np.abs(arr - const))), float(np.max(np.abs(arr))), vals)


@dataclass(frozen=True)
class MinkowskiCheck:
    holds: bool
    n_sum: int
    n_x: int
    n_y: int
    bound: int


def minkowski_sum_check(x: PointCloud, y: PointCloud, m: int, origin=None, chunk: int = 2_000_000) -> MinkowskiCheck:
    """Check N(X+Y) <= 2^d N(X) N(Y) at mesh 2^-m."""
    xp = x.points if isinstance(x, PointCloud) else np.atleast_2d(np.asarray(x, float))
    yp = y.points if isinstance(y, PointCloud) else np.atleast_2d(np.asarray(y, float))
    if xp.shape[1] != yp.shape[1]:
        raise DomainError("clouds must share a dimension")
    d = xp.shape[1]
    rows = max(1, chunk // max(1, yp.shape[0]))
    cells = []
    for i in range(0, xp.shape[0], rows):
        s = (xp[i : i + rows, None, :] + yp[None, :, :]).reshape(-1, d)
        c = cell_indices(s, m, origin)
        cells.append(np.unique(c, axis=0))
    n_sum = _count_unique(np.concatenate(cells))
    n_x = count_boxes(xp, m, origin)
    n_y = count_boxes(yp, m, origin)
    bound = 2**d * n_x * n_y
    return MinkowskiCheck(n_sum <= bound, n_sum, n_x, n_y, bound)
