"""Rotation orbits on the unit sphere and the attractor built from them.

The default generators are the rotations by arccos(3/5) about the z and x
axes together with their inverses; they generate a free group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boxcount import BOUNDARY_TOL, CountCurve, DimensionEstimate, count_boxes, count_curve, estimate_dimension
from .errors import DomainError, ResourceError
from .ifs import PointCloud, unique_rows

ORBIT_MESH_EXP = 20
DEFAULT_ORBIT_BUDGET = 50_000_000
# Kept images are exact images, so a loose merge tolerance only loses
# coverage: counts are lower bounds that settle quickly as tol shrinks.
SPHERE_TOL = 4.0


def rotation_from_axis_angle(axis, angle: float) -> np.ndarray:
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * kx + (1 - math.cos(angle)) * (kx @ kx)


def _rz(c, s):
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rx(c, s):
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


@dataclass(frozen=True, eq=False)
class RotationSet:
    generators: tuple
    include_inverses: bool = True

    def __post_init__(self):
        gens = tuple(np.array(g, dtype=float) for g in self.generators)
        if not gens:
            raise DomainError("need at least one generator")
        d = gens[0].shape[0]
        for g in gens:
            if g.shape != (d, d):
                raise DomainError("generators must be square and of one size")
            if np.max(np.abs(g @ g.T - np.eye(d))) > 1e-12:
                raise DomainError("generator is not orthogonal")
            if abs(np.linalg.det(g) - 1.0) > 1e-12:
                raise DomainError("generator must have determinant 1")
            g.setflags(write=False)
        object.__setattr__(self, "generators", gens)

    @property
    def dimension(self) -> int:
        return self.generators[0].shape[0]

    def alphabet(self) -> list[np.ndarray]:
        out = list(self.generators)
        if self.include_inverses:
            out += [g.T for g in self.generators]
        return out


def default_generators() -> RotationSet:
    return RotationSet((_rz(0.6, 0.8), _rx(0.6, 0.8)), include_inverses=True)


def commuting_generators() -> RotationSet:
    """Rotations by theta and 2 theta about the z axis (cos theta = 3/5)."""
    return RotationSet((_rz(0.6, 0.8), _rz(-0.28, 0.96)), include_inverses=True)


def _unit(x, d):
    x = np.eye(d)[0] if x is None else np.asarray(x, dtype=float)
    if x.shape != (d,) or abs(np.linalg.norm(x) - 1.0) > 1e-12:
        raise DomainError("x must be a unit vector of the generators' dimension")
    return x


def iter_orbit(rot: RotationSet, x, n: int, mesh_exp: int = ORBIT_MESH_EXP, budget: int = DEFAULT_ORBIT_BUDGET):
    """Yield G^0(x), ..., G^n(x), each deduplicated on the 2^-mesh_exp mesh."""
    d = rot.dimension
    x = _unit(x, d)
    alphabet = rot.alphabet()
    level = x[None, :]
    yield level
    for k in range(1, n + 1):
        if level.shape[0] * len(alphabet) > budget:
            raise ResourceError(f"orbit budget {budget} exceeded at n={k}", partial=PointCloud(level))
        nxt = np.concatenate([level @ g.T for g in alphabet])
        keep = unique_rows(np.floor(np.ldexp(nxt, mesh_exp)).astype(np.int64))
        level = nxt[keep]
        yield level


def orbit(rot: RotationSet, x, n: int, budget: int = DEFAULT_ORBIT_BUDGET) -> PointCloud:
    if n < 0:
        raise DomainError("n must be nonnegative")
    level = None
    for level in iter_orbit(rot, x, n, budget=budget):
        pass
    return PointCloud(level, {"n": n, "dedup_mesh": 2.0**-ORBIT_MESH_EXP})


@dataclass(frozen=True)
class OrbitCounts:
    counts: dict
    m: int
    epsilon_hat: float
    fit_range: tuple
    saturation_level: float
    saturation_onset: int | None
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["n,count,log2count"]
        lines += [f"{n},{c},{math.log2(c)!r}" for n, c in self.counts.items()]
        return "\n".join(lines) + "\n"


def fit_growth(counts: dict, saturation_level: float, fraction: float = 0.5):
    """epsilon_hat = exp(slope) - 1, slope the least-squares rate of ln N(n) in n.

    The fit uses n >= 1 up to the last count below ``fraction`` of the
    saturation level (and at least n = 1, 2).
    """
    ns = [n for n in sorted(counts) if n >= 1]
    pre = [n for n in ns if counts[n] < fraction * saturation_level]
    onset = None
    if len(pre) < len(ns):
        onset = next(n for n in ns if counts[n] >= fraction * saturation_level)
        pre = [n for n in ns if n < onset]
    if len(pre) < 2:
        pre = ns[:2]
    if len(pre) < 2:
        return 0.0, (pre[0] if pre else 0, pre[-1] if pre else 0), onset
    x = np.array(pre, dtype=float)
    y = np.log(np.array([counts[n] for n in pre], dtype=float))
    slope = np.polyfit(x, y, 1)[0]
    return float(math.exp(slope) - 1.0), (pre[0], pre[-1]), onset


def orbit_counts(rot: RotationSet, x, n_max: int, m: int, budget: int = DEFAULT_ORBIT_BUDGET) -> OrbitCounts:
    """Box counts of G^n(x) at mesh 2^-m for n = 0..n_max, with a growth fit."""
    d = rot.dimension
    counts = {}
    for n, level in enumerate(iter_orbit(rot, x, n_max, budget=budget)):
        counts[n] = count_boxes(level, m, boundary_tol=BOUNDARY_TOL)
    sat = 2.0 ** (m * (d - 1))
    eps, rng, onset = fit_growth(counts, sat)
    return OrbitCounts(counts, m, eps, rng, sat, onset, {"generators": len(rot.generators)})


def alpha_of_c(c: float, eps: float, d: int = 3) -> float:
    """(d-1) log(1/c) / (log(1+eps) - (d-1) log c)."""
    num = (d - 1) * math.log(1.0 / c)
    return num / (math.log1p(eps) - (d - 1) * math.log(c))


@dataclass(frozen=True)
class SphereAttractor:
    cloud: PointCloud | None
    curve: CountCurve
    estimate: DimensionEstimate
    epsilon_hat: float
    alpha_c: float
    target: float


def sg_attractor(
    c: float,
    rot: RotationSet | None = None,
    x=None,
    m: int = 7,
    *,
    m_lo: int = 1,
    window=None,
    eps_hat: float | None = None,
    tol: float = SPHERE_TOL,
    budget: int | None = None,
    with_cloud: bool = False,
) -> SphereAttractor:
    """Attractor of S_i = c g_i with condensation {x}, counted at meshes 2^-m_lo .. 2^-m."""
    from .ifs import DEFAULT_IMAGE_BUDGET, orbital_cloud, sphere_system

    rot = default_generators() if rot is None else rot
    system = sphere_system(c, rot, x)
    kwargs = {"budget": budget or DEFAULT_IMAGE_BUDGET, "tol": tol}
    curve = count_curve(system, range(m_lo, m + 1), **kwargs)
    est = estimate_dimension(curve, window)
    if eps_hat is None:
        eps_hat = orbit_counts(rot, system.condensation.data[0], 8, 6).epsilon_hat
    d = rot.dimension
    a = alpha_of_c(c, eps_hat, d)
    cloud = orbital_cloud(system, 2.0**-m, **kwargs) if with_cloud else None
    return SphereAttractor(cloud, curve, est, eps_hat, a, (1.0 - a) * (d - 1))
