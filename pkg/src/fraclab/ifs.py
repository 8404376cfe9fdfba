"""Similarity IFSs with condensation sets.

Words are plain tuples of map indices.  ``compose(system, (i1, ..., ik))``
is S_i1 o ... o S_ik.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .algebraic import AlgebraicNumber, IntPolynomial
from .errors import DomainError, ResourceError
from .exact import ExactSimilarity, NumberField, rational_matrix

Word = tuple

ORTHO_TOL = 1e-12
# relative slack for scale comparisons against thresholds such as r or 2^-k
SCALE_RTOL = 1e-12
DEFAULT_WORD_BUDGET = 2_000_000
DEFAULT_IMAGE_BUDGET = 12_000_000


@dataclass(frozen=True, eq=False)
class Similarity:
    """x -> scale * orthogonal @ x + translation."""

    scale: float
    orthogonal: np.ndarray
    translation: np.ndarray
    exact: ExactSimilarity | None = None

    def __post_init__(self):
        m = np.array(self.orthogonal, dtype=float)
        b = np.array(self.translation, dtype=float).reshape(-1)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != b.size:
            raise DomainError("orthogonal part and translation have mismatched shapes")
        if not np.all(np.isfinite(b)):
            raise DomainError("translation must be finite")
        if np.max(np.abs(m @ m.T - np.eye(b.size))) > ORTHO_TOL:
            raise DomainError("matrix is not orthogonal")
        m.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "orthogonal", m)
        object.__setattr__(self, "translation", b)
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def dimension(self) -> int:
        return self.translation.size

    @property
    def linear(self) -> np.ndarray:
        return self.scale * self.orthogonal

    @property
    def contraction(self) -> float:
        return self.scale

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        return pts @ self.linear.T + self.translation

    def then(self, other: "Similarity") -> "Similarity":
        """self o other (apply ``other`` first)."""
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = self.exact.then(other.exact)
        return Similarity(
            self.scale * other.scale,
            self.orthogonal @ other.orthogonal,
            self.translation + self.scale * (self.orthogonal @ other.translation),
            exact,
        )

    def fixed_point(self) -> np.ndarray:
        d = self.dimension
        return np.linalg.solve(np.eye(d) - self.linear, self.translation)

    @classmethod
    def identity(cls, d: int, exact_field: NumberField | None = None) -> "Similarity":
        exact = ExactSimilarity.identity(exact_field, d) if exact_field is not None else None
        return cls(1.0, np.eye(d), np.zeros(d), exact)

    def is_contracting(self) -> bool:
        return 0.0 < self.scale < 1.0

    def __repr__(self):
        return (
            f"Similarity(scale={self.scale!r}, orthogonal={self.orthogonal.tolist()}, "
            f"translation={self.translation.tolist()})"
        )


@dataclass(frozen=True, eq=False)
class AffineMap:
    """General affine contraction; only used by the self-affine companion preset."""

    linear: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        a = np.array(self.linear, dtype=float)
        b = np.array(self.translation, dtype=float).reshape(-1)
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "linear", a)
        object.__setattr__(self, "translation", b)

    @property
    def contraction(self) -> float:
        return float(np.linalg.norm(self.linear, 2))

    def __call__(self, points):
        return np.asarray(points, dtype=float) @ self.linear.T + self.translation

    def fixed_point(self) -> np.ndarray:
        d = self.translation.size
        return np.linalg.solve(np.eye(d) - self.linear, self.translation)


CONDENSATION_KINDS = ("point", "segment", "polyline", "point_cloud")


@dataclass(frozen=True, eq=False)
class CondensationSet:
    kind: str
    data: np.ndarray

    def __post_init__(self):
        if self.kind not in CONDENSATION_KINDS:
            raise DomainError(f"unknown condensation kind {self.kind!r}")
        arr = np.array(self.data, dtype=float)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.size == 0 or not np.all(np.isfinite(arr)):
            raise DomainError("condensation set must be nonempty and finite")
        need = {"point": (1, 1), "segment": (2, 2), "polyline": (2, None), "point_cloud": (1, None)}
        lo, hi = need[self.kind]
        if arr.shape[0] < lo or (hi is not None and arr.shape[0] > hi):
            raise DomainError(f"{self.kind} condensation needs {lo}..{hi or 'any'} points")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dimension(self) -> int:
        return self.data.shape[1]

    @property
    def is_curve(self) -> bool:
        return self.kind in ("segment", "polyline")

    def diameter(self) -> float:
        pts = self.data
        return float(max(np.linalg.norm(p - q) for p in pts for q in pts)) if len(pts) < 200 else float(
            np.linalg.norm(pts.max(0) - pts.min(0))
        )


@dataclass(frozen=True, eq=False)
class IfsSystem:
    dimension: int
    maps: tuple
    condensation: CondensationSet | None = None
    box: np.ndarray | None = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise DomainError("an IFS needs at least one map")
        for s in maps:
            if s.translation.size != self.dimension:
                raise DomainError("map dimension does not match system dimension")
            if not 0.0 < s.contraction < 1.0:
                raise DomainError(f"map contraction {s.contraction} not in (0,1)")
        if self.condensation is not None and self.condensation.dimension != self.dimension:
            raise DomainError("condensation dimension does not match system dimension")
        object.__setattr__(self, "maps", maps)
        if self.box is not None:
            box = np.array(self.box, dtype=float).reshape(2, self.dimension)
            object.__setattr__(self, "box", box)

    @property
    def scales(self) -> np.ndarray:
        return np.array([s.contraction for s in self.maps])

    @property
    def is_exact(self) -> bool:
        return all(getattr(s, "exact", None) is not None for s in self.maps)

    @property
    def exact_field(self) -> NumberField | None:
        if not self.is_exact:
            return None
        return self.maps[0].exact.scale.field

    def with_condensation(self, condensation: CondensationSet | None) -> "IfsSystem":
        return IfsSystem(self.dimension, self.maps, condensation, self.box, self.name, dict(self.params))

    def bounding_ball(self) -> tuple[np.ndarray, float]:
        """A ball B(z, R) that is mapped into itself and contains C.

        The centre is chosen among the map fixed points and the condensation
        centroid, whichever gives the smallest radius.
        """
        candidates = [s.fixed_point() for s in self.maps]
        if self.condensation is not None:
            candidates.append(self.condensation.data.mean(axis=0))
        best = None
        for z in candidates:
            r = max(np.linalg.norm(s(z) - z) / (1.0 - s.contraction) for s in self.maps)
            if self.condensation is not None:
                r = max(r, float(np.max(np.linalg.norm(self.condensation.data - z, axis=1))))
            if best is None or r < best[1]:
                best = (np.asarray(z, dtype=float), float(r))
        return best

    def bounding_box(self) -> np.ndarray:
        if self.box is not None:
            return self.box
        z, r = self.bounding_ball()
        return np.stack([z - r, z + r])


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        object.__setattr__(self, "points", pts)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]


# ---------------------------------------------------------------- words


def compose(system: IfsSystem, word: Sequence[int]) -> Similarity:
    """S_I for I = (i1, ..., ik); the empty word gives the identity (scale 1)."""
    out = Similarity.identity(system.dimension, system.exact_field)
    for i in word:
        if not 0 <= i < len(system.maps):
            raise DomainError(f"invalid map index {i}")
        out = out.then(system.maps[i])
    return out


def _enumerate_words(scales, accept, expand, budget):
    """DFS over words; ``expand(c)`` decides descent, ``accept(c)`` emission."""
    out = []
    stack = [((), 1.0)]
    while stack:
        word, c = stack.pop()
        if word and accept(c):
            out.append(word)
            if len(out) > budget:
                raise ResourceError(f"word budget {budget} exceeded", partial=sorted(out))
        if expand(word, c):
            for i, ci in enumerate(scales):
                stack.append((word + (i,), c * ci))
    out.sort()
    return out


def stopping_set(system: IfsSystem, r: float, budget: int = DEFAULT_WORD_BUDGET) -> list[Word]:
    """Words with c_I <= r < c_{I without last letter}, in lexicographic order."""
    if not 0.0 < r < 1.0:
        raise DomainError(f"r={r!r} not in (0,1)")
    thr = r * (1.0 + SCALE_RTOL)
    return _enumerate_words(
        system.scales, accept=lambda c: c <= thr, expand=lambda w, c: c > thr, budget=budget
    )


def scale_level(c: float) -> int | None:
    """The k >= 0 with 2^-(k+1) < c <= 2^-k (same slack as level_set), or None."""
    if not 0.0 < c <= 1.0 * (1.0 + SCALE_RTOL):
        return None
    k0 = max(0, int(math.floor(-math.log2(c))))
    for k in (k0 - 1, k0, k0 + 1):
        if k >= 0 and 2.0 ** (-k - 1) * (1.0 + SCALE_RTOL) < c <= 2.0 ** (-k) * (1.0 + SCALE_RTOL):
            return k
    return None


def level_set(system: IfsSystem, k: int, budget: int = DEFAULT_WORD_BUDGET) -> list[Word]:
    """Words with 2^-(k+1) < c_I <= 2^-k (nonempty words only)."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    upper = 2.0 ** (-k) * (1.0 + SCALE_RTOL)
    lower = 2.0 ** (-k - 1) * (1.0 + SCALE_RTOL)
    return _enumerate_words(
        system.scales,
        accept=lambda c: lower < c <= upper,
        expand=lambda w, c: c > lower,
        budget=budget,
    )


# ---------------------------------------------------------------- clouds


def _pack_rows(keys: np.ndarray) -> np.ndarray | None:
    """Mixed-radix pack of integer rows into int64, or None if it would overflow."""
    if keys.shape[1] == 1:
        return keys[:, 0]
    lo = keys.min(axis=0)
    span = keys.max(axis=0) - lo + 1
    if np.sum(np.log2(span.astype(float))) > 62:
        return None
    out = np.zeros(keys.shape[0], dtype=np.int64)
    for j in range(keys.shape[1]):
        out = out * int(span[j]) + (keys[:, j] - lo[j])
    return out


def unique_rows(keys: np.ndarray) -> np.ndarray:
    """Indices of the first occurrence of each distinct row, in key order."""
    if keys.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    packed = _pack_rows(keys)
    if packed is not None:
        _, idx = np.unique(packed, return_index=True)
    else:
        _, idx = np.unique(keys, axis=0, return_index=True)
    return idx


def _dyadic_at_most(x: float) -> float:
    return 2.0 ** math.floor(math.log2(x))


def _anchors(system) -> np.ndarray:
    if system.condensation is None:
        raise DomainError("system has no condensation set")
    return system.condensation.data


def iter_orbit_levels(
    system,
    delta: float,
    *,
    tol: float = 1.0 / 16,
    budget: int = DEFAULT_IMAGE_BUDGET,
) -> Iterator[np.ndarray]:
    """Images of the condensation set, one array of shape (N, anchors, d) per word length.

    Level n+1 is built as the union of S_i(level n) (left composition), then
    images whose anchors share a cell of side ``eta`` are merged.  Because
    merging happens before further contraction, the displacement of any
    image stays below ``tol * delta``.  Enumeration stops once every deeper
    image lies within delta/2 of the current level.
    """
    if delta <= 0:
        raise DomainError("delta must be positive")
    anchors = _anchors(system)
    d = anchors.shape[1]
    c_max = max(s.contraction for s in system.maps)
    _, radius = system.bounding_ball()
    diam = 2.0 * radius
    n_levels = 0
    while c_max**n_levels * diam >= delta / 2:
        n_levels += 1
    eta = tol * delta * (1.0 - c_max) / math.sqrt(d)
    linears = [np.asarray(s.linear) for s in system.maps]
    shifts = [np.asarray(s.translation) for s in system.maps]
    level = anchors[None, :, :].copy()
    yield level
    for _ in range(n_levels):
        nxt = np.concatenate([level @ a.T + b for a, b in zip(linears, shifts)])
        flat = nxt.reshape(nxt.shape[0], -1)
        keep = unique_rows(np.floor(flat / eta).astype(np.int64))
        level = nxt[keep]
        if level.shape[0] > budget:
            raise ResourceError(f"image budget {budget} exceeded at delta={delta:g}")
        yield level


def discretize_images(images: np.ndarray, kind: str, spacing: float) -> np.ndarray:
    """Points on each image at spacing <= ``spacing`` (segment endpoints included)."""
    n, a, d = images.shape
    if kind in ("point", "point_cloud") or a == 1:
        return images.reshape(-1, d)
    p = images[:, :-1, :].reshape(-1, d)
    q = images[:, 1:, :].reshape(-1, d)
    length = np.linalg.norm(q - p, axis=1)
    counts = np.ceil(length / spacing).astype(np.int64) + 1
    seg = np.repeat(np.arange(p.shape[0]), counts)
    starts = np.cumsum(counts) - counts
    t = (np.arange(seg.size) - starts[seg]) / np.maximum(counts[seg] - 1, 1)
    return p[seg] + t[:, None] * (q[seg] - p[seg])


def dedup_dyadic(points: np.ndarray, mesh: float) -> np.ndarray:
    """Keep one point per origin-anchored dyadic cell of side ``mesh``.

    Representatives stay in their cells, so counts at any coarser dyadic
    mesh are unchanged.
    """
    keep = unique_rows(np.floor(points / mesh).astype(np.int64))
    return points[keep]


def orbital_cloud(system, delta: float, *, budget: int = DEFAULT_IMAGE_BUDGET, tol: float = 1.0 / 16) -> PointCloud:
    """A delta/2-net of F_C built from images of C under words of growing length."""
    kind = system.condensation.kind if system.condensation is not None else None
    mesh = _dyadic_at_most(delta / 8)
    chunks = []
    depth = -1
    partial = False
    try:
        for depth, images in enumerate(iter_orbit_levels(system, delta, budget=budget, tol=tol)):
            chunks.append(dedup_dyadic(discretize_images(images, kind, delta / 4), mesh))
    except ResourceError as exc:
        partial = True
        pts = dedup_dyadic(np.concatenate(chunks), mesh) if chunks else np.zeros((0, system.dimension))
        exc.partial = PointCloud(pts, {"delta": delta, "depth": depth, "partial": True})
        raise
    pts = dedup_dyadic(np.concatenate(chunks), mesh)
    return PointCloud(pts, {"delta": delta, "depth": depth, "dedup_mesh": mesh, "partial": partial})


def level_slice(system: IfsSystem, k: int, delta: float, budget: int = DEFAULT_WORD_BUDGET) -> PointCloud:
    """Discretisation of the union of S_I(C) over words I in level k."""
    anchors = _anchors(system)
    words = level_set(system, k, budget=budget)
    images = np.stack([compose(system, w)(anchors) for w in words])
    pts = discretize_images(images, system.condensation.kind, delta / 4)
    return PointCloud(dedup_dyadic(pts, _dyadic_at_most(delta / 8)), {"k": k, "delta": delta, "words": len(words)})


# ---------------------------------------------------------------- presets


def _lambda_field(lam):
    """(float value, NumberField or None) for lambda given as float/Fraction/str/theta."""
    if isinstance(lam, AlgebraicNumber):
        field_ = NumberField.reciprocal_of(lam)
        return field_.value, field_
    if isinstance(lam, str):
        lam = Fraction(lam)
    if isinstance(lam, Fraction):
        return float(lam), NumberField.rational(lam)
    return float(lam), None


def bernoulli_comb(lam) -> IfsSystem:
    """S_0 = lambda x, S_1 = lambda x + (1 - lambda, 0), C = {0} x [0, 1]."""
    value, fld = _lambda_field(lam)
    if not 0.0 < value < 1.0:
        raise DomainError(f"lambda={value!r} not in (0,1)")
    maps = _comb_maps(value, fld)
    cond = CondensationSet("segment", [[0.0, 0.0], [0.0, 1.0]])
    return IfsSystem(2, maps, cond, box=[[0, 0], [1, 1]], name="bernoulli_comb", params={"lambda": value})


def _comb_maps(value, fld):
    eye = np.eye(2)
    e0 = e1 = None
    if fld is not None:
        g = fld.gen
        ident = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
        e0 = ExactSimilarity(g, ident, (fld.zero, fld.zero))
        e1 = ExactSimilarity(g, ident, (fld.one - g, fld.zero))
    return (
        Similarity(value, eye, [0.0, 0.0], e0),
        Similarity(value, eye, [1.0 - value, 0.0], e1),
    )


def extended_comb(lam, eps) -> IfsSystem:
    """The comb plus S_2(x) = eps x + (0, 1 - eps)."""
    base = bernoulli_comb(lam)
    value = base.params["lambda"]
    eps_q = Fraction(eps) if isinstance(eps, str) else eps
    e = float(eps_q)
    if not 0.0 < e < 1.0 - value:
        raise DomainError(f"epsilon={e!r} not in (0, 1 - lambda)")
    exact = None
    fld = base.exact_field
    if fld is not None:
        if not isinstance(eps_q, Fraction):
            eps_q = Fraction(e)
        ident = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
        exact = ExactSimilarity(fld.const(eps_q), ident, (fld.zero, fld.const(1 - eps_q)))
    s2 = Similarity(e, np.eye(2), [0.0, 1.0 - e], exact)
    return IfsSystem(
        2, base.maps + (s2,), base.condensation, box=[[0, 0], [1, 1]], name="extended_comb",
        params={"lambda": value, "epsilon": e},
    )


@dataclass(frozen=True, eq=False)
class AffineSystem:
    """Homogeneous self-affine IFS (companion sets only).

    The condensation is a single point of the attractor, so the orbital
    machinery reproduces the attractor itself.
    """

    dimension: int
    maps: tuple
    box: np.ndarray | None = None
    name: str = "affine"
    params: dict = field(default_factory=dict)

    @property
    def condensation(self) -> CondensationSet:
        return CondensationSet("point", self.maps[0].fixed_point())

    def bounding_ball(self):
        z = self.maps[0].fixed_point()
        r = max(np.linalg.norm(m(z) - z) / (1.0 - m.contraction) for m in self.maps)
        return z, float(r)

    def bounding_box(self):
        if self.box is not None:
            return np.asarray(self.box, dtype=float)
        z, r = self.bounding_ball()
        return np.stack([z - r, z + r])


def affine_companion(lam) -> AffineSystem:
    """T_0(x, y) = (lambda x, y/2), T_1(x, y) = (lambda x + 1 - lambda, y/2 + 1/2)."""
    value, _ = _lambda_field(lam)
    if not 0.0 < value < 1.0:
        raise DomainError(f"lambda={value!r} not in (0,1)")
    lin = np.diag([value, 0.5])
    maps = (AffineMap(lin, [0.0, 0.0]), AffineMap(lin, [1.0 - value, 0.5]))
    return AffineSystem(2, maps, box=np.array([[0.0, 0.0], [1.0, 1.0]]), name="affine_companion",
                        params={"lambda": value})


def sphere_system(c: float, generators=None, x=None) -> IfsSystem:
    """S_i = c g_i with C = {x}, |x| = 1."""
    from .sphere import RotationSet, default_generators

    if not 0.0 < c < 1.0:
        raise DomainError(f"c={c!r} not in (0,1)")
    rot = generators if isinstance(generators, RotationSet) else (
        default_generators() if generators is None else RotationSet(tuple(generators), include_inverses=False)
    )
    mats = rot.alphabet()
    d = mats[0].shape[0]
    x = np.eye(d)[0] if x is None else np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-12:
        raise DomainError("condensation point must have unit norm")
    maps = tuple(Similarity(c, g, np.zeros(d)) for g in mats)
    return IfsSystem(d, maps, CondensationSet("point", x), box=np.stack([-np.ones(d), np.ones(d)]),
                     name="sphere", params={"c": c})


PRESETS = ("bernoulli_comb", "affine_companion", "extended_comb", "sphere")


def preset(name: str, **params):
    """Build a named preset.  lambda may be given as ``lambda_`` / ``lam`` or via ``lambda_poly``."""
    lam = params.get("lam", params.get("lambda_", params.get("lambda")))
    poly = params.get("lambda_poly")
    if poly is not None:
        p = poly if isinstance(poly, IntPolynomial) else IntPolynomial.parse(str(poly))
        lam = AlgebraicNumber.largest_real(p)
    if name == "bernoulli_comb":
        return bernoulli_comb(_need(lam, "lambda"))
    if name == "extended_comb":
        return extended_comb(_need(lam, "lambda"), _need(params.get("epsilon", params.get("eps")), "epsilon"))
    if name == "affine_companion":
        return affine_companion(_need(lam, "lambda"))
    if name == "sphere":
        from .sphere import RotationSet, rotation_from_axis_angle

        gens = params.get("generators")
        if gens is not None and not hasattr(gens, "alphabet"):
            mats = []
            for g in gens:
                if isinstance(g, dict) and "matrix" in g:
                    mats.append(np.asarray(g["matrix"], dtype=float))
                elif isinstance(g, dict):
                    mats.append(rotation_from_axis_angle(g["axis"], math.radians(float(g["angle_deg"]))))
                else:
                    mats.append(np.asarray(g, dtype=float))
            gens = RotationSet(tuple(mats), include_inverses=bool(params.get("include_inverses", True)))
        return sphere_system(float(params.get("c", 0.95)), gens, params.get("x"))
    raise DomainError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


def _need(v, name):
    if v is None:
        raise DomainError(f"preset parameter {name!r} is required")
    return v


# ---------------------------------------------------------------- JSON config


def _num(v):
    if isinstance(v, str):
        return Fraction(v)
    return v


def _rotation_matrix(spec, d):
    if spec is None:
        return np.eye(d)
    if "matrix" in spec:
        return np.asarray(spec["matrix"], dtype=float)
    if "angle_deg" in spec:
        if d != 2:
            raise DomainError("angle_deg rotations need dimension 2")
        a = math.radians(float(spec["angle_deg"]))
        c, s = math.cos(a), math.sin(a)
        # snap multiples of 90 degrees to exact entries
        c, s = (round(c) if abs(c - round(c)) < 1e-15 else c), (round(s) if abs(s - round(s)) < 1e-15 else s)
        return np.array([[c, -s], [s, c]])
    raise DomainError(f"bad rotation spec {spec!r}")


def system_from_config(cfg: dict):
    """Build a system from the JSON config layout (see README)."""
    maps_cfg = cfg.get("maps")
    preset_cfg = cfg.get("preset")
    cond_cfg = cfg.get("condensation")
    built = None
    if preset_cfg is not None:
        params = dict(preset_cfg.get("params", {}))
        if "lambda" in params:
            params["lambda"] = _num(params["lambda"])
        built = preset(preset_cfg["name"], **params)
    explicit = None
    if maps_cfg:
        d = int(cfg["dimension"])
        exact_ok = all(isinstance(m.get("scale"), str) for m in maps_cfg)
        fld = NumberField.rational() if exact_ok else None
        smaps = []
        for m in maps_cfg:
            scale = _num(m["scale"])
            mat = _rotation_matrix(m.get("rotation"), d)
            trans = [_num(t) for t in m.get("translation", [0] * d)]
            exact = None
            if fld is not None:
                qm = rational_matrix(mat)
                if qm is not None and all(isinstance(t, (int, Fraction)) for t in trans):
                    exact = ExactSimilarity(fld.const(scale), qm, tuple(fld.const(t) for t in trans))
            smaps.append(Similarity(float(scale), mat, [float(t) for t in trans], exact))
        if any(s.exact is None for s in smaps):
            smaps = [Similarity(s.scale, s.orthogonal, s.translation) for s in smaps]
        explicit = tuple(smaps)
    if built is not None and explicit is not None:
        if len(explicit) != len(built.maps) or any(
            abs(a.contraction - b.contraction) > 1e-12
            or np.max(np.abs(np.asarray(a.linear) - np.asarray(b.linear))) > 1e-12
            or np.max(np.abs(a.translation - b.translation)) > 1e-12
            for a, b in zip(explicit, built.maps)
        ):
            raise DomainError("explicit maps conflict with the preset")
    if built is None:
        if explicit is None:
            raise DomainError("config needs 'maps' or 'preset'")
        d = int(cfg["dimension"])
        cond = None
        if cond_cfg is not None:
            cond = CondensationSet(cond_cfg["kind"], cond_cfg["data"])
        return IfsSystem(d, explicit, cond, box=cfg.get("box"), name=cfg.get("name", "custom"))
    if cond_cfg is not None and isinstance(built, IfsSystem):
        built = built.with_condensation(CondensationSet(cond_cfg["kind"], cond_cfg["data"]))
    return built


def load_config(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
