"""Exact overlaps between composed maps and the weak-separation margin."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResourceError
from .ifs import IfsSystem, compose, stopping_set

DEFAULT_FLOAT_TOL = 1e-9
DEFAULT_PAIR_BUDGET = 50_000_000
MODES = ("exact", "float")


@dataclass(frozen=True)
class OverlapPair:
    word_a: tuple
    word_b: tuple
    map_distance: float


@dataclass(frozen=True)
class WspMargin:
    per_length: dict
    overall: float | None
    mode: str
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["length_sum", "min_distance"])
        for k, v in self.per_length.items():
            w.writerow([k, repr(v)])
        return buf.getvalue()


def _check_mode(system: IfsSystem, mode: str):
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}")
    if mode == "exact" and not system.is_exact:
        raise DomainError("exact mode needs exact map data (a polynomial or rational lambda and rational rotations)")
    if mode == "float":
        warnings.warn("float mode: near-coincident maps may be misclassified as overlaps", stacklevel=3)


def all_words(n_maps: int, max_len: int, budget: int = DEFAULT_PAIR_BUDGET) -> list[tuple]:
    """Nonempty words of length <= max_len in lexicographic order."""
    total = sum(n_maps**k for k in range(1, max_len + 1))
    if total > budget:
        raise ResourceError(f"{total} words exceed the budget {budget}")
    out = []

    def rec(prefix):
        for i in range(n_maps):
            w = prefix + (i,)
            out.append(w)
            if len(w) < max_len:
                rec(w)

    rec(())
    return out


def _composed(system, words):
    """Composed maps for a lexicographically ordered, prefix-closed word list."""
    cache = {(): compose(system, ())}
    maps = []
    for w in words:
        parent = cache.get(w[:-1])
        if parent is None:
            parent = compose(system, w[:-1])
            cache[w[:-1]] = parent
        s = parent.then(system.maps[w[-1]])
        cache[w] = s
        maps.append(s)
    return maps


def _sup_distance(system, sa, sb) -> float:
    """sup over the bounding box of the max-coordinate distance of two affine maps."""
    box = system.bounding_box()
    centre = box.mean(axis=0)
    half = (box[1] - box[0]) / 2
    dlin = np.asarray(sa.linear) - np.asarray(sb.linear)
    dtr = sa.translation - sb.translation
    return float(np.max(np.abs(dlin @ centre + dtr) + np.abs(dlin) @ half))


def _classes(system, words, maps, mode, tol) -> list[list[int]]:
    """Indices grouped into classes of equal maps (float: tolerance closure)."""
    if mode == "exact":
        groups = {}
        for i, s in enumerate(maps):
            groups.setdefault(s.exact.key(), []).append(i)
        return [g for g in groups.values() if len(g) > 1]
    lin = np.stack([np.asarray(s.linear) for s in maps])
    trans = np.stack([s.translation for s in maps])
    scales = np.array([s.scale for s in maps])
    box = system.bounding_box()
    centre, half = box.mean(axis=0), (box[1] - box[0]) / 2
    parent = list(range(len(maps)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # equal maps have equal scales, so only scale-sorted windows are compared
    by_scale = np.argsort(scales, kind="stable")
    sc = scales[by_scale]
    ends = np.searchsorted(sc, sc + tol, side="right")
    for pos, i in enumerate(by_scale):
        cand = by_scale[pos + 1 : ends[pos]]
        if cand.size == 0:
            continue
        dlin = lin[cand] - lin[i]
        dtr = trans[cand] - trans[i]
        dist = np.max(np.abs(dlin @ centre + dtr) + np.abs(dlin) @ half, axis=1)
        for j in cand[dist <= tol]:
            parent[find(int(i))] = find(int(j))
    order = range(len(maps))
    groups = {}
    for i in order:
        groups.setdefault(find(i), []).append(int(i))
    return [sorted(g) for g in groups.values() if len(g) > 1]


def exact_overlaps(system: IfsSystem, max_len: int, mode: str = "exact", tol: float = DEFAULT_FLOAT_TOL) -> list[OverlapPair]:
    """All pairs of distinct words of length <= max_len with equal composed maps."""
    _check_mode(system, mode)
    words = all_words(len(system.maps), max_len)
    maps = _composed(system, words)
    out = []
    for g in _classes(system, words, maps, mode, tol):
        ws = sorted(g, key=lambda i: words[i])
        for a in range(len(ws)):
            for b in range(a + 1, len(ws)):
                i, j = ws[a], ws[b]
                dist = 0.0 if mode == "exact" else _sup_distance(system, maps[i], maps[j])
                out.append(OverlapPair(words[i], words[j], dist))
    out.sort(key=lambda p: (p.word_a, p.word_b))
    return out


def reduced_words(system: IfsSystem, r: float, mode: str = "exact", tol: float = DEFAULT_FLOAT_TOL) -> list[tuple]:
    """One representative (lexicographically least) per class of equal maps in the stopping set."""
    _check_mode(system, mode)
    words = stopping_set(system, r)
    maps = [compose(system, w) for w in words]
    drop = set()
    for g in _classes(system, words, maps, mode, tol):
        rep = min(g, key=lambda i: words[i])
        drop.update(i for i in g if i != rep)
    return [w for i, w in enumerate(words) if i not in drop]


def wsp_margin(system: IfsSystem, max_len: int, mode: str = "exact", tol: float = DEFAULT_FLOAT_TOL) -> WspMargin:
    """Minimum distance of S_I^-1 S_J from the identity, bucketed by |I| + |J|.

    The distance is the largest of |c_J/c_I - 1|, the max-entry distance of
    M_I^T M_J from the identity and the max-norm of the translation part.
    Pairs with equal maps are excluded.
    """
    _check_mode(system, mode)
    words = all_words(len(system.maps), max_len)
    if len(words) ** 2 > DEFAULT_PAIR_BUDGET * 4:
        raise ResourceError("too many word pairs")
    maps = _composed(system, words)
    same = np.arange(len(words))
    for g in _classes(system, words, maps, mode, tol):
        for i in g:
            same[i] = g[0]
    lengths = np.array([len(w) for w in words])
    scales = np.array([s.scale for s in maps])
    orth = np.stack([s.orthogonal for s in maps])
    trans = np.stack([s.translation for s in maps])
    d = trans.shape[1]
    plain = np.all(np.abs(orth - np.eye(d)) == 0)
    best = np.full(2 * max_len + 1, np.inf)
    for i in range(len(words)):
        mi = orth[i]
        dist = np.abs(scales / scales[i] - 1.0)
        if not plain:
            rot = np.abs(np.einsum("kj,nkl->njl", mi, orth) - np.eye(d)).reshape(len(words), -1).max(axis=1)
            dist = np.maximum(dist, rot)
        tr = np.abs((trans - trans[i]) @ mi / scales[i]).max(axis=1)
        dist = np.maximum(dist, tr)
        valid = same != same[i]
        np.minimum.at(best, lengths[valid] + lengths[i], dist[valid])
    per = {int(k): float(best[k]) for k in range(best.size) if np.isfinite(best[k])}
    per = dict(sorted(per.items()))
    overall = min(per.values()) if per else None
    return WspMargin(per, overall, mode, {"max_len": max_len, "words": len(words)})
