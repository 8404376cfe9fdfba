"""Dimension bounds: similarity dimensions, the max-min envelope bound and its closed forms."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, ResourceError
from .ifs import SCALE_RTOL, IfsSystem, scale_level

VALUE_TOL = 1e-12


def _bisect_decreasing(f, lo: float, hi: float) -> float:
    """Root of a strictly decreasing f on [lo, hi] with f(lo) >= 0 >= f(hi)."""
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def similarity_dimension(ratios, upper: float | None = None) -> float:
    """The s >= 0 with sum c_i^s = 1."""
    c = np.asarray(list(ratios), dtype=float)
    if c.size == 0:
        raise DomainError("need at least one ratio")
    if np.any((c <= 0) | (c >= 1)):
        raise DomainError("ratios must lie in (0,1)")
    logs = np.log(c)

    def f(s):
        return math.fsum(np.exp(s * logs)) - 1.0

    if f(0.0) <= 0:
        return 0.0
    hi = 1.0 if upper is None else float(upper)
    while f(hi) > 0:
        hi *= 2
    return _bisect_decreasing(f, 0.0, hi)


@dataclass(frozen=True)
class BoundInputs:
    s: float
    alpha: float
    beta: float
    gamma: float
    d: int

    def __post_init__(self):
        for name in ("s", "alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise DomainError(f"{name} must be a finite nonnegative number")
        if int(self.d) != self.d or self.d < 1:
            raise DomainError("d must be a positive integer")
        eps = 1e-12
        if self.alpha > min(self.s, self.d) + eps:
            raise DomainError("alpha must not exceed min(s, d)")
        if self.gamma > self.s + eps:
            raise DomainError("gamma must not exceed s")
        if self.beta > self.d + eps:
            raise DomainError("beta must not exceed d")


def envelope_terms(inp: BoundInputs) -> list[tuple[float, float]]:
    """(slope, intercept) of the four affine functions of x in [0, 1]."""
    s, a, b, g, d = inp.s, inp.alpha, inp.beta, inp.gamma, inp.d
    return [
        (s - b, b),  # x s + (1-x) beta
        (a - d, float(d)),  # x alpha + (1-x) d
        (-(b + d - 1), a + b + d - 1),  # alpha + (1-x)(beta + d - 1)
        (g - b, a + b),  # alpha + x gamma + (1-x) beta
    ]


@dataclass(frozen=True)
class MaxMinResult:
    value: float
    argmax_x: float
    active_terms: tuple
    breakpoints: tuple = ()


def _envelope_max(lines: list[tuple[float, float]], labels) -> MaxMinResult:
    xs = {0.0, 1.0}
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            (a1, b1), (a2, b2) = lines[i], lines[j]
            if a1 != a2:
                x = (b2 - b1) / (a1 - a2)
                if 0.0 <= x <= 1.0:
                    xs.add(x)
    xs = sorted(xs)

    def env(x):
        return min(a * x + b for a, b in lines)

    vals = [env(x) for x in xs]
    best = max(vals)
    # smallest maximiser; the maximising set is an interval whose left end is a breakpoint
    k = next(i for i, v in enumerate(vals) if v >= best - VALUE_TOL)
    x = xs[k]
    v = vals[k]
    active = tuple(lab for lab, (a, b) in zip(labels, lines) if a * x + b <= v + VALUE_TOL)
    return MaxMinResult(v, x, active, tuple(xs))


def thm1_bound(inp: BoundInputs, terms=(1, 2, 3, 4)) -> MaxMinResult:
    """max over x in [0,1] of the minimum of the selected envelope terms."""
    all_terms = envelope_terms(inp)
    lines = [all_terms[t - 1] for t in terms]
    return _envelope_max(lines, tuple(terms))


def grid_bound(inp: BoundInputs, step: float = 1e-6, terms=(1, 2, 3, 4)) -> float:
    """Brute-force maximum over a grid (test oracle)."""
    x = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
    all_terms = envelope_terms(inp)
    env = np.min([all_terms[t - 1][0] * x + all_terms[t - 1][1] for t in terms], axis=0)
    return float(env.max())


COROLLARY_TERMS = {"cor2": (1, 4), "cor3": (1, 2, 3), "cor4": (1, 2, 3)}


def corollary_bound(which: str, inp: BoundInputs) -> float:
    s, a, b, g, d = inp.s, inp.alpha, inp.beta, inp.gamma, inp.d
    if which == "cor2":
        if g != 0:
            raise DomainError("cor2 needs gamma = 0 (commuting orthogonal parts)")
        if s == 0:
            return b
        return max(b, a + b - a * b / s)
    if which == "cor3":
        if b != 0:
            raise DomainError("cor3 needs beta = 0 (a single-point condensation set)")
        dp = min(d, a + d - 1)
        if s == 0:
            return 0.0
        return dp / (1 + (dp - a) / s)
    if which == "cor4":
        if b != 0:
            raise DomainError("cor4 needs beta = 0 (a single-point condensation set)")
        if a != 0:
            raise DomainError("cor4 needs alpha = 0 (maps with a common fixed point)")
        if s == 0:
            return 0.0
        return (d - 1) / (1 + (d - 1) / s)
    raise DomainError(f"unknown corollary {which!r}")


def classical_sandwich(s: float, beta: float, alpha: float | None = None) -> tuple[float, float]:
    """[max(alpha, beta), max(s, beta)]; alpha defaults to 0."""
    if s < 0 or beta < 0 or (alpha is not None and alpha < 0):
        raise DomainError("dimensions must be nonnegative")
    a = 0.0 if alpha is None else alpha
    return max(a, beta), max(s, beta)


def bound_report(inp: BoundInputs) -> dict:
    res = thm1_bound(inp)
    cross = {}
    for name, terms in COROLLARY_TERMS.items():
        try:
            closed = corollary_bound(name, inp)
        except DomainError as exc:
            cross[name] = {"applicable": False, "reason": str(exc)}
            continue
        restricted = thm1_bound(inp, terms).value
        cross[name] = {"applicable": True, "closed_form": closed, "restricted_envelope": restricted,
                       "agree": abs(closed - restricted) <= 1e-9}
    return {
        "inputs": asdict(inp),
        "envelope": [{"term": i + 1, "slope": a, "intercept": b} for i, (a, b) in enumerate(envelope_terms(inp))],
        "breakpoints": list(res.breakpoints),
        "value": res.value,
        "argmax_x": res.argmax_x,
        "active_terms": list(res.active_terms),
        "sandwich": list(classical_sandwich(inp.s, inp.beta, inp.alpha)),
        "corollaries": cross,
    }


def bound_report_json(inp: BoundInputs) -> str:
    return json.dumps(bound_report(inp), indent=2, sort_keys=True)


# ---------------------------------------------------------------- system quantities


def system_similarity_dimension(system: IfsSystem) -> float:
    return similarity_dimension(system.scales)


def alpha_r(system: IfsSystem, r: float, mode: str | None = None, tol: float | None = None) -> float:
    """Similarity dimension of the stopping set at r with equal maps identified."""
    from .overlap import DEFAULT_FLOAT_TOL, reduced_words

    mode = mode or ("exact" if system.is_exact else "float")
    words = reduced_words(system, r, mode, DEFAULT_FLOAT_TOL if tol is None else tol)
    scales = [float(np.prod(system.scales[list(w)])) for w in words]
    s = system_similarity_dimension(system)
    return similarity_dimension(scales, upper=system.dimension + s + 1)


@dataclass(frozen=True)
class ModifiedDimension:
    r_values: tuple
    alphas: tuple
    s_star: float
    monotone: bool
    truncated: bool = False


def modified_similarity_dimension(system: IfsSystem, r_schedule, mode: str | None = None) -> ModifiedDimension:
    rs = [float(r) for r in r_schedule]
    if not rs or any(not 0 < r < 1 for r in rs) or any(b >= a for a, b in zip(rs, rs[1:])):
        raise DomainError("r_schedule must be strictly decreasing in (0,1)")
    alphas, done = [], []
    truncated = False
    for r in rs:
        try:
            alphas.append(alpha_r(system, r, mode))
        except ResourceError:
            truncated = True
            break
        done.append(r)
    if not alphas:
        raise ResourceError("budget exhausted at the first r")
    monotone = all(b <= a + 1e-9 for a, b in zip(alphas, alphas[1:]))
    return ModifiedDimension(tuple(done), tuple(alphas), alphas[-1], monotone, truncated)


@dataclass(frozen=True)
class GammaEstimate:
    counts: dict
    roots: dict
    gamma_hat: float
    fit_from: int


def distinct_linear_parts(system: IfsSystem, k_max: int, budget: int = 5_000_000) -> dict:
    """|{T_I : I in level k}| for k = 0..k_max.

    The set of linear parts reachable by nonempty words is explored
    breadth first, merging parts that agree to 1e-9.
    """
    lin = [np.asarray(s.linear) for s in system.maps]
    floor_scale = 2.0 ** (-k_max - 1)
    d = system.dimension
    frontier = np.stack(lin)
    seen_keys = set()
    counts = {k: 0 for k in range(k_max + 1)}
    while frontier.shape[0]:
        scales = np.abs(np.linalg.det(frontier)) ** (1.0 / d)
        alive = scales > floor_scale * (1 + SCALE_RTOL)
        frontier, scales = frontier[alive], scales[alive]
        if frontier.shape[0] == 0:
            break
        keys = np.round(frontier.reshape(frontier.shape[0], -1) * 1e9).astype(np.int64)
        new = []
        for i, row in enumerate(map(bytes, keys)):
            if row not in seen_keys:
                seen_keys.add(row)
                new.append(i)
        if len(seen_keys) > budget:
            raise ResourceError("linear-part budget exceeded")
        frontier, scales = frontier[new], scales[new]
        for c in scales:
            k = scale_level(float(c))
            if k is not None and k <= k_max:
                counts[k] += 1
        frontier = np.concatenate([frontier @ t for t in lin]) if frontier.shape[0] else frontier
    return counts


def gamma_estimate(system: IfsSystem, k_max: int, fit_from: int = 4) -> GammaEstimate:
    """Per-level distinct linear-part counts and the fitted log2 growth rate."""
    counts = distinct_linear_parts(system, k_max)
    roots = {k: counts[k] ** (1.0 / k) for k in counts if k >= 1 and counts[k] > 0}
    ks = [k for k in counts if k >= fit_from and counts[k] > 0]
    if len(ks) < 2:
        ks = [k for k in counts if k >= 1 and counts[k] > 0]
    if len(ks) < 2:
        return GammaEstimate(counts, roots, 0.0, fit_from)
    slope = np.polyfit(ks, np.log2([counts[k] for k in ks]), 1)[0]
    return GammaEstimate(counts, roots, float(slope), fit_from)
