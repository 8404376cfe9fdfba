"""Sum sets A_n(lambda) = {(1 - lambda) sum i_k lambda^(k-1)} and their gaps.

Word codes: bit k-1 of the integer code is the letter i_k, so the code of
the word (1, 0, 0) is 1 and that of (0, 1, 1) is 6.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebraic import AlgebraicNumber, IntPolynomial
from .errors import DomainError, ResourceError
from .exact import NumberField

N_BUDGET = 30
FULL_ENUM_MAX = 24
DEFAULT_DEDUP_TOL = 1e-12
DEFAULT_SEED = 0xF1D0
DEFAULT_SCAN_INTERVAL = (0.5, 0.668)


def resolve_lambda(lam) -> tuple[float, NumberField | None]:
    """Float value and, when available, an exact field for lambda.

    ``lam`` may be a float, a Fraction or rational string, an
    AlgebraicNumber theta (lambda = 1/theta), an IntPolynomial for theta
    (largest real root) or a NumberField whose generator is lambda.
    """
    if isinstance(lam, NumberField):
        fld = lam
    elif isinstance(lam, IntPolynomial):
        fld = NumberField.reciprocal_of(AlgebraicNumber.largest_real(lam))
    elif isinstance(lam, AlgebraicNumber):
        fld = NumberField.reciprocal_of(lam)
    elif isinstance(lam, (Fraction, str)):
        fld = NumberField.rational(Fraction(lam))
    else:
        fld = None
    value = fld.value if fld is not None else float(lam)
    if not 0.0 < value < 1.0:
        raise DomainError(f"lambda={value!r} not in (0,1)")
    return value, fld


def word_of(code: int, n: int) -> tuple:
    return tuple((int(code) >> k) & 1 for k in range(n))


def word_value(lam: float, word) -> float:
    return (1.0 - lam) * math.fsum(i * lam**k for k, i in enumerate(word))


def _check_n(n):
    if n < 1:
        raise DomainError("n must be positive")
    if n > N_BUDGET:
        raise ResourceError(f"n={n} exceeds the enumeration budget {N_BUDGET}")


def _all_sums(lam: float, n: int, offset: int = 0) -> np.ndarray:
    """sum_{k<n} i_k (1-lam) lam^(k+offset) for all codes, compensated summation."""
    vals = np.zeros(1)
    comp = np.zeros(1)
    for k in range(n):
        term = (1.0 - lam) * lam ** (k + offset)
        t = vals + term
        bp = t - vals
        err = (vals - (t - bp)) + (term - bp)
        vals = np.concatenate([vals, t])
        comp = np.concatenate([comp, comp + err])
    return vals + comp


def _exact_sums(fld: NumberField, n: int) -> np.ndarray:
    """Integer coefficient vectors of sum i_k lambda^(k-1), one row per code."""
    powers = [p.coeffs for p in fld.power_table(n)]
    den = 1
    for row in powers:
        for c in row:
            den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [[int(c * den) for c in row] for row in powers]
    bound = sum(max(abs(v) for v in row) for row in ints)
    dtype = np.int64 if bound < 2**62 else object
    vecs = np.zeros((1, fld.degree), dtype=dtype)
    for row in ints:
        vecs = np.concatenate([vecs, vecs + np.array(row, dtype=dtype)])
    return vecs


def _exact_classes(vecs: np.ndarray) -> np.ndarray:
    """Label codes by exact value; label = smallest code with that value."""
    if vecs.dtype == object:
        first = {}
        labels = np.empty(vecs.shape[0], dtype=np.int64)
        for code, row in enumerate(map(tuple, vecs)):
            labels[code] = first.setdefault(row, code)
        return labels
    _, idx, inv = np.unique(vecs, axis=0, return_index=True, return_inverse=True)
    return idx[inv.reshape(-1)]


@dataclass(frozen=True, eq=False)
class SumSet:
    lam: float
    n: int
    values: np.ndarray
    codes: np.ndarray
    exact: bool = False

    def __len__(self):
        return self.values.size

    def word(self, i: int) -> tuple:
        return word_of(self.codes[i], self.n)


def sum_set(lam, n: int, dedup_tol: float = DEFAULT_DEDUP_TOL, exact: bool | None = None) -> SumSet:
    """Sorted distinct elements of A_n(lambda), each with its least word code.

    With exact data for lambda (and ``exact`` not False), equality is
    decided in Q(lambda); otherwise consecutive sorted values closer than
    ``dedup_tol`` are merged.
    """
    value, fld = resolve_lambda(lam)
    _check_n(n)
    if n > FULL_ENUM_MAX + 2:
        raise ResourceError(f"sum set for n={n} is too large to store")
    vals = _all_sums(value, n)
    codes = np.arange(vals.size, dtype=np.int64)
    use_exact = fld is not None and exact is not False
    if use_exact:
        labels = _exact_classes(_exact_sums(fld, n))
        keep = np.flatnonzero(labels == codes)
        vals, codes = vals[keep], codes[keep]
        order = np.lexsort((codes, vals))
        vals, codes = vals[order], codes[order]
    else:
        order = np.lexsort((codes, vals))
        vals, codes = vals[order], codes[order]
        if vals.size > 1:
            keep = np.ones(vals.size, dtype=bool)
            keep[1:] = np.diff(vals) > dedup_tol
            vals, codes = vals[keep], codes[keep]
    return SumSet(value, n, vals, codes, use_exact)


def r2_count(s: float, lam, n: int, **kw) -> int:
    """Ordered pairs a != b in A_n with |a - b| <= s 2^-n."""
    if s < 0:
        raise DomainError("s must be nonnegative")
    v = sum_set(lam, n, **kw).values
    thr = s * 2.0**-n
    hi = np.searchsorted(v, v + thr, side="right")
    return int(2 * np.sum(hi - np.arange(v.size) - 1))


def t_count(s: float, lam, n: int, **kw) -> int:
    """Elements a of A_n having some b != a with |a - b| <= s 2^-n."""
    if s < 0:
        raise DomainError("s must be nonnegative")
    v = sum_set(lam, n, **kw).values
    if v.size < 2:
        return 0
    thr = s * 2.0**-n
    gaps = np.diff(v)
    close = np.zeros(v.size, dtype=bool)
    close[1:] |= gaps <= thr
    close[:-1] |= gaps <= thr
    return int(close.sum())


@dataclass(frozen=True)
class GapReport:
    lam: float
    n: int
    min_gap: float
    scaled_gap: float
    witness: tuple
    collision: bool
    distinct: int | None = None
    meta: dict = field(default_factory=dict)


def _witness(lam, n, ca, cb):
    wa, wb = word_of(ca, n), word_of(cb, n)
    return (wa, wb) if wa <= wb else (wb, wa)


def gap_report(lam, n: int, dedup_tol: float = DEFAULT_DEDUP_TOL, full_max: int = FULL_ENUM_MAX) -> GapReport:
    """Smallest distance between values of distinct words of length n.

    A collision (equal values, decided exactly when possible, else within
    ``dedup_tol``) gives min_gap 0.  Beyond ``full_max`` the sums are
    streamed as translates of a half-length sum set.
    """
    value, fld = resolve_lambda(lam)
    _check_n(n)
    if n > full_max:
        return _gap_streaming(value, n, dedup_tol)
    vals = _all_sums(value, n)
    codes = np.arange(vals.size, dtype=np.int64)
    if fld is not None:
        labels = _exact_classes(_exact_sums(fld, n))
        dup = np.flatnonzero(labels != codes)
        if dup.size:
            cb = int(dup[0])
            w = _witness(value, n, int(labels[cb]), cb)
            return GapReport(value, n, 0.0, 0.0, w, True, int(np.sum(labels == codes)), {"mode": "exact"})
    order = np.lexsort((codes, vals))
    vals, codes = vals[order], codes[order]
    gaps = np.diff(vals)
    i = int(np.argmin(gaps))
    g = float(gaps[i])
    collision = fld is None and g <= dedup_tol
    if collision:
        g = 0.0
    w = _witness(value, n, int(codes[i]), int(codes[i + 1]))
    mode = "exact" if fld is not None else "float"
    return GapReport(value, n, g, g * 2.0**n, w, collision, None, {"mode": mode})


def _gap_streaming(lam: float, n: int, dedup_tol: float, window_values: int = 1 << 22) -> GapReport:
    h = n // 2
    low = _all_sums(lam, h)
    high = _all_sums(lam, n - h, offset=h)
    lo_order = np.argsort(low, kind="stable")
    low_s = low[lo_order]
    n_windows = max(1, (1 << n) // window_values)
    edges = np.linspace(0.0, 1.0, n_windows + 1)
    edges[-1] = np.inf
    best = (np.inf, None, None)
    carry = None  # (value, code) of the largest value in earlier windows
    for w in range(n_windows):
        a, b = edges[w], edges[w + 1]
        i0 = np.searchsorted(low_s, a - high, side="left")
        i1 = np.searchsorted(low_s, b - high, side="left")
        lens = i1 - i0
        total = int(lens.sum())
        if total == 0:
            continue
        hb = np.repeat(np.arange(high.size), lens)
        starts = np.cumsum(lens) - lens
        li = i0[hb] + (np.arange(total) - starts[hb])
        vals = low_s[li] + high[hb]
        codes = lo_order[li].astype(np.int64) | (hb.astype(np.int64) << h)
        if carry is not None:
            vals = np.concatenate([[carry[0]], vals])
            codes = np.concatenate([[carry[1]], codes])
        order = np.lexsort((codes, vals))
        vals, codes = vals[order], codes[order]
        if vals.size > 1:
            gaps = np.diff(vals)
            i = int(np.argmin(gaps))
            if gaps[i] < best[0]:
                best = (float(gaps[i]), int(codes[i]), int(codes[i + 1]))
        carry = (vals[-1], codes[-1])
    g, ca, cb = best
    collision = g <= dedup_tol
    if collision:
        g = 0.0
    return GapReport(lam, n, g, g * 2.0**n, _witness(lam, n, ca, cb), collision, None,
                     {"mode": "float", "streamed": True, "windows": n_windows})


def lambda_points(lam, k: int, **kw) -> SumSet:
    """Base points S_I(0) over all words of length <= k (x coordinates)."""
    value, _ = resolve_lambda(lam)
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k == 0:
        return SumSet(value, 0, np.zeros(1), np.zeros(1, dtype=np.int64))
    parts = [sum_set(lam, j, **kw) for j in range(1, k + 1)]
    vals = np.concatenate([np.zeros(1)] + [p.values for p in parts])
    codes = np.concatenate([np.zeros(1, dtype=np.int64)] + [p.codes for p in parts])
    tol = kw.get("dedup_tol", DEFAULT_DEDUP_TOL)
    order = np.lexsort((codes, vals))
    vals, codes = vals[order], codes[order]
    keep = np.ones(vals.size, dtype=bool)
    keep[1:] = np.diff(vals) > tol
    return SumSet(value, k, vals[keep], codes[keep], parts[-1].exact)


def well_separated_count(lam, n: int, kappa: float = 1.0, **kw) -> int:
    """Elements a of A_n with |a - b| > kappa / (n^2 2^n) for every other b."""
    if kappa < 0:
        raise DomainError("kappa must be nonnegative")
    v = sum_set(lam, n, **kw).values
    if v.size < 2:
        return int(v.size)
    thr = kappa / (n * n * 2.0**n)
    gaps = np.diff(v)
    ok = np.ones(v.size, dtype=bool)
    ok[1:] &= gaps > thr
    ok[:-1] &= gaps > thr
    return int(ok.sum())


def separation_table(lam, n_values, kappa: float = 1.0) -> str:
    """CSV with header n,count_A,min_gap,scaled_gap,well_separated."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "count_A", "min_gap", "scaled_gap", "well_separated"])
    for n in n_values:
        rep = gap_report(lam, n)
        count = len(sum_set(lam, n)) if n <= FULL_ENUM_MAX else ""
        ws = well_separated_count(lam, n, kappa) if n <= FULL_ENUM_MAX else ""
        w.writerow([n, count, repr(rep.min_gap), repr(rep.scaled_gap), ws])
    return buf.getvalue()


@dataclass(frozen=True)
class ScanRow:
    lam: float
    target: float
    separated: dict
    pass_fraction: float
    passes_all: bool
    slope: float | None = None


@dataclass(frozen=True)
class ScanReport:
    rows: tuple
    interval: tuple
    n_range: tuple
    seed: int
    kappa: float

    @property
    def n_passing(self) -> int:
        return sum(r.passes_all for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        ns = list(range(self.n_range[0], self.n_range[1] + 1))
        w.writerow(["lambda", "log2_4lambda", "pass_fraction", "passes_all", "slope"] + [f"ws_{n}" for n in ns])
        for r in self.rows:
            slope = "" if r.slope is None else repr(r.slope)
            w.writerow([repr(r.lam), repr(r.target), repr(r.pass_fraction), int(r.passes_all), slope]
                       + [r.separated[n] for n in ns])
        return buf.getvalue()


def scan_lambdas(interval=DEFAULT_SCAN_INTERVAL, samples: int = 20, seed: int = DEFAULT_SEED) -> np.ndarray:
    lo, hi = float(interval[0]), float(interval[1])
    if not 0.0 < lo <= hi < 1.0:
        raise DomainError("scan interval must lie in (0,1)")
    if samples < 1:
        raise DomainError("need at least one sample")
    if lo == hi:
        return np.full(1, lo)
    return np.random.default_rng(seed).uniform(lo, hi, samples)


def monte_carlo_scan(
    interval=DEFAULT_SCAN_INTERVAL,
    samples: int = 20,
    n_max: int = 14,
    seed: int = DEFAULT_SEED,
    *,
    n_min: int = 6,
    kappa: float = 1.0,
    boxdim_samples: int = 0,
    m_range=range(6, 16),
    window=(8, 15),
) -> ScanReport:
    """Well-separation counts for seeded uniform samples of lambda.

    A sample passes at n when at least 2^(n-1) elements of A_n are
    well separated.  The first ``boxdim_samples`` samples also get a
    box-dimension estimate of the comb.
    """
    from .boxcount import count_curve, estimate_dimension
    from .ifs import bernoulli_comb

    if n_min > n_max:
        raise DomainError("n_min must not exceed n_max")
    lams = scan_lambdas(interval, samples, seed)
    rows = []
    for i, lam in enumerate(lams):
        lam = float(lam)
        sep = {n: well_separated_count(lam, n, kappa) for n in range(n_min, n_max + 1)}
        passed = [sep[n] >= 2 ** (n - 1) for n in sep]
        slope = None
        if i < boxdim_samples:
            curve = count_curve(bernoulli_comb(lam), m_range)
            slope = estimate_dimension(curve, window).slope
        rows.append(ScanRow(lam, math.log2(4 * lam), sep, sum(passed) / len(passed), all(passed), slope))
    return ScanReport(tuple(rows), tuple(interval), (n_min, n_max), seed, kappa)
