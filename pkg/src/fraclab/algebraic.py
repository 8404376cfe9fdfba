"""Integer polynomials, certified roots and Garsia/Pisot classification."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import mpmath

from .errors import DomainError, RefinementError, UndecidableError

DEFAULT_PRECISION = 1e-14
_MAX_DPS = 400


@dataclass(frozen=True)
class IntPolynomial:
    """Polynomial with integer coefficients in ascending degree order."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coefficients)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        if len(coeffs) < 2:
            raise DomainError("polynomial must have degree >= 1")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def parse(cls, text: str) -> "IntPolynomial":
        """Parse ``"x^3-2x-2"`` style text (also accepts ``*`` and ``**``)."""
        return cls(parse_polynomial(text))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading(self) -> int:
        return self.coefficients[-1]

    @property
    def constant(self) -> int:
        return self.coefficients[0]

    @property
    def is_monic(self) -> bool:
        return self.leading == 1

    def reversed(self) -> "IntPolynomial":
        """x^n p(1/x); its roots are the reciprocals of the roots of p."""
        coeffs = list(reversed(self.coefficients))
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
        return IntPolynomial(tuple(coeffs))

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def __str__(self):
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coefficients[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if k == 0:
                body = str(mag)
            else:
                body = ("" if mag == 1 else str(mag)) + ("x" if k == 1 else f"x^{k}")
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += sign + body
        return out


_TERM = re.compile(r"([+-]?)(\d*)(?:\*?(x)(?:(?:\^|\*\*)(\d+))?)?$")


def parse_polynomial(text: str) -> tuple[int, ...]:
    s = text.replace(" ", "").lower()
    if not s:
        raise DomainError("empty polynomial")
    pieces = re.findall(r"[+-]?[^+-]+", s)
    if "".join(pieces) != s:
        raise DomainError(f"cannot parse polynomial {text!r}")
    coeffs: dict[int, int] = {}
    for piece in pieces:
        m = _TERM.match(piece)
        if not m or (not m.group(2) and not m.group(3)):
            raise DomainError(f"cannot parse term {piece!r} in {text!r}")
        sign, digits, xvar, power = m.groups()
        c = int(digits) if digits else 1
        if sign == "-":
            c = -c
        k = 0 if not xvar else (int(power) if power else 1)
        coeffs[k] = coeffs.get(k, 0) + c
    deg = max(coeffs)
    return tuple(coeffs.get(k, 0) for k in range(deg + 1))


@dataclass(frozen=True)
class Root:
    """Root approximation together with a certified error radius."""

    value: complex
    radius: float
    real: bool = False

    @property
    def is_real(self) -> bool:
        return self.real

    def modulus_interval(self) -> tuple[float, float]:
        m = abs(self.value)
        return max(m - self.radius, 0.0), m + self.radius


def _inclusion_radii(coeffs, approx):
    """Smith-type inclusion disks for simultaneous root approximations.

    Each disk |z - z_i| <= n |p(z_i) / (a_n prod_{j != i}(z_i - z_j))| and
    every connected union of k disks holds exactly k roots.
    """
    n = len(approx)
    lead = coeffs[-1]
    radii = []
    for i, zi in enumerate(approx):
        denom = mpmath.mpf(lead)
        for j, zj in enumerate(approx):
            if i != j:
                denom *= zi - zj
        if denom == 0:
            return None
        # Horner rounding error bound: 2n eps sum |a_k| |z|^k
        slack = 2 * n * mpmath.eps * sum(abs(c) * abs(zi) ** k for k, c in enumerate(coeffs))
        resid = abs(mpmath.polyval(list(reversed(coeffs)), zi)) + slack
        radii.append(n * resid / abs(denom))
    # merge overlapping disks; every member gets the component's enclosing radius
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if abs(approx[i] - approx[j]) <= radii[i] + radii[j]:
                parent[find(i)] = find(j)
    comps: dict[int, list[int]] = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(i)
    out = list(radii)
    for members in comps.values():
        if len(members) == 1:
            continue
        for i in members:
            out[i] = max(abs(approx[i] - approx[j]) + radii[j] for j in members)
    return out


def find_roots(p: IntPolynomial, precision: float = DEFAULT_PRECISION) -> list[Root]:
    """All ``deg(p)`` roots, each certified to lie within its radius.

    Roots are sorted by (real part, imaginary part).  The working precision
    is raised until every radius is at most ``precision``.
    """
    if precision <= 0:
        raise DomainError("precision must be positive")
    coeffs = [int(c) for c in p.coefficients]
    if p.degree == 1:
        z = Fraction(-coeffs[0], coeffs[1])
        return [Root(complex(float(z), 0.0), float(abs(Fraction(float(z)) - z)) + 1e-300, True)]
    dps = 30
    while dps <= _MAX_DPS:
        with mpmath.workdps(dps):
            approx = _aberth(coeffs, dps)
            radii = _inclusion_radii(coeffs, approx)
            if radii is not None and max(radii) <= precision:
                roots = [_make_root(i, approx, radii) for i in range(len(approx))]
                roots.sort(key=lambda rt: (rt.value.real, rt.value.imag))
                return roots
        dps *= 2
    raise RefinementError(f"roots of {p} not certified to {precision:g}")


def _aberth(coeffs, dps):
    """Aberth-Ehrlich simultaneous iteration at the current working precision."""
    n = len(coeffs) - 1
    desc = [mpmath.mpf(c) for c in reversed(coeffs)]
    deriv = [c * (n - k) for k, c in enumerate(desc[:-1])]
    # Cauchy bound for the initial circle, offset angle to break symmetry
    bound = 1 + max(abs(c / desc[0]) for c in desc[1:])
    z = [
        bound * mpmath.expj(2 * mpmath.pi * k / n + 0.4) * mpmath.mpf(0.5 + 0.5 * k / n)
        for k in range(n)
    ]
    tol = mpmath.mpf(10) ** (-dps + 3)
    for _ in range(60 + 20 * dps):
        biggest = 0
        for i in range(n):
            pv = mpmath.polyval(desc, z[i])
            if pv == 0:
                continue
            ratio = pv / mpmath.polyval(deriv, z[i])
            s = mpmath.fsum(1 / (z[i] - z[j]) for j in range(n) if j != i)
            step = ratio / (1 - ratio * s)
            z[i] -= step
            biggest = max(biggest, abs(step) / (1 + abs(z[i])))
        if biggest < tol:
            break
    return [mpmath.mpc(w) for w in z]


def _make_root(i, approx, radii):
    z, r = approx[i], radii[i]
    real = False
    if abs(z.imag) <= r:
        # a disk centred on the axis that meets no other disk holds one root;
        # the conjugate of that root lies in the same disk, so it is real
        big = abs(z.imag) + r
        real = all(
            abs(z.real - approx[j]) > big + radii[j] for j in range(len(approx)) if j != i
        )
        if real:
            z, r = mpmath.mpc(z.real, 0), big
    val = complex(z)
    # rounding to double adds at most one ulp per component
    rad = float(r) + 4e-16 * abs(val) + 1e-300
    return Root(val, rad, real)


@dataclass(frozen=True)
class AlgebraicNumber:
    """A selected root of an integer polynomial.

    ``root_index`` indexes the roots sorted by (real part, imaginary part).
    """

    polynomial: IntPolynomial
    root_index: int
    precision: float = DEFAULT_PRECISION
    _roots: tuple[Root, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if not self._roots:
            object.__setattr__(self, "_roots", tuple(find_roots(self.polynomial, self.precision)))
        if not 0 <= self.root_index < len(self._roots):
            raise DomainError(f"root index {self.root_index} out of range")

    @classmethod
    def largest_real(cls, polynomial, precision: float = DEFAULT_PRECISION):
        """The largest real root (the usual choice for Garsia/Pisot numbers)."""
        if isinstance(polynomial, str):
            polynomial = IntPolynomial.parse(polynomial)
        roots = find_roots(polynomial, precision)
        real = [i for i, r in enumerate(roots) if r.is_real]
        if not real:
            raise DomainError(f"{polynomial} has no real root")
        idx = max(real, key=lambda i: roots[i].value.real)
        return cls(polynomial, idx, precision, tuple(roots))

    @property
    def roots(self) -> tuple[Root, ...]:
        return self._roots

    @property
    def root(self) -> Root:
        return self._roots[self.root_index]

    @property
    def is_real(self) -> bool:
        return self.root.is_real

    @cached_property
    def value(self) -> float:
        if not self.is_real:
            raise DomainError("selected root is not real")
        return self.root.value.real

    def reciprocal(self) -> float:
        """1/value, correctly rounded (Newton refinement at 50 digits first)."""
        with mpmath.workdps(50):
            coeffs = [mpmath.mpf(c) for c in reversed(self.polynomial.coefficients)]
            dcoeffs = [c * k for c, k in zip(coeffs[:-1], range(len(coeffs) - 1, 0, -1))]
            x = mpmath.mpf(self.value)
            for _ in range(8):
                dp = mpmath.polyval(dcoeffs, x)
                if dp == 0:
                    return 1.0 / self.value
                x -= mpmath.polyval(coeffs, x) / dp
            if abs(x - self.value) > 4 * self.root.radius + 1e-300:
                return 1.0 / self.value
            return float(1 / x)

    def conjugates(self) -> list[Root]:
        return [r for i, r in enumerate(self._roots) if i != self.root_index]

    def refined(self, factor: float = 1e-6) -> "AlgebraicNumber":
        return AlgebraicNumber(self.polynomial, self.root_index, self.precision * factor)


def _require_monic_real(theta: AlgebraicNumber):
    if not theta.polynomial.is_monic:
        raise DomainError(f"{theta.polynomial} is not monic")
    if not theta.is_real:
        raise DomainError("selected root is not real")


def _modulus_vs_one(root: Root) -> int:
    """+1 if |z| > 1 certainly, -1 if |z| < 1 certainly; else undecidable."""
    lo, hi = root.modulus_interval()
    if lo > 1.0:
        return 1
    if hi < 1.0:
        return -1
    raise UndecidableError(f"|{root.value}| is within {root.radius:g} of 1")


def is_garsia(theta: AlgebraicNumber) -> bool:
    """Positive real algebraic integer of norm +-2 whose conjugates all exceed 1 in modulus."""
    _require_monic_real(theta)
    if abs(theta.polynomial.constant) != 2:
        return False
    lo = theta.value - theta.root.radius
    if theta.value + theta.root.radius <= 0:
        return False
    if lo <= 0:
        raise UndecidableError("sign of selected root not certified")
    return all(_modulus_vs_one(r) > 0 for r in theta.roots)


def is_pisot(theta: AlgebraicNumber) -> bool:
    """Real algebraic integer > 1 whose other conjugates all lie inside the unit disk."""
    _require_monic_real(theta)
    if _modulus_vs_one(theta.root) < 0 or theta.value < 0:
        return False
    return all(_modulus_vs_one(r) < 0 for r in theta.conjugates())


class LambdaClass(str, enum.Enum):
    GARSIA_RECIPROCAL = "garsia_reciprocal"
    PISOT_RECIPROCAL = "pisot_reciprocal"
    UNCLASSIFIED = "unclassified"


def classify_lambda(lam) -> LambdaClass:
    """Classify lambda in (0,1) through its reciprocal.

    ``lam`` is either a plain float (always unclassified) or an
    AlgebraicNumber for theta = 1/lambda.  Garsia wins ties (only x - 2 can
    be both).
    """
    if isinstance(lam, AlgebraicNumber):
        theta = lam
        lam_value = theta.reciprocal()
    else:
        theta = None
        lam_value = float(lam)
    if not 0.0 < lam_value < 1.0:
        raise DomainError(f"lambda={lam_value!r} is not in (0,1)")
    if theta is None:
        return LambdaClass.UNCLASSIFIED
    if is_garsia(theta):
        return LambdaClass.GARSIA_RECIPROCAL
    if is_pisot(theta):
        return LambdaClass.PISOT_RECIPROCAL
    return LambdaClass.UNCLASSIFIED


def theta_from_text(text: str) -> AlgebraicNumber:
    """Largest real root of a polynomial given as text."""
    return AlgebraicNumber.largest_real(IntPolynomial.parse(text))
