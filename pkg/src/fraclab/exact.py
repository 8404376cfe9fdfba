"""Exact arithmetic in Q(lambda) for overlap detection.

Elements are rational coefficient vectors in the power basis of lambda,
reduced modulo an integer polynomial that lambda satisfies.  Equality of
reduced vectors implies equality of the real numbers; the converse holds
when the polynomial is irreducible (the caller's responsibility).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebraic import AlgebraicNumber, IntPolynomial
from .errors import DomainError


class NumberField:
    """Q[x]/(q) together with the real value of the generator."""

    def __init__(self, modulus: IntPolynomial, value: float):
        self.modulus = modulus
        self.value = float(value)
        lead = Fraction(modulus.leading)
        # x^deg = -sum_{k<deg} (q_k / q_deg) x^k
        self._tail = tuple(-Fraction(c) / lead for c in modulus.coefficients[:-1])

    @property
    def degree(self) -> int:
        return self.modulus.degree

    @classmethod
    def rational(cls, value=0) -> "NumberField":
        """The field Q, presented with generator ``value`` (a rational)."""
        q = Fraction(value)
        return cls(IntPolynomial((-q.numerator, q.denominator)), float(q))

    @classmethod
    def reciprocal_of(cls, theta: AlgebraicNumber) -> "NumberField":
        """Field generated by lambda = 1/theta."""
        return cls(theta.polynomial.reversed(), theta.reciprocal())

    def element(self, coeffs) -> "FieldElement":
        return FieldElement(self, self._reduce([Fraction(c) for c in coeffs]))

    def const(self, q) -> "FieldElement":
        return self.element([q])

    @property
    def gen(self) -> "FieldElement":
        return self.element([0, 1])

    @property
    def zero(self) -> "FieldElement":
        return self.element([0])

    @property
    def one(self) -> "FieldElement":
        return self.element([1])

    def _reduce(self, coeffs: list[Fraction]) -> tuple[Fraction, ...]:
        deg = self.degree
        coeffs = list(coeffs)
        for k in range(len(coeffs) - 1, deg - 1, -1):
            c = coeffs[k]
            if c:
                for j, t in enumerate(self._tail):
                    coeffs[k - deg + j] += c * t
            coeffs[k] = Fraction(0)
        coeffs = coeffs[:deg] + [Fraction(0)] * (deg - len(coeffs))
        return tuple(coeffs)

    def power_table(self, n: int) -> list["FieldElement"]:
        """lambda^0 .. lambda^(n-1)."""
        out = [self.one]
        g = self.gen
        for _ in range(n - 1):
            out.append(out[-1] * g)
        return out

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.modulus == other.modulus

    def __hash__(self):
        return hash(self.modulus)

    def __repr__(self):
        return f"NumberField({self.modulus}, {self.value!r})"


@dataclass(frozen=True)
class FieldElement:
    field: NumberField
    coeffs: tuple[Fraction, ...]

    def _lift(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise DomainError("elements of different fields")
            return other
        return self.field.const(Fraction(other))

    def __add__(self, other):
        o = self._lift(other)
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, FieldElement):
            q = Fraction(other)
            return FieldElement(self.field, tuple(a * q for a in self.coeffs))
        o = self._lift(other)
        prod = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    prod[i + j] += a * b
        return FieldElement(self.field, self.field._reduce(prod))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            try:
                other = self._lift(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __float__(self):
        x = self.field.value
        return float(sum(float(c) * x**k for k, c in enumerate(self.coeffs)))

    def __repr__(self):
        return f"FieldElement({[str(c) for c in self.coeffs]})"


@dataclass(frozen=True)
class ExactSimilarity:
    """x -> scale * matrix @ x + translation with exact entries."""

    scale: FieldElement
    matrix: tuple[tuple[Fraction, ...], ...]
    translation: tuple[FieldElement, ...]

    @property
    def dimension(self) -> int:
        return len(self.translation)

    @classmethod
    def identity(cls, field: NumberField, d: int) -> "ExactSimilarity":
        eye = tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))
        return cls(field.one, eye, tuple(field.zero for _ in range(d)))

    def then(self, other: "ExactSimilarity") -> "ExactSimilarity":
        """self o other."""
        d = self.dimension
        mat = tuple(
            tuple(sum((self.matrix[i][k] * other.matrix[k][j] for k in range(d)), Fraction(0)) for j in range(d))
            for i in range(d)
        )
        rotated = []
        for i in range(d):
            acc = self.translation[i]
            for k in range(d):
                if self.matrix[i][k]:
                    acc = acc + self.scale * other.translation[k] * self.matrix[i][k]
            rotated.append(acc)
        return ExactSimilarity(self.scale * other.scale, mat, tuple(rotated))

    def key(self):
        return (self.scale.coeffs, self.matrix, tuple(t.coeffs for t in self.translation))


def rational_matrix(m) -> tuple[tuple[Fraction, ...], ...] | None:
    """Exact rational version of a float matrix, or None if not small-rational."""
    out = []
    for row in np.asarray(m, dtype=float):
        r = []
        for v in row:
            q = Fraction(v).limit_denominator(10**6)
            if abs(float(q) - v) > 1e-15:
                return None
            r.append(q)
        out.append(tuple(r))
    return tuple(out)
