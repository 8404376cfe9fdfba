import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fraclab.algebraic import (
    AlgebraicNumber,
    IntPolynomial,
    LambdaClass,
    classify_lambda,
    find_roots,
    is_garsia,
    is_pisot,
    parse_polynomial,
    theta_from_text,
)
from fraclab.errors import DomainError, UndecidableError


def _oracle_roots(coeffs):
    # mpmath polyroots wants descending order
    with mpmath.workdps(40):
        return sorted((complex(r) for r in mpmath.polyroots(list(reversed(coeffs)), maxsteps=200, extraprec=200)),
                      key=lambda z: (z.real, z.imag))


def test_parse_forms():
    assert parse_polynomial("x^3-2x-2") == (-2, -2, 0, 1)
    assert parse_polynomial("x**2 - x - 1") == (-1, -1, 1)
    assert parse_polynomial("3*x^2+1") == (1, 0, 3)
    assert IntPolynomial.parse("x-2").degree == 1


@pytest.mark.parametrize("text", ["x^2+y", "", "x^-1", "2.5x"])
def test_parse_rejects(text):
    with pytest.raises(DomainError):
        parse_polynomial(text)


def test_constant_polynomial_rejected():
    with pytest.raises(DomainError):
        IntPolynomial((3, 0, 0))


def test_roots_sqrt2():
    roots = find_roots(IntPolynomial.parse("x^2-2"))
    vals = sorted(r.value.real for r in roots)
    assert all(r.is_real for r in roots)
    assert abs(vals[0] + math.sqrt(2)) < 1e-12 and abs(vals[1] - math.sqrt(2)) < 1e-12


def test_roots_linear():
    (r,) = find_roots(IntPolynomial.parse("x-2"))
    assert r.is_real and r.value == 2


def test_roots_cubic_garsia():
    roots = find_roots(IntPolynomial.parse("x^3-2x-2"))
    real = [r for r in roots if r.is_real]
    cplx = [r for r in roots if not r.is_real]
    assert len(real) == 1 and abs(real[0].value.real - 1.76929235423863) < 1e-12
    assert len(cplx) == 2 and abs(cplx[0].value - cplx[1].value.conjugate()) < 1e-12


def test_radii_cover_oracle():
    for text in ("x^3-2x-2", "x^5-x-1", "x^4-2", "2x^3-3x+1", "x^6+x^5-3"):
        p = IntPolynomial.parse(text)
        ours = find_roots(p)
        for z in _oracle_roots(p.coefficients):
            assert any(abs(z - r.value) <= r.radius + 1e-15 for r in ours), (text, z)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=2, max_size=7).filter(lambda c: c[-1] != 0 and c[0] != 0))
def test_vieta(coeffs):
    p = IntPolynomial(tuple(coeffs))
    try:
        roots = find_roots(p)
    except Exception as exc:  # repeated roots may refuse to certify
        pytest.skip(f"no certificate: {exc}")
    n = p.degree
    assert len(roots) == n
    total = sum(r.value for r in roots)
    rad = sum(r.radius for r in roots)
    assert abs(total - Fraction(-coeffs[-2], coeffs[-1])) <= rad + 1e-9 * (1 + abs(total))
    prod = np.prod([r.value for r in roots])
    expect = (-1) ** n * coeffs[0] / coeffs[-1]
    assert abs(prod - expect) <= 1e-8 * (1 + abs(expect))


@pytest.mark.parametrize("text,expected", [("x^2-2", True), ("x^3-2x-2", True), ("x^2-x-1", False), ("x^3-2", True)])
def test_is_garsia(text, expected):
    assert is_garsia(theta_from_text(text)) is expected


@pytest.mark.parametrize("text,expected", [("x^2-x-1", True), ("x^2-2", False), ("x-2", True), ("x^3-x-1", True)])
def test_is_pisot(text, expected):
    assert is_pisot(theta_from_text(text)) is expected


def test_garsia_pisot_exclusive_except_linear():
    polys = ["x^2-2", "x^3-2", "x^3-2x-2", "x^2-x-1", "x^3-x-1", "x^2-3x+1", "x^4-2", "x^2-2x-2", "x-2", "x-3"]
    for text in polys:
        theta = theta_from_text(text)
        g, p = is_garsia(theta), is_pisot(theta)
        if g:
            assert abs(theta.polynomial.constant) == 2
        if text != "x-2":
            assert not (g and p), text


def test_unit_modulus_is_undecidable():
    with pytest.raises(UndecidableError):
        is_pisot(theta_from_text("x^2-1"))


def test_non_monic_rejected():
    with pytest.raises(DomainError):
        is_garsia(theta_from_text("2x^2-2"))


@pytest.mark.parametrize("text,cls", [
    ("x^2-2", LambdaClass.GARSIA_RECIPROCAL),
    ("x^2-x-1", LambdaClass.PISOT_RECIPROCAL),
    ("x-2", LambdaClass.GARSIA_RECIPROCAL),
    ("x^2-3", LambdaClass.UNCLASSIFIED),
])
def test_classify(text, cls):
    assert classify_lambda(theta_from_text(text)) is cls


def test_classify_plain_float():
    assert classify_lambda(0.55) is LambdaClass.UNCLASSIFIED
    with pytest.raises(DomainError):
        classify_lambda(1.5)


def test_reciprocal_correctly_rounded():
    assert theta_from_text("x^2-2").reciprocal() == 2**-0.5
    with mpmath.workdps(50):
        golden = float((mpmath.sqrt(5) - 1) / 2)
        cube = float(mpmath.mpf(2) ** (-mpmath.mpf(1) / 3))
    assert theta_from_text("x^2-x-1").reciprocal() == golden
    assert theta_from_text("x^3-2").reciprocal() == cube


def test_root_index_checked():
    p = IntPolynomial.parse("x^2-2")
    with pytest.raises(DomainError):
        AlgebraicNumber(p, 5)
