"""Backends, polynomials and number fields."""
from fractions import Fraction

import numpy as np
import pytest
import sympy

from multiquad.backend import (FLOAT64, RATIONAL, RATIONAL_GMP, det_exact, det_float, det_generic, det_permutation,
                               fast_rational, get_backend, is_rational, rank_exact, rank_float, solve_exact,
                               solve_float, to_fraction)
from multiquad.errors import ConfigError, SingularSystem
from multiquad.numberfield import NumberField, factor_rational
from multiquad.polynomial import Polynomial

F = Fraction


def hilbert(n):
    return [[F(1, i + j + 1) for j in range(n)] for i in range(n)]


def test_to_fraction():
    assert to_fraction("3/4") == F(3, 4)
    assert to_fraction(0.5) == F(1, 2)
    assert to_fraction(7) == 7
    for bad in ("x", "1/0", True, float("inf"), None):
        with pytest.raises(ConfigError):
            to_fraction(bad)


def test_fast_rational_is_exact():
    q = fast_rational(F(2, 7))
    assert is_rational(q) and q == F(2, 7)
    assert fast_rational(0.1) == F(0.1)
    assert float(fast_rational(F(1, 3)) * 3) == 1.0


def test_get_backend():
    assert get_backend("rational") is RATIONAL
    assert get_backend(FLOAT64) is FLOAT64
    with pytest.raises(ConfigError):
        get_backend("quad")


def test_exact_linear_algebra_matches_sympy():
    H = hilbert(6)
    ref = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in H])
    d = det_exact(H)
    assert d == F(int(ref.det().p), int(ref.det().q))
    b = [F(k) for k in range(6)]
    x = solve_exact(H, b)
    assert [sum(a * c for a, c in zip(row, x)) for row in H] == b
    assert rank_exact(H) == 6
    assert rank_exact([[1, 2], [2, 4]]) == 1
    with pytest.raises(SingularSystem):
        solve_exact([[1, 2], [2, 4]], [1, 1])


def test_float_linear_algebra_matches_numpy():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(5, 5))
    b = rng.normal(size=5)
    assert np.allclose(solve_float(a.tolist(), b.tolist()), np.linalg.solve(a, b))
    assert det_float(a.tolist()) == pytest.approx(np.linalg.det(a), rel=1e-12)
    assert rank_float([[1.0, 2.0], [2.0, 4.0 + 1e-14]]) == 1
    assert rank_float(a.tolist()) == 5
    with pytest.raises(SingularSystem):
        solve_float([[1.0, 2.0], [2.0, 4.0]], [1.0, 0.0])


def test_det_routes_agree():
    H = hilbert(4)
    assert det_permutation(H) == det_exact(H)
    assert det_generic(H, True) == det_exact(H)
    assert det_generic([[float(v) for v in row] for row in H], False) == pytest.approx(float(det_exact(H)), rel=1e-9)
    assert det_generic([[2, 1j], [1j, 1]], False) == pytest.approx(3)


def test_polynomial_arithmetic():
    p = Polynomial((1, 2, 3))
    q = Polynomial((0, 1))
    assert (p * q).coeffs == (0, 1, 2, 3)
    assert (p - p).coeffs == ()
    assert p.degree == 2 and Polynomial().degree == -1
    assert p(2) == 17
    assert p.deriv().coeffs == (2, 6)
    assert p.mul_x() == p * q
    assert (2 * p).coeffs == (2, 4, 6)
    assert (p / 2)(2) == 8.5


def test_polynomial_from_roots_and_deflate():
    roots = [F(1, 2), F(-1, 3), F(2)]
    p = Polynomial.from_roots(roots)
    assert all(p(z) == 0 for z in roots)
    q, rem = p.deflate(F(2))
    assert rem == 0 and q == Polynomial.from_roots(roots[:2])
    assert p.integrate(lambda k: F(1, k + 1)) == sum(c * F(1, k + 1) for k, c in enumerate(p.coeffs))


def test_number_field_trace_and_inverse():
    K = NumberField([F(1, 6), F(-1), F(1)])  # roots 1/2 -+ 1/(2 sqrt 3)
    x = K.gen
    assert (x * x - x + F(1, 6)) == 0
    assert x.trace() == 1
    inv = (x + 1).inverse()
    assert inv * (x + 1) == 1
    r = 0.5 - 1 / (2 * 3 ** 0.5)
    assert (x ** 3).at(r) == pytest.approx(r ** 3)
    assert ((x ** 4).trace()) == pytest.approx(r ** 4 + (1 - r) ** 4)


def test_number_field_degree_one():
    K = NumberField([F(-2, 3), F(1)])
    assert K.gen.rational() == F(2, 3)
    assert K.gen.trace() == F(2, 3)


def test_factor_rational():
    p = Polynomial.from_roots([F(1), F(1), F(2)]) * Polynomial((F(-2), 0, 1))
    facs = factor_rational(p)
    assert ((F(-1), F(1)), 2) in facs
    assert ((F(-2), F(1)), 1) in facs
    assert ((F(-2), F(0), F(1)), 1) in facs


def test_gmp_backend_gives_same_values():
    H = hilbert(5)
    b = [F(1)] * 5
    assert RATIONAL_GMP.solve(H, b) == solve_exact(H, b)
    assert all(type(v) is F for v in solve_exact(H, b))
    assert RATIONAL_GMP.coerce("2/3") == F(2, 3)
    assert to_fraction(fast_rational(F(5, 9))) == F(5, 9)
    assert type(to_fraction(fast_rational(F(5, 9)))) is F
