"""Exact arithmetic at the zeros of a rational polynomial.

The zeros of P_n are irrational in general, so the exact backend represents a
node by the irreducible factor it is a root of.  Arithmetic in
``Q[t]/(f)`` is exact, a value that vanishes at one root of an irreducible
``f`` vanishes at all of its conjugates, and a sum over all conjugate roots
is the field trace, a rational number.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .polynomial import Polynomial


def _trim(c: list) -> list:
    while c and c[-1] == 0:
        c.pop()
    return c


def _pdivmod(a: list, b: list) -> tuple[list, list]:
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lead = b[-1]
    for k in range(len(a) - len(b), -1, -1):
        t = a[k + len(b) - 1] / lead
        q[k] = t
        if t:
            for i, bi in enumerate(b):
                a[k + i] -= t * bi
    return _trim(q), _trim(a[: len(b) - 1])


def _psub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    return _trim([(a[k] if k < len(a) else 0) - (b[k] if k < len(b) else 0) for k in range(n)])


def _pmul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


class NumberField:
    """``Q[t]/(f)`` for a monic irreducible ``f`` with rational coefficients."""

    def __init__(self, minpoly: Sequence):
        f = _trim([Fraction(c) for c in minpoly])
        if len(f) < 2:
            raise ValueError("minimal polynomial must have degree >= 1")
        lead = f[-1]
        self.minpoly = tuple(c / lead for c in f)
        self.degree = len(self.minpoly) - 1
        self._power_sums = self._newton_power_sums()

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.minpoly == other.minpoly

    def __hash__(self):
        return hash(self.minpoly)

    def __repr__(self):
        return f"NumberField(minpoly={[str(c) for c in self.minpoly]})"

    @property
    def gen(self) -> "FieldElement":
        if self.degree == 1:
            return FieldElement(self, (-self.minpoly[0],))
        return FieldElement(self, (Fraction(0), Fraction(1)))

    def __call__(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            return value
        return FieldElement(self, (Fraction(value),))

    def reduce(self, coeffs: list) -> tuple:
        c = _trim([Fraction(v) for v in coeffs])
        d, f = self.degree, self.minpoly
        for k in range(len(c) - 1, d - 1, -1):
            t = c[k]
            if t:
                for i in range(d + 1):
                    c[k - d + i] -= t * f[i]
        return tuple(_trim(c[:d]))

    def _newton_power_sums(self) -> list[Fraction]:
        # power sums p_k of the roots, k < degree, from the monic coefficients
        d, f = self.degree, self.minpoly
        e = [Fraction(1)] + [(-1) ** i * f[d - i] for i in range(1, d + 1)]
        p = [Fraction(d)]
        for k in range(1, d):
            s = sum(((-1) ** (i - 1) * e[i] * p[k - i] for i in range(1, k)), Fraction(0))
            p.append(s + (-1) ** (k - 1) * k * e[k])
        return p


class FieldElement:
    __slots__ = ("field", "coeffs")

    def __init__(self, field: NumberField, coeffs: tuple):
        self.field = field
        self.coeffs = coeffs

    def _lift(self, other):
        if isinstance(other, FieldElement):
            if other.field is not self.field and other.field != self.field:
                raise TypeError("elements of different number fields")
            return other.coeffs
        if isinstance(other, (int, Fraction)):
            return (Fraction(other),) if other else ()
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        n = max(len(self.coeffs), len(o))
        c = [(self.coeffs[k] if k < len(self.coeffs) else 0) + (o[k] if k < len(o) else 0) for k in range(n)]
        return FieldElement(self.field, tuple(_trim(c)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.field, tuple(_psub(list(self.coeffs), list(o))))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if len(o) <= 1:
            s = o[0] if o else 0
            return FieldElement(self.field, tuple(_trim([c * s for c in self.coeffs])))
        return FieldElement(self.field, self.field.reduce(_pmul(list(self.coeffs), list(o))))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if not self.coeffs:
            raise ZeroDivisionError("inverse of zero in a number field")
        # extended Euclid: s*a + t*f = g, g constant since f is irreducible
        f = list(self.field.minpoly)
        r0, r1 = f, list(self.coeffs)
        s0, s1 = [], [Fraction(1)]
        while len(r1) > 1:
            q, rem = _pdivmod(r0, r1)
            r0, r1 = r1, rem
            s0, s1 = s1, _psub(s0, _pmul(q, s1))
            if not r1:
                raise ZeroDivisionError("element shares a factor with the modulus")
        g = r1[0]
        return FieldElement(self.field, self.field.reduce([c / g for c in s1]))

    def __truediv__(self, other):
        if isinstance(other, FieldElement):
            return self * other.inverse()
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if not o:
            raise ZeroDivisionError("division by zero")
        return FieldElement(self.field, tuple(c / o[0] for c in self.coeffs))

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.field, tuple(o)) * self.inverse()

    def __pow__(self, k: int):
        result, base = self.field(1), self
        if k < 0:
            base, k = base.inverse(), -k
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return tuple(self.coeffs) == tuple(o)

    def __hash__(self):
        return hash((self.field, self.coeffs))

    def __bool__(self):
        return bool(self.coeffs)

    def __repr__(self):
        return f"FieldElement({[str(c) for c in self.coeffs]})"

    def trace(self) -> Fraction:
        """Sum of this element over all conjugate embeddings."""
        p = self.field._power_sums
        return sum((c * p[k] for k, c in enumerate(self.coeffs)), Fraction(0))

    def rational(self) -> Fraction:
        if len(self.coeffs) > 1:
            raise ValueError("element is not rational")
        return self.coeffs[0] if self.coeffs else Fraction(0)

    def at(self, root: complex) -> complex:
        """Numerical value in the embedding that sends the generator to `root`."""
        if self.field.degree == 1:
            return complex(float(self.coeffs[0])) if self.coeffs else 0j
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * root + float(c)
        return acc


def factor_rational(poly: Polynomial) -> list[tuple[tuple[Fraction, ...], int]]:
    """Monic irreducible factors over Q with multiplicities."""
    import sympy

    x = sympy.Symbol("x")
    expr = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(poly.coeffs)], x, domain="QQ")
    _, factors = expr.factor_list()
    out = []
    for fac, mult in factors:
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(fac.all_coeffs())]
        lead = coeffs[-1]
        out.append((tuple(c / lead for c in coeffs), int(mult)))
    out.sort(key=lambda item: (len(item[0]), item[0]))
    return out
