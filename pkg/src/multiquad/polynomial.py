"""Dense univariate polynomials with coefficients in any scalar ring."""
from __future__ import annotations

from typing import Iterable, Sequence


class Polynomial:
    """Polynomial stored by ascending coefficients.

    Trailing zero coefficients are dropped, so the zero polynomial has no
    coefficients and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def one(cls):
        return cls((1,))

    @classmethod
    def x(cls):
        return cls((0, 1))

    @classmethod
    def from_roots(cls, roots: Sequence) -> "Polynomial":
        c = [1]
        for z in roots:
            nxt = [0] * (len(c) + 1)
            for k, ck in enumerate(c):
                nxt[k + 1] = nxt[k + 1] + ck
                nxt[k] = nxt[k] - z * ck
            c = nxt
        return cls(c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self):
        return self.coeffs[-1] if self.coeffs else 0

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)!r})"

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial((other,))
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, c in enumerate(b):
            out[k] = out[k] + c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial((other,))
        a, b = self.coeffs, other.coeffs
        out = list(a) + [0] * (len(b) - len(a))
        for k, c in enumerate(b):
            out[k] = out[k] - c
        return Polynomial(out)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial(c * other for c in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return Polynomial()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Polynomial(out)

    def __rmul__(self, other):
        return Polynomial(other * c for c in self.coeffs)

    def __truediv__(self, scalar):
        return Polynomial(c / scalar for c in self.coeffs)

    def mul_x(self) -> "Polynomial":
        if not self.coeffs:
            return self
        return Polynomial((0,) + self.coeffs)

    def deriv(self) -> "Polynomial":
        return Polynomial(k * c for k, c in enumerate(self.coeffs) if k)

    def deflate(self, root) -> tuple["Polynomial", object]:
        """Synthetic division by ``x - root``; returns (quotient, remainder)."""
        if not self.coeffs:
            return Polynomial(), 0
        q = [0] * (len(self.coeffs) - 1)
        acc = self.coeffs[-1]
        for k in range(len(self.coeffs) - 2, -1, -1):
            q[k] = acc
            acc = self.coeffs[k] + root * acc
        return Polynomial(q), acc

    def map(self, f) -> "Polynomial":
        return Polynomial(f(c) for c in self.coeffs)

    def integrate(self, moments) -> object:
        """Linear functional ``sum_k c_k * moments(k)``."""
        acc = 0
        for k, c in enumerate(self.coeffs):
            acc = acc + c * moments(k)
        return acc
