"""Scalar backends and the dense linear algebra that runs on them.

Two backends share one interface: exact rationals (``fractions.Fraction``)
and IEEE double precision.  Exact systems are solved by fraction-free
(Bareiss) elimination on row-integerised copies of the matrix; floating
systems by pivoted Gaussian elimination.
"""
from __future__ import annotations

import itertools
import math
import sys
from fractions import Fraction
from typing import Any, Sequence

from .errors import ConfigError, SingularSystem

EPS = sys.float_info.epsilon

#: pivot threshold factor for floating rank decisions (relative to max |entry|)
TAU_RANK = 1e-10


def to_fraction(value: Any) -> Fraction:
    """Exact rational value of an int, float, Fraction or ``"p/q"`` string."""
    if isinstance(value, Fraction):
        return value
    if _mpq is not None and type(value) is _MPQ:
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, bool):
        raise ConfigError(f"not a number: {value!r}")
    if isinstance(value, (int, float)):
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"non-finite value: {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse rational {value!r}") from exc
    raise ConfigError(f"not a real scalar: {value!r}")


try:  # optional: GMP rationals are an order of magnitude faster than Fraction
    from gmpy2 import mpq as _mpq
except ImportError:  # pragma: no cover
    _mpq = None
_MPQ = type(_mpq()) if _mpq is not None else None


def fast_rational(value):
    """Exact rational in the fastest available representation (``mpq`` or Fraction)."""
    if _mpq is None:
        return to_fraction(value)
    if isinstance(value, Fraction):
        return _mpq(value.numerator, value.denominator)
    return _mpq(value)


def is_rational(value) -> bool:
    return isinstance(value, (int, Fraction)) or (_mpq is not None and type(value) is _MPQ)


if _mpq is not None:
    from gmpy2 import gcd as _gcd, mpz as _mpz
    _ONE = _mpz(1)
else:  # pragma: no cover
    _gcd, _ONE = math.gcd, 1


class Backend:
    name: str = ""
    exact: bool = False

    def coerce(self, value):
        raise NotImplementedError

    def zero(self):
        return self.coerce(0)

    def one(self):
        return self.coerce(1)

    def is_zero(self, value, scale=1.0) -> bool:
        raise NotImplementedError

    def solve(self, matrix, rhs):
        raise NotImplementedError

    def rank(self, matrix) -> int:
        raise NotImplementedError

    def det(self, matrix):
        raise NotImplementedError

    def __repr__(self):
        return f"<backend {self.name}>"


class RationalBackend(Backend):
    name = "rational"
    exact = True

    def __init__(self, gmp: bool = False):
        self.gmp = gmp and _mpq is not None

    def coerce(self, value):
        if hasattr(value, "field"):  # number-field element, already exact
            return value
        return fast_rational(value) if self.gmp else to_fraction(value)

    def is_zero(self, value, scale=1.0) -> bool:
        return value == 0

    def solve(self, matrix, rhs):
        return solve_exact(matrix, rhs, self.gmp)

    def rank(self, matrix) -> int:
        return rank_exact(matrix)

    def det(self, matrix):
        return det_exact(matrix)


class FloatBackend(Backend):
    name = "float64"
    exact = False

    def __init__(self, tau_zero: float = 1e-12):
        self.tau_zero = tau_zero

    def coerce(self, value):
        if isinstance(value, complex):
            return value
        if isinstance(value, str):
            return float(to_fraction(value))
        return float(value)

    def is_zero(self, value, scale=1.0) -> bool:
        return abs(value) <= self.tau_zero * abs(scale)

    def solve(self, matrix, rhs):
        return solve_float(matrix, rhs)

    def rank(self, matrix) -> int:
        return rank_float(matrix)

    def det(self, matrix):
        return det_float(matrix)


RATIONAL = RationalBackend()
#: same values as RATIONAL, carried as GMP rationals when gmpy2 is installed
RATIONAL_GMP = RationalBackend(gmp=True)
FLOAT64 = FloatBackend()


def get_backend(name: str | Backend) -> Backend:
    if isinstance(name, Backend):
        return name
    try:
        return {"rational": RATIONAL, "float64": FLOAT64, "float": FLOAT64}[name]
    except KeyError:
        raise ConfigError(f"unknown backend {name!r} (expected rational or float64)") from None


# ---------------------------------------------------------------------------
# exact (fraction-free) elimination


def _integer_rows(matrix: Sequence[Sequence[Fraction]]) -> tuple[list[list[int]], list[int]]:
    rows, scales = [], []
    for row in matrix:
        row = [v if is_rational(v) else to_fraction(v) for v in row]
        lcm = _ONE
        for v in row:
            lcm = lcm * v.denominator // _gcd(lcm, v.denominator)
        rows.append([v.numerator * (lcm // v.denominator) for v in row])
        scales.append(lcm)
    return rows, scales


def _bareiss(rows: list[list[int]], ncols: int) -> tuple[int, list[int], int]:
    """Fraction-free row echelon form, in place, over the first `ncols` columns.

    Returns ``(rank, pivot_columns, permutation_sign)``.  Every entry stays an
    integer minor of the input, so the divisions below are exact.
    """
    nrows = len(rows)
    width = len(rows[0]) if rows else 0
    prev, sign, r = 1, 1, 0
    pivots: list[int] = []
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            rows[p], rows[r] = rows[r], rows[p]
            sign = -sign
        prow = rows[r]
        piv = prow[c]
        for i in range(r + 1, nrows):
            row = rows[i]
            f = row[c]
            for k in range(c + 1, width):
                row[k] = (piv * row[k] - f * prow[k]) // prev
            row[c] = 0
        prev = piv
        pivots.append(c)
        r += 1
    return r, pivots, sign


def rank_exact(matrix) -> int:
    if not matrix or not matrix[0]:
        return 0
    rows, _ = _integer_rows(matrix)
    rank, _, _ = _bareiss(rows, len(rows[0]))
    return rank


def det_exact(matrix) -> Fraction:
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    rows, scales = _integer_rows(matrix)
    rank, _, sign = _bareiss(rows, n)
    if rank < n:
        return Fraction(0)
    return Fraction(int(sign * rows[n - 1][n - 1]), int(math.prod(scales)))


def solve_exact(matrix, rhs, gmp: bool = False) -> list[Fraction]:
    """Exact solution; ``gmp`` returns ``mpq`` entries instead of Fractions."""
    n = len(matrix)
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    rows, _ = _integer_rows(aug)
    rank, _, _ = _bareiss(rows, n)
    if rank < n:
        raise SingularSystem(f"exact {n}x{n} system is singular (rank {rank})")
    num = fast_rational if _mpq is not None else Fraction
    x = [num(0)] * n
    for i in range(n - 1, -1, -1):
        row = rows[i]
        acc = num(int(row[n])) - sum((row[k] * x[k] for k in range(i + 1, n)), num(0))
        x[i] = acc / row[i]
    return x if gmp else [to_fraction(v) for v in x]


# ---------------------------------------------------------------------------
# floating elimination


def rank_float(matrix, tau: float = TAU_RANK) -> int:
    """Rank by complete pivoting; pivots below ``tau * max|entry|`` count as zero."""
    a = [[complex(v) if isinstance(v, complex) else float(v) for v in row] for row in matrix]
    if not a or not a[0]:
        return 0
    nrows, ncols = len(a), len(a[0])
    scale = max(abs(v) for row in a for v in row)
    if scale == 0.0:
        return 0
    thresh = tau * scale
    rank = 0
    for step in range(min(nrows, ncols)):
        best, bi, bj = -1.0, step, step
        for i in range(step, nrows):
            for j in range(step, ncols):
                if abs(a[i][j]) > best:
                    best, bi, bj = abs(a[i][j]), i, j
        if best <= thresh:
            break
        a[step], a[bi] = a[bi], a[step]
        for row in a:
            row[step], row[bj] = row[bj], row[step]
        piv = a[step][step]
        for i in range(step + 1, nrows):
            f = a[i][step] / piv
            if f:
                for j in range(step, ncols):
                    a[i][j] -= f * a[step][j]
        rank += 1
    return rank


def _lu_partial(a):
    n = len(a)
    scale = max((abs(v) for row in a for v in row), default=0.0)
    sign = 1
    for c in range(n):
        p = max(range(c, n), key=lambda i: abs(a[i][c]))
        if abs(a[p][c]) <= n * EPS * scale or a[p][c] == 0:
            return None, sign
        if p != c:
            a[p], a[c] = a[c], a[p]
            sign = -sign
        piv = a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / piv
            if f:
                row, prow = a[i], a[c]
                for k in range(c, len(row)):
                    row[k] -= f * prow[k]
    return a, sign


def solve_float(matrix, rhs) -> list:
    n = len(matrix)
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    lu, _ = _lu_partial(aug)
    if lu is None:
        raise SingularSystem(f"floating {n}x{n} elimination broke down (near-singular moment system)")
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        row = lu[i]
        x[i] = (row[n] - sum(row[k] * x[k] for k in range(i + 1, n))) / row[i]
    return x


def det_float(matrix):
    n = len(matrix)
    if n == 0:
        return 1.0
    a = [list(row) for row in matrix]
    lu, sign = _lu_partial(a)
    if lu is None:
        return 0.0
    return sign * math.prod(lu[i][i] for i in range(n))


# ---------------------------------------------------------------------------
# determinants over arbitrary commutative rings / fields


def _perm_sign(perm) -> int:
    sign, seen = 1, [False] * len(perm)
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def det_permutation(matrix):
    """Signed permutation expansion; valid over any commutative ring."""
    n = len(matrix)
    total = 0
    for perm in itertools.permutations(range(n)):
        term = _perm_sign(perm)
        for i, j in enumerate(perm):
            term = term * matrix[i][j]
        total = total + term
    return total


def det_generic(matrix, exact: bool):
    """Determinant by Gaussian elimination over a field.

    Exact entries (fractions, number-field elements) pivot on the first
    nonzero entry; inexact entries use partial pivoting by magnitude.
    """
    n = len(matrix)
    if n == 0:
        return 1
    a = [list(row) for row in matrix]
    det = 1
    for c in range(n):
        if exact:
            p = next((i for i in range(c, n) if a[i][c] != 0), None)
        else:
            p = max(range(c, n), key=lambda i: abs(a[i][c]))
            if a[p][c] == 0:
                p = None
        if p is None:
            return 0 * a[0][0]
        if p != c:
            a[p], a[c] = a[c], a[p]
            det = -det
        piv = a[c][c]
        det = det * piv
        inv = 1 / piv
        for i in range(c + 1, n):
            f = a[i][c] * inv
            for k in range(c + 1, n):
                a[i][k] = a[i][k] - f * a[c][k]
    return det
