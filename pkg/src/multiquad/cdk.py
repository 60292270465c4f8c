"""Christoffel-Darboux machinery for the type I / type II pair.

For a fixed size n the B-vectors ``B_n^(i)``, i = 1..r, are the type I
combinations left over when the first n type I recurrences are written in
matrix form.  Replacing the i-th B-vector by ``A_k`` in the r x r
determinant gives the polynomials ``Q^(i)_{k,n}``; the full determinant
``B_n`` is a constant multiple ``gamma_n`` of ``P_n``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .backend import det_generic
from .errors import FormulaMismatch
from .measures import MultiIndex
from .mop import RecurrenceTable, VectorPolynomial, eval_recurrence, type1_sequence, type1_values

#: relative tolerance for the dual-route B-vector check on floating input
TAU_CD = 1e-9

#: deterministic sample points for polynomial-identity certificates
SAMPLE_LADDER = ("0", "1/2", "-1/2", "1", "-1", "1/3", "2/3", "-1/3", "-2/3", "1/4", "3/4",
                 "-1/4", "-3/4", "1/5", "2/5", "3/5", "4/5", "-1/5", "-2/5", "-3/5", "-4/5",
                 "3/2", "-3/2", "2", "-2", "1/6", "5/6", "-1/6", "-5/6", "1/7", "2/7",
                 "3/7", "4/7", "5/7", "6/7", "-1/7", "-2/7", "-3/7", "-4/7", "-5/7", "-6/7")


def sample_points(count: int, ladder=SAMPLE_LADDER) -> list:
    from fractions import Fraction

    if count > len(ladder):
        raise ValueError(f"sample ladder holds only {len(ladder)} points")
    return [Fraction(p) for p in ladder[:count]]


@dataclass(frozen=True)
class CDContext:
    n: int
    table: RecurrenceTable
    initials: tuple
    type1: tuple[VectorPolynomial, ...]
    gamma: object

    @property
    def r(self) -> int:
        return self.table.r

    @property
    def exact(self) -> bool:
        return self.table.exact

    @property
    def top(self) -> int:
        """Largest k for which A_k is available."""
        return len(self.type1) - 1

    def values(self, x) -> list[tuple]:
        """A_0(x) .. A_top(x) by the type I recurrence."""
        return type1_values(self.table, self.initials, self.top, x)


def gamma_n(table: RecurrenceTable, initials, n: int):
    """Leading coefficient of ``B_n``; ``B_n = gamma_n * P_n``."""
    r = table.r
    idx = MultiIndex(n, r)
    s = idx.s
    num = 1
    for j in range(r):
        num = num * initials[j][j]
    den = 1
    for l in range(r, n):
        den = den * table.a(l, r)
    sign = (-1) ** (s // 2 + (r - s) // 2)
    return sign * num / den


def cd_context(table: RecurrenceTable, initials, n: int) -> CDContext:
    if n < 1:
        raise ValueError("CD context needs n >= 1")
    if table.size < n:
        raise ValueError(f"table holds {table.size} rows, size {n} needs {n}")
    r = table.r
    top = min(n + r, max(table.size, r))
    seq = type1_sequence(table, initials, top)
    return CDContext(n, table, tuple(tuple(row) for row in initials), tuple(seq), gamma_n(table, initials, n))


def _b_recursive(ctx: CDContext, vals, i: int, x) -> list:
    # x A_{n-i+1} - A_{n-i} - sum_{j<i} a_{n+j-i,j} A_{n-i+j+1}
    n, a = ctx.n, ctx.table.a
    out = []
    for c in range(ctx.r):
        acc = x * vals[n - i + 1][c] - vals[n - i][c]
        for j in range(i):
            acc = acc - a(n + j - i, j) * vals[n - i + j + 1][c]
        out.append(acc)
    return out


def _b_tail(ctx: CDContext, vals, i: int) -> list:
    # sum_{j=i}^{r} a_{n-i+j,j} A_{n-i+j+1}, padding a_{l1,l2} = 1 for l1 < l2
    n, a = ctx.n, ctx.table.a
    out = []
    for c in range(ctx.r):
        acc = 0
        for j in range(i, ctx.r + 1):
            acc = acc + a(n - i + j, j) * vals[n - i + j + 1][c]
        out.append(acc)
    return out


def _tail_available(ctx: CDContext, i: int) -> bool:
    return ctx.n - i + ctx.r + 1 <= ctx.top and ctx.n - i + ctx.r < ctx.table.size


def _mismatch(u: list, v: list, exact: bool, scale: float) -> bool:
    if exact:
        return list(u) != list(v)
    return max(abs(p - q) for p, q in zip(u, v)) > TAU_CD * scale


def b_vector(ctx: CDContext, i: int, x, vals=None) -> tuple:
    """``B_n^(i)(x)``, cross-checked between its two defining expressions.

    The two differ by one step of the type I recurrence, so they are
    compared whenever the values reach far enough: a disagreement means the
    supplied ``A_k(x)`` do not satisfy the recurrence of the table.
    """
    if not 1 <= i <= ctx.r:
        raise ValueError(f"B-vector index {i} outside 1..{ctx.r}")
    vals = vals if vals is not None else ctx.values(x)
    n = ctx.n
    if n < i:
        return tuple(_b_tail(ctx, vals, i))
    rec = _b_recursive(ctx, vals, i, x)
    if _tail_available(ctx, i):
        tail = _b_tail(ctx, vals, i)
        scale = 1.0
        if not ctx.exact:
            scale = max([1.0] + [abs(v) * max(1.0, abs(x)) for k in range(n - i, ctx.top + 1) for v in vals[k]])
        if _mismatch(rec, tail, ctx.exact, scale):
            raise FormulaMismatch(f"B-vector {i} for n={n}: recursive and tail forms disagree")
    return tuple(rec)


def b_vectors(ctx: CDContext, x, vals=None) -> list[tuple]:
    vals = vals if vals is not None else ctx.values(x)
    return [b_vector(ctx, i, x, vals) for i in range(1, ctx.r + 1)]


def _det_columns(columns, exact: bool):
    r = len(columns)
    return det_generic([[columns[c][row] for c in range(r)] for row in range(r)], exact)


def q_polynomial(ctx: CDContext, i: int, k: int, x):
    """``Q^(i)_{k,n}(x)``: ``B_n`` with its i-th column replaced by ``A_k(x)``."""
    if not 1 <= i <= min(ctx.r, ctx.n):
        raise ValueError(f"Q index i={i} outside 1..{min(ctx.r, ctx.n)}")
    return q_values(ctx, i, x, ks=(k,))[0]


def q_values(ctx: CDContext, i: int, x, ks=None, vals=None) -> list:
    """``Q^(i)_{k,n}(x)`` for k in ``ks`` (default 1..n)."""
    vals = vals if vals is not None else ctx.values(x)
    cols = b_vectors(ctx, x, vals)
    ks = range(1, ctx.n + 1) if ks is None else ks
    out = []
    for k in ks:
        trial = list(cols)
        trial[i - 1] = vals[k]
        out.append(_det_columns(trial, ctx.exact))
    return out


def gamma(ctx: CDContext):
    return ctx.gamma


def big_b(ctx: CDContext, x):
    """``B_n(x) = det(B_n^(1)(x) ... B_n^(r)(x))``."""
    return _det_columns(b_vectors(ctx, x), ctx.exact)


def cd_sides(ctx: CDContext, i: int, x, y) -> tuple:
    """Both sides of the Christoffel-Darboux identity (confluent when x == y)."""
    n, g = ctx.n, ctx.gamma
    if not 1 <= i <= min(ctx.r, n):
        raise ValueError(f"CD index i={i} outside 1..{min(ctx.r, n)}")
    px, dx = eval_recurrence(ctx.table, n, x)
    q = q_values(ctx, i, y)
    kernel = sum((px[k - 1] * q[k - 1] for k in range(1, n + 1)), 0 * x)
    if x == y:
        rhs = g * (dx[n] * px[n - i] - px[n] * dx[n - i])
        return kernel, rhs
    py, _ = eval_recurrence(ctx.table, n, y)
    return (x - y) * kernel, g * (px[n] * py[n - i] - py[n] * px[n - i])


def cd_residual(ctx: CDContext, i: int, x, y):
    lhs, rhs = cd_sides(ctx, i, x, y)
    return abs(lhs - rhs)
