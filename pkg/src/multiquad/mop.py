"""Type I and type II multiple orthogonal polynomials and their recurrence.

Along the proper multi-indices the monic type II polynomials satisfy

    x P_n = P_{n+1} + sum_{j=0}^{min(r,n)} a_{n,j} P_{n-j},

and the type I vectors, normalised by ``int x^{n-1} sum_j A_{n,j} dmu_j = 1``,
satisfy the dual recurrence

    x A_n = A_{n-1} + sum_{j=0}^{r} a_{n+j-1,j} A_{n+j}.

Both families are first obtained from the moment systems; the coefficients
``a_{n,j}`` are then moment sums of the products ``x P_n A_{n+1-j}``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .backend import FLOAT64, Backend
from .errors import FormulaMismatch, NotNormal, SingularSystem, ZeroPivot
from .measures import MeasureSystem, moment_matrix, normality_check
from .polynomial import Polynomial

#: relative threshold for structurally nonzero a_{l,r} in floating tables
TAU_ZERO = 1e-12
#: a type I normaliser smaller than this triggers a conditioning warning
TINY_NORMALIZER = 1e-8


class ConditioningWarning(UserWarning):
    pass


@dataclass(frozen=True)
class VectorPolynomial:
    components: tuple[Polynomial, ...]

    @classmethod
    def zero(cls, r: int) -> "VectorPolynomial":
        return cls((Polynomial(),) * r)

    @classmethod
    def constant(cls, values: Sequence) -> "VectorPolynomial":
        return cls(tuple(Polynomial((v,)) for v in values))

    @property
    def r(self) -> int:
        return len(self.components)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(p.degree for p in self.components)

    def __getitem__(self, j: int) -> Polynomial:
        """Component ``j`` (1-based)."""
        return self.components[j - 1]

    def __call__(self, x) -> tuple:
        return tuple(p(x) for p in self.components)

    def __eq__(self, other):
        if not isinstance(other, VectorPolynomial):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)


@dataclass(frozen=True)
class RecurrenceTable:
    """Rows ``(a_{n,0}, ..., a_{n,min(r,n)})`` for n = 0 .. len(rows)-1."""

    r: int
    rows: tuple[tuple, ...]
    exact: bool
    consistency: float = 0.0
    # longest table these rows were cut from; lets truncations share cached polynomials
    parent: "RecurrenceTable | None" = field(default=None, compare=False, repr=False)

    @property
    def size(self) -> int:
        return len(self.rows)

    def a(self, n: int, j: int):
        """Coefficient ``a_{n,j}``; entries with ``n < j <= r`` read as 1."""
        if n < 0 or j < 0 or j > self.r:
            raise IndexError(f"a[{n},{j}] outside the band")
        if j > n:
            return 1
        return self.rows[n][j]

    def to_float(self) -> "RecurrenceTable":
        if not self.exact:
            return self
        return RecurrenceTable(self.r, tuple(tuple(float(v) for v in row) for row in self.rows),
                               False, self.consistency)

    def truncated(self, size: int) -> "RecurrenceTable":
        return RecurrenceTable(self.r, self.rows[:size], self.exact, self.consistency, self.parent or self)


def _backend_of(table: RecurrenceTable) -> Backend:
    from .backend import RATIONAL

    return RATIONAL if table.exact else FLOAT64


def _require_normal(system: MeasureSystem, n: int) -> None:
    report = normality_check(system, n)
    if not report.is_normal:
        raise NotNormal(n, report.rank)


@lru_cache(maxsize=4096)
def type2_polynomial(system: MeasureSystem, n: int) -> Polynomial:
    """Monic type II polynomial of degree n for the proper multi-index."""
    one = system.backend.one()
    if n == 0:
        return Polynomial((one,))
    if not system.backend.exact:
        _require_normal(system, n)
    mm = moment_matrix(system, n)
    rhs = [-system.moment(j, l + n) for j, width in enumerate(mm.index, 1) for l in range(width)]
    try:
        coeffs = system.backend.solve(mm.matrix, rhs)
    except SingularSystem:
        if system.backend.exact:
            raise NotNormal(n, normality_check(system, n).rank) from None
        raise
    return Polynomial(list(coeffs) + [one])


@lru_cache(maxsize=4096)
def type1_polynomial(system: MeasureSystem, n: int) -> VectorPolynomial:
    """Type I vector polynomial with ``int x^{n-1} sum_j A_{n,j} dmu_j = 1``."""
    backend = system.backend
    if n == 0:
        return VectorPolynomial.zero(system.r)
    if n >= 2:
        _require_normal(system, n - 1)
    if not backend.exact:
        _require_normal(system, n)
    mm = moment_matrix(system, n)
    rhs = [backend.zero()] * (n - 1) + [backend.one()]
    try:
        flat = backend.solve(mm.columns, rhs)
    except SingularSystem:
        if backend.exact:
            raise NotNormal(n, normality_check(system, n).rank) from None
        raise
    comps, pos = [], 0
    for width in mm.index:
        comps.append(Polynomial(flat[pos:pos + width]))
        pos += width
    if not backend.exact:
        lead = comps[mm.index.s - 1].lead
        normalizer = 1.0 / lead if lead else float("inf")
        if abs(normalizer) < TINY_NORMALIZER:
            warnings.warn(f"type I normaliser for n={n} is {normalizer:.3e}; A_{n} is poorly scaled",
                          ConditioningWarning, stacklevel=2)
    return VectorPolynomial(tuple(comps))


def pairing(system: MeasureSystem, p: Polynomial, vec: VectorPolynomial):
    """``int p(x) sum_j vec_j(x) dmu_j(x)`` as a finite moment sum."""
    total = system.backend.zero()
    for j, comp in enumerate(vec.components, 1):
        if comp.coeffs:
            total = total + (p * comp).integrate(lambda k, j=j: system.moment(j, k))
    return total


def recurrence_table(system: MeasureSystem, n_max: int, check: bool = True) -> RecurrenceTable:
    """Rows 0..n_max of the recurrence coefficients.

    Each ``a_{n,j}`` is the moment sum of ``x P_n A_{n+1-j}``.  With
    ``check`` the recurrence is run forward and compared to the solved
    ``P_{n+1}``; exact tables must agree identically.
    """
    backend, r = system.backend, system.r
    P = [type2_polynomial(system, k) for k in range(n_max + 2)]
    A = [type1_polynomial(system, k) for k in range(n_max + 2)]
    rows = []
    for n in range(n_max + 1):
        xp = P[n].mul_x()
        rows.append(tuple(pairing(system, xp, A[n + 1 - j]) for j in range(min(r, n) + 1)))
    worst = 0.0
    for l in range(r, n_max + 1):
        scale = max(abs(v) for v in rows[l])
        if backend.exact and rows[l][r] == 0 or not backend.exact and abs(rows[l][r]) <= TAU_ZERO * scale:
            raise ZeroPivot(f"a[{l},{r}] vanishes on a system declared normal")
    if check:
        for n in range(n_max + 1):
            nxt = P[n].mul_x() - sum((rows[n][j] * P[n - j] for j in range(len(rows[n]))), Polynomial())
            if backend.exact:
                if nxt != P[n + 1]:
                    raise FormulaMismatch(f"recurrence does not reproduce P_{n + 1}")
            else:
                diff = max((abs(nxt[k] - P[n + 1][k]) for k in range(n + 2)), default=0.0)
                worst = max(worst, diff)
    return RecurrenceTable(r, tuple(rows), backend.exact, worst)


def rows_from_type2(P: Sequence[Polynomial], r: int, n_max: int) -> tuple[tuple, ...]:
    """Rows 0..n_max read off monic P_0..P_{n_max+1} alone.

    ``x P_n - P_{n+1}`` has degree n and a unique expansion in
    ``P_n, ..., P_{n-min(r,n)}``; peeling leading coefficients gives it.
    A remainder left after the last allowed term means the sequence does not
    obey an (r+2)-term recurrence.
    """
    rows = []
    for n in range(n_max + 1):
        rest = P[n].mul_x() - P[n + 1]
        row = []
        for j in range(min(r, n) + 1):
            c = rest[n - j]
            row.append(c)
            if c != 0:
                rest = rest - c * P[n - j]
        if any(v != 0 for v in rest.coeffs):
            raise FormulaMismatch(f"x P_{n} - P_{n + 1} is not spanned by P_{n - min(r, n)}..P_{n}")
        rows.append(tuple(row))
    return tuple(rows)


@lru_cache(maxsize=64)
def _type2_prefix(table: RecurrenceTable) -> list[Polynomial]:
    return [Polynomial((1,))]  # grown in place by type2_sequence


def type2_sequence(table: RecurrenceTable, n: int) -> list[Polynomial]:
    """P_0..P_n as coefficient vectors, generated by the recurrence."""
    if n > table.size:
        raise IndexError(f"table has {table.size} rows, P_{n} needs {n}")
    P = _type2_prefix(table.parent or table)
    for k in range(len(P) - 1, n):
        nxt = P[k].mul_x()
        for j, a in enumerate(table.rows[k]):
            nxt = nxt - a * P[k - j]
        P.append(nxt)
    return P[: n + 1]


def eval_recurrence(table: RecurrenceTable, n: int, x) -> tuple[list, list]:
    """Values and derivatives of P_0..P_n at x by forward recurrence."""
    vals, ders = [1 + 0 * x], [0 * x]
    if n > table.size:
        raise IndexError(f"table has {table.size} rows, P_{n} needs {n}")
    for k in range(n):
        v = x * vals[k]
        d = vals[k] + x * ders[k]
        for j, a in enumerate(table.rows[k]):
            v = v - a * vals[k - j]
            d = d - a * ders[k - j]
        vals.append(v)
        ders.append(d)
    return vals, ders


def _type1_forward(table: RecurrenceTable, start: list, n_max: int, times_x, backend_exact: bool) -> list:
    """Run the type I recurrence on component lists; ``start`` holds A_0..A_r."""
    r, rows = table.r, table.rows
    seq = list(start)
    k = 1
    while len(seq) <= n_max:
        # A_{k+r} from x A_k = A_{k-1} + sum_j a_{k+j-1,j} A_{k+j}
        # k >= 1 keeps every index below inside the stored rows (no padding)
        piv = rows[k + r - 1][r]
        if (piv == 0) if backend_exact else (abs(piv) <= TAU_ZERO * max(abs(v) for v in rows[k + r - 1])):
            raise ZeroPivot(f"a[{k + r - 1},{r}] vanishes; cannot advance the type I recurrence")
        new = []
        for c in range(len(seq[k])):
            acc = times_x(seq[k][c]) - seq[k - 1][c]
            for j in range(r):
                acc = acc - rows[k + j - 1][j] * seq[k + j][c]
            new.append(acc / piv)
        seq.append(new)
        k += 1
    return seq[: n_max + 1]


def type1_sequence(table: RecurrenceTable, initials: Sequence[Sequence], n_max: int) -> list[VectorPolynomial]:
    """A_0..A_{n_max} from the initial matrix ``A_{i,j}`` and the recurrence."""
    r = table.r
    start = [[Polynomial()] * r] + [[Polynomial((v,)) for v in row] for row in initials]
    seq = _type1_forward(table, start, n_max, Polynomial.mul_x, table.exact)
    return [VectorPolynomial(tuple(v)) for v in seq]


def type1_values(table: RecurrenceTable, initials: Sequence[Sequence], n_max: int, x) -> list[tuple]:
    """Values A_0(x)..A_{n_max}(x) by the same recurrence, without coefficients."""
    r = table.r
    zero = 0 * x
    start = [[zero] * r] + [[v + zero for v in row] for row in initials]
    seq = _type1_forward(table, start, n_max, lambda v: v * x, table.exact)
    return [tuple(v) for v in seq]


def type1_initials(system: MeasureSystem, check: bool = True) -> tuple[tuple, ...]:
    """Lower triangular ``A_{i,j}``, 1 <= i, j <= r, from moment determinants."""
    backend, r = system.backend, system.r
    rows = []
    for i in range(1, r + 1):
        mm = moment_matrix(system, i)
        det = backend.det(mm.matrix)
        if backend.exact and det == 0 or not normality_check(system, i).is_normal:
            raise NotNormal(i)
        row = []
        for j in range(1, r + 1):
            if j > i:
                row.append(backend.zero())
            else:
                minor = backend.det(mm.minor(j, i)) if i > 1 else backend.one()
                row.append((-1) ** (i + j) * minor / det)
        rows.append(tuple(row))
    if check:
        for i in range(1, r + 1):
            ref = type1_polynomial(system, i)
            for j in range(1, r + 1):
                got = ref[j][0]
                if backend.exact:
                    if got != rows[i - 1][j - 1]:
                        raise FormulaMismatch(f"initial A[{i},{j}] disagrees with the type I solve")
                elif abs(got - rows[i - 1][j - 1]) > 1e-8 * max(1.0, abs(got)):
                    raise FormulaMismatch(f"initial A[{i},{j}] disagrees with the type I solve")
    return tuple(rows)
