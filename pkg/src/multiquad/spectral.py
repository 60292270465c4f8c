"""The banded Hessenberg matrix of the recurrence and its eigenproblem.

Row k of ``L_n`` carries ``a_{k,0..min(r,k)}`` on and below the diagonal and a
one on the superdiagonal, so ``P_n(x) = det(x I - L_n)``.  Nodes come from a
Francis double-shift QR sweep on the balanced transpose, polished by Newton
steps on ``P_n`` evaluated through the recurrence.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

from .backend import EPS
from .cdk import CDContext, q_values
from .errors import NoValidIndex, QRNoConvergence, ResidualTooLarge
from .mop import RecurrenceTable, eval_recurrence
from .polynomial import Polynomial

log = logging.getLogger(__name__)

TAU_EIG = 1e-10
TAU_SEP = 1e-8
TAU_IMAG = 1e-10
TAU_ZERO = 1e-12
NEWTON_STEPS = 5


@dataclass(frozen=True)
class HessenbergMatrix:
    n: int
    rows: tuple[tuple, ...]
    exact: bool = False

    @cached_property
    def r(self) -> int:
        return max((len(row) - 1 for row in self.rows), default=0)

    def entry(self, k: int, c: int):
        """0-based entry (k, c)."""
        if c == k + 1:
            return 1
        j = k - c
        if 0 <= j < len(self.rows[k]):
            return self.rows[k][j]
        return 0

    def dense(self) -> list[list]:
        return [[self.entry(k, c) for c in range(self.n)] for k in range(self.n)]

    @cached_property
    def _frobenius(self) -> float:
        band = sum(abs(complex(v)) ** 2 for row in self.rows for v in row)
        return math.sqrt(band + (self.n - 1))

    def norm(self) -> float:
        """Frobenius norm."""
        return self._frobenius

    # row k holds L[k][k-j] = rows[k][j] and L[k][k+1] = 1
    def matvec(self, v) -> list:
        n, rows = self.n, self.rows
        out = []
        for k in range(n):
            acc = v[k + 1] if k + 1 < n else 0 * v[0]
            for j, a in enumerate(rows[k]):
                acc = acc + a * v[k - j]
            out.append(acc)
        return out

    def vecmat(self, u) -> list:
        n, rows = self.n, self.rows
        out = [0 * u[0]] * n
        for k in range(n):
            uk = u[k]
            if k + 1 < n:
                out[k + 1] = out[k + 1] + uk
            for j, a in enumerate(rows[k]):
                out[k - j] = out[k - j] + uk * a
        return out


def build_hessenberg(table: RecurrenceTable, n: int) -> HessenbergMatrix:
    if n < 1:
        raise ValueError("matrix size must be >= 1")
    if table.size < n:
        raise ValueError(f"table holds {table.size} rows, L_{n} needs {n}")
    return HessenbergMatrix(n, tuple(tuple(table.rows[k]) for k in range(n)), table.exact)


def characteristic_polynomial(L: HessenbergMatrix) -> Polynomial:
    """``det(x I - L)`` by cofactor expansion along rows, memoised on column sets."""
    n = L.n
    if n > 16:
        raise ValueError("cofactor expansion is limited to n <= 16")
    entries = [[Polynomial((-L.entry(k, c),)) + (Polynomial.x() if k == c else 0) for c in range(n)]
               for k in range(n)]
    memo: dict[int, Polynomial] = {}

    def minor(row: int, cols: int) -> Polynomial:
        if row == n:
            return Polynomial((1,))
        if cols in memo:
            return memo[cols]
        acc, sign = Polynomial(), 1
        for c in range(n):
            if cols >> c & 1:
                continue
            e = entries[row][c]
            if e.coeffs:
                term = e * minor(row + 1, cols | 1 << c)
                acc = acc + term if sign > 0 else acc - term
            sign = -sign
        memo[cols] = acc
        return acc

    return minor(0, 0)


# --- dense real QR -------------------------------------------------------------

def _balance(a: list[list[float]]) -> None:
    n, radix = len(a), 2.0
    sqrdx = radix * radix
    done = False
    while not done:
        done = True
        for i in range(n):
            # 2-norm (Osborne) balancing; 1-norm sums admit unbalanced fixed points
            r = c = 0.0
            for j in range(n):
                if j != i:
                    c += a[j][i] * a[j][i]
                    r += a[i][j] * a[i][j]
            c, r = math.sqrt(c), math.sqrt(r)
            if c and r:
                g, f, s = r / radix, 1.0, c + r
                while c < g:
                    f *= radix
                    c *= sqrdx
                g = r * radix
                while c > g:
                    f /= radix
                    c /= sqrdx
                if (c + r) / f < 0.95 * s:
                    done = False
                    g = 1.0 / f
                    for j in range(n):
                        a[i][j] *= g
                    for j in range(n):
                        a[j][i] *= f


def _step_ratios(L: HessenbergMatrix) -> list[float]:
    rho = [1.0] * L.n
    for k in range(1, L.n):
        cands = [abs(float(L.rows[k][j])) ** (1.0 / (j + 1)) for j in range(1, len(L.rows[k]))]
        rho[k] = max((c for c in cands if c > 0.0), default=1.0)
    return rho


def level_scaling(L: HessenbergMatrix) -> list[float]:
    """Diagonal ``d_k`` of the band-levelling similarity ``D^-1 L D``."""
    rho = _step_ratios(L)
    d, out = 1.0, []
    for k in range(L.n):
        d *= rho[k]
        out.append(d)
    return out


def _prescaled_transpose(L: HessenbergMatrix) -> list[list[float]]:
    """``(D^-1 L D)^T`` with D chosen from the recurrence so the band is level.

    Norm balancing alone leaves zig-zag scalings (1, a, 1, a, ...) of the
    unit superdiagonal untouched, and those make the nodes needlessly
    ill-conditioned.  With ``D = diag(d_k)``, ``d_{k+1} = rho_{k+1} d_k`` and
    ``rho_k = max_j |a_{k,j}|^(1/(j+1))`` every scaled band entry is of the
    size of its row's step ratio.
    """
    n = L.n
    rho = _step_ratios(L)
    a = [[0.0] * n for _ in range(n)]
    for k in range(n):
        for c in range(max(0, k - L.r), min(n, k + 2)):
            v = float(L.entry(k, c))
            if not v:
                continue
            # entry (k, c) scaled by d_c / d_k
            if c > k:
                v *= rho[c]
            else:
                for t in range(c + 1, k + 1):
                    v /= rho[t]
            a[c][k] = v
    return a


def hqr(a: list[list[float]], max_iter: int | None = None) -> list[complex]:
    """Eigenvalues of an upper Hessenberg matrix (destroyed in place)."""
    n = len(a)
    max_iter = 40 * n if max_iter is None else max_iter
    wr, wi = [0.0] * n, [0.0] * n
    anorm = sum(abs(a[i][j]) for i in range(n) for j in range(max(i - 1, 0), n))
    nn, t, total = n - 1, 0.0, 0
    x = y = z = w = p = q = r = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = abs(a[l - 1][l - 1]) + abs(a[l][l])
                if s == 0.0:
                    s = anorm
                if abs(a[l][l - 1]) <= EPS * s:
                    a[l][l - 1] = 0.0
                    break
                l -= 1
            x = a[nn][nn]
            if l == nn:
                wr[nn], wi[nn] = x + t, 0.0
                nn -= 1
                break
            y = a[nn - 1][nn - 1]
            w = a[nn][nn - 1] * a[nn - 1][nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1], wi[nn] = -z, z
                nn -= 2
                break
            if total >= max_iter:
                raise QRNoConvergence(f"QR did not converge within {max_iter} sweeps")
            if its in (10, 20):
                # exceptional shift
                t += x
                for i in range(nn + 1):
                    a[i][i] -= x
                s = abs(a[nn][nn - 1]) + abs(a[nn - 1][nn - 2])
                y = x = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            total += 1
            m = nn - 2
            while m >= l:
                z = a[m][m]
                r, s = x - z, y - z
                p = (r * s - w) / a[m + 1][m] + a[m][m + 1]
                q = a[m + 1][m + 1] - z - r - s
                r = a[m + 2][m + 1]
                s = abs(p) + abs(q) + abs(r)
                p, q, r = p / s, q / s, r / s
                if m == l:
                    break
                u = abs(a[m][m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1][m - 1]) + abs(z) + abs(a[m + 1][m + 1]))
                if u <= EPS * v:
                    break
                m -= 1
            for i in range(m, nn - 1):
                a[i + 2][i] = 0.0
                if i != m:
                    a[i + 2][i - 1] = 0.0
            for k in range(m, nn):
                if k != m:
                    p, q, r = a[k][k - 1], a[k + 1][k - 1], 0.0
                    if k + 1 != nn:
                        r = a[k + 2][k - 1]
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p, q, r = p / x, q / x, r / x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k][k - 1] = -a[k][k - 1]
                else:
                    a[k][k - 1] = -s * x
                p += s
                x, y, z = p / s, q / s, r / s
                q, r = q / p, r / p
                for j in range(k, nn + 1):
                    p = a[k][j] + q * a[k + 1][j]
                    if k + 1 != nn:
                        p += r * a[k + 2][j]
                        a[k + 2][j] -= p * z
                    a[k + 1][j] -= p * y
                    a[k][j] -= p * x
                for i in range(l, min(nn, k + 3) + 1):
                    p = x * a[i][k] + y * a[i][k + 1]
                    if k + 1 != nn:
                        p += z * a[i][k + 2]
                        a[i][k + 2] -= p * r
                    a[i][k + 1] -= p * q
                    a[i][k] -= p
    return [complex(wr[i], wi[i]) for i in range(n)]


@dataclass(frozen=True)
class NodeSet:
    values: tuple
    qr_values: tuple
    simple: tuple[bool, ...]
    real: bool
    diameter: float
    min_gap: float
    max_shift: float = 0.0

    @property
    def all_simple(self) -> bool:
        return all(self.simple)


def _sort_key(z: complex):
    return (round(z.real, 14), z.imag)


def _newton(table: RecurrenceTable, n: int, z: complex) -> complex:
    vals, ders = eval_recurrence(table, n, z)
    best = abs(vals[n])
    for _ in range(NEWTON_STEPS):
        if best == 0.0 or ders[n] == 0:
            break
        trial = z - vals[n] / ders[n]
        tv, td = eval_recurrence(table, n, trial)
        if not abs(tv[n]) < best:
            break
        z, vals, ders, best = trial, tv, td, abs(tv[n])
    return z


def eigen_nodes(L: HessenbergMatrix, table: RecurrenceTable, max_iter: int | None = None) -> NodeSet:
    """Zeros of ``P_n`` as eigenvalues of ``L_n``, sorted by real then imaginary part."""
    n = L.n
    ftable = table.to_float()
    a = _prescaled_transpose(L)
    _balance(a)
    raw = sorted(hqr(a, max_iter), key=_sort_key)
    polished = []
    for z in raw:
        zz = _newton(ftable, n, z if z.imag else complex(z.real, 0.0))
        polished.append(zz)
    polished.sort(key=_sort_key)
    diam = max((abs(p - q) for p in polished for q in polished), default=0.0)
    scale = diam if diam > 0 else max(1.0, max(abs(p) for p in polished))
    gaps = [min((abs(p - q) for j, q in enumerate(polished) if j != i), default=math.inf)
            for i, p in enumerate(polished)]
    simple = tuple(g > TAU_SEP * scale for g in gaps)
    real = all(abs(p.imag) <= TAU_IMAG * scale for p in polished)
    shift = max((min(abs(p - q) for q in raw) for p in polished), default=0.0)
    values = tuple(p.real for p in polished) if real else tuple(polished)
    if not all(simple):
        log.warning("L_%d has eigenvalues closer than %.3e", n, TAU_SEP * scale)
    return NodeSet(values, tuple(raw), simple, real, diam, min(gaps), shift)


# --- eigenvectors --------------------------------------------------------------

def _vnorm(v) -> float:
    return math.sqrt(sum(abs(complex(c)) ** 2 for c in v))


def right_residual(L: HessenbergMatrix, x, v):
    Lv = L.matvec(v)
    diff = [p - x * q for p, q in zip(Lv, v)]
    if L.exact:
        return diff
    return _vnorm(diff)


def left_residual(L: HessenbergMatrix, x, u):
    uL = L.vecmat(u)
    diff = [p - x * q for p, q in zip(uL, u)]
    if L.exact:
        return diff
    return _vnorm(diff)


def _check(L: HessenbergMatrix, res, vec, what: str, tau: float) -> float:
    if L.exact:
        if any(d != 0 for d in res):
            raise ResidualTooLarge(f"{what} eigen-equation fails exactly")
        return 0.0
    bound = tau * L.norm() * _vnorm(vec)
    if not res <= bound:
        raise ResidualTooLarge(f"{what} eigen-equation residual {res:.3e} exceeds {bound:.3e}")
    return res


def right_eigenvector(table: RecurrenceTable, x, n: int, tau: float = TAU_EIG) -> list:
    """``(P_0(x), ..., P_{n-1}(x))``, checked against ``L_n v = x v``."""
    vals, _ = eval_recurrence(table, n, x)
    v = vals[:n]
    L = build_hessenberg(table, n)
    _check(L, right_residual(L, x, v), v, "right", tau)
    return v


def _first_index(values, exact: bool, head: int) -> int:
    """First nonzero among the leading ``head`` entries (where it must lie)."""
    values = values[:head]
    if exact:
        return next((k for k, v in enumerate(values) if v != 0), -1)
    scale = max((abs(v) for v in values), default=0.0)
    return next((k for k, v in enumerate(values) if abs(v) > TAU_ZERO * scale), -1)


class _ShiftedLU:
    """Partial-pivot LU that nudges vanishing pivots instead of failing.

    Rows are scanned only where they are nonzero, so the banded shifted
    matrices used here factor in O(n^2); the factors serve every step of
    an inverse iteration.
    """

    def __init__(self, m: list[list[complex]]):
        n = len(m)
        a = [row[:] for row in m]
        scale = max((abs(v) for row in m for v in row), default=1.0) or 1.0
        width = [max((k for k, v in enumerate(row) if v), default=0) + 1 for row in a]
        steps = []
        for c in range(n):
            cand = [i for i in range(c, n) if a[i][c]]
            p = max(cand, key=lambda i: abs(a[i][c]), default=c)
            a[c], a[p] = a[p], a[c]
            width[c], width[p] = width[p], width[c]
            if abs(a[c][c]) < EPS * scale:
                a[c][c] = EPS * scale
            prow, hi = a[c], width[c]
            elim = []
            for i in cand:
                if i == p:
                    continue
                i = p if i == c else i  # old row c now sits at index p
                row = a[i]
                f = row[c] / prow[c]
                for k in range(c, hi):
                    row[k] -= f * prow[k]
                width[i] = max(width[i], hi)
                elim.append((i, f))
            steps.append((p, elim))
        self.n, self.lu, self.steps = n, a, steps

    def solve(self, b: list[complex]) -> list[complex]:
        n, a = self.n, self.lu
        y = list(b)
        for c, (p, elim) in enumerate(self.steps):
            y[c], y[p] = y[p], y[c]
            for i, f in elim:
                y[i] -= f * y[c]
        for i in range(n - 1, -1, -1):
            row = a[i]
            y[i] = (y[i] - sum(row[k] * y[k] for k in range(i + 1, n) if row[k])) / row[i]
        return y


def _inverse_iteration(L: HessenbergMatrix, x: complex, steps: int = 6) -> list:
    """Left eigenvector of L at x by inverse iteration on the level-scaled matrix."""
    n = L.n
    st = _prescaled_transpose(L)
    m = [[complex(st[i][k]) - (x if i == k else 0) for k in range(n)] for i in range(n)]
    lu = _ShiftedLU(m)
    y = [complex(1.0)] * n
    for _ in range(steps):
        y = lu.solve(y)
        norm = _vnorm(y)
        y = [c / norm for c in y]
    return [yk / dk for yk, dk in zip(y, level_scaling(L))]


def _column_sweep(L: HessenbergMatrix, x: complex) -> list:
    """Solve ``u^T (L - x I) = 0`` column by column from the last one.

    Column c fixes ``u_{c-1}`` from ``u_c .. u_{c+r}``; run backwards this is
    the stable direction when the left vector grows along the band.
    """
    n, r = L.n, L.r
    u = [0j] * n
    u[n - 1] = 1 + 0j
    for c in range(n - 1, 0, -1):
        acc = (L.entry(c, c) - x) * u[c]
        for k in range(c + 1, min(n, c + r + 1)):
            acc += u[k] * L.entry(k, c)
        u[c - 1] = -acc
    norm = _vnorm(u)
    return [v / norm for v in u]


def left_eigenvector(ctx: CDContext, table: RecurrenceTable, x, tau: float = TAU_EIG) -> tuple[list, int, int]:
    """Left eigenvector of ``L_n`` at node ``x`` from the Q-determinant values.

    Returns ``(u, k, i)``: ``u`` scaled so that its first nonzero entry
    ``u[k-1]`` is 1, and the CD index ``i`` that produced it.
    """
    n, r, exact = ctx.n, ctx.r, ctx.exact
    L = build_hessenberg(table, n)
    pvals, pders = eval_recurrence(table, n, x)
    lim = min(r, n)
    if exact:
        picks = [i for i in range(1, lim + 1) if pvals[n - i] != 0]
    else:
        # P_{n-i}(x) counts as zero when a Newton step would reach a zero of it
        # within the node-separation tolerance
        reach = TAU_SEP * max(1.0, abs(x))
        picks = [i for i in range(1, lim + 1)
                 if abs(pvals[n - i]) > reach * abs(pders[n - i]) and pvals[n - i] != 0]
    if not picks:
        raise NoValidIndex(f"P_{{n-i}} vanishes at the node for every i <= {lim}")
    i = picks[0]
    u = q_values(ctx, i, x)
    k = _first_index(u, exact, lim)
    if k < 0:
        raise NoValidIndex("all Q values vanish at the node")
    piv = u[k]
    u = [c / piv for c in u]
    if exact:
        _check(L, left_residual(L, x, u), u, "left", tau)
        return u, k + 1, i
    res = left_residual(L, x, u)
    if res <= tau * L.norm() * _vnorm(u):
        return u, k + 1, i
    log.info("Q-route left vector residual %.3e at x=%s; falling back to inverse iteration", res, x)
    bound = tau * L.norm()
    for route in (_inverse_iteration, _column_sweep):
        w = route(L, complex(x))
        if not isinstance(x, complex):
            w = [c.real for c in w]
        res = left_residual(L, x, w)
        if res <= bound * _vnorm(w):
            break
        log.info("%s left vector residual %.3e at x=%s", route.__name__.strip("_"), res, x)
    k2 = _first_index(w, False, lim)
    if k2 < 0:
        raise NoValidIndex("left vector vanishes on its leading entries")
    w = [c / w[k2] for c in w]
    _check(L, left_residual(L, x, w), w, "left", tau)
    return w, k2 + 1, i


@dataclass(frozen=True)
class EigenPair:
    value: object
    right: tuple
    left: tuple
    k: int
    i: int
    right_residual: float = 0.0
    left_residual: float = 0.0
    condition: float = 1.0
    extra: dict = field(default_factory=dict, compare=False)

    def inner(self):
        return sum((a * b for a, b in zip(self.left, self.right)), 0 * self.right[0])


def eigen_pair(ctx: CDContext, table: RecurrenceTable, x, tau: float = TAU_EIG) -> EigenPair:
    n = ctx.n
    L = build_hessenberg(table, n)
    v = right_eigenvector(table, x, n, tau)
    u, k, i = left_eigenvector(ctx, table, x, tau)
    if L.exact:
        return EigenPair(x, tuple(v), tuple(u), k, i)
    # eigenvalue condition number measured in the levelled frame, where it is
    # not inflated by the geometric drift of P_k(x) along k
    d = level_scaling(L)
    dot = abs(sum(a * b for a, b in zip(u, v)))
    nu = _vnorm([a * dk for a, dk in zip(u, d)])
    nv = _vnorm([b / dk for b, dk in zip(v, d)])
    cond = nu * nv / dot if dot else math.inf
    return EigenPair(x, tuple(v), tuple(u), k, i, right_residual(L, x, v), left_residual(L, x, u), cond)


def biorthogonality(pairs) -> float:
    """Largest relative ``|u_l^T v_m|`` over l != m for floating pairs."""
    worst = 0.0
    for a, pa in enumerate(pairs):
        for b, pb in enumerate(pairs):
            if a != b:
                dot = sum(p * q for p, q in zip(pa.left, pb.right))
                worst = max(worst, abs(dot) / (_vnorm(pa.left) * _vnorm(pb.right)))
    return worst


def _rem_monic(num: list, den: list) -> list:
    num = list(num)
    d = len(den) - 1
    for k in range(len(num) - 1, d - 1, -1):
        c = num[k]
        if c != 0:
            for i in range(d + 1):
                num[k - d + i] = num[k - d + i] - c * den[i]
    return num[:d]


def biorthogonal_exact(pair: EigenPair, table: RecurrenceTable, other_minpoly=None) -> bool:
    """Exact ``u^T v(y) = 0`` for every root y of a rational polynomial.

    ``pair.value`` is the generator of a number field K.  ``u^T v(t)`` is a
    polynomial in t over K; it vanishes at all roots of ``h`` iff its
    remainder modulo ``h`` is zero.  With ``other_minpoly`` omitted, h is the
    node's own minimal polynomial divided by ``t - x``, which covers the
    conjugate nodes.
    """
    from .mop import type2_sequence

    x = pair.value
    K = x.field
    if other_minpoly is None:
        h, _ = Polynomial(K.minpoly).deflate(x)
    else:
        h = Polynomial(other_minpoly)
    h = h / h.lead if h.degree >= 0 else h
    if h.degree < 1:
        return True
    n = len(pair.right)
    P = type2_sequence(table, n - 1)
    acc = Polynomial()
    for k, u in enumerate(pair.left):
        acc = acc + P[k] * u
    rem = _rem_monic(list(acc.coeffs), list(h.coeffs))
    return all(c == 0 for c in rem)
