"""Multiple Gaussian quadrature: shared nodes at the zeros of P_n, one weight
vector per measure.

Weights are produced twice, once from the left/right eigenvectors of
``L_n`` together with the constants ``C_{j,k}``, once by integrating the
Lagrange basis of the node set against each measure, and the two are
required to agree.  In the rational backend nodes are carried as roots of
the irreducible rational factors of ``P_n`` and every check is an identity
in the corresponding number field.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .backend import RATIONAL, RATIONAL_GMP, fast_rational, is_rational, to_fraction
from .cdk import cd_context, q_values
from .errors import (ComplexNodes, DegenerateInnerProduct, DuplicateNodes, FormulaMismatch,
                     NonSimpleZeros, NotNormal, SingularTriangular, WeightMismatch, ZeroPivot)
from .measures import (ConjugateDiscreteMoments, DiscreteMoments, MeasureSystem, moment_matrix)
from .mop import (RecurrenceTable, eval_recurrence, pairing, recurrence_table, rows_from_type2, type1_initials,
                  type1_polynomial, type2_polynomial, type2_sequence)
from .numberfield import FieldElement, NumberField, factor_rational
from .polynomial import Polynomial
from .spectral import (TAU_EIG, TAU_SEP, EigenPair, NodeSet, build_hessenberg, eigen_nodes,
                       eigen_pair)

log = logging.getLogger(__name__)

TAU_W = 1e-9
TAU_ZERO = 1e-12
TAU_EX_REL = 1e-9
TAU_EX_ABS = 1e-12
TAU_ROUNDTRIP = 1e-9
EXTRA_DEGREES = 2


# --- C constants ----------------------------------------------------------------

@dataclass(frozen=True)
class CConstants:
    """Lower triangular ``C_{j,k} = int P_{k-1} dmu_j``, 1 <= k <= j <= r."""

    rows: tuple[tuple, ...]

    @property
    def r(self) -> int:
        return len(self.rows)

    def __getitem__(self, jk):
        j, k = jk
        if not 1 <= k <= j <= self.r:
            return 0
        return self.rows[j - 1][k - 1]

    def to_float(self) -> "CConstants":
        return CConstants(tuple(tuple(float(v) for v in row) for row in self.rows))


def _c_by_determinants(system: MeasureSystem) -> list[list]:
    backend, r = system.backend, system.r
    rows = [[None] * (j + 1) for j in range(r)]
    prev = backend.one()
    for k in range(1, r + 1):
        mm = moment_matrix(system, k)
        # with k <= r the multi-index is (1,..,1,0,..) and column k is the new condition
        minors = [backend.det(mm.minor(k, i)) if k > 1 else backend.one() for i in range(1, k + 1)]
        for j in range(k, r + 1):
            acc = backend.zero()
            for i in range(1, k + 1):
                acc = acc + (-1) ** (k + i) * system.moment(j, i - 1) * minors[i - 1]
            rows[j - 1][k - 1] = acc / prev
        prev = backend.det(mm.matrix)
    return rows


def c_constants(system: MeasureSystem, table: RecurrenceTable | None = None) -> CConstants:
    """Moment sums over ``P_{k-1}`` cross-checked against the determinant formula."""
    r, backend = system.r, system.backend
    if table is not None and table.size >= r - 1:
        P = type2_sequence(table, r - 1)
    else:
        P = [type2_polynomial(system, k) for k in range(r)]
    direct = [[P[k - 1].integrate(lambda l, j=j: system.moment(j, l)) for k in range(1, j + 1)]
              for j in range(1, r + 1)]
    dets = _c_by_determinants(system)
    for j in range(r):
        for k in range(j + 1):
            a, b = direct[j][k], dets[j][k]
            bad = a != b if backend.exact else abs(a - b) > 1e-8 * max(1.0, abs(a))
            if bad:
                raise FormulaMismatch(f"C[{j + 1},{k + 1}]: moment sum {a} vs determinant formula {b}")
    for j in range(r):
        if (direct[j][j] == 0) if backend.exact else abs(direct[j][j]) <= TAU_ZERO * max(abs(v) for v in direct[j]):
            raise FormulaMismatch(f"C[{j + 1},{j + 1}] vanishes")
    return CConstants(tuple(tuple(row) for row in direct))


def _nonzero(v) -> bool:
    return v != 0


def _promote(v):
    # integers would otherwise turn into floats under true division
    return Fraction(v) if isinstance(v, int) else v


def a_from_c(C: CConstants) -> tuple[tuple, ...]:
    """Initial type I values ``A_{i,j}`` from C by the upper triangular systems."""
    r = C.r
    C = CConstants(tuple(tuple(_promote(v) for v in row) for row in C.rows))
    out = []
    for i in range(1, r + 1):
        # sum_{j=k}^{i} C_{j,k} A_{i,j} = delta_{k,i}, k = 1..i; back substitution
        a = [0] * (i + 1)
        for k in range(i, 0, -1):
            diag = C[k, k]
            if not _nonzero(diag):
                raise SingularTriangular(f"C[{k},{k}] is zero")
            acc = (1 if k == i else 0) - sum((C[j, k] * a[j] for j in range(k + 1, i + 1)), 0)
            a[k] = acc / diag
        out.append(tuple(a[1:]) + (0 * a[1],) * (r - i))
    return tuple(out)


def c_from_a(initials: Sequence[Sequence]) -> CConstants:
    """``C`` from the lower triangular ``A_{i,j}``, column by column."""
    r = len(initials)
    A = [[_promote(v) for v in row] for row in initials]
    rows = [[None] * (j + 1) for j in range(r)]
    for i in range(1, r + 1):
        # sum_{j=i}^{l} A_{l,j} C_{j,i} = delta_{l,i}, l = i..r; forward substitution
        for l in range(i, r + 1):
            diag = A[l - 1][l - 1]
            if not _nonzero(diag):
                raise SingularTriangular(f"A[{l},{l}] is zero")
            acc = (1 if l == i else 0) - sum((A[l - 1][j - 1] * rows[j - 1][i - 1] for j in range(i, l)), 0)
            rows[l - 1][i - 1] = acc / diag
    return CConstants(tuple(tuple(row) for row in rows))


# --- weights ----------------------------------------------------------------------

def _moment_rows(system: MeasureSystem, count: int, conv=None) -> list[list]:
    ex = system.exact()
    conv = conv or (lambda v: v)
    return [[conv(ex.moment(j, l)) for l in range(count)] for j in range(1, system.r + 1)]


def _lagrange_exact(moments: list[list], omega: Polynomial, x) -> list:
    """``int l_x dmu_j`` for j = 1..r with ``l_x = omega / ((t - x) omega'(x))``."""
    q, rem = omega.deflate(x)
    if rem != 0:
        raise FormulaMismatch("node is not a root of the node polynomial")
    denom = q(x)
    if denom == 0:
        raise DuplicateNodes("node polynomial has a repeated root")
    return [q.integrate(row.__getitem__) / denom for row in moments]


def _check_distinct(nodes: Sequence) -> None:
    if len(nodes) < 2:
        return
    diam = max(abs(a - b) for a in nodes for b in nodes)
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            if abs(a - b) <= TAU_SEP * diam:
                raise DuplicateNodes(f"nodes {a} and {b} are closer than {TAU_SEP * diam:.3e}")


REFINE_BITS = 256


def _refine(P: Polynomial, x, steps: int = 6):
    """Newton on the exact ``P`` from a double-precision zero, kept on a 2^-256 grid.

    Interpolatory weights of the non-Gaussian components move at first order
    with the nodes, so rounding errors of the nodes themselves would
    otherwise dominate the comparison at larger n.
    """
    dP = P.deriv()
    grid = 1 << REFINE_BITS
    for _ in range(steps):
        d = dP(x)
        if d == 0:
            break
        step = P(x) / d
        x = fast_rational(round((x - step) * grid)) / grid
        if abs(step) * grid < 4:
            break
    return x


def weights_interpolatory(system: MeasureSystem, nodes: Sequence) -> list[tuple]:
    """``w^(j)_l = int l_l dmu_j`` from the Lagrange basis of the node set.

    Number-field nodes (generators) are handled exactly, with the node
    polynomial the product of their minimal polynomials.  Real floating
    nodes are taken at their exact binary values, integrated in rationals
    and rounded once; complex nodes are integrated in complex arithmetic.
    """
    nodes = list(nodes)
    r = system.r
    if nodes and isinstance(nodes[0], FieldElement):
        omega = Polynomial((Fraction(1),))
        for x in nodes:
            omega = omega * Polynomial(x.field.minpoly)
        moments = _moment_rows(system, omega.degree)
        per = [_lagrange_exact(moments, omega, x) for x in nodes]
        return [tuple(p[j] for p in per) for j in range(r)]
    _check_distinct(nodes)
    if any(isinstance(x, complex) for x in nodes):
        return _weights_complex(system, [complex(x) for x in nodes])
    ex = system.exact()
    # same P_n as the moment solve (checked in the tests), but from the cached table
    target = type2_sequence(exact_table(ex, len(nodes)), len(nodes))[-1].map(fast_rational)
    exact_nodes = [_refine(target, fast_rational(float(x))) for x in nodes]
    if len(set(exact_nodes)) < len(exact_nodes):
        raise DuplicateNodes("two nodes refine to the same zero")
    omega = Polynomial.from_roots(exact_nodes)
    moments = _moment_rows(system, len(nodes), fast_rational)
    per = [_lagrange_exact(moments, omega, x) for x in exact_nodes]
    return [tuple(float(p[j]) for p in per) for j in range(r)]


def _weights_complex(system: MeasureSystem, nodes: list[complex]) -> list[tuple]:
    omega = Polynomial.from_roots(nodes)
    ex = system.exact()
    out = [[] for _ in range(system.r)]
    for x in nodes:
        q, _ = omega.deflate(x)
        denom = q(x)
        for j in range(1, system.r + 1):
            out[j - 1].append(q.integrate(lambda l, j=j: float(ex.moment(j, l))) / denom)
    return [tuple(w) for w in out]


def weights_spectral(pairs: Sequence[EigenPair], C: CConstants) -> list[tuple]:
    """``w^(j)_l = sum_{k <= min(j,n)} C_{j,k} u_l(k) / (u_l^T v_l)``."""
    r = C.r
    out = [[] for _ in range(r)]
    for p in pairs:
        n = len(p.right)
        d = p.inner()
        exact = isinstance(d, FieldElement) or is_rational(d)
        if exact:
            if d == 0:
                raise DegenerateInnerProduct(f"u^T v vanishes at node {p.value}")
        elif not p.condition * TAU_ZERO < 1.0:
            raise DegenerateInnerProduct(f"|u^T v| is degenerate at node {p.value} (condition {p.condition:.3e})")
        for j in range(1, r + 1):
            acc = 0 * d
            for k in range(1, min(j, n) + 1):
                acc = acc + C[j, k] * p.left[k - 1]
            out[j - 1].append(acc / d)
    _zero_structure(out, pairs)
    return [tuple(col) for col in out]


def _zero_structure(out, pairs) -> None:
    """Weights of the measures before the first nonzero left component vanish."""
    scale = max((abs(complex(w)) for col in out for w in col if not isinstance(w, FieldElement)), default=0.0)
    for idx, p in enumerate(pairs):
        for j in range(1, p.k):
            w = out[j - 1][idx]
            if isinstance(w, FieldElement) or is_rational(w):
                if w != 0:
                    raise WeightMismatch(f"w^({j}) at node {idx + 1} should vanish (k = {p.k})")
            elif abs(w) > TAU_W * scale:
                raise WeightMismatch(f"w^({j}) at node {idx + 1} should vanish (k = {p.k})")


def weights_spectral_at(ctx, table: RecurrenceTable, C: CConstants, x, i: int) -> tuple:
    """Theorem-3 weights at one node from unnormalised Q values.

    With ``q_k = Q^(i)_{k,n}(x)`` the left eigenvector is ``q / q_{k_l}`` and
    the confluent Christoffel-Darboux identity gives
    ``sum_k P_{k-1}(x) q_k = gamma_n (P_n' P_{n-i} - P_n P_{n-i}')(x)``, so the
    normaliser cancels and ``u^T v`` needs no long inner product.  Exact
    tables make this an exact evaluation at the (binary) node value.
    """
    n, r = ctx.n, ctx.r
    head = min(r, n)
    q = q_values(ctx, i, x, ks=range(1, head + 1))
    pv, pd = eval_recurrence(table, n, x)
    dot = ctx.gamma * (pd[n] * pv[n - i] - pv[n] * pd[n - i])
    if dot == 0:
        raise DegenerateInnerProduct(f"u^T v vanishes at node {x}")
    return tuple(sum((C[j, k] * q[k - 1] for k in range(1, min(j, n) + 1)), 0 * dot) / dot
                 for j in range(1, r + 1))


# --- rules ------------------------------------------------------------------------

@dataclass(frozen=True)
class NodeClass:
    """Exact description of the nodes that are the roots of one rational factor."""

    field: NumberField
    weights: tuple  # r field elements
    k: int
    i: int
    roots: tuple  # indices into QuadratureRule.nodes

    @property
    def node(self) -> FieldElement:
        return self.field.gen


@dataclass(frozen=True)
class ExactnessCertificate:
    n: int
    guaranteed: tuple[int, ...]
    observed: tuple[int, ...]
    residuals: tuple[tuple, ...]  # per j: residual for degree 0 .. guaranteed + EXTRA_DEGREES
    passed: tuple[tuple[bool, ...], ...]
    witness_quadrature: object = None
    witness_integral: object = None
    exact: bool = False

    @property
    def guaranteed_ok(self) -> bool:
        return all(all(p[: g + 1]) for p, g in zip(self.passed, self.guaranteed))

    @property
    def witness_gap(self):
        if self.witness_integral is None:
            return None
        return self.witness_integral - self.witness_quadrature

    @property
    def beyond(self) -> tuple[bool, ...]:
        """Per measure: exactness observed beyond the guaranteed degree."""
        return tuple(o > g for o, g in zip(self.observed, self.guaranteed))


@dataclass(frozen=True)
class QuadratureRule:
    n: int
    nodes: tuple
    weights: tuple[tuple, ...]
    real: bool
    exact: bool = False
    classes: tuple[NodeClass, ...] = ()
    node_polynomial: Polynomial | None = None
    certificate: ExactnessCertificate | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def r(self) -> int:
        return len(self.weights)

    @property
    def weight_sums(self) -> tuple:
        if self.exact:
            return tuple(sum((c.weights[j].trace() for c in self.classes), Fraction(0)) for j in range(self.r))
        return tuple(math.fsum(w.real if isinstance(w, complex) else w for w in col) if self.real
                     else sum(col) for col in self.weights)

    def with_certificate(self, cert: ExactnessCertificate) -> "QuadratureRule":
        return QuadratureRule(self.n, self.nodes, self.weights, self.real, self.exact, self.classes,
                              self.node_polynomial, cert, self.diagnostics)


def _max_abs(values) -> float:
    return max((abs(complex(v)) for v in values), default=0.0)


def _compare_weights(a: list[tuple], b: list[tuple], exact: bool, tau: float) -> float:
    if exact:
        for j, (ca, cb) in enumerate(zip(a, b), 1):
            if tuple(ca) != tuple(cb):
                raise WeightMismatch(f"spectral and interpolatory weights differ for measure {j}")
        return 0.0
    scale = max(_max_abs(col) for col in a)
    gap = max(abs(complex(p) - complex(q)) for ca, cb in zip(a, b) for p, q in zip(ca, cb))
    if gap > tau * scale:
        raise WeightMismatch(f"weight routes differ by {gap:.3e} (allowed {tau * scale:.3e})")
    return gap / scale if scale else gap


def _float_initials(initials) -> tuple:
    return tuple(tuple(float(v) for v in row) for row in initials)


_TABLES: dict = {}


def exact_table(system: MeasureSystem, size: int) -> RecurrenceTable:
    """Exact rows 0..size-1, reusing the longest table built so far for the system.

    A table that has to grow is rebuilt with headroom, so sweeping n upwards
    costs a logarithmic number of rebuilds.  Arithmetic runs on GMP rationals
    when available; the stored rows are Fractions.
    """
    ex = system.exact()
    hit = _TABLES.get(ex)
    if hit is None or hit.size < size:
        target = max(size, 2 * hit.size if hit is not None else size)
        fast = ex.with_backend(RATIONAL_GMP)
        try:
            raw = recurrence_table(fast, target - 1)
        except (NotNormal, ZeroPivot):
            if target == size:
                raise
            raw = recurrence_table(fast, size - 1)
        hit = RecurrenceTable(raw.r, tuple(tuple(to_fraction(v) for v in row) for row in raw.rows), True)
        if len(_TABLES) > 64:
            _TABLES.clear()
        _TABLES[ex] = hit
    return hit if hit.size == size else hit.truncated(size)


def _exact_pipeline(system: MeasureSystem, n: int):
    ex = system.exact()
    table = exact_table(ex, n)
    initials = type1_initials(ex)
    C = c_constants(ex, table)
    return ex, table, initials, C


def _accelerated(table: RecurrenceTable, initials, C: CConstants):
    """The exact data converted to the fastest rational type."""
    rows = tuple(tuple(fast_rational(v) for v in row) for row in table.rows)
    return (RecurrenceTable(table.r, rows, True, table.consistency),
            tuple(tuple(fast_rational(v) for v in row) for row in initials),
            CConstants(tuple(tuple(fast_rational(v) for v in row) for row in C.rows)))


def _float_nodes(table: RecurrenceTable, n: int, tau_eig: float) -> NodeSet:
    ft = table.to_float()
    return eigen_nodes(build_hessenberg(ft, n), ft)


def build_rule(system: MeasureSystem, n: int, tau_eig: float = TAU_EIG, tau_w: float = TAU_W,
               certify: bool = True) -> QuadratureRule:
    """Shared-node rule with the spectral weights as the canonical output."""
    if n < 1:
        raise ValueError("rule size must be >= 1")
    ex, table, initials, C = _exact_pipeline(system, n)
    if system.backend.exact:
        rule = _build_exact(ex, table, initials, C, n, tau_eig)
    else:
        rule = _build_float(ex, table, initials, C, n, tau_eig, tau_w)
    if certify:
        rule = rule.with_certificate(verify_vector_order(rule, system))
    return rule


def _build_float(ex, table, initials, C, n, tau_eig, tau_w) -> QuadratureRule:
    ft = table.to_float()
    ns = eigen_nodes(build_hessenberg(ft, n), ft)
    if not ns.all_simple:
        raise NonSimpleZeros(f"P_{n} has zeros closer than the separation tolerance")
    ctx = cd_context(ft, _float_initials(initials), n)
    pairs = [eigen_pair(ctx, ft, x, tau_eig) for x in ns.values]
    if ns.real:
        # the eigenvector formula evaluated exactly at the binary node values;
        # in floating point u^T v cancels by up to the eigenvalue condition number
        ftab, fini, fC = _accelerated(table, initials, C)
        ectx = cd_context(ftab, fini, n)
        cols = [weights_spectral_at(ectx, ftab, fC, fast_rational(x), p.i) for x, p in zip(ns.values, pairs)]
        spectral = [tuple(float(c[j]) for c in cols) for j in range(ex.r)]
        _zero_structure(spectral, pairs)
    else:
        spectral = weights_spectral(pairs, C.to_float())
    interp = weights_interpolatory(ex, ns.values)
    gap = _compare_weights(spectral, interp, False, tau_w)
    if ns.real:
        spectral = [tuple(w.real if isinstance(w, complex) else w for w in col) for col in spectral]
    diag = {"route_gap": gap, "newton_shift": ns.max_shift, "min_gap": ns.min_gap,
            "k": tuple(p.k for p in pairs), "i": tuple(p.i for p in pairs),
            "left_residual": max(p.left_residual for p in pairs),
            "right_residual": max(p.right_residual for p in pairs)}
    P = type2_sequence(table, n)[n]
    return QuadratureRule(n, ns.values, tuple(spectral), ns.real, False, (), P, None, diag)


def _assign(values: Sequence, factors: list[tuple]) -> list[list[int]]:
    """Attach each float node to the rational factor it is (numerically) a root of."""
    buckets = [[] for _ in factors]
    for idx, x in enumerate(values):
        best, arg = math.inf, -1
        for f, (coeffs, _) in enumerate(factors):
            poly = [float(c) for c in coeffs]
            val = abs(Polynomial(poly)(complex(x)))
            der = abs(Polynomial(poly).deriv()(complex(x))) or 1.0
            score = val / der
            if score < best:
                best, arg = score, f
        buckets[arg].append(idx)
    for (coeffs, _), b in zip(factors, buckets):
        if len(b) != len(coeffs) - 1:
            raise FormulaMismatch("floating nodes do not split over the rational factors of P_n")
    return buckets


def _build_exact(ex, table, initials, C, n, tau_eig) -> QuadratureRule:
    P = type2_sequence(table, n)[n]
    factors = factor_rational(P)
    if any(mult > 1 for _, mult in factors):
        raise NonSimpleZeros(f"P_{n} has repeated rational factors")
    ns = _float_nodes(table, n, tau_eig)
    buckets = _assign(ns.values, factors)
    ctx = cd_context(table, initials, n)
    classes, pairs, gens = [], [], []
    for (coeffs, _), roots in zip(factors, buckets):
        K = NumberField(coeffs)
        pair = eigen_pair(ctx, table, K.gen, tau_eig)
        pairs.append(pair)
        gens.append(K.gen)
        classes.append((K, pair, tuple(roots)))
    spectral = weights_spectral(pairs, C)
    interp = weights_interpolatory(ex, gens)
    _compare_weights(spectral, interp, True, 0.0)
    r = ex.r
    out = [[None] * n for _ in range(r)]
    node_classes = []
    for c, (K, pair, roots) in enumerate(classes):
        ws = tuple(spectral[j][c] for j in range(r))
        node_classes.append(NodeClass(K, ws, pair.k, pair.i, roots))
        for idx in roots:
            x = ns.values[idx]
            for j in range(r):
                v = ws[j].at(complex(x))
                out[j][idx] = v.real if ns.real else v
    diag = {"route_gap": 0.0, "factors": len(factors), "k": tuple(p.k for p in pairs),
            "i": tuple(p.i for p in pairs)}
    return QuadratureRule(n, ns.values, tuple(tuple(col) for col in out), ns.real, True,
                          tuple(node_classes), P, None, diag)


# --- certificates -------------------------------------------------------------------

def _witness_polys(ex: MeasureSystem, n: int):
    try:
        A = type1_polynomial(ex, n + 1)
    except NotNormal:
        return None, None
    P = type2_polynomial(ex, n)
    return P, A


def verify_vector_order(rule: QuadratureRule, system: MeasureSystem) -> ExactnessCertificate:
    """Monomial exactness per measure up to two degrees past the guarantee."""
    ex = system.exact()
    n, r = rule.n, system.r
    nu = ex.multi_index(n)
    guaranteed = tuple(n - 1 + nu[j] for j in range(1, r + 1))
    residuals, passed = [], []
    for j in range(1, r + 1):
        row_res, row_ok = [], []
        for d in range(guaranteed[j - 1] + EXTRA_DEGREES + 1):
            m = ex.moment(j, d)
            if rule.exact:
                q = sum(((c.weights[j - 1] * c.node ** d).trace() for c in rule.classes), Fraction(0))
                res = q - m
                ok = res == 0
            else:
                q = sum(w * x ** d for w, x in zip(rule.weights[j - 1], rule.nodes))
                res = q - float(m)
                ok = abs(res) <= TAU_EX_REL * abs(float(m)) + TAU_EX_ABS
            row_res.append(res)
            row_ok.append(bool(ok))
        residuals.append(tuple(row_res))
        passed.append(tuple(row_ok))
    observed = []
    for ok in passed:
        d = -1
        while d + 1 < len(ok) and ok[d + 1]:
            d += 1
        observed.append(d)
    P, A = _witness_polys(ex, n)
    wq = wi = None
    if A is not None:
        wi = pairing(ex, P, A)
        if rule.exact:
            wq = Fraction(0)
            for c in rule.classes:
                x = c.node
                inner = sum((A[j](x) * c.weights[j - 1] for j in range(1, r + 1)), 0 * x)
                wq += (P(x) * inner).trace()
        else:
            # polynomial values exactly at the binary nodes; the monomial
            # coefficients of P_n and A_{n+1} cancel far too much in floating point
            wq = 0.0
            for l, x in enumerate(rule.nodes):
                if isinstance(x, complex):
                    px = complex(P.map(float)(x))
                    inner = sum(complex(A[j].map(float)(x)) * rule.weights[j - 1][l] for j in range(1, r + 1))
                else:
                    fx = Fraction(x)
                    px = float(P(fx))
                    inner = sum(float(A[j](fx)) * rule.weights[j - 1][l] for j in range(1, r + 1))
                wq += px * inner
            wi = float(wi)
    return ExactnessCertificate(n, guaranteed, tuple(observed), tuple(residuals), tuple(passed),
                                wq, wi, rule.exact)


# --- discrete measures ----------------------------------------------------------------

def discrete_reconstruction(rule: QuadratureRule) -> MeasureSystem:
    """The r discrete measures ``sum_l w^(j)_l delta_{x_l}`` carried by the rule."""
    if rule.exact:
        providers = tuple(ConjugateDiscreteMoments(tuple((c.node, c.weights[j]) for c in rule.classes))
                          for j in range(rule.r))
        return MeasureSystem(providers, RATIONAL, f"discrete-{rule.n}")
    if not rule.real:
        raise ComplexNodes("discrete measures need real nodes")
    providers = tuple(DiscreteMoments(tuple(rule.nodes), tuple(rule.weights[j])) for j in range(rule.r))
    return MeasureSystem(providers, name=f"discrete-{rule.n}")


def round_trip(rule: QuadratureRule, table: RecurrenceTable) -> float:
    """Recompute rows 0..n-1 from the discrete measures and compare with ``table``.

    The rows are read off the rebuilt type II polynomials, which the
    discrete measures determine up to degree n.  Returns the largest
    absolute row difference (0 exactly in rationals).
    """
    disc = discrete_reconstruction(rule).with_backend(RATIONAL_GMP)
    n = rule.n
    rebuilt = rows_from_type2([type2_polynomial(disc, k) for k in range(n + 1)], rule.r, n - 1)
    worst = 0.0
    for k in range(n):
        for a, b in zip(rebuilt[k], table.rows[k]):
            if rule.exact:
                if a != b:
                    raise FormulaMismatch(f"row {k} of the rebuilt table differs")
            else:
                worst = max(worst, abs(float(a) - float(b)))
    return worst
