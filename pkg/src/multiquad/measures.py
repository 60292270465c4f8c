"""Measure systems described by their moments.

Every integral this package needs is the integral of a polynomial against
one of the measures, so a measure is represented solely by a moment
provider.  Providers keep their data exactly (floats are stored by their
binary rational value); the system's backend decides whether moments are
handed out as fractions or as doubles.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .backend import FLOAT64, RATIONAL, Backend, get_backend, to_fraction
from .errors import ConfigError, OutOfTable, UnknownFormula


@dataclass(frozen=True)
class MultiIndex:
    """Proper multi-index: ``n = m*r + s`` with ``0 < s <= r``.

    The first ``s`` measures get ``m + 1`` conditions, the rest ``m``.
    """

    n: int
    r: int

    def __post_init__(self):
        if self.n < 0 or self.r < 1:
            raise ValueError(f"invalid multi-index n={self.n}, r={self.r}")

    @property
    def m(self) -> int:
        return (self.n - 1) // self.r if self.n else -1

    @property
    def s(self) -> int:
        return self.n - self.m * self.r

    @property
    def components(self) -> tuple[int, ...]:
        m, s = self.m, self.s
        return (m + 1,) * s + (m,) * (self.r - s)

    def __getitem__(self, j: int) -> int:
        """Component for measure ``j`` (1-based)."""
        return self.components[j - 1]

    def __iter__(self):
        return iter(self.components)


# ---------------------------------------------------------------------------
# moment providers


def _lebesgue(l: int, a=Fraction(0), b=Fraction(1)) -> Fraction:
    return (b ** (l + 1) - a ** (l + 1)) / (l + 1)


def _power(l: int, alpha=Fraction(0)) -> Fraction:
    # x**alpha dx on [0, 1]
    return 1 / (l + alpha + 1)


_FORMULAS = {
    "lebesgue": (_lebesgue, {"a": Fraction(0), "b": Fraction(1)}),
    "power": (_power, {"alpha": Fraction(0)}),
}


class MomentProvider:
    kind: str = ""

    def exact_moment(self, l: int):
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class AnalyticMoments(MomentProvider):
    name: str
    params: tuple[tuple[str, Fraction], ...] = ()
    kind = "analytic"
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.name not in _FORMULAS:
            raise UnknownFormula(f"unknown analytic measure {self.name!r}; known: {sorted(_FORMULAS)}")
        allowed = _FORMULAS[self.name][1]
        for key, _ in self.params:
            if key not in allowed:
                raise ConfigError(f"measure {self.name!r} has no parameter {key!r}")
        p = dict(allowed, **dict(self.params))
        if self.name == "lebesgue" and not p["a"] < p["b"]:
            raise ConfigError("lebesgue measure needs a < b")
        if self.name == "power" and not p["alpha"] > -1:
            raise ConfigError("power weight needs alpha > -1")

    @classmethod
    def make(cls, name: str, **params) -> "AnalyticMoments":
        return cls(name, tuple(sorted((k, to_fraction(v)) for k, v in params.items())))

    def exact_moment(self, l: int) -> Fraction:
        hit = self._cache.get(l)
        if hit is None:
            func, defaults = _FORMULAS[self.name]
            hit = self._cache[l] = func(l, **dict(defaults, **dict(self.params)))
        return hit

    def to_config(self) -> dict:
        return {"kind": "analytic", "name": self.name, "params": {k: str(v) for k, v in self.params}}


@dataclass(frozen=True)
class TableMoments(MomentProvider):
    moments: tuple[Fraction, ...]
    kind = "table"

    def exact_moment(self, l: int) -> Fraction:
        if not 0 <= l < len(self.moments):
            raise OutOfTable(f"moment {l} requested but table holds {len(self.moments)} entries")
        return self.moments[l]

    def to_config(self) -> dict:
        return {"kind": "table", "moments": [str(m) for m in self.moments]}


@dataclass(frozen=True)
class DiscreteMoments(MomentProvider):
    """Finite sum of point masses."""

    points: tuple[Fraction, ...]
    masses: tuple[Fraction, ...]
    kind = "discrete"
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if len(self.points) != len(self.masses):
            raise ConfigError("discrete measure needs as many masses as points")
        # floats enter at their exact binary value
        object.__setattr__(self, "points", tuple(to_fraction(x) for x in self.points))
        object.__setattr__(self, "masses", tuple(to_fraction(w) for w in self.masses))

    def exact_moment(self, l: int) -> Fraction:
        hit = self._cache.get(l)
        if hit is None:
            hit = sum((w * x**l for x, w in zip(self.points, self.masses)), Fraction(0))
            self._cache[l] = hit
        return hit

    def to_config(self) -> dict:
        return {"kind": "discrete", "points": [str(x) for x in self.points],
                "masses": [str(w) for w in self.masses]}


@dataclass(frozen=True)
class ConjugateDiscreteMoments(MomentProvider):
    """Point masses at all roots of irreducible rational polynomials.

    Each atom is ``(generator, mass)`` with ``mass`` an element of the
    generator's number field; the mass at a root is the corresponding
    embedding of that element.  Moments are sums of field traces and hence
    exact rationals.
    """

    atoms: tuple
    kind = "discrete"
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def exact_moment(self, l: int) -> Fraction:
        hit = self._cache.get(l)
        if hit is None:
            hit = sum(((mass * gen**l).trace() for gen, mass in self.atoms), Fraction(0))
            self._cache[l] = hit
        return hit

    def to_config(self) -> dict:
        # The number-field description has no JSON form; ship a moment table.
        raise ConfigError("conjugate point masses cannot be serialized; tabulate moments instead")


@dataclass(frozen=True)
class CombinedMoments(MomentProvider):
    """A fixed linear combination ``sum_k c_k mu_k`` of other measures."""

    parts: tuple  # (coefficient, provider) pairs
    kind = "combination"

    def exact_moment(self, l: int) -> Fraction:
        return sum((to_fraction(c) * p.exact_moment(l) for c, p in self.parts), Fraction(0))

    def to_config(self) -> dict:
        return {"kind": "table", "moments": [str(self.exact_moment(l)) for l in range(32)]}


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class MeasureSystem:
    providers: tuple[MomentProvider, ...]
    backend: Backend = FLOAT64
    name: str = ""

    def __post_init__(self):
        if len(self.providers) < 1:
            raise ConfigError("a measure system needs at least one measure")

    @property
    def r(self) -> int:
        return len(self.providers)

    def moment(self, j: int, l: int):
        """Moment ``l`` of measure ``j`` (1-based) in the system backend."""
        if not 1 <= j <= self.r:
            raise IndexError(f"measure index {j} outside 1..{self.r}")
        if l < 0:
            raise IndexError("moment degree must be non-negative")
        value = self.providers[j - 1].exact_moment(l)
        return self.backend.coerce(value) if self.backend.exact else float(value)

    def with_backend(self, backend) -> "MeasureSystem":
        backend = get_backend(backend)
        if backend is self.backend:
            return self
        return MeasureSystem(self.providers, backend, self.name)

    def exact(self) -> "MeasureSystem":
        return self.with_backend(RATIONAL)

    def multi_index(self, n: int) -> MultiIndex:
        return MultiIndex(n, self.r)

    def to_config(self) -> dict:
        return {"r": self.r, "backend": self.backend.name,
                "measures": [p.to_config() for p in self.providers]}


def mix(system: MeasureSystem, j: int, coeffs: Sequence) -> MeasureSystem:
    """Replace measure ``j`` by ``sum_k coeffs[k-1] mu_k``.

    With ``coeffs[j-1] != 0`` and no weight on later measures this keeps the
    type II polynomials of every proper index and changes only the type I
    vectors.
    """
    if len(coeffs) != system.r:
        raise ConfigError(f"need {system.r} mixing coefficients, got {len(coeffs)}")
    parts = tuple((to_fraction(c), p) for c, p in zip(coeffs, system.providers) if to_fraction(c) != 0)
    providers = list(system.providers)
    providers[j - 1] = CombinedMoments(parts)
    return MeasureSystem(tuple(providers), system.backend, f"{system.name}~mix{j}")


def moment(system: MeasureSystem, j: int, l: int):
    return system.moment(j, l)


@dataclass(frozen=True)
class MomentMatrix:
    """The blocks ``D^(j)_{n, nu_n(j)}`` of moments, block j being n x nu_n(j).

    ``columns`` juxtaposes the blocks into the n x n matrix of the type I
    system; ``matrix`` is its transpose, one row per type II condition.
    """

    n: int
    index: MultiIndex
    blocks: tuple[tuple[tuple, ...], ...]

    @property
    def columns(self) -> list[list]:
        return [[v for blk in self.blocks for v in blk[i]] for i in range(self.n)]

    @property
    def matrix(self) -> list[list]:
        cols = self.columns
        return [[cols[i][k] for i in range(self.n)] for k in range(self.n)]

    def minor(self, row: int, col: int) -> list[list]:
        """``matrix`` with row ``row`` and column ``col`` (1-based) removed."""
        return [[v for c, v in enumerate(line, 1) if c != col]
                for rr, line in enumerate(self.matrix, 1) if rr != row]


def moment_matrix(system: MeasureSystem, n: int) -> MomentMatrix:
    if n < 1:
        raise ValueError("moment matrix needs n >= 1")
    nu = system.multi_index(n)
    blocks = []
    for j, width in enumerate(nu, 1):
        blocks.append(tuple(tuple(system.moment(j, i + k) for k in range(width)) for i in range(n)))
    return MomentMatrix(n, nu, tuple(blocks))


@dataclass(frozen=True)
class NormalityReport:
    n: int
    is_normal: bool
    rank: int


def normality_check(system: MeasureSystem, n: int) -> NormalityReport:
    if n < 1:
        raise ValueError("normality is defined for n >= 1")
    rank = system.backend.rank(moment_matrix(system, n).matrix)
    return NormalityReport(n, rank == n, rank)


# ---------------------------------------------------------------------------
# shipped systems


def lebesgue(a=0, b=1) -> AnalyticMoments:
    return AnalyticMoments.make("lebesgue", a=a, b=b)


def power_weight(alpha) -> AnalyticMoments:
    return AnalyticMoments.make("power", alpha=alpha)


def monomial_family(r: int, backend=FLOAT64) -> MeasureSystem:
    """``x**(j-1) dx`` on [0, 1], j = 1..r.

    For r >= 2 the conditions of different measures overlap, so only the
    indices n <= r are normal.
    """
    return MeasureSystem(tuple(power_weight(j) for j in range(r)), get_backend(backend), f"monomial-{r}")


def sys_a(backend=FLOAT64) -> MeasureSystem:
    return MeasureSystem((lebesgue(), power_weight(1)), get_backend(backend), "sys-a")


def angelesco(r: int = 2, backend=FLOAT64) -> MeasureSystem:
    """Lebesgue measures on the touching intervals [-1, 0], [0, 1], [1, 2], ..."""
    return MeasureSystem(tuple(lebesgue(j - 1, j) for j in range(r)), get_backend(backend), f"angelesco-{r}")


def jacobi_pineiro(alphas: Sequence, backend=FLOAT64) -> MeasureSystem:
    """``x**alpha_j dx`` on [0, 1]; an AT system when no two exponents differ by an integer."""
    alphas = [to_fraction(a) for a in alphas]
    for i in range(len(alphas)):
        for k in range(i):
            if (alphas[i] - alphas[k]).denominator == 1:
                raise ConfigError("Jacobi-Pineiro exponents must not differ by integers")
    name = "jacobi-pineiro(" + ",".join(str(a) for a in alphas) + ")"
    return MeasureSystem(tuple(power_weight(a) for a in alphas), get_backend(backend), name)


def jacobi_pineiro_family(r: int, backend=FLOAT64) -> MeasureSystem:
    """Exponents 0, 1/r, ..., (r-1)/r."""
    base = jacobi_pineiro([Fraction(j, r) for j in range(r)], backend)
    return MeasureSystem(base.providers, base.backend, f"jacobi-pineiro-{r}")


SHIPPED_SYSTEMS = ("sys-a", "lebesgue", "monomial-2", "monomial-3", "monomial-4",
                   "angelesco-2", "angelesco-3", "angelesco-4",
                   "jacobi-pineiro-2", "jacobi-pineiro-3", "jacobi-pineiro-4")


def shipped_system(name: str, backend=FLOAT64) -> MeasureSystem:
    """Look up a shipped system by name, e.g. ``sys-a``, ``angelesco-3``, ``jacobi-pineiro-2``."""
    if name == "sys-a":
        return sys_a(backend)
    if name == "lebesgue":
        return MeasureSystem((lebesgue(),), get_backend(backend), "lebesgue")
    for prefix, make in (("monomial-", monomial_family), ("angelesco-", angelesco),
                         ("jacobi-pineiro-", jacobi_pineiro_family)):
        if name.startswith(prefix) and name[len(prefix):].isdigit():
            return make(int(name[len(prefix):]), backend)
    raise ConfigError(f"unknown shipped system {name!r}")


# ---------------------------------------------------------------------------
# JSON configuration


def _provider_from_config(spec: Any) -> MomentProvider:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"measure entry must be an object with a 'kind': {spec!r}")
    kind = spec["kind"]
    if kind == "analytic":
        if "name" not in spec:
            raise ConfigError("analytic measure needs a 'name'")
        params = spec.get("params", {}) or {}
        if not isinstance(params, dict):
            raise ConfigError("'params' must be an object")
        return AnalyticMoments.make(spec["name"], **params)
    if kind == "table":
        moments = spec.get("moments")
        if not isinstance(moments, list) or not moments:
            raise ConfigError("table measure needs a non-empty 'moments' list")
        return TableMoments(tuple(to_fraction(v) for v in moments))
    if kind == "discrete":
        points, masses = spec.get("points"), spec.get("masses")
        if not isinstance(points, list) or not isinstance(masses, list):
            raise ConfigError("discrete measure needs 'points' and 'masses' lists")
        return DiscreteMoments(tuple(to_fraction(v) for v in points), tuple(to_fraction(v) for v in masses))
    raise ConfigError(f"unknown measure kind {kind!r}")


def system_from_config(config: dict, backend=None) -> MeasureSystem:
    if not isinstance(config, dict):
        raise ConfigError("configuration must be a JSON object")
    if "system" in config:
        return shipped_system(config["system"], backend or config.get("backend", "float64"))
    measures = config.get("measures")
    if not isinstance(measures, list) or not measures:
        raise ConfigError("configuration needs a non-empty 'measures' list")
    r = config.get("r", len(measures))
    if not isinstance(r, int) or r != len(measures):
        raise ConfigError(f"'r' = {r!r} does not match {len(measures)} measures")
    providers = tuple(_provider_from_config(m) for m in measures)
    return MeasureSystem(providers, get_backend(backend or config.get("backend", "float64")),
                         str(config.get("name", "")))


def load_system(path, backend=None) -> MeasureSystem:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return system_from_config(config, backend)
