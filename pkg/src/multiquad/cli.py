"""``multiquad`` command line front end.

Exit status: 0 success, 1 input error, 2 verification failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import export
from .backend import to_fraction
from .cdk import SAMPLE_LADDER, big_b, cd_context, cd_sides, sample_points
from .errors import ConfigError, InputError, MultiquadError, NotNormal, OutOfTable, VerificationError
from .measures import (DiscreteMoments, MeasureSystem, TableMoments, load_system, normality_check,
                       shipped_system)
from .mop import eval_recurrence, type1_initials, type2_sequence
from .quadrature import (TAU_W, _float_initials, build_rule, exact_table, round_trip)
from .spectral import TAU_EIG, biorthogonality, build_hessenberg, characteristic_polynomial, eigen_pair

log = logging.getLogger("multiquad")

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2
REFERENCE_SIZE = 40
TAU_CD = 1e-9
TAU_BIORTH = 1e-10
CHARPOLY_MAX = 12


@dataclass
class RunConfig:
    command: str
    input: str
    n: int = 2
    backend: str | None = None
    output: str | None = None
    format: str = "json"
    tol_eig: float = TAU_EIG
    tol_w: float = TAU_W
    ladder: tuple = SAMPLE_LADDER
    integrand: str = "exp"
    verbosity: int = logging.WARNING
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("-n must be >= 1")
        if not (self.tol_eig > 0 and self.tol_w > 0):
            raise ConfigError("tolerances must be positive")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _ladder(text: str) -> tuple:
    try:
        points = tuple(str(to_fraction(p.strip())) for p in text.split(",") if p.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad ladder point: {exc}") from None
    if len(set(points)) != len(points) or not points:
        raise argparse.ArgumentTypeError("ladder points must be distinct and non-empty")
    return points


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multiquad", description="Multiple Gaussian quadrature for systems of measures.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-i", "--input", required=True,
                        help="measure-system JSON file, or the name of a shipped system")
    common.add_argument("-n", type=int, default=2, help="rule size (number of nodes)")
    common.add_argument("--backend", choices=("rational", "float64"), help="override the config backend")
    common.add_argument("-o", "--output", help="write the artifact here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol-eig", type=float, default=TAU_EIG, help="eigen-residual tolerance")
    common.add_argument("--tol-w", type=float, default=TAU_W, help="weight-route tolerance")
    common.add_argument("--seed-ladder", type=_ladder, default=SAMPLE_LADDER,
                        help="comma-separated rational sample points for identity checks")
    for name, text in (("rule", "build a rule and write it"),
                       ("verify", "run the invariant checks and print a pass/fail table"),
                       ("moments", "dump the moment table (-n moments per measure)")):
        sub.add_parser(name, parents=[common], help=text)
    cmp = sub.add_parser("compare", parents=[common], help="shared-node rule against separate Gauss rules")
    cmp.add_argument("--integrand", default="exp", help="poly:K, exp or runge (1/(1+x^2))")
    return parser


def _verbosity() -> int:
    raw = os.environ.get("MULTIQUAD_LOG", "").strip()
    if not raw:
        return logging.WARNING
    if raw.isdigit():
        return int(raw)
    level = logging.getLevelName(raw.upper())
    return level if isinstance(level, int) else logging.WARNING


def _system(cfg: RunConfig) -> MeasureSystem:
    path = Path(cfg.input)
    if not path.exists():
        try:
            return shipped_system(cfg.input, cfg.backend or "float64")
        except ConfigError:
            raise ConfigError(f"cannot read {cfg.input}: no such file or shipped system") from None
    return load_system(path, cfg.backend)


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- rule / moments -------------------------------------------------------------

def cmd_rule(cfg: RunConfig) -> int:
    system = _system(cfg)
    rule = build_rule(system, cfg.n, cfg.tol_eig, cfg.tol_w)
    text = export.rule_csv(rule) if cfg.format == "csv" else export.rule_json(rule, system)
    _emit(cfg, text)
    cert = rule.certificate
    if cert is not None and not cert.guaranteed_ok:
        log.error("rule misses its guaranteed vector order %s", cert.guaranteed)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_moments(cfg: RunConfig) -> int:
    system = _system(cfg)
    if cfg.format == "csv":
        _emit(cfg, export.moments_csv(system, cfg.n))
    else:
        _emit(cfg, export.dumps(export.moments_dict(system, cfg.n)))
    return EXIT_OK


# --- verify ---------------------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _rel(a, b) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else float(abs(a - b) / scale)


def run_checks(system: MeasureSystem, n: int, ladder=SAMPLE_LADDER, tol_eig: float = TAU_EIG,
               tol_w: float = TAU_W) -> list[Check]:
    """The invariant suite behind ``multiquad verify``; each entry is one table row."""
    exact = system.backend.exact
    ex = system.exact()
    checks: list[Check] = []
    for k in range(1, n + 1):
        rep = normality_check(ex, k)
        if not rep.is_normal:
            raise NotNormal(k, rep.rank)
    checks.append(Check("normality", True, f"nu_1 .. nu_{n} normal"))

    table = exact_table(ex, n)
    initials = type1_initials(ex)
    tab = table if exact else table.to_float()
    ini = initials if exact else _float_initials(initials)
    ctx = cd_context(tab, ini, n)
    pts = sample_points(min(2 * n + 1, len(ladder)), ladder)
    if not exact:
        pts = [float(p) for p in pts]

    worst = 0.0
    for x in pts:
        P = eval_recurrence(tab, n, x)[0][n]
        worst = max(worst, _rel(big_b(ctx, x), ctx.gamma * P))
    checks.append(Check("B_n = gamma_n P_n", worst == 0 if exact else worst <= TAU_CD,
                        f"{len(pts)} points, gamma_n = {ctx.gamma}, worst rel {worst:.3e}"))

    worst = 0.0
    for i in range(1, min(system.r, n) + 1):
        for a in pts[:5]:
            for b in pts[:5]:
                lhs, rhs = cd_sides(ctx, i, a, b)
                worst = max(worst, float(abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1)))
    checks.append(Check("Christoffel-Darboux", worst == 0 if exact else worst <= TAU_CD,
                        f"i = 1..{min(system.r, n)}, worst rel {worst:.3e}"))

    if n <= CHARPOLY_MAX:
        L = build_hessenberg(table, n)
        same = characteristic_polynomial(L) == type2_sequence(table, n)[n]
        checks.append(Check("det(xI - L_n) = P_n", same, f"exact, n = {n}"))

    rule = build_rule(system, n, tol_eig, tol_w)
    checks.append(Check("weight routes agree", True, f"gap {rule.diagnostics.get('route_gap', 0.0):.3e}"))

    ft = table.to_float()
    fctx = cd_context(ft, _float_initials(initials), n)
    pairs = [eigen_pair(fctx, ft, complex(x) if not rule.real else float(x), tol_eig) for x in rule.nodes]
    bio = biorthogonality(pairs)
    checks.append(Check("left/right biorthogonality", bio <= TAU_BIORTH, f"worst {bio:.3e}"))

    sums = rule.weight_sums
    m0 = [ex.moment(j, 0) for j in range(1, system.r + 1)]
    worst = max(_rel(complex(s), complex(m)) if not exact else _rel(s, m) for s, m in zip(sums, m0))
    checks.append(Check("weight sums = m_0", worst == 0 if exact else worst <= tol_w, f"worst rel {worst:.3e}"))

    cert = rule.certificate
    checks.append(Check("guaranteed vector order", cert.guaranteed_ok,
                        f"guaranteed {cert.guaranteed}, observed {cert.observed}"))
    for j, (g, o, ok) in enumerate(zip(cert.guaranteed, cert.observed, cert.passed), 1):
        fails = [d for d, p in enumerate(ok) if not p]
        first = f"first failure at degree {fails[0]}" if fails else "no failure in the scan"
        note = ", beyond guarantee" if o > g else ""
        checks.append(Check(f"  degree scan j={j}", True, f"exact to degree {o}{note}; {first}"))
    gap = cert.witness_gap
    if gap is not None:
        ok = gap == 1 if exact else abs(float(gap) - 1.0) <= 1e-6
        checks.append(Check("order witness gap", ok, f"gap {gap}"))
    else:
        checks.append(Check("order witness gap", True, "skipped: nu_{n+1} not normal"))

    if rule.real:
        try:
            diff = round_trip(rule, table.truncated(n))
            checks.append(Check("discrete round trip", diff == 0 if exact else diff <= 1e-9,
                                f"rows 0..{n - 1}, worst {diff:.3e}"))
        except MultiquadError as exc:
            checks.append(Check("discrete round trip", False, str(exc)))
    return checks


def cmd_verify(cfg: RunConfig) -> int:
    system = _system(cfg)
    checks = run_checks(system, cfg.n, cfg.ladder, cfg.tol_eig, cfg.tol_w)
    width = max(len(c.name) for c in checks)
    lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name.ljust(width)}  {c.detail}" for c in checks]
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


# --- compare --------------------------------------------------------------------

def integrand(spec: str):
    """Built-in test functions: ``poly:K`` (x^K), ``exp``, ``runge`` (1/(1+x^2))."""
    if spec.startswith("poly:"):
        try:
            k = int(spec[5:])
        except ValueError:
            raise ConfigError(f"bad polynomial degree in {spec!r}") from None
        if k < 0:
            raise ConfigError("polynomial degree must be >= 0")
        return lambda x: x ** k
    if spec == "exp":
        return math.exp
    if spec == "runge":
        return lambda x: 1.0 / (1.0 + x * x)
    raise ConfigError(f"unknown integrand {spec!r}; use poly:K, exp or runge")


def _single(system: MeasureSystem, j: int) -> MeasureSystem:
    return MeasureSystem((system.providers[j - 1],), system.backend, f"{system.name}[{j}]")


def _reference_size(provider) -> int:
    if isinstance(provider, DiscreteMoments):
        return min(REFERENCE_SIZE, len(set(provider.points)))
    if isinstance(provider, TableMoments):
        return min(REFERENCE_SIZE, len(provider.moments) // 2)
    return REFERENCE_SIZE


def _apply(rule, f, j: int) -> float:
    return math.fsum(float(w) * f(float(x)) for x, w in zip(rule.nodes, rule.weights[j - 1]))


def compare(system: MeasureSystem, n: int, f) -> list[dict]:
    """Per measure: shared-node error against the separate Gauss rule of the same size."""
    system = system.with_backend("float64")
    shared = build_rule(system, n, certify=False)
    if not shared.real:
        raise VerificationError("compare needs a rule with real nodes")
    rows = []
    for j in range(1, system.r + 1):
        single = _single(system, j)
        ref_rule = build_rule(single, _reference_size(single.providers[0]), certify=False)
        ref = _apply(ref_rule, f, 1)
        sep = build_rule(single, n, certify=False)
        rows.append({"measure": j, "reference": ref, "reference_n": ref_rule.n,
                     "shared": _apply(shared, f, j), "separate": _apply(sep, f, 1)})
    for row in rows:
        row["shared_error"] = abs(row["shared"] - row["reference"])
        row["separate_error"] = abs(row["separate"] - row["reference"])
    return rows


def cmd_compare(cfg: RunConfig) -> int:
    system = _system(cfg)
    f = integrand(cfg.integrand)
    rows = compare(system, cfg.n, f)
    r = system.r
    if cfg.format == "json":
        doc = {"n": cfg.n, "r": r, "integrand": cfg.integrand,
               "evaluations": {"shared": cfg.n, "separate": r * cfg.n}, "measures": rows}
        _emit(cfg, export.dumps(export.plain(doc)))
        return EXIT_OK
    head = f"integrand {cfg.integrand}, n = {cfg.n}: function evaluations shared {cfg.n}, separate {r * cfg.n}\n"
    lines = ["measure,reference_n,reference,shared_error,separate_error"]
    for row in rows:
        lines.append(",".join([str(row["measure"]), str(row["reference_n"])] +
                              [export._float_token(row[k]) for k in ("reference", "shared_error", "separate_error")]))
    _emit(cfg, head + "\n".join(lines) + "\n")
    return EXIT_OK


COMMANDS = {"rule": cmd_rule, "verify": cmd_verify, "compare": cmd_compare, "moments": cmd_moments}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=_verbosity(), format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig(args.command, args.input, args.n, args.backend, args.output, args.format,
                        args.tol_eig, args.tol_w, args.seed_ladder, getattr(args, "integrand", "exp"),
                        _verbosity())
        return COMMANDS[cfg.command](cfg)
    except (InputError, OutOfTable, ValueError) as exc:
        print(f"multiquad: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"multiquad: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VerificationError as exc:
        print(f"multiquad: verification failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
