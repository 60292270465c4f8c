"""Serialisation of rules, certificates and moment tables.

Output is byte-stable: keys are emitted in a fixed order and every float is
printed with 17 significant digits.  Rationals are written as "p/q" strings.
"""
from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

from .backend import is_rational
from .measures import MeasureSystem
from .quadrature import ExactnessCertificate, QuadratureRule


def _float_token(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x!r}")
    if x == 0:
        return "0.0"
    text = format(x, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def rational_text(q) -> str:
    q = Fraction(int(q.numerator), int(q.denominator))
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def plain(value):
    """Map library values onto JSON-ready Python values (floats stay floats)."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        return value
    if is_rational(value):
        return rational_text(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if hasattr(value, "__float__"):
        return float(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def dumps(value, indent: int = 2) -> str:
    """JSON text with fixed float formatting; ``value`` must already be plain."""
    out: list[str] = []

    def emit(v, depth: int) -> None:
        pad = "\n" + " " * (indent * (depth + 1))
        end = "\n" + " " * (indent * depth)
        if isinstance(v, float):
            out.append(_float_token(v))
        elif isinstance(v, dict):
            if not v:
                out.append("{}")
                return
            out.append("{")
            for i, (k, item) in enumerate(v.items()):
                out.append(("," if i else "") + pad + json.dumps(k) + ": ")
                emit(item, depth + 1)
            out.append(end + "}")
        elif isinstance(v, list):
            if not v:
                out.append("[]")
            elif all(not isinstance(item, (dict, list)) for item in v):
                out.append("[")
                for i, item in enumerate(v):
                    out.append(", " if i else "")
                    emit(item, depth + 1)
                out.append("]")
            else:
                out.append("[")
                for i, item in enumerate(v):
                    out.append(("," if i else "") + pad)
                    emit(item, depth + 1)
                out.append(end + "]")
        else:
            out.append(json.dumps(v))

    emit(value, 0)
    return "".join(out) + "\n"


def certificate_dict(cert: ExactnessCertificate) -> dict:
    residuals = {str(j): list(res) for j, res in enumerate(cert.residuals, 1)}
    out = {
        "vector_order": list(cert.observed),
        "guaranteed_order": list(cert.guaranteed),
        "guaranteed_ok": cert.guaranteed_ok,
        "beyond_guaranteed": list(cert.beyond),
        "residuals": residuals,
        "witness_gap": cert.witness_gap,
    }
    return plain(out)


def rule_dict(rule: QuadratureRule, system: MeasureSystem | None = None) -> dict:
    out = {"n": rule.n, "r": rule.r}
    if system is not None and system.name:
        out["system"] = system.name
    out["backend"] = "rational" if rule.exact else "float64"
    out["real"] = rule.real
    out["nodes"] = [complex(x) if not rule.real else float(x) for x in rule.nodes]
    out["weights"] = [[complex(w) if not rule.real else float(w) for w in col] for col in rule.weights]
    if rule.exact:
        out["node_polynomial"] = [Fraction(c) for c in rule.node_polynomial.coeffs]
        out["factors"] = [{
            "minimal_polynomial": list(c.field.minpoly),
            "roots": list(c.roots),
            "weights": [list(w.coeffs) for w in c.weights],
            "k": c.k,
            "i": c.i,
        } for c in rule.classes]
    if rule.certificate is not None:
        out["certificate"] = certificate_dict(rule.certificate)
    return plain(out)


def rule_json(rule: QuadratureRule, system: MeasureSystem | None = None) -> str:
    return dumps(rule_dict(rule, system))


def rule_csv(rule: QuadratureRule) -> str:
    """One row per node: ``node, w1, ..., wr`` (complex values as ``a+bj``)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["node"] + [f"w{j}" for j in range(1, rule.r + 1)])

    def cell(v) -> str:
        if rule.real:
            return _float_token(float(v.real if isinstance(v, complex) else v))
        v = complex(v)
        return f"{_float_token(v.real)}{'+' if v.imag >= 0 else '-'}{_float_token(abs(v.imag))}j"

    for idx, x in enumerate(rule.nodes):
        writer.writerow([cell(x)] + [cell(col[idx]) for col in rule.weights])
    return buf.getvalue()


def moments_dict(system: MeasureSystem, count: int) -> dict:
    ex = system.exact()
    rows = [[ex.moment(j, l) for l in range(count)] for j in range(1, system.r + 1)]
    out = {"r": system.r, "count": count, "moments": rows}
    if not system.backend.exact:
        out["moments"] = [[float(v) for v in row] for row in rows]
    return plain(out)


def moments_csv(system: MeasureSystem, count: int) -> str:
    data = moments_dict(system, count)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["l"] + [f"m{j}" for j in range(1, system.r + 1)])
    for l in range(count):
        row = [row[l] for row in data["moments"]]
        writer.writerow([l] + [_float_token(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()
