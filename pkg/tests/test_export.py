import csv
import io
import json
from fractions import Fraction

import pytest

from multiquad import export
from multiquad.backend import RATIONAL, fast_rational
from multiquad.measures import shipped_system, sys_a
from multiquad.quadrature import build_rule

F = Fraction


def test_float_tokens_round_trip_17_digits():
    for x in (0.1, 1 / 3, 2.0 ** -60, 1e300, -7.0, 0.0):
        tok = export._float_token(x)
        assert float(tok) == x
    assert export._float_token(1 / 3) == "0.33333333333333331"
    assert export._float_token(3.0) == "3.0"
    with pytest.raises(ValueError):
        export._float_token(float("nan"))


def test_plain_values():
    assert export.plain(F(3, 4)) == "3/4"
    assert export.plain(fast_rational(F(-1, 6))) == "-1/6"
    assert export.plain(F(5)) == "5"
    assert export.plain(7) == 7 and export.plain(True) is True
    assert export.plain(1 + 2j) == [1.0, 2.0]
    assert export.plain({1: (F(1, 2), None)}) == {"1": ["1/2", None]}
    with pytest.raises(TypeError):
        export.plain(object())


def test_dumps_is_valid_json_with_fixed_layout():
    doc = {"b": [1, 0.5, "x"], "a": {"nested": [[1.0, 2.0], []]}, "e": {}}
    text = export.dumps(doc)
    assert json.loads(text) == doc
    assert text.index('"b"') < text.index('"a"')  # insertion order, not sorted
    assert text.endswith("\n")


def test_rule_json_is_byte_identical_across_runs():
    a = export.rule_json(build_rule(shipped_system("angelesco-3"), 9), shipped_system("angelesco-3"))
    b = export.rule_json(build_rule(shipped_system("angelesco-3"), 9), shipped_system("angelesco-3"))
    assert a == b
    doc = json.loads(a)
    assert doc["n"] == 9 and doc["r"] == 3 and len(doc["weights"]) == 3
    assert doc["certificate"]["guaranteed_ok"] is True


def test_rational_rule_json():
    s = sys_a(RATIONAL)
    doc = json.loads(export.rule_json(build_rule(s, 2), s))
    assert doc["backend"] == "rational"
    assert doc["node_polynomial"] == ["1/6", "-1", "1"]
    assert doc["nodes"] == pytest.approx([0.21132486540518713, 0.7886751345948129], abs=1e-15)
    fac = doc["factors"][0]
    assert fac["minimal_polynomial"] == ["1/6", "-1", "1"]
    assert doc["certificate"]["vector_order"] == [3, 2]


def test_rule_csv():
    rule = build_rule(shipped_system("angelesco-2"), 4)
    rows = list(csv.reader(io.StringIO(export.rule_csv(rule))))
    assert rows[0] == ["node", "w1", "w2"]
    assert [float(v) for v in rows[1]] == [rule.nodes[0], rule.weights[0][0], rule.weights[1][0]]
    assert len(rows) == 5


def test_moments_outputs():
    d = export.moments_dict(sys_a(RATIONAL), 3)
    assert d["moments"] == [["1", "1/2", "1/3"], ["1/2", "1/3", "1/4"]]
    f = export.moments_dict(sys_a(), 2)
    assert f["moments"] == [[1.0, 0.5], [0.5, 1 / 3]]
    text = export.moments_csv(sys_a(RATIONAL), 2)
    assert text.splitlines() == ["l,m1,m2", "0,1,1/2", "1,1/2,1/3"]
