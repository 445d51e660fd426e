import json

import pytest

from ellshuffle.errors import InconsistentPattern
from ellshuffle.expr import Term, ThetaExpr
from ellshuffle.quiver import A1, Chamber, FixedPoint
from ellshuffle.shuffle import StabTable, build_table
from ellshuffle.theta import EllipticParams
from ellshuffle.verify import (
    check_automorphy,
    check_diagonal,
    check_splitting_independence,
    check_support,
    run_checks,
)

P = EllipticParams(0.1, 60)


def test_tp1_passes_everything():
    t = build_table("grassmannian", 1, 2)
    reports = run_checks(t, p=P)
    assert [r.check for r in reports] == ["diagonal", "support", "automorphy", "splitting"]
    assert all(r.passed for r in reports), [r.to_json() for r in reports]
    aut = reports[2]
    assert aut.details["north_pole_symbolic_residual"] < 1e-9


def test_point_variety():
    t = build_table("grassmannian", 0, 3)
    assert all(r.passed for r in run_checks(t, p=P))


def test_gr13_pattern_is_a_chain():
    res = check_support(build_table("grassmannian", 1, 3), P)
    assert res.order_consistent
    assert res.matrix == [[True, False, False], [True, True, False], [True, True, True]]
    assert res.report.details["order"] == ["{1}", "{2}", "{3}"]


def test_gr24_pattern_is_partial():
    res = check_support(build_table("grassmannian", 2, 4), P)
    assert res.order_consistent
    idx = {lab: i for i, lab in enumerate(res.labels)}
    a, b = idx["{1,4}"], idx["{2,3}"]
    assert not res.matrix[a][b] and not res.matrix[b][a]


def test_reversed_chamber_reverses_pattern():
    t = build_table("grassmannian", 1, 3, Chamber((3, 2, 1)))
    res = check_support(t, P)
    assert res.order_consistent
    assert res.report.details["order"] == ["{3}", "{2}", "{1}"]


def test_reports_are_deterministic():
    t = build_table("grassmannian", 2, 3)
    one = [r.to_json() for r in run_checks(t, p=P, seed=7)]
    two = [r.to_json() for r in run_checks(t, p=P, seed=7)]
    assert json.dumps(one, sort_keys=True) == json.dumps(two, sort_keys=True)
    assert one[0]["seed"] == 7 and one[0]["q"] == [0.1, 0.0]


def _corrupt(table: StabTable, f: FixedPoint, var: str, delta: int) -> StabTable:
    e = table.entries[f]
    t = e.terms[0]
    num = list(t.num)
    m = num[0]
    num[0] = m * type(m)({var: delta})
    out = StabTable.from_json(table.to_json())
    out.entries[f] = ThetaExpr([Term.make(t.coef, num, t.den)] + list(e.terms[1:]))
    return out


def test_corruption_is_detected():
    t = build_table("grassmannian", 1, 3)
    f = FixedPoint(A1, (2,))
    bad = _corrupt(t, f, "a3", 2)
    assert not (check_diagonal(bad, P).passed and check_automorphy(bad, p=P).passed)


def test_strict_support_raises():
    t = build_table("grassmannian", 1, 2)
    bad = StabTable.from_json(t.to_json())
    # make Stab_{1} nonzero at {2}, so {1} and {2} see each other
    bad.entries[FixedPoint(A1, (1,))] = ThetaExpr.quotient(["t1*z/a1"], ["z"])
    res = check_support(bad, P)
    assert not res.report.passed
    with pytest.raises(InconsistentPattern):
        check_support(bad, P, strict=True)


def test_splitting_independence_sequences():
    rep = check_splitting_independence(A1, 2, 4, sequences=[[(3, 1)], [(2, 2)], [(1, 3)]], p=P)
    assert rep.passed
    assert len(rep.details["sequences"]) == 3
    assert rep.samples == 20


def test_instanton_table_checks():
    for sign in (1, -1):
        t = build_table("instanton", 1, 2, b_sign=sign)
        reports = run_checks(t, ["diagonal", "support", "automorphy"], P)
        assert all(r.passed for r in reports), sign


def test_unknown_check():
    with pytest.raises(ValueError):
        run_checks(build_table("grassmannian", 1, 2), ["bogus"], P)
