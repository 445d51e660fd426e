import random

import pytest

from ellshuffle.errors import InvalidFixedPoint, InvalidSplitting, ProviderLimitExceeded, UnsupportedChamber
from ellshuffle.expr import Monomial, ThetaExpr, evaluate, mono, substitute
from ellshuffle.quiver import A1, JORDAN, Chamber, DimData, Quiver, Split, partition_tuple, subset
from ellshuffle.sampling import sample_assignment
from ellshuffle.shuffle import (
    HilbProvider,
    StabTable,
    build_table,
    generic_shuffle_stab,
    grassmannian_stab,
    hilb1_leaf,
    instanton_stab,
    shuffle_sum,
)
from ellshuffle.theta import EllipticParams

from frozen import HILB1_LEAF_JSON, TP1_NORTH_JSON, TP1_SOUTH_JSON

P = EllipticParams(0.1, 60)


def test_shuffle_sum_trivial():
    e = ThetaExpr.quotient(["t1*t2/a1"], ["z"])
    assert shuffle_sum(e, 2, 0) == e


def test_shuffle_sum_two_roots():
    e = ThetaExpr.atom("t1/a1") * ThetaExpr.atom("t2/a2")
    assert shuffle_sum(e, 1, 1) == e + ThetaExpr.atom("t2/a1") * ThetaExpr.atom("t1/a2")


def test_shuffle_sum_symmetrizes():
    # symmetric in {t1, t2} and trivially in {t3}
    e = ThetaExpr.quotient(["t1*t2/a1", "t3/a2"], ["t1*t2*z"])
    s = shuffle_sum(e, 2, 1)
    assert len(s.terms) == 3
    rng = random.Random(1)
    asn = sample_assignment(s.variables(), rng, P)
    base = evaluate(s, asn, P)
    for perm in [("t2", "t1", "t3"), ("t3", "t2", "t1"), ("t2", "t3", "t1")]:
        moved = dict(asn)
        for src, dst in zip(("t1", "t2", "t3"), perm):
            moved[dst] = asn[src]
        assert abs(evaluate(s, moved, P) - base) <= 1e-12 * abs(base)


def test_tp1_north_and_south():
    assert grassmannian_stab(1, 2, subset(1)) == ThetaExpr.from_json(TP1_NORTH_JSON)
    assert grassmannian_stab(1, 2, subset(2)) == ThetaExpr.from_json(TP1_SOUTH_JSON)


def test_v0_is_one():
    for w in range(1, 5):
        assert grassmannian_stab(0, w, subset()) == ThetaExpr.one()
        assert instanton_stab(0, w, partition_tuple(*[[]] * w)) == ThetaExpr.one()


def test_invalid_fixed_point():
    with pytest.raises(InvalidFixedPoint):
        grassmannian_stab(1, 2, subset(3))
    with pytest.raises(InvalidFixedPoint):
        grassmannian_stab(2, 2, subset(1))


def test_invalid_splitting():
    with pytest.raises(InvalidSplitting):
        grassmannian_stab(1, 3, subset(1), splitting=[(2, 2)])
    with pytest.raises(InvalidSplitting):
        grassmannian_stab(1, 3, subset(1), splitting=[(3, 0)])


def test_chamber_relabelling_can_be_disabled():
    ch = Chamber((2, 1))
    with pytest.raises(UnsupportedChamber):
        grassmannian_stab(1, 2, subset(1), ch, relabel=False)
    # a2 >> a1: the envelope of {2} is the north-pole formula with a1, a2 swapped
    got = grassmannian_stab(1, 2, subset(2), ch)
    assert got == substitute(ThetaExpr.from_json(TP1_NORTH_JSON), {"a1": mono("a2"), "a2": mono("a1")})


def test_instanton_examples():
    leaf = ThetaExpr.from_json(HILB1_LEAF_JSON[1])
    assert hilb1_leaf(1) == leaf
    got = instanton_stab(1, 2, partition_tuple([1], []))
    want = ThetaExpr.atom("a2/(h*t1)") * substitute(leaf, {"z": mono("z/h")})
    assert got == want
    got = instanton_stab(1, 2, partition_tuple([], [1]))
    want = ThetaExpr.atom("t1/a1") * substitute(leaf, {"a1": mono("a2")})
    assert got == want


def test_instanton_provider_limit():
    with pytest.raises(ProviderLimitExceeded):
        instanton_stab(2, 2, partition_tuple([2], []))
    with pytest.raises(ProviderLimitExceeded):
        HilbProvider()((1, 1))


def test_generic_degenerate_split_returns_stab1():
    q = Quiver.a1()
    d = DimData((1,), (2,), Split((1,), (0,), (2,), (0,)))
    e = grassmannian_stab(1, 2, subset(1))
    assert generic_shuffle_stab(q, d, e, ThetaExpr.one()) == e


def test_generic_accepts_primed_kahler_names():
    q = Quiver.a1()
    d = DimData.scalar(1, 2, 0, 1)
    stab2 = ThetaExpr.quotient(["t1*z''/a2"], ["z''"])
    got = generic_shuffle_stab(q, d, ThetaExpr.one(), stab2)
    assert got == ThetaExpr.from_json(TP1_SOUTH_JSON)


@pytest.mark.parametrize("v, w", [(v, w) for w in range(1, 4) for v in range(0, w + 1)])
def test_generic_engine_matches_printed_formula(v, w):
    a = build_table(A1, v, w)
    b = build_table(A1, v, w, engine="generic")
    for f in a.entries:
        assert a.entries[f].same_terms(b.entries[f])


def test_generic_engine_matches_instanton_formula():
    for v, w in [(1, 2), (1, 3)]:
        a = build_table(JORDAN, v, w)
        b = build_table(JORDAN, v, w, engine="generic")
        for f in a.entries:
            assert a.entries[f].same_terms(b.entries[f])
    f = partition_tuple([1], [1])
    assert instanton_stab(2, 2, f).same_terms(instanton_stab(2, 2, f, engine="generic"))


def test_multi_vertex_generic_assembly():
    # A2 quiver 1 -> 2 with framing at both vertices, split by vertex
    q = Quiver(((0, 1), (0, 0)))
    d = DimData((1, 1), (1, 1), Split((1, 0), (0, 1), (1, 0), (0, 1)))
    stab1 = ThetaExpr.quotient(["t1_1*z1/a1"], ["z1"])
    stab2 = ThetaExpr.quotient(["t2_1*z2/a2"], ["z2"])
    got = generic_shuffle_stab(q, d, stab1, stab2)
    # one edge, no dual edge: the only interaction is theta(Hom(V1, V2)) and no z shift
    want = stab1 * stab2 * ThetaExpr.atom("t2_1/t1_1")
    assert got.same_terms(want)


def test_table_shape():
    t = build_table("grassmannian", 1, 2)
    assert [str(f) for f in t.entries] == ["{1}", "{2}"]
    assert t.splitting == [(1, 1)]
    assert list(build_table("grassmannian", 0, 4).entries.values()) == [ThetaExpr.one()]
    t = build_table("grassmannian", 2, 4)
    assert len(t.entries) == 6
    assert all(len(e.terms) <= 6 for e in t.entries.values())


def test_table_records_splitting_sequence():
    t = build_table("grassmannian", 2, 4, splitting=[(2, 2)])
    assert t.splitting == [(2, 2), (1, 1), (1, 1)]
    t = build_table("grassmannian", 2, 4, strategy="first")
    assert t.splitting == [(1, 3), (1, 2), (1, 1)]


def test_table_json_round_trip():
    for t in (build_table("grassmannian", 2, 3), build_table("instanton", 1, 2, b_sign=-1)):
        back = StabTable.from_json(t.to_json())
        assert back.entries == t.entries and back.chamber == t.chamber and back.splitting == t.splitting


def test_symmetry_check_detects_asymmetry():
    t = build_table("grassmannian", 2, 3)
    f = next(iter(t.entries))
    t.entries[f] = t.entries[f] * ThetaExpr.atom("t1/a1")
    with pytest.raises(ValueError):
        t.check_symmetry(P)
