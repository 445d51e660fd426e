import itertools
import math
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellshuffle.errors import MissingSplitting, RankMismatch, UnpairableClass, UnsupportedQuiver
from ellshuffle.expr import Monomial, ThetaExpr, mono
from ellshuffle.quiver import (
    A1,
    H_INV,
    JORDAN,
    Chamber,
    DimData,
    FixedPoint,
    KClass,
    NonemptinessWarning,
    Quiver,
    Split,
    check_nonempty,
    class_frak_N,
    class_N_hat_j,
    enumerate_fixed_points,
    partition_tuple,
    partitions,
    polarization,
    quiver_from_json,
    quiver_to_json,
    restrict_class,
    sectors,
    shift_difference,
    solve_delta,
    split_attracting,
    subset,
    tangent,
    thom_class,
)

from frozen import JORDAN_COUNTS

K = KClass.parse


def test_fixed_points_a1():
    assert enumerate_fixed_points(A1, 1, 2) == [subset(1), subset(2)]
    assert enumerate_fixed_points(A1, 0, 3) == [subset()]
    assert len(enumerate_fixed_points(A1, 2, 4)) == 6


def test_fixed_points_jordan_v2_w2():
    got = enumerate_fixed_points(JORDAN, 2, 2)
    want = [
        partition_tuple([2], []),
        partition_tuple([1, 1], []),
        partition_tuple([1], [1]),
        partition_tuple([], [2]),
        partition_tuple([], [1, 1]),
    ]
    assert sorted(got, key=str) == sorted(want, key=str) and len(set(got)) == 5


def test_unsupported_quiver():
    with pytest.raises(UnsupportedQuiver):
        enumerate_fixed_points("A2", 1, 1)


def _brute_force_jordan(v, w):
    # all tuples of weakly decreasing lists with positive parts and total v
    def parts(n):
        return [p for k in range(n + 1) for p in itertools.product(range(1, n + 1), repeat=k) if sum(p) == n and list(p) == sorted(p, reverse=True)]

    return {lams for sizes in itertools.product(range(v + 1), repeat=w) if sum(sizes) == v for lams in itertools.product(*(parts(s) for s in sizes))}


@pytest.mark.parametrize("v", range(0, 5))
@pytest.mark.parametrize("w", range(1, 4))
def test_fixed_point_counts(v, w):
    assert len(enumerate_fixed_points(A1, v, w)) == (math.comb(w, v) if v <= w else 0)
    pts = enumerate_fixed_points(JORDAN, v, w)
    assert {f.data for f in pts} == _brute_force_jordan(v, w)
    assert len(pts) == len(set(pts))
    if (v, w) in JORDAN_COUNTS:
        assert len(pts) == JORDAN_COUNTS[(v, w)]


def test_partitions():
    assert list(partitions(4)) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]


def test_fixed_point_validation():
    with pytest.raises(ValueError):
        FixedPoint(A1, (2, 1))
    with pytest.raises(ValueError):
        partition_tuple([1, 2])


def test_kclass_canonical_merge():
    c = K("a1", "a1", "a2") - K("a2")
    assert c.multiplicity(mono("a1")) == 2 and c.multiplicity(mono("a2")) == 0
    assert c == KClass({mono("a1"): 2})
    assert (c - c).is_zero()


def test_restrict_tangent_tp1():
    q, d = Quiver.a1(), DimData((1,), (2,))
    half = polarization(q, d)
    assert restrict_class(half, subset(1)) == K("a2/a1")
    assert restrict_class(tangent(q, d), subset(1)) == K("a2/a1", "a1/(a2*h)")


def test_restrict_rank_mismatch():
    with pytest.raises(RankMismatch):
        restrict_class(K("t2/a1"), subset(1))


def test_restrict_v0():
    q, d = Quiver.a1(), DimData((0,), (3,))
    assert restrict_class(tangent(q, d), subset()).is_zero()


def test_split_attracting_examples():
    attr, fixed, rep = split_attracting(K("a2/a1", "a1/(a2*h)"), Chamber.identity(2))
    assert attr == K("a1/(a2*h)") and rep == K("a2/a1") and fixed.is_zero()
    assert split_attracting(K("1"), Chamber.identity(2))[1] == K("1")
    attr, _, _ = split_attracting(K("a1*b^3/a2"), Chamber.identity(2, instanton=True, b_sign=-1))
    assert attr == K("a1*b^3/a2")


def test_split_attracting_b_tie_break():
    ch = Chamber.identity(2, instanton=True, b_sign=1)
    attr, fixed, rep = split_attracting(K("b/h^(1/2)", "h/b"), ch)
    assert attr == K("b/h^(1/2)") and rep == K("h/b")
    # without the instanton flag b is invisible
    assert split_attracting(K("b"), Chamber.identity(2))[1] == K("b")


def test_chamber_is_bijection():
    with pytest.raises(ValueError):
        Chamber((1, 1))


def test_thom_class():
    assert thom_class(KClass()) == ThetaExpr.one()
    assert thom_class(K("a2/a1")) == ThetaExpr.atom("a2/a1")
    assert thom_class(K("x") - K("y")) == ThetaExpr.quotient(["x"], ["y"])


def test_class_N_hat_j():
    q = Quiver.a1()
    assert class_N_hat_j(q, DimData.scalar(1, 2, 1, 1)) == K("a2/t1")
    assert class_N_hat_j(q, DimData.scalar(0, 2, 0, 1)).is_zero()
    got = class_N_hat_j(Quiver.jordan(), DimData.scalar(2, 2, 1, 1))
    assert got == K("b*t2/(h^(1/2)*t1)", "t2/a1", "t2/(b*h^(1/2)*t1)", "a2/(h*t1)")


def test_missing_splitting():
    with pytest.raises(MissingSplitting):
        class_N_hat_j(Quiver.a1(), DimData((1,), (2,)))


def test_class_frak_N():
    q = Quiver.a1()
    frak = class_frak_N(q, DimData.scalar(2, 2, 1, 1))
    assert frak == K("t1/t2")
    assert thom_class(frak.dual()) * thom_class(frak.dual() * H_INV) == ThetaExpr.atom("t2/t1") * ThetaExpr.atom("t2/(t1*h)")
    assert class_frak_N(q, DimData.scalar(2, 3, 2, 2)).is_zero()
    assert class_frak_N(q, DimData.scalar(3, 4, 2, 2)) == K("t1/t3", "t2/t3")


def test_solve_delta_grassmannian():
    q = Quiver.a1()
    d = DimData.scalar(3, 5, 1, 3)
    sec = sectors(q, d)
    diff = shift_difference(q, d)
    delta, shifts = solve_delta(diff, {"z'": sec.t1[0], "z''": sec.t2[0]})
    hom_v2_w1 = KClass.hom(sec.V2(0), sec.W1(0))
    assert delta == hom_v2_w1 - class_frak_N(q, d)
    assert shifts == {"z'": 2, "z''": 3 - 1}


def test_solve_delta_instanton():
    q = Quiver.jordan()
    d = DimData.scalar(1, 3, 1, 1)
    sec = sectors(q, d)
    delta, shifts = solve_delta(shift_difference(q, d), {"z'": sec.t1[0], "z''": sec.t2[0]})
    assert delta == KClass.hom(sec.W2(0), sec.V1(0))
    assert shifts == {"z'": -2, "z''": 0}


def test_solve_delta_empty_and_unpairable():
    assert solve_delta(KClass()) == (KClass(), {})
    with pytest.raises(UnpairableClass):
        solve_delta(K("a1/t1"))


def test_quiver_json_round_trip():
    q = Quiver(((0, 1), (0, 0)))
    d = DimData((1, 2), (2, 1), Split((1, 1), (0, 1), (1, 1), (1, 0)))
    assert quiver_from_json(quiver_to_json(q, d)) == (q, d)
    with pytest.raises(ValueError):
        DimData((1,), (2,), Split((1,), (1,), (1,), (1,)))


def test_nonemptiness_warning():
    q = Quiver.a1()
    with pytest.warns(NonemptinessWarning):
        check_nonempty(q, DimData.scalar(2, 2, 2, 1))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        check_nonempty(q, DimData.scalar(2, 3, 1, 2))


def test_multi_vertex_classes_are_pairable():
    q = Quiver(((0, 1), (0, 0)))
    d = DimData((1, 1), (1, 1), Split((1, 0), (0, 1), (1, 0), (0, 1)))
    diff = shift_difference(q, d)
    delta, _ = solve_delta(diff)
    assert delta - delta.dual() * H_INV == diff


# ---- properties ----------------------------------------------------------
@st.composite
def splittings(draw):
    kind = draw(st.sampled_from([A1, JORDAN]))
    w1 = draw(st.integers(1, 3))
    w2 = draw(st.integers(1, 3))
    v1 = draw(st.integers(0, w1 if kind == A1 else 3))
    v2 = draw(st.integers(0, w2 if kind == A1 else 3))
    q = Quiver.a1() if kind == A1 else Quiver.jordan()
    return q, DimData.scalar(v1 + v2, w1 + w2, v1, w1)


@settings(max_examples=60)
@given(splittings())
def test_solve_delta_reexpansion(data):
    q, d = data
    diff = shift_difference(q, d)
    delta, shifts = solve_delta(diff, {"z'": sectors(q, d).t1[0], "z''": sectors(q, d).t2[0]})
    assert delta - delta.dual() * H_INV == diff
    s = d.split
    if q.kind == A1:
        assert (shifts["z'"], shifts["z''"]) == (s.v2[0] if s.v1[0] else 0, s.w1[0] - s.v1[0] if s.v2[0] else 0)
    else:
        assert (shifts["z'"], shifts["z''"]) == (-s.w2[0] if s.v1[0] else 0, 0)


def _pair(c: KClass) -> KClass:
    return KClass({(m * Monomial({"h": 2})).inverse(): k for m, k in c.items()})


@settings(max_examples=40)
@given(st.sampled_from([A1, JORDAN]), st.integers(0, 3), st.integers(1, 3), st.permutations([1, 2, 3]), st.sampled_from([1, -1]))
def test_reversing_chamber_swaps_attracting_and_repelling(kind, v, w, perm, b_sign):
    if kind == A1 and v > w:
        return
    q = Quiver.a1() if kind == A1 else Quiver.jordan()
    perm = tuple(x for x in perm if x <= w)
    ch = Chamber(perm, instanton=kind == JORDAN, b_sign=b_sign)
    for f in enumerate_fixed_points(kind, v, w):
        tf = restrict_class(tangent(q, DimData((v,), (w,))), f).nontrivial()
        attr, _, rep = split_attracting(tf, ch)
        attr_r, _, rep_r = split_attracting(tf, ch.reversed())
        assert attr == rep_r and rep == attr_r
        assert _pair(attr) == rep
