import pytest

from ellshuffle.errors import NoCandidate, RankExceedsOne
from ellshuffle.expr import TRIVIAL_AUTOMORPHY, Automorphy, Monomial, ThetaExpr, evaluate, mono, substitute
from ellshuffle.oracle import SectionSpec, derive_automorphy_spec, model_section, solve_rank1
from ellshuffle.quiver import A1, JORDAN, Chamber
from ellshuffle.sampling import sample_assignment
from ellshuffle.theta import EllipticParams

from frozen import A1_LEAF_JSON, HILB1_LEAF_JSON

P = EllipticParams(0.1, 60)


def test_a1_leaf_is_exact():
    leaf = solve_rank1(derive_automorphy_spec(A1), P)
    assert leaf == ThetaExpr.from_json(A1_LEAF_JSON)
    assert leaf == ThetaExpr.quotient(["t1*z/a1"], ["z"])


def test_a1_leaf_on_shell_is_one():
    import random

    leaf = solve_rank1(derive_automorphy_spec(A1), P)
    on_shell = substitute(leaf, {"t1": mono("a1")})
    rng = random.Random(3)
    for _ in range(10):
        asn = sample_assignment(on_shell.variables(), rng, P)
        assert abs(evaluate(on_shell, asn, P) - 1) <= 1e-10


def test_t_quasi_period():
    # theta(q x) = -q^(-1/2) x^(-1) theta(x) with x = t z / a
    spec = derive_automorphy_spec(A1)
    f = spec.t_factor
    assert (f.monomial, f.sign) == (mono("a1/(t1*z)"), -1)
    assert float(f.q_power) == -0.5


def test_trivial_rank():
    spec = derive_automorphy_spec(A1, v=0)
    assert spec.t_factor == TRIVIAL_AUTOMORPHY
    assert solve_rank1(spec, P) == ThetaExpr.one()


def test_rank_two_rejected():
    with pytest.raises(RankExceedsOne):
        derive_automorphy_spec(A1, v=2)
    with pytest.raises(RankExceedsOne):
        model_section(JORDAN, v=2)


@pytest.mark.parametrize("sign", [1, -1])
def test_hilb1_leaf(sign):
    ch = Chamber.identity(1, instanton=True, b_sign=sign)
    leaf = solve_rank1(derive_automorphy_spec(JORDAN, chamber=ch), P)
    assert leaf == ThetaExpr.from_json(HILB1_LEAF_JSON[sign])


def test_no_candidate():
    # a t-factor of degree two in t is outside the degree-one ansatz
    spec = SectionSpec("t1", Automorphy(mono("t1^-2"), -1, 1), Monomial(), ThetaExpr.one(), {})
    with pytest.raises(NoCandidate):
        solve_rank1(spec, P)


def test_spec_json():
    js = derive_automorphy_spec(A1).to_json()
    assert js["var"] == "t1"
    assert set(js["aux"]) == {"a1", "z"}
