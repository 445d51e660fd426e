"""Brute-force derivation of rank-one stable envelopes from their defining properties.

A rank-one envelope is a section of a degree-one line bundle in the Chern
root ``t``; such a section is unique up to scale, so matching quasi-periods
in every variable plus the value at the fixed point pins it down.  The
search runs over the finite family ``c0 * (+-1) * theta(t M) / theta(M')``
with ``M, M'`` monomials in the remaining variables.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import AmbiguousCandidate, NoCandidate, NonIntegralShift, RankExceedsOne
from .expr import (
    TRIVIAL_AUTOMORPHY,
    Automorphy,
    Monomial,
    Term,
    ThetaExpr,
    atom_automorphy,
    evaluate,
    measure_automorphy,
    substitute,
    symbolic_automorphy,
)
from .quiver import (
    A1,
    JORDAN,
    Chamber,
    DimData,
    KClass,
    Quiver,
    enumerate_fixed_points,
    polarization as standard_polarization,
    restrict_class,
    root_bindings,
    split_attracting,
    thom_class,
)
from .sampling import sample_assignment
from .theta import EllipticParams

EXPONENT_RANGE = range(-4, 5)
H_INV = Monomial({"h": -2})


@dataclass(frozen=True)
class SectionSpec:
    """Quasi-periods and normalization that characterize a rank-one envelope."""

    var: str
    t_factor: Automorphy
    t0: Monomial
    c0: ThetaExpr
    aux: Mapping[str, tuple[Automorphy, int]] = field(default_factory=dict)
    model: ThetaExpr | None = None

    def __post_init__(self):
        # the factor must itself be shiftable, so that shifting twice composes
        for name, (fac, power) in list(self.aux.items()) + [(self.var, (self.t_factor, 1))]:
            if (fac.monomial.exponent(name) * power).denominator != 1:
                raise ValueError(f"automorphy factor in {name} is not compatible with the shift q^{power}")

    def factor(self, name: str) -> tuple[Automorphy, int]:
        if name == self.var:
            return self.t_factor, 1
        return self.aux[name]

    def to_json(self) -> dict:
        def enc(f: Automorphy, power: int) -> dict:
            return {"monomial": f.monomial.as_dict(), "q_power": str(f.q_power), "sign": f.sign, "shift_power": power}

        return {
            "var": self.var,
            "t_factor": enc(self.t_factor, 1),
            "t0": self.t0.as_dict(),
            "c0": self.c0.to_json(),
            "aux": {k: enc(*v) for k, v in self.aux.items()},
        }


def _phi(x: Monomial, y: Monomial) -> ThetaExpr:
    return ThetaExpr.quotient([x * y], [x, y])


def _shift_power(e: ThetaExpr, name: str) -> int:
    odd = any(m.doubled(name) % 2 for t in e.terms for m in t.num + t.den)
    return 2 if odd else 1


def model_section(kind: str, v: int = 1, pol: KClass | None = None, chamber: Chamber | None = None) -> tuple[ThetaExpr, Monomial, ThetaExpr]:
    """Single-term function with the automorphy an envelope must have, plus (t0, c0).

    The model is Theta(T^1/2) phi(z, det V) Theta(h)^{rk ind} divided by the
    same data at the fixed point, phi(z, det V|_F) Theta(T^1/2|_F fixed) and
    the index translate phi(h^-1, det ind).  Trivial characters are dropped.
    """
    if v > 1:
        raise RankExceedsOne(f"the oracle handles a single Chern root, got v = {v}")
    q = Quiver.a1() if kind == A1 else Quiver.jordan()
    chamber = chamber or Chamber.identity(1, instanton=kind == JORDAN)
    if v == 0:
        return ThetaExpr.one(), Monomial(), ThetaExpr.one()
    half = pol if pol is not None else standard_polarization(q, DimData((1,), (1,)))
    (f,) = enumerate_fixed_points(kind, 1, 1)
    half_f = restrict_class(half, f).nontrivial()
    ind, fixed, _ = split_attracting(half_f, chamber)
    tangent_f = half_f + half_f.dual() * H_INV
    _, _, repelling = split_attracting(tangent_f.nontrivial(), chamber)
    t0 = root_bindings(f)["t1"]
    z = Monomial.var("z")
    model = thom_class(half.nontrivial()) * _phi(z, Monomial.var("t1"))
    model = model / _phi(z, t0) / thom_class(fixed)
    if not ind.is_zero():
        model = model * thom_class(KClass([Monomial.var("h")]) * ind.rank()) / _phi(H_INV, ind.det())
    return model, t0, thom_class(repelling)


def derive_automorphy_spec(
    kind: str, v: int = 1, pol: KClass | None = None, chamber: Chamber | None = None
) -> SectionSpec:
    """Exact quasi-periods of a rank-one envelope in every variable."""
    model, t0, c0 = model_section(kind, v, pol, chamber)
    if v == 0:
        return SectionSpec("t1", TRIVIAL_AUTOMORPHY, t0, c0, {}, model)
    names = sorted((model.variables() | c0.variables() | t0.variables()) - {"t1"})
    aux = {}
    for name in names:
        power = _shift_power(model, name)
        aux[name] = (symbolic_automorphy(model, name, power), power)
    return SectionSpec("t1", symbolic_automorphy(model, "t1"), t0, c0, aux, model)


def _aut(m: Monomial, name: str, power: int) -> Automorphy:
    return atom_automorphy(m, name, power)


def _canonical(m2: Monomial, coef: int) -> tuple[Monomial, int]:
    """theta(1/m) = -theta(m): orient M' so its first exponent is positive."""
    if m2.items and m2.items[0][1] < 0:
        return m2.inverse(), -coef
    return m2, coef


def _grid(names: list[str]):
    for exps in itertools.product(EXPONENT_RANGE, repeat=len(names)):
        yield Monomial(dict(zip(names, exps)))


def solve_rank1(spec: SectionSpec, p: EllipticParams = EllipticParams(), seed: int = 0, samples: int = 10) -> ThetaExpr:
    """Unique member of the ansatz family with the quasi-periods and normalization of ``spec``."""
    names = sorted(spec.aux)
    c0_aut = {n: symbolic_automorphy(spec.c0, n, spec.aux[n][1]) for n in names}
    t = Monomial.var(spec.var)
    found: dict[tuple, ThetaExpr] = {}

    if spec.t_factor == TRIVIAL_AUTOMORPHY and all(c0_aut[n] == spec.aux[n][0] for n in names):
        found[("const",)] = spec.c0

    grid = list(_grid(names))
    for m in grid:
        if _aut(t * m, spec.var, 1) != spec.t_factor:
            continue
        partial = {}
        for n in names:
            power = spec.aux[n][1]
            try:
                partial[n] = c0_aut[n] * _aut(t * m, n, power)
            except NonIntegralShift:
                break
        else:
            for m2 in grid:
                if m2.is_one():
                    continue
                ok = True
                for n in names:
                    fac, power = spec.aux[n]
                    try:
                        if partial[n] / _aut(m2, n, power) != fac:
                            ok = False
                            break
                    except NonIntegralShift:
                        ok = False
                        break
                if not ok:
                    continue
                at_t0 = (spec.t0 * m)
                if at_t0 == m2:
                    coef = 1
                elif at_t0 == m2.inverse():
                    coef = -1
                else:
                    continue
                m2c, coefc = _canonical(m2, coef)
                found[(m, m2c, coefc)] = spec.c0 * ThetaExpr([Term.make(coefc, [t * m], [m2c])])
    if not found:
        raise NoCandidate("no theta ratio in the ansatz family has the required quasi-periods")
    if len(found) > 1:
        raise AmbiguousCandidate(list(found.values()))
    (result,) = found.values()
    _verify(result, spec, p, seed, samples)
    return result


def _verify(e: ThetaExpr, spec: SectionSpec, p: EllipticParams, seed: int, samples: int) -> None:
    rng = random.Random(seed)
    variables = e.variables() | spec.c0.variables() | set(spec.aux) | {spec.var}
    pts = [sample_assignment(variables, rng, p) for _ in range(samples)]
    for name in [spec.var] + sorted(spec.aux):
        fac, power = spec.factor(name)
        res = measure_automorphy(e, name, pts, p, predicted=fac, power=power, rtol=1e-9)
        if not res.consistent or abs(res.normalized[0] - 1) > 1e-9:
            raise NoCandidate(f"candidate {e} fails the numerical quasi-period check in {name}")
    on_shell = substitute(e, {spec.var: spec.t0})
    for asn in pts:
        lhs, rhs = evaluate(on_shell, asn, p), evaluate(spec.c0, asn, p)
        if abs(lhs - rhs) > 1e-10 * max(1.0, abs(rhs)):
            raise NoCandidate(f"candidate {e} has the wrong value at {spec.var} = {spec.t0}")
