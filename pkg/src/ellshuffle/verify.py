"""Numerical certification of the defining properties of stable envelopes.

Every check draws deterministic random assignments (seeded) and returns a
:class:`VerificationReport`.  Points where a denominator vanishes are
resampled; the number of resamples is reported, never hidden.
"""
from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import EllShuffleError, InconsistentPattern, PoleEncountered, ZeroSection
from .expr import Monomial, ThetaExpr, evaluate, evaluate_terms, substitute, symbolic_automorphy
from .quiver import (
    A1,
    JORDAN,
    Chamber,
    DimData,
    FixedPoint,
    KClass,
    Quiver,
    polarization,
    restrict_class,
    root_bindings,
    split_attracting,
    tangent,
    thom_class,
)
from .sampling import sample_assignment
from .shuffle import FIRST, LAST, StabTable, build_table
from .theta import EllipticParams

DIAGONAL_TOL = 1e-8
SUPPORT_ZERO_TOL = 1e-9
AUTOMORPHY_TOL = 1e-7
SPLITTING_TOL = 1e-8
MAX_RESAMPLES = 5

H_INV = Monomial({"h": -2})


@dataclass
class VerificationReport:
    check: str
    status: str
    residual: float
    samples: int
    tolerance: float
    q: complex
    seed: int
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        out = asdict(self)
        out["q"] = [self.q.real, self.q.imag]
        out["residual"] = float(self.residual)
        return out


def _report(check, ok, residual, samples, tol, p, seed, **details) -> VerificationReport:
    return VerificationReport(check, "pass" if ok else "fail", float(residual), samples, tol, p.q, seed, details)


class _Sampler:
    def __init__(self, variables: Iterable[str], p: EllipticParams, seed: int):
        self.variables = set(variables)
        self.p = p
        self.rng = random.Random(seed)
        self.resamples = 0

    def draw(self) -> dict[str, complex]:
        return sample_assignment(self.variables, self.rng, self.p)

    def retry(self, fn: Callable[[dict], object]):
        """Evaluate ``fn`` at a fresh point, resampling on poles up to MAX_RESAMPLES times."""
        last = None
        for attempt in range(MAX_RESAMPLES + 1):
            try:
                return fn(self.draw())
            except (PoleEncountered, ZeroSection) as exc:
                last = exc
                if attempt < MAX_RESAMPLES:
                    self.resamples += 1
        raise last


def repelling_tangent(table: StabTable, f: FixedPoint) -> KClass:
    q = Quiver.a1() if table.kind == A1 else Quiver.jordan()
    tf = restrict_class(tangent(q, DimData((table.v,), (table.w,))), f).nontrivial()
    return split_attracting(tf, table.chamber)[2]


def index_class(table: StabTable, f: FixedPoint) -> KClass:
    q = Quiver.a1() if table.kind == A1 else Quiver.jordan()
    half = restrict_class(polarization(q, DimData((table.v,), (table.w,))), f).nontrivial()
    return split_attracting(half, table.chamber)[0]


def normalizer(table: StabTable, f: FixedPoint) -> ThetaExpr:
    """phi(z, det V|_F) phi(h^-1, det ind_F) / Theta(h)^{rk ind_F}.

    Multiplying Stab_F by this removes the F-dependent part of its
    automorphy, so that all normalized entries share one line bundle.
    """
    out = ThetaExpr.one()
    z = Monomial.var("z")
    det_v = Monomial()
    for m in root_bindings(f).values():
        det_v = det_v * m
    if not det_v.is_one():
        out = out * ThetaExpr.quotient([z * det_v], [z, det_v])
    ind = index_class(table, f)
    det_ind = ind.det()
    if not det_ind.is_one():
        out = out * ThetaExpr.quotient([H_INV * det_ind], [H_INV, det_ind])
    if ind.rank():
        out = out / thom_class(KClass([Monomial.var("h")]) * ind.rank())
    return out


# ---------------------------------------------------------------------------
def check_diagonal(
    table: StabTable,
    p: EllipticParams = EllipticParams(),
    seed: int = 0,
    samples: int = 10,
    tol: float = DIAGONAL_TOL,
    correction: bool = False,
) -> VerificationReport:
    """Stab_F restricted to F against Theta(repelling part of T|_F).

    ``correction`` additionally multiplies the expected value by the index
    translate phi(h^-1, det ind_F); it is off for the shipped cases.
    """
    sampler = _Sampler(table.variables(), p, seed)
    worst, n, per_point, failures = 0.0, 0, {}, []
    for f, e in table.entries.items():
        lhs_expr = substitute(e, root_bindings(f))
        rhs_expr = thom_class(repelling_tangent(table, f))
        if correction:
            det_ind = index_class(table, f).det()
            if not det_ind.is_one():
                rhs_expr = rhs_expr * ThetaExpr.quotient([H_INV * det_ind], [H_INV, det_ind])
        point_worst = 0.0
        for _ in range(samples):
            try:
                lhs, rhs = sampler.retry(lambda asn: (evaluate(lhs_expr, asn, p), evaluate(rhs_expr, asn, p)))
            except EllShuffleError as exc:
                failures.append(f"{f}: {exc}")
                point_worst = float("inf")
                break
            point_worst = max(point_worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
            n += 1
        per_point[str(f)] = point_worst
        worst = max(worst, point_worst)
    ok = worst <= tol and not failures
    return _report("diagonal", ok, worst, n, tol, p, seed, per_fixed_point=per_point, resamples=sampler.resamples, errors=failures)


@dataclass
class SupportResult:
    matrix: list[list[bool]]
    labels: list[str]
    order_consistent: bool
    report: VerificationReport


def _pattern_problems(nz: list[list[bool]]) -> list[str]:
    n = len(nz)
    problems = []
    for i in range(n):
        if not nz[i][i]:
            problems.append(f"diagonal entry {i} vanishes")
    for i in range(n):
        for j in range(i + 1, n):
            if nz[i][j] and nz[j][i]:
                problems.append(f"entries {i},{j} are mutually nonzero")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if nz[i][j] and nz[j][k] and not nz[i][k]:
                    problems.append(f"not transitive: {i}>{j}>{k}")
    return problems


def anchor_pair(table: StabTable) -> tuple[FixedPoint, FixedPoint] | None:
    """(F0, F1) with Stab_{F0}|_{F1} = 0 forced by the chamber a1 >> a2 >> ..."""
    if table.kind != A1 or not (0 < table.v < table.w) or not table.chamber.is_identity():
        return None
    v = table.v
    j0 = FixedPoint(A1, tuple(range(1, v + 1)))
    j1 = FixedPoint(A1, tuple(range(1, v)) + (v + 1,))
    return j0, j1


def check_support(
    table: StabTable,
    p: EllipticParams = EllipticParams(),
    seed: int = 0,
    samples: int = 3,
    tol: float = SUPPORT_ZERO_TOL,
    strict: bool = False,
) -> SupportResult:
    """Vanishing pattern R[F][F'] = Stab_F|_{F'} and its partial-order consistency.

    A value counts as zero when it is below ``tol`` times the largest
    individual term at every sample.  With ``strict`` an inconsistent pattern
    raises :class:`InconsistentPattern` instead of failing the report.
    """
    points = list(table.entries)
    sampler = _Sampler(table.variables(), p, seed)
    nz = [[False] * len(points) for _ in points]
    worst_zero = 0.0
    errors = []
    for i, f in enumerate(points):
        for j, g in enumerate(points):
            restricted = substitute(table.entries[f], root_bindings(g))
            if restricted.is_zero():
                continue
            zero = True
            for _ in range(samples):
                try:
                    terms = sampler.retry(lambda asn: evaluate_terms(restricted, asn, p))
                except EllShuffleError as exc:
                    errors.append(f"R[{f}][{g}]: {exc}")
                    zero = False
                    break
                scale = max(abs(x) for x in terms)
                ratio = abs(sum(terms)) / scale if scale else 0.0
                if ratio > tol:
                    zero = False
                    break
                worst_zero = max(worst_zero, ratio)
            nz[i][j] = not zero
    problems = _pattern_problems(nz)
    anchor = anchor_pair(table)
    anchor_ok = True
    if anchor is not None:
        i0, i1 = points.index(anchor[0]), points.index(anchor[1])
        anchor_ok = not nz[i0][i1] and nz[i1][i0]
        if not anchor_ok:
            problems.append(f"anchor violated: Stab_{anchor[0]} at {anchor[1]} should vanish, not the reverse")
    consistent = not problems and not errors
    if strict and problems:
        raise InconsistentPattern("; ".join(problems))
    labels = [str(f) for f in points]
    report = _report(
        "support",
        consistent,
        worst_zero,
        samples,
        tol,
        p,
        seed,
        pattern=[[int(x) for x in row] for row in nz],
        labels=labels,
        order=_linear_extension(nz, labels),
        anchor=None if anchor is None else [str(anchor[0]), str(anchor[1])],
        problems=problems,
        errors=errors,
        resamples=sampler.resamples,
    )
    return SupportResult(nz, labels, consistent and anchor_ok, report)


def _linear_extension(nz: list[list[bool]], labels: list[str]) -> list[str]:
    """Fixed points sorted so that Stab_F only touches F' listed earlier."""
    n = len(nz)
    below = [sum(nz[i][j] for j in range(n) if j != i) for i in range(n)]
    return [labels[i] for i in sorted(range(n), key=lambda i: (below[i], i))]


def automorphy_powers(table: StabTable) -> dict[str, int]:
    out = {}
    for name in sorted(table.variables()):
        odd = any(m.doubled(name) % 2 for e in table.entries.values() for t in e.terms for m in t.num + t.den)
        out[name] = 2 if odd else 1
    return out


def check_automorphy(
    table: StabTable,
    variables: Sequence[str] | None = None,
    p: EllipticParams = EllipticParams(),
    seed: int = 0,
    samples: int = 5,
    tol: float = AUTOMORPHY_TOL,
) -> VerificationReport:
    """All normalized entries pick up the same factor under each shift var -> q var."""
    powers = automorphy_powers(table)
    variables = list(variables) if variables is not None else sorted(powers)
    normalized = {f: e * normalizer(table, f) for f, e in table.entries.items()}
    sampler = _Sampler(table.variables() | {"z", "h"}, p, seed)
    worst = 0.0
    per_var = {}
    errors = []
    sqrt_q = p.sqrt_q
    for name in variables:
        power = powers.get(name, 1)
        var_worst = 0.0
        for _ in range(samples):

            def ratios(asn):
                shifted = dict(asn)
                shifted[name] = asn[name] * sqrt_q**power
                out = []
                for e in normalized.values():
                    base = evaluate(e, asn, p)
                    if abs(base) < 1e-13:
                        raise ZeroSection(f"entry vanishes at a sample point")
                    out.append(evaluate(e, shifted, p) / base)
                return out

            try:
                rs = sampler.retry(ratios)
            except EllShuffleError as exc:
                errors.append(f"{name}: {exc}")
                var_worst = float("inf")
                break
            ref = rs[0]
            for r in rs[1:]:
                var_worst = max(var_worst, abs(r / ref - 1))
        per_var[name] = var_worst
        worst = max(worst, var_worst)

    symbolic = None
    if table.kind == A1 and table.v == 1 and table.w == 2 and table.chamber.is_identity():
        symbolic = _north_pole_t_factor(table, p, sampler)
        worst = max(worst, symbolic)
    ok = worst <= tol and not errors
    return _report(
        "automorphy",
        ok,
        worst,
        samples,
        tol,
        p,
        seed,
        per_variable=per_var,
        shift_powers={k: powers.get(k, 1) for k in variables},
        north_pole_symbolic_residual=symbolic,
        resamples=sampler.resamples,
        errors=errors,
    )


def _north_pole_t_factor(table: StabTable, p: EllipticParams, sampler: _Sampler) -> float:
    e = table.entries.get(FixedPoint(A1, (1,)))
    if e is None or len(e.terms) != 1:
        return float("inf")
    fac = symbolic_automorphy(e, "t1")
    worst = 0.0
    for _ in range(3):
        asn = sampler.draw()
        shifted = dict(asn)
        shifted["t1"] = asn["t1"] * p.sqrt_q
        measured = evaluate(e, shifted, p) / evaluate(e, asn, p)
        worst = max(worst, abs(measured / fac.value(asn, p) - 1))
    return worst


def compare_tables(
    tables: Sequence[StabTable],
    p: EllipticParams = EllipticParams(),
    seed: int = 0,
    samples: int = 20,
    tol: float = SPLITTING_TOL,
) -> tuple[float, int]:
    variables = set().union(*(t.variables() for t in tables))
    sampler = _Sampler(variables, p, seed)
    worst = 0.0
    for f in tables[0].entries:
        exprs = [t.entries[f] for t in tables]
        for _ in range(samples):
            vals = sampler.retry(lambda asn: [evaluate_terms(e, asn, p) for e in exprs])
            sums = [sum(v) for v in vals]
            scale = max(max((abs(x) for x in v), default=0.0) for v in vals)
            if scale == 0:
                continue
            ref = sums[0]
            for s in sums[1:]:
                denom = max(abs(ref), abs(s))
                if denom <= 1e-12 * scale:
                    continue
                worst = max(worst, abs(s - ref) / denom)
    return worst, sampler.resamples


def check_splitting_independence(
    kind: str,
    v: int,
    w: int,
    ch: Chamber | None = None,
    p: EllipticParams = EllipticParams(),
    seed: int = 0,
    samples: int = 20,
    tol: float = SPLITTING_TOL,
    sequences: Sequence[Sequence[tuple[int, int]]] | None = None,
    b_sign: int | None = None,
) -> VerificationReport:
    """Tables from distinct splitting sequences agree numerically."""
    if sequences is None:
        tables = [
            build_table(kind, v, w, ch, strategy=LAST, b_sign=b_sign, p=p),
            build_table(kind, v, w, ch, strategy=FIRST, b_sign=b_sign, p=p),
        ]
    else:
        tables = [build_table(kind, v, w, ch, splitting=s, b_sign=b_sign, p=p) for s in sequences]
    worst, resamples = compare_tables(tables, p, seed, samples, tol)
    return _report(
        "splitting",
        worst <= tol,
        worst,
        samples,
        tol,
        p,
        seed,
        sequences=[[list(s) for s in t.splitting] for t in tables],
        resamples=resamples,
    )


CHECKS = ("diagonal", "support", "automorphy", "splitting")


def run_checks(
    table: StabTable,
    checks: Sequence[str] = CHECKS,
    p: EllipticParams = EllipticParams(),
    seed: int = 0,
) -> list[VerificationReport]:
    reports = []
    for name in checks:
        if name == "diagonal":
            reports.append(check_diagonal(table, p, seed))
        elif name == "support":
            reports.append(check_support(table, p, seed).report)
        elif name == "automorphy":
            reports.append(check_automorphy(table, None, p, seed))
        elif name == "splitting":
            if table.w >= 3:
                reports.append(
                    check_splitting_independence(table.kind, table.v, table.w, table.chamber, p, seed)
                )
            else:
                reports.append(_report("splitting", True, 0.0, 0, SPLITTING_TOL, p, seed, note="w < 3: single splitting"))
        else:
            raise ValueError(f"unknown check {name!r}")
    return reports
