"""Inductive construction of elliptic stable envelopes by shuffle products.

Every envelope is built by splitting the framing ``w = w' + w''`` down to
single framings.  At each step the two smaller envelopes are multiplied by
a theta prefactor, their Kaehler variables are shifted by powers of ``h``
and the product is symmetrized over shuffles of the Chern roots.
"""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from .errors import (
    InvalidFixedPoint,
    InvalidSplitting,
    ProviderLimitExceeded,
    RankMismatch,
    UnsupportedChamber,
    UnsupportedQuiver,
)
from .expr import Monomial, ThetaExpr, evaluate, substitute
from .quiver import (
    A1,
    JORDAN,
    R1,
    R2,
    Chamber,
    DimData,
    FixedPoint,
    Quiver,
    class_frak_N,
    class_N_hat_j,
    default_polarization,
    enumerate_fixed_points,
    kahler_name,
    sectors,
    shift_difference,
    solve_delta,
    thom_class,
    validate_fixed_point,
)
from .sampling import sample_assignment
from .theta import EllipticParams

SYMMETRY_RTOL = 1e-9

t = lambda k: Monomial.var(f"t{k}")  # noqa: E731
a = lambda j: Monomial.var(f"a{j}")  # noqa: E731
Z = Monomial.var("z")
H = Monomial.var("h")


# ---------------------------------------------------------------------------
# shuffles
# ---------------------------------------------------------------------------
def shuffle_sum(e: ThetaExpr, v1: int, v2: int) -> ThetaExpr:
    """Sum of e(sigma . t) over the (v1, v2)-shuffles of t1..t_{v1+v2}."""
    return shuffle_sum_groups(e, [([f"t{k}" for k in range(1, v1 + v2 + 1)], v1)])


def shuffle_sum_groups(e: ThetaExpr, groups: Sequence[tuple[Sequence[str], int]]) -> ThetaExpr:
    """Independent shuffles of several root groups ``(names, v')``; terms are concatenated."""
    per_group = []
    for names, v1 in groups:
        names = list(names)
        options = []
        for first in itertools.combinations(range(len(names)), v1):
            rest = [i for i in range(len(names)) if i not in first]
            image = list(first) + rest
            options.append({names[k]: Monomial.var(names[image[k]]) for k in range(len(names)) if image[k] != k})
        per_group.append(options)
    out = []
    for combo in itertools.product(*per_group):
        bindings: dict[str, Monomial] = {}
        for b in combo:
            bindings.update(b)
        out.extend(substitute(e, bindings).terms)
    return ThetaExpr(out)


def _relabel(e: ThetaExpr, v1: int, w1: int) -> ThetaExpr:
    """Move an envelope of the second factor into roots t_{v1+k} and framings a_{w1+j}."""
    names = sorted(e.variables())
    bindings = {}
    for n in names:
        if n[0] in "ta" and n[1:].isdigit():
            bindings[n] = Monomial.var(f"{n[0]}{int(n[1:]) + (v1 if n[0] == 't' else w1)}")
    return substitute(e, bindings)


def _shift_z(e: ThetaExpr, k: Fraction | int, name: str = "z") -> ThetaExpr:
    if k == 0:
        return e
    return substitute(e, {name: Monomial.var(name) * Monomial.var("h", k)})


# ---------------------------------------------------------------------------
# the two printed specializations
# ---------------------------------------------------------------------------
def phi_grassmannian(v1: int, v2: int, w1: int, w2: int) -> ThetaExpr:
    v, w = v1 + v2, w1 + w2
    num = [a(j) / t(i) for i in range(1, v1 + 1) for j in range(w1 + 1, w + 1)]
    num += [t(i) / (a(j) * H) for i in range(v1 + 1, v + 1) for j in range(1, w1 + 1)]
    den = []
    for i in range(1, v1 + 1):
        for j in range(v1 + 1, v + 1):
            den += [t(j) / t(i), t(j) / (t(i) * H)]
    return ThetaExpr.quotient(num, den)


def phi_instanton(v1: int, v2: int, w1: int, w2: int) -> ThetaExpr:
    v, w = v1 + v2, w1 + w2
    num = [t(i) / a(j) for i in range(v1 + 1, v + 1) for j in range(1, w1 + 1)]
    num += [a(j) / (H * t(i)) for i in range(1, v1 + 1) for j in range(w1 + 1, w + 1)]
    den = []
    for i in range(1, v1 + 1):
        for j in range(v1 + 1, v + 1):
            num += [R1 * t(j) / t(i), R2 * t(j) / t(i)]
            den += [t(j) / t(i), t(j) / (t(i) * H)]
    return ThetaExpr.quotient(num, den)


def combine_grassmannian(e1: ThetaExpr, e2: ThetaExpr, v1: int, v2: int, w1: int, w2: int) -> ThetaExpr:
    """Shuffle{phi(t,a,h) Stab'(z h^{v''}) Stab''(z h^{w'-v'})}; e2 already relabelled."""
    body = phi_grassmannian(v1, v2, w1, w2) * _shift_z(e1, v2) * _shift_z(e2, w1 - v1)
    return shuffle_sum(body, v1, v2)


def combine_instanton(e1: ThetaExpr, e2: ThetaExpr, v1: int, v2: int, w1: int, w2: int) -> ThetaExpr:
    """Shuffle{phi(t,a,r,h) Stab'(z h^{-w''}) Stab''(z)}; e2 already relabelled."""
    body = phi_instanton(v1, v2, w1, w2) * _shift_z(e1, -w2) * e2
    return shuffle_sum(body, v1, v2)


# ---------------------------------------------------------------------------
# the general formula
# ---------------------------------------------------------------------------
def generic_shuffle_stab(
    quiver: Quiver,
    dims: DimData,
    stab1: ThetaExpr,
    stab2: ThetaExpr,
    pol: str | None = None,
) -> ThetaExpr:
    """Assemble Shuffle{Theta(N) Theta(frakN^dual)^-1 Theta(h^-1 frakN^dual)^-1 stab1 stab2}.

    ``stab1`` lives in the primed roots/framings and ``stab2`` in the
    double-primed ones (see :func:`ellshuffle.quiver.sectors`).  Kaehler
    variables may be called ``z`` or ``z'`` / ``z''`` (``z1'``... for
    several vertices); all are identified with ``z`` after the shift.
    """
    sec = sectors(quiver, dims)
    frak = class_frak_N(quiver, dims)
    prefactor = thom_class(class_N_hat_j(quiver, dims, pol) - frak.dual() - frak.dual() * Monomial({"h": -2}))
    diff = shift_difference(quiver, dims, pol)
    zs = {}
    for i in range(quiver.n):
        zn = kahler_name(quiver, i)
        zs[zn + "'"] = sec.t1[i]
        zs[zn + "''"] = sec.t2[i]
    _, shifts = solve_delta(diff, zs)
    b1: dict[str, Monomial] = {}
    b2: dict[str, Monomial] = {}
    for i in range(quiver.n):
        zn = kahler_name(quiver, i)
        z = Monomial.var(zn)
        for nm in (zn, zn + "'"):
            b1[nm] = z * Monomial.var("h", shifts[zn + "'"])
        for nm in (zn, zn + "''"):
            b2[nm] = z * Monomial.var("h", shifts[zn + "''"])
    body = prefactor * substitute(stab1, b1) * substitute(stab2, b2)
    groups = [(sec.t1[i] + sec.t2[i], len(sec.t1[i])) for i in range(quiver.n)]
    return shuffle_sum_groups(body, groups)


# ---------------------------------------------------------------------------
# leaves
# ---------------------------------------------------------------------------
def grassmannian_leaf(occupied: int) -> ThetaExpr:
    """Envelopes of T*Gr(0,1) = pt and T*Gr(1,1) = pt."""
    if occupied == 0:
        return ThetaExpr.one()
    return ThetaExpr.quotient([t(1) * Z / a(1)], [Z])


class HilbProvider:
    """Off-shell envelopes of Hilb_n(C^2) (Jordan quiver, w = 1) by partition.

    Only ``|lambda| <= 1`` is available; the size-one leaf is derived from
    the axioms by :mod:`ellshuffle.oracle` for the chosen b-dominance sign.
    """

    max_size = 1

    def __init__(self, b_sign: int = 1, leaves: Mapping[tuple[int, ...], ThetaExpr] | None = None):
        self.b_sign = b_sign
        self._leaves = dict(leaves or {})

    def __call__(self, lam: tuple[int, ...]) -> ThetaExpr:
        lam = tuple(lam)
        if lam in self._leaves:
            return self._leaves[lam]
        size = sum(lam)
        if size == 0:
            return ThetaExpr.one()
        if size > self.max_size:
            raise ProviderLimitExceeded(f"no Hilbert-scheme envelope available for partition {lam}")
        return hilb1_leaf(self.b_sign)


@lru_cache(maxsize=None)
def hilb1_leaf(b_sign: int) -> ThetaExpr:
    from .oracle import derive_automorphy_spec, solve_rank1

    return solve_rank1(derive_automorphy_spec(JORDAN, v=1, chamber=Chamber.identity(1, instanton=True, b_sign=b_sign)))


# ---------------------------------------------------------------------------
# recursion over splittings
# ---------------------------------------------------------------------------
LAST = "last"
FIRST = "first"


class _Splitter:
    """Hands out framing splittings in pre-order, falling back to a strategy."""

    def __init__(self, sequence: Sequence[tuple[int, int]] = (), strategy: str = LAST):
        if strategy not in (LAST, FIRST):
            raise InvalidSplitting(f"unknown strategy {strategy!r}")
        self.sequence = [tuple(s) for s in sequence]
        self.strategy = strategy
        self.used: list[tuple[int, int]] = []

    def next(self, w: int) -> tuple[int, int]:
        k = len(self.used)
        if k < len(self.sequence):
            w1, w2 = self.sequence[k]
            if w1 < 1 or w2 < 1 or w1 + w2 != w:
                raise InvalidSplitting(f"splitting {w1}+{w2} does not split w = {w} into positive parts")
        else:
            w1, w2 = (w - 1, 1) if self.strategy == LAST else (1, w - 1)
        self.used.append((w1, w2))
        return w1, w2


def _size(kind: str, item) -> int:
    return item if kind == A1 else sum(item)


def _build(kind: str, data: tuple, splitter: _Splitter, leaf: Callable, combine: Callable) -> ThetaExpr:
    w = len(data)
    if w == 1:
        return leaf(data[0])
    w1, w2 = splitter.next(w)
    d1, d2 = data[:w1], data[w1:]
    v1 = sum(_size(kind, x) for x in d1)
    v2 = sum(_size(kind, x) for x in d2)
    e1 = _build(kind, d1, splitter, leaf, combine)
    e2 = _relabel(_build(kind, d2, splitter, leaf, combine), v1, w1)
    return combine(e1, e2, v1, v2, w1, w2)


def _generic_combiner(quiver: Quiver):
    def combine(e1, e2, v1, v2, w1, w2):
        return generic_shuffle_stab(quiver, DimData.scalar(v1 + v2, w1 + w2, v1, w1), e1, e2)

    return combine


def _per_framing(f: FixedPoint, w: int) -> tuple:
    if f.kind == A1:
        return tuple(1 if j in f.data else 0 for j in range(1, w + 1))
    return f.data


def _permute_framing(e: ThetaExpr, perm: Sequence[int]) -> ThetaExpr:
    return substitute(e, {f"a{i}": a(j) for i, j in enumerate(perm, start=1) if i != j})


def _relabel_fixed_point(f: FixedPoint, ch: Chamber) -> FixedPoint:
    """Fixed point in the labels b_i = a_{tau(i)} of the identity chamber."""
    if f.kind == A1:
        inv = {j: i for i, j in enumerate(ch.perm, start=1)}
        return FixedPoint(A1, tuple(sorted(inv[j] for j in f.data)))
    return FixedPoint(JORDAN, tuple(f.data[j - 1] for j in ch.perm))


def _stab(
    kind: str,
    v: int,
    w: int,
    f: FixedPoint,
    ch: Chamber | None,
    splitter: _Splitter,
    leaf: Callable,
    combine: Callable,
    relabel: bool,
) -> ThetaExpr:
    if f.kind != kind:
        raise InvalidFixedPoint(f"{f} is not a {kind} fixed point")
    try:
        validate_fixed_point(f, v, w)
    except RankMismatch as exc:
        raise InvalidFixedPoint(str(exc)) from None
    ch = ch or Chamber.identity(w, instanton=kind == JORDAN)
    if len(ch.perm) != w:
        raise UnsupportedChamber(f"chamber {ch.perm} does not order {w} framing weights")
    if ch.is_identity():
        return _build(kind, _per_framing(f, w), splitter, leaf, combine)
    if not relabel:
        raise UnsupportedChamber("non-identity chambers need framing relabelling")
    g = _relabel_fixed_point(f, ch)
    return _permute_framing(_build(kind, _per_framing(g, w), splitter, leaf, combine), ch.perm)


def grassmannian_stab(
    v: int,
    w: int,
    f: FixedPoint,
    ch: Chamber | None = None,
    splitting: Sequence[tuple[int, int]] = (),
    strategy: str = LAST,
    relabel: bool = True,
    engine: str = "explicit",
) -> ThetaExpr:
    """Envelope of the fixed point ``f`` of T*Gr(v, w) in variables t, a, z, h."""
    combine = combine_grassmannian if engine == "explicit" else _generic_combiner(Quiver.a1())
    return _stab(A1, v, w, f, ch, _Splitter(splitting, strategy), grassmannian_leaf, combine, relabel)


def instanton_stab(
    v: int,
    w: int,
    f: FixedPoint,
    ch: Chamber | None = None,
    hilb: HilbProvider | None = None,
    splitting: Sequence[tuple[int, int]] = (),
    strategy: str = LAST,
    relabel: bool = True,
    engine: str = "explicit",
) -> ThetaExpr:
    """Envelope of the fixed point ``f`` of the instanton moduli M(v, w)."""
    if f.kind != JORDAN:
        raise InvalidFixedPoint(f"{f} is not a tuple of partitions")
    ch = ch or Chamber.identity(w, instanton=True)
    hilb = hilb or HilbProvider(ch.b_sign)
    combine = combine_instanton if engine == "explicit" else _generic_combiner(Quiver.jordan())
    return _stab(JORDAN, v, w, f, ch, _Splitter(splitting, strategy), hilb, combine, relabel)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------
KIND_NAMES = {"grassmannian": A1, "a1": A1, A1: A1, "instanton": JORDAN, "jordan": JORDAN, JORDAN: JORDAN}


def normalize_kind(kind: str) -> str:
    try:
        return KIND_NAMES[kind.lower() if kind != A1 else kind]
    except KeyError:
        raise UnsupportedQuiver(f"unsupported quiver kind {kind!r}") from None


def fixed_point_key(f: FixedPoint) -> str:
    return json.dumps(f.to_json(), separators=(",", ":"))


@dataclass
class StabTable:
    kind: str
    v: int
    w: int
    chamber: Chamber
    entries: dict[FixedPoint, ThetaExpr]
    polarization: str
    splitting: list[tuple[int, int]] = field(default_factory=list)

    def variables(self) -> set[str]:
        out = {f"a{j}" for j in range(1, self.w + 1)} | {f"t{k}" for k in range(1, self.v + 1)}
        for e in self.entries.values():
            out |= e.variables()
        return out

    def to_json(self) -> dict:
        return {
            "kind": "grassmannian" if self.kind == A1 else "instanton",
            "v": self.v,
            "w": self.w,
            "chamber": {"perm": list(self.chamber.perm), "instanton": self.chamber.instanton, "b_sign": self.chamber.b_sign},
            "polarization": self.polarization,
            "splitting": [list(s) for s in self.splitting],
            "entries": {fixed_point_key(f): e.to_json() for f, e in self.entries.items()},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "StabTable":
        kind = normalize_kind(data["kind"])
        ch = data.get("chamber", {})
        chamber = Chamber(
            tuple(ch.get("perm", range(1, int(data["w"]) + 1))),
            bool(ch.get("instanton", kind == JORDAN)),
            int(ch.get("b_sign", 1)),
        )
        entries = {}
        for key, expr in data["entries"].items():
            raw = json.loads(key)
            f = FixedPoint(kind, tuple(raw) if kind == A1 else tuple(tuple(x) for x in raw))
            entries[f] = ThetaExpr.from_json(expr)
        return cls(
            kind,
            int(data["v"]),
            int(data["w"]),
            chamber,
            entries,
            data.get("polarization", default_polarization(Quiver.a1() if kind == A1 else Quiver.jordan())),
            [tuple(s) for s in data.get("splitting", [])],
        )

    def check_symmetry(self, p: EllipticParams = EllipticParams(), seed: int = 0, rtol: float = SYMMETRY_RTOL) -> float:
        """Worst relative change of an entry under permutations of t; raises if above ``rtol``."""
        if self.v < 2:
            return 0.0
        rng = random.Random(seed)
        names = [f"t{k}" for k in range(1, self.v + 1)]
        perms = [names[1:] + names[:1], [names[1], names[0]] + names[2:]]
        worst = 0.0
        for f, e in self.entries.items():
            asn = sample_assignment(self.variables(), rng, p)
            base = evaluate(e, asn, p)
            for perm in perms:
                moved = dict(asn)
                for src, dst in zip(names, perm):
                    moved[dst] = asn[src]
                val = evaluate(e, moved, p)
                worst = max(worst, abs(val - base) / max(abs(base), 1e-300))
        if worst > rtol:
            raise ValueError(f"table entry is not symmetric in the Chern roots (relative change {worst:.2e})")
        return worst


def build_table(
    kind: str,
    v: int,
    w: int,
    ch: Chamber | None = None,
    splitting: Sequence[tuple[int, int]] = (),
    strategy: str = LAST,
    b_sign: int | None = None,
    hilb: HilbProvider | None = None,
    engine: str = "explicit",
    check_symmetry: bool = True,
    p: EllipticParams = EllipticParams(),
) -> StabTable:
    """Envelopes of every fixed point of T*Gr(v, w) or M(v, w)."""
    kind = normalize_kind(kind)
    if ch is None:
        ch = Chamber.identity(w, instanton=kind == JORDAN, b_sign=b_sign or 1)
    elif b_sign is not None and ch.b_sign != b_sign:
        ch = Chamber(ch.perm, ch.instanton, b_sign)
    if w < 1:
        raise UnsupportedQuiver("the framing must be positive")
    entries: dict[FixedPoint, ThetaExpr] = {}
    used: list[tuple[int, int]] = []
    for f in enumerate_fixed_points(kind, v, w):
        splitter = _Splitter(splitting, strategy)
        if kind == A1:
            combine = combine_grassmannian if engine == "explicit" else _generic_combiner(Quiver.a1())
            entries[f] = _stab(A1, v, w, f, ch, splitter, grassmannian_leaf, combine, True)
        else:
            provider = hilb or HilbProvider(ch.b_sign)
            combine = combine_instanton if engine == "explicit" else _generic_combiner(Quiver.jordan())
            entries[f] = _stab(JORDAN, v, w, f, ch, splitter, provider, combine, True)
        used = splitter.used
    pol = default_polarization(Quiver.a1() if kind == A1 else Quiver.jordan())
    table = StabTable(kind, v, w, ch, entries, pol, list(used))
    if check_symmetry:
        table.check_symmetry(p)
    return table
