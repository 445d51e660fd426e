"""Quiver data, fixed points, chambers and K-theory classes as character multisets.

Classes are expressed directly in Chern roots: the tautological bundle ``V_i``
at vertex ``i`` is the sum of its Chern roots, ``W`` the sum of the framing
characters ``a_j``.  ``Hom(A, B)`` is ``B (x) A^dual``.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    InvalidPartitionTuple,
    MissingSplitting,
    RankMismatch,
    UnpairableClass,
    UnsupportedQuiver,
)
from .expr import Monomial, Term, ThetaExpr

A1 = "A1"
JORDAN = "jordan"
GENERIC = "generic"

# r1 r2 = h^{-1}; see the decisions ledger for the choice of r2.
R1 = Monomial({"b": 2, "h": -1})
R2 = Monomial({"b": -2, "h": -1})
H = Monomial({"h": 2})
H_INV = Monomial({"h": -2})


class NonemptinessWarning(UserWarning):
    """A splitting factor M(v', w') looks empty; choosing splittings is the caller's job."""


# ---------------------------------------------------------------------------
# K-theory classes
# ---------------------------------------------------------------------------
class KClass:
    """Signed multiset of monomial characters."""

    __slots__ = ("_counts",)

    def __init__(self, items: Mapping[Monomial, int] | Iterable[Monomial] = ()):
        counts: dict[Monomial, int] = {}
        if isinstance(items, Mapping):
            for m, c in items.items():
                counts[m] = counts.get(m, 0) + int(c)
        else:
            for m in items:
                counts[m] = counts.get(m, 0) + 1
        self._counts = {m: c for m, c in sorted(counts.items()) if c != 0}

    @classmethod
    def parse(cls, *texts: str) -> "KClass":
        return cls(Monomial.parse(t) for t in texts)

    @staticmethod
    def hom(src: "KClass", dst: "KClass") -> "KClass":
        return dst * src.dual()

    def items(self) -> Iterator[tuple[Monomial, int]]:
        return iter(self._counts.items())

    def multiplicity(self, m: Monomial) -> int:
        return self._counts.get(m, 0)

    def monomials(self) -> list[Monomial]:
        return list(self._counts)

    def rank(self) -> int:
        return sum(self._counts.values())

    def size(self) -> int:
        """Total number of characters counted without sign."""
        return sum(abs(c) for c in self._counts.values())

    def is_zero(self) -> bool:
        return not self._counts

    def __bool__(self):
        return bool(self._counts)

    def __add__(self, other: "KClass") -> "KClass":
        d = dict(self._counts)
        for m, c in other._counts.items():
            d[m] = d.get(m, 0) + c
        return KClass(d)

    def __neg__(self) -> "KClass":
        return KClass({m: -c for m, c in self._counts.items()})

    def __sub__(self, other: "KClass") -> "KClass":
        return self + (-other)

    def __mul__(self, other: "KClass | Monomial | int") -> "KClass":
        if isinstance(other, int):
            return KClass({m: c * other for m, c in self._counts.items()})
        if isinstance(other, Monomial):
            return KClass({m * other: c for m, c in self._counts.items()})
        d: dict[Monomial, int] = {}
        for m1, c1 in self._counts.items():
            for m2, c2 in other._counts.items():
                m = m1 * m2
                d[m] = d.get(m, 0) + c1 * c2
        return KClass(d)

    __rmul__ = __mul__

    def dual(self) -> "KClass":
        return KClass({m.inverse(): c for m, c in self._counts.items()})

    def substitute(self, bindings: Mapping[str, Monomial]) -> "KClass":
        d: dict[Monomial, int] = {}
        for m, c in self._counts.items():
            m2 = m.substitute(bindings)
            d[m2] = d.get(m2, 0) + c
        return KClass(d)

    def det(self) -> Monomial:
        out = Monomial()
        for m, c in self._counts.items():
            out = out * m**c
        return out

    def variables(self) -> set[str]:
        out = set()
        for m in self._counts:
            out |= m.variables()
        return out

    def nontrivial(self) -> "KClass":
        return KClass({m: c for m, c in self._counts.items() if not m.is_one()})

    def __eq__(self, other):
        return isinstance(other, KClass) and self._counts == other._counts

    def __hash__(self):
        return hash(tuple(self._counts.items()))

    def __str__(self):
        if not self._counts:
            return "{}"
        parts = []
        for m, c in self._counts.items():
            parts.append(str(m) if c == 1 else f"{c}*{m}")
        return "{" + ", ".join(parts) + "}"

    def __repr__(self):
        return f"KClass({self})"


def thom_class(c: KClass) -> ThetaExpr:
    """Theta(c) = prod theta(chi)^{mult(chi)} as a single-term expression."""
    num, den = [], []
    for m, k in c.items():
        (num if k > 0 else den).extend([m] * abs(k))
    return ThetaExpr([Term.make(1, num, den)])


# ---------------------------------------------------------------------------
# Quivers and dimension data
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Quiver:
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        adj = tuple(tuple(int(x) for x in row) for row in self.adjacency)
        n = len(adj)
        if n == 0 or any(len(row) != n for row in adj):
            raise ValueError("adjacency must be a non-empty square matrix")
        if any(x < 0 for row in adj for x in row):
            raise ValueError("adjacency entries must be non-negative")
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def a1(cls) -> "Quiver":
        return cls(((0,),))

    @classmethod
    def jordan(cls) -> "Quiver":
        return cls(((1,),))

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def kind(self) -> str:
        if self.adjacency == ((0,),):
            return A1
        if self.adjacency == ((1,),):
            return JORDAN
        return GENERIC

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(self.n) for _ in range(self.adjacency[i][j])]


@dataclass(frozen=True)
class Split:
    v1: tuple[int, ...]
    v2: tuple[int, ...]
    w1: tuple[int, ...]
    w2: tuple[int, ...]


@dataclass(frozen=True)
class DimData:
    v: tuple[int, ...]
    w: tuple[int, ...]
    split: Split | None = None

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(int(x) for x in self.v))
        object.__setattr__(self, "w", tuple(int(x) for x in self.w))
        if len(self.v) != len(self.w):
            raise ValueError("v and w must have the same length")
        if any(x < 0 for x in self.v + self.w):
            raise ValueError("dimension vectors must be non-negative")
        s = self.split
        if s is not None:
            s = Split(*(tuple(int(x) for x in part) for part in (s.v1, s.v2, s.w1, s.w2)))
            object.__setattr__(self, "split", s)
            for part in (s.v1, s.v2, s.w1, s.w2):
                if len(part) != len(self.v) or any(x < 0 for x in part):
                    raise ValueError("splitting vectors must be non-negative and match the vertex count")
            if tuple(map(sum, zip(s.v1, s.v2))) != self.v or tuple(map(sum, zip(s.w1, s.w2))) != self.w:
                raise ValueError("splitting does not sum to (v, w)")

    @classmethod
    def scalar(cls, v: int, w: int, v1: int | None = None, w1: int | None = None) -> "DimData":
        split = None
        if v1 is not None and w1 is not None:
            split = Split((v1,), (v - v1,), (w1,), (w - w1,))
        return cls((v,), (w,), split)

    def require_split(self) -> Split:
        if self.split is None:
            raise MissingSplitting("this operation needs a splitting (v', v'', w', w'')")
        return self.split


def quiver_to_json(q: Quiver, d: DimData) -> dict:
    out = {"vertices": q.n, "adjacency": [list(r) for r in q.adjacency], "v": list(d.v), "w": list(d.w)}
    if d.split is not None:
        s = d.split
        out["split"] = {"v1": list(s.v1), "v2": list(s.v2), "w1": list(s.w1), "w2": list(s.w2)}
    return out


def quiver_from_json(data: Mapping) -> tuple[Quiver, DimData]:
    q = Quiver(tuple(tuple(r) for r in data["adjacency"]))
    if "vertices" in data and int(data["vertices"]) != q.n:
        raise ValueError("vertex count does not match the adjacency matrix")
    split = None
    if data.get("split"):
        s = data["split"]
        split = Split(tuple(s["v1"]), tuple(s["v2"]), tuple(s["w1"]), tuple(s["w2"]))
    return q, DimData(tuple(data["v"]), tuple(data["w"]), split)


# ---------------------------------------------------------------------------
# variable naming
# ---------------------------------------------------------------------------
def root_name(q: Quiver, vertex: int, k: int) -> str:
    """Name of the k-th (1-based) Chern root at ``vertex`` (0-based)."""
    return f"t{k}" if q.n == 1 else f"t{vertex + 1}_{k}"


def roots(q: Quiver, vertex: int, count: int, start: int = 1) -> list[str]:
    return [root_name(q, vertex, k) for k in range(start, start + count)]


def framing_names(d: DimData, vertex: int) -> list[str]:
    offset = sum(d.w[:vertex])
    return [f"a{offset + j}" for j in range(1, d.w[vertex] + 1)]


def kahler_name(q: Quiver, vertex: int) -> str:
    return "z" if q.n == 1 else f"z{vertex + 1}"


def bundle(names: Iterable[str]) -> KClass:
    return KClass(Monomial.var(n) for n in names)


@dataclass(frozen=True)
class Sectors:
    """Chern-root and framing names of the primed/double-primed blocks, per vertex."""

    t1: tuple[tuple[str, ...], ...]
    t2: tuple[tuple[str, ...], ...]
    a1: tuple[tuple[str, ...], ...]
    a2: tuple[tuple[str, ...], ...]

    def V1(self, i):
        return bundle(self.t1[i])

    def V2(self, i):
        return bundle(self.t2[i])

    def W1(self, i):
        return bundle(self.a1[i])

    def W2(self, i):
        return bundle(self.a2[i])


def sectors(q: Quiver, d: DimData) -> Sectors:
    s = d.require_split()
    t1, t2, a1, a2 = [], [], [], []
    for i in range(q.n):
        t1.append(tuple(roots(q, i, s.v1[i])))
        t2.append(tuple(roots(q, i, s.v2[i], start=s.v1[i] + 1)))
        names = framing_names(d, i)
        a1.append(tuple(names[: s.w1[i]]))
        a2.append(tuple(names[s.w1[i]:]))
    return Sectors(tuple(t1), tuple(t2), tuple(a1), tuple(a2))


def check_nonempty(q: Quiver, d: DimData) -> None:
    """Heuristic emptiness warning for the two factors of a splitting."""
    s = d.require_split()
    for v, w in ((s.v1, s.w1), (s.v2, s.w2)):
        for i in range(q.n):
            if v[i] == 0:
                continue
            reach = sum((q.adjacency[i][j] + q.adjacency[j][i]) * v[j] for j in range(q.n) if j != i)
            loops = q.adjacency[i][i]
            if w[i] == 0 and reach == 0 or (loops == 0 and v[i] > w[i] + reach):
                warnings.warn(
                    f"factor M(v={list(v)}, w={list(w)}) is probably empty at vertex {i + 1}",
                    NonemptinessWarning,
                    stacklevel=3,
                )
                return


# ---------------------------------------------------------------------------
# polarizations and the classes of the shuffle formula
# ---------------------------------------------------------------------------
STANDARD = "standard"
INSTANTON = "instanton"


def default_polarization(q: Quiver) -> str:
    return INSTANTON if q.kind == JORDAN else STANDARD


def polarization(q: Quiver, d: DimData, pol: str | None = None, levi: bool = False) -> KClass:
    """T^{1/2} in Chern roots.

    With ``levi=True`` the gauge part only subtracts the block-diagonal
    ``Hom(V'_i, V'_i) + Hom(V''_i, V''_i)``, giving the polarization of the
    partially abelianized variety attached to the splitting.
    """
    pol = pol or default_polarization(q)
    out = KClass()
    if levi:
        sec = sectors(q, d)
        Vs = [sec.V1(i) + sec.V2(i) for i in range(q.n)]
        gauge = [KClass.hom(sec.V1(i), sec.V1(i)) + KClass.hom(sec.V2(i), sec.V2(i)) for i in range(q.n)]
    else:
        Vs = [bundle(roots(q, i, d.v[i])) for i in range(q.n)]
        gauge = [KClass.hom(V, V) for V in Vs]
    for i in range(q.n):
        W = bundle(framing_names(d, i))
        if pol == INSTANTON:
            if q.kind != JORDAN:
                raise UnsupportedQuiver("the instanton polarization needs the Jordan quiver")
            out = out + KClass.hom(W, Vs[i]) + KClass.hom(Vs[i], Vs[i]) * R1
        else:
            out = out + KClass.hom(Vs[i], W)
        out = out - gauge[i]
    if pol != INSTANTON:
        for s, t in q.edges():
            out = out + KClass.hom(Vs[s], Vs[t])
    return out


def tangent(q: Quiver, d: DimData, pol: str | None = None) -> KClass:
    half = polarization(q, d, pol)
    return half + half.dual() * H_INV


def class_N_hat_j(q: Quiver, d: DimData, pol: str | None = None) -> KClass:
    """Normal bundle of the attracting set of M(v',w') x M(v'',w'') in the refinement."""
    pol = pol or default_polarization(q)
    sec = sectors(q, d)
    out = KClass()
    for i in range(q.n):
        V1, V2, W1, W2 = sec.V1(i), sec.V2(i), sec.W1(i), sec.W2(i)
        if pol == INSTANTON:
            out = (
                out
                + KClass.hom(V1, V2) * R1
                + KClass.hom(W1, V2)
                + KClass.hom(V1, V2) * R2
                + KClass.hom(V1, W2) * H_INV
            )
        else:
            out = out + KClass.hom(V1, W2) + KClass.hom(W1, V2) * H_INV
    if pol != INSTANTON:
        for s, t in q.edges():
            out = out + KClass.hom(sec.V1(s), sec.V2(t)) + KClass.hom(sec.V1(t), sec.V2(s)) * H_INV
    return out


def class_frak_N(q: Quiver, d: DimData) -> KClass:
    """Nilpotent radical of the standard parabolic: Hom(V''_i, V'_i)."""
    sec = sectors(q, d)
    out = KClass()
    for i in range(q.n):
        out = out + KClass.hom(sec.V2(i), sec.V1(i))
    return out


def shift_difference(q: Quiver, d: DimData, pol: str | None = None) -> KClass:
    """Right-hand side whose solution Delta fixes the Kaehler shifts."""
    frak = class_frak_N(q, d)
    s = d.require_split()
    d1 = DimData(s.v1, s.w1)
    d2 = DimData(s.v2, s.w2)
    sec = sectors(q, d)
    # rename the second factor's roots/framings into the double-primed sector
    ren: dict[str, Monomial] = {}
    for i in range(q.n):
        for k, name in enumerate(sec.t2[i], start=1):
            ren[root_name(q, i, k)] = Monomial.var(name)
        for j, name in enumerate(sec.a2[i]):
            ren[framing_names(d2, i)[j]] = Monomial.var(name)
    ren1: dict[str, Monomial] = {}
    for i in range(q.n):
        for j, name in enumerate(sec.a1[i]):
            ren1[framing_names(d1, i)[j]] = Monomial.var(name)
    t_prime = polarization(q, d1, pol).substitute(ren1)
    t_second = polarization(q, d2, pol).substitute(ren)
    return (
        polarization(q, d, pol, levi=True)
        + frak.dual() * H_INV
        - frak
        - t_prime
        - t_second
        - class_N_hat_j(q, d, pol)
    )


def _h_doubled(m: Monomial) -> int:
    return m.doubled("h")


def _leading_sign(m: Monomial, prefix: str) -> int:
    for k, v in m.items:
        if k.startswith(prefix) and v != 0:
            return 1 if v > 0 else -1
    return 0


def _prefer(m: Monomial, p: Monomial) -> bool:
    """Whether ``m`` (rather than its partner ``h^-1 m^-1``) goes into Delta."""
    if _h_doubled(m) != _h_doubled(p):
        return _h_doubled(m) > _h_doubled(p)
    for prefix in ("t", "a", "b"):
        s = _leading_sign(m, prefix)
        if s:
            return s > 0
    return m < p


def solve_delta(diff: KClass, sectors_by_kahler: Mapping[str, Sequence[str]] = {}) -> tuple[KClass, dict[str, Fraction]]:
    """Find Delta with Delta - h^-1 Delta^dual = diff and read off Kaehler shifts.

    ``sectors_by_kahler`` maps a Kaehler variable to the Chern roots of its
    sector; the shift exponent ``e`` (meaning ``z -> z h^e``) is minus the
    per-root degree of det Delta in that sector.
    """
    remaining = dict(diff.items())
    delta: dict[Monomial, int] = {}
    for m in sorted(remaining):
        c = remaining.get(m, 0)
        if c == 0:
            continue
        p = (m * H).inverse()
        if p == m:
            raise UnpairableClass(f"self-dual character {m} cannot appear in Delta - h^-1 Delta^dual")
        if remaining.get(p, 0) != -c:
            raise UnpairableClass(f"{m} (mult {c}) has no partner {p} with multiplicity {-c}")
        if _prefer(m, p):
            delta[m] = delta.get(m, 0) + c
        else:
            delta[p] = delta.get(p, 0) - c
        remaining[m] = 0
        remaining[p] = 0
    result = KClass(delta)
    det = result.det()
    shifts: dict[str, Fraction] = {}
    for z, names in sectors_by_kahler.items():
        degrees = {det.exponent(n) for n in names}
        if len(degrees) > 1:
            raise UnpairableClass(f"det Delta is not a power of det V in the {z} sector")
        shifts[z] = -degrees.pop() if degrees else Fraction(0)
    return result, shifts


# ---------------------------------------------------------------------------
# fixed points
# ---------------------------------------------------------------------------
def partitions(n: int, maximum: int | None = None) -> Iterator[tuple[int, ...]]:
    """Partitions of n in reverse lexicographic order."""
    if n == 0:
        yield ()
        return
    maximum = n if maximum is None else maximum
    for first in range(min(n, maximum), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


@dataclass(frozen=True)
class FixedPoint:
    kind: str
    data: tuple

    def __post_init__(self):
        if self.kind == A1:
            data = tuple(int(x) for x in self.data)
            if list(data) != sorted(set(data)) or any(x < 1 for x in data):
                raise ValueError(f"A1 fixed point must be a strictly increasing subset, got {self.data}")
        elif self.kind == JORDAN:
            data = tuple(tuple(int(x) for x in lam) for lam in self.data)
            for lam in data:
                if any(x <= 0 for x in lam) or list(lam) != sorted(lam, reverse=True):
                    raise InvalidPartitionTuple(f"{lam} is not a partition")
        else:
            raise UnsupportedQuiver(self.kind)
        object.__setattr__(self, "data", data)

    @property
    def v(self) -> int:
        return len(self.data) if self.kind == A1 else sum(sum(lam) for lam in self.data)

    def label(self) -> str:
        if self.kind == A1:
            return "{" + ",".join(map(str, self.data)) + "}"
        return "(" + ",".join("(" + ",".join(map(str, lam)) + ")" for lam in self.data) + ")"

    def to_json(self):
        return list(self.data) if self.kind == A1 else [list(lam) for lam in self.data]

    def __str__(self):
        return self.label()


def subset(*elements: int) -> FixedPoint:
    return FixedPoint(A1, tuple(elements))


def partition_tuple(*lams: Sequence[int]) -> FixedPoint:
    return FixedPoint(JORDAN, tuple(tuple(lam) for lam in lams))


def enumerate_fixed_points(kind: str, v: int, w: int) -> list[FixedPoint]:
    if kind == A1:
        return [FixedPoint(A1, c) for c in itertools.combinations(range(1, w + 1), v)]
    if kind == JORDAN:
        out = []
        for sizes in _compositions(v, w):
            for lams in itertools.product(*(list(partitions(s)) for s in sizes)):
                out.append(FixedPoint(JORDAN, lams))
        return out
    raise UnsupportedQuiver(f"fixed points are only enumerated for A1 and the Jordan quiver, not {kind!r}")


def _compositions(v: int, w: int) -> Iterator[tuple[int, ...]]:
    if w == 0:
        if v == 0:
            yield ()
        return
    for first in range(v, -1, -1):
        for rest in _compositions(v - first, w - 1):
            yield (first,) + rest


def box_weight(row: int, col: int) -> Monomial:
    """Character of the box (row, col) (0-based) relative to its framing."""
    return R1 ** (-col) * R2 ** (-row)


def fixed_point_roots(f: FixedPoint) -> list[Monomial]:
    """Chern roots of V restricted to f, in the order t1, t2, ..."""
    if f.kind == A1:
        return [Monomial.var(f"a{j}") for j in f.data]
    out = []
    for j, lam in enumerate(f.data, start=1):
        a = Monomial.var(f"a{j}")
        for r, length in enumerate(lam):
            for c in range(length):
                out.append(a * box_weight(r, c))
    return out


def root_bindings(f: FixedPoint) -> dict[str, Monomial]:
    return {f"t{k}": m for k, m in enumerate(fixed_point_roots(f), start=1)}


def validate_fixed_point(f: FixedPoint, v: int, w: int) -> None:
    if f.kind == A1:
        if len(f.data) != v or any(x > w for x in f.data):
            raise RankMismatch(f"{f} is not a fixed point of T*Gr({v},{w})")
    else:
        if len(f.data) != w or f.v != v:
            raise RankMismatch(f"{f} is not a fixed point of M({v},{w})")


def restrict_class(c: KClass, f: FixedPoint) -> KClass:
    """Restrict a class in Chern roots t1..tv to the fixed point f."""
    v = f.v
    for name in c.variables():
        if name.startswith("t"):
            try:
                k = int(name[1:])
            except ValueError:
                raise UnsupportedQuiver(f"unexpected Chern root {name!r} for a one-vertex quiver") from None
            if k > v:
                raise RankMismatch(f"class mentions {name} but the fixed point has rank {v}")
    return c.substitute(root_bindings(f))


# ---------------------------------------------------------------------------
# chambers
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Chamber:
    """Ordering a_{perm[0]} >> a_{perm[1]} >> ... plus the B-factor convention."""

    perm: tuple[int, ...]
    instanton: bool = False
    b_sign: int = 1
    _rank: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        perm = tuple(int(x) for x in self.perm)
        if sorted(perm) != list(range(1, len(perm) + 1)):
            raise ValueError(f"{self.perm} is not a permutation of 1..{len(perm)}")
        if self.b_sign not in (1, -1):
            raise ValueError("b_sign must be +1 or -1")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "_rank", {f"a{j}": r for r, j in enumerate(perm)})

    @classmethod
    def identity(cls, w: int, instanton: bool = False, b_sign: int = 1) -> "Chamber":
        return cls(tuple(range(1, w + 1)), instanton, b_sign)

    def is_identity(self) -> bool:
        return self.perm == tuple(range(1, len(self.perm) + 1))

    def reversed(self) -> "Chamber":
        return Chamber(tuple(reversed(self.perm)), self.instanton, -self.b_sign)

    def sign(self, m: Monomial) -> int:
        """+1 attracting, -1 repelling, 0 fixed."""
        best = None
        for k, d in m.items:
            r = self._rank.get(k)
            if r is not None and (best is None or r < best[0]):
                best = (r, d)
        if best is not None:
            return 1 if best[1] > 0 else -1
        if self.instanton:
            d = m.doubled("b")
            if d:
                return 1 if d * self.b_sign > 0 else -1
        return 0


def split_attracting(c: KClass, ch: Chamber) -> tuple[KClass, KClass, KClass]:
    parts: tuple[dict, dict, dict] = ({}, {}, {})
    for m, k in c.items():
        parts[{1: 0, 0: 1, -1: 2}[ch.sign(m)]][m] = k
    return KClass(parts[0]), KClass(parts[1]), KClass(parts[2])
