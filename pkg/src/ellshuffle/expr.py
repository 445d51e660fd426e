"""Theta-quotient expressions over Laurent monomials with half-integer exponents.

A :class:`Monomial` stores *doubled* exponents so that ``h^{-1/2}`` is exact.
A :class:`ThetaExpr` is a sum of terms ``coef * prod theta(num) / prod theta(den)``
with exact rational coefficients.  Expressions are immutable.

Numerical evaluation binds every variable ``v`` to the value of ``v^{1/2}``;
a monomial with doubled exponents ``d_v`` then evaluates to ``prod s_v^{d_v}``,
which is single valued even for half-integer powers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    MultiTermExpression,
    NonIntegralShift,
    PoleEncountered,
    UnboundVariable,
    ZeroSection,
)
from .theta import POLE_TOL, EllipticParams, theta

ZERO_SECTION_TOL = 1e-13
AUTOMORPHY_RTOL = 1e-7


class Monomial:
    """Laurent monomial ``prod v^{d_v / 2}`` in canonical form (no zero entries)."""

    __slots__ = ("_items", "_hash")

    def __init__(self, doubled: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = dict(doubled)
        for k, v in items.items():
            if int(v) != v:
                raise ValueError(f"doubled exponent of {k} must be an integer, got {v}")
        self._items = tuple(sorted((k, int(v)) for k, v in items.items() if v != 0))
        self._hash = hash(self._items)

    @classmethod
    def parse(cls, text: str) -> "Monomial":
        """Parse e.g. ``"t1*z/a1"``, ``"a2/(t1*h)"``, ``"b*h^(-1/2)"`` or ``"1"``."""
        exps = _MonomialParser(text).parse()
        doubled = {}
        for name, e in exps.items():
            if (2 * e).denominator != 1:
                raise ValueError(f"exponent {e} of {name} is not a half-integer")
            doubled[name] = int(2 * e)
        return cls(doubled)

    @classmethod
    def var(cls, name: str, power: int | Fraction = 1) -> "Monomial":
        d = 2 * Fraction(power)
        if d.denominator != 1:
            raise ValueError(f"exponent {power} is not a half-integer")
        return cls({name: int(d)})

    @property
    def items(self) -> tuple[tuple[str, int], ...]:
        return self._items

    def doubled(self, name: str) -> int:
        for k, v in self._items:
            if k == name:
                return v
        return 0

    def exponent(self, name: str) -> Fraction:
        return Fraction(self.doubled(name), 2)

    def variables(self) -> set[str]:
        return {k for k, _ in self._items}

    def is_one(self) -> bool:
        return not self._items

    def as_dict(self) -> dict[str, int]:
        return dict(self._items)

    def __mul__(self, other: "Monomial") -> "Monomial":
        d = dict(self._items)
        for k, v in other._items:
            d[k] = d.get(k, 0) + v
        return Monomial(d)

    def __truediv__(self, other: "Monomial") -> "Monomial":
        return self * other.inverse()

    def __pow__(self, n: int) -> "Monomial":
        return Monomial({k: v * n for k, v in self._items})

    def inverse(self) -> "Monomial":
        return Monomial({k: -v for k, v in self._items})

    def restrict(self, names: Iterable[str]) -> "Monomial":
        names = set(names)
        return Monomial({k: v for k, v in self._items if k in names})

    def drop(self, names: Iterable[str]) -> "Monomial":
        names = set(names)
        return Monomial({k: v for k, v in self._items if k not in names})

    def substitute(self, bindings: Mapping[str, "Monomial"]) -> "Monomial":
        out: dict[str, Fraction] = {}
        for k, v in self._items:
            if k in bindings:
                for bk, bv in bindings[k]._items:
                    out[bk] = out.get(bk, 0) + Fraction(v * bv, 2)
            else:
                out[k] = out.get(k, 0) + v
        for k, v in out.items():
            if Fraction(v).denominator != 1:
                raise ValueError(f"substitution produces exponent {Fraction(v, 2)} for {k}")
        return Monomial({k: int(v) for k, v in out.items()})

    def value(self, asn: Mapping[str, complex]) -> complex:
        out = 1 + 0j
        for k, d in self._items:
            try:
                s = asn[k]
            except KeyError:
                raise UnboundVariable(k) from None
            out *= s**d
        return out

    def __eq__(self, other):
        return isinstance(other, Monomial) and self._items == other._items

    def __lt__(self, other: "Monomial"):
        return self._items < other._items

    def __hash__(self):
        return self._hash

    def __str__(self):
        if not self._items:
            return "1"
        num, den = [], []
        for k, d in self._items:
            e = Fraction(abs(d), 2)
            s = k if e == 1 else (f"{k}^{e}" if e.denominator == 1 else f"{k}^({e})")
            (num if d > 0 else den).append(s)
        out = "*".join(num) if num else "1"
        if den:
            out += "/" + ("/".join(den))
        return out

    def __repr__(self):
        return f"Monomial({str(self)!r})"


class _MonomialParser:
    """Recursive descent over ``*``, ``/``, ``^`` and parentheses."""

    _token = re.compile(r"\s*(?:([A-Za-z_][A-Za-z_0-9']*)|(\d+)|(.))")

    def __init__(self, text: str):
        self.tokens = []
        for name, num, sym in self._token.findall(text.strip()):
            if name:
                self.tokens.append(("name", name))
            elif num:
                self.tokens.append(("num", num))
            elif sym.strip():
                self.tokens.append(("sym", sym))
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self, sym=None):
        tok = self.peek()
        if tok[0] is None or (sym is not None and tok[1] != sym):
            raise ValueError(f"unexpected token {tok[1]!r} in monomial")
        self.pos += 1
        return tok

    def parse(self) -> dict[str, Fraction]:
        if not self.tokens:
            return {}
        out = self.product()
        if self.pos != len(self.tokens):
            raise ValueError(f"trailing input {self.peek()[1]!r} in monomial")
        return out

    def product(self) -> dict[str, Fraction]:
        out = self.power()
        while self.peek() in (("sym", "*"), ("sym", "/")):
            op = self.take()[1]
            rhs = self.power()
            sign = 1 if op == "*" else -1
            for k, v in rhs.items():
                out[k] = out.get(k, Fraction(0)) + sign * v
        return out

    def power(self) -> dict[str, Fraction]:
        base = self.atom()
        if self.peek() == ("sym", "^"):
            self.take()
            e = self.exponent()
            base = {k: v * e for k, v in base.items()}
        return base

    def atom(self) -> dict[str, Fraction]:
        kind, val = self.take()
        if kind == "name":
            return {val: Fraction(1)}
        if kind == "num" and val == "1":
            return {}
        if (kind, val) == ("sym", "("):
            inner = self.product()
            self.take(")")
            return inner
        raise ValueError(f"unexpected token {val!r} in monomial")

    def exponent(self) -> Fraction:
        paren = self.peek() == ("sym", "(")
        if paren:
            self.take()
        sign = 1
        if self.peek() == ("sym", "-"):
            self.take()
            sign = -1
        kind, num = self.take()
        if kind != "num":
            raise ValueError(f"bad exponent {num!r}")
        value = Fraction(int(num))
        if paren and self.peek() == ("sym", "/"):
            self.take()
            kind, den = self.take()
            if kind != "num":
                raise ValueError(f"bad exponent denominator {den!r}")
            value /= int(den)
        if paren:
            self.take(")")
        return sign * value


def mono(text: str) -> Monomial:
    return Monomial.parse(text)


@dataclass(frozen=True)
class Term:
    coef: Fraction
    num: tuple[Monomial, ...]
    den: tuple[Monomial, ...]

    @classmethod
    def make(cls, coef, num: Iterable[Monomial] = (), den: Iterable[Monomial] = ()) -> "Term":
        num = list(num)
        den_left = []
        for m in den:
            if m in num:
                num.remove(m)
            else:
                den_left.append(m)
        return cls(Fraction(coef), tuple(sorted(num)), tuple(sorted(den_left)))

    def is_zero(self) -> bool:
        return self.coef == 0 or any(m.is_one() for m in self.num)

    def key(self):
        return (self.num, self.den, self.coef)

    def variables(self) -> set[str]:
        out = set()
        for m in self.num + self.den:
            out |= m.variables()
        return out

    def __mul__(self, other: "Term") -> "Term":
        return Term.make(self.coef * other.coef, self.num + other.num, self.den + other.den)

    def map(self, f) -> "Term":
        return Term.make(self.coef, [f(m) for m in self.num], [f(m) for m in self.den])

    def __str__(self):
        body = "*".join(f"theta({m})" for m in self.num) or "1"
        if self.den:
            body += "/(" + "*".join(f"theta({m})" for m in self.den) + ")"
        if self.coef == 1:
            return body
        if self.coef == -1:
            return "-" + body
        return f"{self.coef}*{body}"


class ThetaExpr:
    """Sum of rational multiples of theta-atom quotients.

    Canonical form cancels identical atoms between numerator and denominator
    of each term and drops terms that vanish identically (zero coefficient or
    a theta(1) factor in the numerator).  Terms are never merged: sums stay as
    written.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Term] = ()):
        canon = []
        for t in terms:
            t = Term.make(t.coef, t.num, t.den)
            if not t.is_zero():
                canon.append(t)
        self.terms: tuple[Term, ...] = tuple(canon)

    @classmethod
    def one(cls) -> "ThetaExpr":
        return cls([Term.make(1)])

    @classmethod
    def zero(cls) -> "ThetaExpr":
        return cls([])

    @classmethod
    def const(cls, c) -> "ThetaExpr":
        return cls([Term.make(c)])

    @classmethod
    def atom(cls, m: Monomial | str) -> "ThetaExpr":
        if isinstance(m, str):
            m = Monomial.parse(m)
        return cls([Term.make(1, [m])])

    @classmethod
    def quotient(cls, num: Iterable[Monomial | str] = (), den: Iterable[Monomial | str] = (), coef=1) -> "ThetaExpr":
        conv = lambda ms: [Monomial.parse(m) if isinstance(m, str) else m for m in ms]  # noqa: E731
        return cls([Term.make(coef, conv(num), conv(den))])

    def canonicalize(self) -> "ThetaExpr":
        return ThetaExpr(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> set[str]:
        out = set()
        for t in self.terms:
            out |= t.variables()
        return out

    def __add__(self, other: "ThetaExpr") -> "ThetaExpr":
        return ThetaExpr(self.terms + other.terms)

    def __neg__(self) -> "ThetaExpr":
        return ThetaExpr(Term(-t.coef, t.num, t.den) for t in self.terms)

    def __sub__(self, other: "ThetaExpr") -> "ThetaExpr":
        return self + (-other)

    def __mul__(self, other) -> "ThetaExpr":
        if not isinstance(other, ThetaExpr):
            c = Fraction(other)
            return ThetaExpr(Term(t.coef * c, t.num, t.den) for t in self.terms)
        return ThetaExpr(a * b for a in self.terms for b in other.terms)

    __rmul__ = __mul__

    def __truediv__(self, other: "ThetaExpr") -> "ThetaExpr":
        if not isinstance(other, ThetaExpr):
            return self * (1 / Fraction(other))
        if len(other.terms) != 1:
            raise MultiTermExpression("can only divide by a single-term expression")
        (t,) = other.terms
        return self * ThetaExpr([Term.make(1 / t.coef, t.den, t.num)])

    def map_monomials(self, f) -> "ThetaExpr":
        return ThetaExpr(t.map(f) for t in self.terms)

    def term_multiset(self) -> list:
        return sorted(t.key() for t in self.terms)

    def same_terms(self, other: "ThetaExpr") -> bool:
        """Term-multiset equality (order of terms ignored)."""
        return self.term_multiset() == other.term_multiset()

    def __eq__(self, other):
        return isinstance(other, ThetaExpr) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        out = " + ".join(str(t) for t in self.terms)
        return out.replace("+ -", "- ")

    def __repr__(self):
        return f"ThetaExpr({str(self)!r})"

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "terms": [
                {
                    "coef": [t.coef.numerator, t.coef.denominator],
                    "num": [m.as_dict() for m in t.num],
                    "den": [m.as_dict() for m in t.den],
                }
                for t in self.terms
            ]
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ThetaExpr":
        terms = []
        for t in data["terms"]:
            n, d = t.get("coef", [1, 1])
            terms.append(
                Term.make(
                    Fraction(int(n), int(d)),
                    [Monomial(m) for m in t.get("num", [])],
                    [Monomial(m) for m in t.get("den", [])],
                )
            )
        return cls(terms)


def substitute(e: ThetaExpr, bindings: Mapping[str, Monomial]) -> ThetaExpr:
    """Rewrite every atom multiplicatively, ``v -> bindings[v]``."""
    if not bindings:
        return e
    return e.map_monomials(lambda m: m.substitute(bindings))


def rename(e: ThetaExpr, names: Mapping[str, str]) -> ThetaExpr:
    return substitute(e, {k: Monomial.var(v) for k, v in names.items()})


def evaluate_terms(e: ThetaExpr, asn: Mapping[str, complex], p: EllipticParams = EllipticParams()) -> list[complex]:
    """Values of the individual terms of ``e`` (their sum is :func:`evaluate`)."""
    cache: dict[Monomial, complex] = {}

    def th(m: Monomial) -> complex:
        v = cache.get(m)
        if v is None:
            v = cache[m] = theta(m.value(asn), p)
        return v

    out = []
    for i, t in enumerate(e.terms):
        val = complex(t.coef)
        for m in t.num:
            val *= th(m)
        for m in t.den:
            d = th(m)
            if abs(d) < POLE_TOL:
                raise PoleEncountered(m, i, abs(d))
            val /= d
        out.append(val)
    return out


def evaluate(e: ThetaExpr, asn: Mapping[str, complex], p: EllipticParams = EllipticParams()) -> complex:
    return sum(evaluate_terms(e, asn, p), 0j)


@dataclass(frozen=True)
class Automorphy:
    """Factor ``sign * q^{q_power} * monomial`` picked up under ``var -> q^power var``."""

    monomial: Monomial
    q_power: Fraction
    sign: int

    def value(self, asn: Mapping[str, complex], p: EllipticParams = EllipticParams()) -> complex:
        qp = 2 * self.q_power
        assert qp.denominator == 1
        return self.sign * p.sqrt_q ** int(qp) * self.monomial.value(asn)

    def __mul__(self, other: "Automorphy") -> "Automorphy":
        return Automorphy(self.monomial * other.monomial, self.q_power + other.q_power, self.sign * other.sign)

    def inverse(self) -> "Automorphy":
        return Automorphy(self.monomial.inverse(), -self.q_power, self.sign)

    def __truediv__(self, other: "Automorphy") -> "Automorphy":
        return self * other.inverse()

    def __str__(self):
        s = "-" if self.sign < 0 else ""
        return f"{s}q^({self.q_power})*{self.monomial}"


TRIVIAL_AUTOMORPHY = Automorphy(Monomial(), Fraction(0), 1)


def atom_automorphy(m: Monomial, var: str, power: int = 1) -> Automorphy:
    """theta(q^k m) = (-1)^k q^{-k^2/2} m^{-k} theta(m), k = power * exponent of var."""
    k = power * m.exponent(var)
    if k.denominator != 1:
        raise NonIntegralShift(f"shifting {var} by q^{power} moves theta({m}) by q^{k}")
    k = int(k)
    return Automorphy(m ** (-k), Fraction(-k * k, 2), -1 if k % 2 else 1)


def symbolic_automorphy(e: ThetaExpr, var: str, power: int = 1) -> Automorphy:
    """Exact automorphy factor of a single-term expression under ``var -> q^power var``."""
    if len(e.terms) != 1:
        raise MultiTermExpression(f"expected one term, got {len(e.terms)}")
    (t,) = e.terms
    out = TRIVIAL_AUTOMORPHY
    for m in t.num:
        out = out * atom_automorphy(m, var, power)
    for m in t.den:
        out = out / atom_automorphy(m, var, power)
    return out


@dataclass
class AutomorphyMeasurement:
    factors: list[complex]
    normalized: list[complex]
    consistent: bool
    spread: float


def shifted(asn: Mapping[str, complex], var: str, p: EllipticParams, power: int = 1) -> dict[str, complex]:
    out = dict(asn)
    if var not in out:
        raise UnboundVariable(var)
    out[var] = out[var] * p.sqrt_q**power
    return out


def measure_automorphy(
    e: ThetaExpr,
    var: str,
    samples: Sequence[Mapping[str, complex]],
    p: EllipticParams = EllipticParams(),
    predicted: Automorphy | None = None,
    power: int = 1,
    rtol: float = AUTOMORPHY_RTOL,
) -> AutomorphyMeasurement:
    """Numerically measure e(q^power var) / e(var) at each sample.

    The ratios, divided by ``predicted`` when given, must agree to ``rtol``
    for the measurement to count as consistent.
    """
    if len(samples) < 2:
        raise ValueError("measure_automorphy needs at least two samples")
    factors, normalized = [], []
    for asn in samples:
        base = evaluate(e, asn, p)
        if abs(base) < ZERO_SECTION_TOL:
            raise ZeroSection(f"|e| = {abs(base):.3e} at sample {dict(asn)}")
        ratio = evaluate(e, shifted(asn, var, p, power), p) / base
        factors.append(ratio)
        normalized.append(ratio / predicted.value(asn, p) if predicted is not None else ratio)
    ref = normalized[0]
    scale = max(abs(x) for x in normalized)
    spread = max(abs(x - ref) for x in normalized) / scale if scale else 0.0
    return AutomorphyMeasurement(factors, normalized, spread <= rtol, spread)
