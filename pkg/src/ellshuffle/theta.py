"""Odd theta function and the phi kernel on E = C^*/q^Z, by truncated products."""
from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass, field
from functools import cached_property

from .errors import BranchCutProximity, PoleAtUnitArgument, ZeroArgument

DEFAULT_Q = 0.1
DEFAULT_TRUNC = 60
BRANCH_CUT_TOL = 1e-12
POLE_TOL = 1e-13


@dataclass(frozen=True)
class EllipticParams:
    """Modulus ``q`` (|q| < 1) and the number of product factors kept."""

    q: complex = DEFAULT_Q
    trunc: int = DEFAULT_TRUNC
    _powers: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        q = complex(self.q)
        if not (abs(q) < 1):
            raise ValueError(f"|q| must be < 1, got |q| = {abs(q)}")
        if int(self.trunc) != self.trunc or self.trunc < 1:
            raise ValueError(f"trunc must be a positive integer, got {self.trunc}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "trunc", int(self.trunc))
        object.__setattr__(self, "_powers", tuple(q**n for n in range(1, self.trunc + 1)))

    @cached_property
    def sqrt_q(self) -> complex:
        return cmath.sqrt(self.q)

    @classmethod
    def from_env(cls) -> "EllipticParams":
        """Defaults overridable through ELLSHUFFLE_Q (``re,im`` or real) and ELLSHUFFLE_TRUNC."""
        q = os.environ.get("ELLSHUFFLE_Q")
        trunc = os.environ.get("ELLSHUFFLE_TRUNC")
        return cls(
            q=parse_complex(q) if q else DEFAULT_Q,
            trunc=int(trunc) if trunc else DEFAULT_TRUNC,
        )


def parse_complex(text: str) -> complex:
    """Parse ``"re,im"`` or a bare real number."""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"cannot parse complex number from {text!r}")


def _check_argument(x: complex) -> complex:
    x = complex(x)
    if x == 0:
        raise ZeroArgument("theta is undefined at x = 0")
    if not (math.isfinite(x.real) and math.isfinite(x.imag)):
        raise ZeroArgument(f"theta argument is not finite: {x}")
    if x.real < 0 and abs(x.imag) <= BRANCH_CUT_TOL:
        raise BranchCutProximity(f"x = {x} lies on the branch cut of the principal square root")
    return x


def theta(x: complex, p: EllipticParams = EllipticParams()) -> complex:
    """theta(x) = (x^1/2 - x^-1/2) prod_{n=1}^{trunc} (1 - q^n x)(1 - q^n / x).

    The square root is the principal branch; arguments on the negative real
    axis are rejected rather than resolved silently.
    """
    x = _check_argument(x)
    s = cmath.sqrt(x)
    xinv = 1 / x
    value = s - 1 / s
    for qn in p._powers:
        value *= (1 - qn * x) * (1 - qn * xinv)
    return value


def phi(x: complex, y: complex, p: EllipticParams = EllipticParams()) -> complex:
    """phi(x, y) = theta(x y) / (theta(x) theta(y)); symmetric bit-for-bit."""
    x, y = sorted((complex(x), complex(y)), key=lambda c: (c.real, c.imag))
    tx, ty = theta(x, p), theta(y, p)
    if abs(tx) < POLE_TOL or abs(ty) < POLE_TOL:
        raise PoleAtUnitArgument(f"phi has a pole: |theta(x)| = {abs(tx):.3e}, |theta(y)| = {abs(ty):.3e}")
    return theta(x * y, p) / (tx * ty)
