"""Deterministic random assignments of square-root values."""
from __future__ import annotations

import cmath
import math
import random
from typing import Iterable

from .theta import EllipticParams


def log_modulus_bound(p: EllipticParams) -> float:
    """Bound on |log|x|| for every sampled variable x (not its square root)."""
    return abs(math.log(abs(p.q))) / 4


def sample_assignment(variables: Iterable[str], rng: random.Random, p: EllipticParams) -> dict[str, complex]:
    """Bind each variable's square root to a random point of a thin annulus.

    The variable itself then has |log|x|| <= |log|q|| / 4 and a uniformly
    random phase.
    """
    bound = log_modulus_bound(p)
    out = {}
    for name in sorted(variables):
        log_mod = rng.uniform(-bound, bound) / 2
        phase = rng.uniform(-math.pi, math.pi)
        out[name] = cmath.rect(math.exp(log_mod), phase)
    return out
