"""Elliptic stable envelopes of Nakajima quiver varieties via shuffle products."""
from .expr import Monomial, ThetaExpr, evaluate, mono, substitute
from .quiver import Chamber, FixedPoint, KClass, enumerate_fixed_points
from .shuffle import StabTable, build_table, grassmannian_stab, instanton_stab
from .theta import EllipticParams, phi, theta

__all__ = [
    "Chamber",
    "EllipticParams",
    "FixedPoint",
    "KClass",
    "Monomial",
    "StabTable",
    "ThetaExpr",
    "build_table",
    "enumerate_fixed_points",
    "evaluate",
    "grassmannian_stab",
    "instanton_stab",
    "mono",
    "phi",
    "substitute",
    "theta",
]
