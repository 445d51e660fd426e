"""Command-line interface: ``ellshuffle {theta,stab,verify,oracle}``.

Exit codes: 0 success / all checks pass, 1 a check failed, 2 unparsable
input, 3 evaluation error, 4 unsupported case.

Assignments on the command line follow the library convention: a value
given for a variable ``v`` is the value of ``v^(1/2)``.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import errors as E
from .quiver import A1, JORDAN, Chamber, FixedPoint
from .shuffle import StabTable, build_table, fixed_point_key, grassmannian_stab, instanton_stab, normalize_kind
from .theta import DEFAULT_Q, DEFAULT_TRUNC, EllipticParams, parse_complex, theta
from .verify import CHECKS, run_checks

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_EVAL, EXIT_UNSUPPORTED = 0, 1, 2, 3, 4

PARSE_ERRORS = (E.InvalidFixedPoint, E.InvalidPartitionTuple, E.InvalidSplitting, json.JSONDecodeError)
UNSUPPORTED_ERRORS = (E.UnsupportedQuiver, E.UnsupportedChamber, E.ProviderLimitExceeded, E.RankExceedsOne)


class UsageError(Exception):
    pass


class EmptyVariety(Exception):
    pass


def _emit(obj, args) -> None:
    if args.json:
        print(json.dumps(obj, sort_keys=True, separators=(",", ":")))
    else:
        print(json.dumps(obj, sort_keys=True, indent=2))


def _params(args) -> EllipticParams:
    env = EllipticParams.from_env()
    try:
        q = parse_complex(args.q) if args.q is not None else env.q
        trunc = args.trunc if args.trunc is not None else env.trunc
        return EllipticParams(q, trunc)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parse_split(text: str | None) -> list[tuple[int, int]]:
    if not text:
        return []
    out = []
    for part in text.split(","):
        try:
            w1, w2 = part.split("+")
            out.append((int(w1), int(w2)))
        except ValueError:
            raise UsageError(f"cannot parse splitting {part!r}; expected e.g. 2+1") from None
    return out


def _parse_chamber(text: str | None, w: int, kind: str, b_sign: int) -> Chamber:
    instanton = kind == JORDAN
    if not text:
        return Chamber.identity(w, instanton, b_sign)
    try:
        perm = tuple(int(x) for x in text.split(","))
        return Chamber(perm, instanton, b_sign)
    except ValueError as exc:
        raise UsageError(f"bad chamber {text!r}: {exc}") from None


def _parse_fixed_point(args, kind: str) -> FixedPoint | None:
    if kind == A1 and args.fixed_point:
        try:
            return FixedPoint(A1, tuple(sorted(int(x) for x in args.fixed_point.split(","))))
        except ValueError as exc:
            raise UsageError(f"bad fixed point {args.fixed_point!r}: {exc}") from None
    if kind == JORDAN and args.partitions:
        raw = json.loads(args.partitions)
        if not isinstance(raw, list) or not all(isinstance(x, list) for x in raw):
            raise UsageError("--partitions expects a JSON list of lists, e.g. [[1],[]]")
        return FixedPoint(JORDAN, tuple(tuple(x) for x in raw))
    return None


# ---------------------------------------------------------------------------
def cmd_theta(args) -> int:
    p = _params(args)
    try:
        x = parse_complex(args.x)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    val = theta(x, p)
    _emit([val.real, val.imag], args)
    return EXIT_OK


def cmd_stab(args) -> int:
    kind = normalize_kind(args.kind)
    if kind == A1 and args.v > args.w:
        raise EmptyVariety(f"T*Gr({args.v},{args.w}) is empty")
    p = _params(args)
    ch = _parse_chamber(args.chamber, args.w, kind, args.b_sign)
    split = _parse_split(args.split)
    f = _parse_fixed_point(args, kind)
    if f is not None and not args.all:
        if kind == A1:
            e = grassmannian_stab(args.v, args.w, f, ch, split)
        else:
            e = instanton_stab(args.v, args.w, f, ch, splitting=split)
        out = e.to_json()
        if not args.json:
            print(f"# Stab {f}: {e}")
        _emit(out, args)
        return EXIT_OK
    table = build_table(kind, args.v, args.w, ch, splitting=split, p=p)
    if not args.json:
        for g, e in table.entries.items():
            print(f"# Stab {g}: {e}")
    _emit(table.to_json(), args)
    return EXIT_OK


def cmd_verify(args) -> int:
    p = _params(args)
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    for c in checks:
        if c not in CHECKS:
            raise UsageError(f"unknown check {c!r}; choose from {','.join(CHECKS)}")
    if args.from_file:
        with open(args.from_file) as fh:
            table = StabTable.from_json(json.load(fh))
    else:
        if args.kind is None or args.v is None or args.w is None:
            raise UsageError("verify needs --kind, --v and --w (or --from-file)")
        kind = normalize_kind(args.kind)
        if kind == A1 and args.v > args.w:
            raise EmptyVariety(f"T*Gr({args.v},{args.w}) is empty")
        ch = _parse_chamber(args.chamber, args.w, kind, args.b_sign)
        table = build_table(kind, args.v, args.w, ch, p=p)
    reports = run_checks(table, checks, p, args.seed)
    ok = all(r.passed for r in reports)
    out = {
        "kind": "grassmannian" if table.kind == A1 else "instanton",
        "v": table.v,
        "w": table.w,
        "b_sign": table.chamber.b_sign,
        "status": "pass" if ok else "fail",
        "failed": [r.check for r in reports if not r.passed],
        "reports": [r.to_json() for r in reports],
    }
    if not args.json:
        for r in reports:
            print(f"# {r.check:<11} {r.status}  residual={r.residual:.2e}  tol={r.tolerance:.0e}")
    _emit(out, args)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_oracle(args) -> int:
    from .oracle import derive_automorphy_spec, solve_rank1

    kind = normalize_kind(args.kind)
    p = _params(args)
    ch = Chamber.identity(1, kind == JORDAN, args.b_sign)
    spec = derive_automorphy_spec(kind, v=args.v, chamber=ch)
    leaf = solve_rank1(spec, p, args.seed)
    if not args.json:
        print(f"# leaf: {leaf}")
    _emit({"kind": args.kind, "b_sign": args.b_sign, "spec": spec.to_json(), "leaf": leaf.to_json()}, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", help=f"modulus as 're,im' or a real number (default {DEFAULT_Q}, env ELLSHUFFLE_Q)")
    common.add_argument("--trunc", type=int, help=f"theta product factors (default {DEFAULT_TRUNC}, env ELLSHUFFLE_TRUNC)")
    common.add_argument("--seed", type=int, default=0, help="64-bit sampling seed")
    common.add_argument("--json", action="store_true", help="print machine-readable JSON only")

    parser = _Parser(
        prog="ellshuffle",
        description="Elliptic stable envelopes by shuffle products. "
        "Variable assignments bind square roots: the value given for v is v^(1/2).",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("theta", parents=[common], help="evaluate theta(x)")
    p.add_argument("--x", required=True, help="argument x as 're,im' (x itself, not its square root)")
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("stab", parents=[common], help="construct envelopes")
    p.add_argument("kind", choices=["grassmannian", "instanton"])
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--fixed-point", help="subset, e.g. 1,3 (grassmannian)")
    p.add_argument("--partitions", help='partition tuple as JSON, e.g. "[[1],[]]" (instanton)')
    p.add_argument("--split", help="splitting sequence in pre-order, e.g. 2+1,1+1")
    p.add_argument("--chamber", help="permutation tau, e.g. 2,1 for a2 >> a1")
    p.add_argument("--b-sign", type=int, choices=[1, -1], default=1)
    p.add_argument("--all", action="store_true", help="emit the full table")
    p.set_defaults(func=cmd_stab)

    p = sub.add_parser("verify", parents=[common], help="run the axiom checks")
    p.add_argument("--kind", choices=["grassmannian", "instanton"])
    p.add_argument("--v", type=int)
    p.add_argument("--w", type=int)
    p.add_argument("--checks", default=",".join(CHECKS))
    p.add_argument("--chamber")
    p.add_argument("--b-sign", type=int, choices=[1, -1], default=1)
    p.add_argument("--from-file", help="verify a stored table JSON instead of building one")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", parents=[common], help="derive a rank-one leaf from its quasi-periods")
    p.add_argument("kind", choices=["grassmannian", "instanton"])
    p.add_argument("--v", type=int, default=1, choices=[0, 1])
    p.add_argument("--b-sign", type=int, choices=[1, -1], default=1)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args)
    except (UsageError, *PARSE_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except EmptyVariety as exc:
        print(f"EmptyVariety: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except UNSUPPORTED_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (E.EllShuffleError, ValueError, ZeroDivisionError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_EVAL


if __name__ == "__main__":
    sys.exit(main())
