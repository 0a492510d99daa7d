"""Command-line interface.

Exit codes: 0 success, 1 type error, 2 parse error, 3 verification failure,
64 usage error.  Reports go to stdout, diagnostics to stderr; --quiet keeps
stdout silent so scripts can dispatch on the exit code alone.
"""

from __future__ import annotations

import argparse
import sys

from . import bcd, sexpr
from .elaborate import ElaborationError, flatten
from .eta import format_trace, parse_trace, reduce_search, verify_trace
from .parser import ParseError, parse_expr, parse_type
from .printer import pretty_expr, pretty_type
from .subtyping import deep_sub, shallow_sub, sub_deriv_to_sexpr
from .typecheck import Flavor, Mode, TypeCheckError, check, synth, typing_deriv_to_sexpr

EXIT_OK = 0
EXIT_TYPE_ERROR = 1
EXIT_PARSE_ERROR = 2
EXIT_VERIFY_FAILED = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_file(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")


def _emit(args, text: str) -> None:
    if not getattr(args, "quiet", False):
        print(text)


def _flavor(name: str) -> Flavor:
    return Flavor.DEEP if name == "deep" else Flavor.SHALLOW


def _mode_args(args) -> tuple:
    if args.mode == "check":
        if args.type is None:
            raise UsageError("--type is required with --mode check")
        return Mode.CHECK, parse_type(args.type)
    if args.type is not None:
        raise UsageError("--type is only meaningful with --mode check")
    return Mode.SYNTH, None


def _cmd_check(args) -> int:
    e = parse_expr(_read_file(args.file))
    mode, against = _mode_args(args)
    flavor = _flavor(args.system)
    if mode is Mode.CHECK:
        deriv = check(flavor, (), e, against)
        _emit(args, "ok")
    else:
        ty, deriv = synth(flavor, (), e)
        _emit(args, pretty_type(ty))
    if args.emit_deriv:
        _emit(args, typing_deriv_to_sexpr(deriv))
    return EXIT_OK


def _cmd_sub(args) -> int:
    a = parse_type(args.left)
    b = parse_type(args.right)
    if args.system == "deep":
        deriv = deep_sub(a, b)
        _emit(args, "yes" if deriv is not None else "no")
        if deriv is not None and args.emit_deriv:
            _emit(args, sub_deriv_to_sexpr(deriv))
    else:
        _emit(args, "yes" if shallow_sub(a, b) else "no")
    return EXIT_OK


def _cmd_flatten(args) -> int:
    e = parse_expr(_read_file(args.file))
    mode, against = _mode_args(args)
    result = flatten(
        (),
        e,
        mode,
        against,
        minimize=args.minimize_coercions,
        self_verify=not args.no_self_verify,
    )
    program = pretty_expr(result.output)
    if args.output is not None:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(program + "\n")
    else:
        _emit(args, program)
    if args.emit_trace is not None:
        with open(args.emit_trace, "w", encoding="utf-8") as handle:
            handle.write(format_trace(result.trace))
    print(f"type: {pretty_type(result.type)}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args) -> int:
    original = parse_expr(_read_file(args.original))
    flattened = parse_expr(_read_file(args.flattened))
    # conjunct one: the flattened program checks under shallow subtyping
    try:
        if args.type is not None:
            check(Flavor.SHALLOW, (), flattened, parse_type(args.type))
        else:
            synth(Flavor.SHALLOW, (), flattened)
    except TypeCheckError as exc:
        print(f"verification failed: shallow check: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    # conjunct two: the flattened program eta-reduces to the original
    if args.trace is not None:
        trace = parse_trace(_read_file(args.trace))
        ok = verify_trace(flattened, trace, original)
    else:
        ok = reduce_search(flattened, original, args.search_fuel) is not None
    if not ok:
        print("verification failed: no eta-reduction to the original", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    _emit(args, "ok")
    return EXIT_OK


def _cmd_bcd(args) -> int:
    if args.bcd_command == "check-sub":
        deriv = bcd.sub_deriv_from_sexpr(sexpr.loads(_read_file(args.file)))
        lhs, rhs = bcd.check_bcd_sub(deriv)
        _emit(args, f"{bcd.pretty_bcd_type(lhs)} <: {bcd.pretty_bcd_type(rhs)}")
        return EXIT_OK
    if args.bcd_command == "check-typing":
        deriv = bcd.typing_deriv_from_sexpr(_read_file(args.file))
        system, basis, subject, ty = bcd.check_bcd_typing(deriv)
        ctx = ", ".join(f"{x} : {bcd.pretty_bcd_type(t)}" for x, t in basis)
        turnstile = "|-" if system is bcd.System.EXTENDED else "|-*"
        _emit(args, f"{ctx or '.'} {turnstile} {sexpr.dumps(bcd.term_to_sexpr(subject))} : {bcd.pretty_bcd_type(ty)}")
        return EXIT_OK
    if args.bcd_command == "flatten":
        deriv = bcd.typing_deriv_from_sexpr(_read_file(args.file))
        out = bcd.flatten_derivation(deriv)
        bcd.check_bcd_typing(out)
        text = bcd.typing_deriv_to_sexpr(out)
        if args.output is not None:
            with open(args.output, "w", encoding="utf-8") as handle:
                handle.write(text + "\n")
        else:
            _emit(args, text)
        return EXIT_OK
    if args.bcd_command == "sub-search":
        sigma = bcd.type_from_sexpr(sexpr.loads(args.left))
        tau = bcd.type_from_sexpr(sexpr.loads(args.right))
        found = bcd.bcd_sub_search(sigma, tau, args.depth)
        if found is None:
            _emit(args, "none")
        else:
            bcd.check_bcd_sub(found)
            _emit(args, sexpr.dumps(bcd.sub_deriv_to_sexpr(found)))
        return EXIT_OK
    raise UsageError(f"unknown bcd subcommand {args.bcd_command!r}")


def _build_parser() -> _ArgumentParser:
    top = _ArgumentParser(prog="etaflat", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="typecheck a program")
    p.add_argument("file")
    p.add_argument("--system", choices=("deep", "shallow"), default="deep")
    p.add_argument("--mode", choices=("synth", "check"), default="synth")
    p.add_argument("--type", default=None)
    p.add_argument("--emit-deriv", action="store_true")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(run=_cmd_check)

    p = sub.add_parser("sub", help="query the subtyping relations")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--system", choices=("deep", "shallow"), default="deep")
    p.add_argument("--emit-deriv", action="store_true")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(run=_cmd_sub)

    p = sub.add_parser("flatten", help="rewrite a deep-subtyping program for the shallow system")
    p.add_argument("file")
    p.add_argument("--mode", choices=("synth", "check"), default="synth")
    p.add_argument("--type", default=None)
    p.add_argument("--minimize-coercions", action="store_true")
    p.add_argument("--emit-trace", metavar="FILE", default=None)
    p.add_argument("-o", "--output", metavar="FILE", default=None)
    p.add_argument("--no-self-verify", action="store_true")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(run=_cmd_flatten)

    p = sub.add_parser("verify", help="check a flattened program against its original")
    p.add_argument("original")
    p.add_argument("flattened")
    p.add_argument("--trace", metavar="FILE", default=None)
    p.add_argument("--search-fuel", type=int, default=None)
    p.add_argument("--type", default=None)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(run=_cmd_verify)

    p = sub.add_parser("bcd", help="intersection-type proof kernel")
    bcd_sub = p.add_subparsers(dest="bcd_command", required=True)
    q = bcd_sub.add_parser("check-sub")
    q.add_argument("file")
    q.add_argument("--quiet", action="store_true")
    q.set_defaults(run=_cmd_bcd)
    q = bcd_sub.add_parser("check-typing")
    q.add_argument("file")
    q.add_argument("--quiet", action="store_true")
    q.set_defaults(run=_cmd_bcd)
    q = bcd_sub.add_parser("flatten")
    q.add_argument("file")
    q.add_argument("-o", "--output", metavar="FILE", default=None)
    q.add_argument("--quiet", action="store_true")
    q.set_defaults(run=_cmd_bcd)
    q = bcd_sub.add_parser("sub-search")
    q.add_argument("left")
    q.add_argument("right")
    q.add_argument("--depth", type=int, default=4)
    q.add_argument("--quiet", action="store_true")
    q.set_defaults(run=_cmd_bcd)

    return top


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "verify":
            if (args.trace is None) == (args.search_fuel is None):
                raise UsageError("give exactly one of --trace or --search-fuel")
        return args.run(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except sexpr.SexprError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except ValueError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except TypeCheckError as exc:
        print(f"type error: {exc}", file=sys.stderr)
        return EXIT_TYPE_ERROR
    except (bcd.BcdSubError, bcd.BcdTypingError, bcd.BcdError) as exc:
        print(f"type error: {exc}", file=sys.stderr)
        return EXIT_TYPE_ERROR
    except ElaborationError as exc:
        print(f"self-verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED


if __name__ == "__main__":
    sys.exit(main())
