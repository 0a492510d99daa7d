"""Bidirectional type checking, parameterized by subtyping flavor.

Synthesis (=>) rules: variables, application, annotation, projection,
integer/boolean literals, and the arithmetic operators.  Checking (<=)
rules: lambda against an arrow, pair against a product, conditional
against any type, and subsumption:

    G |- e => A    A :< B              G |- e => A    A :<: B
    ------------------ (deep)          ------------------- (shallow)
    G |- e <= B                        G |- e <= B

Operators: `+` and `-` try the integer rule first and fall back to the
rational rule; `<` and `/` are typed by the rational rule only, so integer
operands go through int :< rat subsumption.

Erasing modes (replacing => and <= with a plain colon) turns a bidirectional
derivation into a declarative one; `check_typing_deriv` validates both.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import sexpr
from .printer import pretty_expr, pretty_type
from .subtyping import SubDeriv, check_sub_deriv, deep_sub, shallow_sub, sub_deriv_to_sexpr
from .syntax import (
    Anno,
    App,
    Arr,
    BinOp,
    Bool,
    BOOL,
    BoolLit,
    Ctx,
    Expr,
    extend,
    If,
    Int,
    INT,
    IntLit,
    Lam,
    lookup,
    Op,
    Pair,
    Path,
    Prod,
    Proj,
    Rat,
    RAT,
    Type,
    Var,
)


class Mode(Enum):
    SYNTH = "=>"
    CHECK = "<="
    DECL = ":"  # colon form, produced by erase_to_declarative only


class Flavor(Enum):
    DEEP = "deep"
    SHALLOW = "shallow"


class Rule(Enum):
    VAR = "var"
    ARR_INTRO = "arr-intro"
    ARR_ELIM = "arr-elim"
    SUB = "sub"
    ANNO = "anno"
    PROD_INTRO = "prod-intro"
    PROD_ELIM = "prod-elim"
    INT_INTRO = "int-intro"
    INT_OP = "int-op"
    RAT_OP = "rat-op"
    BOOL_INTRO = "bool-intro"
    BOOL_ELIM = "bool-elim"


@dataclass(frozen=True)
class TypingDeriv:
    rule: Rule
    ctx: Ctx
    subject: Expr
    mode: Mode
    type: Type
    children: tuple = ()
    # SUB nodes carry a witness: a SubDeriv in deep flavor, the bare
    # (A, B) pair in shallow flavor.
    witness: object = None


class TypeCheckError(Exception):
    def __init__(self, kind: str, message: str, path: Path):
        where = "/".join(path) if path else "root"
        super().__init__(f"{kind} at {where}: {message}")
        self.kind = kind
        self.message = message
        self.path = path


def synth(flavor: Flavor, ctx: Ctx, e: Expr) -> tuple:
    """Synthesize a type for e; returns (type, derivation)."""
    d = _synth(flavor, ctx, e, ())
    return d.type, d


def check(flavor: Flavor, ctx: Ctx, e: Expr, b: Type) -> TypingDeriv:
    """Check e against b; returns the derivation."""
    return _check(flavor, ctx, e, b, ())


def _synth(flavor: Flavor, ctx: Ctx, e: Expr, path: Path) -> TypingDeriv:
    match e:
        case Var(x):
            ty = lookup(ctx, x)
            if ty is None:
                raise TypeCheckError("unbound-variable", f"variable {x!r} is not in scope", path)
            return TypingDeriv(Rule.VAR, ctx, e, Mode.SYNTH, ty)
        case IntLit(_):
            return TypingDeriv(Rule.INT_INTRO, ctx, e, Mode.SYNTH, INT)
        case BoolLit(_):
            return TypingDeriv(Rule.BOOL_INTRO, ctx, e, Mode.SYNTH, BOOL)
        case Anno(subject, ty):
            inner = _check(flavor, ctx, subject, ty, path + ("anno-subject",))
            return TypingDeriv(Rule.ANNO, ctx, e, Mode.SYNTH, ty, (inner,))
        case App(fn, arg):
            fd = _synth(flavor, ctx, fn, path + ("app-fn",))
            match fd.type:
                case Arr(dom, cod):
                    ad = _check(flavor, ctx, arg, dom, path + ("app-arg",))
                    return TypingDeriv(Rule.ARR_ELIM, ctx, e, Mode.SYNTH, cod, (fd, ad))
                case other:
                    raise TypeCheckError(
                        "non-arrow-application",
                        f"application head has type {pretty_type(other)}, not an arrow",
                        path,
                    )
        case Proj(k, subject):
            sd = _synth(flavor, ctx, subject, path + ("proj-subject",))
            match sd.type:
                case Prod(left, right):
                    ty = left if k == 1 else right
                    return TypingDeriv(Rule.PROD_ELIM, ctx, e, Mode.SYNTH, ty, (sd,))
                case other:
                    raise TypeCheckError(
                        "non-product-projection",
                        f"projection subject has type {pretty_type(other)}, not a product",
                        path,
                    )
        case BinOp(op, left, right):
            if op in (Op.ADD, Op.SUB):
                try:
                    ld = _check(flavor, ctx, left, INT, path + ("binop-left",))
                    rd = _check(flavor, ctx, right, INT, path + ("binop-right",))
                    return TypingDeriv(Rule.INT_OP, ctx, e, Mode.SYNTH, INT, (ld, rd))
                except TypeCheckError:
                    pass
            ld = _check(flavor, ctx, left, RAT, path + ("binop-left",))
            rd = _check(flavor, ctx, right, RAT, path + ("binop-right",))
            ty = BOOL if op is Op.LT else RAT
            return TypingDeriv(Rule.RAT_OP, ctx, e, Mode.SYNTH, ty, (ld, rd))
        case Lam(_, _) | Pair(_, _) | If(_, _, _):
            raise TypeCheckError(
                "cannot-synthesize",
                f"{type(e).__name__.lower()} needs a checking context or an annotation",
                path,
            )
    raise TypeCheckError("cannot-synthesize", f"unhandled expression {e!r}", path)


def _check(flavor: Flavor, ctx: Ctx, e: Expr, b: Type, path: Path) -> TypingDeriv:
    match e, b:
        case Lam(x, body), Arr(dom, cod):
            bd = _check(flavor, extend(ctx, x, dom), body, cod, path + ("lam-body",))
            return TypingDeriv(Rule.ARR_INTRO, ctx, e, Mode.CHECK, b, (bd,))
        case Pair(first, second), Prod(left, right):
            fd = _check(flavor, ctx, first, left, path + ("pair-1",))
            sd = _check(flavor, ctx, second, right, path + ("pair-2",))
            return TypingDeriv(Rule.PROD_INTRO, ctx, e, Mode.CHECK, b, (fd, sd))
        case If(cond, then, orelse), _:
            cd = _check(flavor, ctx, cond, BOOL, path + ("if-cond",))
            td = _check(flavor, ctx, then, b, path + ("if-then",))
            od = _check(flavor, ctx, orelse, b, path + ("if-else",))
            return TypingDeriv(Rule.BOOL_ELIM, ctx, e, Mode.CHECK, b, (cd, td, od))
        case _:
            sd = _synth(flavor, ctx, e, path)
            a = sd.type
            if flavor is Flavor.DEEP:
                witness = deep_sub(a, b)
                if witness is None:
                    raise TypeCheckError(
                        "subsumption-failure",
                        f"{pretty_type(a)} is not a deep subtype of {pretty_type(b)}",
                        path,
                    )
            else:
                if not shallow_sub(a, b):
                    raise TypeCheckError(
                        "subsumption-failure",
                        f"{pretty_type(a)} is not a shallow subtype of {pretty_type(b)}",
                        path,
                    )
                witness = (a, b)
            return TypingDeriv(Rule.SUB, ctx, e, Mode.CHECK, b, (sd,), witness)


# ---------------------------------------------------------------------------
# colon erasure


def erase_to_declarative(d: TypingDeriv) -> TypingDeriv:
    """Replace every mode with the plain colon, keeping the tree shape."""
    return TypingDeriv(
        d.rule,
        d.ctx,
        d.subject,
        Mode.DECL,
        d.type,
        tuple(erase_to_declarative(c) for c in d.children),
        d.witness,
    )


# ---------------------------------------------------------------------------
# derivation checking


class DerivError(Exception):
    def __init__(self, message: str, path: Path):
        where = "/".join(path) if path else "root"
        super().__init__(f"at {where}: {message}")
        self.path = path


def check_typing_deriv(flavor: Flavor, d: TypingDeriv) -> bool:
    try:
        validate_typing_deriv(flavor, d)
        return True
    except DerivError:
        return False


def validate_typing_deriv(flavor: Flavor, d: TypingDeriv) -> None:
    """Raise DerivError (with a path) unless every node instantiates its rule.

    Bidirectional derivations are validated against the mode-annotated rules;
    colon-erased ones against the declarative rules (same shapes, no mode
    constraints, plus the declarative integer rule for `<`).
    """
    _validate(flavor, d, d.mode is Mode.DECL, ())


def _expect(cond: bool, message: str, path: Path) -> None:
    if not cond:
        raise DerivError(message, path)


def _validate(flavor: Flavor, d: TypingDeriv, decl: bool, path: Path) -> None:
    if decl:
        _expect(d.mode is Mode.DECL, "mixed declarative and bidirectional modes", path)

    def mode_is(m: Mode) -> bool:
        return decl or d.mode is m

    def child(i: int, sel: str, subject: Expr, mode: Mode, ty: Type, ctx: Ctx = None) -> None:
        c = d.children[i]
        cpath = path + (sel,)
        _expect(c.ctx == (d.ctx if ctx is None else ctx), "premise context mismatch", cpath)
        _expect(c.subject == subject, "premise subject mismatch", cpath)
        _expect(decl or c.mode is mode, f"premise mode should be {mode.value}", cpath)
        _expect(c.type == ty, "premise type mismatch", cpath)
        _validate(flavor, c, decl, cpath)

    def arity(n: int) -> None:
        _expect(len(d.children) == n, f"{d.rule.value} takes {n} premise(s)", path)

    match d.rule:
        case Rule.VAR:
            arity(0)
            _expect(isinstance(d.subject, Var), "subject must be a variable", path)
            _expect(mode_is(Mode.SYNTH), "variables synthesize", path)
            _expect(lookup(d.ctx, d.subject.name) == d.type, "type disagrees with context", path)
        case Rule.INT_INTRO:
            arity(0)
            _expect(isinstance(d.subject, IntLit), "subject must be an integer literal", path)
            _expect(mode_is(Mode.SYNTH) and d.type == INT, "integer literals synthesize int", path)
        case Rule.BOOL_INTRO:
            arity(0)
            _expect(isinstance(d.subject, BoolLit), "subject must be a boolean literal", path)
            _expect(mode_is(Mode.SYNTH) and d.type == BOOL, "boolean literals synthesize bool", path)
        case Rule.ANNO:
            arity(1)
            match d.subject:
                case Anno(subject, ty):
                    _expect(mode_is(Mode.SYNTH) and d.type == ty, "annotation synthesizes its type", path)
                    child(0, "anno-subject", subject, Mode.CHECK, ty)
                case _:
                    raise DerivError("subject must be an annotation", path)
        case Rule.ARR_INTRO:
            arity(1)
            match d.subject, d.type:
                case Lam(x, body), Arr(dom, cod):
                    _expect(mode_is(Mode.CHECK), "lambdas check", path)
                    child(0, "lam-body", body, Mode.CHECK, cod, extend(d.ctx, x, dom))
                case _:
                    raise DerivError("subject must be a lambda at an arrow type", path)
        case Rule.ARR_ELIM:
            arity(2)
            match d.subject:
                case App(fn, arg):
                    _expect(mode_is(Mode.SYNTH), "application synthesizes", path)
                    fty = d.children[0].type
                    match fty:
                        case Arr(dom, cod):
                            _expect(d.type == cod, "conclusion type is the codomain", path)
                            child(0, "app-fn", fn, Mode.SYNTH, fty)
                            child(1, "app-arg", arg, Mode.CHECK, dom)
                        case _:
                            raise DerivError("function premise must have arrow type", path)
                case _:
                    raise DerivError("subject must be an application", path)
        case Rule.PROD_INTRO:
            arity(2)
            match d.subject, d.type:
                case Pair(first, second), Prod(left, right):
                    _expect(mode_is(Mode.CHECK), "pairs check", path)
                    child(0, "pair-1", first, Mode.CHECK, left)
                    child(1, "pair-2", second, Mode.CHECK, right)
                case _:
                    raise DerivError("subject must be a pair at a product type", path)
        case Rule.PROD_ELIM:
            arity(1)
            match d.subject:
                case Proj(k, subject):
                    _expect(mode_is(Mode.SYNTH), "projection synthesizes", path)
                    sty = d.children[0].type
                    match sty:
                        case Prod(left, right):
                            _expect(d.type == (left if k == 1 else right), "conclusion is the projected component", path)
                            child(0, "proj-subject", subject, Mode.SYNTH, sty)
                        case _:
                            raise DerivError("projection premise must have product type", path)
                case _:
                    raise DerivError("subject must be a projection", path)
        case Rule.INT_OP:
            arity(2)
            match d.subject:
                case BinOp(op, left, right):
                    if decl:
                        _expect(op is not Op.DIV, "division is not an integer operator", path)
                        want = BOOL if op is Op.LT else INT
                    else:
                        _expect(op in (Op.ADD, Op.SUB), "only + and - use the integer rule here", path)
                        want = INT
                    _expect(mode_is(Mode.SYNTH) and d.type == want, "integer operator conclusion type", path)
                    child(0, "binop-left", left, Mode.CHECK, INT)
                    child(1, "binop-right", right, Mode.CHECK, INT)
                case _:
                    raise DerivError("subject must be a binary operation", path)
        case Rule.RAT_OP:
            arity(2)
            match d.subject:
                case BinOp(op, left, right):
                    want = BOOL if op is Op.LT else RAT
                    _expect(mode_is(Mode.SYNTH) and d.type == want, "rational operator conclusion type", path)
                    child(0, "binop-left", left, Mode.CHECK, RAT)
                    child(1, "binop-right", right, Mode.CHECK, RAT)
                case _:
                    raise DerivError("subject must be a binary operation", path)
        case Rule.BOOL_ELIM:
            arity(3)
            match d.subject:
                case If(cond, then, orelse):
                    _expect(mode_is(Mode.CHECK), "conditionals check", path)
                    child(0, "if-cond", cond, Mode.CHECK, BOOL)
                    child(1, "if-then", then, Mode.CHECK, d.type)
                    child(2, "if-else", orelse, Mode.CHECK, d.type)
                case _:
                    raise DerivError("subject must be a conditional", path)
        case Rule.SUB:
            arity(1)
            _expect(mode_is(Mode.CHECK), "subsumption concludes checking", path)
            premise = d.children[0]
            a, b = premise.type, d.type
            child(0, "sub-premise", d.subject, Mode.SYNTH, a)
            if flavor is Flavor.DEEP:
                if isinstance(d.witness, SubDeriv):
                    try:
                        concl = check_sub_deriv(d.witness)
                    except Exception as exc:
                        raise DerivError(f"bad subtyping witness: {exc}", path)
                    _expect(concl == (a, b), "witness concludes the wrong pair", path)
                else:
                    _expect(deep_sub(a, b) is not None, f"{pretty_type(a)} :< {pretty_type(b)} does not hold", path)
            else:
                _expect(shallow_sub(a, b), f"{pretty_type(a)} :<: {pretty_type(b)} does not hold", path)
                if isinstance(d.witness, tuple):
                    _expect(d.witness == (a, b), "shallow witness pair mismatch", path)
        case _:
            raise DerivError(f"unknown rule {d.rule!r}", path)


# ---------------------------------------------------------------------------
# serialization (emit only)


def _type_sexpr(t: Type):
    match t:
        case Int():
            return "int"
        case Rat():
            return "rat"
        case Bool():
            return "bool"
        case Arr(dom, cod):
            return ["arr", _type_sexpr(dom), _type_sexpr(cod)]
        case Prod(left, right):
            return ["prod", _type_sexpr(left), _type_sexpr(right)]
    raise TypeError(f"not a Type: {t!r}")


def typing_deriv_to_sexpr(d: TypingDeriv) -> str:
    def build(d: TypingDeriv):
        node = [d.rule.value]
        if d.rule is Rule.VAR:
            node.append(d.subject.name)
        if d.rule is Rule.SUB:
            if isinstance(d.witness, SubDeriv):
                node.append(sexpr.loads(sub_deriv_to_sexpr(d.witness)))
            else:
                a, b = d.witness
                node.append(["shallow", _type_sexpr(a), _type_sexpr(b)])
        node.extend(build(c) for c in d.children)
        return node

    return sexpr.dumps(build(d))


def describe_judgment(d: TypingDeriv) -> str:
    ctx = ", ".join(f"{x} : {pretty_type(t)}" for x, t in d.ctx)
    return f"{ctx or '.'} |- {pretty_expr(d.subject)} {d.mode.value} {pretty_type(d.type)}"
