"""Elaboration: rewrite deep-subtyping programs into shallow-subtyping ones.

`expand_subtype` turns a deep subtyping derivation d : A :< B into a purely
syntactic coercion of e (type A) to type B, built from eta-expansions only,
together with a trace reducing the coercion back to e:

    atomic leaf        ->  e itself, empty trace
    arrow  (d1, d2)    ->  \\x. expand(e expand(x, d1), d2)   + final arrow step
    product(d1, d2)    ->  (expand(e.1, d1), expand(e.2, d2)) + final product step

`flatten` runs the deep bidirectional checker, rebuilds the derivation
bottom-up, and applies expand_subtype at every deep subsumption node.  The
result checks under the shallow system at the same type and eta-reduces to
the original program via the emitted trace; both facts are re-verified on
every run.
"""

from __future__ import annotations

from dataclasses import dataclass

from .eta import EtaRule, EtaStep, EtaTrace, prefix_trace, verify_trace
from .subtyping import SubDeriv, SubRule, check_sub_deriv, mentions_int_rat
from .syntax import (
    all_idents,
    Anno,
    App,
    BinOp,
    Ctx,
    Expr,
    free_vars,
    FreshSupply,
    If,
    Lam,
    Pair,
    Proj,
    Type,
    Var,
)
from . import typecheck as tc
from .typecheck import Flavor, Mode, Rule, TypingDeriv


@dataclass(frozen=True)
class ElabResult:
    output: Expr
    type: Type
    trace: EtaTrace  # reduces output back to the source program
    deriv: TypingDeriv  # shallow-flavor derivation for output


class ElaborationError(Exception):
    """Internal bug guard: the rewritten program failed self-verification."""


def expand_subtype(e: Expr, d: SubDeriv, avoid) -> tuple:
    """Coerce e along d by eta-expansion; returns (output, trace) with the
    trace reducing output to e.  Requires d valid and avoid >= free_vars(e)."""
    check_sub_deriv(d)
    missing = free_vars(e) - set(avoid)
    if missing:
        raise ValueError(f"avoid set is missing free variables: {sorted(missing)}")
    return _expand(e, d, FreshSupply(avoid), minimize=False)


def _expand(e: Expr, d: SubDeriv, fresh: FreshSupply, minimize: bool) -> tuple:
    if minimize and not mentions_int_rat(d):
        # pure-reflexivity derivation: A = B, the coercion is the identity
        return e, ()
    if d.rule is SubRule.ARR:
        dom, cod = d.children
        x = fresh.fresh()
        arg, arg_trace = _expand(Var(x), dom, fresh, minimize)
        body, body_trace = _expand(App(e, arg), cod, fresh, minimize)
        # \x. body  ->>  \x. e arg  ->>  \x. e x  ->  e
        trace = (
            prefix_trace(("lam-body",), body_trace)
            + prefix_trace(("lam-body", "app-arg"), arg_trace)
            + (EtaStep((), EtaRule.ARR),)
        )
        return Lam(x, body), trace
    if d.rule is SubRule.PROD:
        left, right = d.children
        first, first_trace = _expand(Proj(1, e), left, fresh, minimize)
        second, second_trace = _expand(Proj(2, e), right, fresh, minimize)
        trace = (
            prefix_trace(("pair-1",), first_trace)
            + prefix_trace(("pair-2",), second_trace)
            + (EtaStep((), EtaRule.PROD),)
        )
        return Pair(first, second), trace
    # atomic leaf: identity
    return e, ()


def flatten(
    ctx: Ctx,
    e: Expr,
    mode: Mode,
    against: Type | None = None,
    minimize: bool = False,
    self_verify: bool = True,
) -> ElabResult:
    """Typecheck e under deep subtyping, then rewrite it to check under
    shallow subtyping at the same type.  Deep checker errors propagate."""
    if (against is None) != (mode is Mode.SYNTH):
        raise ValueError("against must be given exactly when mode is CHECK")
    if mode is Mode.CHECK:
        deriv = tc.check(Flavor.DEEP, ctx, e, against)
        ty = against
    else:
        ty, deriv = tc.synth(Flavor.DEEP, ctx, e)

    fresh = FreshSupply(all_idents(e) | {name for name, _ in ctx})
    output, trace = _elab(deriv, fresh, minimize)

    if mode is Mode.CHECK:
        shallow = tc.check(Flavor.SHALLOW, ctx, output, ty)
    else:
        got, shallow = tc.synth(Flavor.SHALLOW, ctx, output)
        if got != ty:
            raise ElaborationError(f"shallow system assigned a different type: {got!r}")
    if self_verify and not verify_trace(output, trace, e):
        raise ElaborationError("emitted trace does not reduce the output to the source")
    return ElabResult(output, ty, trace, shallow)


def _elab(d: TypingDeriv, fresh: FreshSupply, minimize: bool) -> tuple:
    """Rebuild the subject of d bottom-up, expanding at subsumption nodes.
    Returns (output, trace) with output ->>eta subject."""
    match d.rule:
        case Rule.VAR | Rule.INT_INTRO | Rule.BOOL_INTRO:
            return d.subject, ()
        case Rule.SUB:
            inner, inner_trace = _elab(d.children[0], fresh, minimize)
            witness = d.witness
            if minimize and not mentions_int_rat(witness):
                return inner, inner_trace
            expanded, coercion_trace = _expand(inner, witness, fresh, minimize)
            # expanded ->> inner ->> subject
            return expanded, coercion_trace + inner_trace
        case Rule.ARR_INTRO:
            body, t = _elab(d.children[0], fresh, minimize)
            return Lam(d.subject.binder, body), prefix_trace(("lam-body",), t)
        case Rule.ARR_ELIM:
            fn, tf = _elab(d.children[0], fresh, minimize)
            arg, ta = _elab(d.children[1], fresh, minimize)
            return App(fn, arg), prefix_trace(("app-fn",), tf) + prefix_trace(("app-arg",), ta)
        case Rule.ANNO:
            inner, t = _elab(d.children[0], fresh, minimize)
            return Anno(inner, d.subject.type), prefix_trace(("anno-subject",), t)
        case Rule.PROD_INTRO:
            first, t1 = _elab(d.children[0], fresh, minimize)
            second, t2 = _elab(d.children[1], fresh, minimize)
            return Pair(first, second), prefix_trace(("pair-1",), t1) + prefix_trace(("pair-2",), t2)
        case Rule.PROD_ELIM:
            inner, t = _elab(d.children[0], fresh, minimize)
            return Proj(d.subject.index, inner), prefix_trace(("proj-subject",), t)
        case Rule.INT_OP | Rule.RAT_OP:
            left, tl = _elab(d.children[0], fresh, minimize)
            right, tr = _elab(d.children[1], fresh, minimize)
            return (
                BinOp(d.subject.op, left, right),
                prefix_trace(("binop-left",), tl) + prefix_trace(("binop-right",), tr),
            )
        case Rule.BOOL_ELIM:
            cond, tc_ = _elab(d.children[0], fresh, minimize)
            then, tt = _elab(d.children[1], fresh, minimize)
            orelse, to = _elab(d.children[2], fresh, minimize)
            trace = (
                prefix_trace(("if-cond",), tc_)
                + prefix_trace(("if-then",), tt)
                + prefix_trace(("if-else",), to)
            )
            return If(cond, then, orelse), trace
    raise ElaborationError(f"unhandled rule {d.rule!r}")


def minimize(result: ElabResult, ctx: Ctx = ()) -> ElabResult:
    """Re-elaborate, dropping expansions whose witness is pure reflexivity.
    The source program is recovered by replaying the result's own trace."""
    from .eta import apply_trace

    source = apply_trace(result.output, result.trace)
    mode = result.deriv.mode
    against = result.type if mode is Mode.CHECK else None
    return flatten(ctx, source, mode, against, minimize=True)
