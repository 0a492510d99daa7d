"""Pretty-printers.  Output reparses to the identical AST, with minimal
parentheses under the grammar's precedence table."""

from __future__ import annotations

from .syntax import (
    Anno,
    App,
    Arr,
    BinOp,
    Bool,
    BoolLit,
    Expr,
    If,
    Int,
    IntLit,
    Lam,
    Op,
    Pair,
    Prod,
    Proj,
    Rat,
    Type,
    Var,
)

# precedence levels; a node whose level is below the context's gets parens
_ANNO = _LAM = _IF = 0
_CMP = 1
_ADD = 2
_MUL = 3
_APP = 4
_ATOM = 5


def pretty_type(t: Type) -> str:
    def go(t: Type, level: int) -> str:
        match t:
            case Int():
                return "int"
            case Rat():
                return "rat"
            case Bool():
                return "bool"
            case Arr(dom, cod):
                s = f"{go(dom, 1)} -> {go(cod, 0)}"
                return f"({s})" if level > 0 else s
            case Prod(left, right):
                s = f"{go(left, 1)} * {go(right, 2)}"
                return f"({s})" if level > 1 else s
        raise TypeError(f"not a Type: {t!r}")

    return go(t, 0)


def pretty_expr(e: Expr) -> str:
    def go(e: Expr, level: int) -> str:
        match e:
            case Var(x):
                return x
            case IntLit(n):
                return str(n)
            case BoolLit(b):
                return "True" if b else "False"
            case Pair(a, b):
                return f"({go(a, 0)}, {go(b, 0)})"
            case Proj(k, s):
                return f"{go(s, _ATOM)}.{k}"
            case App(f, a):
                s = f"{go(f, _APP)} {go(a, _ATOM)}"
                return f"({s})" if level > _APP else s
            case BinOp(Op.DIV, l, r):
                s = f"{go(l, _MUL)} / {go(r, _APP)}"
                return f"({s})" if level > _MUL else s
            case BinOp(Op.LT, l, r):
                s = f"{go(l, _ADD)} < {go(r, _ADD)}"
                return f"({s})" if level > _CMP else s
            case BinOp(op, l, r):
                s = f"{go(l, _ADD)} {op.value} {go(r, _MUL)}"
                return f"({s})" if level > _ADD else s
            case Anno(subject, ty):
                s = f"{go(subject, _CMP)} : {pretty_type(ty)}"
                return f"({s})" if level > _ANNO else s
            case Lam(x, body):
                s = f"\\{x}. {go(body, 0)}"
                return f"({s})" if level > _LAM else s
            case If(c, t, f):
                s = f"if {go(c, 0)} then {go(t, 0)} else {go(f, 0)}"
                return f"({s})" if level > _IF else s
        raise TypeError(f"not an Expr: {e!r}")

    return go(e, 0)
