"""Deep subtyping A :< B (with explicit derivations) and shallow A :<: B.

Deep rules, one per pair of head constructors:

    ------------ (refl, one per atom)      ------------
    int :< int   bool :< bool  rat :< rat   int :< rat

    B1 :< A1   A2 :< B2                A1 :< B1   A2 :< B2
    ----------------------- (arrow)    ----------------------- (product)
    A1 -> A2 :< B1 -> B2               A1 * A2 :< B1 * B2

Shallow subtyping keeps only reflexivity and int :<: rat; it never looks
under a type constructor.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import sexpr
from .syntax import Arr, Bool, Int, INT, Prod, Rat, RAT, Type


class SubRule(Enum):
    REFL_INT = "refl-int"
    REFL_BOOL = "refl-bool"
    REFL_RAT = "refl-rat"
    INT_RAT = "int-rat"
    ARR = "arr"
    PROD = "prod"


@dataclass(frozen=True)
class SubDeriv:
    """A deep-subtyping derivation node with its claimed conclusion lhs :< rhs.

    The arrow rule is contravariant in its first premise: the dom child of a
    node concluding (A1 -> A2) :< (B1 -> B2) concludes B1 :< A1.
    """

    rule: SubRule
    lhs: Type
    rhs: Type
    children: tuple = ()


def refl_int() -> SubDeriv:
    return SubDeriv(SubRule.REFL_INT, INT, INT)


def refl_bool() -> SubDeriv:
    return SubDeriv(SubRule.REFL_BOOL, Bool(), Bool())


def refl_rat() -> SubDeriv:
    return SubDeriv(SubRule.REFL_RAT, RAT, RAT)


def int_rat() -> SubDeriv:
    return SubDeriv(SubRule.INT_RAT, INT, RAT)


def arr_deriv(dom: SubDeriv, cod: SubDeriv) -> SubDeriv:
    # dom concludes B1 :< A1, cod concludes A2 :< B2
    return SubDeriv(SubRule.ARR, Arr(dom.rhs, cod.lhs), Arr(dom.lhs, cod.rhs), (dom, cod))


def prod_deriv(left: SubDeriv, right: SubDeriv) -> SubDeriv:
    return SubDeriv(SubRule.PROD, Prod(left.lhs, right.lhs), Prod(left.rhs, right.rhs), (left, right))


def deep_sub(a: Type, b: Type) -> SubDeriv | None:
    """Decide A :< B.  The rules are syntax-directed on the pair of head
    constructors, so the derivation, when it exists, is unique."""
    match a, b:
        case Int(), Int():
            return refl_int()
        case Bool(), Bool():
            return refl_bool()
        case Rat(), Rat():
            return refl_rat()
        case Int(), Rat():
            return int_rat()
        case Arr(a1, a2), Arr(b1, b2):
            dom = deep_sub(b1, a1)  # contravariant
            cod = deep_sub(a2, b2)
            if dom is None or cod is None:
                return None
            return SubDeriv(SubRule.ARR, a, b, (dom, cod))
        case Prod(a1, a2), Prod(b1, b2):
            left = deep_sub(a1, b1)
            right = deep_sub(a2, b2)
            if left is None or right is None:
                return None
            return SubDeriv(SubRule.PROD, a, b, (left, right))
        case _:
            return None


def shallow_sub(a: Type, b: Type) -> bool:
    return a == b or (a == INT and b == RAT)


class SubDerivError(Exception):
    def __init__(self, message: str, path: tuple):
        where = "/".join(path) if path else "root"
        super().__init__(f"at {where}: {message}")
        self.path = path


_LEAF_CONCLUSIONS = {
    SubRule.REFL_INT: (Int(), Int()),
    SubRule.REFL_BOOL: (Bool(), Bool()),
    SubRule.REFL_RAT: (Rat(), Rat()),
    SubRule.INT_RAT: (Int(), Rat()),
}


def check_sub_deriv(d: SubDeriv) -> tuple:
    """Validate every node against its rule schema; return the conclusion."""

    def go(d: SubDeriv, path: tuple):
        if d.rule in _LEAF_CONCLUSIONS:
            if d.children:
                raise SubDerivError(f"{d.rule.value} takes no premises", path)
            if (d.lhs, d.rhs) != _LEAF_CONCLUSIONS[d.rule]:
                raise SubDerivError(f"{d.rule.value} cannot conclude this pair", path)
            return
        if len(d.children) != 2:
            raise SubDerivError(f"{d.rule.value} takes two premises", path)
        if d.rule is SubRule.ARR:
            dom, cod = d.children
            go(dom, path + ("arr-dom",))
            go(cod, path + ("arr-cod",))
            if d.lhs != Arr(dom.rhs, cod.lhs) or d.rhs != Arr(dom.lhs, cod.rhs):
                raise SubDerivError("arrow premises do not match conclusion", path)
        elif d.rule is SubRule.PROD:
            left, right = d.children
            go(left, path + ("prod-left",))
            go(right, path + ("prod-right",))
            if d.lhs != Prod(left.lhs, right.lhs) or d.rhs != Prod(left.rhs, right.rhs):
                raise SubDerivError("product premises do not match conclusion", path)
        else:
            raise SubDerivError(f"unknown rule {d.rule!r}", path)

    go(d, ())
    return (d.lhs, d.rhs)


def mentions_int_rat(d: SubDeriv) -> bool:
    """True iff the derivation has an int :< rat leaf (so the coercion it
    names is not the identity)."""
    if d.rule is SubRule.INT_RAT:
        return True
    return any(mentions_int_rat(c) for c in d.children)


# ---------------------------------------------------------------------------
# serialization: conclusions are recomputed on read, never stored


def sub_deriv_to_sexpr(d: SubDeriv) -> str:
    def build(d: SubDeriv):
        return [d.rule.value] + [build(c) for c in d.children]

    return sexpr.dumps(build(d))


_BUILDERS = {
    "refl-int": refl_int,
    "refl-bool": refl_bool,
    "refl-rat": refl_rat,
    "int-rat": int_rat,
    "arr": arr_deriv,
    "prod": prod_deriv,
}


def sub_deriv_from_sexpr(text: str) -> SubDeriv:
    def build(node) -> SubDeriv:
        if isinstance(node, str) or not node or not isinstance(node[0], str):
            raise sexpr.SexprError(f"malformed derivation node: {sexpr.dumps(node)}")
        tag, args = node[0], node[1:]
        if tag not in _BUILDERS:
            raise sexpr.SexprError(f"unknown rule tag {tag!r}")
        builder = _BUILDERS[tag]
        if tag in ("arr", "prod"):
            if len(args) != 2:
                raise sexpr.SexprError(f"{tag} takes two premises")
            return builder(build(args[0]), build(args[1]))
        if args:
            raise sexpr.SexprError(f"{tag} takes no premises")
        return builder()

    return build(sexpr.loads(text))
