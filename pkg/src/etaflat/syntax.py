"""Abstract syntax, contexts, paths, and term utilities for the surface language.

Types    A, B ::= int | rat | bool | A -> B | A * B
Terms    e ::= x | \\x. e | e1 e2 | e : A | n | e1 (+ | - | < | /) e2
             | True | False | if e then e1 else e2 | (e1, e2) | e.1 | e.2

Everything here is an immutable value; all operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

RESERVED_WORDS = frozenset({"if", "then", "else", "True", "False", "int", "rat", "bool"})

# Prefix reserved for machine-generated binders.  User identifiers must not
# start with it; the parser only admits the exact machine form `_eta_<n>` so
# that elaborated output stays reparsable.
FRESH_PREFIX = "_eta_"


# ---------------------------------------------------------------------------
# types


class Type:
    __slots__ = ()


@dataclass(frozen=True)
class Int(Type):
    pass


@dataclass(frozen=True)
class Rat(Type):
    pass


@dataclass(frozen=True)
class Bool(Type):
    pass


@dataclass(frozen=True)
class Arr(Type):
    dom: Type
    cod: Type


@dataclass(frozen=True)
class Prod(Type):
    left: Type
    right: Type


INT = Int()
RAT = Rat()
BOOL = Bool()


# ---------------------------------------------------------------------------
# expressions


class Op(Enum):
    ADD = "+"
    SUB = "-"
    LT = "<"
    DIV = "/"


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Lam(Expr):
    binder: str
    body: Expr


@dataclass(frozen=True)
class App(Expr):
    fn: Expr
    arg: Expr


@dataclass(frozen=True)
class Anno(Expr):
    subject: Expr
    type: Type


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class BinOp(Expr):
    op: Op
    left: Expr
    right: Expr


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class If(Expr):
    cond: Expr
    then: Expr
    orelse: Expr


@dataclass(frozen=True)
class Pair(Expr):
    first: Expr
    second: Expr


@dataclass(frozen=True)
class Proj(Expr):
    index: int  # 1 or 2
    subject: Expr


# ---------------------------------------------------------------------------
# typing contexts

Ctx = tuple  # of (name, Type) pairs; rightmost binding wins on lookup

EMPTY_CTX: Ctx = ()


def lookup(ctx: Ctx, name: str) -> Type | None:
    for bound, ty in reversed(ctx):
        if bound == name:
            return ty
    return None


def extend(ctx: Ctx, name: str, ty: Type) -> Ctx:
    return ctx + ((name, ty),)


# ---------------------------------------------------------------------------
# paths: address a node by the chain of child slots leading to it

Path = tuple  # of selector strings; () is the root


class PathError(Exception):
    """Raised when a path does not address an existing node."""


def children(e: Expr) -> tuple:
    """Child slots of e as (selector, subexpression) pairs, in source order."""
    match e:
        case Lam(_, body):
            return (("lam-body", body),)
        case App(fn, arg):
            return (("app-fn", fn), ("app-arg", arg))
        case Anno(subject, _):
            return (("anno-subject", subject),)
        case BinOp(_, left, right):
            return (("binop-left", left), ("binop-right", right))
        case If(cond, then, orelse):
            return (("if-cond", cond), ("if-then", then), ("if-else", orelse))
        case Pair(first, second):
            return (("pair-1", first), ("pair-2", second))
        case Proj(_, subject):
            return (("proj-subject", subject),)
        case _:
            return ()


def child(e: Expr, selector: str) -> Expr:
    for sel, sub in children(e):
        if sel == selector:
            return sub
    raise PathError(f"node {type(e).__name__} has no child slot {selector!r}")


def replace_child(e: Expr, selector: str, new: Expr) -> Expr:
    match e, selector:
        case Lam(x, _), "lam-body":
            return Lam(x, new)
        case App(_, arg), "app-fn":
            return App(new, arg)
        case App(fn, _), "app-arg":
            return App(fn, new)
        case Anno(_, ty), "anno-subject":
            return Anno(new, ty)
        case BinOp(op, _, right), "binop-left":
            return BinOp(op, new, right)
        case BinOp(op, left, _), "binop-right":
            return BinOp(op, left, new)
        case If(_, then, orelse), "if-cond":
            return If(new, then, orelse)
        case If(cond, _, orelse), "if-then":
            return If(cond, new, orelse)
        case If(cond, then, _), "if-else":
            return If(cond, then, new)
        case Pair(_, second), "pair-1":
            return Pair(new, second)
        case Pair(first, _), "pair-2":
            return Pair(first, new)
        case Proj(k, _), "proj-subject":
            return Proj(k, new)
    raise PathError(f"node {type(e).__name__} has no child slot {selector!r}")


def node_at(e: Expr, path: Path) -> Expr:
    for sel in path:
        e = child(e, sel)
    return e


def replace_at(e: Expr, path: Path, new: Expr) -> Expr:
    if not path:
        return new
    return replace_child(e, path[0], replace_at(child(e, path[0]), path[1:], new))


# ---------------------------------------------------------------------------
# term utilities


def free_vars(e: Expr) -> frozenset:
    match e:
        case Var(x):
            return frozenset((x,))
        case Lam(x, body):
            return free_vars(body) - {x}
        case _:
            out = frozenset()
            for _, sub in children(e):
                out |= free_vars(sub)
            return out


def all_idents(e: Expr) -> frozenset:
    """Every identifier occurring in e, free or bound."""
    match e:
        case Var(x):
            return frozenset((x,))
        case Lam(x, body):
            return all_idents(body) | {x}
        case _:
            out = frozenset()
            for _, sub in children(e):
                out |= all_idents(sub)
            return out


def node_count(e: Expr) -> int:
    return 1 + sum(node_count(sub) for _, sub in children(e))


def alpha_eq(e1: Expr, e2: Expr) -> bool:
    """Equality up to consistent renaming of bound variables."""

    def go(a: Expr, b: Expr, m1: dict, m2: dict, depth: int) -> bool:
        match a, b:
            case Var(x), Var(y):
                return m1.get(x, ("free", x)) == m2.get(y, ("free", y))
            case Lam(x, ba), Lam(y, bb):
                return go(ba, bb, {**m1, x: depth}, {**m2, y: depth}, depth + 1)
            case App(f1, a1), App(f2, a2):
                return go(f1, f2, m1, m2, depth) and go(a1, a2, m1, m2, depth)
            case Anno(s1, t1), Anno(s2, t2):
                return t1 == t2 and go(s1, s2, m1, m2, depth)
            case IntLit(n1), IntLit(n2):
                return n1 == n2
            case BoolLit(b1), BoolLit(b2):
                return b1 == b2
            case BinOp(o1, l1, r1), BinOp(o2, l2, r2):
                return o1 is o2 and go(l1, l2, m1, m2, depth) and go(r1, r2, m1, m2, depth)
            case If(c1, t1, f1), If(c2, t2, f2):
                return (
                    go(c1, c2, m1, m2, depth)
                    and go(t1, t2, m1, m2, depth)
                    and go(f1, f2, m1, m2, depth)
                )
            case Pair(a1, b1), Pair(a2, b2):
                return go(a1, a2, m1, m2, depth) and go(b1, b2, m1, m2, depth)
            case Proj(k1, s1), Proj(k2, s2):
                return k1 == k2 and go(s1, s2, m1, m2, depth)
            case _:
                return False

    return go(e1, e2, {}, {}, 0)


def alpha_key(e: Expr):
    """A hashable key equal for alpha-equivalent terms (de Bruijn levels)."""

    def go(a: Expr, env: dict, depth: int):
        match a:
            case Var(x):
                return ("b", env[x]) if x in env else ("f", x)
            case Lam(x, body):
                return ("lam", go(body, {**env, x: depth}, depth + 1))
            case App(f, arg):
                return ("app", go(f, env, depth), go(arg, env, depth))
            case Anno(s, t):
                return ("anno", go(s, env, depth), t)
            case IntLit(n):
                return ("int", n)
            case BoolLit(b):
                return ("bool", b)
            case BinOp(op, l, r):
                return ("op", op.value, go(l, env, depth), go(r, env, depth))
            case If(c, t, f):
                return ("if", go(c, env, depth), go(t, env, depth), go(f, env, depth))
            case Pair(a1, a2):
                return ("pair", go(a1, env, depth), go(a2, env, depth))
            case Proj(k, s):
                return ("proj", k, go(s, env, depth))
        raise TypeError(f"not an Expr: {a!r}")

    return go(e, {}, 0)


def fresh_var(avoid) -> str:
    """Smallest machine name `_eta_<n>` not in avoid."""
    n = 0
    while f"{FRESH_PREFIX}{n}" in avoid:
        n += 1
    return f"{FRESH_PREFIX}{n}"


class FreshSupply:
    """Monotone fresh-name allocator: never hands out the same name twice,
    never collides with the initial avoid set."""

    def __init__(self, avoid=()):
        self._avoid = set(avoid)
        self._next = 0

    def fresh(self) -> str:
        n = self._next
        while f"{FRESH_PREFIX}{n}" in self._avoid:
            n += 1
        name = f"{FRESH_PREFIX}{n}"
        self._avoid.add(name)
        self._next = n + 1
        return name
