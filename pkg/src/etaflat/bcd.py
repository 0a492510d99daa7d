"""Proof kernel for the intersection-type system with a top type.

Types carry atoms, a top type, arrows, and intersections.  Subtyping is the
ten-rule preorder (reflexivity, two top rules, three intersection axioms,
distributivity, transitivity, and congruence for intersections and arrows).
Terms are pure untyped lambda terms.

Two typing systems over explicit derivations:

  * the extended system, with a subsumption rule;
  * the modified system, which drops subsumption and instead allows the
    subject of a judgment to be beta-eta-reduced (premise M : s and
    M ->>be N give N : s).

`core_flatten` eliminates one subsumption step by recursion on the subtyping
derivation, using eta-expansion only; `flatten_derivation` applies it to every
subsumption node, translating extended derivations into modified ones while
preserving the subject term exactly.  Bases bind variables only.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from . import sexpr


# ---------------------------------------------------------------------------
# types and terms


class BcdType:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(BcdType):
    name: str


@dataclass(frozen=True)
class Top(BcdType):
    pass


@dataclass(frozen=True)
class Arr(BcdType):
    dom: BcdType
    cod: BcdType


@dataclass(frozen=True)
class Sect(BcdType):
    left: BcdType
    right: BcdType


TOP = Top()


class BcdTerm:
    __slots__ = ()


@dataclass(frozen=True)
class Var(BcdTerm):
    name: str


@dataclass(frozen=True)
class Lam(BcdTerm):
    binder: str
    body: BcdTerm


@dataclass(frozen=True)
class App(BcdTerm):
    fn: BcdTerm
    arg: BcdTerm


def free_vars(m: BcdTerm) -> frozenset:
    match m:
        case Var(x):
            return frozenset((x,))
        case Lam(x, body):
            return free_vars(body) - {x}
        case App(fn, arg):
            return free_vars(fn) | free_vars(arg)
    raise TypeError(f"not a term: {m!r}")


def term_names(m: BcdTerm) -> frozenset:
    match m:
        case Var(x):
            return frozenset((x,))
        case Lam(x, body):
            return term_names(body) | {x}
        case App(fn, arg):
            return term_names(fn) | term_names(arg)
    raise TypeError(f"not a term: {m!r}")


def alpha_eq(m1: BcdTerm, m2: BcdTerm) -> bool:
    def go(a, b, e1, e2, depth):
        match a, b:
            case Var(x), Var(y):
                return e1.get(x, ("f", x)) == e2.get(y, ("f", y))
            case Lam(x, ba), Lam(y, bb):
                return go(ba, bb, {**e1, x: depth}, {**e2, y: depth}, depth + 1)
            case App(f1, a1), App(f2, a2):
                return go(f1, f2, e1, e2, depth) and go(a1, a2, e1, e2, depth)
            case _:
                return False

    return go(m1, m2, {}, {}, 0)


def _rename_fresh(base: str, avoid) -> str:
    n = 1
    while f"{base}_{n}" in avoid:
        n += 1
    return f"{base}_{n}"


def subst(m: BcdTerm, x: str, n: BcdTerm) -> BcdTerm:
    """Capture-avoiding substitution of n for x in m."""
    match m:
        case Var(y):
            return n if y == x else m
        case App(fn, arg):
            return App(subst(fn, x, n), subst(arg, x, n))
        case Lam(y, body):
            if y == x:
                return m
            if y in free_vars(n) and x in free_vars(body):
                z = _rename_fresh(y, free_vars(n) | term_names(body) | {x})
                body = subst(body, y, Var(z))
                y = z
            return Lam(y, subst(body, x, n))
    raise TypeError(f"not a term: {m!r}")


# ---------------------------------------------------------------------------
# beta-eta reduction traces over terms


class RedRule(Enum):
    ETA = "eta"
    BETA = "beta"


class BcdError(Exception):
    pass


def _term_child(m: BcdTerm, sel: str) -> BcdTerm:
    match m, sel:
        case Lam(_, body), "lam-body":
            return body
        case App(fn, _), "app-fn":
            return fn
        case App(_, arg), "app-arg":
            return arg
    raise BcdError(f"term {type(m).__name__} has no child slot {sel!r}")


def _term_replace(m: BcdTerm, path: tuple, new: BcdTerm) -> BcdTerm:
    if not path:
        return new
    sel = path[0]
    match m, sel:
        case Lam(x, body), "lam-body":
            return Lam(x, _term_replace(body, path[1:], new))
        case App(fn, arg), "app-fn":
            return App(_term_replace(fn, path[1:], new), arg)
        case App(fn, arg), "app-arg":
            return App(fn, _term_replace(arg, path[1:], new))
    raise BcdError(f"term {type(m).__name__} has no child slot {sel!r}")


def term_at(m: BcdTerm, path: tuple) -> BcdTerm:
    for sel in path:
        m = _term_child(m, sel)
    return m


def reduce_step(m: BcdTerm, path: tuple, rule: RedRule) -> BcdTerm:
    node = term_at(m, path)
    if rule is RedRule.ETA:
        match node:
            case Lam(x, App(fn, Var(y))) if x == y and x not in free_vars(fn):
                return _term_replace(m, path, fn)
        raise BcdError(f"not an eta redex at {'/'.join(path) or 'root'}")
    match node:
        case App(Lam(x, body), arg):
            return _term_replace(m, path, subst(body, x, arg))
    raise BcdError(f"not a beta redex at {'/'.join(path) or 'root'}")


def replay(m: BcdTerm, steps: tuple) -> BcdTerm:
    for path, rule in steps:
        m = reduce_step(m, path, rule)
    return m


# ---------------------------------------------------------------------------
# subtyping derivations


class BcdSubRule(Enum):
    REFL = "refl"
    TOP_R = "top-r"
    TOP_ARR = "top-arr"
    SECT_R = "sect-r"
    SECT_L1 = "sect-l1"
    SECT_L2 = "sect-l2"
    DIST = "dist"
    TRANS = "trans"
    SECT_CONG = "sect-cong"
    ARR = "arr"


@dataclass(frozen=True)
class BcdSubDeriv:
    rule: BcdSubRule
    lhs: BcdType
    rhs: BcdType
    children: tuple = ()


def sub_refl(t: BcdType) -> BcdSubDeriv:
    return BcdSubDeriv(BcdSubRule.REFL, t, t)


def sub_top_r(t: BcdType) -> BcdSubDeriv:
    return BcdSubDeriv(BcdSubRule.TOP_R, t, TOP)


def sub_top_arr() -> BcdSubDeriv:
    return BcdSubDeriv(BcdSubRule.TOP_ARR, TOP, Arr(TOP, TOP))


def sub_sect_r(t: BcdType) -> BcdSubDeriv:
    return BcdSubDeriv(BcdSubRule.SECT_R, t, Sect(t, t))


def sub_sect_l1(s: BcdType, t: BcdType) -> BcdSubDeriv:
    return BcdSubDeriv(BcdSubRule.SECT_L1, Sect(s, t), s)


def sub_sect_l2(s: BcdType, t: BcdType) -> BcdSubDeriv:
    return BcdSubDeriv(BcdSubRule.SECT_L2, Sect(s, t), t)


def sub_dist(s: BcdType, t1: BcdType, t2: BcdType) -> BcdSubDeriv:
    return BcdSubDeriv(BcdSubRule.DIST, Sect(Arr(s, t1), Arr(s, t2)), Arr(s, Sect(t1, t2)))


def sub_trans(d1: BcdSubDeriv, d2: BcdSubDeriv) -> BcdSubDeriv:
    return BcdSubDeriv(BcdSubRule.TRANS, d1.lhs, d2.rhs, (d1, d2))


def sub_sect_cong(d1: BcdSubDeriv, d2: BcdSubDeriv) -> BcdSubDeriv:
    return BcdSubDeriv(BcdSubRule.SECT_CONG, Sect(d1.lhs, d2.lhs), Sect(d1.rhs, d2.rhs), (d1, d2))


def sub_arr(d1: BcdSubDeriv, d2: BcdSubDeriv) -> BcdSubDeriv:
    # contravariant first premise: d1 concludes t1 <: s1
    return BcdSubDeriv(BcdSubRule.ARR, Arr(d1.rhs, d2.lhs), Arr(d1.lhs, d2.rhs), (d1, d2))


class BcdSubError(Exception):
    def __init__(self, message: str, path: tuple):
        where = "/".join(str(p) for p in path) if path else "root"
        super().__init__(f"at {where}: {message}")
        self.path = path


def check_bcd_sub(d: BcdSubDeriv) -> tuple:
    """Validate every node against its schema; return the conclusion pair."""

    def go(d: BcdSubDeriv, path: tuple) -> None:
        def need(cond: bool, msg: str) -> None:
            if not cond:
                raise BcdSubError(msg, path)

        match d.rule:
            case BcdSubRule.REFL:
                need(not d.children and d.lhs == d.rhs, "reflexivity relates a type to itself")
            case BcdSubRule.TOP_R:
                need(not d.children and d.rhs == TOP, "right side must be top")
            case BcdSubRule.TOP_ARR:
                need(not d.children and d.lhs == TOP and d.rhs == Arr(TOP, TOP), "must conclude top <: top -> top")
            case BcdSubRule.SECT_R:
                need(not d.children and d.rhs == Sect(d.lhs, d.lhs), "right side must duplicate the left")
            case BcdSubRule.SECT_L1:
                need(not d.children and isinstance(d.lhs, Sect) and d.rhs == d.lhs.left, "must project the first component")
            case BcdSubRule.SECT_L2:
                need(not d.children and isinstance(d.lhs, Sect) and d.rhs == d.lhs.right, "must project the second component")
            case BcdSubRule.DIST:
                need(not d.children, "distributivity is an axiom")
                match d.lhs, d.rhs:
                    case Sect(Arr(s1, t1), Arr(s2, t2)), Arr(s3, Sect(t3, t4)):
                        need(s1 == s2, "both arrows must share the same domain")
                        need(s3 == s1 and (t3, t4) == (t1, t2), "conclusion does not match the premise arrows")
                    case _:
                        raise BcdSubError("malformed distributivity instance", path)
            case BcdSubRule.TRANS:
                need(len(d.children) == 2, "transitivity takes two premises")
                d1, d2 = d.children
                go(d1, path + (0,))
                go(d2, path + (1,))
                need(d1.rhs == d2.lhs, "middle types disagree")
                need(d.lhs == d1.lhs and d.rhs == d2.rhs, "conclusion does not chain the premises")
            case BcdSubRule.SECT_CONG:
                need(len(d.children) == 2, "congruence takes two premises")
                d1, d2 = d.children
                go(d1, path + (0,))
                go(d2, path + (1,))
                need(d.lhs == Sect(d1.lhs, d2.lhs) and d.rhs == Sect(d1.rhs, d2.rhs), "conclusion does not match premises")
            case BcdSubRule.ARR:
                need(len(d.children) == 2, "arrow rule takes two premises")
                d1, d2 = d.children
                go(d1, path + (0,))
                go(d2, path + (1,))
                need(d.lhs == Arr(d1.rhs, d2.lhs) and d.rhs == Arr(d1.lhs, d2.rhs), "conclusion does not match premises (first premise is contravariant)")
            case _:
                raise BcdSubError(f"unknown rule {d.rule!r}", path)

    go(d, ())
    return (d.lhs, d.rhs)


# ---------------------------------------------------------------------------
# typing derivations


class System(Enum):
    EXTENDED = "extended"  # with subsumption
    MODIFIED = "modified"  # subsumption replaced by the beta-eta rule


class BcdRule(Enum):
    VAR = "var-rule"
    ARR_INTRO = "arr-intro"
    ARR_ELIM = "arr-elim"
    SECT_INTRO = "sect-intro"
    SECT_ELIM1 = "sect-elim1"
    SECT_ELIM2 = "sect-elim2"
    TOP_INTRO = "top-intro"
    SUB = "sub"
    BETA_ETA = "beta-eta"


@dataclass(frozen=True)
class BcdTypingDeriv:
    system: System
    rule: BcdRule
    basis: tuple  # of (name, BcdType); binds variables only, rightmost wins
    subject: BcdTerm
    type: BcdType
    children: tuple = ()
    witness: BcdSubDeriv | None = None  # SUB nodes
    steps: tuple = ()  # BETA_ETA nodes: ((path, RedRule), ...)


def basis_lookup(basis: tuple, name: str) -> BcdType | None:
    for bound, ty in reversed(basis):
        if bound == name:
            return ty
    return None


# smart constructors used by the transformations; the checker re-validates


def var_rule(system: System, basis: tuple, name: str) -> BcdTypingDeriv:
    ty = basis_lookup(basis, name)
    if ty is None:
        raise BcdError(f"variable {name!r} not bound in basis")
    return BcdTypingDeriv(system, BcdRule.VAR, basis, Var(name), ty)


def top_intro(system: System, basis: tuple, subject: BcdTerm) -> BcdTypingDeriv:
    return BcdTypingDeriv(system, BcdRule.TOP_INTRO, basis, subject, TOP)


def arr_intro(child: BcdTypingDeriv) -> BcdTypingDeriv:
    if not child.basis:
        raise BcdError("arrow introduction needs a binding to discharge")
    (x, dom) = child.basis[-1]
    return BcdTypingDeriv(
        child.system,
        BcdRule.ARR_INTRO,
        child.basis[:-1],
        Lam(x, child.subject),
        Arr(dom, child.type),
        (child,),
    )


def arr_elim(fn: BcdTypingDeriv, arg: BcdTypingDeriv) -> BcdTypingDeriv:
    if not isinstance(fn.type, Arr):
        raise BcdError("application head must have an arrow type")
    return BcdTypingDeriv(
        fn.system,
        BcdRule.ARR_ELIM,
        fn.basis,
        App(fn.subject, arg.subject),
        fn.type.cod,
        (fn, arg),
    )


def sect_intro(d1: BcdTypingDeriv, d2: BcdTypingDeriv) -> BcdTypingDeriv:
    return BcdTypingDeriv(
        d1.system, BcdRule.SECT_INTRO, d1.basis, d1.subject, Sect(d1.type, d2.type), (d1, d2)
    )


def sect_elim1(d: BcdTypingDeriv) -> BcdTypingDeriv:
    if not isinstance(d.type, Sect):
        raise BcdError("intersection elimination needs an intersection type")
    return BcdTypingDeriv(d.system, BcdRule.SECT_ELIM1, d.basis, d.subject, d.type.left, (d,))


def sect_elim2(d: BcdTypingDeriv) -> BcdTypingDeriv:
    if not isinstance(d.type, Sect):
        raise BcdError("intersection elimination needs an intersection type")
    return BcdTypingDeriv(d.system, BcdRule.SECT_ELIM2, d.basis, d.subject, d.type.right, (d,))


def sub_node(child: BcdTypingDeriv, witness: BcdSubDeriv) -> BcdTypingDeriv:
    return BcdTypingDeriv(
        System.EXTENDED, BcdRule.SUB, child.basis, child.subject, witness.rhs, (child,), witness
    )


def beta_eta(child: BcdTypingDeriv, steps: tuple, subject: BcdTerm) -> BcdTypingDeriv:
    # premise M : s, M ->>be N; conclusion N : s
    return BcdTypingDeriv(
        System.MODIFIED, BcdRule.BETA_ETA, child.basis, subject, child.type, (child,), steps=steps
    )


class BcdTypingError(Exception):
    def __init__(self, message: str, path: tuple):
        where = "/".join(str(p) for p in path) if path else "root"
        super().__init__(f"at {where}: {message}")
        self.path = path


def check_bcd_typing(d: BcdTypingDeriv) -> tuple:
    """Validate every node; return the concluded judgment
    (system, basis, subject, type)."""
    _validate(d, ())
    return (d.system, d.basis, d.subject, d.type)


def _validate(d: BcdTypingDeriv, path: tuple) -> None:
    def need(cond: bool, msg: str) -> None:
        if not cond:
            raise BcdTypingError(msg, path)

    for i, c in enumerate(d.children):
        if c.system is not d.system:
            raise BcdTypingError("premise belongs to the other system", path + (i,))
    for name, _ in d.basis:
        need(isinstance(name, str), "basis may bind variables only")

    match d.rule:
        case BcdRule.VAR:
            need(not d.children and isinstance(d.subject, Var), "variable rule shape")
            need(basis_lookup(d.basis, d.subject.name) == d.type, "type disagrees with basis")
        case BcdRule.TOP_INTRO:
            need(not d.children and d.type == TOP, "top introduction concludes top")
        case BcdRule.ARR_INTRO:
            need(len(d.children) == 1, "arrow introduction takes one premise")
            c = d.children[0]
            match d.subject, d.type:
                case Lam(x, body), Arr(dom, cod):
                    need(c.basis == d.basis + ((x, dom),), "premise basis must bind the parameter")
                    need(c.subject == body and c.type == cod, "premise does not match the body")
                case _:
                    raise BcdTypingError("subject must be a lambda at an arrow type", path)
        case BcdRule.ARR_ELIM:
            need(len(d.children) == 2, "application takes two premises")
            fn, arg = d.children
            match d.subject:
                case App(f, a):
                    need(fn.basis == d.basis and arg.basis == d.basis, "premise basis mismatch")
                    need(fn.subject == f and arg.subject == a, "premise subjects mismatch")
                    need(isinstance(fn.type, Arr), "head premise must have arrow type")
                    need(fn.type.dom == arg.type and fn.type.cod == d.type, "types do not compose")
                case _:
                    raise BcdTypingError("subject must be an application", path)
        case BcdRule.SECT_INTRO:
            need(len(d.children) == 2, "intersection introduction takes two premises")
            c1, c2 = d.children
            need(c1.basis == d.basis and c2.basis == d.basis, "premise basis mismatch")
            need(c1.subject == d.subject and c2.subject == d.subject, "both premises must type the same subject")
            need(d.type == Sect(c1.type, c2.type), "conclusion must intersect the premise types")
        case BcdRule.SECT_ELIM1 | BcdRule.SECT_ELIM2:
            need(len(d.children) == 1, "intersection elimination takes one premise")
            c = d.children[0]
            need(c.basis == d.basis and c.subject == d.subject, "premise must share basis and subject")
            match c.type:
                case Sect(left, right):
                    want = left if d.rule is BcdRule.SECT_ELIM1 else right
                    need(d.type == want, "conclusion must be the projected component")
                case _:
                    raise BcdTypingError("premise must have an intersection type", path)
        case BcdRule.SUB:
            need(d.system is System.EXTENDED, "subsumption lives in the extended system only")
            need(len(d.children) == 1 and d.witness is not None, "subsumption needs a premise and a witness")
            c = d.children[0]
            need(c.basis == d.basis and c.subject == d.subject, "premise must share basis and subject")
            try:
                concl = check_bcd_sub(d.witness)
            except BcdSubError as exc:
                raise BcdTypingError(f"bad subtyping witness: {exc}", path)
            need(concl == (c.type, d.type), "witness concludes the wrong pair")
        case BcdRule.BETA_ETA:
            need(d.system is System.MODIFIED, "the beta-eta rule lives in the modified system only")
            need(len(d.children) == 1, "beta-eta takes one premise")
            c = d.children[0]
            need(c.basis == d.basis, "premise basis mismatch")
            need(d.type == c.type, "beta-eta preserves the premise type")
            try:
                reduct = replay(c.subject, d.steps)
            except BcdError as exc:
                raise BcdTypingError(f"trace replay failed: {exc}", path)
            need(alpha_eq(reduct, d.subject), "trace reduct differs from the conclusion subject")
        case _:
            raise BcdTypingError(f"unknown rule {d.rule!r}", path)

    for i, c in enumerate(d.children):
        _validate(c, path + (i,))


# ---------------------------------------------------------------------------
# weakening


def deriv_names(d: BcdTypingDeriv) -> frozenset:
    out = frozenset(name for name, _ in d.basis) | term_names(d.subject)
    for c in d.children:
        out |= deriv_names(c)
    return out


def weaken(d: BcdTypingDeriv, x: str, ty: BcdType) -> BcdTypingDeriv:
    """Thread the binding x : ty through every basis of d.  Internal binders
    named x are alpha-renamed first so the new binding is never shadowed."""
    if any(name == x for name, _ in d.basis):
        raise BcdError(f"{x!r} is already bound in the basis")
    d = _rename_conflicting(d, x)
    return _insert_binding(d, len(d.basis), x, ty)


def _insert_binding(d: BcdTypingDeriv, pos: int, x: str, ty: BcdType) -> BcdTypingDeriv:
    return replace(
        d,
        basis=d.basis[:pos] + ((x, ty),) + d.basis[pos:],
        children=tuple(_insert_binding(c, pos, x, ty) for c in d.children),
    )


def _rename_conflicting(d: BcdTypingDeriv, x: str) -> BcdTypingDeriv:
    avoid = set(deriv_names(d)) | {x}

    def go(node: BcdTypingDeriv) -> BcdTypingDeriv:
        if node.rule is BcdRule.ARR_INTRO and node.subject.binder == x:
            z = _rename_fresh(x, avoid)
            avoid.add(z)
            child = _rename_entry(node.children[0], len(node.basis), x, z)
            node = replace(
                node,
                subject=Lam(z, subst(node.subject.body, x, Var(z))),
                children=(child,),
            )
        return replace(node, children=tuple(go(c) for c in node.children))

    return go(d)


def _rename_entry(d: BcdTypingDeriv, pos: int, old: str, new: str) -> BcdTypingDeriv:
    """Rename the basis entry at index pos (and the variable it binds) from
    old to new throughout a subtree.  Subjects shadowed by a more recent
    binding of old are left alone."""
    name, ty = d.basis[pos]
    if name != old:
        raise BcdError("basis entry does not bind the expected name")
    basis = d.basis[:pos] + ((new, ty),) + d.basis[pos + 1 :]
    shadowed = any(n == old for n, _ in d.basis[pos + 1 :])
    subject = d.subject if shadowed else subst(d.subject, old, Var(new))
    return replace(
        d,
        basis=basis,
        subject=subject,
        children=tuple(_rename_entry(c, pos, old, new) for c in d.children),
    )


# ---------------------------------------------------------------------------
# subsumption elimination


class _Fresh:
    def __init__(self, avoid):
        self._avoid = set(avoid)
        self._next = 0

    def __call__(self) -> str:
        n = self._next
        while f"x{n}" in self._avoid:
            n += 1
        name = f"x{n}"
        self._avoid.add(name)
        self._next = n + 1
        return name


def core_flatten(d: BcdSubDeriv, deriv: BcdTypingDeriv, fresh: _Fresh | None = None) -> BcdTypingDeriv:
    """Given d : s <: t and a modified-system derivation of M : s, produce a
    modified-system derivation of M : t.  Recursion on d; every emitted
    reduction trace is a single eta step, never beta."""
    check_bcd_sub(d)
    check_bcd_typing(deriv)
    if deriv.system is not System.MODIFIED:
        raise BcdError("premise derivation must be in the modified system")
    if deriv.type != d.lhs:
        raise BcdError("premise type does not match the left of the subtyping")
    if fresh is None:
        fresh = _Fresh(deriv_names(deriv))
    return _core(d, deriv, fresh)


def _eta_close(lam: BcdTypingDeriv, subject: BcdTerm) -> BcdTypingDeriv:
    # lam proves \x. subject x : t with x fresh; one eta step recovers subject
    return beta_eta(lam, (((), RedRule.ETA),), subject)


def _core(d: BcdSubDeriv, deriv: BcdTypingDeriv, fresh: _Fresh) -> BcdTypingDeriv:
    basis, m = deriv.basis, deriv.subject
    match d.rule:
        case BcdSubRule.REFL:
            return deriv
        case BcdSubRule.TOP_R:
            return top_intro(System.MODIFIED, basis, m)
        case BcdSubRule.TOP_ARR:
            x = fresh()
            inner = top_intro(System.MODIFIED, basis + ((x, TOP),), App(m, Var(x)))
            return _eta_close(arr_intro(inner), m)
        case BcdSubRule.SECT_R:
            return sect_intro(deriv, deriv)
        case BcdSubRule.SECT_L1:
            return sect_elim1(deriv)
        case BcdSubRule.SECT_L2:
            return sect_elim2(deriv)
        case BcdSubRule.DIST:
            dom = d.lhs.left.dom
            x = fresh()
            basis_x = basis + ((x, dom),)
            left = arr_elim(weaken(sect_elim1(deriv), x, dom), var_rule(System.MODIFIED, basis_x, x))
            right = arr_elim(weaken(sect_elim2(deriv), x, dom), var_rule(System.MODIFIED, basis_x, x))
            return _eta_close(arr_intro(sect_intro(left, right)), m)
        case BcdSubRule.TRANS:
            d1, d2 = d.children
            return _core(d2, _core(d1, deriv, fresh), fresh)
        case BcdSubRule.SECT_CONG:
            d1, d2 = d.children
            left = _core(d1, sect_elim1(deriv), fresh)
            right = _core(d2, sect_elim2(deriv), fresh)
            return sect_intro(left, right)
        case BcdSubRule.ARR:
            d1, d2 = d.children  # d1 : t1 <: s1 (contravariant), d2 : s2 <: t2
            x = fresh()
            widened = weaken(deriv, x, d1.lhs)  # basis, x:t1 |-* m : s1 -> s2
            xvar = var_rule(System.MODIFIED, widened.basis, x)
            arg = _core(d1, xvar, fresh)  # x : s1
            app = arr_elim(widened, arg)  # m x : s2
            body = _core(d2, app, fresh)  # m x : t2
            return _eta_close(arr_intro(body), m)
    raise BcdError(f"unhandled rule {d.rule!r}")


def flatten_derivation(d: BcdTypingDeriv) -> BcdTypingDeriv:
    """Translate an extended-system derivation into the modified system:
    homomorphic on shared rules, subsumption eliminated via core_flatten.
    The subject term is preserved exactly."""
    check_bcd_typing(d)
    if d.system is not System.EXTENDED:
        raise BcdError("input derivation must be in the extended system")
    fresh = _Fresh(deriv_names(d))

    def go(node: BcdTypingDeriv) -> BcdTypingDeriv:
        if node.rule is BcdRule.SUB:
            return _core(node.witness, go(node.children[0]), fresh)
        return replace(node, system=System.MODIFIED, children=tuple(go(c) for c in node.children))

    return go(d)


def count_beta_steps(d: BcdTypingDeriv) -> int:
    n = sum(1 for _, rule in d.steps if rule is RedRule.BETA)
    return n + sum(count_beta_steps(c) for c in d.children)


# ---------------------------------------------------------------------------
# bounded derivation search (test oracle; not a decision procedure)


def _subterm_types(t: BcdType):
    yield t
    match t:
        case Arr(dom, cod):
            yield from _subterm_types(dom)
            yield from _subterm_types(cod)
        case Sect(left, right):
            yield from _subterm_types(left)
            yield from _subterm_types(right)


def bcd_sub_search(s: BcdType, t: BcdType, max_depth: int) -> BcdSubDeriv | None:
    """Iterative-deepening search for a derivation of s <: t of depth at most
    max_depth.  Transitivity middles are drawn from a finite candidate pool,
    so None is only a no-within-bound answer, never a refutation."""
    failed: dict = {}

    def middles(a: BcdType, b: BcdType) -> list:
        pool: list = []
        seen = set()
        for cand in (*_subterm_types(a), *_subterm_types(b), Sect(a, a), TOP, Arr(TOP, TOP)):
            if cand not in seen and cand != a and cand != b:
                seen.add(cand)
                pool.append(cand)
        return pool

    def axiom(a: BcdType, b: BcdType) -> BcdSubDeriv | None:
        if a == b:
            return sub_refl(a)
        if b == TOP:
            return sub_top_r(a)
        if a == TOP and b == Arr(TOP, TOP):
            return sub_top_arr()
        if b == Sect(a, a):
            return sub_sect_r(a)
        match a:
            case Sect(left, right):
                if b == left:
                    return sub_sect_l1(left, right)
                if b == right:
                    return sub_sect_l2(left, right)
        match a, b:
            case Sect(Arr(s1, t1), Arr(s2, t2)), Arr(s3, Sect(t3, t4)):
                if s1 == s2 == s3 and (t1, t2) == (t3, t4):
                    return sub_dist(s1, t1, t2)
        return None

    def search(a: BcdType, b: BcdType, depth: int) -> BcdSubDeriv | None:
        if depth <= 0:
            return None
        if failed.get((a, b), 0) >= depth:
            return None
        found = axiom(a, b)
        if found is None and depth >= 2:
            match a, b:
                case Arr(a1, a2), Arr(b1, b2):
                    d1 = search(b1, a1, depth - 1)
                    d2 = search(a2, b2, depth - 1) if d1 else None
                    if d1 and d2:
                        found = sub_arr(d1, d2)
                case Sect(a1, a2), Sect(b1, b2):
                    d1 = search(a1, b1, depth - 1)
                    d2 = search(a2, b2, depth - 1) if d1 else None
                    if d1 and d2:
                        found = sub_sect_cong(d1, d2)
            if found is None:
                for mid in middles(a, b):
                    d1 = search(a, mid, depth - 1)
                    if d1 is None:
                        continue
                    d2 = search(mid, b, depth - 1)
                    if d2 is not None:
                        found = sub_trans(d1, d2)
                        break
        if found is None:
            failed[(a, b)] = depth
        return found

    for depth in range(1, max_depth + 1):
        result = search(s, t, depth)
        if result is not None:
            return result
    return None


# ---------------------------------------------------------------------------
# serialization


def type_to_sexpr(t: BcdType):
    match t:
        case Atom(name):
            return ["atom", name]
        case Top():
            return "top"
        case Arr(dom, cod):
            return ["arr", type_to_sexpr(dom), type_to_sexpr(cod)]
        case Sect(left, right):
            return ["sect", type_to_sexpr(left), type_to_sexpr(right)]
    raise TypeError(f"not a type: {t!r}")


def type_from_sexpr(node) -> BcdType:
    match node:
        case "top":
            return TOP
        case ["atom", str(name)]:
            return Atom(name)
        case ["arr", dom, cod]:
            return Arr(type_from_sexpr(dom), type_from_sexpr(cod))
        case ["sect", left, right]:
            return Sect(type_from_sexpr(left), type_from_sexpr(right))
    raise sexpr.SexprError(f"malformed type: {sexpr.dumps(node)}")


def term_to_sexpr(m: BcdTerm):
    match m:
        case Var(x):
            return ["var", x]
        case Lam(x, body):
            return ["lam", x, term_to_sexpr(body)]
        case App(fn, arg):
            return ["app", term_to_sexpr(fn), term_to_sexpr(arg)]
    raise TypeError(f"not a term: {m!r}")


def term_from_sexpr(node) -> BcdTerm:
    match node:
        case ["var", str(x)]:
            return Var(x)
        case ["lam", str(x), body]:
            return Lam(x, term_from_sexpr(body))
        case ["app", fn, arg]:
            return App(term_from_sexpr(fn), term_from_sexpr(arg))
    raise sexpr.SexprError(f"malformed term: {sexpr.dumps(node)}")


def sub_deriv_to_sexpr(d: BcdSubDeriv):
    match d.rule:
        case BcdSubRule.REFL:
            return ["refl", type_to_sexpr(d.lhs)]
        case BcdSubRule.TOP_R:
            return ["top-r", type_to_sexpr(d.lhs)]
        case BcdSubRule.TOP_ARR:
            return ["top-arr"]
        case BcdSubRule.SECT_R:
            return ["sect-r", type_to_sexpr(d.lhs)]
        case BcdSubRule.SECT_L1 | BcdSubRule.SECT_L2:
            return [d.rule.value, type_to_sexpr(d.lhs.left), type_to_sexpr(d.lhs.right)]
        case BcdSubRule.DIST:
            return [
                "dist",
                type_to_sexpr(d.rhs.dom),
                type_to_sexpr(d.rhs.cod.left),
                type_to_sexpr(d.rhs.cod.right),
            ]
        case _:
            return [d.rule.value] + [sub_deriv_to_sexpr(c) for c in d.children]


def sub_deriv_from_sexpr(node) -> BcdSubDeriv:
    match node:
        case ["refl", t]:
            return sub_refl(type_from_sexpr(t))
        case ["top-r", t]:
            return sub_top_r(type_from_sexpr(t))
        case ["top-arr"]:
            return sub_top_arr()
        case ["sect-r", t]:
            return sub_sect_r(type_from_sexpr(t))
        case ["sect-l1", s, t]:
            return sub_sect_l1(type_from_sexpr(s), type_from_sexpr(t))
        case ["sect-l2", s, t]:
            return sub_sect_l2(type_from_sexpr(s), type_from_sexpr(t))
        case ["dist", s, t1, t2]:
            return sub_dist(type_from_sexpr(s), type_from_sexpr(t1), type_from_sexpr(t2))
        case ["trans", d1, d2]:
            return sub_trans(sub_deriv_from_sexpr(d1), sub_deriv_from_sexpr(d2))
        case ["sect-cong", d1, d2]:
            return sub_sect_cong(sub_deriv_from_sexpr(d1), sub_deriv_from_sexpr(d2))
        case ["arr", d1, d2]:
            return sub_arr(sub_deriv_from_sexpr(d1), sub_deriv_from_sexpr(d2))
    raise sexpr.SexprError(f"malformed subtyping derivation: {sexpr.dumps(node)}")


def _basis_to_sexpr(basis: tuple):
    return ["basis"] + [[name, type_to_sexpr(ty)] for name, ty in basis]


def _basis_from_sexpr(node) -> tuple:
    match node:
        case ["basis", *entries]:
            basis = []
            for entry in entries:
                match entry:
                    case [str(name), ty]:
                        basis.append((name, type_from_sexpr(ty)))
                    case _:
                        raise sexpr.SexprError(
                            f"large bases are not supported: a basis may bind variables only, got {sexpr.dumps(entry)}"
                        )
            return tuple(basis)
    raise sexpr.SexprError(f"malformed basis: {sexpr.dumps(node)}")


def _steps_to_sexpr(steps: tuple):
    out = ["steps"]
    for path, rule in steps:
        out.append(["step", "/".join(path) if path else ".", rule.value])
    return out


def _steps_from_sexpr(node) -> tuple:
    match node:
        case ["steps", *raw]:
            steps = []
            for item in raw:
                match item:
                    case ["step", str(path_text), str(rule_text)]:
                        path = () if path_text == "." else tuple(path_text.split("/"))
                        steps.append((path, RedRule(rule_text)))
                    case _:
                        raise sexpr.SexprError(f"malformed step: {sexpr.dumps(item)}")
            return tuple(steps)
    raise sexpr.SexprError(f"malformed steps: {sexpr.dumps(node)}")


def typing_deriv_to_sexpr(d: BcdTypingDeriv) -> str:
    def build(d: BcdTypingDeriv):
        node = [d.rule.value, _basis_to_sexpr(d.basis), term_to_sexpr(d.subject), type_to_sexpr(d.type)]
        if d.rule is BcdRule.SUB:
            node.append(sub_deriv_to_sexpr(d.witness))
        if d.rule is BcdRule.BETA_ETA:
            node.append(_steps_to_sexpr(d.steps))
        node.extend(build(c) for c in d.children)
        return node

    return sexpr.dumps([d.system.value, build(d)])


def typing_deriv_from_sexpr(text: str) -> BcdTypingDeriv:
    outer = sexpr.loads(text)
    match outer:
        case [("extended" | "modified") as sysname, body]:
            system = System(sysname)
        case _:
            raise sexpr.SexprError("expected (extended ...) or (modified ...)")

    def build(node) -> BcdTypingDeriv:
        if isinstance(node, str) or len(node) < 4:
            raise sexpr.SexprError(f"malformed derivation node: {sexpr.dumps(node)}")
        tag, basis_node, term_node, type_node, *rest = node
        try:
            rule = BcdRule(tag)
        except ValueError:
            raise sexpr.SexprError(f"unknown rule tag {tag!r}")
        basis = _basis_from_sexpr(basis_node)
        subject = term_from_sexpr(term_node)
        ty = type_from_sexpr(type_node)
        witness = None
        steps: tuple = ()
        if rule is BcdRule.SUB:
            if not rest:
                raise sexpr.SexprError("subsumption node needs a witness")
            witness = sub_deriv_from_sexpr(rest[0])
            rest = rest[1:]
        if rule is BcdRule.BETA_ETA:
            if not rest:
                raise sexpr.SexprError("beta-eta node needs a step list")
            steps = _steps_from_sexpr(rest[0])
            rest = rest[1:]
        children = tuple(build(c) for c in rest)
        return BcdTypingDeriv(system, rule, basis, subject, ty, children, witness, steps)

    return build(body)


def pretty_bcd_type(t: BcdType) -> str:
    match t:
        case Atom(name):
            return name
        case Top():
            return "top"
        case Arr(dom, cod):
            dom_s = pretty_bcd_type(dom)
            if isinstance(dom, (Arr, Sect)):
                dom_s = f"({dom_s})"
            cod_s = pretty_bcd_type(cod)
            if isinstance(cod, Sect):
                cod_s = f"({cod_s})"
            return f"{dom_s} -> {cod_s}"
        case Sect(left, right):
            left_s = pretty_bcd_type(left)
            if isinstance(left, (Arr, Sect)):
                left_s = f"({left_s})"
            right_s = pretty_bcd_type(right)
            if isinstance(right, (Arr, Sect)):
                right_s = f"({right_s})"
            return f"{left_s} & {right_s}"
    raise TypeError(f"not a type: {t!r}")
