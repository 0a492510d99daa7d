import random

import pytest

from etaflat import sexpr
from etaflat.bcd import (
    alpha_eq,
    App,
    Arr,
    arr_elim,
    arr_intro,
    Atom,
    bcd_sub_search,
    BcdError,
    BcdRule,
    BcdSubDeriv,
    BcdSubRule,
    BcdTypingDeriv,
    BcdTypingError,
    beta_eta,
    check_bcd_sub,
    check_bcd_typing,
    core_flatten,
    count_beta_steps,
    flatten_derivation,
    Lam,
    RedRule,
    replay,
    Sect,
    sect_elim1,
    sect_intro,
    sub_arr,
    sub_dist,
    sub_node,
    sub_refl,
    sub_sect_cong,
    sub_sect_l1,
    sub_sect_l2,
    sub_sect_r,
    sub_top_arr,
    sub_top_r,
    sub_trans,
    subst,
    System,
    TOP,
    top_intro,
    typing_deriv_from_sexpr,
    typing_deriv_to_sexpr,
    Var,
    var_rule,
    weaken,
)

A, B, C = Atom("a"), Atom("b"), Atom("c")


def ten_rules():
    return [
        sub_refl(A),
        sub_top_r(A),
        sub_top_arr(),
        sub_sect_r(A),
        sub_sect_l1(A, B),
        sub_sect_l2(A, B),
        sub_dist(A, B, C),
        sub_trans(sub_top_r(A), sub_top_arr()),
        sub_sect_cong(sub_top_r(A), sub_refl(B)),
        sub_arr(sub_refl(A), sub_top_r(B)),
    ]


# ---------------------------------------------------------------------------
# subtyping derivation checker


def test_check_sub_top_arr():
    assert check_bcd_sub(sub_top_arr()) == (TOP, Arr(TOP, TOP))


def test_check_sub_dist():
    d = sub_dist(A, B, C)
    assert check_bcd_sub(d) == (Sect(Arr(A, B), Arr(A, C)), Arr(A, Sect(B, C)))


def test_check_sub_dist_mismatched_domains():
    bogus = BcdSubDeriv(
        BcdSubRule.DIST,
        Sect(Arr(A, B), Arr(Atom("a2"), C)),
        Arr(A, Sect(B, C)),
    )
    with pytest.raises(Exception):
        check_bcd_sub(bogus)


def test_check_sub_trans_middle_mismatch():
    bogus = BcdSubDeriv(BcdSubRule.TRANS, A, B, (sub_top_r(A), sub_sect_l1(B, C)))
    with pytest.raises(Exception):
        check_bcd_sub(bogus)


def test_all_ten_rules_check():
    for d in ten_rules():
        assert check_bcd_sub(d) == (d.lhs, d.rhs)


# ---------------------------------------------------------------------------
# terms


def test_subst_capture_avoiding():
    # (\y. x y)[x := y]  must rename the binder
    m = Lam("y", App(Var("x"), Var("y")))
    out = subst(m, "x", Var("y"))
    assert alpha_eq(out, Lam("z", App(Var("y"), Var("z"))))
    assert not alpha_eq(out, Lam("z", App(Var("z"), Var("z"))))


def test_replay_eta_and_beta():
    m = Lam("x", App(Var("f"), Var("x")))
    assert replay(m, (((), RedRule.ETA),)) == Var("f")
    m2 = App(Lam("x", Var("x")), Var("y"))
    assert replay(m2, (((), RedRule.BETA),)) == Var("y")
    with pytest.raises(BcdError):
        replay(Var("f"), (((), RedRule.ETA),))


# ---------------------------------------------------------------------------
# typing derivation checker


def test_top_intro_any_subject():
    d = top_intro(System.MODIFIED, (), App(Var("m"), Var("n")))
    assert check_bcd_typing(d) == (System.MODIFIED, (), App(Var("m"), Var("n")), TOP)


def test_sect_intro_requires_shared_subject():
    d1 = top_intro(System.MODIFIED, (), Var("m"))
    d2 = top_intro(System.MODIFIED, (), Var("n"))
    bogus = BcdTypingDeriv(
        System.MODIFIED, BcdRule.SECT_INTRO, (), Var("m"), Sect(TOP, TOP), (d1, d2)
    )
    with pytest.raises(BcdTypingError):
        check_bcd_typing(bogus)


def test_beta_eta_node_checks():
    basis = (("m", Arr(A, B)),)
    inner_basis = basis + (("x", A),)
    app = arr_elim(var_rule(System.MODIFIED, inner_basis, "m"), var_rule(System.MODIFIED, inner_basis, "x"))
    lam = arr_intro(app)  # |-* \x. m x : a -> b
    node = beta_eta(lam, (((), RedRule.ETA),), Var("m"))
    system, _, subject, ty = check_bcd_typing(node)
    assert system is System.MODIFIED and subject == Var("m") and ty == Arr(A, B)


def test_beta_eta_accepts_beta_steps():
    premise = top_intro(System.MODIFIED, (), App(Lam("x", Var("x")), Var("y")))
    node = beta_eta(premise, (((), RedRule.BETA),), Var("y"))
    assert check_bcd_typing(node)[2] == Var("y")


def test_beta_eta_rejects_wrong_reduct():
    premise = top_intro(System.MODIFIED, (), Lam("x", App(Var("m"), Var("x"))))
    node = beta_eta(premise, (((), RedRule.ETA),), Var("wrong"))
    with pytest.raises(BcdTypingError):
        check_bcd_typing(node)


def test_sub_only_in_extended_beta_eta_only_in_modified():
    premise = var_rule(System.MODIFIED, (("x", A),), "x")
    bogus = BcdTypingDeriv(
        System.MODIFIED, BcdRule.SUB, (("x", A),), Var("x"), TOP, (premise,), sub_top_r(A)
    )
    with pytest.raises(BcdTypingError):
        check_bcd_typing(bogus)


# ---------------------------------------------------------------------------
# core subsumption elimination


def test_core_refl_returns_premise():
    d = var_rule(System.MODIFIED, (("x", A),), "x")
    assert core_flatten(sub_refl(A), d) is d


def test_core_top_arr_shape():
    d = top_intro(System.MODIFIED, (("m", TOP),), Var("m"))
    out = core_flatten(sub_top_arr(), d)
    assert out.rule is BcdRule.BETA_ETA
    assert out.subject == Var("m") and out.type == Arr(TOP, TOP)
    assert out.children[0].rule is BcdRule.ARR_INTRO
    assert out.children[0].children[0].rule is BcdRule.TOP_INTRO
    check_bcd_typing(out)


def test_core_dist_shape():
    sigma = Sect(Arr(A, B), Arr(A, C))
    d = var_rule(System.MODIFIED, (("m", sigma),), "m")
    out = core_flatten(sub_dist(A, B, C), d)
    check_bcd_typing(out)
    assert out.subject == Var("m") and out.type == Arr(A, Sect(B, C))
    assert count_beta_steps(out) == 0


def test_lemma_sub_free_flips_system():
    inner = var_rule(System.EXTENDED, (("x", A),), "x")
    lam = arr_intro(inner)
    out = flatten_derivation(lam)
    assert out.system is System.MODIFIED
    assert out.rule is BcdRule.ARR_INTRO and out.subject == lam.subject
    check_bcd_typing(out)


def test_lemma_var_sub_sectl1():
    basis = (("x", Sect(A, B)),)
    ext = sub_node(var_rule(System.EXTENDED, basis, "x"), sub_sect_l1(A, B))
    out = flatten_derivation(ext)
    assert out.rule is BcdRule.SECT_ELIM1
    assert out.subject == Var("x") and out.type == A
    check_bcd_typing(out)


def test_lemma_var_sub_dist():
    sigma = Sect(Arr(A, B), Arr(A, C))
    basis = (("x", sigma),)
    ext = sub_node(var_rule(System.EXTENDED, basis, "x"), sub_dist(A, B, C))
    out = flatten_derivation(ext)
    check_bcd_typing(out)
    assert out.subject == Var("x")
    assert count_beta_steps(out) == 0


def test_lemma_all_ten_rules():
    for d in ten_rules():
        ext = sub_node(var_rule(System.EXTENDED, (("x", d.lhs),), "x"), d)
        check_bcd_typing(ext)
        out = flatten_derivation(ext)
        system, basis, subject, ty = check_bcd_typing(out)
        assert system is System.MODIFIED
        assert subject == Var("x")  # alpha-exact subject preservation
        assert ty == d.rhs
        assert count_beta_steps(out) == 0


def test_core_rejects_wrong_premise_type():
    d = var_rule(System.MODIFIED, (("x", A),), "x")
    with pytest.raises(BcdError):
        core_flatten(sub_sect_l1(A, B), d)


# ---------------------------------------------------------------------------
# weakening


def test_weaken_leaf_and_var():
    leaf = top_intro(System.MODIFIED, (), Var("m"))
    out = weaken(leaf, "x", A)
    assert out.basis == (("x", A),)
    check_bcd_typing(out)

    v = var_rule(System.MODIFIED, (("y", B),), "y")
    out = weaken(v, "x", A)
    assert check_bcd_typing(out)[3] == B


def test_weaken_rejects_bound_name():
    v = var_rule(System.MODIFIED, (("x", A),), "x")
    with pytest.raises(BcdError):
        weaken(v, "x", B)


def test_weaken_renames_conflicting_binder():
    inner = var_rule(System.MODIFIED, (("y", A), ("x", B)), "x")
    lam = arr_intro(inner)  # y:a |-* \x. x : b -> b
    out = weaken(lam, "x", C)
    check_bcd_typing(out)
    assert out.basis == (("y", A), ("x", C))
    assert out.subject.binder != "x"
    assert alpha_eq(out.subject, lam.subject)


def test_weaken_renames_only_the_conflicting_scope():
    # \x. \x. x : the inner binder shadows; weakening by x renames both
    # lambda binders but the variable still refers to the innermost one
    inner2 = var_rule(System.MODIFIED, (("x", A), ("x", B)), "x")
    lam2 = arr_intro(inner2)  # x:a |-* \x. x : b -> b
    lam1 = arr_intro(lam2)  # |-* \x. \x. x : a -> b -> b
    out = weaken(lam1, "x", C)
    check_bcd_typing(out)
    assert alpha_eq(out.subject, lam1.subject)


# ---------------------------------------------------------------------------
# bounded search


def test_search_examples():
    assert bcd_sub_search(A, TOP, 1).rule is BcdSubRule.TOP_R
    found = bcd_sub_search(Sect(A, B), Sect(B, A), 4)
    assert found is not None
    assert check_bcd_sub(found) == (Sect(A, B), Sect(B, A))
    assert bcd_sub_search(A, B, 3) is None


def test_search_spot_pairs_shallow_depth():
    assert bcd_sub_search(Arr(A, B), TOP, 2) is not None
    assert bcd_sub_search(Sect(A, B), A, 2) is not None
    dist = sub_dist(A, B, C)
    assert bcd_sub_search(dist.lhs, dist.rhs, 2) is not None


def test_search_sound_on_random_pairs():
    rng = random.Random(61)

    def rand_type(depth):
        if depth <= 1 or rng.random() < 0.4:
            return rng.choice((A, B, TOP))
        ctor = Arr if rng.random() < 0.5 else Sect
        return ctor(rand_type(depth - 1), rand_type(depth - 1))

    for _ in range(100):
        s, t = rand_type(3), rand_type(3)
        found = bcd_sub_search(s, t, 3)
        if found is not None:
            assert check_bcd_sub(found) == (s, t)


# ---------------------------------------------------------------------------
# serialization


def test_typing_deriv_sexpr_round_trip():
    basis = (("x", Sect(A, B)),)
    ext = sub_node(var_rule(System.EXTENDED, basis, "x"), sub_sect_l1(A, B))
    text = typing_deriv_to_sexpr(ext)
    assert typing_deriv_from_sexpr(text) == ext
    out = flatten_derivation(ext)
    assert typing_deriv_from_sexpr(typing_deriv_to_sexpr(out)) == out


def test_beta_eta_sexpr_round_trip():
    basis = (("m", Arr(A, B)),)
    inner_basis = basis + (("x", A),)
    app = arr_elim(var_rule(System.MODIFIED, inner_basis, "m"), var_rule(System.MODIFIED, inner_basis, "x"))
    node = beta_eta(arr_intro(app), (((), RedRule.ETA),), Var("m"))
    assert typing_deriv_from_sexpr(typing_deriv_to_sexpr(node)) == node


def test_sexpr_rejects_large_basis():
    text = "(extended (var-rule (basis ((app (var x) (var y)) top)) (var x) top))"
    with pytest.raises(sexpr.SexprError) as exc:
        typing_deriv_from_sexpr(text)
    assert "large" in str(exc.value)
