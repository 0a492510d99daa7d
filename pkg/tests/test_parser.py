import random

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from etaflat.parser import ParseError, parse_expr, parse_type, tokenize
from etaflat.printer import pretty_expr, pretty_type
from etaflat.syntax import (
    Anno,
    App,
    Arr,
    BinOp,
    BoolLit,
    BOOL,
    If,
    INT,
    IntLit,
    Lam,
    Op,
    Pair,
    Prod,
    Proj,
    RAT,
    Var,
)
from termgen import random_expr, random_type


def test_annotated_identity():
    assert parse_expr("(\\x. x) : int -> int") == Anno(Lam("x", Var("x")), Arr(INT, INT))


def test_division():
    assert parse_expr("1 / 2") == BinOp(Op.DIV, IntLit(1), IntLit(2))


def test_bad_projection_index():
    with pytest.raises(ParseError) as exc:
        parse_expr("e.3")
    assert exc.value.line == 1 and exc.value.col == 3


def test_type_precedence():
    assert parse_type("int -> int -> rat") == Arr(INT, Arr(INT, RAT))
    assert parse_type("int * int -> rat") == Arr(Prod(INT, INT), RAT)
    assert parse_type("int * bool * rat") == Prod(Prod(INT, BOOL), RAT)
    assert pretty_type(Arr(Arr(INT, INT), RAT)) == "(int -> int) -> rat"
    assert pretty_type(Prod(INT, Arr(INT, RAT))) == "int * (int -> rat)"


def test_expr_precedence():
    assert parse_expr("f x y") == App(App(Var("f"), Var("x")), Var("y"))
    assert parse_expr("a - b - c") == BinOp(Op.SUB, BinOp(Op.SUB, Var("a"), Var("b")), Var("c"))
    assert parse_expr("a + b / c") == BinOp(Op.ADD, Var("a"), BinOp(Op.DIV, Var("b"), Var("c")))
    assert parse_expr("f x.1") == App(Var("f"), Proj(1, Var("x")))
    assert parse_expr("(f x).1") == Proj(1, App(Var("f"), Var("x")))
    assert parse_expr("a < b + c") == BinOp(Op.LT, Var("a"), BinOp(Op.ADD, Var("b"), Var("c")))
    assert pretty_expr(Lam("x", App(Var("f"), Var("x")))) == "\\x. f x"


def test_negative_literals():
    assert parse_expr("-3") == IntLit(-3)
    assert parse_expr("1 - -2") == BinOp(Op.SUB, IntLit(1), IntLit(-2))
    # no space after the minus: `-2` is a literal, so this is application
    assert parse_expr("f -2") == App(Var("f"), IntLit(-2))


def test_lambda_body_extends_right():
    assert parse_expr("\\x. x : int") == Lam("x", Anno(Var("x"), INT))
    assert parse_expr("\\x. \\y. x y") == Lam("x", Lam("y", App(Var("x"), Var("y"))))


def test_if_and_pairs():
    e = parse_expr("if True then (1, 2) else (3, 4)")
    assert e == If(BoolLit(True), Pair(IntLit(1), IntLit(2)), Pair(IntLit(3), IntLit(4)))
    assert parse_expr("(1, 2).2") == Proj(2, Pair(IntLit(1), IntLit(2)))


def test_comments():
    src = "1 + 2 -- adds the numbers\n"
    assert parse_expr(src) == BinOp(Op.ADD, IntLit(1), IntLit(2))


def test_nested_annotation_needs_parens():
    assert parse_expr("(x : int) : rat") == Anno(Anno(Var("x"), INT), RAT)
    with pytest.raises(ParseError):
        parse_expr("x : int : rat")


def test_reserved_words_are_not_identifiers():
    with pytest.raises(ParseError):
        parse_expr("then")
    assert parse_expr("True") == BoolLit(True)
    # keywords embedded in longer words are plain identifiers
    assert parse_expr("iffy") == Var("iffy")


def test_machine_names():
    assert parse_expr("_eta_0") == Var("_eta_0")
    for bad in ("_foo", "_eta_x", "_eta_"):
        with pytest.raises(ParseError) as exc:
            parse_expr(bad)
        assert exc.value.kind == "lexical"


def test_error_positions():
    with pytest.raises(ParseError) as exc:
        parse_expr("1 +\n  )")
    assert exc.value.line == 2 and exc.value.col == 3
    with pytest.raises(ParseError) as exc:
        parse_type("int ->")
    assert exc.value.line == 1


def test_trailing_input_rejected():
    with pytest.raises(ParseError):
        parse_expr("1 2)")
    with pytest.raises(ParseError):
        parse_type("int int")


def test_tokenizer_positions():
    toks = tokenize("ab +\n cd")
    assert [(t.kind, t.line, t.col) for t in toks[:3]] == [
        ("IDENT", 1, 1),
        ("PLUS", 1, 4),
        ("IDENT", 2, 2),
    ]


_seeds = st.integers(0, 10**9)


@given(_seeds, st.integers(1, 6))
@settings(max_examples=300)
def test_expr_round_trip(seed, depth):
    e = random_expr(random.Random(seed), depth)
    assert parse_expr(pretty_expr(e)) == e


@given(_seeds, st.integers(1, 5))
@settings(max_examples=300)
def test_type_round_trip(seed, depth):
    t = random_type(random.Random(seed), depth)
    assert parse_type(pretty_type(t)) == t
