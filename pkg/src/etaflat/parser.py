"""Concrete syntax: lexer and recursive-descent parser for `.lam` sources.

Grammar (precedence low to high):

    type  := prodty ('->' type)?            -- '->' right-associative
    prodty:= atomty ('*' atomty)*           -- '*' left-associative
    atomty:= 'int' | 'rat' | 'bool' | '(' type ')'

    expr  := '\\' IDENT '.' expr
           | 'if' expr 'then' expr 'else' expr
           | cmp (':' type)?
    cmp   := add ('<' add)?
    add   := mul (('+' | '-') mul)*
    mul   := app ('/' app)*
    app   := atom+
    atom  := IDENT | INT | 'True' | 'False'
           | '(' expr (',' expr)? ')' | atom '.' ('1' | '2')

Comments run from `--` to end of line.  Negative integers are literals: `-`
immediately followed by a digit lexes as one token, so subtraction needs
space before the right operand (`a - 2`, not `a -2`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    Anno,
    App,
    Arr,
    BinOp,
    BoolLit,
    BOOL,
    Expr,
    FRESH_PREFIX,
    If,
    INT,
    IntLit,
    Lam,
    Op,
    Pair,
    Prod,
    Proj,
    RAT,
    RESERVED_WORDS,
    Type,
    Var,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, kind: str = "syntax"):
        super().__init__(f"{line}:{col}: {kind} error: {message}")
        self.message = message
        self.line = line
        self.col = col
        self.kind = kind


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    line: int
    col: int


_WORD = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_MACHINE = re.compile(rf"{FRESH_PREFIX}[0-9]+")
_KEYWORDS = {
    "if": "IF",
    "then": "THEN",
    "else": "ELSE",
    "True": "TRUE",
    "False": "FALSE",
    "int": "TYINT",
    "rat": "TYRAT",
    "bool": "TYBOOL",
}
_PUNCT = {
    "(": "LPAREN",
    ")": "RPAREN",
    ",": "COMMA",
    ":": "COLON",
    "*": "STAR",
    "+": "PLUS",
    "<": "LT",
    "/": "SLASH",
    ".": "DOT",
    "\\": "LAMBDA",
}


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r":
            i, col = i + 1, col + 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("->", i):
            toks.append(Token("ARROW", "->", line, col))
            i, col = i + 2, col + 2
            continue
        if c == "-":
            # `-3` is a negative literal; `- ` is the subtraction operator
            if i + 1 < n and text[i + 1].isdigit():
                m = re.match(r"-[0-9]+", text[i:])
                toks.append(Token("INT", int(m.group()), line, col))
                i, col = i + len(m.group()), col + len(m.group())
            else:
                toks.append(Token("MINUS", "-", line, col))
                i, col = i + 1, col + 1
            continue
        if c.isdigit():
            m = re.match(r"[0-9]+", text[i:])
            toks.append(Token("INT", int(m.group()), line, col))
            i, col = i + len(m.group()), col + len(m.group())
            continue
        if c == "_":
            m = _MACHINE.match(text, i)
            if m is None:
                raise ParseError(
                    f"identifiers may not start with '_' (reserved prefix {FRESH_PREFIX!r})",
                    line,
                    col,
                    kind="lexical",
                )
            toks.append(Token("IDENT", m.group(), line, col))
            i, col = i + len(m.group()), col + len(m.group())
            continue
        if c.isalpha():
            m = _WORD.match(text, i)
            word = m.group()
            toks.append(Token(_KEYWORDS.get(word, "IDENT"), word, line, col))
            i, col = i + len(word), col + len(word)
            continue
        if c in _PUNCT:
            toks.append(Token(_PUNCT[c], c, line, col))
            i, col = i + 1, col + 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col, kind="lexical")
    toks.append(Token("EOF", None, line, col))
    return toks


_ATOM_START = frozenset({"IDENT", "INT", "TRUE", "FALSE", "LPAREN"})
_TYPE_START = frozenset({"TYINT", "TYRAT", "TYBOOL", "LPAREN"})


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, what: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            self.fail(f"expected {what}, found {t.value!r}" if t.kind != "EOF" else f"expected {what}, found end of input")
        return self.next()

    def fail(self, message: str):
        t = self.peek()
        raise ParseError(message, t.line, t.col)

    # -- types --------------------------------------------------------------

    def type_(self) -> Type:
        left = self.prodty()
        if self.peek().kind == "ARROW":
            self.next()
            return Arr(left, self.type_())
        return left

    def prodty(self) -> Type:
        t = self.atomty()
        while self.peek().kind == "STAR":
            self.next()
            t = Prod(t, self.atomty())
        return t

    def atomty(self) -> Type:
        t = self.peek()
        if t.kind == "TYINT":
            self.next()
            return INT
        if t.kind == "TYRAT":
            self.next()
            return RAT
        if t.kind == "TYBOOL":
            self.next()
            return BOOL
        if t.kind == "LPAREN":
            self.next()
            inner = self.type_()
            self.expect("RPAREN", "')'")
            return inner
        self.fail("expected a type")

    # -- expressions ----------------------------------------------------------

    def expr(self) -> Expr:
        t = self.peek()
        if t.kind == "LAMBDA":
            self.next()
            name = self.expect("IDENT", "an identifier").value
            self.expect("DOT", "'.'")
            return Lam(name, self.expr())
        if t.kind == "IF":
            self.next()
            cond = self.expr()
            self.expect("THEN", "'then'")
            then = self.expr()
            self.expect("ELSE", "'else'")
            return If(cond, then, self.expr())
        e = self.cmp()
        if self.peek().kind == "COLON":
            self.next()
            return Anno(e, self.type_())
        return e

    def cmp(self) -> Expr:
        e = self.add()
        if self.peek().kind == "LT":
            self.next()
            return BinOp(Op.LT, e, self.add())
        return e

    def add(self) -> Expr:
        e = self.mul()
        while self.peek().kind in ("PLUS", "MINUS"):
            op = Op.ADD if self.next().kind == "PLUS" else Op.SUB
            e = BinOp(op, e, self.mul())
        return e

    def mul(self) -> Expr:
        e = self.app()
        while self.peek().kind == "SLASH":
            self.next()
            e = BinOp(Op.DIV, e, self.app())
        return e

    def app(self) -> Expr:
        e = self.atom()
        while self.peek().kind in _ATOM_START:
            e = App(e, self.atom())
        return e

    def atom(self) -> Expr:
        t = self.peek()
        if t.kind == "IDENT":
            self.next()
            e: Expr = Var(t.value)
        elif t.kind == "INT":
            self.next()
            e = IntLit(t.value)
        elif t.kind == "TRUE":
            self.next()
            e = BoolLit(True)
        elif t.kind == "FALSE":
            self.next()
            e = BoolLit(False)
        elif t.kind == "LPAREN":
            self.next()
            first = self.expr()
            if self.peek().kind == "COMMA":
                self.next()
                second = self.expr()
                self.expect("RPAREN", "')'")
                e = Pair(first, second)
            else:
                self.expect("RPAREN", "')'")
                e = first
        else:
            self.fail("expected an expression")
        while self.peek().kind == "DOT":
            self.next()
            idx = self.peek()
            if idx.kind != "INT" or idx.value not in (1, 2):
                self.fail("projection index must be 1 or 2")
            self.next()
            e = Proj(idx.value, e)
        return e


def parse_expr(text: str) -> Expr:
    p = _Parser(tokenize(text))
    e = p.expr()
    if p.peek().kind != "EOF":
        p.fail(f"unexpected {p.peek().value!r} after expression")
    return e


def parse_type(text: str) -> Type:
    p = _Parser(tokenize(text))
    t = p.type_()
    if p.peek().kind != "EOF":
        p.fail(f"unexpected {p.peek().value!r} after type")
    return t
