"""Minimal s-expression reader/writer shared by the derivation file formats."""

from __future__ import annotations


class SexprError(Exception):
    pass


def loads(text: str):
    """Parse one s-expression: nested lists of symbol strings."""
    toks = _tokenize(text)
    node, rest = _read(toks, 0)
    if rest != len(toks):
        raise SexprError("trailing input after s-expression")
    return node


def dumps(node) -> str:
    if isinstance(node, str):
        return node
    return "(" + " ".join(dumps(x) for x in node) + ")"


def _tokenize(text: str) -> list[str]:
    toks: list[str] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            toks.append(c)
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            toks.append(text[i:j])
            i = j
    return toks


def _read(toks: list[str], i: int):
    if i >= len(toks):
        raise SexprError("unexpected end of input")
    t = toks[i]
    if t == "(":
        items = []
        i += 1
        while i < len(toks) and toks[i] != ")":
            item, i = _read(toks, i)
            items.append(item)
        if i >= len(toks):
            raise SexprError("missing ')'")
        return items, i + 1
    if t == ")":
        raise SexprError("unexpected ')'")
    return t, i + 1
