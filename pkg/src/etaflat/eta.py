"""Local eta-reduction steps, traces, trace verification, and bounded search.

Two local rules:

    x not free in e
    ----------------- (arrow)        ----------------------- (product)
    \\x. e x  ->  e                    (e.1, e'.2)  ->  e        (e alpha-eq e')

A trace is a replayable list of (path, rule) steps; applying it anywhere in
a term gives the congruence closure.  Every step strictly shrinks the term,
which bounds the search for a reduction sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .syntax import (
    alpha_eq,
    alpha_key,
    App,
    children,
    Expr,
    free_vars,
    Lam,
    node_at,
    node_count,
    Pair,
    Path,
    PathError,
    Proj,
    replace_at,
    Var,
)


class EtaRule(Enum):
    ARR = "arr"
    PROD = "prod"


@dataclass(frozen=True)
class EtaStep:
    at: Path
    rule: EtaRule


EtaTrace = tuple  # of EtaStep


class EtaError(Exception):
    def __init__(self, kind: str, message: str, path: Path):
        where = "/".join(path) if path else "root"
        super().__init__(f"{kind} at {where}: {message}")
        self.kind = kind
        self.path = path


def _contract(node: Expr, rule: EtaRule, path: Path) -> Expr:
    """The replacement for one local redex, or raise."""
    if rule is EtaRule.ARR:
        match node:
            case Lam(x, App(fn, Var(y))) if x == y:
                if x in free_vars(fn):
                    raise EtaError(
                        "variable-capture-condition-violated",
                        f"{x!r} occurs free in the applied function",
                        path,
                    )
                return fn
        raise EtaError("redex-shape-mismatch", "expected \\x. e x", path)
    match node:
        case Pair(Proj(1, g1), Proj(2, g2)):
            if not alpha_eq(g1, g2):
                raise EtaError("redex-shape-mismatch", "projection subjects differ", path)
            return g1
    raise EtaError("redex-shape-mismatch", "expected (e.1, e.2)", path)


def step_at(e: Expr, step: EtaStep) -> Expr:
    try:
        node = node_at(e, step.at)
    except PathError as exc:
        raise EtaError("path-invalid", str(exc), step.at)
    return replace_at(e, step.at, _contract(node, step.rule, step.at))


def apply_trace(e: Expr, trace: EtaTrace) -> Expr:
    for i, step in enumerate(trace):
        try:
            e = step_at(e, step)
        except EtaError as exc:
            raise EtaError(exc.kind, f"step {i}: {exc}", step.at)
    return e


def verify_trace(source: Expr, trace: EtaTrace, target: Expr) -> bool:
    try:
        result = apply_trace(source, trace)
    except EtaError:
        return False
    return alpha_eq(result, target)


def prefix_trace(prefix: Path, trace: EtaTrace) -> EtaTrace:
    return tuple(EtaStep(prefix + s.at, s.rule) for s in trace)


def redexes(e: Expr) -> list:
    """All (path, rule) positions where a local step applies, preorder."""
    found: list = []

    def walk(node: Expr, path: Path) -> None:
        match node:
            case Lam(x, App(fn, Var(y))) if x == y and x not in free_vars(fn):
                found.append((path, EtaRule.ARR))
            case Pair(Proj(1, g1), Proj(2, g2)) if alpha_eq(g1, g2):
                found.append((path, EtaRule.PROD))
        for sel, sub in children(node):
            walk(sub, path + (sel,))

    walk(e, ())
    return found


def reduce_search(source: Expr, target: Expr, fuel: int) -> EtaTrace | None:
    """Exhaustive bounded search for a trace with source ->>eta target.

    Returns some trace of at most `fuel` steps, or None if none exists within
    the bound (not a refutation beyond the bound).  Terminates because every
    step strictly shrinks the term.
    """
    target_key = alpha_key(target)
    target_size = node_count(target)
    # alpha-class -> largest remaining fuel already explored without success
    failed: dict = {}

    def dfs(cur: Expr, fuel_left: int, acc: list) -> EtaTrace | None:
        key = alpha_key(cur)
        if key == target_key:
            return tuple(acc)
        if fuel_left == 0 or node_count(cur) <= target_size:
            return None
        if failed.get(key, -1) >= fuel_left:
            return None
        for path, rule in redexes(cur):
            step = EtaStep(path, rule)
            out = dfs(step_at(cur, step), fuel_left - 1, acc + [step])
            if out is not None:
                return out
        failed[key] = fuel_left
        return None

    if fuel < 0:
        return None
    return dfs(source, fuel, [])


# ---------------------------------------------------------------------------
# trace files: one `<path> <rule>` line per step, `.` for the root path


def format_trace(trace: EtaTrace) -> str:
    lines = []
    for step in trace:
        path = "/".join(step.at) if step.at else "."
        lines.append(f"{path} {step.rule.value}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_trace(text: str) -> EtaTrace:
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"trace line {lineno}: expected '<path> <rule>'")
        path_text, rule_text = parts
        path: Path = () if path_text == "." else tuple(path_text.split("/"))
        try:
            rule = EtaRule(rule_text)
        except ValueError:
            raise ValueError(f"trace line {lineno}: unknown rule {rule_text!r}")
        steps.append(EtaStep(path, rule))
    return tuple(steps)
