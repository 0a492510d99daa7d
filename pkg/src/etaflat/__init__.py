"""etaflat: typecheck under deep subtyping, elaborate to shallow subtyping by
eta-expansion, and verify the rewrite with replayable reduction traces.
Also ships a proof kernel for an intersection-type system where subsumption
is eliminated the same way."""

from .elaborate import ElabResult, expand_subtype, flatten, minimize
from .eta import EtaRule, EtaStep, apply_trace, reduce_search, step_at, verify_trace
from .parser import ParseError, parse_expr, parse_type
from .printer import pretty_expr, pretty_type
from .subtyping import SubDeriv, check_sub_deriv, deep_sub, shallow_sub
from .syntax import alpha_eq, free_vars, fresh_var
from .typecheck import (
    Flavor,
    Mode,
    TypingDeriv,
    check,
    check_typing_deriv,
    erase_to_declarative,
    synth,
)

__all__ = [
    "ElabResult",
    "EtaRule",
    "EtaStep",
    "Flavor",
    "Mode",
    "ParseError",
    "SubDeriv",
    "TypingDeriv",
    "alpha_eq",
    "apply_trace",
    "check",
    "check_sub_deriv",
    "check_typing_deriv",
    "deep_sub",
    "erase_to_declarative",
    "expand_subtype",
    "flatten",
    "free_vars",
    "fresh_var",
    "minimize",
    "parse_expr",
    "parse_type",
    "pretty_expr",
    "pretty_type",
    "reduce_search",
    "shallow_sub",
    "step_at",
    "synth",
    "verify_trace",
]
