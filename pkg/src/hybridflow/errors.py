"""Exception types shared across the package."""

from __future__ import annotations


class HybridflowError(Exception):
    """Base class for all tool errors."""


class ParamError(HybridflowError, ValueError):
    """A physical parameter is out of range or inconsistent."""


class DomainError(HybridflowError, ValueError):
    """A density or flux argument lies outside its admissible range."""


class ParseError(HybridflowError):
    """Syntax error in DSL or model-file text, with source position."""

    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.col = col
        self.expected = expected
        detail = f"{message} at line {line}, column {col}"
        if expected:
            detail += " (expected: " + ", ".join(expected) + ")"
        super().__init__(detail)


class SemanticError(HybridflowError):
    """Well-formed syntax violating a structural invariant.

    Distinct from ParseError: the text tokenizes and parses, but the tree is
    not a legal program/formula (duplicate jump-set targets, a modality inside
    a test, an undeclared variable, ...).
    """


class EvalError(HybridflowError):
    """Term or formula evaluation failed (unbound variable, division by zero)."""


class UnsupportedFormulaError(HybridflowError):
    """Quantifier or modality reached a quantifier-free evaluation context.

    Box/Diamond properties are handled by the bounded checker, not by direct
    state evaluation.
    """


class IntegrationError(HybridflowError):
    """ODE right-hand side failed to evaluate during a flow."""

    def __init__(self, message: str, time: float):
        self.time = time
        super().__init__(f"{message} (at flow time {time})")


class ReplayError(HybridflowError):
    """A trace could not be interpreted against the given model."""
