"""Exception hierarchy shared across the package.

Typechecking failures are ordinary, reportable outcomes, so each failure
mode gets its own class; the CLI maps all of them to exit code 1.
"""

from __future__ import annotations


class EopolyError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(EopolyError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


class TypecheckError(EopolyError):
    """Base class for failures of the bidirectional typecheckers."""


class TypeMismatch(TypecheckError):
    pass


class ValueRestriction(TypecheckError):
    """A quantifier introduction needed a value subject but got a possible non-value."""


class UnboundVariable(TypecheckError):
    pass


class GuardednessViolation(TypecheckError):
    """A recursive type whose bound variable is not under a structural connective."""


class MissingAnnotation(TypecheckError):
    """An introduction form sat in a synthesis position."""


class CannotSynthesize(MissingAnnotation):
    pass


class ExposeFailed(TypecheckError):
    """Synthesis needed a connective that unrolling could not reveal."""


class NotAFunction(ExposeFailed):
    pass


class NotAProduct(ExposeFailed):
    pass


class NotASum(ExposeFailed):
    pass


class IllFormedType(TypecheckError):
    pass


class ElaborationError(EopolyError):
    pass


class EvalOrderVarInContext(ElaborationError):
    """Elaboration was attempted under an open evaluation-order quantifier."""


class InstantiationNotClosed(ElaborationError):
    """An order instantiation step used a variable order at elaboration time."""
