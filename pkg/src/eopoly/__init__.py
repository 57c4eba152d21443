"""Evaluation-order polymorphism, end to end.

A source language whose types carry evaluation orders (and may quantify
over them), a leaner intermediate system with a single suspension-point
connective, elaboration into an explicit call-by-value core with thunks,
small-step semantics on both ends, and a harness that runs the
metatheory as checks.
"""

from .syntax import (  # noqa: F401
    EO,
    N,
    V,
    VAL,
    TOP,
    Valueness,
    alpha_eq,
    eo_var,
    erase,
    join,
    valof,
)

__version__ = "0.1.0"
