"""Dual-order small-step semantics for erased source expressions.

One stepping relation, two flavors.  A by-value step reduces a by-value
redex inside a by-value evaluation context; a by-name step reduces a
(more permissive) by-name redex inside a by-name context.  By-name
contexts descend only into the function part of an application, into
projections and injections, and into case scrutinees: they never evaluate
an argument before the function, nor inside a pair.

``enumerate_steps`` lists every step the relation admits, with positions,
so the simulation harness can search; ``cbv_step`` is the deterministic
by-value-only fragment.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .syntax import (
    App,
    Case,
    Expr,
    Fix,
    FixVar,
    Inj,
    Lam,
    Pair,
    Proj,
    Unit,
    Var,
    alpha_eq,
    subst_expr,
    subst_fix_expr,
)

BYVALUE = "byvalue"
BYNAME = "byname"


def is_source_value(e: Expr) -> bool:
    match e:
        case Unit() | Lam(_, _):
            return True
        case Pair(l, r):
            return is_source_value(l) and is_source_value(r)
        case Inj(_, body):
            return is_source_value(body)
    return False


@dataclass(frozen=True)
class SourceStep:
    path: tuple[str, ...]
    flavor: str  # "byvalue" | "byname"
    rule: str  # "beta" | "fix" | "proj" | "case"
    result: Expr


def _reduce_byvalue(e: Expr) -> tuple[str, Expr] | None:
    match e:
        case App(Lam(x, body), arg) if is_source_value(arg):
            return "beta", subst_expr(arg, x, body)
        case Fix(u, body):
            return "fix", subst_fix_expr(e, u, body)
        case Proj(k, Pair(l, r)) if is_source_value(l) and is_source_value(r):
            return "proj", l if k == 1 else r
        case Case(Inj(k, v), x1, e1, x2, e2) if is_source_value(v):
            return "case", subst_expr(v, x1, e1) if k == 1 else subst_expr(v, x2, e2)
    return None


def _reduce_byname(e: Expr) -> tuple[str, Expr] | None:
    match e:
        case App(Lam(x, body), arg):
            return "beta", subst_expr(arg, x, body)
        case Fix(u, body):
            return "fix", subst_fix_expr(e, u, body)
        case Proj(k, Pair(l, r)):
            return "proj", l if k == 1 else r
        case Case(Inj(k, e0), x1, e1, x2, e2):
            return "case", subst_expr(e0, x1, e1) if k == 1 else subst_expr(e0, x2, e2)
    return None


def _byvalue_holes(e: Expr, path: tuple[str, ...]):
    yield path, e
    match e:
        case App(fn, arg):
            yield from _byvalue_holes(fn, path + ("fn",))
            if is_source_value(fn):
                yield from _byvalue_holes(arg, path + ("arg",))
        case Pair(l, r):
            yield from _byvalue_holes(l, path + ("left",))
            if is_source_value(l):
                yield from _byvalue_holes(r, path + ("right",))
        case Proj(_, body):
            yield from _byvalue_holes(body, path + ("body",))
        case Inj(_, body):
            yield from _byvalue_holes(body, path + ("body",))
        case Case(scrut, _, _, _, _):
            yield from _byvalue_holes(scrut, path + ("scrut",))


def _byname_holes(e: Expr, path: tuple[str, ...]):
    yield path, e
    match e:
        case App(fn, _):
            yield from _byname_holes(fn, path + ("fn",))
        case Proj(_, body):
            yield from _byname_holes(body, path + ("body",))
        case Inj(_, body):
            yield from _byname_holes(body, path + ("body",))
        case Case(scrut, _, _, _, _):
            yield from _byname_holes(scrut, path + ("scrut",))


def _plug(e: Expr, path: tuple[str, ...], replacement: Expr) -> Expr:
    if not path:
        return replacement
    field = path[0]
    child = getattr(e, field)
    return dataclasses.replace(e, **{field: _plug(child, path[1:], replacement)})


def enumerate_steps(e: Expr) -> list[SourceStep]:
    """All steps from ``e``: by-value decompositions first, then the
    by-name steps that are not already by-value steps at the same position
    with the same result."""
    steps: list[SourceStep] = []
    for path, sub in _byvalue_holes(e, ()):
        red = _reduce_byvalue(sub)
        if red is not None:
            rule, out = red
            steps.append(SourceStep(path, BYVALUE, rule, _plug(e, path, out)))
    for path, sub in _byname_holes(e, ()):
        red = _reduce_byname(sub)
        if red is not None:
            rule, out = red
            result = _plug(e, path, out)
            if any(
                s.path == path and alpha_eq(s.result, result) for s in steps
            ):
                continue  # already admitted by value; tag stays byvalue
            steps.append(SourceStep(path, BYNAME, rule, result))
    return steps


@dataclass(frozen=True)
class SourceStepResult:
    kind: str  # "value" | "stuck" | "step"
    expr: Expr | None = None
    rule: str = ""


def cbv_step(e: Expr) -> SourceStepResult:
    """Deterministic leftmost by-value step."""
    if is_source_value(e):
        return SourceStepResult("value")
    match e:
        case App(fn, arg):
            if not is_source_value(fn):
                return _sub_step(fn, lambda t: App(t, arg))
            if not is_source_value(arg):
                return _sub_step(arg, lambda t: App(fn, t))
            if isinstance(fn, Lam):
                return SourceStepResult("step", subst_expr(arg, fn.var, fn.body), "beta")
            return SourceStepResult("stuck")
        case Fix(u, body):
            return SourceStepResult("step", subst_fix_expr(e, u, body), "fix")
        case Pair(l, r):
            if not is_source_value(l):
                return _sub_step(l, lambda t: Pair(t, r))
            return _sub_step(r, lambda t: Pair(l, t))
        case Proj(k, body):
            if not is_source_value(body):
                return _sub_step(body, lambda t: Proj(k, t))
            if isinstance(body, Pair):
                return SourceStepResult(
                    "step", body.left if k == 1 else body.right, "proj"
                )
            return SourceStepResult("stuck")
        case Inj(k, body):
            return _sub_step(body, lambda t: Inj(k, t))
        case Case(scrut, x1, e1, x2, e2):
            if not is_source_value(scrut):
                return _sub_step(scrut, lambda t: Case(t, x1, e1, x2, e2))
            if isinstance(scrut, Inj):
                var, branch = (x1, e1) if scrut.k == 1 else (x2, e2)
                return SourceStepResult(
                    "step", subst_expr(scrut.body, var, branch), "case"
                )
            return SourceStepResult("stuck")
        case Var(_) | FixVar(_):
            return SourceStepResult("stuck")
    return SourceStepResult("stuck")


def _sub_step(e: Expr, wrap) -> SourceStepResult:
    r = cbv_step(e)
    if r.kind == "step":
        return SourceStepResult("step", wrap(r.expr), r.rule)
    return SourceStepResult("stuck")


@dataclass
class SourceEvalResult:
    kind: str  # "value" | "stuck" | "out-of-fuel"
    expr: Expr
    steps: int
    trace: list[Expr] | None = None


def cbv_evaluate(e: Expr, fuel: int, want_trace: bool = False) -> SourceEvalResult:
    trace = [e] if want_trace else None
    for n in range(fuel + 1):
        r = cbv_step(e)
        if r.kind == "value":
            return SourceEvalResult("value", e, n, trace)
        if r.kind == "stuck":
            return SourceEvalResult("stuck", e, n, trace)
        if n == fuel:
            break
        e = r.expr
        if want_trace:
            trace.append(e)
    return SourceEvalResult("out-of-fuel", e, fuel, trace)
