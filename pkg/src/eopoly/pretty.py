"""Printers for every syntactic category, matching the parser's grammar.

Parenthesization is minimal: each node prints at its natural precedence
and gets wrapped only when the position demands something tighter.
Printing then parsing is the identity on ASTs.
"""

from __future__ import annotations

from .syntax import (
    Anno,
    App,
    Case,
    EO,
    EoApp,
    Expr,
    Fix,
    FixVar,
    IAllEo,
    IArrow,
    IForall,
    Inj,
    IProd,
    IRec,
    ISum,
    ITyVar,
    IUnit,
    Lam,
    MApp,
    MCase,
    MFix,
    MFixVar,
    MForce,
    MInj,
    MLam,
    MPair,
    MProj,
    MRoll,
    MThunk,
    MTyApp,
    MTyLam,
    MUnit,
    MUnroll,
    MVar,
    Pair,
    Proj,
    SAllEo,
    SArrow,
    SForall,
    SProd,
    SRec,
    SSum,
    SSusp,
    STyVar,
    SUnit,
    AArrow,
    AForall,
    AProd,
    ARec,
    ASum,
    AThunk,
    ATyVar,
    AUnit,
    TyApp,
    TyLam,
    Unit,
    Var,
)

# Precedence levels: 0 binder/arrow, 1 sum/app, 2 product/prefix,
# 3 postfix, 4 atom.


def pretty_eo(eo: EO) -> str:
    return f"%{eo.name}" if eo.is_var() else eo.tag


def _wrap(s: str, have: int, need: int) -> str:
    return f"({s})" if have < need else s


def pretty_ty(ty, need: int = 0) -> str:
    match ty:
        case IUnit() | SUnit() | AUnit():
            return "1"
        case ITyVar(n) | STyVar(n) | ATyVar(n):
            return f"'{n}"
        case IForall(v, b) | SForall(v, b) | AForall(v, b):
            return _wrap(f"forall '{v}. {pretty_ty(b)}", 0, need)
        case IAllEo(v, b) | SAllEo(v, b):
            return _wrap(f"all %{v}. {pretty_ty(b)}", 0, need)
        case IArrow(d, c, eo):
            s = f"{pretty_ty(d, 1)} -[{pretty_eo(eo)}]> {pretty_ty(c, 0)}"
            return _wrap(s, 0, need)
        case SArrow(d, c) | AArrow(d, c):
            return _wrap(f"{pretty_ty(d, 1)} -> {pretty_ty(c, 0)}", 0, need)
        case ISum(l, r, eo):
            s = f"{pretty_ty(l, 1)} +[{pretty_eo(eo)}] {pretty_ty(r, 2)}"
            return _wrap(s, 1, need)
        case SSum(l, r) | ASum(l, r):
            return _wrap(f"{pretty_ty(l, 1)} + {pretty_ty(r, 2)}", 1, need)
        case IProd(l, r, eo):
            s = f"{pretty_ty(l, 2)} *[{pretty_eo(eo)}] {pretty_ty(r, 3)}"
            return _wrap(s, 2, need)
        case SProd(l, r) | AProd(l, r):
            return _wrap(f"{pretty_ty(l, 2)} * {pretty_ty(r, 3)}", 2, need)
        case IRec(v, b, eo):
            return _wrap(f"rec[{pretty_eo(eo)}] '{v}. {pretty_ty(b)}", 0, need)
        case SRec(v, b) | ARec(v, b):
            return _wrap(f"rec '{v}. {pretty_ty(b)}", 0, need)
        case SSusp(eo, b):
            return _wrap(f"susp[{pretty_eo(eo)}] {pretty_ty(b, 3)}", 2, need)
        case AThunk(b):
            return _wrap(f"U {pretty_ty(b, 3)}", 2, need)
    raise TypeError(f"not a type: {ty!r}")


def pretty_expr(e: Expr, need: int = 0) -> str:
    match e:
        case Unit():
            return "()"
        case Var(x) | FixVar(x):
            return x
        case Lam(x, b):
            return _wrap(f"\\{x}. {pretty_expr(b)}", 0, need)
        case Fix(u, b):
            return _wrap(f"fix {u}. {pretty_expr(b)}", 0, need)
        case TyLam(v, b):
            return _wrap(f"/\\'{v}. {pretty_expr(b)}", 0, need)
        case App(f, a):
            return _wrap(f"{pretty_expr(f, 1)} {pretty_expr(a, 3)}", 1, need)
        case Inj(k, b):
            return _wrap(f"inj{k} {pretty_expr(b, 2)}", 2, need)
        case Proj(k, b):
            return _wrap(f"{pretty_expr(b, 3)}.{k}", 3, need)
        case TyApp(b, ty):
            return _wrap(f"{pretty_expr(b, 3)} [{pretty_ty(ty)}]", 3, need)
        case EoApp(b, eo):
            return _wrap(f"{pretty_expr(b, 3)} {{{pretty_eo(eo)}}}", 3, need)
        case Pair(l, r):
            return f"({pretty_expr(l)}, {pretty_expr(r)})"
        case Anno(b, ty):
            return f"({pretty_expr(b)} : {pretty_ty(ty)})"
        case Case(s, x1, b1, x2, b2):
            return _wrap(
                f"case {pretty_expr(s, 1)} {{ inj1 {x1} -> {pretty_expr(b1)}"
                f" | inj2 {x2} -> {pretty_expr(b2)} }}",
                0, need,
            )
    raise TypeError(f"not a source expression: {e!r}")


def pretty_term(m, need: int = 0) -> str:
    match m:
        case MUnit():
            return "()"
        case MVar(x) | MFixVar(x):
            return x
        case MLam(x, b):
            return _wrap(f"\\{x}. {pretty_term(b)}", 0, need)
        case MFix(u, b):
            return _wrap(f"fix {u}. {pretty_term(b)}", 0, need)
        case MTyLam(b):
            return _wrap(f"/\\. {pretty_term(b)}", 0, need)
        case MTyApp(b):
            return _wrap(f"{pretty_term(b, 3)} []", 3, need)
        case MApp(f, a):
            return _wrap(f"{pretty_term(f, 1)} {pretty_term(a, 3)}", 1, need)
        case MThunk(b):
            return _wrap(f"thunk {pretty_term(b, 2)}", 2, need)
        case MForce(b):
            return _wrap(f"force {pretty_term(b, 2)}", 2, need)
        case MRoll(b):
            return _wrap(f"roll {pretty_term(b, 2)}", 2, need)
        case MUnroll(b):
            return _wrap(f"unroll {pretty_term(b, 2)}", 2, need)
        case MInj(k, b):
            return _wrap(f"inj{k} {pretty_term(b, 2)}", 2, need)
        case MProj(k, b):
            return _wrap(f"{pretty_term(b, 3)}.{k}", 3, need)
        case MPair(l, r):
            return f"({pretty_term(l)}, {pretty_term(r)})"
        case MCase(s, x1, b1, x2, b2):
            return _wrap(
                f"case {pretty_term(s, 1)} {{ inj1 {x1} -> {pretty_term(b1)}"
                f" | inj2 {x2} -> {pretty_term(b2)} }}",
                0, need,
            )
    raise TypeError(f"not a core term: {m!r}")
