"""Core syntax: orders, valuenesses, erasure, substitution, alpha."""

import pytest
from hypothesis import given, strategies as st

from eopoly.syntax import (
    Anno,
    App,
    Case,
    EoApp,
    Fix,
    FixVar,
    IArrow,
    IForall,
    ITyVar,
    IUnit,
    Inj,
    Lam,
    N,
    Pair,
    Proj,
    SAllEo,
    SArrow,
    SProd,
    SRec,
    SSusp,
    SSum,
    STyVar,
    SUnit,
    TOP,
    TyLam,
    Unit,
    V,
    VAL,
    Var,
    alpha_eq,
    alpha_key,
    eo_var,
    erase,
    free_names,
    is_erased,
    join,
    subst_eo,
    subst_expr,
    subst_ty_in_ty,
    valof,
)


def test_valof():
    assert valof(V) == VAL
    assert valof(N) == TOP
    assert valof(eo_var("a")) == TOP


@pytest.mark.parametrize(
    "a,b,expected",
    [(VAL, VAL, VAL), (VAL, TOP, TOP), (TOP, VAL, TOP), (TOP, TOP, TOP)],
)
def test_join(a, b, expected):
    assert join(a, b) == expected


def test_erase_annotation():
    assert erase(Anno(Unit(), IUnit())) == Unit()


def test_erase_type_abstraction():
    assert erase(TyLam("a", Lam("x", Var("x")))) == Lam("x", Var("x"))


def test_erase_homomorphic():
    e = App(Var("f"), Unit())
    assert erase(e) == e


def test_erase_drops_order_markers():
    assert erase(EoApp(Var("x"), N)) == Var("x")


def test_erase_idempotent_on_erased():
    es = [
        Lam("x", App(Var("x"), Unit())),
        Case(Inj(1, Unit()), "a", Var("a"), "b", Pair(Var("b"), Unit())),
        Fix("u", Proj(2, Pair(FixVar("u"), Unit()))),
    ]
    for e in es:
        assert is_erased(e)
        assert erase(e) == e


def test_subst_eo_single_occurrence():
    ty = IArrow(IUnit(), IUnit(), eo_var("a"))
    assert subst_eo(V, "a", ty) == IArrow(IUnit(), IUnit(), V)


def test_subst_ty_shadowing():
    ty = IForall("a", ITyVar("a"))
    assert alpha_eq(subst_ty_in_ty(IUnit(), "a", ty), ty)


def test_subst_expr_under_unrelated_binder():
    assert subst_expr(Unit(), "x", Lam("y", Var("x"))) == Lam("y", Unit())


def test_subst_capture_avoidance():
    body = Lam("y", App(Var("x"), Var("y")))
    out = subst_expr(Var("y"), "x", body)
    assert isinstance(out, Lam)
    assert out.var != "y"
    assert out.body == App(Var("y"), Var(out.var))


def test_subst_eo_capture_avoidance():
    # Substituting an order variable under a binder of the same name must
    # rename the binder.
    ty = SAllEo("b", SSusp(eo_var("a"), STyVar("t")))
    out = subst_eo(eo_var("b"), "a", ty)
    assert isinstance(out, SAllEo)
    assert out.var != "b"
    assert out.body == SSusp(eo_var("b"), STyVar("t"))


def test_alpha_eq_examples():
    assert alpha_eq(Lam("x", Var("x")), Lam("y", Var("y")))
    assert not alpha_eq(Lam("x", Var("x")), Lam("y", Unit()))
    assert alpha_eq(IForall("a", ITyVar("a")), IForall("b", ITyVar("b")))


def test_alpha_eq_distinguishes_free_names():
    assert not alpha_eq(Var("x"), Var("y"))
    assert alpha_eq(Var("x"), Var("x"))


def test_alpha_eq_order_binders():
    a = SAllEo("a", SSusp(eo_var("a"), SUnit()))
    b = SAllEo("b", SSusp(eo_var("b"), SUnit()))
    assert alpha_eq(a, b)
    assert not alpha_eq(a, SAllEo("b", SSusp(eo_var("c"), SUnit())))


def test_free_names_namespaces():
    e = Case(Var("s"), "x", App(Var("x"), FixVar("u")), "y", Var("z"))
    assert free_names(e, "x") == {"s", "z"}
    assert free_names(e, "u") == {"u"}
    ty = SAllEo("a", SSusp(eo_var("b"), STyVar("t")))
    assert free_names(ty, "eo") == {"b"}
    assert free_names(ty, "ty") == {"t"}


# -- small-scope enumerated properties --------------------------------------

def small_econ_types(depth):
    if depth == 0:
        yield SUnit()
        yield STyVar("t")
        return
    for s in small_econ_types(depth - 1):
        yield SSusp(eo_var("a"), s)
        yield SRec("r", SSum(SUnit(), s))
        yield SArrow(SUnit(), s)
    yield SProd(STyVar("t"), SSusp(N, SUnit()))


def test_substitution_commutation_enumerated():
    """Order and type substitution commute when the type variable is not
    captured: [E/a][T/t]S == [[E/a]T/t][E/a]S."""
    repl = SSusp(eo_var("a"), SUnit())
    for eo in (V, N):
        for s in small_econ_types(2):
            lhs = subst_eo(eo, "a", subst_ty_in_ty(repl, "t", s))
            rhs = subst_ty_in_ty(subst_eo(eo, "a", repl), "t",
                                 subst_eo(eo, "a", s))
            assert alpha_eq(lhs, rhs), s


# -- hypothesis: alpha equivalence is an equivalence substitution respects --

_names = st.sampled_from(["x", "y", "z"])


def _exprs():
    return st.recursive(
        st.one_of(st.just(Unit()), st.builds(Var, _names)),
        lambda inner: st.one_of(
            st.builds(Lam, _names, inner),
            st.builds(App, inner, inner),
            st.builds(Pair, inner, inner),
            st.builds(lambda k, e: Inj(k, e), st.sampled_from([1, 2]), inner),
        ),
        max_leaves=8,
    )


@given(_exprs())
def test_alpha_reflexive(e):
    assert alpha_eq(e, e)
    assert alpha_key(e) == alpha_key(e)


@given(_exprs(), _exprs())
def test_alpha_symmetric_and_key_consistent(a, b):
    assert alpha_eq(a, b) == alpha_eq(b, a)
    assert alpha_eq(a, b) == (alpha_key(a) == alpha_key(b))


@given(_exprs(), _exprs())
def test_subst_respects_alpha(a, b):
    if alpha_eq(a, b):
        sa = subst_expr(Unit(), "x", a)
        sb = subst_expr(Unit(), "x", b)
        assert alpha_eq(sa, sb)


@given(_exprs())
def test_rename_round_trip(e):
    renamed = subst_expr(Var("fresh_q"), "x", e)
    back = subst_expr(Var("x"), "fresh_q", renamed)
    assert alpha_eq(back, e) or "x" not in free_names(e, "x")
