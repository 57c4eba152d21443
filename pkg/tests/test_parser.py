"""Concrete syntax: grammar cases and round trips."""

import glob
import os

import pytest

from eopoly.errors import ParseError
from eopoly.parser import (
    parse_expr_text,
    parse_term_text,
    parse_type_text,
)
from eopoly.pretty import pretty_expr, pretty_term, pretty_ty
from eopoly.program import load_program, parse_program
from eopoly.syntax import (
    Anno,
    App,
    Case,
    EoApp,
    Fix,
    FixVar,
    IAllEo,
    IArrow,
    IProd,
    IRec,
    ISum,
    ITyVar,
    IUnit,
    Inj,
    Lam,
    MForce,
    MLam,
    MRoll,
    MThunk,
    MTyApp,
    MTyLam,
    MUnit,
    MVar,
    N,
    Pair,
    SArrow,
    SSusp,
    SUnit,
    TyApp,
    TyLam,
    Unit,
    V,
    Var,
    eo_var,
)

U = IUnit()
CORPUS = os.path.join(os.path.dirname(__file__), "..", "corpus")


def test_annotated_identity():
    got = parse_expr_text(r"(\x. x : 1 -[N]> 1)")
    assert got == Anno(Lam("x", Var("x")), IArrow(U, U, N))


def test_order_quantified_type():
    got = parse_type_text("all %a. 1 -[%a]> 1")
    assert got == IAllEo("a", IArrow(U, U, eo_var("a")))


def test_list_body_type():
    got = parse_type_text("rec[V] 'b. 1 +[V] ('a *[V] 'b)")
    assert got == IRec("b", ISum(U, IProd(ITyVar("a"), ITyVar("b"), V), V), V)


def test_precedence_product_binds_tighter_than_sum():
    got = parse_type_text("1 +[V] 1 *[V] 1")
    assert got == ISum(U, IProd(U, U, V), V)


def test_arrow_is_right_associative():
    got = parse_type_text("1 -[V]> 1 -[N]> 1")
    assert got == IArrow(U, IArrow(U, U, N), V)


def test_econ_types():
    got = parse_type_text("susp[N] 1 -> 1", lang="econ")
    assert got == SArrow(SSusp(N, SUnit()), SUnit())
    got = parse_type_text("susp[V] susp[N] 1", lang="econ")
    assert got == SSusp(V, SSusp(N, SUnit()))


def test_terms():
    assert parse_expr_text("()") == Unit()
    assert parse_expr_text("f x") == App(Var("f"), Var("x"))
    assert parse_expr_text("x.1").k == 1
    assert parse_expr_text("fix u. u") == Fix("u", FixVar("u"))
    got = parse_expr_text("/\\'t. \\x. x")
    assert got == TyLam("t", Lam("x", Var("x")))
    assert parse_expr_text("f [1]") == TyApp(Var("f"), U)
    assert parse_expr_text("f {V}") == EoApp(Var("f"), V)
    assert parse_expr_text("(x, y)") == Pair(Var("x"), Var("y"))
    got = parse_expr_text("case s { inj1 a -> a | inj2 b -> () }")
    assert got == Case(Var("s"), "a", Var("a"), "b", Unit())
    assert parse_expr_text("inj2 (x, y)") == Inj(2, Pair(Var("x"), Var("y")))


def test_fix_scope_separates_namespaces():
    got = parse_expr_text("fix u. \\x. u x")
    assert got == Fix("u", Lam("x", App(FixVar("u"), Var("x"))))


def test_core_terms():
    assert parse_term_text("thunk ()") == MThunk(MUnit())
    assert parse_term_text("force x") == MForce(MVar("x"))
    assert parse_term_text("/\\. \\x. x") == MTyLam(MLam("x", MVar("x")))
    assert parse_term_text("f []") == MTyApp(MVar("f"))
    assert parse_term_text("roll thunk ()") == MRoll(MThunk(MUnit()))


def test_parse_errors_report_position():
    with pytest.raises(ParseError):
        parse_expr_text("case x {")
    with pytest.raises(ParseError):
        parse_type_text("1 -[Q]> 1")
    with pytest.raises(ParseError):
        parse_expr_text("x.3")


def test_program_requires_annotation():
    with pytest.raises(ParseError):
        parse_program("#lang impartial\n()")


def test_program_abbreviations_expand():
    prog = parse_program(
        "#lang impartial\n"
        "type Two = 1 +[V] 1\n"
        "type Box %a 't = 1 -[%a]> 't\n"
        "((\\x. x) : Box N Two)"
    )
    assert prog.main == Anno(
        Lam("x", Var("x")), IArrow(U, ISum(U, U, V), N)
    )


def test_round_trip_corpus():
    for path in sorted(glob.glob(os.path.join(CORPUS, "*.eo"))):
        prog = load_program(path)
        lang = prog.lang
        printed = pretty_expr(prog.main)
        again = parse_expr_text(printed, lang=lang)
        assert again == prog.main, path


@pytest.mark.parametrize(
    "text,lang",
    [
        ("all %a. forall 't. (1 -[%a]> 't) *[V] (rec[N] 'b. 't +[%a] 'b)", "impartial"),
        ("rec 'b. susp[%a] (1 + 't * 'b)", "econ"),
        ("susp[V] (susp[N] 1 -> 1) -> forall 't. 't", "econ"),
    ],
)
def test_type_round_trips(text, lang):
    ty = parse_type_text(text, lang=lang)
    assert parse_type_text(pretty_ty(ty), lang=lang) == ty


def test_term_round_trips():
    texts = [
        "(\\x. force x) (thunk (fix u. u))",
        "case unroll x { inj1 a -> () | inj2 b -> (b.1, roll b.2) }",
        "(/\\. \\x. x) [] ()",
        "(thunk (f x), \\y. inj1 y)",
    ]
    for text in texts:
        m = parse_term_text(text)
        assert parse_term_text(pretty_term(m)) == m, text


def test_expr_round_trips():
    texts = [
        r"(\f. \x. f x (inj1 x) : 1)",
        "case (f {V} [1] y).2 { inj1 a -> (a, a) | inj2 b -> (b : 1) }",
        r"fix u. \x. (u x.1, x.2)",
    ]
    for text in texts:
        e = parse_expr_text(text)
        assert parse_expr_text(pretty_expr(e)) == e, text


# -- hypothesis: printing then parsing is the identity on random types --------

from hypothesis import given, strategies as st

from eopoly.syntax import IForall, eo_var as _eo_var

_orders = st.sampled_from([V, N, _eo_var("a")])
_tnames = st.sampled_from(["a", "b"])


def _imp_types():
    return st.recursive(
        st.one_of(st.just(U), st.builds(ITyVar, _tnames)),
        lambda inner: st.one_of(
            st.builds(IArrow, inner, inner, _orders),
            st.builds(IProd, inner, inner, _orders),
            st.builds(ISum, inner, inner, _orders),
            st.builds(IRec, _tnames, inner, _orders),
            st.builds(IForall, _tnames, inner),
            st.builds(IAllEo, st.just("a"), inner),
        ),
        max_leaves=10,
    )


@given(_imp_types())
def test_type_print_parse_identity(ty):
    assert parse_type_text(pretty_ty(ty)) == ty
