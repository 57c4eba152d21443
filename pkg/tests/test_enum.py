"""Bounded enumeration of well-typed terms."""

from eopoly import impartial
from eopoly.enum_terms import default_menu, enumerate_welltyped
from eopoly.syntax import (
    Anno,
    App,
    IArrow,
    ImpCtx,
    IUnit,
    Lam,
    N,
    Unit,
    V,
    Var,
    alpha_eq,
    alpha_key,
)

U = IUnit()


def test_menu_shape():
    menu = default_menu()
    assert len(menu) == 10
    assert U in menu


def test_bound_one_yields_unit():
    js = enumerate_welltyped(1)
    assert any(j.expr == Unit() and j.ty == U for j in js)
    for j in js:
        assert j.direction in ("check", "synth")


def test_bound_three_includes_identity_at_both_arrows():
    js = enumerate_welltyped(3)
    ident = Lam("x", Var("x"))
    for eo in (V, N):
        assert any(
            alpha_eq(j.expr, ident) and j.ty == IArrow(U, U, eo)
            and j.direction == "check"
            for j in js
        )


def test_bound_five_includes_annotated_application():
    js = enumerate_welltyped(5)
    wanted = App(Anno(Lam("x", Var("x")), IArrow(U, U, V)), Unit())
    assert any(
        alpha_eq(j.expr, wanted) and j.direction == "synth" for j in js
    )


def test_all_enumerated_judgments_typecheck():
    for j in enumerate_welltyped(4):
        if j.direction == "check":
            r = impartial.check(ImpCtx(), j.expr, j.ty)
        else:
            r = impartial.synth(ImpCtx(), j.expr)
        assert r.valueness == j.valueness


def test_no_alpha_duplicates():
    js = enumerate_welltyped(5)
    seen = set()
    for j in js:
        key = (j.direction, alpha_key(j.expr), alpha_key(j.ty))
        assert key not in seen
        seen.add(key)


# Golden counts, frozen on first run: they pin the enumeration space so an
# accidental generator change shows up as a count drift.
GOLDEN_COUNTS = {1: 1, 2: 25, 3: 151, 4: 635, 5: 2339, 6: 8531}


def test_golden_counts():
    for bound, want in GOLDEN_COUNTS.items():
        assert len(enumerate_welltyped(bound)) == want
