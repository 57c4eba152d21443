"""Type translation, derivation-driven elaboration, relation membership."""

import pytest

from eopoly import econ, target
from eopoly.elaborate import (
    ElabChecker,
    check_elab,
    collect_annotation_types,
    ctx_target,
    elaborate,
    ty_target,
    type_closure,
)
from eopoly.errors import EvalOrderVarInContext
from eopoly.syntax import (
    AArrow,
    AProd,
    AThunk,
    AUnit,
    App,
    Anno,
    EconCtx,
    EoApp,
    Fix,
    FixVar,
    Lam,
    MApp,
    MFix,
    MFixVar,
    MForce,
    MLam,
    MPair,
    MProj,
    MThunk,
    MUnit,
    MVar,
    N,
    SAllEo,
    SArrow,
    SSusp,
    SUnit,
    TOP,
    TgtCtx,
    Unit,
    V,
    VAL,
    Var,
    alpha_eq,
    eo_var,
)

SU = SUnit()
ID_TY = SAllEo("a", SArrow(SSusp(eo_var("a"), SU), SU))
GOLDEN = MPair(MLam("x", MVar("x")), MLam("x", MForce(MVar("x"))))


def test_ty_target_by_name_suspension():
    assert ty_target(SSusp(N, SU)) == AThunk(AUnit())


def test_ty_target_order_quantifier_pairs_instances():
    assert ty_target(ID_TY) == AProd(
        AArrow(AUnit(), AUnit()), AArrow(AThunk(AUnit()), AUnit())
    )


def test_ty_target_value_suspensions_vanish():
    assert ty_target(SSusp(V, SSusp(V, SU))) == AUnit()


def test_ctx_target():
    ctx = EconCtx().with_x("x", SSusp(N, SU))
    assert ctx_target(ctx).lookup("x", "x") == AThunk(AUnit())
    assert ctx_target(EconCtx()).entries == ()
    with pytest.raises(EvalOrderVarInContext):
        ctx_target(EconCtx().with_eo("a"))


def test_golden_order_polymorphic_identity():
    r = econ.econ_check(EconCtx(), Lam("x", Var("x")), ID_TY)
    er = elaborate(r.deriv)
    assert er.valueness == VAL
    assert alpha_eq(er.term, GOLDEN)
    assert target.target_check(TgtCtx(), er.term, ty_target(ID_TY))


def test_elaborate_unit_under_by_name_suspension():
    r = econ.econ_check(EconCtx(), Unit(), SSusp(N, SU))
    er = elaborate(r.deriv)
    assert er.valueness == VAL and er.term == MThunk(MUnit())


def test_elaborate_unit():
    r = econ.econ_check(EconCtx(), Unit(), SU)
    er = elaborate(r.deriv)
    assert er.valueness == VAL and er.term == MUnit()


def test_elaborate_rejects_open_order_context():
    r = econ.econ_check(EconCtx().with_eo("a"), Unit(),
                        SSusp(eo_var("a"), SU))
    with pytest.raises(EvalOrderVarInContext):
        elaborate(r.deriv)


def test_elaborate_instantiation_projects():
    prog = Anno(
        App(EoApp(Anno(Lam("x", Var("x")), ID_TY), N), Unit()), SU
    )
    r = econ.econ_synth(EconCtx(), prog)
    er = elaborate(r.deriv)
    assert isinstance(er.term, MApp)
    assert isinstance(er.term.fn, MProj) and er.term.fn.k == 2
    assert er.term.arg == MThunk(MUnit())


def test_check_elab_examples():
    assert check_elab(Unit(), SSusp(N, SU), MThunk(MUnit())) == VAL
    assert check_elab(Unit(), SU, MThunk(MUnit())) is None
    assert check_elab(Lam("x", Var("x")), ID_TY, GOLDEN) == VAL


def test_check_elab_force_of_variable():
    pool = (SSusp(N, SU),)
    got = check_elab(
        App(Lam("x", Var("x")), Unit()), SU,
        MApp(MLam("x", MForce(MVar("x"))), MThunk(MUnit())), pool
    )
    assert got == TOP


def test_check_elab_fix():
    assert check_elab(Fix("u", FixVar("u")), SU, MFix("u", MFixVar("u"))) == TOP
    # Binder names may differ.
    assert check_elab(Fix("u", FixVar("u")), SU, MFix("w", MFixVar("w"))) == TOP


def test_check_elab_respects_structure():
    assert check_elab(Unit(), SU, MVar("x")) is None
    assert check_elab(Lam("x", Var("x")), SU, MLam("x", MVar("x"))) is None


def test_checker_reusable():
    ck = ElabChecker((SSusp(N, SU),))
    assert ck.check(Unit(), SSusp(N, SU), MThunk(MUnit())) == VAL
    assert ck.check(Unit(), SSusp(N, SU), MThunk(MUnit())) == VAL


def test_type_closure_contains_instantiations():
    pool = type_closure([ID_TY])
    assert any(alpha_eq(t, SArrow(SSusp(V, SU), SU)) for t in pool)
    assert any(alpha_eq(t, SArrow(SSusp(N, SU), SU)) for t in pool)


def test_collect_annotation_types():
    e = Anno(Lam("x", Var("x")), SArrow(SU, SU))
    assert collect_annotation_types(e) == [SArrow(SU, SU)]
