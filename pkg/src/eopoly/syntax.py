"""Abstract syntax shared by every other module.

One binding engine serves all five syntactic categories (three type
grammars, source expressions, target terms).  Every node is a frozen
dataclass; binding structure is declared per class via ``scopes``, and the
generic functions ``free_names``, ``subst`` and ``alpha_eq`` interpret that
declaration.  Names live in four namespaces that never mix:

    "x"   term variables
    "u"   fixed-point variables
    "ty"  type variables
    "eo"  evaluation-order variables

Substitution is capture-avoiding; binders are renamed with fresh names
only when a replacement would otherwise be captured.  Equality of types
and terms is alpha-equivalence throughout the package.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, Iterator


# ---------------------------------------------------------------------------
# Evaluation orders and valuenesses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EO:
    """An evaluation order: by-value, by-name, or a quantified variable."""

    tag: str  # "V" | "N" | "var"
    name: str = ""

    def is_var(self) -> bool:
        return self.tag == "var"

    def __repr__(self) -> str:
        return self.name if self.tag == "var" else self.tag


V = EO("V")
N = EO("N")


def eo_var(name: str) -> EO:
    return EO("var", name)


class Valueness(str, Enum):
    VAL = "val"
    TOP = "top"

    def __repr__(self) -> str:
        return self.value


VAL = Valueness.VAL
TOP = Valueness.TOP


def valof(eo: EO) -> Valueness:
    """Valueness of a variable bound at a connective with order ``eo``.

    Only a by-value binding guarantees the variable stands for a value.
    """
    return VAL if eo == V else TOP


def join(a: Valueness, b: Valueness) -> Valueness:
    return VAL if a == VAL and b == VAL else TOP


def vleq(a: Valueness, b: Valueness) -> bool:
    """val is below top; the order is otherwise discrete."""
    return a == b or (a == VAL and b == TOP)


# ---------------------------------------------------------------------------
# Node base and the generic binding engine
# ---------------------------------------------------------------------------

class Node:
    """Base for all AST nodes.

    ``scopes`` lists ``(binder_field, namespace, scoped_fields)`` triples:
    the name stored in ``binder_field`` binds, in ``namespace``, throughout
    the fields named in ``scoped_fields``.
    """

    __slots__ = ()
    scopes: ClassVar[tuple[tuple[str, str, tuple[str, ...]], ...]] = ()
    # (namespace, field) for leaf references, e.g. Var declares ("x", "name").
    ref: ClassVar[tuple[str, str] | None] = None


def children(node: Node) -> Iterator[tuple[str, object]]:
    for f in dataclasses.fields(node):
        yield f.name, getattr(node, f.name)


_fresh_counter = 0


def fresh_name(base: str, avoid: frozenset[str] | set[str]) -> str:
    """Smallest decorated variant of ``base`` not in ``avoid``.

    Produces identifier-shaped names so pretty-printed output stays
    re-parseable after capture-avoiding renames.
    """
    stem = base.rstrip("0123456789")
    if stem.endswith("_"):
        stem = stem[:-1]
    if not stem:
        stem = "v"
    k = 1
    while f"{stem}_{k}" in avoid:
        k += 1
    return f"{stem}_{k}"


from functools import lru_cache as _lru_cache


@_lru_cache(maxsize=None)
def free_names(node: object, ns: str) -> frozenset[str]:
    """Free names of ``node`` in namespace ``ns``."""
    if isinstance(node, EO):
        return frozenset([node.name]) if (ns == "eo" and node.is_var()) else frozenset()
    if not isinstance(node, Node):
        return frozenset()
    cls = type(node)
    if cls.ref is not None and cls.ref[0] == ns:
        return frozenset([getattr(node, cls.ref[1])])
    bound_in: dict[str, frozenset[str]] = {}
    for binder_field, bns, scoped in cls.scopes:
        if bns == ns:
            for f in scoped:
                bound_in[f] = bound_in.get(f, frozenset()) | {getattr(node, binder_field)}
    out: frozenset[str] = frozenset()
    for fname, value in children(node):
        out |= free_names(value, ns) - bound_in.get(fname, frozenset())
    return out


def _replacement_frees(sub: dict[tuple[str, str], object], ns: str) -> frozenset[str]:
    out: frozenset[str] = frozenset()
    for repl in sub.values():
        out |= free_names(repl, ns)
    return out


def subst1(node: object, ns: str, name: str, replacement: object) -> object:
    return subst(node, {(ns, name): replacement})


def alpha_eq(a: object, b: object, _env: tuple[tuple[str, str, str], ...] = ()) -> bool:
    """Equality up to consistent renaming of bound names, all namespaces."""
    if isinstance(a, EO) or isinstance(b, EO):
        if not (isinstance(a, EO) and isinstance(b, EO)):
            return False
        if a.is_var() and b.is_var():
            for ns, x, y in reversed(_env):
                if ns == "eo" and x == a.name:
                    return y == b.name
                if ns == "eo" and y == b.name:
                    return False
            return a.name == b.name
        return a == b
    if not isinstance(a, Node) or type(a) is not type(b):
        return a == b
    cls = type(a)
    if cls.ref is not None:
        ns = cls.ref[0]
        x = getattr(a, cls.ref[1])
        y = getattr(b, cls.ref[1])
        for ens, ex, ey in reversed(_env):
            if ens == ns and ex == x:
                return ey == y
            if ens == ns and ey == y:
                return False
        return x == y
    scope_of: dict[str, list[tuple[str, str, str]]] = {}
    for binder_field, bns, scoped in cls.scopes:
        for f in scoped:
            scope_of.setdefault(f, []).append(
                (bns, getattr(a, binder_field), getattr(b, binder_field))
            )
    for fname, value_a in children(a):
        value_b = getattr(b, fname)
        if any(binder_field == fname for binder_field, _, _ in cls.scopes):
            continue  # binder names are compared via _env
        if isinstance(value_a, (Node, EO)) or isinstance(value_b, (Node, EO)):
            if not alpha_eq(value_a, value_b, _env + tuple(scope_of.get(fname, ()))):
                return False
        elif value_a != value_b:
            return False
    return True


from functools import lru_cache


@lru_cache(maxsize=None)
def alpha_key(node: object, _env: tuple[tuple[str, str], ...] = ()) -> object:
    """A hashable key equal across alpha-equivalent nodes.

    Bound names are replaced by binder indices; free names stay themselves.
    """
    if isinstance(node, EO):
        if node.is_var():
            for i, (ns, x) in enumerate(reversed(_env)):
                if ns == "eo" and x == node.name:
                    return ("eo", i)
            return ("eo", node.name)
        return ("eo", node.tag)
    if not isinstance(node, Node):
        return node
    cls = type(node)
    if cls.ref is not None:
        ns = cls.ref[0]
        name = getattr(node, cls.ref[1])
        for i, (ens, x) in enumerate(reversed(_env)):
            if ens == ns and x == name:
                return (cls.__name__, i)
        return (cls.__name__, name)
    scope_of: dict[str, tuple[tuple[str, str], ...]] = {}
    binder_fields = set()
    for binder_field, bns, scoped in cls.scopes:
        binder_fields.add(binder_field)
        for f in scoped:
            scope_of[f] = scope_of.get(f, ()) + ((bns, getattr(node, binder_field)),)
    parts: list[object] = [cls.__name__]
    for fname, value in children(node):
        if fname in binder_fields:
            continue
        if isinstance(value, (Node, EO)):
            parts.append(alpha_key(value, _env + scope_of.get(fname, ())))
        else:
            parts.append(value)
    return tuple(parts)


# ---------------------------------------------------------------------------
# Impartial source types: every connective carries an evaluation order
# ---------------------------------------------------------------------------

class ImpType(Node):
    __slots__ = ()


@dataclass(frozen=True)
class IUnit(ImpType):
    pass


@dataclass(frozen=True)
class ITyVar(ImpType):
    name: str
    ref: ClassVar = ("ty", "name")


@dataclass(frozen=True)
class IForall(ImpType):
    var: str
    body: ImpType
    scopes: ClassVar = (("var", "ty", ("body",)),)


@dataclass(frozen=True)
class IAllEo(ImpType):
    var: str
    body: ImpType
    scopes: ClassVar = (("var", "eo", ("body",)),)


@dataclass(frozen=True)
class IArrow(ImpType):
    dom: ImpType
    cod: ImpType
    eo: EO


@dataclass(frozen=True)
class IProd(ImpType):
    left: ImpType
    right: ImpType
    eo: EO


@dataclass(frozen=True)
class ISum(ImpType):
    left: ImpType
    right: ImpType
    eo: EO


@dataclass(frozen=True)
class IRec(ImpType):
    var: str
    body: ImpType
    eo: EO
    scopes: ClassVar = (("var", "ty", ("body",)),)


# ---------------------------------------------------------------------------
# Economical types: by-value connectives plus a suspension point
# ---------------------------------------------------------------------------

class EconType(Node):
    __slots__ = ()


@dataclass(frozen=True)
class SUnit(EconType):
    pass


@dataclass(frozen=True)
class STyVar(EconType):
    name: str
    ref: ClassVar = ("ty", "name")


@dataclass(frozen=True)
class SForall(EconType):
    var: str
    body: EconType
    scopes: ClassVar = (("var", "ty", ("body",)),)


@dataclass(frozen=True)
class SAllEo(EconType):
    var: str
    body: EconType
    scopes: ClassVar = (("var", "eo", ("body",)),)


@dataclass(frozen=True)
class SSusp(EconType):
    eo: EO
    body: EconType


@dataclass(frozen=True)
class SArrow(EconType):
    dom: EconType
    cod: EconType


@dataclass(frozen=True)
class SProd(EconType):
    left: EconType
    right: EconType


@dataclass(frozen=True)
class SSum(EconType):
    left: EconType
    right: EconType


@dataclass(frozen=True)
class SRec(EconType):
    var: str
    body: EconType
    scopes: ClassVar = (("var", "ty", ("body",)),)


# ---------------------------------------------------------------------------
# Target types: no evaluation orders, no order quantifier, plus thunks
# ---------------------------------------------------------------------------

class TgtType(Node):
    __slots__ = ()


@dataclass(frozen=True)
class AUnit(TgtType):
    pass


@dataclass(frozen=True)
class ATyVar(TgtType):
    name: str
    ref: ClassVar = ("ty", "name")


@dataclass(frozen=True)
class AForall(TgtType):
    var: str
    body: TgtType
    scopes: ClassVar = (("var", "ty", ("body",)),)


@dataclass(frozen=True)
class AThunk(TgtType):
    body: TgtType


@dataclass(frozen=True)
class AArrow(TgtType):
    dom: TgtType
    cod: TgtType


@dataclass(frozen=True)
class AProd(TgtType):
    left: TgtType
    right: TgtType


@dataclass(frozen=True)
class ASum(TgtType):
    left: TgtType
    right: TgtType


@dataclass(frozen=True)
class ARec(TgtType):
    var: str
    body: TgtType
    scopes: ClassVar = (("var", "ty", ("body",)),)


# ---------------------------------------------------------------------------
# Source expressions (one grammar for all annotation phases)
# ---------------------------------------------------------------------------
#
# The same constructors serve the impartially-annotated, economically-
# annotated and erased phases; annotations, type abstraction/application
# and order-instantiation markers simply never occur in an erased term.

class Expr(Node):
    __slots__ = ()


@dataclass(frozen=True)
class Unit(Expr):
    pass


@dataclass(frozen=True)
class Var(Expr):
    name: str
    ref: ClassVar = ("x", "name")


@dataclass(frozen=True)
class FixVar(Expr):
    name: str
    ref: ClassVar = ("u", "name")


@dataclass(frozen=True)
class Lam(Expr):
    var: str
    body: Expr
    scopes: ClassVar = (("var", "x", ("body",)),)


@dataclass(frozen=True)
class App(Expr):
    fn: Expr
    arg: Expr


@dataclass(frozen=True)
class Fix(Expr):
    var: str
    body: Expr
    scopes: ClassVar = (("var", "u", ("body",)),)


@dataclass(frozen=True)
class TyLam(Expr):
    var: str
    body: Expr
    scopes: ClassVar = (("var", "ty", ("body",)),)


@dataclass(frozen=True)
class TyApp(Expr):
    body: Expr
    ty: Node  # ImpType or EconType, per phase


@dataclass(frozen=True)
class EoApp(Expr):
    """Explicit instantiation of an order quantifier.

    A surface marker only: it is erased before evaluation and before
    elaboration, but it makes order instantiation checkable without
    guessing.
    """

    body: Expr
    eo: EO


@dataclass(frozen=True)
class Pair(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Proj(Expr):
    k: int
    body: Expr


@dataclass(frozen=True)
class Inj(Expr):
    k: int
    body: Expr


@dataclass(frozen=True)
class Case(Expr):
    scrut: Expr
    var1: str
    body1: Expr
    var2: str
    body2: Expr
    scopes: ClassVar = (("var1", "x", ("body1",)), ("var2", "x", ("body2",)))


@dataclass(frozen=True)
class Anno(Expr):
    body: Expr
    ty: Node  # ImpType or EconType, per phase


# ---------------------------------------------------------------------------
# Target terms: explicit thunks, rolls, and type-free quantifier forms
# ---------------------------------------------------------------------------

class Term(Node):
    __slots__ = ()


@dataclass(frozen=True)
class MUnit(Term):
    pass


@dataclass(frozen=True)
class MVar(Term):
    name: str
    ref: ClassVar = ("x", "name")


@dataclass(frozen=True)
class MFixVar(Term):
    name: str
    ref: ClassVar = ("u", "name")


@dataclass(frozen=True)
class MLam(Term):
    var: str
    body: Term
    scopes: ClassVar = (("var", "x", ("body",)),)


@dataclass(frozen=True)
class MApp(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class MFix(Term):
    var: str
    body: Term
    scopes: ClassVar = (("var", "u", ("body",)),)


@dataclass(frozen=True)
class MTyLam(Term):
    body: Term  # type-free: binds nothing


@dataclass(frozen=True)
class MTyApp(Term):
    body: Term  # type-free


@dataclass(frozen=True)
class MThunk(Term):
    body: Term


@dataclass(frozen=True)
class MForce(Term):
    body: Term


@dataclass(frozen=True)
class MPair(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class MProj(Term):
    k: int
    body: Term


@dataclass(frozen=True)
class MInj(Term):
    k: int
    body: Term


@dataclass(frozen=True)
class MCase(Term):
    scrut: Term
    var1: str
    body1: Term
    var2: str
    body2: Term
    scopes: ClassVar = (("var1", "x", ("body1",)), ("var2", "x", ("body2",)))


@dataclass(frozen=True)
class MRoll(Term):
    body: Term


@dataclass(frozen=True)
class MUnroll(Term):
    body: Term


def _make_ref(ns: str, name: str, sample: Node):
    # Binder renaming needs a reference node of the right family.
    if ns == "eo":
        return eo_var(name)
    if isinstance(sample, Term):
        return {"x": MVar, "u": MFixVar}[ns](name)
    if isinstance(sample, Expr):
        return {"x": Var, "u": FixVar}[ns](name)
    if isinstance(sample, ImpType):
        return ITyVar(name)
    if isinstance(sample, EconType):
        return STyVar(name)
    if isinstance(sample, TgtType):
        return ATyVar(name)
    raise TypeError(f"no reference constructor for {sample!r}")


def subst(node: object, sub: dict[tuple[str, str], object]) -> object:
    """Simultaneous capture-avoiding substitution.

    ``sub`` maps ``(namespace, name)`` to a replacement: an AST node for the
    "x"/"u"/"ty" namespaces, an :class:`EO` for "eo".  Capture is avoided by
    renaming the binder, never reported.
    """
    if not sub:
        return node
    if isinstance(node, EO):
        if node.is_var() and ("eo", node.name) in sub:
            repl = sub[("eo", node.name)]
            assert isinstance(repl, EO)
            return repl
        return node
    if not isinstance(node, Node):
        return node
    cls = type(node)
    if cls.ref is not None:
        key = (cls.ref[0], getattr(node, cls.ref[1]))
        if key in sub:
            return sub[key]
        return node

    field_sub: dict[str, dict[tuple[str, str], object]] = {
        fname: sub for fname, _ in children(node)
    }
    new_binders: dict[str, str] = {}
    for binder_field, bns, scoped in cls.scopes:
        bname = getattr(node, binder_field)
        inner = {k: v for k, v in sub.items() if k != (bns, bname)}
        capture = bname in _replacement_frees(inner, bns)
        if capture:
            avoid = set(_replacement_frees(inner, bns))
            for f in scoped:
                avoid |= free_names(getattr(node, f), bns)
            fresh = fresh_name(bname, avoid)
            new_binders[binder_field] = fresh
            sample = getattr(node, scoped[0])
            inner = dict(inner)
            inner[(bns, bname)] = _make_ref(bns, fresh, sample)
        for f in scoped:
            field_sub[f] = inner
    updates: dict[str, object] = {}
    for fname, value in children(node):
        if fname in new_binders:
            updates[fname] = new_binders[fname]
        elif isinstance(value, (Node, EO)):
            new_value = subst(value, field_sub[fname])
            if new_value is not value:
                updates[fname] = new_value
    if not updates:
        return node
    return dataclasses.replace(node, **updates)


def subst_ty_in_ty(replacement: Node, var: str, ty: Node) -> Node:
    return subst(ty, {("ty", var): replacement})


def subst_eo(eo: EO, var: str, node: object) -> object:
    """Substitute an order for an order variable in a type or expression."""
    return subst(node, {("eo", var): eo})


def subst_expr(replacement: Expr, var: str, e: Expr) -> Expr:
    return subst(e, {("x", var): replacement})


def subst_fix_expr(replacement: Expr, var: str, e: Expr) -> Expr:
    return subst(e, {("u", var): replacement})


def subst_term(replacement: Term, var: str, m: Term) -> Term:
    return subst(m, {("x", var): replacement})


def subst_fix_term(replacement: Term, var: str, m: Term) -> Term:
    return subst(m, {("u", var): replacement})


# ---------------------------------------------------------------------------
# Erasure
# ---------------------------------------------------------------------------

def erase(e: Expr) -> Expr:
    """Drop annotations, type abstraction/application, and order markers."""
    match e:
        case Anno(body, _) | TyLam(_, body) | TyApp(body, _) | EoApp(body, _):
            return erase(body)
        case Unit() | Var(_) | FixVar(_):
            return e
        case Lam(x, body):
            return Lam(x, erase(body))
        case App(fn, arg):
            return App(erase(fn), erase(arg))
        case Fix(u, body):
            return Fix(u, erase(body))
        case Pair(l, r):
            return Pair(erase(l), erase(r))
        case Proj(k, body):
            return Proj(k, erase(body))
        case Inj(k, body):
            return Inj(k, erase(body))
        case Case(s, x1, e1, x2, e2):
            return Case(erase(s), x1, erase(e1), x2, erase(e2))
    raise TypeError(f"not a source expression: {e!r}")


def is_erased(e: Expr) -> bool:
    match e:
        case Anno(_, _) | TyLam(_, _) | TyApp(_, _) | EoApp(_, _):
            return False
        case Unit() | Var(_) | FixVar(_):
            return True
        case Lam(_, body) | Fix(_, body) | Proj(_, body) | Inj(_, body):
            return is_erased(body)
        case App(fn, arg):
            return is_erased(fn) and is_erased(arg)
        case Pair(l, r):
            return is_erased(l) and is_erased(r)
        case Case(s, _, e1, _, e2):
            return is_erased(s) and is_erased(e1) and is_erased(e2)
    raise TypeError(f"not a source expression: {e!r}")


def size(node: Node) -> int:
    """Node count, counting expression/term constructors (not types)."""
    n = 1
    for _, value in children(node):
        if isinstance(value, Node) and not isinstance(
            value, (ImpType, EconType, TgtType)
        ):
            n += size(value)
    return n


# ---------------------------------------------------------------------------
# Typing contexts
# ---------------------------------------------------------------------------
#
# A context is an ordered tuple of declarations.  Entry shapes:
#   ("x", name, payload)   term variable; payload is (valueness, type) in the
#                          impartial system, a bare type elsewhere
#   ("u", name, payload)   fixed-point variable
#   ("ty", name, None)     type variable
#   ("eo", name, None)     evaluation-order variable (never in target contexts)

@dataclass(frozen=True)
class Ctx:
    entries: tuple[tuple[str, str, object], ...] = ()

    def _declared(self, kind: str) -> frozenset[str]:
        return frozenset(n for k, n, _ in self.entries if k == kind)

    def declares(self, kind: str, name: str) -> bool:
        return any(k == kind and n == name for k, n, _ in self.entries)

    def lookup(self, kind: str, name: str) -> object:
        for k, n, payload in reversed(self.entries):
            if k == kind and n == name:
                return payload
        raise KeyError((kind, name))

    def _extend(self, kind: str, name: str, payload: object) -> "Ctx":
        if self.declares(kind, name):
            raise ValueError(f"duplicate declaration of {name!r}")
        return type(self)(self.entries + ((kind, name, payload),))

    def with_ty(self, name: str) -> "Ctx":
        return self._extend("ty", name, None)

    def with_eo(self, name: str) -> "Ctx":
        return self._extend("eo", name, None)

    def has_eo_decls(self) -> bool:
        return any(k == "eo" for k, _, _ in self.entries)

    def names(self) -> frozenset[str]:
        return frozenset(n for _, n, _ in self.entries)


class ImpCtx(Ctx):
    def with_x(self, name: str, valueness: Valueness, ty: ImpType) -> "ImpCtx":
        return self._extend("x", name, (valueness, ty))

    def with_u(self, name: str, ty: ImpType) -> "ImpCtx":
        return self._extend("u", name, (TOP, ty))


class EconCtx(Ctx):
    def with_x(self, name: str, ty: EconType) -> "EconCtx":
        return self._extend("x", name, ty)

    def with_u(self, name: str, ty: EconType) -> "EconCtx":
        return self._extend("u", name, ty)

    def subst_eo(self, eo: EO, var: str) -> "EconCtx":
        out = []
        for k, n, payload in self.entries:
            if k in ("x", "u"):
                out.append((k, n, subst_eo(eo, var, payload)))
            else:
                out.append((k, n, payload))
        return EconCtx(tuple(out))


class TgtCtx(Ctx):
    def with_x(self, name: str, ty: TgtType) -> "TgtCtx":
        return self._extend("x", name, ty)

    def with_u(self, name: str, ty: TgtType) -> "TgtCtx":
        return self._extend("u", name, ty)


# ---------------------------------------------------------------------------
# Reified derivations
# ---------------------------------------------------------------------------

CHECK = "check"
SYNTH = "synth"


def _install_cached_hashes() -> None:
    """Frozen dataclasses recompute their structural hash on every call;
    memo tables hash large nodes constantly, so cache it per instance."""
    import sys

    mod = sys.modules[__name__]
    for name in dir(mod):
        cls = getattr(mod, name)
        if (isinstance(cls, type) and issubclass(cls, (Node, EO))
                and dataclasses.is_dataclass(cls)):
            orig = cls.__hash__

            def cached(self, _orig=orig):
                d = self.__dict__
                h = d.get("_cached_hash")
                if h is None:
                    h = _orig(self)
                    d["_cached_hash"] = h
                return h

            cls.__hash__ = cached


_install_cached_hashes()


@dataclass(eq=False)
class Derivation:
    """One node of a typing derivation.

    ``info`` carries the rule-specific data a replay or an elaboration walk
    needs (the instantiating order, a projection index, an instantiated
    type), keyed by short names.
    """

    rule: str
    ctx: Ctx
    expr: Expr | None
    direction: str
    ty: Node
    valueness: Valueness
    children: tuple["Derivation", ...] = ()
    info: dict | None = None

    def get(self, key: str):
        return (self.info or {})[key]
