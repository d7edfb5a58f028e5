"""Abstract syntax of the core calculus.

Values, handlers and computations follow the fine-grained call-by-value
grammar. ``Fix`` and ``If`` are the two extensions and say so through the
``EXTENSION`` class flag. Every node is immutable; free variables are computed
once per node and cached, which lets substitution skip closed subtrees.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Union

from .errors import EffectConflict, LeffError

# ------------------------------------------------------------------ types


class Type:
    __slots__ = ()

    def __str__(self) -> str:
        from .printer import show_type

        return show_type(self)


@dataclass(frozen=True, eq=True)
class EffectSet:
    """A finite map from operation names to ``(param, arity)`` types.

    ``rows`` holds effect parameters of a template (abstract, disjoint from
    the named operations). ``top`` is the unconstrained set used when effects
    are erased for simple typing.
    """

    ops: tuple[tuple[str, Type, Type], ...] = ()
    rows: frozenset[str] = frozenset()
    top: bool = False

    @staticmethod
    def of(entries: Iterable[tuple[str, Type, Type]], rows: Iterable[str] = ()) -> EffectSet:
        table: dict[str, tuple[Type, Type]] = {}
        for name, tp, ta in entries:
            if name in table and table[name] != (tp, ta):
                raise EffectConflict(f"operation {name} listed with two signatures")
            table[name] = (tp, ta)
        return EffectSet(tuple(sorted((n, *sig) for n, sig in table.items())), frozenset(rows))

    def names(self) -> frozenset[str]:
        return frozenset(n for n, _, _ in self.ops)

    def signature(self, op: str) -> tuple[Type, Type] | None:
        for name, tp, ta in self.ops:
            if name == op:
                return tp, ta
        return None

    def __contains__(self, op: str) -> bool:
        return self.top or any(name == op for name, _, _ in self.ops)

    def __or__(self, other: EffectSet) -> EffectSet:
        if self.top or other.top:
            return TOP
        return EffectSet.of(self.ops + other.ops, self.rows | other.rows)

    def __le__(self, other: EffectSet) -> bool:
        if other.top:
            return True
        if self.top:
            return False
        mine = set(self.ops)
        return mine <= set(other.ops) and self.rows <= other.rows

    def without(self, names: Iterable[str]) -> EffectSet:
        if self.top:
            return self
        drop = set(names)
        return EffectSet(tuple(e for e in self.ops if e[0] not in drop), self.rows)

    def is_empty(self) -> bool:
        return not self.top and not self.ops and not self.rows

    def __str__(self) -> str:
        from .printer import show_effects

        return show_effects(self)


EMPTY = EffectSet()
TOP = EffectSet(top=True)


@dataclass(frozen=True)
class Base(Type):
    name: str


@dataclass(frozen=True)
class UnitType(Type):
    pass


@dataclass(frozen=True)
class Product(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class ListType(Type):
    elem: Type


@dataclass(frozen=True)
class Arrow(Type):
    """``param -[effects]-> result``: a function with a latent effect."""

    param: Type
    effects: EffectSet
    result: Type


@dataclass(frozen=True)
class HandlerArrow(Type):
    """``value =[handled; output]=> result``."""

    value: Type
    handled: EffectSet
    output: EffectSet
    result: Type


@dataclass(frozen=True)
class TypeVar(Type):
    """A template type parameter; never survives instantiation."""

    name: str


UNIT = UnitType()
BOOL = Base("Bool")
INT = Base("Int")
REAL = Base("Real")

# ------------------------------------------------------------------ terms


class Term:
    """Common base of values and computations."""

    __slots__ = ()
    EXTENSION = False

    @cached_property
    def fv(self) -> frozenset[str]:
        return self._free()

    def _free(self) -> frozenset[str]:
        raise NotImplementedError

    def __str__(self) -> str:
        from .printer import show

        return show(self)


class Value(Term):
    __slots__ = ()


class Computation(Term):
    __slots__ = ()


_NONE: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Var(Value):
    name: str

    def _free(self):
        return frozenset((self.name,))


@dataclass(frozen=True)
class Lambda(Value):
    """``fun (param : param_type) -[effects]-> body``."""

    param: str
    param_type: Type
    effects: EffectSet
    body: Computation

    def _free(self):
        return self.body.fv - {self.param}


@dataclass(frozen=True)
class Pair(Value):
    fst: Value
    snd: Value

    def _free(self):
        return self.fst.fv | self.snd.fv


@dataclass(frozen=True)
class UnitValue(Value):
    def _free(self):
        return _NONE


@dataclass(frozen=True)
class Const(Value):
    """A constant of a base sort: ``Bool``, ``Int``, ``Real`` or an opaque sort like ``A_E``."""

    value: object
    sort: str

    def _free(self):
        return _NONE


@dataclass(frozen=True)
class Builtin(Value):
    """A builtin function symbol; polymorphic ones carry explicit type arguments."""

    name: str
    targs: tuple[Type, ...] = ()

    def _free(self):
        return _NONE


@dataclass(frozen=True)
class ListVal(Value):
    elem: Type
    items: tuple[Value, ...] = ()

    def _free(self):
        out = _NONE
        for item in self.items:
            out = out | item.fv
        return out


@dataclass(frozen=True)
class OpClause:
    op: str
    param: str
    kont: str
    body: Computation


@dataclass(frozen=True)
class Handler:
    """Return clause plus at most one clause per operation, kept sorted by name."""

    ret_var: str
    ret_body: Computation
    clauses: tuple[OpClause, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.clauses, key=lambda c: c.op))
        names = [c.op for c in ordered]
        if len(set(names)) != len(names):
            raise LeffError(f"duplicate handler clause in {names}")
        object.__setattr__(self, "clauses", ordered)

    def handled(self) -> frozenset[str]:
        return frozenset(c.op for c in self.clauses)

    def clause(self, op: str) -> OpClause | None:
        for c in self.clauses:
            if c.op == op:
                return c
        return None

    @cached_property
    def fv(self) -> frozenset[str]:
        out = self.ret_body.fv - {self.ret_var}
        for c in self.clauses:
            out = out | (c.body.fv - {c.param, c.kont})
        return out


@dataclass(frozen=True)
class HandlerValue(Value):
    handler: Handler
    type: HandlerArrow

    def _free(self):
        return self.handler.fv


@dataclass(frozen=True)
class Return(Computation):
    value: Value

    def _free(self):
        return self.value.fv


@dataclass(frozen=True)
class Project(Computation):
    index: int  # 1 or 2
    value: Value

    def _free(self):
        return self.value.fv


@dataclass(frozen=True)
class OpCall(Computation):
    """``op(arg; var. body)``."""

    op: str
    arg: Value
    var: str
    body: Computation

    def _free(self):
        return self.arg.fv | (self.body.fv - {self.var})


@dataclass(frozen=True)
class Let(Computation):
    var: str
    bound: Computation
    body: Computation

    def _free(self):
        return self.bound.fv | (self.body.fv - {self.var})


@dataclass(frozen=True)
class Apply(Computation):
    fn: Value
    arg: Value

    def _free(self):
        return self.fn.fv | self.arg.fv


@dataclass(frozen=True)
class WithHandle(Computation):
    handler: Value
    body: Computation

    def _free(self):
        return self.handler.fv | self.body.fv


@dataclass(frozen=True)
class Fix(Computation):
    """``fix name (param : param_type) -[effects]-> result_type = body``."""

    EXTENSION = True
    name: str
    param: str
    param_type: Type
    effects: EffectSet
    result_type: Type
    body: Computation

    def _free(self):
        return self.body.fv - {self.name, self.param}


@dataclass(frozen=True)
class If(Computation):
    EXTENSION = True
    cond: Value
    then: Computation
    else_: Computation

    def _free(self):
        return self.cond.fv | self.then.fv | self.else_.fv


AnyTerm = Union[Value, Computation]

# ------------------------------------------------------------ fresh names

_SUFFIX = re.compile(r"^(.*?)_(\d+)$")


def fresh(base: str, avoid: Iterable[str] | frozenset[str]) -> str:
    """First ``base_N`` not in ``avoid`` (an existing numeric suffix is dropped)."""
    avoid = avoid if isinstance(avoid, (set, frozenset)) else set(avoid)
    m = _SUFFIX.match(base)
    stem = m.group(1) if m and m.group(1) else base
    if stem in ("", "_"):
        stem = "v"
    n = 1
    while f"{stem}_{n}" in avoid:
        n += 1
    return f"{stem}_{n}"


def free_vars(term: Term | Handler) -> frozenset[str]:
    return term.fv


# ----------------------------------------------------------- substitution


def substitute(term, name: str, value: Value):
    """Capture-avoiding ``term[name := value]`` for values, computations and handlers."""
    return _Subst(name, value).go(term)


class _Subst:
    def __init__(self, name: str, value: Value):
        self.name = name
        self.value = value
        self.vfv = value.fv

    def go(self, t):
        if self.name not in t.fv:
            return t
        match t:
            case Var():
                return self.value
            case Pair(a, b):
                return Pair(self.go(a), self.go(b))
            case ListVal(elem, items):
                return ListVal(elem, tuple(self.go(i) for i in items))
            case Lambda(x, ty, eff, body):
                x, body = self.binder(x, body)
                return Lambda(x, ty, eff, self.under(x, body))
            case HandlerValue(h, ty):
                return HandlerValue(self.handler(h), ty)
            case Handler():
                return self.handler(t)
            case Return(v):
                return Return(self.go(v))
            case Project(i, v):
                return Project(i, self.go(v))
            case OpCall(op, arg, x, body):
                arg = self.go(arg)
                x, body = self.binder(x, body)
                return OpCall(op, arg, x, self.under(x, body))
            case Let(x, bound, body):
                bound = self.go(bound)
                x, body = self.binder(x, body)
                return Let(x, bound, self.under(x, body))
            case Apply(f, a):
                return Apply(self.go(f), self.go(a))
            case WithHandle(h, body):
                return WithHandle(self.go(h), self.go(body))
            case Fix(f, x, t1, eff, t2, body):
                if self.name in (f, x):
                    return t
                f, x, body = self.binders2(f, x, body)
                return Fix(f, x, t1, eff, t2, self.go(body))
            case If(c, a, b):
                return If(self.go(c), self.go(a), self.go(b))
        raise TypeError(f"cannot substitute into {type(t).__name__}")

    def under(self, x: str, body):
        return body if x == self.name else self.go(body)

    def binder(self, x: str, body):
        """Return a binder/body pair in which ``x`` cannot capture the substituted value."""
        if x == self.name or x not in self.vfv or self.name not in body.fv:
            return x, body
        new = fresh(x, self.vfv | body.fv | {self.name})
        return new, substitute(body, x, Var(new))

    def binders2(self, f: str, x: str, body):
        for old in (f, x):
            if old in self.vfv and self.name in body.fv and old != self.name:
                new = fresh(old, self.vfv | body.fv | {self.name, f, x})
                body = substitute(body, old, Var(new))
                if old == f:
                    f = new
                else:
                    x = new
        return f, x, body

    def handler(self, h: Handler) -> Handler:
        if self.name not in h.fv:
            return h
        rx, rbody = h.ret_var, h.ret_body
        if rx != self.name:
            rx, rbody = self.binder(rx, rbody)
            rbody = self.go(rbody)
        clauses = []
        for c in h.clauses:
            if self.name in (c.param, c.kont):
                clauses.append(c)
                continue
            p, k, body = self.binders2(c.param, c.kont, c.body)
            clauses.append(OpClause(c.op, p, k, self.go(body)))
        return Handler(rx, rbody, tuple(clauses))


def substitute_many(term, mapping: dict[str, Value]):
    """Sequential substitution; fine for closed values, which cannot interfere."""
    for name, value in mapping.items():
        term = substitute(term, name, value)
    return term


# ---------------------------------------------------------- alpha equality


def alpha_equal(a, b) -> bool:
    """Structural equality up to renaming of bound variables."""
    return _alpha(a, b, {}, {}, 0)


def _bind(env: dict, name: str, level: int) -> dict:
    out = dict(env)
    out[name] = level
    return out


def _alpha(a, b, ea: dict, eb: dict, lvl: int) -> bool:
    if type(a) is not type(b):
        return False
    match a:
        case Var(x):
            y = b.name
            if x in ea or y in eb:
                return ea.get(x) == eb.get(y) and ea.get(x) is not None
            return x == y
        case Const(v, s):
            return s == b.sort and type(v) is type(b.value) and v == b.value
        case UnitValue():
            return True
        case Builtin():
            return a == b
        case Pair(p, q):
            return _alpha(p, b.fst, ea, eb, lvl) and _alpha(q, b.snd, ea, eb, lvl)
        case ListVal(elem, items):
            return (
                elem == b.elem
                and len(items) == len(b.items)
                and all(_alpha(x, y, ea, eb, lvl) for x, y in zip(items, b.items))
            )
        case Lambda(x, ty, eff, body):
            return (
                ty == b.param_type
                and eff == b.effects
                and _alpha(body, b.body, _bind(ea, x, lvl), _bind(eb, b.param, lvl), lvl + 1)
            )
        case HandlerValue(h, ty):
            return ty == b.type and _alpha_handler(h, b.handler, ea, eb, lvl)
        case Return(v) | Project(_, v):
            return getattr(a, "index", 0) == getattr(b, "index", 0) and _alpha(v, b.value, ea, eb, lvl)
        case OpCall(op, arg, x, body):
            return (
                op == b.op
                and _alpha(arg, b.arg, ea, eb, lvl)
                and _alpha(body, b.body, _bind(ea, x, lvl), _bind(eb, b.var, lvl), lvl + 1)
            )
        case Let(x, bound, body):
            return _alpha(bound, b.bound, ea, eb, lvl) and _alpha(
                body, b.body, _bind(ea, x, lvl), _bind(eb, b.var, lvl), lvl + 1
            )
        case Apply(f, v):
            return _alpha(f, b.fn, ea, eb, lvl) and _alpha(v, b.arg, ea, eb, lvl)
        case WithHandle(h, body):
            return _alpha(h, b.handler, ea, eb, lvl) and _alpha(body, b.body, ea, eb, lvl)
        case Fix(f, x, t1, eff, t2, body):
            ea2 = _bind(_bind(ea, f, lvl), x, lvl + 1)
            eb2 = _bind(_bind(eb, b.name, lvl), b.param, lvl + 1)
            return (t1, eff, t2) == (b.param_type, b.effects, b.result_type) and _alpha(
                body, b.body, ea2, eb2, lvl + 2
            )
        case If(c, t, e):
            return (
                _alpha(c, b.cond, ea, eb, lvl)
                and _alpha(t, b.then, ea, eb, lvl)
                and _alpha(e, b.else_, ea, eb, lvl)
            )
    raise TypeError(f"not a term: {a!r}")


def _alpha_handler(h: Handler, g: Handler, ea, eb, lvl) -> bool:
    if h.handled() != g.handled():
        return False
    if not _alpha(h.ret_body, g.ret_body, _bind(ea, h.ret_var, lvl), _bind(eb, g.ret_var, lvl), lvl + 1):
        return False
    for c, d in zip(h.clauses, g.clauses):
        ea2 = _bind(_bind(ea, c.param, lvl), c.kont, lvl + 1)
        eb2 = _bind(_bind(eb, d.param, lvl), d.kont, lvl + 1)
        if not _alpha(c.body, d.body, ea2, eb2, lvl + 2):
            return False
    return True


# ------------------------------------------------------------- traversal


def subterms(term) -> Iterator:
    """Pre-order walk over every value, computation and handler inside ``term``."""
    stack = [term]
    while stack:
        t = stack.pop()
        yield t
        match t:
            case Pair(a, b):
                stack += [b, a]
            case ListVal(_, items):
                stack += reversed(items)
            case Lambda(body=body) | Fix(body=body):
                stack.append(body)
            case HandlerValue(h, _):
                stack.append(h)
            case Handler():
                stack += [c.body for c in reversed(t.clauses)]
                stack.append(t.ret_body)
            case Return(v) | Project(_, v):
                stack.append(v)
            case OpCall(_, arg, _, body):
                stack += [body, arg]
            case Let(_, bound, body):
                stack += [body, bound]
            case Apply(f, a):
                stack += [a, f]
            case WithHandle(h, body):
                stack += [body, h]
            case If(c, a, b):
                stack += [b, a, c]


def size(term) -> int:
    return sum(1 for _ in subterms(term))


# ------------------------------------------------- type/effect mapping


def map_type(ty: Type, tsub: dict[str, Type], esub: dict[str, EffectSet]) -> Type:
    """Instantiate type variables and effect rows inside a type."""
    match ty:
        case TypeVar(n):
            return tsub.get(n, ty)
        case Product(a, b):
            return Product(map_type(a, tsub, esub), map_type(b, tsub, esub))
        case ListType(t):
            return ListType(map_type(t, tsub, esub))
        case Arrow(a, e, b):
            return Arrow(map_type(a, tsub, esub), map_effects(e, esub), map_type(b, tsub, esub))
        case HandlerArrow(v, e1, e2, c):
            return HandlerArrow(
                map_type(v, tsub, esub), map_effects(e1, esub), map_effects(e2, esub), map_type(c, tsub, esub)
            )
    return ty


def map_effects(eff: EffectSet, esub: dict[str, EffectSet]) -> EffectSet:
    if eff.top or not eff.rows & esub.keys():
        return eff
    out = EffectSet(eff.ops, eff.rows - esub.keys())
    for row in eff.rows & esub.keys():
        out = out | esub[row]
    return out


def map_annotations(term, fty, feff):
    """Rebuild ``term`` with ``fty`` applied to every type annotation and ``feff`` to every effect annotation."""

    def go(t):
        match t:
            case Var() | Const() | UnitValue():
                return t
            case Builtin(n, targs):
                return Builtin(n, tuple(fty(a) for a in targs))
            case Pair(a, b):
                return Pair(go(a), go(b))
            case ListVal(elem, items):
                return ListVal(fty(elem), tuple(go(i) for i in items))
            case Lambda(x, ty, eff, body):
                return Lambda(x, fty(ty), feff(eff), go(body))
            case HandlerValue(h, ty):
                clauses = tuple(OpClause(c.op, c.param, c.kont, go(c.body)) for c in h.clauses)
                return HandlerValue(Handler(h.ret_var, go(h.ret_body), clauses), fty(ty))
            case Return(v):
                return Return(go(v))
            case Project(i, v):
                return Project(i, go(v))
            case OpCall(op, arg, x, body):
                return OpCall(op, go(arg), x, go(body))
            case Let(x, bound, body):
                return Let(x, go(bound), go(body))
            case Apply(f, a):
                return Apply(go(f), go(a))
            case WithHandle(h, body):
                return WithHandle(go(h), go(body))
            case Fix(f, x, t1, eff, t2, body):
                return Fix(f, x, fty(t1), feff(eff), fty(t2), go(body))
            case If(c, a, b):
                return If(go(c), go(a), go(b))
        raise TypeError(f"not a term: {t!r}")

    return go(term)


def instantiate(term, tsub: dict[str, Type], esub: dict[str, EffectSet]):
    return map_annotations(term, lambda t: map_type(t, tsub, esub), lambda e: map_effects(e, esub))
