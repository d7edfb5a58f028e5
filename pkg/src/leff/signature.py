"""Signature registry: base types, constants, builtins, operations and effect aliases.

Builtins compute on a native runtime representation shared by both
evaluators: ``()`` for unit, 2-tuples for pairs, ``bool``/``int``/``float``
for the numeric sorts, :class:`SortVal` for opaque sorts and :class:`RList`
for lists. Anything else (functions, handlers) passes through untouched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .errors import BuiltinFailure, RegistryError, RuntimeTypeError
from .rng import RandomSource
from .syntax import (
    BOOL,
    EMPTY,
    INT,
    REAL,
    UNIT,
    Arrow,
    Base,
    Const,
    EffectSet,
    ListType,
    ListVal,
    Pair,
    Product,
    Type,
    UnitType,
    UnitValue,
    Value,
    Var,
)

A_E = Base("A_E")
A_RL = Base("A_RL")
O_RL = Base("O_RL")

#: sorts whose constants are written ``Sort#n``
OPAQUE_SORTS = ("A_E", "A_RL", "O_RL")
NUMERIC_SORTS = {"Bool": bool, "Int": int, "Real": float}


# ------------------------------------------------------------ native values


@dataclass(frozen=True, slots=True)
class SortVal:
    sort: str
    index: int


class RList:
    """Immutable list carrying its element type, so it reads back without typing."""

    __slots__ = ("elem", "items")

    def __init__(self, elem: Type, items: tuple = ()):
        self.elem = elem
        self.items = items

    def __eq__(self, other):
        return isinstance(other, RList) and self.items == other.items

    def __hash__(self):
        return hash(self.items)

    def __repr__(self):
        return f"RList({self.items!r})"


def to_native(v: Value):
    match v:
        case UnitValue():
            return ()
        case Pair(a, b):
            return (to_native(a), to_native(b))
        case Const(x, sort):
            return SortVal(sort, x) if sort in OPAQUE_SORTS else x
        case ListVal(elem, items):
            return RList(elem, tuple(to_native(i) for i in items))
        case Var(name):
            raise RuntimeTypeError(f"free variable {name} at runtime")
    return v


def readback(x) -> Value:
    """Turn a native value back into syntax; opaque syntax nodes pass through."""
    if isinstance(x, bool):
        return Const(x, "Bool")
    if isinstance(x, int):
        return Const(x, "Int")
    if isinstance(x, float):
        return Const(x, "Real")
    if isinstance(x, tuple):
        if not x:
            return UnitValue()
        return Pair(readback(x[0]), readback(x[1]))
    if isinstance(x, SortVal):
        return Const(x.index, x.sort)
    if isinstance(x, RList):
        return ListVal(x.elem, tuple(readback(i) for i in x.items))
    if isinstance(x, Value):
        return x
    raise RuntimeTypeError(f"no syntax for runtime value {x!r}")


# ---------------------------------------------------------------- builtins


@dataclass(frozen=True)
class BuiltinSpec:
    name: str
    type_params: int
    signature: Callable[..., tuple[Type, Type]]
    impl: Callable  # (arg, rng, targs) -> native
    total: bool = True
    data_param: bool = False  # the type argument must be a data type

    def type_of(self, targs: tuple[Type, ...]) -> Arrow:
        if len(targs) != self.type_params:
            raise RegistryError(f"{self.name} expects {self.type_params} type argument(s), got {len(targs)}")
        param, result = self.signature(*targs)
        return Arrow(param, EMPTY, result)


def _pair(t: Type) -> Type:
    return Product(t, t)


def _divf(a: float, b: float) -> float:
    try:
        return a / b
    except ZeroDivisionError:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)


def _nth(p, rng, targs):
    lst, i = p
    if not 0 <= i < len(lst.items):
        raise BuiltinFailure(f"nth: index {i} out of range for a list of length {len(lst.items)}")
    return lst.items[i]


def _set_nth(p, rng, targs):
    lst, (i, x) = p
    items = lst.items
    if not 0 <= i < len(items):
        return lst
    return RList(lst.elem, items[:i] + (x,) + items[i + 1 :])


def _head(lst, rng, targs):
    if not lst.items:
        raise BuiltinFailure("head of an empty list")
    return lst.items[0]


def _tail(lst, rng, targs):
    if not lst.items:
        raise BuiltinFailure("tail of an empty list")
    return RList(lst.elem, lst.items[1:])


def _fail_action(a, rng, targs):
    raise BuiltinFailure("This action is not available!")


def _intdiv(p, rng, targs):
    a, b = p
    if b == 0:
        return 0
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _binop(f):
    return lambda p, rng, targs: f(p[0], p[1])


def _builtin_table() -> dict[str, BuiltinSpec]:
    specs: list[BuiltinSpec] = []

    def mono(name, param, result, fn, total=True):
        specs.append(BuiltinSpec(name, 0, lambda: (param, result), fn, total))

    for name, fn in [
        ("plus", lambda a, b: a + b),
        ("minus", lambda a, b: a - b),
        ("times", lambda a, b: a * b),
    ]:
        mono(name, _pair(INT), INT, _binop(fn))
    mono("div", _pair(INT), INT, _intdiv)
    for name, fn in [
        ("lt", lambda a, b: a < b),
        ("le", lambda a, b: a <= b),
        ("gt", lambda a, b: a > b),
        ("ge", lambda a, b: a >= b),
    ]:
        mono(name, _pair(INT), BOOL, _binop(fn))
    for name, fn in [
        ("plusf", lambda a, b: a + b),
        ("minusf", lambda a, b: a - b),
        ("timesf", lambda a, b: a * b),
        ("divf", _divf),
    ]:
        mono(name, _pair(REAL), REAL, _binop(fn))
    for name, fn in [
        ("ltf", lambda a, b: a < b),
        ("lef", lambda a, b: a <= b),
        ("gtf", lambda a, b: a > b),
        ("gef", lambda a, b: a >= b),
    ]:
        mono(name, _pair(REAL), BOOL, _binop(fn))
    mono("and", _pair(BOOL), BOOL, _binop(lambda a, b: a and b))
    mono("or", _pair(BOOL), BOOL, _binop(lambda a, b: a or b))
    mono("not", BOOL, BOOL, lambda a, rng, t: not a)
    mono("int_to_real", INT, REAL, lambda a, rng, t: float(a))
    mono("randomfloat", REAL, REAL, lambda b, rng, t: rng.randomfloat(b))
    mono("randomint", INT, INT, lambda n, rng, t: rng.randomint(n))
    mono("act_index", A_E, INT, lambda a, rng, t: a.index)
    mono("act_of_int", INT, A_E, lambda i, rng, t: SortVal("A_E", i))
    mono("act_of_rl", A_RL, A_E, lambda a, rng, t: SortVal("A_E", a.index))
    mono("rl_act_of_int", INT, A_RL, lambda i, rng, t: SortVal("A_RL", i))

    def poly(name, sig, fn, total=True, data=False):
        specs.append(BuiltinSpec(name, 1, sig, fn, total, data))

    poly("eq", lambda t: (_pair(t), BOOL), _binop(lambda a, b: a == b), data=True)
    poly(
        "cons",
        lambda t: (Product(t, ListType(t)), ListType(t)),
        lambda p, rng, targs: RList(targs[0], (p[0],) + p[1].items),
    )
    poly("head", lambda t: (ListType(t), t), _head, total=False)
    poly("tail", lambda t: (ListType(t), ListType(t)), _tail, total=False)
    poly("isnil", lambda t: (ListType(t), BOOL), lambda l, rng, targs: not l.items)
    poly("length", lambda t: (ListType(t), INT), lambda l, rng, targs: len(l.items))
    poly("nth", lambda t: (Product(ListType(t), INT), t), _nth, total=False)
    poly(
        "append",
        lambda t: (_pair(ListType(t)), ListType(t)),
        lambda p, rng, targs: RList(targs[0], p[0].items + p[1].items),
    )
    poly("set_nth", lambda t: (Product(ListType(t), Product(INT, t)), ListType(t)), _set_nth)
    poly("fail_action", lambda t: (A_E, t), _fail_action, total=False)
    return {s.name: s for s in specs}


BUILTINS: dict[str, BuiltinSpec] = _builtin_table()


# ---------------------------------------------------------------- registry


def _ops(table: dict[str, tuple[Type, Type]], *names: str) -> EffectSet:
    return EffectSet.of((n, *table[n]) for n in names)


@dataclass
class Signature:
    """Everything the front end and checkers need to resolve symbols."""

    base_types: set[str] = field(default_factory=set)
    type_aliases: dict[str, Type] = field(default_factory=dict)
    operations: dict[str, tuple[Type, Type]] = field(default_factory=dict)
    effect_aliases: dict[str, EffectSet] = field(default_factory=dict)
    builtins: dict[str, BuiltinSpec] = field(default_factory=dict)

    def copy(self) -> Signature:
        return Signature(
            set(self.base_types),
            dict(self.type_aliases),
            dict(self.operations),
            dict(self.effect_aliases),
            dict(self.builtins),
        )

    def declare_operation(self, op: str, param: Type, arity: Type) -> None:
        old = self.operations.get(op)
        if old is not None and old != (param, arity):
            raise RegistryError(f"operation {op} already declared with a different signature")
        if op in self.builtins:
            raise RegistryError(f"{op} is a builtin")
        self.operations[op] = (param, arity)

    def effects(self, *names: str) -> EffectSet:
        """Effect set of named operations and aliases."""
        out = EMPTY
        for n in names:
            if n in self.effect_aliases:
                out = out | self.effect_aliases[n]
            elif n in self.operations:
                out = out | EffectSet.of([(n, *self.operations[n])])
            else:
                raise RegistryError(f"unknown operation or effect alias {n}")
        return out

    def op_signature(self, op: str) -> tuple[Type, Type]:
        try:
            return self.operations[op]
        except KeyError:
            raise RegistryError(f"unknown operation {op}") from None

    def constant_type(self, c: Const) -> Type:
        if c.sort in NUMERIC_SORTS or c.sort in self.base_types:
            return Base(c.sort)
        raise RegistryError(f"unknown sort {c.sort}")


def default_signature() -> Signature:
    """Fresh copy of the built-in registry for the bandit instance."""
    ops = {
        "choice": (UNIT, A_E),
        "reward": (REAL, UNIT),
        "observe": (UNIT, REAL),
        "do": (A_E, UNIT),
        "choice_RL": (UNIT, A_RL),
        "reward_RL": (REAL, UNIT),
        "observe_RL": (UNIT, O_RL),
        "getactions_RL": (O_RL, ListType(A_RL)),
    }
    aliases = {
        "E_E": _ops(ops, "observe", "do"),
        "E_RL": _ops(ops, "choice", "reward"),
        "E_RL_Abs": _ops(ops, "choice_RL", "reward_RL"),
        "E_I_Abs": _ops(ops, "observe_RL", "getactions_RL"),
    }
    return Signature(
        base_types={"Bool", "Int", "Real", *OPAQUE_SORTS},
        type_aliases={"O_E": REAL},
        operations=ops,
        effect_aliases=aliases,
        builtins=dict(BUILTINS),
    )


DEFAULT_SIGNATURE = default_signature()


def is_data(t: Type) -> bool:
    match t:
        case UnitType() | Base():
            return True
        case Product(a, b):
            return is_data(a) and is_data(b)
        case ListType(e):
            return is_data(e)
    return False


def apply_builtin(spec: BuiltinSpec, targs: tuple[Type, ...], arg, rng: RandomSource):
    """Run a builtin on a native argument, mapping host faults to runtime errors."""
    try:
        return spec.impl(arg, rng, targs)
    except (TypeError, AttributeError, IndexError, ValueError) as exc:
        raise RuntimeTypeError(f"bad argument to {spec.name}: {exc}") from None
