"""Simple and effect type checking.

One syntax-directed checker serves both systems. In *simple* mode every
effect annotation, and the ambient effect, is replaced by the unconstrained
set, so only the shape of types is checked. In *effect* mode the ambient
set ``E`` bounds which operations may run:

* ``op(V; x. C)`` needs ``op`` in ``E``;
* ``V1 V2`` needs the latent effect of ``V1`` to be included in ``E``;
* ``with V handle C`` with ``V : Tv =[E1; E2]=> Tc`` needs ``E2`` included in
  ``E`` and checks ``C`` under ``E1``;
* a handler value handles operations of ``E1``; whatever it leaves unhandled
  must appear in ``E2``, and every clause body is checked under ``E2`` with
  ``k : Ta -[E2]-> Tc``.

Inclusion is the only form of subsumption; types themselves are compared
for equality.
"""
from __future__ import annotations

from typing import Mapping

from .errors import EffectError, LeffError, TypeCheckError
from .signature import DEFAULT_SIGNATURE, Signature, is_data
from .syntax import (
    BOOL,
    TOP,
    UNIT,
    Apply,
    Arrow,
    Builtin,
    Computation,
    Const,
    EffectSet,
    Fix,
    Handler,
    HandlerArrow,
    HandlerValue,
    If,
    Lambda,
    Let,
    ListType,
    ListVal,
    OpCall,
    Pair,
    Product,
    Project,
    Return,
    Type,
    UnitValue,
    Value,
    Var,
    WithHandle,
)

Context = Mapping[str, Type]


def erase(t: Type) -> Type:
    """Replace every effect annotation by the unconstrained set."""
    match t:
        case Product(a, b):
            return Product(erase(a), erase(b))
        case ListType(e):
            return ListType(erase(e))
        case Arrow(a, _, b):
            return Arrow(erase(a), TOP, erase(b))
        case HandlerArrow(v, _, _, c):
            return HandlerArrow(erase(v), TOP, TOP, erase(c))
    return t


def _short(term) -> str:
    text = " ".join(str(term).split())
    return text if len(text) <= 70 else text[:67] + "..."


class Checker:
    def __init__(self, signature: Signature | None = None, simple: bool = False):
        self.sig = signature or DEFAULT_SIGNATURE
        self.simple = simple

    # -------------------------------------------------------------- utils

    def ann(self, t: Type) -> Type:
        return erase(t) if self.simple else t

    def eff(self, e: EffectSet) -> EffectSet:
        return TOP if self.simple else e

    def same(self, got: Type, want: Type, what) -> None:
        if got != want:
            raise TypeCheckError(f"type mismatch in {_short(what)}: expected {want}, found {got}")

    def op_sig(self, op: str, where) -> tuple[Type, Type]:
        try:
            tp, ta = self.sig.op_signature(op)
        except LeffError:
            raise TypeCheckError(f"unknown operation {op} in {_short(where)}") from None
        return self.ann(tp), self.ann(ta)

    # ------------------------------------------------------------- values

    def value(self, ctx: Context, v: Value) -> Type:
        match v:
            case Var(x):
                if x not in ctx:
                    raise TypeCheckError(f"unbound variable {x}")
                return ctx[x]
            case UnitValue():
                return UNIT
            case Const(c, sort):
                try:
                    t = self.sig.constant_type(v)
                except LeffError as exc:
                    raise TypeCheckError(str(exc)) from None
                py = {"Bool": bool, "Int": int, "Real": float}.get(sort, int)
                if type(c) is not py:
                    raise TypeCheckError(f"malformed constant {v!r}")
                return t
            case Pair(a, b):
                return Product(self.value(ctx, a), self.value(ctx, b))
            case Builtin(name, targs):
                spec = self.sig.builtins.get(name)
                if spec is None:
                    raise TypeCheckError(f"unknown builtin {name}")
                if len(targs) != spec.type_params:
                    raise TypeCheckError(f"{name} expects {spec.type_params} type argument(s)")
                if spec.data_param and not all(is_data(t) for t in targs):
                    raise TypeCheckError(f"{name} is only defined on data types, not {targs[0]}")
                return self.ann(spec.type_of(targs))
            case ListVal(elem, items):
                elem = self.ann(elem)
                for item in items:
                    self.same(self.value(ctx, item), elem, v)
                return ListType(elem)
            case Lambda(x, ty, eff, body):
                ty = self.ann(ty)
                eff = self.eff(eff)
                res = self.comp({**ctx, x: ty}, eff, body)
                return Arrow(ty, eff, res)
            case HandlerValue(h, asc):
                asc = self.ann(asc)
                self.handler(ctx, h, asc)
                return asc
        raise TypeCheckError(f"not a value: {v!r}")

    def handler(self, ctx: Context, h: Handler, asc: HandlerArrow) -> None:
        tv, e1, e2, tc = asc.value, asc.handled, asc.output, asc.result
        for c in h.clauses:
            if self.simple:
                continue
            declared = self.sig.operations.get(c.op)
            if declared is None:
                raise EffectError(f"unknown operation {c.op}")
            if e1.signature(c.op) != declared:
                raise EffectError(f"handler clause for {c.op}, but {c.op} is not in the handled effects {e1}")
        forwarded = e1.without(h.handled())
        if not forwarded <= e2:
            missing = sorted(forwarded.names() - e2.names()) + sorted(forwarded.rows - e2.rows)
            raise EffectError(f"handler forwards {', '.join(missing)} but its output effects {e2} do not include it")
        got = self.comp({**ctx, h.ret_var: tv}, e2, h.ret_body)
        self.same(got, tc, h.ret_body)
        for c in h.clauses:
            tp, ta = self.op_sig(c.op, c.body)
            inner = {**ctx, c.param: tp, c.kont: Arrow(ta, e2, tc)}
            self.same(self.comp(inner, e2, c.body), tc, c.body)

    # ------------------------------------------------------- computations

    def comp(self, ctx: Context, e: EffectSet, c: Computation) -> Type:
        match c:
            case Return(v):
                return self.value(ctx, v)
            case Project(i, v):
                t = self.value(ctx, v)
                if not isinstance(t, Product):
                    raise TypeCheckError(f"pi{i} of a non-pair in {_short(c)}: {t}")
                return t.left if i == 1 else t.right
            case OpCall(op, arg, x, body):
                tp, ta = self.op_sig(op, c)
                if op not in e:
                    raise EffectError(f"operation {op} is not allowed by the effects {e}")
                self.same(self.value(ctx, arg), tp, arg)
                return self.comp({**ctx, x: ta}, e, body)
            case Let(x, bound, body):
                t = self.comp(ctx, e, bound)
                return self.comp({**ctx, x: t}, e, body)
            case Apply(f, a):
                tf = self.value(ctx, f)
                if not isinstance(tf, Arrow):
                    raise TypeCheckError(f"applying a non-function in {_short(c)}: {tf}")
                self.same(self.value(ctx, a), tf.param, a)
                if not tf.effects <= e:
                    raise EffectError(f"{_short(f)} may perform {tf.effects}, more than the allowed {e}")
                return tf.result
            case WithHandle(h, body):
                th = self.value(ctx, h)
                if not isinstance(th, HandlerArrow):
                    raise TypeCheckError(f"'with' needs a handler, got {th}")
                if not th.output <= e:
                    raise EffectError(f"handler output effects {th.output} exceed the allowed {e}")
                self.same(self.comp(ctx, th.handled, body), th.value, body)
                return th.result
            case Fix(f, x, t1, eff, t2, body):
                t1, eff, t2 = self.ann(t1), self.eff(eff), self.ann(t2)
                fn = Arrow(t1, eff, t2)
                self.same(self.comp({**ctx, f: fn, x: t1}, eff, body), t2, body)
                return fn
            case If(v, a, b):
                self.same(self.value(ctx, v), BOOL, v)
                ta = self.comp(ctx, e, a)
                self.same(self.comp(ctx, e, b), ta, b)
                return ta
        raise TypeCheckError(f"not a computation: {c!r}")


# ------------------------------------------------------------------ API


def type_value(ctx: Context, v: Value, signature: Signature | None = None) -> Type:
    return Checker(signature, simple=True).value(dict(ctx), v)


def type_computation(ctx: Context, c: Computation, signature: Signature | None = None) -> Type:
    """Simple typing: effects are ignored, types returned with erased effects."""
    return Checker(signature, simple=True).comp(dict(ctx), TOP, c)


def etype_value(ctx: Context, v: Value, signature: Signature | None = None) -> Type:
    return Checker(signature).value(dict(ctx), v)


def etype_computation(ctx: Context, effects: EffectSet, c: Computation, signature: Signature | None = None) -> Type:
    return Checker(signature).comp(dict(ctx), effects, c)


def etype_handler(ctx: Context, h: Handler | HandlerValue, ascription: HandlerArrow | None = None,
                  signature: Signature | None = None) -> HandlerArrow:
    """Check a handler against an ascription (defaults to the one it carries)."""
    if isinstance(h, HandlerValue):
        ascription = ascription or h.type
        h = h.handler
    if ascription is None:
        raise TypeCheckError("a bare handler needs an ascription")
    Checker(signature).handler(dict(ctx), h, ascription)
    return ascription


def effect_weaken_check(smaller: EffectSet, larger: EffectSet) -> bool:
    """Inclusion used for weakening; signatures of shared operations must agree."""
    for name, tp, ta in smaller.ops:
        sig = larger.signature(name)
        if sig is not None and sig != (tp, ta):
            raise EffectError(f"operation {name} has different signatures in {smaller} and {larger}")
    return smaller <= larger


def weaken_handler_type(t: HandlerArrow, extra: EffectSet) -> HandlerArrow:
    """``Tv =[E1 + F; E2 + F]=> Tc``: the forwarding generalisation of a handler type."""
    return HandlerArrow(t.value, t.handled | extra, t.output | extra, t.result)


def handler_composite_type(inner_to_outer: list[HandlerValue], value_type: Type,
                           signature: Signature | None = None) -> HandlerArrow:
    """Type of stacking handlers (innermost first) as one ``Tv =[E]=> Tc`` map.

    The stack is checked by typing ``fun (c : Unit -[E]-> Tv) -> with Hn handle ... with H1 handle c ()``
    where ``E`` is the innermost handler's handled set, so nothing but the
    checker itself decides the result.
    """
    if not inner_to_outer:
        raise TypeCheckError("empty handler stack")
    e_in = inner_to_outer[0].type.handled
    body: Computation = Apply(Var("c"), UnitValue())
    for h in inner_to_outer:
        body = WithHandle(h, body)
    e_out = inner_to_outer[-1].type.output
    fn = Lambda("c", Arrow(UNIT, e_in, value_type), e_out, body)
    t = Checker(signature).value({}, fn)
    assert isinstance(t, Arrow)
    return HandlerArrow(value_type, e_in, e_out, t.result)


def check_closed(term, signature: Signature | None = None, effects: EffectSet | None = None) -> Type:
    """Type a closed computation; ``effects=None`` selects simple typing."""
    if effects is None:
        return type_computation({}, term, signature)
    return etype_computation({}, effects, term, signature)


__all__ = [
    "Checker",
    "erase",
    "type_value",
    "type_computation",
    "etype_value",
    "etype_computation",
    "etype_handler",
    "effect_weaken_check",
    "weaken_handler_type",
    "handler_composite_type",
    "check_closed",
    "check_program",
]


def check_program(program, effects: EffectSet | None = None, only_own: bool = True) -> dict[str, Type]:
    """Check a parsed program: its vals, its templates (generically) and its main.

    ``effects=None`` uses simple typing; otherwise the main computation is
    checked under ``effects``. A failing declaration re-raises its error with
    the declaration's position attached.
    """
    checker = Checker(program.signature, simple=effects is None)
    params = program.param_types()
    out: dict[str, Type] = {}
    for d in program.decls:
        try:
            if d.kind == "val":
                out[d.name] = checker.value({}, d.payload)
            elif d.kind == "template":
                tpl = d.payload
                out[d.name] = checker.value(dict(tpl.params), tpl.body)
            elif d.kind == "param":
                got = checker.value({}, d.payload.default)
                checker.same(got, checker.ann(d.payload.type), d.payload.default)
        except TypeCheckError as exc:
            exc.span = exc.span or d.span
            exc.args = (f"in {d.kind} {d.name}: {exc.message}",)
            exc.message = exc.args[0]
            raise
    if program.main is not None:
        try:
            ctx = {n: checker.ann(t) for n, t in params.items()}
            out["main"] = checker.comp(ctx, checker.eff(effects if effects is not None else TOP), program.main)
        except TypeCheckError as exc:
            exc.span = exc.span or program.main_span
            raise
    return out
