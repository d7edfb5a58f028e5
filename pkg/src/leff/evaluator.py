"""Reference small-step semantics by substitution.

``step`` finds the unique redex of a closed computation (descending through
``let`` heads and ``with ... handle`` bodies) and contracts it:

* ``pi_i (V1, V2)`` steps to ``return V_i``;
* ``let x = return V in C`` steps to ``C[x := V]``;
* ``let x = op(V; y. C1) in C2`` steps to ``op(V; y. let x = C1 in C2)``;
* ``(fun x -> C) V`` steps to ``C[x := V]``; a builtin applied to constants steps to its result;
* ``with H handle return V`` runs the return clause;
* ``with H handle op(V; y. C)`` runs the clause for ``op`` with
  ``k = fun y -> with H handle C``, or, if ``H`` has no clause for ``op``,
  steps to ``op(V; y. with H handle C)``;
* ``fix`` unrolls once and ``if`` picks a branch.

A computation that is an operation call at the top is *stuck*; a
``return V`` at the top is normal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

from .errors import RuntimeTypeError
from .rng import RandomSource
from .signature import DEFAULT_SIGNATURE, Signature, apply_builtin, readback, to_native
from .syntax import (
    Apply,
    Builtin,
    Computation,
    Const,
    Fix,
    HandlerValue,
    If,
    Lambda,
    Let,
    OpCall,
    Pair,
    Project,
    Return,
    Value,
    Var,
    WithHandle,
    fresh,
    substitute,
)


@dataclass(frozen=True)
class Stepped:
    term: Computation


@dataclass(frozen=True)
class Normal:
    value: Value
    steps: int = 0


@dataclass(frozen=True)
class Stuck:
    """An operation with no enclosing handler; ``body`` is its continuation."""

    op: str
    arg: Value
    var: str
    body: Computation
    steps: int = 0


@dataclass(frozen=True)
class FuelExhausted:
    steps: int
    term: object = None


StepResult = Union[Stepped, Normal, Stuck]
Outcome = Union[Normal, Stuck, FuelExhausted]

#: host callbacks answer unhandled operations: ``host(op, native_arg) -> native or Value``
Host = Callable[[str, object], object]
#: ``on_handle(op, native_arg)`` fires whenever a handler clause catches an operation
HandleHook = Callable[[str, object], None]


def unroll(fx: Fix) -> Computation:
    """``fix f x. C`` becomes ``return (fun x -> C[f := fun y -> let g = fix f x. C in g y])``."""
    avoid = set(fx.fv) | {fx.name, fx.param}
    y = fresh("y", avoid)
    g = fresh("g", avoid | {y})
    again = Lambda(y, fx.param_type, fx.effects, Let(g, fx, Apply(Var(g), Var(y))))
    return Return(Lambda(fx.param, fx.param_type, fx.effects, substitute(fx.body, fx.name, again)))


def _contract(c: Computation, rng: RandomSource, sig: Signature) -> Computation:
    match c:
        case Project(i, v):
            if not isinstance(v, Pair):
                raise RuntimeTypeError(f"pi{i} applied to a non-pair: {v}")
            return Return(v.fst if i == 1 else v.snd)
        case Apply(f, a):
            if isinstance(f, Lambda):
                return substitute(f.body, f.param, a)
            if isinstance(f, Builtin):
                spec = sig.builtins.get(f.name)
                if spec is None:
                    raise RuntimeTypeError(f"unknown builtin {f.name}")
                return Return(readback(apply_builtin(spec, f.targs, to_native(a), rng)))
            raise RuntimeTypeError(f"applying a non-function: {f}")
        case Fix():
            return unroll(c)
        case If(v, a, b):
            if not (isinstance(v, Const) and v.sort == "Bool"):
                raise RuntimeTypeError(f"if on a non-boolean: {v}")
            return a if v.value else b
        case WithHandle(hv, _):
            raise RuntimeTypeError(f"'with' on a non-handler: {hv}")
    raise RuntimeTypeError(f"no rule applies to {type(c).__name__}")


def step(
    c: Computation,
    rng: RandomSource | None = None,
    signature: Signature | None = None,
    on_handle: HandleHook | None = None,
) -> StepResult:
    sig = signature or DEFAULT_SIGNATURE
    rng = rng or RandomSource(0)
    frames: list[Computation] = []
    while True:
        if isinstance(c, Let):
            head = c.bound
            if isinstance(head, Return):
                new = substitute(c.body, c.var, head.value)
                break
            if isinstance(head, OpCall):
                y, k = head.var, head.body
                if y in c.body.fv:
                    y2 = fresh(y, c.body.fv | k.fv | {c.var})
                    k, y = substitute(k, y, Var(y2)), y2
                new = OpCall(head.op, head.arg, y, Let(c.var, k, c.body))
                break
            frames.append(c)
            c = head
            continue
        if isinstance(c, WithHandle) and isinstance(c.handler, HandlerValue):
            hv, body = c.handler, c.body
            h = hv.handler
            if isinstance(body, Return):
                new = substitute(h.ret_body, h.ret_var, body.value)
                break
            if isinstance(body, OpCall):
                y, k = body.var, body.body
                if y in hv.fv:
                    y2 = fresh(y, hv.fv | k.fv)
                    k, y = substitute(k, y, Var(y2)), y2
                clause = h.clause(body.op)
                if clause is None:
                    new = OpCall(body.op, body.arg, y, WithHandle(hv, k))
                    break
                if on_handle is not None:
                    on_handle(body.op, to_native(body.arg))
                _, arity = sig.op_signature(body.op)
                kont = Lambda(y, arity, hv.type.output, WithHandle(hv, k))
                new = clause.body
                if clause.param != clause.kont:
                    new = substitute(new, clause.param, body.arg)
                new = substitute(new, clause.kont, kont)
                break
            frames.append(c)
            c = body
            continue
        if isinstance(c, Return):
            return Normal(c.value)
        if isinstance(c, OpCall):
            return Stuck(c.op, c.arg, c.var, c.body)
        new = _contract(c, rng, sig)
        break
    for fr in reversed(frames):
        if isinstance(fr, Let):
            new = Let(fr.var, new, fr.body)
        else:
            new = WithHandle(fr.handler, new)
    return Stepped(new)


def evaluate(
    c: Computation,
    fuel: int = 100_000,
    rng: RandomSource | None = None,
    seed: int = 0,
    signature: Signature | None = None,
    host: Host | None = None,
    on_handle: HandleHook | None = None,
    on_step: Callable[[Computation], None] | None = None,
) -> Outcome:
    """Run ``c`` for at most ``fuel`` steps.

    ``host`` resumes operations that reach the top level; without it such an
    operation ends evaluation as :class:`Stuck`.
    """
    rng = rng or RandomSource(seed)
    sig = signature or DEFAULT_SIGNATURE
    for n in range(fuel):
        r = step(c, rng, sig, on_handle)
        match r:
            case Stepped(term):
                c = term
                if on_step is not None:
                    on_step(c)
            case Normal(v):
                return Normal(v, n)
            case Stuck(op, arg, var, body):
                if host is None:
                    return Stuck(op, arg, var, body, n)
                c = substitute(body, var, readback(host(op, to_native(arg))))
    match c:
        case Return(v):
            return Normal(v, fuel)
        case OpCall(op, arg, var, body) if host is None:
            return Stuck(op, arg, var, body, fuel)
    return FuelExhausted(fuel, c)
