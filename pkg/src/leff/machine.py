"""Environment machine with an explicit continuation stack.

Computes the same results as :mod:`leff.evaluator` (same redex order, same
random draws) but without rebuilding terms. Values are compiled to Python
closures over an environment dict; computations to small tuples. The stack
holds ``let`` frames and handler frames. Performing an operation slices the
stack at the nearest handler that has a clause for it; the slice (handler
frame included, so handling is deep) becomes a resumption, which may be
invoked any number of times.
"""
from __future__ import annotations

from typing import Callable

from .errors import RuntimeTypeError
from .evaluator import FuelExhausted, Normal, Outcome, Stuck
from .rng import RandomSource
from .signature import DEFAULT_SIGNATURE, RList, Signature, readback, to_native
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
    ListVal,
    OpCall,
    Pair,
    Project,
    Return,
    UnitValue,
    Value,
    Var,
    WithHandle,
    substitute,
)

RET, PROJ, OP, LET, APP, WITH, FIX, IF, LETV, LETB, APPB = range(11)
LET_FRAME, HANDLE_FRAME = 0, 1


class Closure:
    __slots__ = ("param", "code", "env", "ast")

    def __init__(self, param, code, env, ast):
        self.param, self.code, self.env, self.ast = param, code, env, ast


class RecClosure:
    __slots__ = ("name", "param", "code", "env", "ast")

    def __init__(self, name, param, code, env, ast):
        self.name, self.param, self.code, self.env, self.ast = name, param, code, env, ast


class BuiltinRef:
    __slots__ = ("impl", "targs", "ast")

    def __init__(self, impl, targs, ast):
        self.impl, self.targs, self.ast = impl, targs, ast


class HandlerCode:
    __slots__ = ("ret_var", "ret_code", "clauses", "ast")

    def __init__(self, ret_var, ret_code, clauses, ast):
        self.ret_var, self.ret_code, self.clauses, self.ast = ret_var, ret_code, clauses, ast


class HClosure:
    __slots__ = ("code", "env")

    def __init__(self, code, env):
        self.code, self.env = code, env


class Resumption:
    __slots__ = ("frames", "arity", "output")

    def __init__(self, frames, arity=None, output=None):
        self.frames, self.arity, self.output = frames, arity, output


def _lookup(x: str):
    def get(env):
        try:
            return env[x]
        except KeyError:
            raise RuntimeTypeError(f"unbound variable {x}") from None

    return get


class Compiler:
    def __init__(self, sig: Signature):
        self.sig = sig

    def value(self, v: Value) -> Callable:
        match v:
            case Var(x):
                return _lookup(x)
            case Const() | UnitValue():
                n = to_native(v)
                return lambda env: n
            case ListVal(elem, items) if not v.fv:
                n = to_native(v)
                return lambda env: n
            case ListVal(elem, items):
                fs = [self.value(i) for i in items]
                return lambda env: RList(elem, tuple(f(env) for f in fs))
            case Pair(a, b):
                fa, fb = self.value(a), self.value(b)
                if not v.fv:
                    n = (fa({}), fb({}))
                    return lambda env: n
                return lambda env: (fa(env), fb(env))
            case Builtin(name, targs):
                spec = self.sig.builtins.get(name)
                if spec is None:
                    raise RuntimeTypeError(f"unknown builtin {name}")
                ref = BuiltinRef(spec.impl, targs, v)
                return lambda env: ref
            case Lambda(x, _, _, body):
                code = self.comp(body)
                return lambda env: Closure(x, code, env, v)
            case HandlerValue(h, ty):
                clauses = {}
                for c in h.clauses:
                    _, arity = self.sig.op_signature(c.op)
                    clauses[c.op] = (c.param, c.kont, self.comp(c.body), arity, ty.output)
                hc = HandlerCode(h.ret_var, self.comp(h.ret_body), clauses, v)
                return lambda env: HClosure(hc, env)
        raise RuntimeTypeError(f"cannot compile value {v!r}")

    def comp(self, c: Computation) -> tuple:
        match c:
            case Return(v):
                return (RET, self.value(v))
            case Project(i, v):
                return (PROJ, i - 1, self.value(v))
            case OpCall(op, arg, x, body):
                return (OP, op, self.value(arg), x, self.comp(body))
            case Let(x, Return(v), body):
                return (LETV, x, self.value(v), self.comp(body))
            case Let(x, Apply(Builtin() as b, a), body):
                ref = self.value(b)({})
                return (LETB, x, ref.impl, ref.targs, self.value(a), self.comp(body))
            case Let(x, bound, body):
                return (LET, x, self.comp(bound), self.comp(body))
            case Apply(Builtin() as b, a):
                ref = self.value(b)({})
                return (APPB, ref.impl, ref.targs, self.value(a))
            case Apply(f, a):
                return (APP, self.value(f), self.value(a))
            case WithHandle(h, body):
                return (WITH, self.value(h), self.comp(body))
            case Fix(f, x, _, _, _, body):
                return (FIX, f, x, self.comp(body), c)
            case If(v, a, b):
                return (IF, self.value(v), self.comp(a), self.comp(b))
        raise RuntimeTypeError(f"cannot compile computation {c!r}")


def run(
    c: Computation,
    fuel: int = 10_000_000,
    rng: RandomSource | None = None,
    seed: int = 0,
    signature: Signature | None = None,
    host: Callable[[str, object], object] | None = None,
    on_handle: Callable[[str, object], None] | None = None,
) -> Outcome:
    """Evaluate a closed computation; the outcome's value is read back to syntax."""
    sig = signature or DEFAULT_SIGNATURE
    rng = rng or RandomSource(seed)
    code = Compiler(sig).comp(c)
    result = execute(code, {}, [], fuel, rng, host, on_handle)
    if isinstance(result, tuple):
        kind, payload, steps = result
        if kind == "normal":
            return Normal(to_syntax(payload), steps)
        op, arg, x, _ = payload
        return Stuck(op, to_syntax(arg), x, Return(UnitValue()), steps)
    return result


def execute(code, env, stack, fuel, rng, host=None, on_handle=None):
    """The machine loop. Returns ``("normal", v, steps)``, ``("stuck", ..., steps)`` or FuelExhausted."""
    steps = 0
    while True:
        steps += 1
        if steps > fuel:
            return FuelExhausted(fuel)
        tag = code[0]
        if tag == LETV:
            env = env.copy()
            env[code[1]] = code[2](env)
            code = code[3]
            continue
        if tag == LETB:
            arg = code[4](env)
            try:
                v = code[2](arg, rng, code[3])
            except (TypeError, AttributeError, IndexError, ValueError) as exc:
                raise RuntimeTypeError(f"bad builtin argument {arg!r}: {exc}") from None
            env = env.copy()
            env[code[1]] = v
            code = code[5]
            continue
        if tag == LET:
            stack.append((LET_FRAME, code[1], code[3], env))
            code = code[2]
            continue
        if tag == RET:
            v = code[1](env)
        elif tag == APPB:
            arg = code[3](env)
            try:
                v = code[1](arg, rng, code[2])
            except (TypeError, AttributeError, IndexError, ValueError) as exc:
                raise RuntimeTypeError(f"bad builtin argument {arg!r}: {exc}") from None
        elif tag == APP:
            f = code[1](env)
            a = code[2](env)
            t = type(f)
            if t is Closure:
                env = f.env.copy()
                env[f.param] = a
                code = f.code
                continue
            if t is RecClosure:
                env = f.env.copy()
                env[f.name] = f
                env[f.param] = a
                code = f.code
                continue
            if t is Resumption:
                stack.extend(f.frames)
                v = a
            elif t is BuiltinRef:
                try:
                    v = f.impl(a, rng, f.targs)
                except (TypeError, AttributeError, IndexError, ValueError) as exc:
                    raise RuntimeTypeError(f"bad builtin argument {a!r}: {exc}") from None
            else:
                raise RuntimeTypeError(f"applying a non-function {f!r}")
        elif tag == IF:
            b = code[1](env)
            if b is True:
                code = code[2]
            elif b is False:
                code = code[3]
            else:
                raise RuntimeTypeError(f"if on a non-boolean {b!r}")
            continue
        elif tag == OP:
            op = code[1]
            arg = code[2](env)
            i = len(stack) - 1
            while i >= 0:
                fr = stack[i]
                if fr[0] == HANDLE_FRAME and op in fr[1].code.clauses:
                    break
                i -= 1
            if i < 0:
                if host is None:
                    return ("stuck", (op, arg, code[3], code[4]), steps)
                env = env.copy()
                env[code[3]] = host(op, arg)
                code = code[4]
                continue
            h = stack[i][1]
            seg = stack[i:]
            seg.append((LET_FRAME, code[3], code[4], env))
            del stack[i:]
            param, kont, ccode, arity, output = h.code.clauses[op]
            if on_handle is not None:
                on_handle(op, arg)
            env = h.env.copy()
            env[param] = arg
            env[kont] = Resumption(seg, arity, output)
            code = ccode
            continue
        elif tag == WITH:
            h = code[1](env)
            if type(h) is not HClosure:
                raise RuntimeTypeError(f"'with' on a non-handler {h!r}")
            stack.append((HANDLE_FRAME, h))
            code = code[2]
            continue
        elif tag == PROJ:
            p = code[2](env)
            if type(p) is not tuple or len(p) != 2:
                raise RuntimeTypeError(f"projection from a non-pair {p!r}")
            v = p[code[1]]
        elif tag == FIX:
            v = RecClosure(code[1], code[2], code[3], env, code[4])
        else:  # pragma: no cover
            raise RuntimeTypeError(f"bad code tag {tag}")
        # a value is ready: hand it to the top frame
        if not stack:
            return ("normal", v, steps)
        fr = stack.pop()
        if fr[0] == LET_FRAME:
            env = fr[3].copy()
            env[fr[1]] = v
            code = fr[2]
        else:
            hc = fr[1].code
            env = fr[1].env.copy()
            env[hc.ret_var] = v
            code = hc.ret_code


def to_syntax(x) -> Value:
    """Read a machine value back as a closed syntactic value."""
    t = type(x)
    if t is Closure:
        return _close(x.ast, x.env)
    if t is RecClosure:
        from .evaluator import unroll

        fx = _close_comp(x.ast, x.env)
        return unroll(fx).value
    if t is HClosure:
        return _close(x.code.ast, x.env)
    if t is BuiltinRef:
        return x.ast
    if t is Resumption:
        raise RuntimeTypeError("a continuation escaped to the top level; it has no syntax")
    if t is tuple and x:
        return Pair(to_syntax(x[0]), to_syntax(x[1]))
    if t is RList:
        return ListVal(x.elem, tuple(to_syntax(i) for i in x.items))
    return readback(x)


def _close(v: Value, env: dict) -> Value:
    for name in v.fv:
        v = substitute(v, name, to_syntax(env[name]))
    return v


def _close_comp(c, env: dict):
    for name in c.fv:
        c = substitute(c, name, to_syntax(env[name]))
    return c
