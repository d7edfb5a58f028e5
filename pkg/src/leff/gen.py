"""Random generation of closed, well-typed terms for property tests.

:class:`TermGen` builds a computation of a requested type under an ambient
effect set, top-down, so every generated term typechecks by construction
(the tests check this anyway). It covers returns, projections, operation
calls, ``let``, application of lambdas and builtins, handlers, ``if`` and
``fix``. Recursive functions always count an ``Int`` argument down to zero
and are never exposed to the rest of the term, so every run terminates.

:func:`graded_program` draws handler-free programs over choice/do/reward/
observe for the grade checker: complete rounds, stray ``do`` calls,
branches, helper functions and counted loops, optionally shuffled so that
some of them are ill-graded.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .signature import BUILTINS, DEFAULT_SIGNATURE, Signature
from .syntax import (
    BOOL,
    EMPTY,
    INT,
    REAL,
    UNIT,
    Apply,
    Arrow,
    Base,
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
    OpClause,
    Pair,
    Product,
    Project,
    Return,
    Type,
    UnitType,
    UnitValue,
    Value,
    Var,
    WithHandle,
)

A_E = Base("A_E")


def gen_signature() -> Signature:
    """The default signature plus two state-like operations on ``Int``."""
    sig = DEFAULT_SIGNATURE.copy()
    sig.declare_operation("get", UNIT, INT)
    sig.declare_operation("put", INT, UNIT)
    return sig


GEN_SIGNATURE = gen_signature()
GEN_OPS = ("get", "put", "observe", "reward", "choice", "do")


def _monomorphic_builtins() -> dict[Type, list[tuple[str, Arrow]]]:
    table: dict[Type, list[tuple[str, Arrow]]] = {}
    for name, spec in BUILTINS.items():
        if not spec.total or name.startswith("rl_") or name == "act_of_rl":
            continue
        targs = (INT,) * spec.type_params
        ty = spec.type_of(targs)
        table.setdefault(ty.result, []).append((name, ty))
    return table


_BUILTINS_BY_RESULT = _monomorphic_builtins()


@dataclass
class TermGen:
    rng: random.Random
    signature: Signature = field(default_factory=lambda: GEN_SIGNATURE)
    max_depth: int = 8
    ops: tuple[str, ...] = GEN_OPS
    handlers: bool = True
    _n: int = 0

    # ------------------------------------------------------------ helpers

    def name(self, stem: str = "x") -> str:
        self._n += 1
        return f"{stem}{self._n}"

    def effects(self, names) -> EffectSet:
        return EffectSet.of((n, *self.signature.op_signature(n)) for n in names)

    def subset(self, e: EffectSet) -> EffectSet:
        return EffectSet(tuple(op for op in e.ops if self.rng.random() < 0.5), e.rows)

    def type(self, depth: int = 2, e: EffectSet = EMPTY) -> Type:
        r = self.rng
        base = r.choice([INT, INT, BOOL, REAL, UNIT, A_E])
        if depth <= 0:
            return base
        match r.randrange(8):
            case 0:
                return Product(self.type(depth - 1, e), self.type(depth - 1, e))
            case 1:
                return Arrow(self.type(depth - 1, e), self.subset(e), self.type(depth - 1, e))
            case 2:
                return ListType(r.choice([INT, BOOL, REAL]))
        return base

    # ------------------------------------------------------------- values

    def value(self, ctx: dict[str, Type], t: Type, depth: int) -> Value:
        r = self.rng
        vars_ = [x for x, u in ctx.items() if u == t]
        if vars_ and r.random() < 0.4:
            return Var(r.choice(vars_))
        match t:
            case Base("Int"):
                return Const(r.randint(-5, 20), "Int")
            case Base("Bool"):
                return Const(r.random() < 0.5, "Bool")
            case Base("Real"):
                return Const(r.randint(-8, 40) / 4, "Real")
            case Base(sort):
                return Const(r.randint(0, 6), sort)
            case UnitType():
                return UnitValue()
            case Product(a, b):
                return Pair(self.value(ctx, a, depth - 1), self.value(ctx, b, depth - 1))
            case ListType(elem):
                n = r.randint(0, 3 if depth > 0 else 0)
                return ListVal(elem, tuple(self.value(ctx, elem, 0) for _ in range(n)))
            case Arrow(a, e, b):
                known = [n for n, ty in _BUILTINS_BY_RESULT.get(b, []) if ty == t]
                if known and r.random() < 0.3:
                    spec = BUILTINS[r.choice(known)]
                    return Builtin(spec.name, (INT,) * spec.type_params)
                x = self.name("x")
                return Lambda(x, a, e, self.comp({**ctx, x: a}, e, b, depth - 1))
            case HandlerArrow():
                return self.handler(ctx, t, depth)
        raise ValueError(f"cannot generate a value of type {t}")

    def handler(self, ctx: dict[str, Type], t: HandlerArrow, depth: int) -> HandlerValue:
        names = sorted(t.handled.names())
        handled = [n for n in names if n not in t.output.names()]
        handled += [n for n in names if n in t.output.names() and self.rng.random() < 0.5]
        x = self.name("x")
        ret = self.comp({**ctx, x: t.value}, t.output, t.result, depth - 1)
        clauses = []
        for op in sorted(set(handled)):
            tp, ta = self.signature.op_signature(op)
            p, k = self.name("p"), self.name("k")
            inner = {**ctx, p: tp, k: Arrow(ta, t.output, t.result)}
            clauses.append(OpClause(op, p, k, self.clause_body(inner, t, k, ta, depth - 1)))
        return HandlerValue(Handler(x, ret, tuple(clauses)), t)

    def clause_body(self, ctx, t: HandlerArrow, k: str, ta: Type, depth: int) -> Computation:
        """Usually resume ``k`` (once or twice), sometimes abort."""
        r = self.rng.random()
        if r < 0.2:
            return self.comp(ctx, t.output, t.result, depth)
        call = Apply(Var(k), self.value(ctx, ta, 1))
        if r < 0.8 or t.result != INT:
            return call
        a, b = self.name("r"), self.name("r")
        again = Apply(Var(k), self.value(ctx, ta, 1))
        return Let(a, call, Let(b, again, Apply(Builtin("plus"), Pair(Var(a), Var(b)))))

    # ------------------------------------------------------- computations

    def comp(self, ctx: dict[str, Type], e: EffectSet, t: Type, depth: int) -> Computation:
        r = self.rng
        if depth <= 0:
            return Return(self.value(ctx, t, 0))
        choices = ["ret", "let", "let", "app", "if", "proj"]
        usable = [op for op in self.ops if op in e.names()]
        if usable:
            choices += ["op", "op"]
        if self.handlers and depth >= 2:
            choices.append("with")
        if depth >= 3:
            choices.append("fix")
        match r.choice(choices):
            case "ret":
                return Return(self.value(ctx, t, depth - 1))
            case "proj":
                other = self.type(1)
                if r.random() < 0.5:
                    return Project(1, self.value(ctx, Product(t, other), depth - 1))
                return Project(2, self.value(ctx, Product(other, t), depth - 1))
            case "op":
                op = r.choice(usable)
                tp, ta = self.signature.op_signature(op)
                y = self.name("y")
                return OpCall(op, self.value(ctx, tp, 1), y, self.comp({**ctx, y: ta}, e, t, depth - 1))
            case "let":
                u = self.type(1, e)
                x = self.name("x")
                return Let(x, self.comp(ctx, e, u, depth // 2), self.comp({**ctx, x: u}, e, t, depth - 1))
            case "app":
                a = self.type(1, e)
                f = self.value(ctx, Arrow(a, self.subset(e), t), depth - 1)
                return Apply(f, self.value(ctx, a, 1))
            case "if":
                return If(self.value(ctx, BOOL, 0), self.comp(ctx, e, t, depth - 1), self.comp(ctx, e, t, depth - 1))
            case "with":
                return self.with_handle(ctx, e, t, depth)
            case "fix":
                return self.counted_loop(ctx, e, t, depth)
        raise AssertionError("unreachable")

    def with_handle(self, ctx, e: EffectSet, t: Type, depth: int) -> Computation:
        """``with h handle C``: ``h`` handles a random set of operations and may leave some to ``e``."""
        all_ops = self.effects(self.ops)
        handled = EffectSet(tuple(op for op in all_ops.ops if self.rng.random() < 0.4))
        output = self.subset(e)
        body_effects = handled | EffectSet(tuple(op for op in output.ops if self.rng.random() < 0.6))
        v = self.type(1)
        ht = HandlerArrow(v, body_effects, output, t)
        h = self.handler(ctx, ht, depth - 1)
        return WithHandle(h, self.comp(ctx, body_effects, v, depth - 1))

    def counted_loop(self, ctx, e: EffectSet, t: Type, depth: int) -> Computation:
        """``let g = fix f (n : Int) -> if n <= 0 then C0 else (let m = n - 1 in C1[f m]) in g K``."""
        lat = self.subset(e)
        f, n, g = self.name("f"), self.name("n"), self.name("g")
        b, m, res = self.name("b"), self.name("m"), self.name("r")
        inner = {**ctx, n: INT}
        base = self.comp(inner, lat, t, depth - 2)
        step = Let(
            m,
            Apply(Builtin("minus"), Pair(Var(n), Const(1, "Int"))),
            Let(res, Apply(Var(f), Var(m)), self.comp({**inner, m: INT, res: t}, lat, t, depth - 3)),
        )
        body = Let(b, Apply(Builtin("le"), Pair(Var(n), Const(0, "Int"))), If(Var(b), base, step))
        loop = Fix(f, n, INT, lat, t, body)
        return Let(g, loop, Apply(Var(g), Const(self.rng.randint(0, 4), "Int")))

    # ------------------------------------------------------------- entry

    def closed(self, e: EffectSet = EMPTY, t: Type | None = None) -> tuple[Computation, Type]:
        t = t or self.type(2, e)
        return self.comp({}, e, t, self.max_depth), t


def well_typed_program(seed: int, effects: EffectSet = EMPTY, max_depth: int = 8,
                       handlers: bool = True) -> tuple[Computation, Type]:
    return TermGen(random.Random(seed), max_depth=max_depth, handlers=handlers).closed(effects)


# ----------------------------------------------------------- graded programs

GRADED_OPS = ("choice", "do", "reward", "observe")
GRADED_EFFECTS = _GRADED = DEFAULT_SIGNATURE.effects(*GRADED_OPS)


def _round(rest: Computation, tag: int) -> Computation:
    a, o, u1, u2 = f"a{tag}", f"o{tag}", f"u{tag}", f"w{tag}"
    return OpCall("choice", UnitValue(), a,
           OpCall("do", Var(a), u1,
           OpCall("observe", UnitValue(), o,
           OpCall("reward", Var(o), u2, rest))))


def graded_program(seed: int, shuffle: float = 0.0, depth: int = 2) -> Computation:
    """A handler-free program over choice/do/reward/observe ending in ``return ()``.

    With ``shuffle > 0`` the operation calls of a round may be permuted, which
    usually makes the program ill-graded.
    """
    rng = random.Random(seed)
    counter = [0]

    def tag() -> int:
        counter[0] += 1
        return counter[0]

    def chain(ops: list[str], rest: Computation) -> Computation:
        names = {op: f"{op[0]}{tag()}" for op in ops}

        def before(a: str, b: str) -> bool:
            return a in ops and ops.index(a) < ops.index(b)

        def arg(op: str) -> Value:
            match op:
                case "do":
                    return Var(names["choice"]) if before("choice", "do") else Const(rng.randint(1, 6), "A_E")
                case "reward":
                    return Var(names["observe"]) if before("observe", "reward") else Const(1.0, "Real")
            return UnitValue()

        out = rest
        for op in reversed(ops):
            out = OpCall(op, arg(op), names[op], out)
        return out

    def block(d: int, rest: Computation) -> Computation:
        kind = rng.choice(["round", "round", "do", "observe", "branch", "helper", "loop"] if d > 0
                          else ["round", "do", "observe"])
        match kind:
            case "round":
                ops = ["choice", "do", "observe", "reward"]
                if rng.random() < shuffle:
                    rng.shuffle(ops)
                return chain(ops, rest)
            case "do" | "observe":
                return chain([kind], rest)
            case "branch":
                x = f"b{tag()}"
                inner = body(d - 1)
                alt = inner if rng.random() < 0.7 else body(d - 1)
                return Let(x, If(Const(rng.random() < 0.5, "Bool"), inner, alt), rest)
            case "helper":
                h, x = f"h{tag()}", f"z{tag()}"
                fn = Lambda(x, UNIT, _GRADED, body(d - 1))
                calls = rest
                for _ in range(rng.randint(1, 2)):
                    calls = Let(f"c{tag()}", Apply(Var(h), UnitValue()), calls)
                return Let(h, Return(fn), calls)
            case "loop":
                f, n, g, b, m = (f"{s}{tag()}" for s in "fngbm")
                step = Let(m, Apply(Builtin("minus"), Pair(Var(n), Const(1, "Int"))), Apply(Var(f), Var(m)))
                base: Computation = Return(UnitValue())
                if rng.random() < 0.5:
                    # the base case repeats the body so both branches have the same grade
                    base = body(d - 1)
                    step = Let(f"s{tag()}", base, step)
                else:
                    step = _round(step, tag())
                loop_body = Let(b, Apply(Builtin("le"), Pair(Var(n), Const(0, "Int"))), If(Var(b), base, step))
                loop = Fix(f, n, INT, _GRADED, UNIT, loop_body)
                return Let(g, loop, Let(f"l{tag()}", Apply(Var(g), Const(rng.randint(0, 3), "Int")), rest))
        raise AssertionError(kind)

    def body(d: int) -> Computation:
        out: Computation = Return(UnitValue())
        for _ in range(rng.randint(1, 3)):
            out = block(d, out)
        return out

    return body(depth)

