"""Pretty printer producing surface syntax that the parser reads back.

Lambdas are always parenthesised in value position and no sugar is emitted,
so ``parse(show(t))`` is alpha-equal to ``t``.
"""
from __future__ import annotations

from .syntax import (
    Apply,
    Arrow,
    Base,
    Builtin,
    Const,
    EffectSet,
    Fix,
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
    TypeVar,
    UnitType,
    UnitValue,
    Var,
    WithHandle,
)

INDENT = "  "


def show_effects(e: EffectSet) -> str:
    if e.top:
        return "*"
    parts = []
    if e.ops or not e.rows:
        parts.append("{" + ", ".join(n for n, _, _ in e.ops) + "}")
    parts += sorted(e.rows)
    return " + ".join(parts)


def show_type(t: Type, prec: int = 0) -> str:
    match t:
        case UnitType():
            return "Unit"
        case Base(n) | TypeVar(n):
            return n
        case ListType(e):
            s = f"List {show_type(e, 4)}"
            return f"({s})" if prec > 3 else s
        case Product(a, b):
            s = f"{show_type(a, 3)} * {show_type(b, 2)}"
            return f"({s})" if prec > 2 else s
        case Arrow(a, e, b):
            arrow = "->" if e.is_empty() else f"-[{show_effects(e)}]->"
            s = f"{show_type(a, 2)} {arrow} {show_type(b, 1)}"
            return f"({s})" if prec > 1 else s
        case HandlerArrow(v, e1, e2, c):
            s = f"{show_type(v, 1)} =[{show_effects(e1)}; {show_effects(e2)}]=> {show_type(c, 0)}"
            return f"({s})" if prec > 0 else s
    raise TypeError(f"not a type: {t!r}")


def _arrow(e: EffectSet) -> str:
    return "->" if e.is_empty() else f"-[{show_effects(e)}]->"


def show_value(v, ind: str = "") -> str:
    match v:
        case Var(n):
            return n
        case UnitValue():
            return "()"
        case Const(x, sort):
            if sort == "Bool":
                return "true" if x else "false"
            if sort == "Int":
                return str(x)
            if sort == "Real":
                return repr(float(x))
            return f"{sort}#{x}"
        case Builtin(n, targs):
            return n + (f"[{', '.join(show_type(t) for t in targs)}]" if targs else "")
        case Pair(a, b):
            return f"({show_value(a, ind)}, {show_value(b, ind)})"
        case ListVal(elem, items):
            body = ", ".join(show_value(i, ind) for i in items)
            return f"[{body} : {show_type(elem)}]" if items else f"[ : {show_type(elem)}]"
        case Lambda(x, ty, eff, body):
            inner = ind + INDENT
            return f"(fun ({x} : {show_type(ty)}) {_arrow(eff)}\n{inner}{show_comp(body, inner)})"
        case HandlerValue(h, ty):
            inner = ind + INDENT
            deeper = inner + INDENT
            lines = [f"handler ({show_type(ty)}) {{"]
            lines.append(f"{inner}| return {h.ret_var} ->\n{deeper}{show_comp(h.ret_body, deeper)}")
            for c in h.clauses:
                lines.append(f"{inner}| {c.op}({c.param}; {c.kont}) ->\n{deeper}{show_comp(c.body, deeper)}")
            lines.append(f"{ind}}}")
            return "\n".join(lines)
    raise TypeError(f"not a value: {v!r}")


def show_comp(c, ind: str = "") -> str:
    match c:
        case Return(v):
            return f"return {show_value(v, ind)}"
        case Project(i, v):
            return f"pi{i} {show_value(v, ind)}"
        case OpCall(op, arg, x, body):
            inner = ind + INDENT
            return f"{op}({show_value(arg, ind)}; {x}.\n{inner}{show_comp(body, inner)})"
        case Let(x, bound, body):
            inner = ind + INDENT
            return f"let {x} =\n{inner}{show_comp(bound, inner)}\n{ind}in\n{ind}{show_comp(body, ind)}"
        case Apply(f, a):
            return f"{show_value(f, ind)} {show_value(a, ind)}"
        case WithHandle(h, body):
            return f"with {show_value(h, ind)} handle\n{ind}{show_comp(body, ind)}"
        case Fix(f, x, t1, eff, t2, body):
            inner = ind + INDENT
            head = f"fix {f} ({x} : {show_type(t1)}) {_arrow(eff)} {show_type(t2, 1)} ="
            return f"{head}\n{inner}{show_comp(body, inner)}"
        case If(v, a, b):
            inner = ind + INDENT
            return (
                f"if {show_value(v, ind)} then\n{inner}{show_comp(a, inner)}\n"
                f"{ind}else\n{inner}{show_comp(b, inner)}"
            )
    raise TypeError(f"not a computation: {c!r}")


def show(term) -> str:
    from .syntax import Computation

    return show_comp(term) if isinstance(term, Computation) else show_value(term)
