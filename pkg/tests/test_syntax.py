"""Substitution, free variables and alpha-equivalence.

The oracle for capture-avoiding substitution is a locally nameless encoding:
bound variables become indices counted from their binder, free variables keep
their names. In that encoding substituting a free name needs no renaming, so
``encode(t[x := v])`` must equal ``encode(t)`` with ``x`` replaced by ``encode(v)``.
"""
import dataclasses
import random

import pytest
from hypothesis import given, settings, strategies as st

from leff.errors import LeffError
from leff.gen import TermGen
from leff.syntax import (
    EMPTY,
    INT,
    UNIT,
    Apply,
    Const,
    Fix,
    Handler,
    HandlerArrow,
    HandlerValue,
    Lambda,
    Let,
    OpCall,
    OpClause,
    Pair,
    Return,
    Var,
    alpha_equal,
    free_vars,
    fresh,
    size,
    substitute,
    substitute_many,
    subterms,
)

# ------------------------------------------------------------------ oracle


def encode(t, bound=()):
    """Locally nameless form: ``("bv", i)`` for bound, ``("fv", name)`` for free."""
    match t:
        case Var(x):
            return ("bv", bound.index(x)) if x in bound else ("fv", x)
        case Lambda(x, ty, e, body):
            return ("lam", ty, e, encode(body, (x,) + bound))
        case OpCall(op, arg, y, body):
            return ("op", op, encode(arg, bound), encode(body, (y,) + bound))
        case Let(x, c1, c2):
            return ("let", encode(c1, bound), encode(c2, (x,) + bound))
        case Fix(f, x, ty, e, res, body):
            return ("fix", ty, e, res, encode(body, (x, f) + bound))
        case Handler(r, ret, clauses):
            return ("handler", encode(ret, (r,) + bound),
                    tuple((c.op, encode(c.body, (c.kont, c.param) + bound)) for c in clauses))
        case HandlerValue(h, ty):
            return ("hv", ty, encode(h, bound))
    if dataclasses.is_dataclass(t):
        parts = [type(t).__name__]
        for f in dataclasses.fields(t):
            x = getattr(t, f.name)
            if isinstance(x, tuple):
                parts.append(tuple(encode(i, bound) if dataclasses.is_dataclass(i) else i for i in x))
            elif dataclasses.is_dataclass(x) and not _is_type(x):
                parts.append(encode(x, bound))
            else:
                parts.append(x)
        return tuple(parts)
    return t


def _is_type(x):
    from leff.syntax import EffectSet, Type

    return isinstance(x, (Type, EffectSet))


def plug(enc, name, venc):
    if enc == ("fv", name):
        return venc
    if isinstance(enc, tuple):
        return tuple(plug(p, name, venc) for p in enc)
    return enc


def binders(t):
    out = set()
    for s in subterms(t):
        match s:
            case Lambda(x) | Let(x) | OpCall(_, _, x):
                out.add(x)
            case Fix(f, x):
                out |= {f, x}
            case HandlerValue(h):
                out.add(h.ret_var)
                out |= {c.param for c in h.clauses} | {c.kont for c in h.clauses}
    return out


def open_term(seed):
    """A term with free ``a``/``b`` and a value whose free names clash with its binders."""
    g = TermGen(random.Random(seed), max_depth=5)
    t = g.comp({"a": INT, "b": INT}, EMPTY, INT, 5)
    clash = sorted(binders(t))[:3]
    v = g.value({n: INT for n in clash + ["b"]}, INT, 2)
    if not v.fv and clash:
        v = Var(clash[0])
    return t, v


# ------------------------------------------------------------------- tests


def test_free_vars_of_handler_example():
    h = Handler("x", Apply(Var("k"), Var("x")), (OpClause("observe", "p", "k", Return(Var("p"))),))
    hv = HandlerValue(h, HandlerArrow(UNIT, EMPTY, EMPTY, UNIT))
    assert free_vars(hv) == {"k"}


def test_fresh_avoids():
    assert fresh("x", {"x", "x_1"}) not in {"x", "x_1"}
    assert fresh("y", set()) == "y" or fresh("y", set()).startswith("y")


def test_substitution_avoids_capture():
    # (fun y -> return (x, y))[x := y] must not capture y
    t = Return(Lambda("y", INT, EMPTY, Return(Pair(Var("x"), Var("y")))))
    out = substitute(t, "x", Var("y"))
    lam = out.value
    assert lam.param != "y"
    assert lam.body == Return(Pair(Var("y"), Var(lam.param)))


def test_shadowed_name_is_left_alone():
    t = Let("x", Return(Var("x")), Return(Var("x")))
    assert substitute(t, "x", Const(1, "Int")) == Let("x", Return(Const(1, "Int")), Return(Var("x")))


def test_fix_binds_both_names():
    body = Apply(Var("f"), Var("n"))
    fx = Fix("f", "n", INT, EMPTY, INT, body)
    assert free_vars(fx) == frozenset()
    assert substitute(fx, "f", Const(0, "Int")) == fx


def test_duplicate_clauses_rejected():
    c = OpClause("get", "p", "k", Return(Var("p")))
    with pytest.raises(LeffError):
        Handler("x", Return(Var("x")), (c, c))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_substitution_matches_locally_nameless(seed):
    t, v = open_term(seed)
    got = substitute(t, "a", v)
    assert encode(got) == plug(encode(t), "a", encode(v))
    assert free_vars(got) == (free_vars(t) - {"a"}) | (free_vars(v) if "a" in free_vars(t) else frozenset())


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_alpha_equal_agrees_with_encoding(seed):
    t, v = open_term(seed)
    renamed = t
    for name in sorted(binders(t))[:4]:
        renamed = _rename_binder(renamed, name)
    assert alpha_equal(t, renamed)
    assert encode(t) == encode(renamed)
    other, _ = open_term(seed + 1)
    assert alpha_equal(t, other) == (encode(t) == encode(other))


def _rename_binder(t, name):
    """Rename every binder called ``name`` by substituting inside its scope."""
    new = name + "_r"

    def go(s):
        match s:
            case Lambda(x, ty, e, body) if x == name:
                return Lambda(new, ty, e, go(substitute(body, x, Var(new))))
            case Let(x, c1, c2) if x == name:
                return Let(new, go(c1), go(substitute(c2, x, Var(new))))
            case OpCall(op, arg, y, body) if y == name:
                return OpCall(op, go(arg), new, go(substitute(body, y, Var(new))))
        if dataclasses.is_dataclass(s) and not _is_type(s):
            changes = {}
            for f in dataclasses.fields(s):
                x = getattr(s, f.name)
                if dataclasses.is_dataclass(x) and not _is_type(x):
                    changes[f.name] = go(x)
            return dataclasses.replace(s, **changes) if changes else s
        return s

    return go(t)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_simultaneous_substitution_of_closed_values(seed):
    t, _ = open_term(seed)
    a, b = Const(3, "Int"), Const(4, "Int")
    assert substitute_many(t, {"a": a, "b": b}) == substitute(substitute(t, "a", a), "b", b)


def test_size_counts_nodes():
    assert size(Return(Const(1, "Int"))) == 2
