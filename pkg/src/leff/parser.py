"""Lexer and recursive-descent parser for ``.leff`` source files.

A file is a sequence of declarations followed by an optional main
computation::

    use "learner.leff"                      -- import declarations of another file
    type Row = A_RL * (Int * Real)          -- type alias
    effect tick : Unit ~> Unit              -- new operation
    effects E_ALL = E_RL + E_E              -- effect alias
    param rounds : Int = 500                -- overridable at link time
    val twice = fun (x : Int) -> plus (x, x)
    template h [T; F] (n : Int) = handler (...) { ... }

    return ()

Vals are closed and are inlined at each use; templates are expanded when
instantiated as ``h[Real; E_E](3)``. Sugar: ``op(V)`` for ``op(V; x. return x)``,
``C1; C2`` for ``let _ = C1 in C2``, tuple patterns in ``let``, ``let rec``
and ``nil[T]``.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .errors import Diagnostic, LeffError, ParseError, Span
from .signature import DEFAULT_SIGNATURE, OPAQUE_SORTS, Signature
from .syntax import (
    EMPTY,
    TOP,
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
    TypeVar,
    UnitValue,
    Value,
    Var,
    WithHandle,
    fresh,
    instantiate,
    substitute,
)

KEYWORDS = frozenset(
    "return let rec in with handle handler fun fix if then else true false "
    "pi1 pi2 type effect effects param val template use nil".split()
)
DECL_KEYWORDS = frozenset("type effect effects param val template use".split())

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>--[^\n]*)
  | (?P<sort>[A-Z][A-Za-z0-9_]*\#[0-9]+)
  | (?P<real>-?(?:[0-9]+\.[0-9]+(?:[eE][+-]?[0-9]+)?|[0-9]+[eE][+-]?[0-9]+))
  | (?P<int>-?[0-9]+)
  | (?P<uid>[A-Z][A-Za-z0-9_']*)
  | (?P<id>[a-z_][A-Za-z0-9_']*)
  | (?P<str>"[^"\n]*")
  | (?P<punct>->|=>|-\[|=\[|~>|[()\[\]{},;.:|+*=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # id uid kw int real sort str punct eof
    text: str
    span: Span


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    out: list[Token] = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            diag = Diagnostic(file, Span(line, col), "error", f"unexpected character {text[pos]!r}")
            raise ParseError([diag])
        kind, lexeme = m.lastgroup, m.group()
        if kind not in ("ws", "comment"):
            if kind == "id" and lexeme in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, lexeme, Span(line, col)))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    out.append(Token("eof", "", Span(line, col)))
    return out


# --------------------------------------------------------------- program


@dataclass
class Template:
    name: str
    type_params: tuple[str, ...]
    effect_params: tuple[str, ...]
    params: tuple[tuple[str, Type], ...]
    body: Value

    def expand(self, types: list[Type], effects: list[EffectSet], args: list[Value]) -> Value:
        body = instantiate(self.body, dict(zip(self.type_params, types)), dict(zip(self.effect_params, effects)))
        avoid = set(body.fv)
        for a in args:
            avoid |= a.fv
        renamed = []
        for name, _ in self.params:
            new = fresh(name, avoid)
            avoid.add(new)
            body = substitute(body, name, Var(new))
            renamed.append(new)
        for new, arg in zip(renamed, args):
            body = substitute(body, new, arg)
        return body


@dataclass
class Param:
    name: str
    type: Type
    default: Value


@dataclass(frozen=True)
class Decl:
    kind: str  # use type effect effects param val template
    name: str
    payload: object
    span: Span = field(compare=False)


@dataclass
class Program:
    file: str
    decls: list[Decl]
    main: Computation | None
    signature: Signature
    templates: dict[str, Template]
    values: dict[str, Value]
    params: dict[str, Param]
    main_span: Span | None = None

    def link(self, overrides: dict[str, Value] | None = None) -> Computation:
        """Close the main computation by substituting parameter values."""
        if self.main is None:
            raise LeffError(f"{self.file} has no main computation")
        overrides = overrides or {}
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise LeffError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        main = self.main
        for name, p in self.params.items():
            main = substitute(main, name, overrides.get(name, p.default))
        return main

    def param_types(self) -> dict[str, Type]:
        return {n: p.type for n, p in self.params.items()}


def default_prelude_dir() -> Path:
    env = os.environ.get("LEFF_PRELUDE")
    return Path(env) if env else Path(__file__).parent / "prelude"


class _Fail(Exception):
    def __init__(self, span: Span, message: str):
        self.span = span
        self.message = message


@dataclass
class _Shared:
    """State threaded through ``use`` imports."""

    signature: Signature
    templates: dict[str, Template] = field(default_factory=dict)
    values: dict[str, Value] = field(default_factory=dict)
    loading: set[Path] = field(default_factory=set)
    loaded: set[Path] = field(default_factory=set)


class Parser:
    def __init__(self, text: str, file: str, shared: _Shared, base_dir: Path | None, prelude_dir: Path | None):
        self.file = file
        self.toks = tokenize(text, file)
        self.i = 0
        self.sh = shared
        self.sig = shared.signature
        self.base_dir = base_dir
        self.prelude_dir = prelude_dir
        self.scope: dict[str, int] = {}
        self.tparams: set[str] = set()
        self.eparams: set[str] = set()
        self.params: dict[str, Param] = {}

    # ---------------------------------------------------------- helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, message: str, tok: Token | None = None):
        raise _Fail((tok or self.tok).span, message)

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("punct", "kw")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected '{text}' but found {self.describe(self.tok)}")
        return self.advance()

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    def ident(self) -> str:
        if self.tok.kind != "id":
            self.fail(f"expected an identifier but found {self.describe(self.tok)}")
        return self.advance().text

    def uident(self) -> str:
        if self.tok.kind != "uid":
            self.fail(f"expected a capitalised name but found {self.describe(self.tok)}")
        return self.advance().text

    def binder(self) -> str:
        t = self.tok
        name = self.ident()
        if name != "_" and (name in self.sig.operations or name in self.sig.builtins):
            self.fail(f"'{name}' names an operation or builtin and cannot be bound", t)
        return name

    def bind(self, *names: str):
        for n in names:
            self.scope[n] = self.scope.get(n, 0) + 1

    def unbind(self, *names: str):
        for n in names:
            self.scope[n] -= 1
            if not self.scope[n]:
                del self.scope[n]

    def scoped(self, names: tuple[str, ...], fn: Callable):
        self.bind(*names)
        try:
            return fn()
        finally:
            self.unbind(*names)

    # ------------------------------------------------------------ types

    def type_(self) -> Type:
        t = self.arrow_type()
        if self.at("=["):
            self.advance()
            e1 = self.effects()
            self.expect(";")
            e2 = self.effects()
            self.expect("]")
            self.expect("=>")
            return HandlerArrow(t, e1, e2, self.type_())
        if self.accept("=>"):
            return HandlerArrow(t, EMPTY, EMPTY, self.type_())
        return t

    def arrow_type(self) -> Type:
        t = self.product_type()
        if self.accept("->"):
            return Arrow(t, EMPTY, self.arrow_type())
        if self.accept("-["):
            e = self.effects()
            self.expect("]")
            self.expect("->")
            return Arrow(t, e, self.arrow_type())
        return t

    def product_type(self) -> Type:
        t = self.app_type()
        if self.accept("*"):
            return Product(t, self.product_type())
        return t

    def app_type(self) -> Type:
        if self.tok.kind == "uid" and self.tok.text == "List":
            self.advance()
            return ListType(self.app_type())
        return self.atom_type()

    def atom_type(self) -> Type:
        if self.accept("("):
            t = self.type_()
            self.expect(")")
            return t
        t = self.tok
        name = self.uident()
        if name in self.tparams:
            return TypeVar(name)
        if name == "Unit":
            return UNIT
        if name in self.sig.type_aliases:
            return self.sig.type_aliases[name]
        if name in self.sig.base_types:
            return Base(name)
        self.fail(f"unknown type {name}", t)

    def effects(self) -> EffectSet:
        out = self.effect_atom()
        while self.accept("+"):
            out = self.union(out, self.effect_atom())
        return out

    def union(self, a: EffectSet, b: EffectSet) -> EffectSet:
        try:
            return a | b
        except LeffError as exc:
            self.fail(str(exc))

    def effect_atom(self) -> EffectSet:
        if self.accept("*"):
            return TOP
        if self.accept("{"):
            out = EMPTY
            if not self.at("}"):
                while True:
                    t = self.tok
                    op = self.ident()
                    if op not in self.sig.operations:
                        self.fail(f"unknown operation {op}", t)
                    out = self.union(out, EffectSet.of([(op, *self.sig.operations[op])]))
                    if not self.accept(","):
                        break
            self.expect("}")
            return out
        t = self.tok
        name = self.uident()
        if name in self.eparams:
            return EffectSet(rows=frozenset((name,)))
        if name in self.sig.effect_aliases:
            return self.sig.effect_aliases[name]
        self.fail(f"unknown effect alias {name}", t)

    # ----------------------------------------------------------- values

    def value(self) -> Value:
        if self.at("fun"):
            return self.lambda_()
        return self.atom()

    def arrow_ann(self) -> EffectSet:
        if self.accept("->"):
            return EMPTY
        self.expect("-[")
        e = self.effects()
        self.expect("]")
        self.expect("->")
        return e

    def lambda_(self) -> Value:
        self.expect("fun")
        self.expect("(")
        x = self.binder()
        self.expect(":")
        ty = self.type_()
        self.expect(")")
        eff = self.arrow_ann()
        body = self.scoped((x,), self.comp)
        return Lambda(x, ty, eff, body)

    def atom(self) -> Value:
        t = self.tok
        match t.kind:
            case "int":
                self.advance()
                return Const(int(t.text), "Int")
            case "real":
                self.advance()
                return Const(float(t.text), "Real")
            case "sort":
                self.advance()
                sort, idx = t.text.split("#")
                if sort not in OPAQUE_SORTS or sort not in self.sig.base_types:
                    self.fail(f"{sort} has no literal constants", t)
                return Const(int(idx), sort)
            case "id":
                return self.name_atom()
        if self.accept("true"):
            return Const(True, "Bool")
        if self.accept("false"):
            return Const(False, "Bool")
        if self.accept("nil"):
            self.expect("[")
            ty = self.type_()
            self.expect("]")
            return ListVal(ty, ())
        if self.at("handler"):
            return self.handler_value()
        if self.accept("("):
            if self.accept(")"):
                return UnitValue()
            items = [self.value()]
            while self.accept(","):
                items.append(self.value())
            self.expect(")")
            return _tuple(items)
        if self.accept("["):
            items = []
            if not self.at(":"):
                items.append(self.value())
                while self.accept(","):
                    items.append(self.value())
            self.expect(":")
            ty = self.type_()
            self.expect("]")
            return ListVal(ty, tuple(items))
        self.fail(f"expected a value but found {self.describe(t)}")

    def name_atom(self) -> Value:
        t = self.tok
        name = self.advance().text
        if name == "_":
            self.fail("'_' cannot be used as a value", t)
        if name in self.scope:
            return Var(name)
        if name in self.sig.builtins:
            spec = self.sig.builtins[name]
            targs: tuple[Type, ...] = ()
            if spec.type_params:
                self.expect("[")
                targs = tuple(self.comma_list(self.type_, "]"))
                if len(targs) != spec.type_params:
                    self.fail(f"{name} expects {spec.type_params} type argument(s)", t)
            return Builtin(name, targs)
        if name in self.sh.values:
            return self.sh.values[name]
        if name in self.sh.templates:
            return self.instantiate(self.sh.templates[name], t)
        if name in self.params:
            return Var(name)
        if name in self.sig.operations:
            self.fail(f"operation {name} is not a value; call it as {name}(v)", t)
        self.fail(f"unbound variable {name}", t)

    def comma_list(self, item: Callable, close: str) -> list:
        out = []
        if not self.at(close):
            out.append(item())
            while self.accept(","):
                out.append(item())
        self.expect(close)
        return out

    def instantiate(self, tpl: Template, t: Token) -> Value:
        types: list[Type] = []
        effs: list[EffectSet] = []
        if tpl.type_params or tpl.effect_params:
            self.expect("[")
            if not self.at(";"):
                types.append(self.type_())
                while self.accept(","):
                    types.append(self.type_())
            if self.accept(";"):
                effs.append(self.effects())
                while self.accept(","):
                    effs.append(self.effects())
            self.expect("]")
            if len(types) != len(tpl.type_params) or len(effs) != len(tpl.effect_params):
                self.fail(
                    f"{tpl.name} expects {len(tpl.type_params)} type and "
                    f"{len(tpl.effect_params)} effect argument(s)",
                    t,
                )
        args: list[Value] = []
        if tpl.params:
            self.expect("(")
            args = self.comma_list(self.value, ")")
            if len(args) != len(tpl.params):
                self.fail(f"{tpl.name} expects {len(tpl.params)} argument(s)", t)
        return tpl.expand(types, effs, args)

    def handler_value(self) -> Value:
        start = self.expect("handler")
        self.expect("(")
        ty = self.type_()
        self.expect(")")
        if not isinstance(ty, HandlerArrow):
            self.fail("a handler needs a handler type 'T =[E1; E2]=> T'", start)
        self.expect("{")
        ret = None
        clauses: list[OpClause] = []
        seen: set[str] = set()
        self.accept("|")
        while not self.at("}"):
            t = self.tok
            if self.accept("return"):
                if ret is not None:
                    self.fail("duplicate return clause", t)
                x = self.binder()
                self.expect("->")
                ret = (x, self.scoped((x,), self.comp))
            else:
                op = self.ident()
                if op not in self.sig.operations:
                    self.fail(f"unknown operation {op}", t)
                if op in seen:
                    self.fail(f"duplicate clause for {op}", t)
                seen.add(op)
                self.expect("(")
                p = self.binder()
                self.expect(";")
                k = self.binder()
                self.expect(")")
                self.expect("->")
                clauses.append(OpClause(op, p, k, self.scoped((p, k), self.comp)))
            if not self.accept("|"):
                break
        self.expect("}")
        if ret is None:
            ret = ("x", Return(Var("x")))
        return HandlerValue(Handler(ret[0], ret[1], tuple(clauses)), ty)

    # ------------------------------------------------------- computations

    def comp(self) -> Computation:
        c = self.simple_comp()
        if self.accept(";"):
            return Let("_", c, self.comp())
        return c

    def simple_comp(self) -> Computation:
        t = self.tok
        if self.accept("return"):
            return Return(self.value())
        if self.accept("pi1"):
            return Project(1, self.value())
        if self.accept("pi2"):
            return Project(2, self.value())
        if self.at("let"):
            return self.let()
        if self.at("fix"):
            self.advance()
            f, x, t1, eff, t2, body = self.rec_head()
            return Fix(f, x, t1, eff, t2, body)
        if self.accept("with"):
            h = self.value()
            self.expect("handle")
            return WithHandle(h, self.comp())
        if self.accept("if"):
            v = self.value()
            self.expect("then")
            a = self.comp()
            self.expect("else")
            return If(v, a, self.comp())
        if t.kind == "id" and t.text in self.sig.operations and t.text not in self.scope:
            return self.op_call()
        if t.kind == "kw" and t.text not in ("true", "false", "nil", "handler"):
            self.fail(f"expected a computation but found {self.describe(t)}")
        f = self.atom()
        if not self.starts_atom():
            self.fail("expected a computation; a bare value needs 'return'", t)
        return Apply(f, self.atom())

    def starts_atom(self) -> bool:
        t = self.tok
        if t.kind in ("int", "real", "sort", "id"):
            return True
        return t.text in ("(", "[", "true", "false", "nil", "handler") and t.kind in ("punct", "kw")

    def rec_head(self):
        f = self.binder()
        self.expect("(")
        x = self.binder()
        self.expect(":")
        t1 = self.type_()
        self.expect(")")
        eff = self.arrow_ann()
        t2 = self.type_()
        self.expect("=")
        body = self.scoped((f, x), self.comp)
        return f, x, t1, eff, t2, body

    def op_call(self) -> Computation:
        op = self.advance().text
        self.expect("(")
        arg = self.value()
        if self.accept(";"):
            x = self.binder()
            self.expect(".")
            body = self.scoped((x,), self.comp)
        else:
            x, body = "x", Return(Var("x"))
        self.expect(")")
        return OpCall(op, arg, x, body)

    def let(self) -> Computation:
        self.expect("let")
        if self.accept("rec"):
            f, x, t1, eff, t2, body = self.rec_head()
            self.expect("in")
            rest = self.scoped((f,), self.comp)
            return Let(f, Fix(f, x, t1, eff, t2, body), rest)
        pat = self.pattern()
        self.expect("=")
        bound = self.comp()
        self.expect("in")
        names = tuple(_pattern_names(pat))
        body = self.scoped(names, self.comp)
        if isinstance(pat, str):
            return Let(pat, bound, body)
        return _destructure(pat, bound, body)

    def pattern(self):
        if self.accept("("):
            items = [self.pattern()]
            while self.accept(","):
                items.append(self.pattern())
            self.expect(")")
            if len(items) == 1:
                return items[0]
            out = items[-1]
            for p in reversed(items[:-1]):
                out = (p, out)
            return out
        return self.binder()

    # ------------------------------------------------------- declarations

    def program(self, main_allowed: bool = True) -> tuple[list[Decl], Computation | None, Span | None]:
        decls: list[Decl] = []
        while self.tok.kind == "kw" and self.tok.text in DECL_KEYWORDS:
            decls.append(self.decl())
        main = span = None
        if self.tok.kind != "eof":
            span = self.tok.span
            self.bind(*self.params)
            main = self.comp()
            if self.tok.kind != "eof":
                self.fail(f"unexpected {self.describe(self.tok)} after the main computation")
        return decls, main, span

    def decl(self) -> Decl:
        t = self.advance()
        match t.text:
            case "use":
                s = self.tok
                if s.kind != "str":
                    self.fail("expected a quoted file name")
                self.advance()
                self.load(s.text[1:-1], s)
                return Decl("use", s.text[1:-1], None, t.span)
            case "type":
                n = self.tok
                name = self.uident()
                if name in self.sig.base_types or name == "Unit" or name == "List":
                    self.fail(f"cannot redefine type {name}", n)
                self.expect("=")
                ty = self.type_()
                self.sig.type_aliases[name] = ty
                return Decl("type", name, ty, t.span)
            case "effect":
                name = self.ident()
                self.expect(":")
                tp = self.type_()
                self.expect("~>")
                ta = self.type_()
                try:
                    self.sig.declare_operation(name, tp, ta)
                except LeffError as exc:
                    self.fail(str(exc), t)
                return Decl("effect", name, (tp, ta), t.span)
            case "effects":
                name = self.uident()
                self.expect("=")
                eff = self.effects()
                if eff.top or eff.rows:
                    self.fail("an effect alias must list concrete operations", t)
                self.sig.effect_aliases[name] = eff
                return Decl("effects", name, eff, t.span)
            case "param":
                name = self.binder()
                self.expect(":")
                ty = self.type_()
                self.expect("=")
                v = self.value()
                if v.fv:
                    self.fail(f"default of param {name} must be closed", t)
                self.params[name] = Param(name, ty, v)
                return Decl("param", name, self.params[name], t.span)
            case "val":
                name = self.binder()
                self.expect("=")
                v = self.value()
                if v.fv:
                    self.fail(f"val {name} is not closed (free: {', '.join(sorted(v.fv))})", t)
                self.sh.values[name] = v
                return Decl("val", name, v, t.span)
            case "template":
                return self.template(t)
        self.fail(f"unknown declaration {t.text}", t)

    def template(self, t: Token) -> Decl:
        name = self.binder()
        tps: list[str] = []
        eps: list[str] = []
        if self.accept("["):
            if self.tok.kind == "uid":
                tps.append(self.uident())
                while self.accept(","):
                    tps.append(self.uident())
            if self.accept(";"):
                eps.append(self.uident())
                while self.accept(","):
                    eps.append(self.uident())
            self.expect("]")
        params: list[tuple[str, Type]] = []
        self.tparams, self.eparams = set(tps), set(eps)
        try:
            if self.accept("("):
                while True:
                    x = self.binder()
                    self.expect(":")
                    params.append((x, self.type_()))
                    if not self.accept(","):
                        break
                self.expect(")")
            self.expect("=")
            body = self.scoped(tuple(p for p, _ in params), self.value)
        finally:
            self.tparams, self.eparams = set(), set()
        tpl = Template(name, tuple(tps), tuple(eps), tuple(params), body)
        self.sh.templates[name] = tpl
        return Decl("template", name, tpl, t.span)

    def load(self, rel: str, tok: Token):
        candidates = []
        if self.base_dir is not None:
            candidates.append(self.base_dir / rel)
        if self.prelude_dir is not None:
            candidates.append(self.prelude_dir / rel)
        path = next((p.resolve() for p in candidates if p.is_file()), None)
        if path is None:
            self.fail(f"cannot find {rel}", tok)
        if path in self.sh.loading:
            self.fail(f"cyclic use of {rel}", tok)
        if path in self.sh.loaded:
            return
        self.sh.loading.add(path)
        try:
            sub = Parser(path.read_text(), str(path), self.sh, path.parent, self.prelude_dir)
            sub.program()
        finally:
            self.sh.loading.discard(path)
        self.sh.loaded.add(path)


def _tuple(items: list[Value]) -> Value:
    out = items[-1]
    for v in reversed(items[:-1]):
        out = Pair(v, out)
    return out


def _pattern_names(pat):
    if isinstance(pat, str):
        yield pat
    else:
        yield from _pattern_names(pat[0])
        yield from _pattern_names(pat[1])


def _destructure(pat, bound: Computation, body: Computation) -> Computation:
    """``let (p, q) = C in D`` becomes ``let t = C in let p = pi1 t in let q = pi2 t in D``."""
    if isinstance(pat, str):
        return Let(pat, bound, body)
    avoid = set(body.fv) | set(_pattern_names(pat))
    tmp = fresh("p", avoid)
    left, right = pat
    inner = _destructure(right, Project(2, Var(tmp)), body)
    return Let(tmp, bound, _destructure(left, Project(1, Var(tmp)), inner))


# -------------------------------------------------------------- entry points


def _run(fn: Callable, file: str):
    try:
        return fn()
    except _Fail as f:
        raise ParseError([Diagnostic(file, f.span, "error", f.message)]) from None
    except RecursionError:
        raise ParseError([Diagnostic(file, Span(1, 1), "error", "input nested too deeply")]) from None


def parse_program(
    text: str,
    file: str = "<input>",
    signature: Signature | None = None,
    base_dir: str | Path | None = None,
    prelude_dir: str | Path | None = None,
) -> Program:
    shared = _Shared((signature or DEFAULT_SIGNATURE).copy())
    base = Path(base_dir) if base_dir is not None else None
    pre = Path(prelude_dir) if prelude_dir is not None else default_prelude_dir()

    def go():
        p = Parser(text, file, shared, base, pre)
        decls, main, span = p.program()
        return Program(file, decls, main, shared.signature, shared.templates, shared.values, p.params, span)

    return _run(go, file)


def load_program(path: str | Path, signature: Signature | None = None, prelude_dir=None) -> Program:
    path = Path(path)
    return parse_program(path.read_text(), str(path), signature, path.parent, prelude_dir)


def _entry(text: str, signature: Signature | None, fn_name: str, file: str = "<input>"):
    shared = _Shared((signature or DEFAULT_SIGNATURE).copy())

    def go():
        p = Parser(text, file, shared, None, None)
        out = getattr(p, fn_name)()
        if p.tok.kind != "eof":
            p.fail(f"unexpected {p.describe(p.tok)}")
        return out

    return _run(go, file)


def parse_computation(text: str, signature: Signature | None = None) -> Computation:
    return _entry(text, signature, "comp")


def parse_value(text: str, signature: Signature | None = None) -> Value:
    return _entry(text, signature, "value")


def parse_type(text: str, signature: Signature | None = None) -> Type:
    return _entry(text, signature, "type_")


def parse_effects(text: str, signature: Signature | None = None) -> EffectSet:
    return _entry(text, signature, "effects")


def parse(text: str, signature: Signature | None = None):
    """Parse a lone computation (the common case for tests and round trips)."""
    return parse_computation(text, signature)
