"""Operation-order grades for handler-free programs.

Every computation gets a word over ``C`` (choice), ``D`` (do) and ``R``
(reward) in the free monoid modulo ``CDR = 1``. ``observe`` and all other
operations grade as the unit. A well-formed main program normalises into
``D*``: outside of complete choice/do/reward rounds, only ``do`` may happen.

Functions carry a latent grade: a lambda bound by ``let`` contributes the
grade of its body at each application. For ``fix`` the recursive call counts
as the unit while the body is graded. The body must come out as the unit or
as a word over ``D`` and ``S``, a letter standing for ``D^n`` with ``n``
unknown (inner loops produce it). In the second case the body is graded again
with the recursive call as ``S``. That pass catches recursive calls buried
inside a choice...reward round, where the unit assumption would be unsound.
Such functions have latent grade ``S``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import LeffError
from .syntax import (
    Apply,
    Builtin,
    Computation,
    Fix,
    HandlerValue,
    If,
    Lambda,
    Let,
    OpCall,
    Project,
    Return,
    Var,
    WithHandle,
    subterms,
)

LETTERS = {"choice": "C", "do": "D", "reward": "R"}
UNIT_OPS = frozenset({"observe"})
UNBOUNDED = "S"


class GradeError(LeffError):
    def __init__(self, message: str, word: str | None = None):
        self.word = word
        super().__init__(message)


class BranchGradeMismatch(GradeError):
    pass


class UnsupportedHandler(GradeError):
    pass


class RecursiveGradeNotIdempotent(GradeError):
    pass


class UngradableApplication(GradeError):
    """Application of a function whose latent grade is not statically known."""


class UnknownOperationGrade(GradeError):
    """Strict mode only: an operation outside choice/do/reward/observe."""


class NotInDoStar(GradeError):
    """A main program whose normal form is not a power of ``D``."""


def normalize(word: str) -> str:
    """Erase ``CDR`` factors until none is left (one left-to-right pass with a stack)."""
    out: list[str] = []
    for ch in word:
        out.append(ch)
        if ch == "R" and len(out) >= 3 and out[-2] == "D" and out[-3] == "C":
            del out[-3:]
    return "".join(out)


def normalize_random(word: str, rng: random.Random) -> str:
    """Rewrite a randomly chosen ``CDR`` occurrence each time; used to test confluence."""
    while True:
        spots = [i for i in range(len(word) - 2) if word[i : i + 3] == "CDR"]
        if not spots:
            return word
        i = rng.choice(spots)
        word = word[:i] + word[i + 3 :]


def is_normal(word: str) -> bool:
    return "CDR" not in word


@dataclass(frozen=True)
class GradeWord:
    """A reduced word; ``S`` stands for an unknown power of ``D``."""

    letters: str = ""

    def __post_init__(self):
        if not is_normal(self.letters):
            raise ValueError(f"{self.letters!r} is not in normal form")

    def __mul__(self, other: GradeWord) -> GradeWord:
        return GradeWord(normalize(self.letters + other.letters))

    def is_unit(self) -> bool:
        return not self.letters

    def in_do_star(self) -> bool:
        return set(self.letters) <= {"D", UNBOUNDED}

    def render(self) -> str:
        if not self.letters:
            return "1"
        return "".join("D*" if ch == UNBOUNDED else ch for ch in self.letters)

    def summary(self) -> str:
        """``D^n`` form of a word in D*, e.g. ``D^2``; ``D^n, n >= k`` when unbounded."""
        k = self.letters.count("D")
        if UNBOUNDED in self.letters:
            return f"D^n, n >= {k}"
        return f"D^{k}"

    def __str__(self) -> str:
        return self.render()


ONE = GradeWord()


class _Grader:
    def __init__(self, strict: bool):
        self.strict = strict
        self.self_call: dict[str, str] = {}
        self.relaxed = False

    def op_letter(self, op: str) -> str:
        if op in LETTERS:
            return LETTERS[op]
        if op in UNIT_OPS or not self.strict:
            return ""
        raise UnknownOperationGrade(f"operation {op} has no grade in strict mode")

    def comp(self, c: Computation, env: dict[str, str | None]) -> str:
        match c:
            case Return(_) | Project(_, _):
                return ""
            case OpCall(op, _, x, body):
                return normalize(self.op_letter(op) + self.comp(body, _drop(env, x)))
            case Let(x, bound, body):
                g1 = self.comp(bound, env)
                inner = dict(env)
                inner[x] = self.latent(bound, env)
                return normalize(g1 + self.comp(body, inner))
            case Apply(f, _):
                return self.apply(f, env)
            case If(_, a, b):
                ga, gb = self.comp(a, env), self.comp(b, env)
                if ga == gb:
                    return ga
                if self.relaxed and GradeWord(ga).in_do_star() and GradeWord(gb).in_do_star():
                    return UNBOUNDED
                raise BranchGradeMismatch(
                    f"branches of 'if' have different grades {GradeWord(ga)} and {GradeWord(gb)}", ga
                )
            case Fix():
                return ""
            case WithHandle():
                raise UnsupportedHandler("handlers cannot be graded")
        raise GradeError(f"cannot grade {type(c).__name__}")

    def apply(self, f, env) -> str:
        match f:
            case Builtin():
                return ""
            case Lambda(x, _, _, body):
                return self.comp(body, _drop(env, x))
            case Var(name):
                g = env.get(name)
                if g is None:
                    raise UngradableApplication(f"cannot grade a call to {name}: its latent grade is unknown")
                return g
        raise UngradableApplication(f"cannot grade the application of {f}")

    def latent(self, bound: Computation, env) -> str | None:
        match bound:
            case Return(Lambda(x, _, _, body)):
                return self.comp(body, _drop(env, x))
            case Return(Var(name)):
                return env.get(name)
            case Fix():
                return self.fix(bound, env)
        return None

    def fix(self, fx: Fix, env) -> str:
        inner = _drop(env, fx.param)
        inner[fx.name] = ""
        g = self.comp(fx.body, inner)
        if g == "":
            return ""
        if not set(g) <= {"D", UNBOUNDED}:
            raise RecursiveGradeNotIdempotent(
                f"recursive function {fx.name} has body grade {GradeWord(g)}; only powers of D may repeat", g
            )
        inner[fx.name] = UNBOUNDED
        saved, self.relaxed = self.relaxed, True
        try:
            g2 = self.comp(fx.body, inner)
        except BranchGradeMismatch as exc:
            raise RecursiveGradeNotIdempotent(
                f"recursive call of {fx.name} cannot be treated as D^n: {exc}", exc.word
            ) from None
        finally:
            self.relaxed = saved
        if not GradeWord(g2).in_do_star():
            raise RecursiveGradeNotIdempotent(
                f"recursive call of {fx.name} sits inside an unfinished round (body grade {GradeWord(g2)})", g2
            )
        return UNBOUNDED


def _drop(env: dict, *names: str) -> dict:
    out = dict(env)
    for n in names:
        out[n] = None
    return out


def _reject_handlers(c) -> None:
    for t in subterms(c):
        if isinstance(t, (WithHandle, HandlerValue)):
            raise UnsupportedHandler(
                "grades are only defined for handler-free programs; this one installs or builds a handler"
            )


def grade_of(c: Computation, strict: bool = False) -> GradeWord:
    _reject_handlers(c)
    return GradeWord(_Grader(strict).comp(c, {}))


def check_main(c: Computation, strict: bool = False) -> GradeWord:
    """Grade a main program and insist that it normalises into ``D*``."""
    g = grade_of(c, strict)
    if not g.in_do_star():
        raise NotInDoStar(f"main program has grade {g}, which is not of the form D^n", g.letters)
    return g


def trace_word(ops) -> str:
    """Word of a runtime operation trace (unit-graded operations dropped)."""
    return "".join(LETTERS.get(op, "") for op in ops)
