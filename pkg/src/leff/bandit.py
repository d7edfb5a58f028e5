"""Multi-armed bandit runs: the object-language program and a native oracle.

:func:`run_bandit` evaluates ``prelude/bandit.leff`` and records the arm of
every ``do`` and the value of every ``reward`` caught by a handler.
:func:`oracle_bandit` is a direct Python transcription of the same learner
and environment, drawing from the same :class:`RandomSource` in the same
order: exploration coin, then the explored arm if any, then the reward noise.
"""
from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

from .errors import BuiltinFailure, LeffRuntimeError
from .evaluator import Normal, evaluate
from .machine import run as machine_run
from .parser import Program, default_prelude_dir, load_program
from .rng import RandomSource
from .syntax import Const


@dataclass(frozen=True)
class BanditConfig:
    machines: int = 6
    rounds: int = 500
    epsilon: float = 0.05
    init: float = 10.0
    width: float = 10.0  # reward of arm a is a + U[0, width); 0 gives the deterministic variant
    seed: int = 0

    def params(self) -> dict:
        return {
            "machines": Const(int(self.machines), "Int"),
            "rounds": Const(int(self.rounds), "Int"),
            "epsilon": Const(float(self.epsilon), "Real"),
            "init": Const(float(self.init), "Real"),
            "width": Const(float(self.width), "Real"),
        }


@dataclass
class BanditTrace:
    arms: list[int] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    value: float | None = None  # what the program returned, if it ran to the end

    @property
    def cumulative(self) -> list[float]:
        out, total = [], 0.0
        for r in self.rewards:
            total = total + r
            out.append(total)
        return out

    @property
    def total(self) -> float:
        c = self.cumulative
        return c[-1] if c else 0.0

    def mean_last(self, n: int = 100) -> float:
        tail = self.rewards[-n:]
        return sum(tail) / len(tail) if tail else 0.0

    def rows(self):
        for i, (a, r, c) in enumerate(zip(self.arms, self.rewards, self.cumulative), start=1):
            yield i, a, r, c

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "arm", "reward", "cumulative"])
        for i, a, r, c in self.rows():
            w.writerow([i, a, repr(r), repr(c)])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


# ------------------------------------------------------------------ oracle


def oracle_bandit(cfg: BanditConfig) -> BanditTrace:
    rng = RandomSource(cfg.seed)
    table: list[tuple[int, list[list]]] = []  # (observation, rows of [arm, count, mean])
    trace = BanditTrace()
    for _ in range(cfg.rounds):
        obs = 0  # a bandit has one state
        idx = next((i for i, (o, _) in enumerate(table) if o == obs), -1)
        if idx < 0:
            table.append((obs, [[a, 0, cfg.init] for a in range(1, cfg.machines + 1)]))
            idx = len(table) - 1
        rows = table[idx][1]
        if rng.randomfloat(1.0) <= cfg.epsilon:
            na = rng.randomint(len(rows))
        else:
            na = 0
            for i in range(1, len(rows)):
                if rows[i][2] > rows[na][2]:
                    na = i
        row = rows[na]
        row[1] += 1
        arm = row[0]
        if not 1 <= arm <= cfg.machines:
            raise BuiltinFailure("This action is not available!")
        reward = float(arm) + rng.randomfloat(cfg.width)
        row[2] = row[2] + (reward - row[2]) / float(row[1])
        trace.arms.append(arm)
        trace.rewards.append(reward)
    trace.value = trace.total
    return trace


def oracle_statistics(cfg: BanditConfig, seeds) -> tuple[float, float]:
    """Mean and sample standard deviation of ``mean_last(100)`` over ``seeds``."""
    xs = [oracle_bandit(replace(cfg, seed=s)).mean_last(100) for s in seeds]
    return statistics.fmean(xs), statistics.stdev(xs)


def pull(arm: int, rng: RandomSource, width: float = 10.0) -> float:
    """One reward from the native environment model."""
    return float(arm) + rng.randomfloat(width)


# -------------------------------------------------------- object language


@lru_cache(maxsize=8)
def _program(prelude_dir: str) -> Program:
    return load_program(Path(prelude_dir) / "bandit.leff", prelude_dir=prelude_dir)


def bandit_program(prelude_dir: str | Path | None = None) -> Program:
    return _program(str(prelude_dir or default_prelude_dir()))


def run_bandit(
    cfg: BanditConfig,
    engine: str = "machine",
    prelude_dir: str | Path | None = None,
    fuel: int | None = None,
) -> BanditTrace:
    """Run the bandit program for ``cfg``; ``engine`` is ``machine`` or ``step``."""
    prog = bandit_program(prelude_dir)
    main = prog.link(cfg.params())
    trace = BanditTrace()

    def on_handle(op, arg):
        if op == "do":
            trace.arms.append(arg.index)
        elif op == "reward":
            trace.rewards.append(arg)

    rng = RandomSource(cfg.seed)
    budget = fuel or 2_000 * (cfg.rounds + 10) * max(cfg.machines, 1)
    if engine == "machine":
        out = machine_run(main, budget, rng, signature=prog.signature, on_handle=on_handle)
    elif engine == "step":
        out = evaluate(main, budget, rng, signature=prog.signature, on_handle=on_handle)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    if not isinstance(out, Normal):
        raise LeffRuntimeError(f"bandit program did not finish: {out}")
    trace.value = out.value.value
    return trace
