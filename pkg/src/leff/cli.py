"""Command-line entry point: ``leff check|effcheck|grade|run|bandit``.

Exit codes: 0 success, 1 static error (parse, type, effect, grade, profile),
2 stuck or runtime failure, 3 fuel exhausted, 4 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .bandit import BanditConfig, oracle_bandit, run_bandit
from .errors import (
    LeffError,
    LeffRuntimeError,
    ParseError,
    ProfileViolation,
    RegistryError,
    Span,
    TypeCheckError,
)
from .evaluator import FuelExhausted, Normal, Stuck, evaluate
from .grade import GradeError, check_main
from .machine import run as machine_run
from .parser import Program, load_program, parse_effects, parse_value
from .printer import show
from .profiles import get_profile, load_profiles, profile_violations
from .typecheck import Checker, check_program

OK, STATIC, RUNTIME, FUEL, USAGE = 0, 1, 2, 3, 4


@dataclass
class CliConfig:
    command: str
    file: Path | None
    prelude: Path | None
    args: argparse.Namespace


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE)


class _Usage(Exception):
    pass


def _diag(file: str, span: Span | None, message: str, severity: str = "error") -> str:
    span = span or Span(1, 1)
    return f"{file}:{span.line}:{span.col}: {severity}: {message}"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="leff", description="Check, grade and run .leff programs; run the bandit experiment.")
    p.add_argument("--prelude", type=Path, help="prelude directory (default: $LEFF_PRELUDE or the bundled one)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="simple type checking")
    c.add_argument("file", type=Path)

    e = sub.add_parser("effcheck", help="effect type checking and profile check")
    e.add_argument("file", type=Path)
    e.add_argument("--effects", default="{}", help="ambient effects of the main computation, e.g. 'E_RL + E_E'")
    e.add_argument("--profile", help="rl, e or i (or a name from --profiles)")
    e.add_argument("--profiles", type=Path, help="JSON file with extra profiles")

    g = sub.add_parser("grade", help="operation-order grade of the main computation")
    g.add_argument("file", type=Path)
    g.add_argument("--strict", action="store_true", help="reject operations other than choice/do/reward/observe")

    r = sub.add_parser("run", help="evaluate the main computation")
    r.add_argument("file", type=Path)
    r.add_argument("--fuel", type=int, default=1_000_000)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--engine", choices=("step", "machine"), default="step")
    r.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")

    b = sub.add_parser("bandit", help="run the bandit program and write its trace")
    b.add_argument("--machines", type=int, default=6)
    b.add_argument("--rounds", type=int, default=500)
    b.add_argument("--epsilon", type=float, default=0.05)
    b.add_argument("--init", type=float, default=10.0)
    b.add_argument("--width", type=float, default=10.0, help="reward of arm a is a + U[0, width)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--trace-out", type=Path)
    b.add_argument("--engine", choices=("machine", "step", "oracle"), default="machine")
    return p


def _load(cfg: CliConfig) -> Program:
    if not cfg.file.is_file():
        raise _Usage(f"no such file: {cfg.file}")
    return load_program(cfg.file, prelude_dir=cfg.prelude)


def _cmd_check(cfg: CliConfig) -> int:
    prog = _load(cfg)
    types = check_program(prog)
    if "main" in types:
        print(f"main : {types['main']}")
    print(f"ok: {cfg.file}")
    return OK


def _cmd_effcheck(cfg: CliConfig) -> int:
    prog = _load(cfg)
    try:
        effects = parse_effects(cfg.args.effects, prog.signature)
    except ParseError as exc:
        raise _Usage(f"bad --effects: {exc}") from None
    types = check_program(prog, effects)
    if cfg.args.profile:
        table = load_profiles(cfg.args.profiles) if cfg.args.profiles else None
        try:
            profile = get_profile(cfg.args.profile, table)
        except KeyError as exc:
            raise _Usage(str(exc.args[0])) from None
        found = profile_violations(cfg.file.read_text(), profile, prog, str(cfg.file))
        if found:
            for span, msg in found:
                print(_diag(str(cfg.file), span, msg), file=sys.stderr)
            return STATIC
    if "main" in types:
        print(f"main : {types['main']} ! {effects}")
    print(f"ok: {cfg.file}")
    return OK


def _cmd_grade(cfg: CliConfig) -> int:
    prog = _load(cfg)
    if prog.main is None:
        raise _Usage(f"{cfg.file} has no main computation to grade")
    try:
        g = check_main(prog.link(), strict=cfg.args.strict)
    except GradeError as exc:
        print(_diag(str(cfg.file), prog.main_span, str(exc)), file=sys.stderr)
        return STATIC
    print(f"grade: {g.render()} ({g.summary()})")
    return OK


def _params(prog: Program, items: list[str]) -> dict:
    out = {}
    for item in items:
        name, sep, text = item.partition("=")
        if not sep:
            raise _Usage(f"--param expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = parse_value(text, prog.signature)
        except ParseError as exc:
            raise _Usage(f"bad value for {name}: {exc}") from None
    unknown = set(out) - set(prog.params)
    if unknown:
        raise _Usage(f"unknown parameter(s): {', '.join(sorted(unknown))}")
    checker = Checker(prog.signature, simple=True)
    for name, v in out.items():
        want = checker.ann(prog.params[name].type)
        try:
            checker.same(checker.value({}, v), want, v)
        except TypeCheckError as exc:
            raise _Usage(f"bad value for {name}: {exc.message}") from None
    return out


def _cmd_run(cfg: CliConfig) -> int:
    if cfg.args.fuel <= 0:
        raise _Usage("--fuel must be positive")
    prog = _load(cfg)
    if prog.main is None:
        raise _Usage(f"{cfg.file} has no main computation to run")
    main = prog.link(_params(prog, cfg.args.param))
    check_program(prog)
    evaluator = machine_run if cfg.args.engine == "machine" else evaluate
    out = evaluator(main, cfg.args.fuel, seed=cfg.args.seed, signature=prog.signature)
    match out:
        case Normal(v):
            print(" ".join(show(v).split()))
            return OK
        case Stuck(op, arg):
            print(_diag(str(cfg.file), prog.main_span, f"stuck: unhandled operation {op}({show(arg)})"),
                  file=sys.stderr)
            return RUNTIME
        case FuelExhausted(steps):
            print(_diag(str(cfg.file), prog.main_span, f"fuel exhausted after {steps} steps"), file=sys.stderr)
            return FUEL
    return RUNTIME  # pragma: no cover


def _cmd_bandit(cfg: CliConfig) -> int:
    a = cfg.args
    if a.machines < 1 or a.rounds < 0:
        raise _Usage("--machines must be positive and --rounds non-negative")
    if not 0.0 <= a.epsilon <= 1.0:
        raise _Usage("--epsilon must lie in [0, 1]")
    if a.width < 0:
        raise _Usage("--width must be non-negative")
    bc = BanditConfig(a.machines, a.rounds, a.epsilon, a.init, a.width, a.seed)
    trace = oracle_bandit(bc) if a.engine == "oracle" else run_bandit(bc, a.engine, cfg.prelude)
    if a.trace_out:
        trace.write_csv(a.trace_out)
    print(f"mean_last_100={trace.mean_last(100)!r}")
    return OK


COMMANDS = {
    "check": _cmd_check,
    "effcheck": _cmd_effcheck,
    "grade": _cmd_grade,
    "run": _cmd_run,
    "bandit": _cmd_bandit,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else USAGE
    prelude = args.prelude or (Path(os.environ["LEFF_PRELUDE"]) if os.environ.get("LEFF_PRELUDE") else None)
    cfg = CliConfig(args.command, getattr(args, "file", None), prelude, args)
    where = str(cfg.file) if cfg.file else "leff"
    try:
        return COMMANDS[args.command](cfg)
    except _Usage as exc:
        print(f"leff: error: {exc}", file=sys.stderr)
        return USAGE
    except ParseError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return STATIC
    except TypeCheckError as exc:
        print(_diag(where, exc.span, exc.message), file=sys.stderr)
        return STATIC
    except ProfileViolation as exc:
        for span, msg in exc.violations:
            print(_diag(where, span, msg), file=sys.stderr)
        return STATIC
    except LeffRuntimeError as exc:
        print(_diag(where, None, f"runtime failure: {exc}"), file=sys.stderr)
        return RUNTIME
    except (RegistryError, LeffError) as exc:
        print(_diag(where, None, str(exc)), file=sys.stderr)
        return STATIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
