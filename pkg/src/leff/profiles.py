"""Sublanguage profiles: allow-lists of the symbols a source file may mention.

Three profiles are built in:

* ``i`` (interface): everything;
* ``e`` (environment): no learner-side types ``A_RL``/``O_RL``, no learner
  operations, no conversions into learner types;
* ``rl`` (learner): only the abstract learner operations, the types
  ``A_RL``/``O_RL`` without literal constants, no environment types and no
  environment operations.

The check is a scan of the file's own tokens, so it reports the exact place
of each violation. Effect aliases are expanded to the operations they name.
Profiles can also be loaded from a JSON file of the form
``{"profiles": {"name": {"types": [...], "operations": [...], "builtins": [...] or "*",
"constants": [...], "declared_ops": bool}}}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ProfileViolation, Span
from .parser import Program, parse_program, tokenize
from .signature import BUILTINS, DEFAULT_SIGNATURE

ALL = "*"


@dataclass(frozen=True)
class Profile:
    name: str
    types: frozenset[str] | str
    operations: frozenset[str] | str
    builtins: frozenset[str] | str
    constants: frozenset[str] | str  # sorts whose literals may appear
    declared_ops: bool = True  # operations declared in the file itself

    def allows(self, field: str, symbol: str) -> bool:
        allowed = getattr(self, field)
        return allowed == ALL or symbol in allowed


_BASIC_TYPES = {"Unit", "Bool", "Int", "Real", "List"}
_RL_OPS = {"choice_RL", "reward_RL", "observe_RL", "getactions_RL"}
_E_OPS = {"choice", "reward", "observe", "do"}
_CROSSING = {"act_of_rl", "rl_act_of_int"}
_ENV_BUILTINS = {"act_index", "act_of_int", "fail_action"}

BUILTIN_PROFILES: dict[str, Profile] = {
    "i": Profile("i", ALL, ALL, ALL, ALL),
    "e": Profile(
        "e",
        frozenset(_BASIC_TYPES | {"A_E", "O_E"}),
        frozenset(_E_OPS),
        frozenset(set(BUILTINS) - _CROSSING),
        frozenset({"A_E"}),
    ),
    "rl": Profile(
        "rl",
        frozenset(_BASIC_TYPES | {"A_RL", "O_RL"}),
        frozenset(_RL_OPS),
        frozenset(set(BUILTINS) - _CROSSING - _ENV_BUILTINS),
        frozenset(),
        declared_ops=False,
    ),
}
_ALIASES = {"I": "i", "E": "e", "RL": "rl", "interface": "i", "environment": "e", "learner": "rl"}


def _field(value) -> frozenset[str] | str:
    return ALL if value == ALL else frozenset(value)


def load_profiles(path: str | Path) -> dict[str, Profile]:
    data = json.loads(Path(path).read_text())
    out = dict(BUILTIN_PROFILES)
    for name, spec in data.get("profiles", {}).items():
        out[name] = Profile(
            name,
            _field(spec.get("types", ALL)),
            _field(spec.get("operations", ALL)),
            _field(spec.get("builtins", ALL)),
            _field(spec.get("constants", ALL)),
            bool(spec.get("declared_ops", True)),
        )
    return out


def get_profile(name: str, table: dict[str, Profile] | None = None) -> Profile:
    table = table or BUILTIN_PROFILES
    key = name if name in table else _ALIASES.get(name, name.lower())
    if key not in table:
        raise KeyError(f"unknown profile {name!r}; known: {', '.join(sorted(table))}")
    return table[key]


def profile_violations(text: str, profile: Profile, program: Program | None = None,
                       file: str = "<input>") -> list[tuple[Span, str]]:
    """Every forbidden symbol in ``text`` with its position."""
    prog = program or parse_program(text, file)
    sig = prog.signature
    declared = {d.name for d in prog.decls if d.kind == "effect"}
    default = DEFAULT_SIGNATURE
    found: list[tuple[Span, str]] = []

    def check(field: str, symbol: str, span: Span, what: str):
        if not profile.allows(field, symbol):
            found.append((span, f"profile {profile.name} forbids {what} {symbol}"))

    for tok in tokenize(text, file):
        match tok.kind:
            case "sort":
                sort = tok.text.split("#")[0]
                check("types", sort, tok.span, "type")
                check("constants", sort, tok.span, "constants of sort")
            case "uid":
                name = tok.text
                if name in default.base_types or name in default.type_aliases or name in ("Unit", "List"):
                    check("types", name, tok.span, "type")
                elif name in sig.effect_aliases:
                    for op in sorted(sig.effect_aliases[name].names()):
                        if op in declared and profile.declared_ops:
                            continue
                        check("operations", op, tok.span, f"operation (via {name})")
            case "id":
                name = tok.text
                if name in sig.operations:
                    if name in declared and profile.declared_ops:
                        continue
                    check("operations", name, tok.span, "operation")
                elif name in sig.builtins:
                    check("builtins", name, tok.span, "builtin")
    return found


def check_profile(text: str, profile: Profile | str, program: Program | None = None, file: str = "<input>") -> None:
    if isinstance(profile, str):
        profile = get_profile(profile)
    found = profile_violations(text, profile, program, file)
    if found:
        raise ProfileViolation(found)
