"""The exit-code matrix of the command-line tool, shared by the CLI tests and the acceptance run."""
from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"
PRELUDE = Path(__file__).parent.parent / "src" / "leff" / "prelude"


def fx(name: str) -> str:
    return str(FIXTURES / f"{name}.leff")


def pre(name: str) -> str:
    return str(PRELUDE / f"{name}.leff")


# (argv, exit code)
MATRIX = [
    (["check", fx("well_typed")], 0),
    (["check", fx("ill_typed")], 1),
    (["check", fx("bad_syntax")], 1),
    (["check", fx("stuck")], 0),
    (["check", fx("divergent")], 0),
    (["check", pre("bandit")], 0),
    (["effcheck", fx("well_typed"), "--effects", "{}"], 0),
    (["effcheck", fx("ill_typed")], 1),
    (["effcheck", fx("stuck"), "--effects", "{}"], 1),
    (["effcheck", fx("stuck"), "--effects", "E_E"], 0),
    (["effcheck", pre("learner"), "--profile", "rl"], 0),
    (["effcheck", pre("mab_env"), "--profile", "e"], 0),
    (["effcheck", pre("main_loop"), "--effects", "E_RL + E_E", "--profile", "e"], 0),
    (["effcheck", pre("main_loop"), "--effects", "E_RL"], 1),
    (["effcheck", fx("learner_observes"), "--profile", "rl"], 1),
    (["effcheck", pre("learner"), "--profile", "nope"], 4),
    (["effcheck", fx("well_typed"), "--effects", "{nope}"], 4),
    (["grade", pre("main_loop")], 0),
    (["grade", fx("two_dos")], 0),
    (["grade", fx("ill_graded")], 1),
    (["grade", fx("well_typed")], 1),
    (["grade", fx("divergent")], 0),
    (["grade", fx("ill_typed")], 0),
    (["grade", fx("learner_observes")], 4),
    (["run", fx("well_typed"), "--fuel", "1000", "--seed", "1"], 0),
    (["run", fx("well_typed"), "--engine", "machine"], 0),
    (["run", fx("ill_typed")], 1),
    (["run", fx("bad_syntax")], 1),
    (["run", fx("stuck")], 2),
    (["run", fx("ill_graded")], 2),
    (["run", fx("failing")], 2),
    (["run", fx("failing"), "--engine", "machine"], 2),
    (["run", fx("divergent"), "--fuel", "5000"], 3),
    (["run", fx("divergent"), "--fuel", "5000", "--engine", "machine"], 3),
    (["run", fx("divergent"), "--fuel", "0"], 4),
    (["run", fx("well_typed"), "--param", "start=4"], 0),
    (["run", fx("well_typed"), "--param", "start=true"], 4),
    (["run", fx("well_typed"), "--param", "nope=1"], 4),
    (["run", pre("bandit"), "--engine", "machine", "--param", "rounds=30"], 0),
    (["bandit", "--rounds", "20", "--seed", "3"], 0),
    (["bandit", "--epsilon", "1.5"], 4),
    (["bandit", "--machines", "0"], 4),
    (["check", fx("missing")], 4),
    (["frobnicate"], 4),
    ([], 4),
]
