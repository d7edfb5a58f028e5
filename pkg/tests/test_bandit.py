import statistics

import pytest
from hypothesis import given, settings, strategies as st

from leff.bandit import BanditConfig, BanditTrace, oracle_bandit, pull, run_bandit
from leff.evaluator import Normal, evaluate
from leff.grade import check_main
from leff.parser import load_program, parse_program
from leff.rng import RandomSource
from leff.syntax import Const, Pair


def learner_value(prelude, main, seed=0):
    prog = parse_program('use "learner.leff"\n' + main, "t.leff", base_dir=prelude)
    out = evaluate(prog.link(), 100_000, seed=seed, signature=prog.signature)
    assert isinstance(out, Normal), out
    return out.value


def row(prelude, q, na):
    return learner_value(prelude, f"let q = return {q} in nth[Row] (q, {na})")


def test_incremental_mean(prelude):
    # one row chosen twice with mean 4.0; the third pull pays 10.0
    start = "[(A_RL#1, (2, 4.0)) : Row]"
    q = learner_value(prelude, f"let q = update_choice ({start}, 0) in update_reward (q, (0, 10.0))")
    (a, (c, v)), = [(r.fst, (r.snd.fst.value, r.snd.snd.value)) for r in q.items]
    assert (c, v) == (3, 6.0)
    assert v == statistics.mean([4.0, 4.0, 10.0])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=12))
def test_running_mean_matches_full_average(prelude, rewards):
    body = "let q0 = return [(A_RL#1, (0, 0.0)) : Row] in\n"
    last = "q0"
    for i, r in enumerate(rewards):
        body += f"let c{i} = update_choice ({last}, 0) in let q{i + 1} = update_reward (c{i}, (0, {r!r})) in\n"
        last = f"q{i + 1}"
    v = learner_value(prelude, body + f"return {last}").items[0].snd.snd.value
    assert v == pytest.approx(statistics.fmean(rewards), abs=1e-9)


def test_greedy_without_exploration_picks_best(prelude):
    q = "[(A_RL#1, (1, 5.0)), (A_RL#2, (1, 7.0)) : Row]"
    out = learner_value(prelude, f"greedy_policy (0.0, {q})")
    assert out == Pair(Const(1, "Int"), Const(2, "A_RL"))


def test_argmax_ties_go_to_lowest_index(prelude):
    q = "[(A_RL#1, (0, 3.0)), (A_RL#2, (0, 7.0)), (A_RL#3, (0, 7.0)) : Row]"
    assert learner_value(prelude, f"argmax {q}").fst == Const(1, "Int")


def test_full_exploration_is_uniform(prelude):
    q = "[(A_RL#1, (0, 1.0)), (A_RL#2, (0, 9.0)), (A_RL#3, (0, 5.0)) : Row]"
    picks = [learner_value(prelude, f"greedy_policy (1.0, {q})", seed=s).snd.value for s in range(300)]
    counts = [picks.count(i) for i in (1, 2, 3)]
    assert min(counts) > 60


@pytest.mark.parametrize("arm", range(1, 7))
def test_arm_mean(arm):
    rng = RandomSource(arm)
    n = 100_000
    mean = sum(pull(arm, rng) for _ in range(n)) / n
    assert abs(mean - (arm + 5.0)) < 0.1


def test_zero_rounds():
    t = run_bandit(BanditConfig(rounds=0))
    assert t.arms == [] and t.cumulative == [] and t.total == 0.0 and t.value == 0.0


def test_single_arm_without_exploration():
    t = oracle_bandit(BanditConfig(machines=1, epsilon=0.0, rounds=50))
    assert set(t.arms) == {1}
    assert run_bandit(BanditConfig(machines=1, epsilon=0.0, rounds=50)).arms == t.arms


def test_deterministic_variant_tries_every_arm_then_settles():
    cfg = BanditConfig(epsilon=0.0, width=0.0, rounds=40)
    t = run_bandit(cfg)
    assert t.arms[:6] == [1, 2, 3, 4, 5, 6]
    assert set(t.arms[6:]) == {6}
    assert t.rewards == [float(a) for a in t.arms]
    assert t.arms == oracle_bandit(cfg).arms


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**63), st.integers(1, 8), st.floats(0.0, 1.0), st.floats(0.0, 20.0))
def test_program_matches_oracle(seed, k, eps, init):
    cfg = BanditConfig(machines=k, rounds=60, epsilon=eps, init=init, seed=seed)
    a, b = run_bandit(cfg), oracle_bandit(cfg)
    assert (a.arms, a.rewards) == (b.arms, b.rewards)
    assert a.value == a.total == b.total


def test_step_engine_agrees():
    cfg = BanditConfig(rounds=6, seed=3)
    a, b = run_bandit(cfg, engine="step"), run_bandit(cfg)
    assert (a.arms, a.rewards) == (b.arms, b.rewards)


def test_csv_format(tmp_path):
    t = BanditTrace([2, 1], [3.5, 1.25])
    assert t.to_csv() == "round,arm,reward,cumulative\n1,2,3.5,3.5\n2,1,1.25,4.75\n"
    t.write_csv(tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text() == t.to_csv()
    assert t.mean_last(1) == 1.25


def test_main_loop_is_well_graded(prelude):
    assert check_main(load_program(prelude / "main_loop.leff").link()).is_unit()


def test_frozen_band_matches_oracle():
    from leff.bandit import oracle_statistics
    from test_acceptance import ORACLE_MEAN_LAST_100, ORACLE_SD_LAST_100

    mean, sd = oracle_statistics(BanditConfig(), range(1000))
    assert mean == pytest.approx(ORACLE_MEAN_LAST_100, abs=1e-12)
    assert sd == pytest.approx(ORACLE_SD_LAST_100, abs=1e-12)
    assert 8.5 < mean < 11.0
