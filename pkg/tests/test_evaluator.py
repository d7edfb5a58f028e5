"""Small-step evaluator and the environment machine."""
import pytest
from hypothesis import given, settings, strategies as st

from leff.errors import BuiltinFailure, LeffRuntimeError
from leff.evaluator import FuelExhausted, Normal, Stepped, Stuck, evaluate, step
from leff.gen import GEN_SIGNATURE, well_typed_program
from leff.machine import run
from leff.parser import parse_computation, parse_program
from leff.printer import show
from leff.rng import RandomSource
from leff.signature import RList, SortVal
from leff.syntax import Const, ListVal, Pair, Return, Var, alpha_equal

ENGINES = {"step": evaluate, "machine": run}


def go(engine, text, fuel=100_000, prelude=None, **kw):
    prog = parse_program(text, "t.leff", base_dir=prelude)
    return ENGINES[engine](prog.link(), fuel, signature=prog.signature, **kw)


def value(text, engine="step", fuel=100_000, **kw):
    out = go(engine, text, fuel, **kw)
    assert isinstance(out, Normal), out
    return out.value


both = pytest.mark.parametrize("engine", sorted(ENGINES))


def test_single_steps():
    c = parse_computation("let x = return 1 in plus (x, 2)")
    r = step(c)
    assert isinstance(r, Stepped) and r.term == parse_computation("plus (1, 2)")
    assert step(r.term) == Stepped(Return(Const(3, "Int")))
    assert isinstance(step(Return(Const(3, "Int"))), Normal)


def test_let_commutes_with_operation():
    c = parse_computation("let x = observe(()) in return x")
    r = step(c)
    assert isinstance(r, Stepped)
    s = step(r.term)
    assert isinstance(s, Stuck) and s.op == "observe"


@both
def test_arithmetic_and_conditionals(engine):
    assert value("let b = lt (2, 3) in if b then times (4, 5) else return 0", engine) == Const(20, "Int")
    assert value("div (7, 0)", engine) == Const(0, "Int")
    assert value("div (-7, 2)", engine) == Const(-3, "Int")
    assert value("divf (1.0, 4.0)", engine) == Const(0.25, "Real")


@both
def test_handler_return_clause(engine):
    text = "with handler (Int =[{}; {}]=> Int * Int) { | return x -> return (x, x) } handle return 4"
    assert value(text, engine) == Pair(Const(4, "Int"), Const(4, "Int"))


@both
def test_deep_handling_and_multishot(engine):
    # every choice resumes twice; the handler stays installed for later choices
    text = """
    effect flip : Unit ~> Bool
    with handler (Int =[{flip}; {}]=> Int) {
      | return x -> return x
      | flip(u; k) -> let a = k true in let b = k false in plus (a, b)
    } handle
      let p = flip(()) in
      let q = flip(()) in
      let x = if p then return 10 else return 1 in
      let y = if q then return 100 else return 0 in
      plus (x, y)
    """
    # (110 + 10) + (101 + 1)
    assert value(text, engine) == Const(222, "Int")


@both
def test_forwarding_to_outer_handler(engine):
    text = """
    effect ask : Unit ~> Int
    effect tell : Int ~> Unit
    with handler (Int =[{ask}; {}]=> Int) { | return x -> return x | ask(u; k) -> k 7 } handle
    with handler (Int =[{tell, ask}; {ask}]=> Int) {
      | return x -> return x
      | tell(n; k) -> let m = ask(()) in let r = k () in plus (r, m)
    } handle
      tell(1); return 5
    """
    assert value(text, engine) == Const(12, "Int")


@both
def test_state_handler(engine):
    text = """
    effect get : Unit ~> Int
    effect put : Int ~> Unit
    let run = return (
      handler (Int =[{get, put}; {}]=> (Int -> Int * Int)) {
      | return x -> return (fun (s : Int) -> return (s, x))
      | get(u; k) -> return (fun (s : Int) -> let f = k s in f s)
      | put(n; k) -> return (fun (s : Int) -> let f = k () in f n)
      }) in
    let f = with run handle
      let a = get(()) in let b = plus (a, 1) in put(b); let c = get(()) in times (c, 10) in
    f 4
    """
    assert value(text, engine) == Pair(Const(5, "Int"), Const(50, "Int"))


@both
def test_recursion(engine):
    text = """
    let rec fact (n : Int) -> Int =
      let z = le (n, 0) in
      if z then return 1 else let m = minus (n, 1) in let r = fact m in times (n, r)
    in fact 10
    """
    assert value(text, engine) == Const(3628800, "Int")


@both
def test_lists(engine):
    assert value("let l = cons[Int] (1, [2, 3 : Int]) in length[Int] l", engine) == Const(3, "Int")
    assert value("set_nth[Int] ([1, 2 : Int], (5, 9))", engine) == ListVal(
        value("return nil[Int]").elem, (Const(1, "Int"), Const(2, "Int")))


@both
def test_unhandled_operation_is_stuck(engine):
    out = go(engine, "let x = observe(()) in plusf (x, 1.0)", 100)
    assert isinstance(out, Stuck) and out.op == "observe"


@both
def test_host_resumes_operations(engine):
    out = go(engine, "let x = observe(()) in plusf (x, 1.0)", 100,
                          host=lambda op, arg: 2.5)
    assert out.value == Const(3.5, "Real")


@both
def test_fuel(engine):
    out = go(engine, "let rec f (n : Int) -> Int = f n in f 0", 500)
    assert isinstance(out, FuelExhausted)


@both
def test_partial_builtins_fail(engine):
    with pytest.raises(LeffRuntimeError, match="empty"):
        go(engine, "head[Int] nil[Int]", 100)


@both
def test_random_builtins_follow_the_seed(engine):
    v = value("randomfloat 10.0", engine, seed=0)
    assert v == Const(RandomSource(0).randomfloat(10.0), "Real")


# ------------------------------------------------ prelude pieces, concretely

ENV = 'use "mab_env.leff"\nwith env_hide[Real; {}] handle with mab_env[Real; {}](6, 10.0) handle\n'
IFACE = 'use "interface_mab.leff"\nwith h_iface_mab[Real; {}](6) handle\n'


@both
def test_environment_do_then_observe(engine, prelude):
    for seed in range(20):
        v = value(ENV + "do(A_E#3); observe(())", engine, prelude=prelude, seed=seed).value
        assert 3.0 <= v < 13.0


@both
def test_environment_observe_before_do(engine, prelude):
    assert value(ENV + "observe(())", engine, prelude=prelude) == Const(0.0, "Real")


@both
def test_environment_rejects_unknown_machine(engine, prelude):
    with pytest.raises(BuiltinFailure, match="not available"):
        go(engine, ENV + "do(A_E#0); return 0.0", 10_000, prelude)


def test_interface_lists_actions(prelude):
    text = ('use "interface_mab.leff"\n'
            "with h_iface_mab[Int; E_E](6) handle let l = getactions_RL(O_RL#0) in length[A_RL] l")
    assert value(text, prelude=prelude) == Const(6, "Int")


def test_interface_abstract_observation(prelude):
    text = IFACE.replace("Real", "Unit") + "let o = observe_RL(()) in return ()"
    out = go("step", text, 1000, prelude)
    assert isinstance(out, Stuck) and out.op == "observe"
    out = go("step", text, 1000, prelude, host=lambda op, arg: 4.0)
    assert isinstance(out, Normal)


def test_action_bijection(prelude):
    text = ('use "interface_mab.leff"\n'
            "with h_act[Unit; {}] handle let a = choice(()) in do(a)")
    seen = []

    def host(op, arg):
        seen.append((op, arg))
        return SortVal("A_RL", 4) if op == "choice_RL" else ()

    assert isinstance(go("step", text, 1000, prelude, host=host), Normal)
    assert seen == [("choice_RL", ()), ("do", SortVal("A_E", 4))]


# ---------------------------------------------- engines agree on random terms


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_machine_matches_step_evaluator(seed):
    e = GEN_SIGNATURE.effects("get", "put", "observe")
    c, _ = well_typed_program(seed, e)
    a = evaluate(c, 50_000, seed=seed, signature=GEN_SIGNATURE)
    b = run(c, 50_000, seed=seed, signature=GEN_SIGNATURE)
    assert type(a) is type(b)
    match a:
        case Normal(v):
            assert alpha_equal(v, b.value), (show(v), show(b.value))
        case Stuck(op, arg):
            assert (op, arg) == (b.op, b.arg)


def test_native_values():
    assert RList(None, (1,)).items == (1,)
    assert Var("x") != Var("y")
