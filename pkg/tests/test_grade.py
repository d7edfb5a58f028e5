import random

import pytest
from hypothesis import given, settings, strategies as st

from leff.evaluator import Normal, evaluate
from leff.gen import GRADED_EFFECTS, graded_program
from leff.grade import (
    BranchGradeMismatch,
    GradeWord,
    NotInDoStar,
    RecursiveGradeNotIdempotent,
    UngradableApplication,
    UnknownOperationGrade,
    UnsupportedHandler,
    check_main,
    grade_of,
    is_normal,
    normalize,
    normalize_random,
    trace_word,
)
from leff.parser import load_program, parse_computation, parse_program
from leff.signature import SortVal
from leff.typecheck import etype_computation

words = st.text(alphabet="CDR", max_size=40)


def grade(text, **kw):
    return grade_of(parse_computation(text), **kw)


def leftmost(word: str) -> str:
    """Rewrite the leftmost ``CDR`` until none is left: the textbook strategy."""
    while "CDR" in word:
        word = word.replace("CDR", "", 1)
    return word


@pytest.mark.parametrize("word, normal", [
    ("", ""), ("CDR", ""), ("CCDRDR", ""), ("DCDRD", "DD"), ("RC", "RC"), ("CDDR", "CDDR"),
    ("CDRCDR", ""), ("CCDR", "C"), ("CDCDRR", ""), ("CDCRDR", "CDCRDR"),
])
def test_normalize_examples(word, normal):
    assert normalize(word) == normal
    assert leftmost(word) == normal


@given(words)
def test_normal_forms_are_normal_and_idempotent(w):
    n = normalize(w)
    assert is_normal(n)
    assert normalize(n) == n


@given(words, st.integers(0, 2**32))
def test_confluence(w, seed):
    assert normalize_random(w, random.Random(seed)) == leftmost(w) == normalize(w)


@given(words, words)
def test_normalize_is_a_monoid_map(a, b):
    assert normalize(normalize(a) + normalize(b)) == normalize(a + b)


def test_grade_word_rendering():
    assert GradeWord("").render() == "1" and GradeWord("").summary() == "D^0"
    assert GradeWord("DD").summary() == "D^2"
    assert GradeWord("DS").render() == "DD*" and GradeWord("DS").summary() == "D^n, n >= 1"
    with pytest.raises(ValueError):
        GradeWord("CDR")


def test_main_loop_grades_to_unit(prelude):
    prog = load_program(prelude / "main_loop.leff")
    g = check_main(prog.link())
    assert g.is_unit() and g.render() == "1"


def test_reward_before_do_is_rejected():
    text = "let a = choice(()) in let o = observe(()) in reward(o); do(a); return ()"
    assert grade(text).letters == "CRD"
    with pytest.raises(NotInDoStar):
        check_main(parse_computation(text))


def test_stray_dos_are_counted():
    assert grade("do(A_E#1); do(A_E#2); return ()").letters == "DD"
    assert grade("let a = choice(()) in do(a); let o = observe(()) in reward(o); do(a); return ()").letters == "D"


def test_lambdas_carry_latent_grades():
    text = """let r = return (fun (u : Unit) -[E_RL + E_E]->
                 let a = choice(()) in do(a); reward(1.0)) in
              let x = r () in do(A_E#2); r ()"""
    assert grade(text).letters == "D"


def test_branches_must_agree():
    with pytest.raises(BranchGradeMismatch):
        grade("if true then do(A_E#1) else return ()")
    assert grade("if true then do(A_E#1) else do(A_E#2)").letters == "D"


def test_recursion_with_unit_body():
    text = """let rec go (n : Int) -[E_RL + E_E]-> Unit =
                let z = le (n, 0) in
                if z then return () else
                let a = choice(()) in do(a); reward(1.0); let m = minus (n, 1) in go m
              in go 3"""
    assert grade(text).is_unit()


def test_recursion_of_dos_is_unbounded():
    text = """let rec go (n : Int) -[{do}]-> Unit =
                let z = le (n, 0) in
                if z then do(A_E#1) else do(A_E#1); let m = minus (n, 1) in go m
              in go 3"""
    g = grade(text)
    assert g.in_do_star() and "S" in g.letters


def test_recursive_call_inside_a_round_is_rejected():
    # with the self-call counted as 1 both branches grade to D, yet the call
    # sits between a choice and its do: go 1 performs C D D R D, not D*
    text = """let rec go (n : Int) -[E_RL + E_E]-> Unit =
                let z = le (n, 0) in
                if z then do(A_E#1) else
                let a = choice(()) in let m = minus (n, 1) in go m; do(a); reward(1.0); do(A_E#1)
              in go 1"""
    with pytest.raises(RecursiveGradeNotIdempotent):
        grade(text)
    assert normalize(trace_word(run_trace(parse_computation(text)))) == "CDDRD"


def test_recursive_choice_is_rejected():
    text = """let rec go (n : Int) -[E_RL]-> Unit =
                let z = le (n, 0) in if z then return () else let a = choice(()) in let m = minus (n, 1) in go m
              in go 2"""
    with pytest.raises((BranchGradeMismatch, RecursiveGradeNotIdempotent)):
        grade(text)


def test_handlers_and_unknown_calls_are_not_graded():
    with pytest.raises(UnsupportedHandler):
        grade("with handler (Unit =[{}; {}]=> Unit) { | return x -> return x } handle return ()")
    with pytest.raises(UngradableApplication):
        grade("let p = return (fun (u : Unit) -> return (), 1) in let f = pi1 p in f ()")


def test_strict_mode():
    prog = parse_program("effect ping : Unit ~> Unit\nping(())", "t.leff")
    assert check_main(prog.link()).is_unit()
    with pytest.raises(UnknownOperationGrade):
        check_main(prog.link(), strict=True)


def run_trace(c):
    ops = []

    def host(op, arg):
        ops.append(op)
        return {"choice": SortVal("A_E", 1), "observe": 1.0}.get(op, ())

    out = evaluate(c, 100_000, host=host)
    assert isinstance(out, Normal)
    return ops


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from([0.0, 0.5]))
def test_accepted_programs_have_sound_traces(seed, shuffle):
    c = graded_program(seed, shuffle)
    etype_computation({}, GRADED_EFFECTS, c)
    try:
        g = check_main(c)
    except (NotInDoStar, BranchGradeMismatch, RecursiveGradeNotIdempotent):
        return
    word = normalize(trace_word(run_trace(c)))
    assert set(word) <= {"D"}
    if "S" not in g.letters:
        assert word == g.letters
    else:
        assert len(word) >= g.letters.count("D")
