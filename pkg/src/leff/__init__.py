"""A small language with algebraic effects and handlers, plus a bandit learner written in it."""
import sys

if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)
