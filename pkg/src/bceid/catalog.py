"""Small worked decision problems used in examples, tests and the CLI."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .model import DecisionProblem


def match3() -> DecisionProblem:
    """Three states, three actions, payoff 1 for matching the state."""
    return DecisionProblem(
        ("w1", "w2", "w3"), ("a1", "a2", "a3"), tuple(tuple(int(i == j) for i in range(3)) for j in range(3))
    )


def fourstate() -> DecisionProblem:
    """Binary action with ``u(a₂) − u(a₁) = (−9, −5, −1, 5)``."""
    return DecisionProblem(("w1", "w2", "w3", "w4"), ("a1", "a2"), ((0, 0, 0, 0), (-9, -5, -1, 5)))


def coin() -> DecisionProblem:
    """Two states, two actions, payoff 1 for matching the state."""
    return DecisionProblem(("w1", "w2"), ("a1", "a2"), ((1, 0), (0, 1)))


def shift(theta) -> DecisionProblem:
    """States ``−1, 1``; ``u(a₁) = 0`` and ``u(a₂, ω) = ω + θ``."""
    t = Fraction(theta)
    return DecisionProblem(("-1", "1"), ("a1", "a2"), ((0, 0), (t - 1, t + 1)))


def abs3() -> DecisionProblem:
    """Absolute loss on three points: ``u(a_j, ω_k) = −|k − j|``."""
    return DecisionProblem(
        ("w1", "w2", "w3"), ("a1", "a2", "a3"), tuple(tuple(-abs(k - j) for k in range(3)) for j in range(3))
    )


def hypothesis_test(c_one, c_two, accept: Sequence[bool]) -> DecisionProblem:
    """``a₁`` rejects; ``u(a₂) − u(a₁)`` is ``c_one`` on accepted states and ``−c_two`` elsewhere."""
    c1, c2 = Fraction(c_one), Fraction(c_two)
    states = tuple(f"w{i + 1}" for i in range(len(accept)))
    return DecisionProblem(states, ("a1", "a2"), (tuple(0 for _ in accept), tuple(c1 if h else -c2 for h in accept)))


def safe_risky(signs: Sequence[int]) -> DecisionProblem:
    """Safe ``a₁`` versus risky ``a₂`` with difference ``+1``, ``0`` or ``−1`` per state."""
    states = tuple(f"w{i + 1}" for i in range(len(signs)))
    return DecisionProblem(states, ("a1", "a2"), (tuple(0 for _ in signs), tuple(signs)))


CATALOG = {
    "match3": match3,
    "fourstate": fourstate,
    "coin": coin,
    "abs3": abs3,
}
