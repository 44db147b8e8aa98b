"""Closed-form test-function families and the consistency checks built on them.

A test function pairs a direction ``p`` over states with heights ``q`` over
actions, ``q(a) = max_{μ ∈ Δ*(a)} p·μ``.  Consistency requires
``q·ν₀ ≥ p·μ₀`` for every direction; each family below is also sufficient
within its structural class.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import lp
from .consistency import action_support
from .errors import DominatedActionError, InputError, StructureError
from .model import (
    DecisionProblem,
    Distribution,
    _dominated,
    _diff_vectors,
    classify,
    require_domain,
)
from .rational import NEG_INF, normalize_direction, to_fraction

CHARACTERIZATION = "Characterization"
NECESSARY_ONLY = "NecessaryOnly"

UP, DOWN, BOTH, NEITHER = "Up", "Down", "Both", "Neither"

_ZERO = Fraction(0)


@dataclass(frozen=True)
class TestFunction:
    """One inequality ``q·ν₀ ≥ p·μ₀``; heights may be ``NEG_INF``."""

    __test__ = False

    p: tuple[Fraction, ...]
    q: tuple
    tag: str

    def slack(self, prior: Distribution, marginal: Distribution) -> Fraction | float:
        lhs = _ZERO
        for a in marginal.support():
            h = self.q[a]
            if h == NEG_INF:
                return NEG_INF
            lhs += marginal.weights[a] * h
        return lhs - sum((p * m for p, m in zip(self.p, prior.weights)), _ZERO)


@dataclass(frozen=True)
class Violation:
    function: TestFunction
    slack: Fraction | float


@dataclass(frozen=True)
class TestVerdict:
    """Verdict of a test-function family."""

    __test__ = False

    consistent: bool
    violated: tuple[Violation, ...]
    exactness: str
    family: str
    dominated: tuple[str, ...] = ()


def _dominated_support(problem: DecisionProblem, marginal: Distribution) -> tuple[str, ...]:
    return tuple(problem.actions[a] for a in marginal.support() if _dominated(problem, a))


def _heights(problem: DecisionProblem, p: Sequence[Fraction]) -> tuple:
    pt = tuple(p)
    return tuple(action_support(problem, a, pt) for a in range(problem.n_actions))


def _evaluate(functions, prior, marginal, exactness, family) -> TestVerdict:
    violated = []
    for f in functions:
        s = f.slack(prior, marginal)
        if s < 0:
            violated.append(Violation(f, s))
    return TestVerdict(not violated, tuple(violated), exactness, family)


def _check_inputs(problem, prior, marginal):
    require_domain(prior, problem.states, "prior")
    require_domain(marginal, problem.actions, "marginal")


# ------------------------------------------------------------ small state spaces


def simplex_directions(problem: DecisionProblem, marginal: Distribution) -> list[tuple[tuple[Fraction, ...], str]]:
    """The directions ``−e_ω`` and ``u(a″) − u(a′)`` for ``a′ ∈ A₊``, deduplicated."""
    n = problem.n_states
    out, seen = [], set()

    def add(p, tag):
        key = normalize_direction(p)
        if key not in seen:
            seen.add(key)
            out.append((tuple(p), tag))

    for i, s in enumerate(problem.states):
        add(tuple(Fraction(-1 if k == i else 0) for k in range(n)), f"BM {s}")
    u = problem.utility
    for a1 in marginal.support():
        for a2 in range(problem.n_actions):
            if a2 != a1:
                add(
                    tuple(x - y for x, y in zip(u[a2], u[a1])),
                    f"PM ({problem.actions[a1]},{problem.actions[a2]})",
                )
    return out


def testfns_simplex(problem: DecisionProblem, marginal: Distribution) -> list[TestFunction]:
    """Belief- and payoff-martingale test functions with exact LP heights."""
    require_domain(marginal, problem.actions, "marginal")
    dom = _dominated_support(problem, marginal)
    if dom:
        raise DominatedActionError(dom[0])
    return [TestFunction(p, _heights(problem, p), tag) for p, tag in simplex_directions(problem, marginal)]


def check_small_states(problem: DecisionProblem, prior: Distribution, marginal: Distribution) -> TestVerdict:
    """Evaluate every belief/payoff-martingale test.

    Exact for at most three states; only necessary beyond that.
    """
    _check_inputs(problem, prior, marginal)
    exactness = CHARACTERIZATION if problem.n_states <= 3 else NECESSARY_ONLY
    dom = _dominated_support(problem, marginal)
    if dom:
        return TestVerdict(False, (), exactness, "small-states", dom)
    return _evaluate(testfns_simplex(problem, marginal), prior, marginal, exactness, "small-states")


def check_binary_states(problem: DecisionProblem, prior: Distribution, marginal: Distribution) -> TestVerdict:
    """Two states: ``μ₀(ω₂)`` must lie in the ``ν₀``-average of the per-action intervals."""
    _check_inputs(problem, prior, marginal)
    if problem.n_states != 2:
        raise StructureError("binary-state test needs exactly two states")
    dom = _dominated_support(problem, marginal)
    if dom:
        return TestVerdict(False, (), CHARACTERIZATION, "binary-states", dom)
    fns = []
    for i, s in enumerate(problem.states):
        p = tuple(Fraction(-1 if k == i else 0) for k in range(2))
        fns.append(TestFunction(p, _heights(problem, p), f"BM {s}"))
    return _evaluate(fns, prior, marginal, CHARACTERIZATION, "binary-states")


def binary_state_interval(problem: DecisionProblem, marginal: Distribution) -> tuple[Fraction, Fraction]:
    """The interval of consistent ``μ₀(ω₂)`` for a two-state problem."""
    if problem.n_states != 2:
        raise StructureError("binary-state interval needs exactly two states")
    dom = _dominated_support(problem, marginal)
    if dom:
        raise DominatedActionError(dom[0])
    lo = hi = _ZERO
    for a in marginal.support():
        w = marginal.weights[a]
        hi += w * action_support(problem, a, (_ZERO, Fraction(1)))
        lo -= w * action_support(problem, a, (_ZERO, Fraction(-1)))
    return lo, hi


# ------------------------------------------------------------ affine utility differences


def _aud(problem: DecisionProblem):
    cert = classify(problem).aud
    if cert is None:
        raise StructureError("problem does not have affine utility differences")
    return cert


def testfns_aud(problem: DecisionProblem) -> list[TestFunction]:
    """The ``2|Ω|`` functions ``min{±d, ±d(ω★)}`` with closed-form heights."""
    cert = _aud(problem)
    d, gamma, kappa = cert.d, cert.gamma, cert.kappa
    J = problem.n_actions
    thresholds = [-k / g for k, g in zip(kappa, gamma)]
    out, seen = [], set()

    def add(f):
        key = (f.p, f.q)
        if key not in seen:
            seen.add(key)
            out.append(f)

    for i in cert.order:
        ds = d[i]
        p = tuple(min(x, ds) for x in d)
        q = tuple(min(ds, thresholds[j]) if j < J - 1 else ds for j in range(J))
        add(TestFunction(p, q, f"AUD-up {problem.states[i]}"))
    for i in cert.order:
        ds = d[i]
        p = tuple(min(-x, -ds) for x in d)
        q = tuple(min(-ds, -thresholds[j - 1]) if j > 0 else -ds for j in range(J))
        add(TestFunction(p, q, f"AUD-down {problem.states[i]}"))
    return out


def check_aud(problem: DecisionProblem, prior: Distribution, marginal: Distribution) -> TestVerdict:
    """Consistency under affine utility differences."""
    _check_inputs(problem, prior, marginal)
    fns = testfns_aud(problem)
    dom = _dominated_support(problem, marginal)
    if dom:
        return TestVerdict(False, (), CHARACTERIZATION, "aud", dom)
    return _evaluate(fns, prior, marginal, CHARACTERIZATION, "aud")


def check_binary_action(problem: DecisionProblem, prior: Distribution, marginal: Distribution) -> TestVerdict:
    """Consistency for two actions via the affine-difference family it always admits."""
    if problem.n_actions != 2:
        raise StructureError("binary-action check needs exactly two actions")
    v = check_aud(problem, prior, marginal)
    return TestVerdict(v.consistent, v.violated, v.exactness, "binary-action", v.dominated)


def bounds_binary_action(problem: DecisionProblem, prior: Distribution) -> tuple[Fraction, Fraction]:
    """Closed-form bounds on ``ν₀(a₂)`` for a two-action problem.

    Uses ``d = u(a₂) − u(a₁)`` with states ordered by ``d``.  When ``d`` has
    no positive (negative) entry the lower (upper) bound is 0 (1), the value
    the threshold construction reduces to when the corresponding constraint
    set is empty.
    """
    if problem.n_actions != 2:
        raise StructureError("binary-action bounds need exactly two actions")
    require_domain(prior, problem.states, "prior")
    u = problem.utility
    n = problem.n_states
    d = [u[1][i] - u[0][i] for i in range(n)]
    order = sorted(range(n), key=lambda i: (d[i], i))
    ds = [d[i] for i in order]
    m = [prior.weights[i] for i in order]

    if any(x > 0 for x in ds):
        star = n - 1
        run = _ZERO
        for k in range(n):
            run += m[k] * ds[k]
            if ds[k] > 0 and run > 0:
                star = k
                break
        mass = sum((m[k] * (1 - ds[k] / ds[star]) for k in range(star + 1)), _ZERO)
        lb = max(_ZERO, 1 - mass)
    else:
        lb = _ZERO

    if any(x < 0 for x in ds):
        star = 0
        run = _ZERO
        for k in range(n - 1, -1, -1):
            run += m[k] * ds[k]
            if ds[k] < 0 and run < 0:
                star = k
                break
        mass = sum((m[k] * (1 - ds[k] / ds[star]) for k in range(star, n)), _ZERO)
        ub = min(Fraction(1), mass)
    else:
        ub = Fraction(1)
    return lb, ub


# ------------------------------------------------------------ two-step differences


def _two_step(problem: DecisionProblem):
    cert = classify(problem).two_step
    if cert is None:
        raise StructureError("problem does not have two-step utility differences")
    return cert


def testfns_two_step(problem: DecisionProblem) -> list[TestFunction]:
    """The directions ``±d(a_{j+1}, a_j)`` with closed-form heights.

    Heights at the end of the action ladder (``q↑`` for the last action,
    ``q↓`` for the first), where the closed form's index runs out of range,
    are exact LP maxima.
    """
    cert = _two_step(problem)
    lo, hi, ist = cert.d_low, cert.d_high, cert.i_star
    J = problem.n_actions
    diffs = _diff_vectors(problem)
    ups, downs = [], []
    for j, D in enumerate(diffs):
        span = hi[j] - lo[j]
        q_up = []
        for k in range(J):
            if k < J - 1:
                ind = 1 if ist[k] <= ist[j] else 0
                q_up.append(hi[j] - span / (hi[k] - lo[k]) * hi[k] * ind)
            else:
                q_up.append(action_support(problem, k, D))
        q_down = []
        neg = tuple(-x for x in D)
        for k in range(J):
            if k > 0:
                ind = 1 if ist[k - 1] >= ist[j] else 0
                q_down.append(-lo[j] + span / (hi[k - 1] - lo[k - 1]) * lo[k - 1] * ind)
            else:
                q_down.append(action_support(problem, k, neg))
        ups.append(TestFunction(D, tuple(q_up), f"TwoStep-up {j + 1}"))
        downs.append(TestFunction(neg, tuple(q_down), f"TwoStep-down {j + 1}"))
    return ups + downs


def check_two_step(problem: DecisionProblem, prior: Distribution, marginal: Distribution) -> TestVerdict:
    """Consistency under two-step utility differences."""
    _check_inputs(problem, prior, marginal)
    fns = testfns_two_step(problem)
    dom = _dominated_support(problem, marginal)
    if dom:
        return TestVerdict(False, (), CHARACTERIZATION, "two-step", dom)
    return _evaluate(fns, prior, marginal, CHARACTERIZATION, "two-step")


# ------------------------------------------------------------ monotone concave


def _envelope_feasible(p, terms, assignment) -> bool:
    """LP: ``p ≤ q_j + λ_j t_j`` everywhere, with equality at ``assignment``.

    ``terms[j]`` is ``None`` (constant piece) or a vector ``t_j``.  Variables
    are ``q⁺, q⁻`` (split free) and ``λ ≥ 0`` for the non-constant pieces.
    """
    J = len(terms)
    lam_idx, k = {}, 2 * J
    for j, t in enumerate(terms):
        if t is not None:
            lam_idx[j] = k
            k += 1
    nv = k

    def row_for(j, i):
        row = [0] * nv
        row[j] = 1
        row[J + j] = -1
        if j in lam_idx:
            row[lam_idx[j]] = terms[j][i]
        return row

    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i, pi in enumerate(p):
        for j in range(J):
            A_ub.append([-v for v in row_for(j, i)])
            b_ub.append(-pi)
    for i, j in enumerate(assignment):
        A_eq.append(row_for(j, i))
        b_eq.append(p[i])
    return lp.solve(None, A_ub, b_ub, A_eq, b_eq, n=nv).feasible


def _in_envelope(p, terms) -> bool:
    n, J = len(p), len(terms)

    def search(prefix):
        if prefix and not _envelope_feasible(p[: len(prefix)], terms_prefix(len(prefix)), prefix):
            return False
        if len(prefix) == n:
            return True
        return any(search(prefix + [j]) for j in range(J))

    def terms_prefix(m):
        return [None if t is None else t[:m] for t in terms]

    return search([])


def mcv_membership(problem: DecisionProblem, p: Sequence) -> str:
    """Classify ``p`` as a member of ``P↑``, ``P↓``, both, or neither.

    ``P↑`` holds lower envelopes ``min_j [q_j + λ↑_j d(a_{j+1}, a_j)]`` and
    ``P↓`` holds ``min_j [q_j − λ↓_j d(a_j, a_{j−1})]`` with ``λ ≥ 0``.
    Membership is decided exactly by searching over which piece attains the
    minimum at each state, one LP per partial assignment.
    """
    if len(p) != problem.n_states:
        raise InputError("direction has the wrong length")
    cls = classify(problem)
    if not cls.monotone_concave:
        raise StructureError("problem is not monotone and concave")
    pv = [to_fraction(x) for x in p]
    diffs = _diff_vectors(problem)
    J = problem.n_actions
    up_terms = [diffs[j] if j < J - 1 else None for j in range(J)]
    down_terms = [None] + [tuple(-x for x in diffs[j - 1]) for j in range(1, J)]
    up = _in_envelope(pv, up_terms)
    down = _in_envelope(pv, down_terms)
    if up and down:
        return BOTH
    if up:
        return UP
    if down:
        return DOWN
    return NEITHER


def all_test_functions(problem: DecisionProblem, marginal: Distribution) -> list[TestFunction]:
    """Every family that applies to the problem, for diagnostics."""
    out = list(testfns_simplex(problem, marginal))
    cls = classify(problem)
    if cls.aud is not None:
        out += testfns_aud(problem)
    if cls.two_step is not None:
        out += testfns_two_step(problem)
    return out

