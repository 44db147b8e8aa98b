"""Decision problems, distributions, optimal-belief polytopes and structure detection."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Iterable, Mapping, Sequence

from . import lp
from .errors import InputError
from .polytope import Halfspace, HPolytope
from .rational import RationalParseError, parse_rational, to_fraction

BINARY_STATE = "BinaryState"
BINARY_ACTION = "BinaryAction"
AUD = "AUD"
TWO_STEP = "TwoStep"
SMALL_STATE = "SmallState"
MONOTONE_CONCAVE = "MonotoneConcave"
GENERAL = "General"


def _labels(xs: Iterable[Any], what: str) -> tuple[str, ...]:
    out = tuple(str(x) for x in xs)
    if not out:
        raise InputError(f"at least one {what} is required")
    if len(set(out)) != len(out):
        raise InputError(f"duplicate {what} labels")
    return out


def _rational(x: Any) -> Fraction:
    try:
        return parse_rational(x)
    except (RationalParseError, ZeroDivisionError) as exc:
        raise InputError(str(exc)) from None


@dataclass(frozen=True)
class DecisionProblem:
    """A finite decision problem ``⟨Ω, A, u⟩``.

    ``utility[j][i]`` is the payoff of action ``j`` in state ``i``.
    """

    states: tuple[str, ...]
    actions: tuple[str, ...]
    utility: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "states", _labels(self.states, "state"))
        object.__setattr__(self, "actions", _labels(self.actions, "action"))
        rows = tuple(tuple(_rational(v) for v in row) for row in self.utility)
        if len(rows) != len(self.actions):
            raise InputError(
                f"dimension mismatch: {len(rows)} utility rows for {len(self.actions)} actions"
            )
        for row in rows:
            if len(row) != len(self.states):
                raise InputError(
                    f"dimension mismatch: utility row of length {len(row)} for {len(self.states)} states"
                )
        object.__setattr__(self, "utility", rows)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    def state_index(self, label: str) -> int:
        try:
            return self.states.index(str(label))
        except ValueError:
            raise InputError(f"unknown state label {label!r}") from None

    def action_index(self, label: str) -> int:
        try:
            return self.actions.index(str(label))
        except ValueError:
            raise InputError(f"unknown action label {label!r}") from None

    def expected_utility(self, action: int, belief: Sequence[Fraction]) -> Fraction:
        return sum((u * m for u, m in zip(self.utility[action], belief)), Fraction(0))

    def permute_states(self, order: Sequence[int]) -> "DecisionProblem":
        """Problem whose k-th state is the ``order[k]``-th state of this one."""
        return DecisionProblem(
            tuple(self.states[i] for i in order),
            self.actions,
            tuple(tuple(row[i] for i in order) for row in self.utility),
        )


@dataclass(frozen=True)
class Distribution:
    """An exact probability vector over labeled outcomes."""

    domain: tuple[str, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "domain", _labels(self.domain, "outcome"))
        ws = tuple(_rational(w) for w in self.weights)
        if len(ws) != len(self.domain):
            raise InputError("distribution has a different number of weights and labels")
        if any(w < 0 for w in ws):
            raise InputError("negative probability")
        if sum(ws, Fraction(0)) != 1:
            raise InputError(f"probabilities sum to {sum(ws, Fraction(0))}, not 1")
        object.__setattr__(self, "weights", ws)

    @classmethod
    def uniform(cls, domain: Sequence[str]) -> "Distribution":
        return cls(tuple(domain), tuple(Fraction(1, len(domain)) for _ in domain))

    @classmethod
    def point(cls, domain: Sequence[str], label: str) -> "Distribution":
        return cls(tuple(domain), tuple(Fraction(int(d == label)) for d in domain))

    @classmethod
    def from_mapping(cls, domain: Sequence[str], mapping: Mapping[str, Any]) -> "Distribution":
        """Build from ``{label: weight}``; absent labels get weight zero."""
        dom = tuple(str(d) for d in domain)
        unknown = set(map(str, mapping)) - set(dom)
        if unknown:
            raise InputError(f"unknown labels in distribution: {sorted(unknown)}")
        m = {str(k): v for k, v in mapping.items()}
        return cls(dom, tuple(_rational(m.get(d, 0)) for d in dom))

    def __getitem__(self, label: str) -> Fraction:
        return self.weights[self.domain.index(label)]

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, w in enumerate(self.weights) if w > 0)

    def as_dict(self) -> dict[str, Fraction]:
        return dict(zip(self.domain, self.weights))


def require_domain(dist: Distribution, labels: Sequence[str], what: str) -> None:
    if tuple(dist.domain) != tuple(labels):
        raise InputError(f"{what} is over {list(dist.domain)}, expected {list(labels)}")


@dataclass(frozen=True)
class UtilityDifference:
    high_action: str
    low_action: str
    values: tuple[Fraction, ...]


@dataclass(frozen=True)
class AUDCertificate:
    """``u(a_{j+1}) − u(a_j) = γ_j d + κ_j`` with ``γ_j > 0``.

    ``d`` is indexed by the problem's states; ``order`` lists state indices
    by nondecreasing ``d`` with ties broken by index.
    """

    d: tuple[Fraction, ...]
    gamma: tuple[Fraction, ...]
    kappa: tuple[Fraction, ...]
    order: tuple[int, ...]


@dataclass(frozen=True)
class TwoStepCertificate:
    """Each adjacent difference takes two values ``d_low[j] < 0 < d_high[j]``.

    ``i_star[j]`` is the 1-based position, along ``order``, of the last state
    where difference ``j`` is low.
    """

    d_low: tuple[Fraction, ...]
    d_high: tuple[Fraction, ...]
    i_star: tuple[int, ...]
    order: tuple[int, ...]


@dataclass(frozen=True)
class StructureClass:
    """Most specific structural tag plus every certificate that was found."""

    tag: str
    tags: tuple[str, ...]
    order: tuple[int, ...]
    aud: AUDCertificate | None = None
    two_step: TwoStepCertificate | None = None
    increasing_differences: bool = False
    concave_part1: bool = False
    concave_part2: bool = False

    @property
    def monotone_concave(self) -> bool:
        return self.increasing_differences and self.concave_part1 and self.concave_part2


# ---------------------------------------------------------------- parsing


def _load(doc: Any) -> Any:
    if isinstance(doc, (bytes, bytearray)):
        doc = doc.decode()
    if isinstance(doc, str):
        try:
            return json.loads(doc, parse_float=str)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from None
    return doc


def parse_problem(doc: Any) -> DecisionProblem:
    """Parse a problem document ``{"states", "actions", "utility"}``.

    Accepts JSON text or an already decoded mapping.  JSON numbers with a
    fractional part are read from their decimal text, never via binary floats.
    """
    data = _load(doc)
    if not isinstance(data, Mapping):
        raise InputError("problem document must be a JSON object")
    missing = {"states", "actions", "utility"} - set(data)
    if missing:
        raise InputError(f"problem document lacks {sorted(missing)}")
    utility = data["utility"]
    if not isinstance(utility, list) or not all(isinstance(r, list) for r in utility):
        raise InputError("utility must be a list of rows")
    return DecisionProblem(tuple(data["states"]), tuple(data["actions"]), tuple(tuple(r) for r in utility))


def parse_distribution(doc: Any, domain: Sequence[str]) -> Distribution:
    """Parse ``{"label": "p/q", ...}`` into a distribution over ``domain``."""
    data = _load(doc)
    if not isinstance(data, Mapping):
        raise InputError("distribution document must be a JSON object")
    return Distribution.from_mapping(domain, data)


def problem_to_json(problem: DecisionProblem) -> dict:
    return {
        "states": list(problem.states),
        "actions": list(problem.actions),
        "utility": [[str(v) for v in row] for row in problem.utility],
    }


# ---------------------------------------------------------------- beliefs


def utility_differences(problem: DecisionProblem) -> list[UtilityDifference]:
    """Adjacent differences ``u(a_{j+1}, ·) − u(a_j, ·)`` in action order."""
    if problem.n_actions < 2:
        raise InputError("utility differences need at least two actions")
    u = problem.utility
    return [
        UtilityDifference(
            problem.actions[j + 1],
            problem.actions[j],
            tuple(h - l for h, l in zip(u[j + 1], u[j])),
        )
        for j in range(problem.n_actions - 1)
    ]


def _diff_vectors(problem: DecisionProblem) -> list[tuple[Fraction, ...]]:
    u = problem.utility
    return [tuple(h - l for h, l in zip(u[j + 1], u[j])) for j in range(problem.n_actions - 1)]


def optimal_belief_set(problem: DecisionProblem, action: str, drop: int = 0) -> HPolytope:
    """H-representation of the beliefs at which ``action`` is optimal.

    Rows are written in free coordinates: the belief vector with coordinate
    ``drop`` deleted.  One obedience row per competing action, then the
    simplex rows.  No feasibility check is done.
    """
    a = problem.action_index(action)
    n = problem.n_states
    if not 0 <= drop < n:
        raise InputError("dropped coordinate out of range")
    rows: list[Halfspace] = []
    infeasible = False
    for b in range(problem.n_actions):
        if b == a:
            continue
        diff = [ub - ua for ub, ua in zip(problem.utility[b], problem.utility[a])]
        base = diff[drop]
        normal = tuple(v - base for i, v in enumerate(diff) if i != drop)
        height = -base
        if not any(normal):
            if height < 0:
                infeasible = True
            continue
        rows.append(Halfspace(normal, height))
    k = n - 1
    for i in range(k):
        rows.append(Halfspace(tuple(Fraction(-1 if t == i else 0) for t in range(k)), Fraction(0)))
    if k:
        rows.append(Halfspace(tuple(Fraction(1) for _ in range(k)), Fraction(1)))
    return HPolytope(k, tuple(rows), (), infeasible, drop)


@lru_cache(maxsize=4096)
def _dominated(problem: DecisionProblem, a: int) -> bool:
    n = problem.n_states
    rows = [
        [ub - ua for ub, ua in zip(problem.utility[b], problem.utility[a])]
        for b in range(problem.n_actions)
        if b != a
    ]
    res = lp.solve(None, rows, [0] * len(rows), [[1] * n], [1], n=n)
    return not res.feasible


def is_dominated(problem: DecisionProblem, action: str) -> bool:
    """True iff no belief makes ``action`` optimal."""
    return _dominated(problem, problem.action_index(action))


def optimal_actions_at(problem: DecisionProblem, belief: Sequence[Fraction]) -> tuple[int, ...]:
    values = [problem.expected_utility(a, belief) for a in range(problem.n_actions)]
    best = max(values)
    return tuple(a for a, v in enumerate(values) if v == best)


# ---------------------------------------------------------------- structure


def _fit_aud(diffs: list[tuple[Fraction, ...]], n: int) -> tuple | None:
    """Common ``d`` with ``D_j = γ_j d + κ_j``, ``γ_j > 0``, or ``None``."""
    base = next((D for D in diffs if len(set(D)) > 1), None)
    if base is None:
        d = tuple(Fraction(0) for _ in range(n))
        return d, tuple(Fraction(1) for _ in diffs), tuple(D[0] if D else Fraction(0) for D in diffs)
    lo = min(range(n), key=lambda i: (base[i], i))
    hi = max(range(n), key=lambda i: (base[i], -i))
    gammas, kappas = [], []
    for D in diffs:
        gamma = (D[hi] - D[lo]) / (base[hi] - base[lo])
        if gamma <= 0:
            return None
        kappa = D[lo] - gamma * base[lo]
        if any(gamma * b + kappa != v for b, v in zip(base, D)):
            return None
        gammas.append(gamma)
        kappas.append(kappa)
    return base, tuple(gammas), tuple(kappas)


def _fit_two_step(diffs: list[tuple[Fraction, ...]], n: int) -> TwoStepCertificate | None:
    if not diffs:
        return None
    lows, highs, low_sets = [], [], []
    for D in diffs:
        vals = sorted(set(D))
        if len(vals) != 2 or not vals[0] < 0 < vals[1]:
            return None
        lows.append(vals[0])
        highs.append(vals[1])
        low_sets.append(frozenset(i for i in range(n) if D[i] == vals[0]))
    for a, b in zip(low_sets, low_sets[1:]):
        if not a <= b:
            return None
    rank = [next((j for j, s in enumerate(low_sets) if i in s), len(diffs)) for i in range(n)]
    order = tuple(sorted(range(n), key=lambda i: (rank[i], i)))
    return TwoStepCertificate(tuple(lows), tuple(highs), tuple(len(s) for s in low_sets), order)


def _id_order(diffs: list[tuple[Fraction, ...]], n: int) -> tuple[int, ...] | None:
    order = tuple(sorted(range(n), key=lambda i: (tuple(D[i] for D in diffs), i)))
    for D in diffs:
        if any(D[order[k]] > D[order[k + 1]] for k in range(n - 1)):
            return None
    return order


def _concave_part1(diffs: list[tuple[Fraction, ...]]) -> bool:
    return all(all(x >= y for x, y in zip(a, b)) for a, b in zip(diffs, diffs[1:]))


def _concave_part2(diffs: list[tuple[Fraction, ...]], n: int) -> bool:
    for a, b in zip(diffs, diffs[1:]):
        res = lp.solve(None, (), (), [list(a), list(b), [1] * n], [0, 0, 1], n=n)
        if res.feasible:
            return False
    return True


@lru_cache(maxsize=4096)
def classify(problem: DecisionProblem) -> StructureClass:
    """Detect the most specific structure the problem has.

    Order: BinaryState, BinaryAction, AUD, TwoStep, SmallState,
    MonotoneConcave, General.  AUD and TwoStep certificates also require the
    first part of concavity* (adjacent differences decreasing in the action
    index); the second part is reported in ``concave_part2``.
    """
    n, J = problem.n_states, problem.n_actions
    diffs = _diff_vectors(problem) if J >= 2 else []
    part1 = _concave_part1(diffs)
    part2 = _concave_part2(diffs, n)
    id_order = _id_order(diffs, n)

    aud = None
    fit = _fit_aud(diffs, n)
    if fit is not None and part1:
        d, gamma, kappa = fit
        order = tuple(sorted(range(n), key=lambda i: (d[i], i)))
        aud = AUDCertificate(d, gamma, kappa, order)
    two = _fit_two_step(diffs, n)
    if two is not None and not part1:
        two = None

    tags = []
    if n == 2:
        tags.append(BINARY_STATE)
    if J == 2:
        tags.append(BINARY_ACTION)
    if aud is not None:
        tags.append(AUD)
    if two is not None:
        tags.append(TWO_STEP)
    if n <= 3:
        tags.append(SMALL_STATE)
    if id_order is not None and part1 and part2:
        tags.append(MONOTONE_CONCAVE)
    tags.append(GENERAL)

    if aud is not None:
        order = aud.order
    elif two is not None:
        order = two.order
    elif id_order is not None:
        order = id_order
    else:
        order = tuple(range(n))
    return StructureClass(
        tag=tags[0],
        tags=tuple(tags),
        order=order,
        aud=aud,
        two_step=two,
        increasing_differences=id_order is not None,
        concave_part1=part1,
        concave_part2=part2,
    )


def to_fractions(xs: Iterable[Any]) -> tuple[Fraction, ...]:
    return tuple(to_fraction(x) for x in xs)
