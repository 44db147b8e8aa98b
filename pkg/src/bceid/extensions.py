"""Comparative statics, consistency across problems, and two game reductions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence

from . import lp
from .consistency import Verdict, check_bce
from .errors import InputError, StructureError
from .model import DecisionProblem, Distribution, classify, require_domain
from .rational import parse_rational
from .support_tests import bounds_binary_action

_ZERO = Fraction(0)
SHIFT, RATIO, TABLE = "shift", "ratio", "table"
SEP = "|"


# ------------------------------------------------------------ families


@dataclass(frozen=True)
class ProblemFamily:
    """Utilities indexed by a rational parameter ``θ``.

    Modes:
      * ``shift``: ``u_θ(a_j) = u(a_j) + (j−1)θ``, so every adjacent
        difference moves up by ``θ``.
      * ``ratio``: every adjacent difference ``D`` becomes ``θ·D⁺ − D⁻``
        (``θ > 0``), so the positive part is rescaled.
      * ``table``: ``tables[k]`` is the full utility matrix at ``theta[k]``.
    """

    base: DecisionProblem
    theta: tuple[Fraction, ...]
    mode: str = SHIFT
    tables: tuple = ()

    def __post_init__(self):
        th = tuple(parse_rational(t) for t in self.theta)
        if not th:
            raise InputError("parameter grid is empty")
        if self.mode not in (SHIFT, RATIO, TABLE):
            raise InputError(f"unknown family mode {self.mode!r}")
        if self.mode == RATIO and any(t <= 0 for t in th):
            raise InputError("ratio families need positive parameters")
        if self.mode == TABLE and len(self.tables) != len(th):
            raise InputError("table families need one utility table per parameter value")
        object.__setattr__(self, "theta", th)

    def at(self, k: int) -> DecisionProblem:
        b, t = self.base, self.theta[k]
        if self.mode == TABLE:
            return DecisionProblem(b.states, b.actions, self.tables[k])
        rows = [list(b.utility[0])]
        for j in range(1, b.n_actions):
            D = [h - l for h, l in zip(b.utility[j], b.utility[j - 1])]
            if self.mode == SHIFT:
                D = [x + t for x in D]
            else:
                D = [t * x if x > 0 else x for x in D]
            rows.append([p + x for p, x in zip(rows[-1], D)])
        return DecisionProblem(b.states, b.actions, tuple(tuple(r) for r in rows))

    def problems(self) -> list[tuple[Fraction, DecisionProblem]]:
        return [(t, self.at(k)) for k, t in enumerate(self.theta)]


@dataclass(frozen=True)
class BoundsTable:
    rows: tuple[tuple[Fraction, Fraction, Fraction], ...]

    @property
    def monotone(self) -> bool:
        """Both bound columns nondecreasing in ``θ``."""
        return all(a[1] <= b[1] and a[2] <= b[2] for a, b in zip(self.rows, self.rows[1:]))


def _binary_d(problem: DecisionProblem) -> list[Fraction]:
    u = problem.utility
    return [h - l for h, l in zip(u[1], u[0])]


def _shift_ordered(d0, d1) -> bool:
    return all(x <= y for x, y in zip(d0, d1))


def _ratio_ordered(d0, d1) -> bool:
    # states must keep their d-order for the ratio comparison to make sense
    order = sorted(range(len(d0)), key=lambda i: (d0[i], i))
    if any(d1[i] > d1[k] for i, k in zip(order, order[1:])):
        return False
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            i, k = order[a], order[b]
            if d0[k] != 0 and d1[k] != 0 and d0[i] / d0[k] > d1[i] / d1[k]:
                return False
    return True


def shift_bounds_table(family: ProblemFamily, prior: Distribution) -> BoundsTable:
    """Bounds on ``ν₀(a₂)`` along the grid, sorted by ``θ``.

    Raises:
        InputError: the family is neither shift ordered nor ratio ordered
            between consecutive grid points.
    """
    items = sorted(family.problems(), key=lambda tp: tp[0])
    if any(p.n_actions != 2 for _, p in items):
        raise StructureError("bounds tables need binary-action problems")
    ds = [_binary_d(p) for _, p in items]
    for d0, d1 in zip(ds, ds[1:]):
        if not (_shift_ordered(d0, d1) or _ratio_ordered(d0, d1)):
            raise InputError("utility differences are neither shift nor ratio ordered in θ")
    rows = []
    for t, p in items:
        lb, ub = bounds_binary_action(p, prior)
        rows.append((t, lb, ub))
    return BoundsTable(tuple(rows))


# ------------------------------------------------------------ d-spreads


def _aud_d(problem: DecisionProblem) -> tuple[Fraction, ...]:
    cert = classify(problem).aud
    if cert is None:
        raise StructureError("problem does not have affine utility differences")
    return cert.d


def d_mps_check(problem: DecisionProblem, prior_base: Distribution, prior_spread: Distribution) -> bool:
    """Whether ``prior_spread ∘ d⁻¹`` is a mean-preserving spread of ``prior_base ∘ d⁻¹``.

    Checks equal ``d``-means and, at every threshold ``d(ω★)``, the
    inequalities for ``min{d, d(ω★)}`` and ``min{−d, −d(ω★)}``.  The
    thresholds cover every kink, so the test is exact.
    """
    d = _aud_d(problem)
    require_domain(prior_base, problem.states, "prior")
    require_domain(prior_spread, problem.states, "spread prior")
    m0, m1 = prior_base.weights, prior_spread.weights

    def E(m, f):
        return sum((w * f(x) for w, x in zip(m, d)), _ZERO)

    if E(m0, lambda x: x) != E(m1, lambda x: x):
        return False
    for s in set(d):
        if E(m1, lambda x: min(x, s)) > E(m0, lambda x: min(x, s)):
            return False
        if E(m1, lambda x: min(-x, -s)) > E(m0, lambda x: min(-x, -s)):
            return False
    return True


@dataclass(frozen=True)
class PreservationResult:
    base: Verdict
    spread: Verdict

    @property
    def holds(self) -> bool:
        """Consistency of the base pair carries over to the spread pair."""
        return self.spread.consistent or not self.base.consistent


def preservation_check(
    problem: DecisionProblem, prior: Distribution, spread_prior: Distribution, marginal: Distribution
) -> PreservationResult:
    if not d_mps_check(problem, prior, spread_prior):
        raise InputError("spread prior is not a d-mean-preserving spread of the prior")
    return PreservationResult(check_bce(problem, prior, marginal), check_bce(problem, spread_prior, marginal))


# ------------------------------------------------------------ products


def _profiles(action_sets: Sequence[Sequence[str]]) -> list[tuple[int, ...]]:
    return list(product(*[range(len(a)) for a in action_sets]))


def profile_label(labels: Sequence[str]) -> str:
    return SEP.join(labels)


def product_problem(problems: Sequence[DecisionProblem]) -> DecisionProblem:
    """Profiles of actions with summed payoffs, labeled ``"a|b|…"``."""
    if not problems:
        raise InputError("at least one decision problem is required")
    states = problems[0].states
    if any(p.states != states for p in problems):
        raise InputError("decision problems do not share a state space")
    if any(SEP in a for p in problems for a in p.actions):
        raise InputError(f"action labels may not contain {SEP!r} in a product construction")
    labels, rows = [], []
    for prof in _profiles([p.actions for p in problems]):
        labels.append(profile_label([p.actions[j] for p, j in zip(problems, prof)]))
        rows.append(tuple(
            sum((p.utility[j][i] for p, j in zip(problems, prof)), _ZERO) for i in range(len(states))
        ))
    if len(set(labels)) != len(labels):
        raise InputError("product action labels clash")
    return DecisionProblem(states, tuple(labels), tuple(rows))


def across_problems(problems: Sequence[DecisionProblem], joint_marginal: Distribution, prior: Distribution) -> Verdict:
    """Consistency of a joint action distribution across several problems."""
    return check_bce(product_problem(problems), prior, joint_marginal)


def project_marginal(joint_marginal: Distribution, action_sets: Sequence[Sequence[str]], n: int) -> Distribution:
    """Marginal over the ``n``-th coordinate of a distribution over profiles."""
    w = [_ZERO] * len(action_sets[n])
    for lab, p in zip(joint_marginal.domain, joint_marginal.weights):
        parts = lab.split(SEP)
        w[list(action_sets[n]).index(parts[n])] += p
    return Distribution(tuple(action_sets[n]), tuple(w))


@dataclass(frozen=True)
class PrivateGame:
    """Players whose payoffs depend only on their own action and the state."""

    players: tuple[DecisionProblem, ...]

    def __post_init__(self):
        ps = tuple(self.players)
        if not ps:
            raise InputError("a game needs at least one player")
        if any(p.states != ps[0].states for p in ps):
            raise InputError("players do not share a state space")
        object.__setattr__(self, "players", ps)

    @classmethod
    def from_payoffs(
        cls,
        states: Sequence[str],
        action_sets: Sequence[Sequence[str]],
        payoff: Callable[[int, tuple[int, ...], int], object],
    ) -> "PrivateGame":
        """Build from a full payoff function ``payoff(n, profile, ω)``.

        Raises:
            StructureError: some payoff depends on other players' actions.
        """
        profiles = _profiles(action_sets)
        players = []
        for n, acts in enumerate(action_sets):
            table: dict[int, list[Fraction]] = {}
            for prof in profiles:
                row = [parse_rational(payoff(n, prof, i)) for i in range(len(states))]
                seen = table.setdefault(prof[n], row)
                if seen != row:
                    raise StructureError(f"player {n + 1}'s payoff depends on other players' actions")
            players.append(DecisionProblem(tuple(states), tuple(acts), tuple(tuple(table[j]) for j in range(len(acts)))))
        return cls(tuple(players))


def public_bce_check(game: PrivateGame, prior: Distribution, joint_marginal: Distribution) -> Verdict:
    """Public-signal consistency via the summed-payoff auxiliary problem."""
    return across_problems(game.players, joint_marginal, prior)


# ------------------------------------------------------------ ring networks


@dataclass(frozen=True)
class RingGame:
    """Player 1 cares about ``(a₁, ω)``; player ``n ≥ 2`` about ``(a_{n−1}, a_n)``.

    ``v1[j][i]`` is player 1's payoff from action ``j`` in state ``i``;
    ``links[n−2][k][j]`` is player ``n``'s payoff from own action ``k``
    when player ``n−1`` plays ``j``.
    """

    states: tuple[str, ...]
    action_sets: tuple[tuple[str, ...], ...]
    v1: tuple[tuple[Fraction, ...], ...]
    links: tuple[tuple[tuple[Fraction, ...], ...], ...] = ()
    _problems: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        sets = tuple(tuple(a) for a in self.action_sets)
        if len(self.links) != len(sets) - 1:
            raise InputError("a ring game needs one link table per player after the first")
        object.__setattr__(self, "action_sets", sets)
        probs = [DecisionProblem(tuple(self.states), sets[0], self.v1)]
        for n, tab in enumerate(self.links, start=1):
            probs.append(DecisionProblem(sets[n - 1], sets[n], tab))
        object.__setattr__(self, "states", probs[0].states)
        object.__setattr__(self, "_problems", tuple(probs))

    @property
    def n_players(self) -> int:
        return len(self.action_sets)

    def link_problem(self, n: int) -> DecisionProblem:
        """Single-agent problem of player ``n`` (0-based)."""
        return self._problems[n]

    def payoff(self, n: int, profile: Sequence[int], state: int) -> Fraction:
        prob = self._problems[n]
        return prob.utility[profile[n]][state if n == 0 else profile[n - 1]]


@dataclass(frozen=True)
class RingVerdict:
    consistent: bool
    links: tuple[Verdict, ...]
    failing_link: int | None
    witness: dict | None = None


def chain_witness(game: RingGame, verdicts: Sequence[Verdict]) -> dict[tuple[tuple[int, ...], int], Fraction]:
    """``π̂(a, ω) = π₁(a₁, ω) Π_n π_n(a_n | a_{n−1})`` from per-link witnesses."""
    pis = [v.joint.pi for v in verdicts]
    out: dict[tuple[tuple[int, ...], int], Fraction] = {}
    for prof in _profiles(game.action_sets):
        for i in range(len(game.states)):
            w = pis[0][prof[0]][i]
            for n in range(1, game.n_players):
                if w == 0:
                    break
                prev = prof[n - 1]
                col = sum((row[prev] for row in pis[n]), _ZERO)
                w *= pis[n][prof[n]][prev] / col
            if w:
                out[(prof, i)] = w
    return out


def game_obedient(
    states: Sequence[str],
    action_sets: Sequence[Sequence[str]],
    payoff: Callable[[int, Sequence[int], int], Fraction],
    pi: dict[tuple[tuple[int, ...], int], Fraction],
) -> bool:
    """Every player's obedience constraint holds exactly for ``pi``."""
    for n, acts in enumerate(action_sets):
        for a in range(len(acts)):
            for b in range(len(acts)):
                if a == b:
                    continue
                tot = _ZERO
                for (prof, i), w in pi.items():
                    if prof[n] != a:
                        continue
                    dev = prof[:n] + (b,) + prof[n + 1 :]
                    tot += w * (payoff(n, prof, i) - payoff(n, dev, i))
                if tot < 0:
                    return False
    return True


def game_marginals_match(
    game: RingGame, pi: dict, prior: Distribution, marginals: Sequence[Distribution]
) -> bool:
    I = len(game.states)
    st = [_ZERO] * I
    acts = [[_ZERO] * len(a) for a in game.action_sets]
    for (prof, i), w in pi.items():
        st[i] += w
        for n, j in enumerate(prof):
            acts[n][j] += w
    return tuple(st) == prior.weights and all(tuple(a) == m.weights for a, m in zip(acts, marginals))


def ring_check(game: RingGame, prior: Distribution, marginals: Sequence[Distribution]) -> RingVerdict:
    """Link-by-link consistency of a ring game, with a chained joint witness.

    Link 1 checks ``(μ₀, ν₀,₁)`` against ``v₁``; link ``n`` checks
    ``(ν₀,ₙ₋₁, ν₀,ₙ)`` with the predecessor's actions as states.
    ``failing_link`` is 1-based.
    """
    if len(marginals) != game.n_players:
        raise InputError("one action marginal per player is required")
    verdicts = []
    priors = [prior] + list(marginals[:-1])
    for n in range(game.n_players):
        v = check_bce(game.link_problem(n), priors[n], marginals[n])
        verdicts.append(v)
        if not v.consistent:
            return RingVerdict(False, tuple(verdicts), n + 1)
    wit = chain_witness(game, verdicts)
    if not (game_obedient(game.states, game.action_sets, game.payoff, wit)
            and game_marginals_match(game, wit, prior, marginals)):
        raise AssertionError("chained witness failed validation")
    return RingVerdict(True, tuple(verdicts), None, wit)


def flattened_bce_check(
    states: Sequence[str],
    action_sets: Sequence[Sequence[str]],
    payoff: Callable[[int, Sequence[int], int], Fraction],
    prior: Distribution,
    marginals: Sequence[Distribution],
) -> bool:
    """Direct multi-player LP: a BCE with state marginal ``prior`` and given per-player marginals."""
    profiles = _profiles(action_sets)
    I = len(states)
    idx = {(prof, i): k for k, (prof, i) in enumerate((p, i) for p in profiles for i in range(I))}
    nv = len(idx)
    A_ub = []
    for n, acts in enumerate(action_sets):
        for a in range(len(acts)):
            for b in range(len(acts)):
                if a == b:
                    continue
                row = [0] * nv
                for prof in profiles:
                    if prof[n] != a:
                        continue
                    dev = prof[:n] + (b,) + prof[n + 1 :]
                    for i in range(I):
                        row[idx[(prof, i)]] = payoff(n, dev, i) - payoff(n, prof, i)
                if any(row):
                    A_ub.append(row)
    A_eq, b_eq = [], []
    for i in range(I):
        row = [0] * nv
        for prof in profiles:
            row[idx[(prof, i)]] = 1
        A_eq.append(row)
        b_eq.append(prior.weights[i])
    for n, acts in enumerate(action_sets):
        for a in range(len(acts)):
            row = [0] * nv
            for prof in profiles:
                if prof[n] == a:
                    for i in range(I):
                        row[idx[(prof, i)]] = 1
            A_eq.append(row)
            b_eq.append(marginals[n].weights[a])
    return lp.solve(None, A_ub, [0] * len(A_ub), A_eq, b_eq, n=nv).feasible
