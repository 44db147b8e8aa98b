"""Information structures that rationalize an observed action marginal.

Distributions over posteriors, their menu measures, the core condition and
exact supply/demand flows that turn a distribution over posteriors into a
decision rule.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .consistency import JointDistribution
from .errors import CapExceededError, InputError
from .model import DecisionProblem, Distribution, optimal_actions_at, require_domain

_ZERO = Fraction(0)
SUBSET_CAP = 20


@dataclass(frozen=True)
class PosteriorDistribution:
    """A finitely supported distribution ``τ`` over posteriors."""

    posteriors: tuple[Distribution, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        posts = tuple(self.posteriors)
        ws = tuple(Fraction(w) for w in self.weights)
        if not posts or len(posts) != len(ws):
            raise InputError("posterior distribution needs one weight per posterior")
        if any(w < 0 for w in ws) or sum(ws, _ZERO) != 1:
            raise InputError("posterior weights must be nonnegative and sum to 1")
        if any(mu.domain != posts[0].domain for mu in posts):
            raise InputError("posteriors live on different state spaces")
        object.__setattr__(self, "posteriors", posts)
        object.__setattr__(self, "weights", ws)

    @property
    def states(self) -> tuple[str, ...]:
        return self.posteriors[0].domain

    def mean(self) -> tuple[Fraction, ...]:
        n = len(self.states)
        return tuple(
            sum((w * mu.weights[i] for w, mu in zip(self.weights, self.posteriors)), _ZERO)
            for i in range(n)
        )

    def bayes_plausible(self, prior: Distribution) -> bool:
        return prior.domain == self.states and self.mean() == prior.weights


@dataclass(frozen=True)
class MenuMeasure:
    """Masses on optimal-action sets; keys are action-index tuples in action order."""

    actions: tuple[str, ...]
    masses: tuple[tuple[tuple[int, ...], Fraction], ...]

    def __post_init__(self):
        merged: dict[tuple[int, ...], Fraction] = {}
        for menu, m in self.masses:
            key = tuple(sorted(set(menu)))
            if not key or key[-1] >= len(self.actions) or key[0] < 0:
                raise InputError(f"menu {menu} is not a nonempty subset of the actions")
            merged[key] = merged.get(key, _ZERO) + Fraction(m)
        if any(m < 0 for m in merged.values()) or sum(merged.values(), _ZERO) != 1:
            raise InputError("menu masses must be nonnegative and sum to 1")
        items = tuple(sorted((k, v) for k, v in merged.items() if v > 0))
        object.__setattr__(self, "masses", items)

    def mass(self, labels: Sequence[str]) -> Fraction:
        key = tuple(sorted(self.actions.index(x) for x in labels))
        return dict(self.masses).get(key, _ZERO)

    def as_dict(self) -> dict[tuple[str, ...], Fraction]:
        return {tuple(self.actions[j] for j in k): v for k, v in self.masses}


@dataclass(frozen=True)
class DecisionRule:
    """``α(μ)(·)``: one action distribution per posterior of ``tau``."""

    posteriors: tuple[Distribution, ...]
    choices: tuple[Distribution, ...]

    def __post_init__(self):
        if len(self.posteriors) != len(self.choices):
            raise InputError("decision rule needs one choice distribution per posterior")


@dataclass(frozen=True)
class FlowNetwork:
    """Bipartite supply/demand network.

    ``supply[i]`` sits on supply node ``i``; ``demand[j]`` on demand node
    ``j``; an edge ``(i, j)`` means supply ``i`` may serve demand ``j``.
    """

    supply: tuple[Fraction, ...]
    demand: tuple[Fraction, ...]
    edges: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class CoreViolation:
    """A coalition ``B`` with ``Σ_{a∈B} ν₀(a) < Σ_{C⊆B} τ_A(C)``."""

    coalition: tuple[str, ...]
    demand: Fraction
    supply: Fraction


class CoreViolationError(InputError):
    def __init__(self, violation: CoreViolation):
        super().__init__(f"core condition fails for {list(violation.coalition)}")
        self.violation = violation


# ------------------------------------------------------------ menus


def optimal_actions(problem: DecisionProblem, belief: Distribution) -> frozenset[str]:
    require_domain(belief, problem.states, "belief")
    return frozenset(problem.actions[j] for j in optimal_actions_at(problem, belief.weights))


def _menus(problem: DecisionProblem, tau: PosteriorDistribution) -> list[tuple[int, ...]]:
    if tau.states != problem.states:
        raise InputError("posteriors are not over the problem's states")
    return [optimal_actions_at(problem, mu.weights) for mu in tau.posteriors]


def menu_measure(problem: DecisionProblem, tau: PosteriorDistribution) -> MenuMeasure:
    """Push ``τ`` forward under the optimal-action correspondence."""
    menus = _menus(problem, tau)
    return MenuMeasure(problem.actions, tuple(zip(menus, tau.weights)))


def _violation_amounts(menu: MenuMeasure, marginal: Distribution, B: Sequence[int]) -> tuple[Fraction, Fraction]:
    bs = set(B)
    demand = sum((marginal.weights[a] for a in bs), _ZERO)
    supply = sum((m for k, m in menu.masses if bs.issuperset(k)), _ZERO)
    return demand, supply


def core_check(marginal: Distribution, menu: MenuMeasure, cap: int = SUBSET_CAP) -> CoreViolation | None:
    """First coalition (by size, then lexicographic) violating the core condition, or ``None``."""
    require_domain(marginal, menu.actions, "marginal")
    J = len(menu.actions)
    if J > cap:
        raise CapExceededError(f"{J} actions exceed the subset-enumeration cap {cap}")
    for size in range(1, J + 1):
        for B in combinations(range(J), size):
            d, s = _violation_amounts(menu, marginal, B)
            if d < s:
                return CoreViolation(tuple(menu.actions[a] for a in B), d, s)
    return None


# ------------------------------------------------------------ flows


def max_flow(net: FlowNetwork) -> tuple[Fraction, dict[tuple[int, int], Fraction], set[int]]:
    """Exact shortest-augmenting-path max flow.

    Returns the flow value, the flow on each bipartite edge, and the set of
    demand nodes reachable from the source in the final residual graph.
    Edges between the two sides have capacity 1, which never binds because
    total supply is at most 1.
    """
    I, J = len(net.supply), len(net.demand)
    src, snk = I + J, I + J + 1
    N = I + J + 2
    cap: dict[tuple[int, int], Fraction] = {}
    adj: list[list[int]] = [[] for _ in range(N)]

    def add(u, v, c):
        if (u, v) not in cap:
            adj[u].append(v)
            adj[v].append(u)
            cap[(u, v)] = _ZERO
            cap.setdefault((v, u), _ZERO)
        cap[(u, v)] += c

    for i, s in enumerate(net.supply):
        add(src, i, Fraction(s))
    for i, j in net.edges:
        add(i, I + j, Fraction(1))
    for j, d in enumerate(net.demand):
        add(I + j, snk, Fraction(d))
    original = dict(cap)
    value = _ZERO
    while True:
        parent = {src: None}
        queue = deque([src])
        while queue and snk not in parent:
            u = queue.popleft()
            for v in adj[u]:
                if v not in parent and cap[(u, v)] > 0:
                    parent[v] = u
                    queue.append(v)
        if snk not in parent:
            break
        path, v = [], snk
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        push = min(cap[e] for e in path)
        for u, v in path:
            cap[(u, v)] -= push
            cap[(v, u)] += push
        value += push
    flow = {
        (i, j): original[(i, I + j)] - cap[(i, I + j)]
        for i, j in net.edges
    }
    reach = {j - I for j in parent if I <= j < I + J}
    return value, flow, reach


def _prune(menu: MenuMeasure, marginal: Distribution, B: list[int]) -> list[int]:
    changed = True
    while changed:
        changed = False
        for a in list(B):
            trial = [b for b in B if b != a]
            if trial:
                d, s = _violation_amounts(menu, marginal, trial)
                if d < s:
                    B = trial
                    changed = True
    return B


def _solve_flow(supply, menus, marginal: Distribution, menu: MenuMeasure):
    net = FlowNetwork(
        tuple(supply),
        marginal.weights,
        tuple((i, j) for i, m in enumerate(menus) for j in m),
    )
    value, flow, reach = max_flow(net)
    if value == 1:
        return flow, None
    B = _prune(menu, marginal, sorted(reach))
    d, s = _violation_amounts(menu, marginal, B)
    return None, CoreViolation(tuple(menu.actions[a] for a in B), d, s)


def build_network(problem: DecisionProblem, tau: PosteriorDistribution, marginal: Distribution) -> FlowNetwork:
    menus = _menus(problem, tau)
    return FlowNetwork(tau.weights, marginal.weights, tuple((i, j) for i, m in enumerate(menus) for j in m))


def implement_tau(problem: DecisionProblem, tau: PosteriorDistribution, marginal: Distribution) -> DecisionRule | CoreViolation:
    """Decision rule implementing ``marginal`` from ``tau``, or a violated coalition.

    Zero-weight posteriors get the uniform rule over their optimal actions.
    """
    require_domain(marginal, problem.actions, "marginal")
    menus = _menus(problem, tau)
    flow, bad = _solve_flow(tau.weights, menus, marginal, menu_measure(problem, tau))
    if bad is not None:
        return bad
    choices = []
    for i, (w, m) in enumerate(zip(tau.weights, menus)):
        if w == 0:
            row = [Fraction(int(j in m), len(m)) for j in range(problem.n_actions)]
        else:
            row = [flow.get((i, j), _ZERO) / w for j in range(problem.n_actions)]
        choices.append(Distribution(problem.actions, tuple(row)))
    return DecisionRule(tau.posteriors, tuple(choices))


def menu_choice(menu: MenuMeasure, marginal: Distribution) -> dict[tuple[str, ...], Distribution]:
    """Conditionals ``σ(·|B)`` supported in each menu that reproduce ``marginal``.

    Raises:
        CoreViolationError: the core condition fails.
    """
    require_domain(marginal, menu.actions, "marginal")
    keys = [k for k, _ in menu.masses]
    flow, bad = _solve_flow([m for _, m in menu.masses], keys, marginal, menu)
    if bad is not None:
        raise CoreViolationError(bad)
    out = {}
    for i, (k, m) in enumerate(menu.masses):
        row = tuple(flow.get((i, j), _ZERO) / m for j in range(len(menu.actions)))
        out[tuple(menu.actions[j] for j in k)] = Distribution(menu.actions, row)
    return out


def rule_is_valid(problem: DecisionProblem, tau: PosteriorDistribution, rule: DecisionRule, marginal: Distribution | None = None) -> bool:
    """``α(μ)`` supported on ``a*(μ)``; optionally reproduces ``marginal`` exactly."""
    if rule.posteriors != tau.posteriors:
        return False
    for mu, alpha in zip(tau.posteriors, rule.choices):
        opt = set(optimal_actions_at(problem, mu.weights))
        if any(w > 0 and j not in opt for j, w in enumerate(alpha.weights)):
            return False
    if marginal is None:
        return True
    induced = tuple(
        sum((t * alpha.weights[j] for t, alpha in zip(tau.weights, rule.choices)), _ZERO)
        for j in range(problem.n_actions)
    )
    return induced == marginal.weights


# ------------------------------------------------------------ kernels


def experiment_kernel(
    problem: DecisionProblem, prior: Distribution, tau: PosteriorDistribution, rule: DecisionRule
) -> tuple[tuple[Fraction, ...] | None, ...]:
    """State-dependent choice ``σ̃(a|ω)``; rows for zero-prior states are ``None``."""
    require_domain(prior, problem.states, "prior")
    if not tau.bayes_plausible(prior):
        raise InputError("posterior distribution is not Bayes plausible for the prior")
    if rule.posteriors != tau.posteriors:
        raise InputError("decision rule does not match the posterior distribution")
    rows = []
    for i, m0 in enumerate(prior.weights):
        if m0 == 0:
            rows.append(None)
            continue
        rows.append(tuple(
            sum((mu.weights[i] * t * alpha.weights[j]
                 for mu, t, alpha in zip(tau.posteriors, tau.weights, rule.choices)), _ZERO) / m0
            for j in range(problem.n_actions)
        ))
    return tuple(rows)


def tau_from_bce(joint: JointDistribution, marginal: Distribution) -> PosteriorDistribution:
    """Posteriors ``μ_a = π(a, ·)/ν₀(a)`` weighted by ``ν₀(a)``; equal posteriors are merged."""
    problem = joint.problem
    require_domain(marginal, problem.actions, "marginal")
    if joint.action_marginal() != marginal.weights:
        raise InputError("joint distribution does not have the given action marginal")
    order: list[tuple[Fraction, ...]] = []
    weight: dict[tuple[Fraction, ...], Fraction] = {}
    for a in marginal.support():
        w = marginal.weights[a]
        mu = tuple(v / w for v in joint.pi[a])
        if mu not in weight:
            order.append(mu)
            weight[mu] = _ZERO
        weight[mu] += w
    return PosteriorDistribution(
        tuple(Distribution(problem.states, mu) for mu in order),
        tuple(weight[mu] for mu in order),
    )
