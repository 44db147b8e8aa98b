"""BCE-consistency by exact linear programming, with primal and dual certificates."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from . import lp
from .errors import InputError
from .model import DecisionProblem, Distribution, _dominated, require_domain
from .rational import NEG_INF, to_fraction

_ZERO = Fraction(0)


@dataclass(frozen=True)
class JointDistribution:
    """A joint law ``π(a, ω)``; rows are actions, columns states."""

    problem: DecisionProblem
    pi: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(v) for v in row) for row in self.pi)
        if len(rows) != self.problem.n_actions or any(len(r) != self.problem.n_states for r in rows):
            raise InputError("joint distribution has the wrong shape")
        if any(v < 0 for r in rows for v in r):
            raise InputError("joint distribution has a negative entry")
        if sum((v for r in rows for v in r), _ZERO) != 1:
            raise InputError("joint distribution does not sum to 1")
        object.__setattr__(self, "pi", rows)

    def action_marginal(self) -> tuple[Fraction, ...]:
        return tuple(sum(r, _ZERO) for r in self.pi)

    def state_marginal(self) -> tuple[Fraction, ...]:
        return tuple(sum(col, _ZERO) for col in zip(*self.pi))


@dataclass(frozen=True)
class BeliefSystem:
    """Posteriors ``μ(·|a)`` for the actions with positive marginal mass."""

    actions: tuple[str, ...]
    weights: tuple[Fraction, ...]
    posteriors: tuple[Distribution, ...]

    def mean(self) -> tuple[Fraction, ...]:
        n = len(self.posteriors[0].weights)
        return tuple(
            sum((w * mu.weights[i] for w, mu in zip(self.weights, self.posteriors)), _ZERO)
            for i in range(n)
        )


@dataclass(frozen=True)
class DualCertificate:
    """Multipliers ``(p, q, λ)`` of the dual feasibility system.

    Feasibility means ``q(a) ≥ p(ω) + Σ_{a'} λ(a, a') [u(a, ω) − u(a', ω)]``
    for all ``a``, ``ω`` with ``λ ≥ 0``.  ``lam`` holds every pairwise
    multiplier; ``lambda_up`` and ``lambda_down`` are its adjacent entries.
    """

    p: tuple[Fraction, ...]
    q: tuple[Fraction, ...]
    lam: tuple[tuple[Fraction, ...], ...]

    @property
    def lambda_up(self) -> tuple[Fraction, ...]:
        J = len(self.q)
        return tuple(self.lam[j][j + 1] if j + 1 < J else _ZERO for j in range(J))

    @property
    def lambda_down(self) -> tuple[Fraction, ...]:
        return tuple(self.lam[j][j - 1] if j > 0 else _ZERO for j in range(len(self.q)))

    @property
    def adjacent_only(self) -> bool:
        return all(v == 0 for j, row in enumerate(self.lam) for k, v in enumerate(row) if abs(j - k) > 1)

    @property
    def complementary(self) -> bool:
        """Whether ``λ↑_j λ↓_j = 0`` for every action."""
        return all(u * d == 0 for u, d in zip(self.lambda_up, self.lambda_down))

    def objective(self, prior: Distribution, marginal: Distribution) -> Fraction:
        qv = sum((q * v for q, v in zip(self.q, marginal.weights)), _ZERO)
        pm = sum((p * m for p, m in zip(self.p, prior.weights)), _ZERO)
        return qv - pm


@dataclass(frozen=True)
class Verdict:
    """Outcome of a consistency check with a witness either way."""

    consistent: bool
    joint: JointDistribution | None = None
    dual: DualCertificate | None = None
    dominated: tuple[str, ...] = ()


# ------------------------------------------------------------ validation


def joint_is_valid(problem: DecisionProblem, prior: Distribution, marginal: Distribution, joint: JointDistribution) -> bool:
    """Exact check of obedience and both marginal equalities."""
    if joint.state_marginal() != prior.weights or joint.action_marginal() != marginal.weights:
        return False
    u = problem.utility
    for a, row in enumerate(joint.pi):
        for b in range(problem.n_actions):
            if sum((m * (u[a][i] - u[b][i]) for i, m in enumerate(row)), _ZERO) < 0:
                return False
    return True


def dual_is_feasible(problem: DecisionProblem, cert: DualCertificate) -> bool:
    u = problem.utility
    if any(v < 0 for row in cert.lam for v in row):
        return False
    for a in range(problem.n_actions):
        for i in range(problem.n_states):
            rhs = cert.p[i] + sum(
                (cert.lam[a][b] * (u[a][i] - u[b][i]) for b in range(problem.n_actions)), _ZERO
            )
            if cert.q[a] < rhs:
                return False
    return True


def dual_certifies(problem: DecisionProblem, prior: Distribution, marginal: Distribution, cert: DualCertificate) -> bool:
    """True iff the certificate is dual feasible with negative objective."""
    return dual_is_feasible(problem, cert) and cert.objective(prior, marginal) < 0


def verdict_is_valid(problem: DecisionProblem, prior: Distribution, marginal: Distribution, verdict: Verdict) -> bool:
    if verdict.consistent:
        return verdict.joint is not None and joint_is_valid(problem, prior, marginal, verdict.joint)
    return verdict.dual is not None and dual_certifies(problem, prior, marginal, verdict.dual)


# ------------------------------------------------------------ check_bce


def _dominance_certificate(problem: DecisionProblem, a: int) -> DualCertificate:
    n, J = problem.n_states, problem.n_actions
    others = [b for b in range(J) if b != a]
    rows = [[problem.utility[b][i] - problem.utility[a][i] for i in range(n)] for b in others]
    res = lp.solve(None, rows, [0] * len(rows), [[1] * n], [1], n=n)
    assert not res.feasible
    y = res.farkas_eq[0]
    lam = [[_ZERO] * J for _ in range(J)]
    for b, w in zip(others, res.farkas_ub):
        lam[a][b] = w
    q = [_ZERO] * J
    q[a] = y
    return DualCertificate(tuple(_ZERO for _ in range(n)), tuple(q), tuple(map(tuple, lam)))


def check_bce(problem: DecisionProblem, prior: Distribution, marginal: Distribution) -> Verdict:
    """Decide BCE-consistency of ``(prior, marginal)`` exactly.

    The feasibility system is posed over the supports of both distributions
    (all other entries of ``π`` are forced to zero).  A dual certificate is
    read off the phase-one multipliers and extended to the full problem.
    """
    require_domain(prior, problem.states, "prior")
    require_domain(marginal, problem.actions, "marginal")
    u = problem.utility
    n, J = problem.n_states, problem.n_actions
    acts = marginal.support()
    for a in acts:
        if _dominated(problem, a):
            return Verdict(False, dual=_dominance_certificate(problem, a), dominated=(problem.actions[a],))
    sts = prior.support()
    ns = len(sts)
    nv = len(acts) * ns

    A_ub, pairs = [], []
    for ka, a in enumerate(acts):
        for b in range(J):
            if b == a:
                continue
            row = [0] * nv
            nonzero = False
            for ks, i in enumerate(sts):
                v = u[b][i] - u[a][i]
                if v:
                    row[ka * ns + ks] = v
                    nonzero = True
            if nonzero:
                A_ub.append(row)
                pairs.append((a, b))
    A_eq, b_eq = [], []
    for ks, i in enumerate(sts):
        row = [0] * nv
        for ka in range(len(acts)):
            row[ka * ns + ks] = 1
        A_eq.append(row)
        b_eq.append(prior.weights[i])
    for ka, a in enumerate(acts):
        row = [0] * nv
        for ks in range(ns):
            row[ka * ns + ks] = 1
        A_eq.append(row)
        b_eq.append(marginal.weights[a])

    res = lp.solve(None, A_ub, [0] * len(A_ub), A_eq, b_eq, n=nv)
    if res.feasible:
        pi = [[_ZERO] * n for _ in range(J)]
        for ka, a in enumerate(acts):
            for ks, i in enumerate(sts):
                pi[a][i] = res.x[ka * ns + ks]
        return Verdict(True, joint=JointDistribution(problem, tuple(map(tuple, pi))))

    y = res.farkas_eq
    lam = [[_ZERO] * J for _ in range(J)]
    for (a, b), w in zip(pairs, res.farkas_ub):
        lam[a][b] = w
    p: list = [None] * n
    q: list = [None] * J
    for ks, i in enumerate(sts):
        p[i] = -y[ks]
    for ka, a in enumerate(acts):
        q[a] = y[ns + ka]

    def bound(a: int, i: int) -> Fraction:
        return q[a] - sum((lam[a][b] * (u[a][i] - u[b][i]) for b in range(J)), _ZERO)

    for i in range(n):
        if p[i] is None:
            p[i] = min(bound(a, i) for a in acts)
    top = max(p)
    for a in range(J):
        if q[a] is None:
            q[a] = top
    cert = DualCertificate(tuple(p), tuple(q), tuple(map(tuple, lam)))
    return Verdict(False, dual=cert)


# ------------------------------------------------------------ support function


@lru_cache(maxsize=1 << 16)
def action_support(problem: DecisionProblem, a: int, p: tuple[Fraction, ...]) -> Fraction | float:
    """``max_{μ ∈ Δ*(a)} p·μ`` or ``NEG_INF`` when ``a`` is dominated."""
    n = problem.n_states
    rows = [
        [problem.utility[b][i] - problem.utility[a][i] for i in range(n)]
        for b in range(problem.n_actions)
        if b != a
    ]
    res = lp.solve(list(p), rows, [0] * len(rows), [[1] * n], [1], maximize=True)
    if res.status == lp.INFEASIBLE:
        return NEG_INF
    return res.value


def action_support_min(problem: DecisionProblem, a: int, p: Sequence[Fraction]) -> Fraction | float:
    """``min_{μ ∈ Δ*(a)} p·μ`` (``+inf`` when dominated)."""
    v = action_support(problem, a, tuple(-to_fraction(x) for x in p))
    return -v


def support_value(problem: DecisionProblem, marginal: Distribution, p: Sequence) -> Fraction | float:
    """``Σ_a ν₀(a) max_{μ ∈ Δ*(a)} p·μ``; ``NEG_INF`` if a supported action is dominated."""
    require_domain(marginal, problem.actions, "marginal")
    if len(p) != problem.n_states:
        raise InputError("direction has the wrong length")
    pt = tuple(to_fraction(x) for x in p)
    total = _ZERO
    for a in marginal.support():
        h = action_support(problem, a, pt)
        if h == NEG_INF:
            return NEG_INF
        total += marginal.weights[a] * h
    return total


def extreme_marginal_bounds(problem: DecisionProblem, prior: Distribution, action_set: Iterable[str]) -> tuple[Fraction, Fraction]:
    """Range of ``Σ_{a ∈ S} ν(a)`` over all BCE ``π`` with state marginal ``prior``."""
    require_domain(prior, problem.states, "prior")
    S = {problem.action_index(a) for a in action_set}
    if not S:
        raise InputError("empty action set")
    u = problem.utility
    J = problem.n_actions
    sts = prior.support()
    ns = len(sts)
    nv = J * ns
    A_ub = []
    for a in range(J):
        for b in range(J):
            if b == a:
                continue
            row = [0] * nv
            for ks, i in enumerate(sts):
                row[a * ns + ks] = u[b][i] - u[a][i]
            if any(row):
                A_ub.append(row)
    A_eq, b_eq = [], []
    for ks, i in enumerate(sts):
        row = [0] * nv
        for a in range(J):
            row[a * ns + ks] = 1
        A_eq.append(row)
        b_eq.append(prior.weights[i])
    c = [1 if a in S else 0 for a in range(J) for _ in range(ns)]
    lo = lp.solve(c, A_ub, [0] * len(A_ub), A_eq, b_eq)
    hi = lp.solve(c, A_ub, [0] * len(A_ub), A_eq, b_eq, maximize=True)
    return lo.value, hi.value


def recover_belief_system(joint: JointDistribution, marginal: Distribution) -> BeliefSystem:
    """Posteriors ``μ(ω|a) = π(a, ω) / ν₀(a)`` for ``ν₀(a) > 0``."""
    problem = joint.problem
    require_domain(marginal, problem.actions, "marginal")
    if joint.action_marginal() != marginal.weights:
        raise InputError("joint distribution does not have the given action marginal")
    acts, ws, posts = [], [], []
    for a in marginal.support():
        w = marginal.weights[a]
        acts.append(problem.actions[a])
        ws.append(w)
        posts.append(Distribution(problem.states, tuple(v / w for v in joint.pi[a])))
    return BeliefSystem(tuple(acts), tuple(ws), tuple(posts))
