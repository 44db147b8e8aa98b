"""Exact polytope machinery for the identified set of priors.

Vertex enumeration by basis subsets, weighted Minkowski sums with exact
LP redundancy elimination, facet enumeration, and the rays of the normal
fan.  All coordinates are free coordinates (see :mod:`bceid.polytope`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from . import lp
from .errors import CapExceededError, DominatedActionError, InputError
from .linalg import nullspace, rref, solve_square
from .model import DecisionProblem, Distribution, _dominated, optimal_belief_set, require_domain
from .polytope import AffineHullBasis, Halfspace, HPolytope, VPolytope, lift_direction
from .rational import FAST_ONE, FAST_ZERO, fast, primitive, to_fraction

DEFAULT_CAP = 6


def _fr(v) -> tuple[Fraction, ...]:
    return tuple(to_fraction(x) for x in v)


def _fa(v) -> list:
    return [fast(x) for x in v]


def _scaled_halfspace(normal, height) -> Halfspace:
    """Scale ``normal · x ≤ height`` so the normal is a primitive integer vector."""
    nf = _fr(normal)
    prim = primitive(nf)
    k = next(i for i, x in enumerate(nf) if x != 0)
    scale = Fraction(prim[k]) / nf[k]
    return Halfspace(tuple(Fraction(x) for x in prim), to_fraction(height) * scale)


# ------------------------------------------------------------ vertices


def _obviously_bounded(h: HPolytope) -> bool:
    n = h.dim
    lower = set()
    upper = False
    for row in h.inequalities:
        nz = [i for i, x in enumerate(row.normal) if x != 0]
        if len(nz) == 1 and row.normal[nz[0]] < 0:
            lower.add(nz[0])
        if all(x > 0 for x in row.normal):
            upper = True
    return upper and len(lower) == n


def _bounded_or_empty(h: HPolytope) -> bool:
    """Return False if empty; raise if unbounded; True otherwise."""
    n = h.dim
    A_ub = [list(r.normal) + [-x for x in r.normal] for r in h.inequalities]
    b_ub = [r.height for r in h.inequalities]
    A_eq = [list(r.normal) + [-x for x in r.normal] for r in h.equalities]
    b_eq = [r.height for r in h.equalities]
    for k in range(n):
        for sign in (1, -1):
            c = [0] * (2 * n)
            c[k], c[n + k] = sign, -sign
            res = lp.solve(c, A_ub, b_ub, A_eq, b_eq, maximize=True)
            if res.status == lp.INFEASIBLE:
                return False
            if res.status == lp.UNBOUNDED:
                raise InputError("unbounded polyhedron")
    return True


def vertices(h: HPolytope, cap: int = DEFAULT_CAP) -> VPolytope:
    """Enumerate vertices by solving every square subsystem of active rows.

    Raises:
        CapExceededError: ambient dimension above ``cap``.
        InputError: the polyhedron is unbounded.
    """
    n = h.dim
    if n > cap:
        raise CapExceededError(f"dimension {n} exceeds the enumeration cap {cap}")
    if h.infeasible:
        return VPolytope(n, (), h.drop)
    if n == 0:
        return VPolytope(0, ((),), h.drop)
    if not _obviously_bounded(h) and not _bounded_or_empty(h):
        return VPolytope(n, (), h.drop)
    eq_rows = [_fa(r.normal) + [fast(r.height)] for r in h.equalities]
    E, _ = rref(eq_rows, n)
    ineq = [(_fa(r.normal), fast(r.height)) for r in h.inequalities]
    need = n - len(E)
    found = set()
    for combo in combinations(range(len(ineq)), need):
        A = [row[:n] for row in E] + [ineq[i][0] for i in combo]
        b = [row[n] for row in E] + [ineq[i][1] for i in combo]
        x = solve_square(A, b)
        if x is None:
            continue
        if all(sum(a * v for a, v in zip(nr, x)) <= ht for nr, ht in ineq):
            found.add(tuple(x))
    return VPolytope(n, tuple(_fr(v) for v in found), h.drop)


# ------------------------------------------------------------ minkowski sums


def _in_hull(point, others) -> bool:
    """Exact LP test: is ``point`` a convex combination of ``others``?"""
    if not others:
        return False
    n = len(point)
    A_eq = [[o[i] for o in others] for i in range(n)] + [[1] * len(others)]
    b_eq = list(point) + [1]
    return lp.solve(None, (), (), A_eq, b_eq, n=len(others)).feasible


def extreme_points(points: Sequence[Sequence]) -> list[tuple]:
    """Drop every point that is a convex combination of the others (exact LP)."""
    pts = sorted({tuple(fast(x) for x in p) for p in points})
    if len(pts) <= 2:
        return pts
    keep = []
    for k, p in enumerate(pts):
        others = pts[:k] + pts[k + 1 :]
        if not _in_hull(p, others):
            keep.append(p)
    return keep


def _support_vertices(problem, marginal, cap, drop):
    require_domain(marginal, problem.actions, "marginal")
    for a in marginal.support():
        if _dominated(problem, a):
            raise DominatedActionError(problem.actions[a])
    n = problem.n_states - 1
    if n > cap:
        raise CapExceededError(f"dimension {n} exceeds the enumeration cap {cap}")
    return [
        (marginal.weights[a], vertices(optimal_belief_set(problem, problem.actions[a], drop), cap).vertices)
        for a in marginal.support()
    ]


def weighted_minkowski(problem: DecisionProblem, marginal: Distribution, cap: int = DEFAULT_CAP, drop: int = 0) -> VPolytope:
    """Vertices of ``Σ_a ν₀(a) Δ*(a)`` in free coordinates.

    Sums are formed one action at a time and reduced to extreme points after
    each step, which keeps candidate sets small.
    """
    n = problem.n_states - 1
    acc = [tuple(FAST_ZERO for _ in range(n))]
    for w, verts in _support_vertices(problem, marginal, cap, drop):
        wf = fast(w)
        vf = [[fast(x) for x in v] for v in verts]
        cand = {tuple(s[i] + wf * v[i] for i in range(n)) for s in acc for v in vf}
        acc = extreme_points(cand)
    return VPolytope(n, tuple(_fr(v) for v in acc), drop)


# ------------------------------------------------------------ facets


def _cross(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def convex_cycle(points: Sequence[Sequence]) -> list[tuple]:
    """Counter-clockwise vertex cycle of a planar point set (collinear points dropped)."""
    pts = sorted(set(tuple(p) for p in points))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _facets_full(pts: list[tuple], k: int) -> list[tuple[list, object]]:
    """Facets ``(normal, height)`` of a full-dimensional point set in ``ℝ^k``."""
    if k == 1:
        xs = [p[0] for p in pts]
        return [([FAST_ONE], max(xs)), ([-FAST_ONE], -min(xs))]
    if k == 2:
        cyc = convex_cycle(pts)
        out = []
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            nrm = [b[1] - a[1], a[0] - b[0]]
            out.append((nrm, nrm[0] * a[0] + nrm[1] * a[1]))
        return out
    out, seen = [], set()
    for combo in combinations(range(len(pts)), k):
        x0 = pts[combo[0]]
        rows = [[pts[i][t] - x0[t] for t in range(k)] for i in combo[1:]]
        ns = nullspace(rows, k, FAST_ONE)
        if len(ns) != 1:
            continue
        nrm = ns[0]
        h0 = sum(a * b for a, b in zip(nrm, x0))
        pos = neg = False
        for p in pts:
            s = sum(a * b for a, b in zip(nrm, p)) - h0
            if s > 0:
                pos = True
            elif s < 0:
                neg = True
            if pos and neg:
                break
        if pos and neg:
            continue
        if pos:
            nrm = [-x for x in nrm]
            h0 = -h0
        hs = _scaled_halfspace(nrm, h0)
        key = (hs.normal, hs.height)
        if key not in seen:
            seen.add(key)
            out.append((list(hs.normal), hs.height))
    return out


def facets(v: VPolytope) -> tuple[HPolytope, AffineHullBasis]:
    """Minimal H-representation and affine-hull basis of a vertex set.

    The affine hull is found exactly; the points are projected to pivot
    coordinates where they are full dimensional, facets are enumerated
    there, and each normal is lifted back with zeros in the remaining
    coordinates.  Equality rows pin the affine hull.
    """
    if v.empty:
        raise InputError("cannot compute facets of an empty vertex list")
    n = v.dim
    pts = [tuple(fast(x) for x in p) for p in v.vertices]
    x0 = pts[0]
    diffs = [[p[i] - x0[i] for i in range(n)] for p in pts[1:]]
    R, piv = rref(diffs, n) if diffs else ([], [])
    k = len(piv)
    B = nullspace(R, n, FAST_ONE) if n else []
    basis, eqs = [], []
    for b in B:
        hs = _scaled_halfspace(b, sum(x * y for x, y in zip(b, x0)))
        basis.append(hs.normal)
        eqs.append(hs)
    ineqs = []
    if k:
        proj = [tuple(p[c] for c in piv) for p in pts]
        for nrm, h in _facets_full(sorted(set(proj)), k):
            full = [FAST_ZERO] * n
            for t, c in enumerate(piv):
                full[c] = nrm[t]
            ineqs.append(_scaled_halfspace(full, h))
    ineqs.sort(key=lambda r: (r.normal, r.height))
    hp = HPolytope(n, tuple(ineqs), tuple(eqs), False, v.drop)
    return hp, AffineHullBasis(tuple(basis), _fr(x0))


def contains(h: HPolytope, basis: AffineHullBasis, point: Sequence) -> bool:
    """Exact membership in the polytope and its affine hull."""
    x = _fr(point)
    if len(x) != h.dim or len(basis.anchor) != h.dim:
        raise InputError("dimension mismatch")
    for b in basis.basis:
        if sum((p * q for p, q in zip(b, x)), Fraction(0)) != sum(
            (p * q for p, q in zip(b, basis.anchor)), Fraction(0)
        ):
            return False
    return h.contains(x)


# ------------------------------------------------------------ normal fan


def project_out(vec: Sequence, basis: Sequence[Sequence]) -> tuple[Fraction, ...]:
    """Orthogonal projection of ``vec`` onto the complement of ``span(basis)``."""
    v = [to_fraction(x) for x in vec]
    if not basis:
        return tuple(v)
    B = [[to_fraction(x) for x in b] for b in basis]
    gram = [[sum((x * y for x, y in zip(bi, bj)), Fraction(0)) for bj in B] for bi in B]
    rhs = [sum((x * y for x, y in zip(bi, v)), Fraction(0)) for bi in B]
    coef = solve_square(gram, rhs)
    for c, b in zip(coef, B):
        v = [x - c * y for x, y in zip(v, b)]
    return tuple(v)


@dataclass(frozen=True)
class IdentifiedSet:
    """``M(u, ν₀)`` in both representations."""

    vrep: VPolytope
    hrep: HPolytope
    hull: AffineHullBasis

    @property
    def full_dimensional(self) -> bool:
        return not self.hull.basis


def identified_set(problem: DecisionProblem, marginal: Distribution, cap: int = DEFAULT_CAP, drop: int = 0) -> IdentifiedSet:
    v = weighted_minkowski(problem, marginal, cap, drop)
    h, b = facets(v)
    return IdentifiedSet(v, h, b)


def rays_of(ident: IdentifiedSet) -> list[tuple[int, ...]]:
    rays: list[tuple[int, ...]] = []
    for row in ident.hrep.inequalities:
        r = primitive(project_out(row.normal, ident.hull.basis))
        if any(r) and r not in rays:
            rays.append(r)
    return rays


def refinement_rays(problem: DecisionProblem, marginal: Distribution, cap: int = DEFAULT_CAP, drop: int = 0) -> list[tuple[int, ...]]:
    """Primitive facet normals of ``M`` in free coordinates.

    For a lower-dimensional ``M`` each normal is first projected onto the
    direction space of its affine hull.
    """
    return rays_of(identified_set(problem, marginal, cap, drop))


def support_directions(problem: DecisionProblem, marginal: Distribution, cap: int = DEFAULT_CAP, drop: int = 0) -> list[tuple[Fraction, ...]]:
    """Full-coordinate directions whose support inequalities characterize ``M``.

    These are the lifted hull basis vectors and their negatives together with
    the lifted, projected facet rays.
    """
    ident = identified_set(problem, marginal, cap, drop)
    out = []
    for b in ident.hull.basis:
        out.append(lift_direction(b, drop))
        out.append(lift_direction([-x for x in b], drop))
    for r in rays_of(ident):
        out.append(lift_direction([Fraction(x) for x in r], drop))
    return out
