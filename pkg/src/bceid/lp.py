"""Exact two-phase primal simplex with Bland's anti-cycling rule.

Solves ``min c·x`` subject to ``A_ub x ≤ b_ub``, ``A_eq x = b_eq`` and
``x ≥ 0`` over the rationals.  Infeasible programs come back with a Farkas
certificate ``(y, w)``, ``w ≥ 0``, such that ``y·A_eq + w·A_ub ≥ 0``
componentwise while ``y·b_eq + w·b_ub < 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from .rational import FAST_ZERO, fast, to_fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    """Outcome of :func:`solve`.

    ``x`` and ``value`` are set when ``status`` is optimal; ``farkas_eq`` and
    ``farkas_ub`` are set when it is infeasible.
    """

    status: str
    x: tuple[Fraction, ...] | None = None
    value: Fraction | None = None
    farkas_eq: tuple[Fraction, ...] | None = None
    farkas_ub: tuple[Fraction, ...] | None = None

    @property
    def feasible(self) -> bool:
        return self.status != INFEASIBLE


class _Tableau:
    __slots__ = ("rows", "basis", "obj")

    def __init__(self, rows, basis):
        self.rows = rows
        self.basis = basis
        self.obj = None

    def pivot(self, r: int, j: int) -> None:
        rows = self.rows
        row = rows[r]
        piv = row[j]
        if piv != 1:
            inv = 1 / piv
            row = [v * inv for v in row]
            rows[r] = row
        nz = [k for k, v in enumerate(row) if v]
        for i, other in enumerate(rows):
            if i != r:
                f = other[j]
                if f:
                    for k in nz:
                        other[k] -= f * row[k]
        obj = self.obj
        f = obj[j]
        if f:
            for k in nz:
                obj[k] -= f * row[k]
        self.basis[r] = j

    def run(self, ncols: int) -> int | None:
        """Iterate to optimality; return an unbounded column or ``None``."""
        obj, rows, basis = self.obj, self.rows, self.basis
        while True:
            enter = -1
            for j in range(ncols):
                if obj[j] < 0:
                    enter = j
                    break
            if enter < 0:
                return None
            best = -1
            best_ratio = None
            for r, row in enumerate(rows):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    if (
                        best < 0
                        or ratio < best_ratio
                        or (ratio == best_ratio and basis[r] < basis[best])
                    ):
                        best, best_ratio = r, ratio
            if best < 0:
                return enter
            self.pivot(best, enter)


def solve(
    c: Sequence[Any] | None,
    A_ub: Sequence[Sequence[Any]] = (),
    b_ub: Sequence[Any] = (),
    A_eq: Sequence[Sequence[Any]] = (),
    b_eq: Sequence[Any] = (),
    *,
    n: int | None = None,
    maximize: bool = False,
) -> LPResult:
    """Solve a linear program exactly.

    Args:
        c: objective coefficients, or ``None`` for a pure feasibility problem.
        A_ub, b_ub: rows of ``A_ub x ≤ b_ub``.
        A_eq, b_eq: rows of ``A_eq x = b_eq``.
        n: number of variables when ``c`` is ``None`` and no rows are given.
        maximize: maximize instead of minimize.
    """
    if c is not None:
        n = len(c)
    elif A_ub:
        n = len(A_ub[0])
    elif A_eq:
        n = len(A_eq[0])
    elif n is None:
        raise ValueError("cannot infer the number of variables")
    m_ub, m_eq = len(A_ub), len(A_eq)
    if len(b_ub) != m_ub or len(b_eq) != m_eq:
        raise ValueError("row and right-hand-side counts differ")

    zero = FAST_ZERO
    ub_rhs = [fast(b) for b in b_ub]
    eq_rhs = [fast(b) for b in b_eq]
    n_art = m_eq + sum(1 for b in ub_rhs if b < 0)
    n_main = n + m_ub
    width = n_main + n_art + 1

    rows, basis, signs, init_col = [], [], [], []
    art = n_main
    for i in range(m_ub):
        coeffs = A_ub[i]
        if len(coeffs) != n:
            raise ValueError("inequality row has wrong length")
        row = [zero] * width
        s = 1 if ub_rhs[i] >= 0 else -1
        for j, v in enumerate(coeffs):
            if v:
                row[j] = fast(v) * s
        row[n + i] = fast(s)
        row[-1] = ub_rhs[i] * s
        if s > 0:
            basis.append(n + i)
        else:
            row[art] = fast(1)
            basis.append(art)
            art += 1
        init_col.append(basis[-1])
        signs.append(s)
        rows.append(row)
    for i in range(m_eq):
        coeffs = A_eq[i]
        if len(coeffs) != n:
            raise ValueError("equality row has wrong length")
        row = [zero] * width
        s = 1 if eq_rhs[i] >= 0 else -1
        for j, v in enumerate(coeffs):
            if v:
                row[j] = fast(v) * s
        row[-1] = eq_rhs[i] * s
        row[art] = fast(1)
        basis.append(art)
        init_col.append(art)
        art += 1
        signs.append(s)
        rows.append(row)

    tab = _Tableau(rows, basis)

    if n_art:
        obj = [zero] * width
        for j in range(n_main, n_main + n_art):
            obj[j] = fast(1)
        for r, row in enumerate(rows):
            if basis[r] >= n_main:
                for k, v in enumerate(row):
                    if v:
                        obj[k] -= v
        tab.obj = obj
        tab.run(width - 1)
        if obj[-1] != 0:
            # Simplex multipliers y_r = c(init_r) − reduced cost(init_r).
            y = []
            for r in range(len(rows)):
                k = init_col[r]
                ck = 1 if k >= n_main else 0
                y.append((ck - obj[k]) * signs[r])
            w = tuple(to_fraction(-v) for v in y[:m_ub])
            ye = tuple(to_fraction(-v) for v in y[m_ub:])
            return LPResult(INFEASIBLE, farkas_eq=ye, farkas_ub=w)
        # Drive zero-level artificials out of the basis; drop redundant rows.
        r = 0
        while r < len(tab.rows):
            if tab.basis[r] >= n_main:
                row = tab.rows[r]
                j = next((k for k in range(n_main) if row[k] != 0), None)
                if j is None:
                    del tab.rows[r]
                    del tab.basis[r]
                    continue
                tab.pivot(r, j)
            r += 1
        tab.rows = [row[:n_main] + [row[-1]] for row in tab.rows]

    if c is None:
        return LPResult(OPTIMAL, x=_extract(tab, n), value=Fraction(0))

    sign = -1 if maximize else 1
    cost = [fast(v) * sign for v in c] + [zero] * m_ub
    obj = cost + [zero]
    for r, row in enumerate(tab.rows):
        cb = cost[tab.basis[r]]
        if cb:
            for k, v in enumerate(row):
                if v:
                    obj[k] -= cb * v
    tab.obj = obj
    if tab.run(n_main) is not None:
        return LPResult(UNBOUNDED)
    value = to_fraction(-obj[-1]) * sign
    return LPResult(OPTIMAL, x=_extract(tab, n), value=value)


def _extract(tab: _Tableau, n: int) -> tuple[Fraction, ...]:
    x = [Fraction(0)] * n
    for r, j in enumerate(tab.basis):
        if j < n:
            x[j] = to_fraction(tab.rows[r][-1])
    return tuple(x)


def check_farkas(result: LPResult, A_ub, b_ub, A_eq, b_eq) -> bool:
    """Re-validate a Farkas certificate exactly."""
    y, w = result.farkas_eq, result.farkas_ub
    if y is None or w is None or any(v < 0 for v in w):
        return False
    n = len(A_ub[0]) if A_ub else len(A_eq[0])
    for j in range(n):
        s = sum((y[i] * A_eq[i][j] for i in range(len(A_eq))), Fraction(0))
        s += sum((w[i] * A_ub[i][j] for i in range(len(A_ub))), Fraction(0))
        if s < 0:
            return False
    total = sum((y[i] * b_eq[i] for i in range(len(b_eq))), Fraction(0))
    total += sum((w[i] * b_ub[i] for i in range(len(b_ub))), Fraction(0))
    return total < 0
