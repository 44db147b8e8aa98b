"""Small exact linear-algebra routines over any exact field type."""

from __future__ import annotations

from typing import Any, Sequence


def rref(rows: Sequence[Sequence[Any]], ncols: int) -> tuple[list[list[Any]], list[int]]:
    """Reduced row echelon form; returns the nonzero rows and pivot columns."""
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pr = m[r]
        inv = 1 / pr[c]
        if inv != 1:
            pr = [v * inv for v in pr]
            m[r] = pr
        for i in range(len(m)):
            if i != r:
                f = m[i][c]
                if f:
                    row = m[i]
                    m[i] = [a - f * b for a, b in zip(row, pr)]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(rows: Sequence[Sequence[Any]], ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence[Any]], ncols: int, one: Any = 1) -> list[list[Any]]:
    """Basis of ``{x : rows · x = 0}``, one vector per free column."""
    R, piv = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in piv]
    zero = one - one
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for i, c in enumerate(piv):
            v[c] = -R[i][f]
        basis.append(v)
    return basis


def solve_square(A: Sequence[Sequence[Any]], b: Sequence[Any]) -> list[Any] | None:
    """Unique solution of ``A x = b`` for square ``A``, or ``None`` if singular."""
    n = len(A)
    m = [list(A[i]) + [b[i]] for i in range(n)]
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return None
        m[c], m[p] = m[p], m[c]
        pr = m[c]
        inv = 1 / pr[c]
        for i in range(c + 1, n):
            f = m[i][c]
            if f:
                f = f * inv
                row = m[i]
                m[i] = [a - f * bb for a, bb in zip(row, pr)]
    x = [None] * n
    for i in range(n - 1, -1, -1):
        s = m[i][n]
        for k in range(i + 1, n):
            s -= m[i][k] * x[k]
        x[i] = s / m[i][i]
    return x
