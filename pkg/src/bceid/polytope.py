"""Polytope representations and free-coordinate conversions.

Beliefs carry all ``I`` coordinates.  Polytopes live in the ``I − 1`` free
coordinates obtained by deleting one state's coordinate (``drop``); the
deleted coordinate is recovered as one minus the sum of the others.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .rational import to_fraction


@dataclass(frozen=True)
class Halfspace:
    """The inequality ``normal · x ≤ height``."""

    normal: tuple[Fraction, ...]
    height: Fraction

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(to_fraction(v) for v in self.normal))
        object.__setattr__(self, "height", to_fraction(self.height))

    def slack(self, x: Sequence[Fraction]) -> Fraction:
        return self.height - sum((a * b for a, b in zip(self.normal, x)), Fraction(0))


@dataclass(frozen=True)
class HPolytope:
    """Halfspace representation ``{x : A x ≤ b, E x = e}``.

    ``infeasible`` marks a system that was found empty while building it
    (a constant obedience row that can never hold); such a polytope has no
    rows describing it and no vertices.
    """

    dim: int
    inequalities: tuple[Halfspace, ...]
    equalities: tuple[Halfspace, ...] = ()
    infeasible: bool = False
    drop: int | None = None

    def __post_init__(self):
        for h in self.inequalities + self.equalities:
            if len(h.normal) != self.dim:
                raise ValueError("row length differs from the ambient dimension")
            if not any(h.normal):
                raise ValueError("zero normal in a polytope row")

    def contains(self, x: Sequence[Fraction]) -> bool:
        if self.infeasible:
            return False
        if any(h.slack(x) != 0 for h in self.equalities):
            return False
        return all(h.slack(x) >= 0 for h in self.inequalities)


@dataclass(frozen=True)
class VPolytope:
    """Vertex representation; vertices are deduplicated and sorted."""

    dim: int
    vertices: tuple[tuple[Fraction, ...], ...]
    drop: int | None = None

    def __post_init__(self):
        vs = sorted({tuple(to_fraction(v) for v in vert) for vert in self.vertices})
        if any(len(v) != self.dim for v in vs):
            raise ValueError("vertex length differs from the ambient dimension")
        object.__setattr__(self, "vertices", tuple(vs))

    @property
    def empty(self) -> bool:
        return not self.vertices


@dataclass(frozen=True)
class AffineHullBasis:
    """Basis ``B`` of the orthogonal complement of a polytope's affine hull."""

    basis: tuple[tuple[Fraction, ...], ...]
    anchor: tuple[Fraction, ...]

    @property
    def hull_dimension(self) -> int:
        return len(self.anchor) - len(self.basis)


def to_free(mu: Sequence[Fraction], drop: int = 0) -> tuple[Fraction, ...]:
    """Delete coordinate ``drop`` from a full belief vector."""
    return tuple(to_fraction(v) for i, v in enumerate(mu) if i != drop)


def from_free(x: Sequence[Fraction], drop: int = 0) -> tuple[Fraction, ...]:
    """Reinsert the deleted coordinate as one minus the sum of the rest."""
    xs = [to_fraction(v) for v in x]
    rest = 1 - sum(xs, Fraction(0))
    return tuple(xs[:drop] + [rest] + xs[drop:])


def lift_direction(n: Sequence[Fraction], drop: int = 0) -> tuple[Fraction, ...]:
    """Extend a free-coordinate normal with a zero at the deleted coordinate."""
    ns = [to_fraction(v) for v in n]
    return tuple(ns[:drop] + [Fraction(0)] + ns[drop:])


def free_halfspace(p: Sequence[Fraction], height: Fraction, drop: int = 0) -> tuple[tuple[Fraction, ...], Fraction]:
    """Rewrite ``p · μ ≤ height`` on the simplex in free coordinates."""
    pd = to_fraction(p[drop])
    normal = tuple(to_fraction(v) - pd for i, v in enumerate(p) if i != drop)
    return normal, to_fraction(height) - pd
