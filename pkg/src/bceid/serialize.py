"""JSON encoding and decoding of the library's objects.

Rationals are always written as canonical ``"p/q"`` strings.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .consistency import BeliefSystem, DualCertificate, Verdict
from .errors import InputError
from .model import DecisionProblem, Distribution, _load, _rational, parse_distribution
from .polytope import AffineHullBasis, HPolytope, VPolytope
from .rational import fmt, fmt_decimal, to_fraction
from .rationalizer import CoreViolation, DecisionRule, MenuMeasure, PosteriorDistribution
from .support_tests import TestFunction, TestVerdict


def vec(xs: Sequence) -> list[str]:
    return [fmt(x) for x in xs]


def mat(rows: Sequence[Sequence]) -> list[list[str]]:
    return [vec(r) for r in rows]


def dist(d: Distribution) -> dict[str, str]:
    return {k: fmt(v) for k, v in zip(d.domain, d.weights)}


def dual(c: DualCertificate) -> dict:
    return {
        "p": vec(c.p),
        "q": vec(c.q),
        "lambda": mat(c.lam),
        "lambda_up": vec(c.lambda_up),
        "lambda_down": vec(c.lambda_down),
    }


def verdict(v: Verdict, prior: Distribution | None = None, marginal: Distribution | None = None) -> dict:
    out: dict[str, Any] = {"consistent": v.consistent}
    if v.joint is not None:
        out["pi"] = mat(v.joint.pi)
    if v.dual is not None:
        out["dual"] = dual(v.dual)
        if prior is not None and marginal is not None:
            out["dual"]["objective"] = fmt(v.dual.objective(prior, marginal))
    if v.dominated:
        out["dominated"] = list(v.dominated)
    return out


def test_function(f: TestFunction, slack=None) -> dict:
    out = {"p": vec(f.p), "q": vec(f.q), "tag": f.tag}
    if slack is not None:
        out["slack"] = fmt(slack)
    return out


def test_verdict(v: TestVerdict) -> dict:
    out = {
        "consistent": v.consistent,
        "family": v.family,
        "exactness": v.exactness,
        "violated": [test_function(x.function, x.slack) for x in v.violated],
    }
    if v.dominated:
        out["dominated"] = list(v.dominated)
    return out


def hpolytope(h: HPolytope) -> dict:
    return {
        "inequalities": [{"normal": vec(r.normal), "height": fmt(r.height)} for r in h.inequalities],
        "equalities": [{"normal": vec(r.normal), "height": fmt(r.height)} for r in h.equalities],
    }


def polytope(h: HPolytope, v: VPolytope, basis: AffineHullBasis) -> dict:
    out = hpolytope(h)
    out["vertices"] = mat(v.vertices)
    out["hull_basis"] = mat(basis.basis)
    out["anchor"] = vec(basis.anchor)
    return out


def belief_system(b: BeliefSystem) -> dict:
    return {
        "actions": list(b.actions),
        "weights": vec(b.weights),
        "posteriors": [dist(mu) for mu in b.posteriors],
    }


def tau(t: PosteriorDistribution) -> dict:
    return {"posteriors": [dist(mu) for mu in t.posteriors], "weights": vec(t.weights)}


def menu(m: MenuMeasure) -> list[dict]:
    return [{"menu": list(k), "mass": fmt(v)} for k, v in m.as_dict().items()]


def rule(r: DecisionRule) -> list[list[str]]:
    return [vec(c.weights) for c in r.choices]


def violation(v: CoreViolation) -> dict:
    return {"coalition": list(v.coalition), "demand": fmt(v.demand), "supply": fmt(v.supply)}


def kernel(rows) -> list:
    return [None if r is None else vec(r) for r in rows]


def parse_tau(doc: Any, states: Sequence[str]) -> PosteriorDistribution:
    """Parse ``{"posteriors": [{state: p/q}, ...], "weights": [...]}``."""
    data = _load(doc)
    if not isinstance(data, Mapping) or "posteriors" not in data or "weights" not in data:
        raise InputError("posterior file needs 'posteriors' and 'weights'")
    posts = tuple(parse_distribution(p, states) for p in data["posteriors"])
    ws = tuple(_rational(w) for w in data["weights"])
    return PosteriorDistribution(posts, ws)


def decimals(obj: Any) -> Any:
    """Copy of an encoded document with every rational string shown as a decimal."""
    if isinstance(obj, dict):
        return {k: decimals(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [decimals(v) for v in obj]
    if isinstance(obj, str):
        try:
            return fmt_decimal(Fraction(obj))
        except (ValueError, ZeroDivisionError):
            return obj
    return obj


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def problem(p: DecisionProblem) -> dict:
    return {"states": list(p.states), "actions": list(p.actions), "utility": mat(p.utility)}


def rational(x) -> str:
    return fmt(to_fraction(x))
