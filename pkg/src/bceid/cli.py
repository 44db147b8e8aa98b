"""Command-line front end.

Exit codes: 0 consistent / success, 1 inconsistent / failure, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import serialize as ser
from .consistency import check_bce, extreme_marginal_bounds, recover_belief_system
from .errors import CapExceededError, InputError
from .extensions import (
    ProblemFamily,
    RingGame,
    across_problems,
    product_problem,
    ring_check,
)
from .geometry import DEFAULT_CAP, convex_cycle, identified_set, rays_of, vertices, weighted_minkowski
from .model import (
    AUD,
    BINARY_ACTION,
    BINARY_STATE,
    SMALL_STATE,
    TWO_STEP,
    DecisionProblem,
    Distribution,
    _load,
    classify,
    optimal_belief_set,
    parse_distribution,
    parse_problem,
)
from .polytope import lift_direction
from .rational import fmt, normalize_direction
from .rationalizer import (
    CoreViolation,
    core_check,
    experiment_kernel,
    implement_tau,
    menu_measure,
    tau_from_bce,
)
from .support_tests import (
    all_test_functions,
    binary_state_interval,
    bounds_binary_action,
    check_aud,
    check_binary_action,
    check_binary_states,
    check_small_states,
    check_two_step,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
METHODS = ("auto", "lp", "small-states", "aud", "two-step", "binary")
_AUTO = (
    (BINARY_STATE, "binary"),
    (BINARY_ACTION, "binary"),
    (AUD, "aud"),
    (TWO_STEP, "two-step"),
    (SMALL_STATE, "small-states"),
)


# ------------------------------------------------------------ io helpers


def _read(path: str) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return _load(text)


def _need(value, flag: str):
    if value is None:
        raise InputError(f"{flag} is required")
    return value


def _problem(args) -> DecisionProblem:
    return parse_problem(_read(_need(args.problem, "--problem")))


def _prior(args, problem: DecisionProblem) -> Distribution:
    return parse_distribution(_read(_need(args.prior, "--prior")), problem.states)


def _marginal(args, problem: DecisionProblem) -> Distribution:
    if not args.marginal:
        raise InputError("--marginal is required")
    return parse_distribution(_read(args.marginal[0]), problem.actions)


def _emit(args, doc: Any) -> None:
    if args.decimal:
        doc = dict(doc)
        doc["decimal"] = {"approximate": True, "values": ser.decimals(doc)}
    text = ser.dumps(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------ check


def resolve_method(problem: DecisionProblem, method: str) -> str:
    """Pick the most specific characterization for ``auto``; validate others."""
    cls = classify(problem)
    if method == "auto":
        for tag, m in _AUTO:
            if tag in cls.tags:
                return m
        return "lp"
    if method == "aud" and cls.aud is None:
        raise InputError("method aud needs affine utility differences")
    if method == "two-step" and cls.two_step is None:
        raise InputError("method two-step needs two-step utility differences")
    if method == "binary" and problem.n_states != 2 and problem.n_actions != 2:
        raise InputError("method binary needs two states or two actions")
    return method


def run_method(problem: DecisionProblem, prior: Distribution, marginal: Distribution, method: str) -> dict:
    if method == "lp":
        v = check_bce(problem, prior, marginal)
        doc = ser.verdict(v, prior, marginal)
        doc["family"] = "lp"
        doc["exactness"] = "Characterization"
        return doc
    if method == "binary":
        tv = (check_binary_states if problem.n_states == 2 else check_binary_action)(problem, prior, marginal)
    else:
        tv = {
            "small-states": check_small_states,
            "aud": check_aud,
            "two-step": check_two_step,
        }[method](problem, prior, marginal)
    return ser.test_verdict(tv)


def cmd_check(args) -> int:
    problem = _problem(args)
    prior = _prior(args, problem)
    marginal = _marginal(args, problem)
    method = resolve_method(problem, args.method)
    doc = run_method(problem, prior, marginal, method)
    doc["method"] = method
    doc["structure"] = list(classify(problem).tags)
    if args.cross_check and method != "lp":
        lp_consistent = check_bce(problem, prior, marginal).consistent
        doc["cross_check"] = {"lp": lp_consistent, "agree": lp_consistent == doc["consistent"]}
    _emit(args, doc)
    return EXIT_OK if doc["consistent"] else EXIT_FAIL


# ------------------------------------------------------------ facets


def _provenance(problem: DecisionProblem, marginal: Distribution) -> dict[tuple[int, ...], list[str]]:
    tags: dict[tuple[int, ...], list[str]] = {}
    for f in all_test_functions(problem, marginal):
        key = normalize_direction(f.p)
        tags.setdefault(key, [])
        if f.tag not in tags[key]:
            tags[key].append(f.tag)
    return tags


def cmd_facets(args) -> int:
    problem = _problem(args)
    marginal = _marginal(args, problem)
    drop = args.drop if args.drop is not None else 0
    try:
        ident = identified_set(problem, marginal, args.cap, drop)
    except CapExceededError as exc:
        raise InputError(f"{exc}; use 'check --method lp' instead") from None
    prov = _provenance(problem, marginal)
    rays = []
    for r in rays_of(ident):
        full = lift_direction([Fraction(x) for x in r], drop)
        rays.append({"ray": [str(x) for x in r], "full": ser.vec(full),
                     "tags": prov.get(normalize_direction(full), ["refinement"])})
    doc = ser.polytope(ident.hrep, ident.vrep, ident.hull)
    doc.update({
        "coordinates": [s for i, s in enumerate(problem.states) if i != drop],
        "dropped_state": problem.states[drop],
        "facet_count": len(ident.hrep.inequalities),
        "rays": rays,
    })
    _emit(args, doc)
    return EXIT_OK


# ------------------------------------------------------------ bounds


def cmd_bounds(args) -> int:
    problem = _problem(args)
    doc: dict[str, Any] = {}
    if args.prior:
        prior = _prior(args, problem)
        acts = args.actions.split(",") if args.actions else [problem.actions[-1]]
        for a in acts:
            problem.action_index(a)
        lo, hi = extreme_marginal_bounds(problem, prior, acts)
        doc["actions"] = acts
        doc["lp"] = [fmt(lo), fmt(hi)]
        if problem.n_actions == 2 and acts == [problem.actions[1]]:
            lb, ub = bounds_binary_action(problem, prior)
            doc["closed_form"] = [fmt(lb), fmt(ub)]
    if args.marginal:
        marginal = _marginal(args, problem)
        if problem.n_states != 2:
            raise InputError("prior intervals need exactly two states")
        lo, hi = binary_state_interval(problem, marginal)
        doc["prior_interval"] = {"state": problem.states[1], "bounds": [fmt(lo), fmt(hi)]}
    if not doc:
        raise InputError("bounds needs --prior, --marginal, or both")
    _emit(args, doc)
    return EXIT_OK


# ------------------------------------------------------------ rationalizers


def cmd_rationalize(args) -> int:
    problem = _problem(args)
    prior = _prior(args, problem)
    marginal = _marginal(args, problem)
    v = check_bce(problem, prior, marginal)
    doc = ser.verdict(v, prior, marginal)
    if v.consistent:
        tau = tau_from_bce(v.joint, marginal)
        rule = implement_tau(problem, tau, marginal)
        doc.update({
            "beliefs": ser.belief_system(recover_belief_system(v.joint, marginal)),
            "tau": ser.tau(tau),
            "rule": ser.rule(rule),
            "kernel": ser.kernel(experiment_kernel(problem, prior, tau, rule)),
        })
    _emit(args, doc)
    return EXIT_OK if v.consistent else EXIT_FAIL


def cmd_implement_tau(args) -> int:
    problem = _problem(args)
    marginal = _marginal(args, problem)
    tau = ser.parse_tau(_read(_need(args.tau, "--tau")), problem.states)
    menu = menu_measure(problem, tau)
    res = implement_tau(problem, tau, marginal)
    core = core_check(marginal, menu)
    doc: dict[str, Any] = {
        "menu": ser.menu(menu),
        "core": None if core is None else ser.violation(core),
    }
    if isinstance(res, CoreViolation):
        doc["implemented"] = False
        doc["violation"] = ser.violation(res)
    else:
        doc["implemented"] = True
        doc["rule"] = ser.rule(res)
        if args.prior:
            doc["kernel"] = ser.kernel(experiment_kernel(problem, _prior(args, problem), tau, res))
    _emit(args, doc)
    return EXIT_OK if doc["implemented"] else EXIT_FAIL


# ------------------------------------------------------------ extensions


def cmd_across(args) -> int:
    if not args.problems:
        raise InputError("--problems is required")
    problems = [parse_problem(_read(p)) for p in args.problems]
    prod = product_problem(problems)
    prior = parse_distribution(_read(_need(args.prior, "--prior")), prod.states)
    if not args.marginal:
        raise InputError("--marginal is required")
    joint = parse_distribution(_read(args.marginal[0]), prod.actions)
    v = across_problems(problems, joint, prior)
    doc = ser.verdict(v, prior, joint)
    doc["profiles"] = list(prod.actions)
    _emit(args, doc)
    return EXIT_OK if v.consistent else EXIT_FAIL


def parse_ring(doc: Any) -> RingGame:
    data = _load(doc)
    if not isinstance(data, dict) or not {"states", "action_sets", "v1"} <= set(data):
        raise InputError("ring file needs 'states', 'action_sets', 'v1' and 'links'")
    return RingGame(
        tuple(data["states"]),
        tuple(tuple(a) for a in data["action_sets"]),
        tuple(tuple(r) for r in data["v1"]),
        tuple(tuple(tuple(r) for r in t) for t in data.get("links", [])),
    )


def cmd_ring(args) -> int:
    game = parse_ring(_read(_need(args.ring, "--ring")))
    prior = parse_distribution(_read(_need(args.prior, "--prior")), game.states)
    if len(args.marginal) != game.n_players:
        raise InputError(f"pass --marginal once per player ({game.n_players})")
    margs = [parse_distribution(_read(m), acts) for m, acts in zip(args.marginal, game.action_sets)]
    rv = ring_check(game, prior, margs)
    priors = [prior] + margs[:-1]
    doc = {
        "consistent": rv.consistent,
        "failing_link": rv.failing_link,
        "links": [ser.verdict(v, p, m) for v, p, m in zip(rv.links, priors, margs)],
    }
    if rv.witness is not None:
        doc["witness"] = [
            {"profile": [game.action_sets[n][j] for n, j in enumerate(prof)],
             "state": game.states[i], "mass": fmt(w)}
            for (prof, i), w in sorted(rv.witness.items())
        ]
    _emit(args, doc)
    return EXIT_OK if rv.consistent else EXIT_FAIL


def parse_family(doc: Any) -> ProblemFamily:
    data = _load(doc)
    if not isinstance(data, dict) or "theta" not in data:
        raise InputError("family file needs 'theta'")
    base = parse_problem(data["problem"] if "problem" in data else data)
    tables = tuple(tuple(tuple(r) for r in t) for t in data.get("tables", []))
    return ProblemFamily(base, tuple(data["theta"]), data.get("mode", "shift"), tables)


def _sweep_row(job) -> dict:
    theta, problem, prior, marginal = job
    row: dict[str, Any] = {"theta": fmt(theta)}
    if problem.n_actions == 2:
        lb, ub = bounds_binary_action(problem, prior)
        row["lb"], row["ub"] = fmt(lb), fmt(ub)
    if marginal is not None:
        row["consistent"] = check_bce(problem, prior, marginal).consistent
    return row


def cmd_sweep(args) -> int:
    family = parse_family(_read(_need(args.family, "--family")))
    prior = parse_distribution(_read(_need(args.prior, "--prior")), family.base.states)
    marginal = parse_distribution(_read(args.marginal[0]), family.base.actions) if args.marginal else None
    jobs = [(t, p, prior, marginal) for t, p in family.problems()]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    if args.format == "csv":
        buf = io.StringIO()
        fields = list(rows[0])
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        if args.out:
            Path(args.out).write_text(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
    else:
        doc: dict[str, Any] = {"rows": rows, "mode": family.mode}
        if "lb" in rows[0]:
            ordered = sorted(rows, key=lambda r: Fraction(r["theta"]))
            doc["monotone"] = all(
                Fraction(a["lb"]) <= Fraction(b["lb"]) and Fraction(a["ub"]) <= Fraction(b["ub"])
                for a, b in zip(ordered, ordered[1:])
            )
        _emit(args, doc)
    return EXIT_OK


# ------------------------------------------------------------ plot data


def _cycle_doc(points) -> dict:
    return {"exact": ser.mat(points), "decimal": [[ser.decimals(fmt(x)) for x in p] for p in points]}


def cmd_plot_data(args) -> int:
    problem = _problem(args)
    n = problem.n_states
    if n > 3:
        raise InputError("plot data needs two or three states")
    if n < 2:
        raise InputError("plot data needs two or three states")
    drop = n - 1 if n == 3 else 0
    coords = [s for i, s in enumerate(problem.states) if i != drop]
    doc: dict[str, Any] = {"coordinates": coords, "actions": {}}

    def shape(verts):
        if n == 2:
            xs = sorted(v[0] for v in verts)
            return {"interval": [fmt(xs[0]), fmt(xs[-1])],
                    "decimal": [ser.decimals(fmt(xs[0])), ser.decimals(fmt(xs[-1]))]} if xs else {"interval": []}
        return _cycle_doc(convex_cycle(verts))

    for a in problem.actions:
        verts = vertices(optimal_belief_set(problem, a, drop), args.cap).vertices
        doc["actions"][a] = shape(verts)
    if args.marginal:
        marginal = _marginal(args, problem)
        doc["identified_set"] = shape(weighted_minkowski(problem, marginal, args.cap, drop).vertices)
    _emit(args, doc)
    return EXIT_OK


# ------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bceid", description="Exact BCE-consistency toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, problem=True):
        if problem:
            p.add_argument("--problem", help="decision problem JSON file")
        p.add_argument("--prior", help="prior JSON file")
        p.add_argument("--marginal", action="append", default=[], help="action marginal JSON file")
        p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="geometry enumeration cap")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--decimal", action="store_true", help="add approximate decimal renderings")

    p = sub.add_parser("check", help="decide consistency of a prior and an action marginal")
    common(p)
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--cross-check", action="store_true", help="also run the LP and compare")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("facets", help="H-representation and rays of the identified set")
    common(p)
    p.add_argument("--drop", type=int, help="index of the state eliminated for free coordinates")
    p.set_defaults(func=cmd_facets)

    p = sub.add_parser("bounds", help="bounds on action probabilities or on a binary prior")
    common(p)
    p.add_argument("--actions", help="comma-separated action labels (default: last action)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("rationalize", help="witness, posteriors, rule and kernel")
    common(p)
    p.set_defaults(func=cmd_rationalize)

    p = sub.add_parser("implement-tau", help="implement a marginal from a distribution over posteriors")
    common(p)
    p.add_argument("--tau", help="posterior distribution JSON file")
    p.set_defaults(func=cmd_implement_tau)

    p = sub.add_parser("across", help="consistency of a joint marginal across problems")
    common(p, problem=False)
    p.add_argument("--problems", nargs="+", help="decision problem JSON files")
    p.set_defaults(func=cmd_across)

    p = sub.add_parser("ring", help="ring-network game consistency")
    common(p, problem=False)
    p.add_argument("--ring", help="ring game JSON file")
    p.set_defaults(func=cmd_ring)

    p = sub.add_parser("sweep", help="per-parameter bounds and verdicts for a family")
    common(p, problem=False)
    p.add_argument("--family", help="family JSON file")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot-data", help="vertex cycles for two or three states")
    common(p)
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, ValueError, ZeroDivisionError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
