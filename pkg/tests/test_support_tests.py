import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from bceid import lp
from bceid.catalog import abs3, coin, fourstate, hypothesis_test, match3, shift
from bceid.consistency import action_support, check_bce, extreme_marginal_bounds
from bceid.errors import DominatedActionError, StructureError
from bceid.model import DecisionProblem, Distribution, classify
from bceid.rational import NEG_INF, normalize_direction
from bceid.support_tests import (
    BOTH,
    CHARACTERIZATION,
    NECESSARY_ONLY,
    NEITHER,
    UP,
    all_test_functions,
    binary_state_interval,
    bounds_binary_action,
    check_aud,
    check_binary_action,
    check_binary_states,
    check_small_states,
    check_two_step,
    mcv_membership,
    testfns_aud,
    testfns_simplex,
    testfns_two_step,
)
from generators import random_aud, random_problem, random_two_step, rational_distribution, rngs


def dist(domain, *ws):
    return Distribution(tuple(domain), tuple(F(w) for w in ws))


def uniform(domain):
    return Distribution.uniform(domain)


def fns(functions):
    return {f.tag: (f.p, f.q) for f in functions}


class TestSimplexFamily:
    def test_match3_belief_martingale(self):
        p = match3()
        nu = uniform(p.actions)
        by_tag = fns(testfns_simplex(p, nu))
        for k, s in enumerate(p.states):
            d, q = by_tag[f"BM {s}"]
            assert sum(x * w for x, w in zip(q, nu.weights)) == F(-1, 9)

    def test_match3_payoff_martingale(self):
        p = match3()
        nu = uniform(p.actions)
        heights = {}
        for f in testfns_simplex(p, nu):
            if f.tag.startswith("PM"):
                heights[f.p] = sum(x * w for x, w in zip(f.q, nu.weights))
        # every pairwise difference μ₀(ω_j) − μ₀(ω_k) is bounded by 1/2
        assert len(heights) == 6
        assert set(heights.values()) == {F(1, 2)}

    def test_single_action(self):
        p = DecisionProblem(("w1", "w2", "w3"), ("a",), ((1, 2, 3),))
        out = testfns_simplex(p, uniform(p.actions))
        assert [f.tag for f in out] == ["BM w1", "BM w2", "BM w3"]
        assert all(f.q == (0,) for f in out)

    def test_fourstate_pair(self):
        p = fourstate()
        f = fns(testfns_simplex(p, uniform(p.actions)))["PM (a2,a1)"]
        assert f[0] == (9, 5, 1, -5)
        assert sum(x * w for x, w in zip(f[1], uniform(p.actions).weights)) == F(9, 2)

    def test_dominated_support(self):
        p = DecisionProblem(("w1", "w2"), ("a1", "a2"), ((1, 1), (0, 0)))
        with pytest.raises(DominatedActionError):
            testfns_simplex(p, uniform(p.actions))


class TestSmallStates:
    def test_uniform_consistent(self):
        p = match3()
        v = check_small_states(p, uniform(p.states), uniform(p.actions))
        assert v.consistent and v.exactness == CHARACTERIZATION

    def test_concentrated_prior(self):
        p = match3()
        v = check_small_states(p, dist(p.states, F(1, 20), F(1, 20), F(9, 10)), uniform(p.actions))
        assert not v.consistent
        tags = {x.function.tag for x in v.violated}
        assert {"BM w1", "BM w2"} <= tags

    def test_four_states_is_necessary_only(self):
        p = fourstate()
        prior = dist(p.states, 0, F(5, 6), 0, F(1, 6))
        v = check_small_states(p, prior, uniform(p.actions))
        assert v.consistent and v.exactness == NECESSARY_ONLY
        assert not check_bce(p, prior, uniform(p.actions)).consistent


class TestBinaryStates:
    def test_coin_interval(self):
        p = coin()
        assert binary_state_interval(p, uniform(p.actions)) == (F(1, 4), F(3, 4))
        assert check_binary_states(p, dist(p.states, F(1, 4), F(3, 4)), uniform(p.actions)).consistent
        assert not check_binary_states(p, dist(p.states, F(1, 5), F(4, 5)), uniform(p.actions)).consistent

    @pytest.mark.parametrize("theta", [F(-1, 2), F(0), F(1, 3), F(1, 2)])
    def test_shift_interval(self, theta):
        p = shift(theta)
        for k in range(5):
            q = F(k, 4)
            lo, hi = binary_state_interval(p, dist(p.actions, 1 - q, q))
            assert lo == max(F(0), q * (1 - theta) / 2)
            assert hi == min(F(1), 1 - (1 - q) * (1 + theta) / 2)

    def test_degenerate_marginal(self):
        p = coin()
        assert binary_state_interval(p, dist(p.actions, 1, 0)) == (0, F(1, 2))

    def test_requires_two_states(self):
        with pytest.raises(StructureError):
            check_binary_states(match3(), uniform(match3().states), uniform(match3().actions))


class TestAudFamily:
    def test_fourstate_listing(self):
        out = testfns_aud(fourstate())
        expected_p = {
            (-9, -5, -1, 5), (-9, -5, -1, -1), (-9, -5, -5, -5), (-9, -9, -9, -9),
            (9, 5, 1, -5), (5, 5, 1, -5), (1, 1, 1, -5), (-5, -5, -5, -5),
        }
        assert {f.p for f in out} == expected_p
        ups = {f.q for f in out if f.tag.startswith("AUD-up")}
        downs = {f.q for f in out if f.tag.startswith("AUD-down")}
        assert ups == {(0, 5), (-1, -1), (-5, -5), (-9, -9)}
        assert downs == {(9, 0), (5, 0), (1, 0), (-5, -5)}

    def test_constant_difference(self):
        p = DecisionProblem(("w1", "w2", "w3"), ("a1", "a2"), ((0, 0, 0), (1, 1, 1)))
        assert all(len(set(f.p)) == 1 for f in testfns_aud(p))

    def test_shift_reproduces_interval(self):
        theta = F(1, 3)
        p = shift(theta)
        for k in range(9):
            for m in range(9):
                prior = dist(p.states, 1 - F(m, 8), F(m, 8))
                nu = dist(p.actions, 1 - F(k, 8), F(k, 8))
                q, mu1 = F(k, 8), F(m, 8)
                inside = q * (1 - theta) / 2 <= mu1 <= 1 - (1 - q) * (1 + theta) / 2
                assert check_aud(p, prior, nu).consistent is inside

    def test_fourstate_examples(self):
        p = fourstate()
        assert check_aud(p, uniform(p.states), uniform(p.actions)).consistent
        assert check_aud(p, dist(p.states, 0, 0, 0, 1), dist(p.actions, 0, 1)).consistent
        v = check_aud(p, dist(p.states, 1, 0, 0, 0), dist(p.actions, 0, 1))
        assert not v.consistent and "AUD-down w1" in {x.function.tag for x in v.violated}

    def test_requires_aud(self):
        with pytest.raises(StructureError):
            testfns_aud(match3())

    @settings(max_examples=40, deadline=None)
    @given(rngs)
    def test_monotone_in_d_order(self, rng):
        p = random_aud(rng, rng.randint(2, 5), rng.randint(2, 4))
        order = classify(p).aud.order
        for f in testfns_aud(p):
            seq = [f.p[i] for i in order]
            if f.tag.startswith("AUD-up"):
                assert seq == sorted(seq)
            else:
                assert seq == sorted(seq, reverse=True)


class TestBinaryAction:
    def test_fourstate_matches_lp(self):
        p = fourstate()
        for prior in [uniform(p.states), dist(p.states, 0, F(5, 6), 0, F(1, 6))]:
            assert check_binary_action(p, prior, uniform(p.actions)).consistent is check_bce(p, prior, uniform(p.actions)).consistent

    def test_requires_two_actions(self):
        with pytest.raises(StructureError):
            check_binary_action(match3(), uniform(match3().states), uniform(match3().actions))

    def test_shift_bounds(self):
        p = shift(0)
        assert bounds_binary_action(p, dist(p.states, F(1, 4), F(3, 4))) == (F(1, 2), 1)

    def test_indifferent_prior(self):
        p = fourstate()
        # Σ μ₀ d = 0 at (0, 1/2, 0, 1/2)
        assert bounds_binary_action(p, dist(p.states, 0, F(1, 2), 0, F(1, 2))) == (0, 1)

    @pytest.mark.parametrize("c1, c2", [(2, 1), (1, 1), (1, 3), (F(1, 2), 5)])
    def test_hypothesis_testing_interval(self, c1, c2):
        p = hypothesis_test(c1, c2, [True, True, False])
        prior = dist(p.states, F(1, 2), F(1, 4), F(1, 4))
        m = F(3, 4)
        r = F(c2) / F(c1)
        lo = max(F(0), min(F(1), m * (1 + r) - r))
        hi = max(F(0), min(F(1), m * (1 + 1 / r)))
        assert bounds_binary_action(p, prior) == (lo, hi)

    @settings(max_examples=60, deadline=None)
    @given(rngs)
    def test_matches_lp_bounds(self, rng):
        p = random_problem(rng, rng.randint(1, 5), 2)
        prior = rational_distribution(rng, p.states)
        assert bounds_binary_action(p, prior) == extreme_marginal_bounds(p, prior, ["a2"])


class TestTwoStep:
    def test_abs3_heights(self):
        by_tag = fns(testfns_two_step(abs3()))
        assert by_tag["TwoStep-up 1"][1] == (0, 1, 1)
        assert by_tag["TwoStep-down 1"][1] == (1, 0, 0)
        assert by_tag["TwoStep-up 2"][1] == (0, 0, 1)
        assert by_tag["TwoStep-down 2"][1] == (1, 1, 0)

    def test_abs3_uniform(self):
        p = abs3()
        assert check_two_step(p, uniform(p.states), uniform(p.actions)).consistent

    def test_abs3_boundaries(self):
        p = abs3()
        nu = uniform(p.actions)
        for mu1, ok in [(F(1, 6), True), (F(1, 7), False), (F(2, 3), True), (F(7, 10), False)]:
            rest = 1 - mu1
            prior = dist(p.states, mu1, rest / 2, rest / 2)
            assert check_two_step(p, prior, nu).consistent is ok
            assert check_bce(p, prior, nu).consistent is ok

    def test_abs3_point_marginal(self):
        p = abs3()
        nu = dist(p.actions, 0, 1, 0)
        for prior, ok in [((F(1, 2), 0, F(1, 2)), True), ((F(3, 5), 0, F(2, 5)), False), ((F(1, 4), F(1, 2), F(1, 4)), True)]:
            assert check_two_step(p, dist(p.states, *prior), nu).consistent is ok

    def test_two_action_overlap_with_aud(self):
        p = DecisionProblem(("w1", "w2", "w3"), ("a1", "a2"), ((0, 0, 0), (-2, 3, 3)))
        aud = {normalize_direction(f.p): f for f in testfns_aud(p)}
        for f in testfns_two_step(p):
            g = aud[normalize_direction(f.p)]
            assert g.q == f.q or [x * f.p[0] / g.p[0] for x in g.q] == list(f.q)

    def test_requires_two_step(self):
        with pytest.raises(StructureError):
            testfns_two_step(fourstate())


class TestMcvMembership:
    def test_examples(self):
        p = fourstate()
        assert mcv_membership(p, (-9, -5, -1, 5)) == UP
        assert mcv_membership(p, (1, 1, 1, 1)) == BOTH
        assert mcv_membership(p, (0, 1, 0, -1)) == NEITHER

    def test_requires_monotone_concave(self):
        with pytest.raises(StructureError):
            mcv_membership(match3(), (1, 0, 0))

    def test_aud_family_is_in_the_envelopes(self):
        p = fourstate()
        for f in testfns_aud(p):
            expected = UP if f.tag.startswith("AUD-up") else "Down"
            assert mcv_membership(p, f.p) in (expected, BOTH)


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(rngs)
    def test_heights_are_exact_maxima(self, rng):
        if rng.random() < 0.5:
            p = random_aud(rng, rng.randint(2, 5), rng.randint(2, 4))
            family = testfns_aud(p)
        else:
            p = random_two_step(rng, rng.randint(2, 5), rng.randint(2, 4))
            family = testfns_two_step(p)
        for f in family:
            for a in range(p.n_actions):
                h = action_support(p, a, tuple(f.p))
                if h != NEG_INF:
                    assert f.q[a] == h

    @settings(max_examples=40, deadline=None)
    @given(rngs)
    def test_necessity(self, rng):
        kind = rng.randrange(3)
        I, J = rng.randint(2, 5), rng.randint(2, 4)
        p = [random_problem(rng, I, J), random_aud(rng, I, J), random_two_step(rng, I, J)][kind]
        nu = rational_distribution(rng, p.actions)
        mu = rational_distribution(rng, p.states)
        if not check_bce(p, mu, nu).consistent:
            return
        for f in all_test_functions(p, nu):
            assert f.slack(mu, nu) >= 0

    @settings(max_examples=25, deadline=None)
    @given(rngs)
    def test_characterizations_agree_with_lp(self, rng):
        I, J = rng.randint(2, 5), rng.randint(2, 4)
        cases = [
            (random_aud(rng, I, J), check_aud),
            (random_two_step(rng, I, J), check_two_step),
            (random_problem(rng, 3, J), check_small_states),
            (random_problem(rng, 2, J), check_binary_states),
            (random_problem(rng, I, 2), check_binary_action),
        ]
        for p, check in cases:
            for _ in range(5):
                mu = rational_distribution(rng, p.states)
                nu = rational_distribution(rng, p.actions)
                expected = check_bce(p, mu, nu)
                if expected.dominated:
                    continue
                v = check(p, mu, nu)
                assert v.exactness == CHARACTERIZATION
                assert v.consistent is expected.consistent


def test_necessary_only_prior_found_by_lp():
    """An LP over priors finds one that passes every simplex test yet is inconsistent."""
    p = fourstate()
    nu = uniform(p.actions)
    family = testfns_simplex(p, nu)
    A_ub = [list(f.p) for f in family]
    b_ub = [sum(q * w for q, w in zip(f.q, nu.weights)) for f in family]
    # minimize 2μ₃ + 5μ₄, the missing facet direction
    res = lp.solve([0, 0, 2, 5], A_ub, b_ub, [[1, 1, 1, 1]], [1])
    assert res.status == lp.OPTIMAL and res.value < F(5, 4)
    prior = Distribution(p.states, res.x)
    assert check_small_states(p, prior, nu).consistent
    assert not check_bce(p, prior, nu).consistent
