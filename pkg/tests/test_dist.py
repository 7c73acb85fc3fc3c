"""Witness distributions, stationary verification, and the exact LP."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from socrs.dist import (ExplicitDistribution, GibbsDistribution,
                        NullConditioningError, addability_prob,
                        conditional_without, solve_stationary_lp_exact,
                        symmetric_uniform_bound, verify_stationary_lp)
from socrs.env import k_uniform_environment, matching_environment
from socrs.simplex import InfeasibleLP, UnboundedLP, solve_lp


def triangle_env():
    return matching_environment([(0, 1), (1, 2), (0, 2)], 3)


def test_explicit_distribution_validation():
    env = triangle_env()
    ExplicitDistribution(env, {frozenset(): Fraction(1, 2),
                               frozenset({0}): Fraction(1, 2)})
    with pytest.raises(ValueError):
        ExplicitDistribution(env, {frozenset(): 0.5, frozenset({0}): 0.6})
    with pytest.raises(Exception):
        ExplicitDistribution(env, {frozenset({0, 1}): 1.0})   # infeasible set


def test_explicit_marginal_and_order():
    env = triangle_env()
    d = ExplicitDistribution(env, {frozenset(): Fraction(1, 4),
                                   frozenset({0}): Fraction(1, 4),
                                   frozenset({1}): Fraction(1, 2)})
    assert d.marginal(0) == Fraction(1, 4)
    assert d.marginal(2) == 0
    assert d.sets() == sorted(d.sets(), key=lambda S: (len(S), sorted(S)))


def test_gibbs_normalization_and_rho():
    env = triangle_env()
    g = GibbsDistribution(env, [Fraction(1, 2), Fraction(1), Fraction(2)])
    tab = g.to_explicit()
    assert sum(tab.support.values()) == 1
    Z = 1 + Fraction(1, 2) + 1 + 2
    assert tab.prob(frozenset({0})) == Fraction(1, 2) / Z
    assert g.rho[0] == Fraction(1, 2) / (1 + Fraction(1, 2))


def test_conditional_without_gibbs_is_rho_or_zero():
    env = triangle_env()
    g = GibbsDistribution(env, [Fraction(1, 3)] * 3)
    rho = Fraction(1, 3) / (1 + Fraction(1, 3))
    assert conditional_without(g, 0, frozenset()) == rho
    # T = {1} blocks edge 0 (they share vertex 1)
    assert conditional_without(g, 0, frozenset({1})) == 0


def test_conditional_without_explicit_matches_ratio():
    env = triangle_env()
    d = ExplicitDistribution(env, {frozenset(): Fraction(1, 2),
                                   frozenset({0}): Fraction(1, 4),
                                   frozenset({1}): Fraction(1, 4)})
    # P[0 in S | S_-0 = {}] = P[{0}] / (P[{}] + P[{0}])
    assert conditional_without(d, 0, frozenset()) == Fraction(1, 3)
    with pytest.raises(NullConditioningError):
        conditional_without(d, 0, frozenset({2}))


def test_addability_factorization_identity():
    # P[e in S] = rho_e * P[S_-e + e feasible]
    env = triangle_env()
    g = GibbsDistribution(env, [Fraction(2, 5), Fraction(1, 3), Fraction(3, 4)])
    tab = g.to_explicit()
    for e in range(3):
        add, residual = addability_prob(g, e)
        assert residual == 0
        assert tab.marginal(e) == g.rho[e] * add


def test_verify_stationary_lp_passes_and_fails():
    env = triangle_env()
    x = [Fraction(3, 10)] * 3
    g = GibbsDistribution(env, [Fraction(3, 10)] * 3)   # rho = 3/13 < 3/10
    rep = verify_stationary_lp(g, x, Fraction(1, 3))
    assert not rep.violated_caps
    # selectability here: marginal / x
    tab = g.to_explicit()
    alpha_true = min(tab.marginal(e) / x[e] for e in range(3))
    assert rep.passes(alpha_true, tol=0)
    assert not rep.passes(float(alpha_true) + 1e-6, tol=0)
    # caps break when rho exceeds x
    g_bad = GibbsDistribution(env, [Fraction(1)] * 3)   # rho = 1/2 > 3/10
    rep_bad = verify_stationary_lp(g_bad, x, Fraction(1, 3))
    assert rep_bad.violated_caps and rep_bad.max_cap_excess > 0


def test_simplex_basic():
    # maximize x + y subject to x + 2y <= 4, 3x + y <= 6, x,y >= 0
    c = [Fraction(1), Fraction(1)]
    A_ub = [[Fraction(1), Fraction(2)], [Fraction(3), Fraction(1)]]
    b_ub = [Fraction(4), Fraction(6)]
    opt, z = solve_lp(c, A_ub, b_ub)
    assert opt == Fraction(14, 5)
    assert list(z) == [Fraction(8, 5), Fraction(6, 5)]
    with pytest.raises(InfeasibleLP):
        solve_lp([Fraction(1)], A_ub=[[Fraction(1)]], b_ub=[Fraction(-1)])
    with pytest.raises(UnboundedLP):
        solve_lp([Fraction(1)], A_ub=[[Fraction(-1)]], b_ub=[Fraction(1)])


def test_lp_exact_single_element_and_1_uniform():
    env1 = k_uniform_environment(1, 1)
    a, wit = solve_stationary_lp_exact(env1, [Fraction(1, 2)])
    assert a == 1
    env2 = k_uniform_environment(2, 1)
    a2, wit2 = solve_stationary_lp_exact(env2, [Fraction(1, 2), Fraction(1, 2)])
    # symmetric instance: LP optimum matches the binomial-ratio bound
    assert a2 == symmetric_uniform_bound(2, 1, Fraction(1, 2)) == Fraction(2, 3)
    # the witness is itself a valid stationary distribution at alpha
    rep = verify_stationary_lp(wit2, [Fraction(1, 2)] * 2, a2)
    assert rep.passes(a2, tol=0) and not rep.violated_caps


def test_lp_round_trip_on_random_instance():
    from socrs.generators import gen_instance
    env, x, _ = gen_instance("random-graph", seed=2, n_edges=5)
    xr = [Fraction(v).limit_denominator(100) for v in x]
    a, wit = solve_stationary_lp_exact(env, xr)
    rep = verify_stationary_lp(wit, xr, a)
    assert rep.passes(a, tol=0)
    assert not rep.violated_caps
    assert 0 < a <= 1


def test_symmetric_uniform_bound_known_value():
    assert symmetric_uniform_bound(4, 2, Fraction(1, 2)) == Fraction(8, 11)
    # k = n means everything fits: bound 1
    assert symmetric_uniform_bound(3, 3, Fraction(1, 2)) == 1


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(2, 6),
       st.fractions(min_value=Fraction(1, 10), max_value=Fraction(9, 10)))
def test_symmetric_bound_in_unit_interval(k, n, q):
    if k > n:
        return
    b = symmetric_uniform_bound(n, k, q)
    assert 0 < b <= 1
