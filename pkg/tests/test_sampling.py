"""RNG streams, table/sequential samplers, thinning, TV estimators."""

import math
from fractions import Fraction

import numpy as np
import pytest

from socrs.counting import CountingOracle
from socrs.dist import ExplicitDistribution, GibbsDistribution
from socrs.env import k_uniform_environment, matching_environment
from socrs.sampling import (ConditionalClampError, RngStream, _clamp,
                            empirical_tv, sample_explicit, sample_sequential,
                            thin, tv_multinomial_sigma)


def test_rng_stream_reproducible():
    a = RngStream(123)
    b = RngStream(123)
    assert [float(a.uniform()) for _ in range(5)] == \
           [float(b.uniform()) for _ in range(5)]
    assert a.counter == 5


def test_rng_counter_reconstruction():
    a = RngStream(9)
    head = [float(a.uniform()) for _ in range(10)]
    mid = RngStream(9, counter=4)
    assert [float(mid.uniform()) for _ in range(6)] == head[4:]


def test_rng_streams_differ():
    a = RngStream(1, stream=0)
    b = RngStream(1, stream=1)
    assert float(a.uniform()) != float(b.uniform())
    c = a.spawn(0)
    d = a.spawn(1)
    assert float(c.uniform()) != float(d.uniform())


def test_clamp_slack():
    assert _clamp(1.0 + 5e-10) == 1.0
    assert _clamp(-5e-10) == 0.0
    with pytest.raises(ConditionalClampError):
        _clamp(1.0 + 1e-6)


def test_sample_explicit_frequencies():
    env = k_uniform_environment(2, 2)
    d = ExplicitDistribution(env, {frozenset(): 0.25, frozenset({0}): 0.25,
                                   frozenset({1}): 0.25, frozenset({0, 1}): 0.25})
    rng = RngStream(2)
    counts = {}
    N = 100_000
    for _ in range(N):
        S = sample_explicit(d, rng)
        counts[S] = counts.get(S, 0) + 1
    for S in d.sets():
        assert abs(counts[S] / N - 0.25) < 0.01


def test_sequential_sampler_matches_gibbs_law():
    edges = [(0, 1), (1, 2), (2, 3)]
    env = matching_environment(edges, 4)
    dist = GibbsDistribution(env, [0.4, 0.7, 0.5])
    oracle = CountingOracle("enumeration", env=env)
    rng = RngStream(11)
    N = 40_000
    samples = [sample_sequential(oracle, [0.4, 0.7, 0.5], rng) for _ in range(N)]
    ref = dist.to_explicit()
    tv = empirical_tv(samples, ref)
    assert tv <= 3 * tv_multinomial_sigma(ref, N)


def test_thin_marginals():
    rng = RngStream(4)
    tau = [0.2, 0.8, 0.5]
    S = frozenset({0, 1, 2})
    N = 50_000
    hits = [0, 0, 0]
    for _ in range(N):
        out = thin(S, tau, rng)
        assert out <= S
        for e in out:
            hits[e] += 1
    for e in range(3):
        assert abs(hits[e] / N - tau[e]) < 0.01


def test_empirical_tv_zero_for_exact_match():
    env = k_uniform_environment(1, 1)
    d = ExplicitDistribution(env, {frozenset(): 0.5, frozenset({0}): 0.5})
    samples = [frozenset(), frozenset({0})] * 500
    assert empirical_tv(samples, d) == 0.0
