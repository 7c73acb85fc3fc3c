"""Random sampling: RNG streams, explicit-table sampling, sequential
counting-to-sampling, independent thinning, and empirical TV distance.
"""

from __future__ import annotations

import math

import numpy as np


class ConditionalClampError(RuntimeError):
    """A computed conditional escaped [0,1] by more than the slack tolerance."""


CLAMP_SLACK = 1e-9


class RngStream:
    """Deterministic, replayable random stream.

    Identical (seed, stream, counter) triples yield identical draws; distinct
    stream ids are independent.  The counter records how many uniforms have
    been consumed so a stream can be reconstructed mid-sequence.
    """

    def __init__(self, seed, stream=0, counter=0):
        self.seed = int(seed)
        self.stream = int(stream)
        self._gen = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))))
        self.counter = 0
        if counter:
            self.uniform(counter)

    def uniform(self, size=None):
        self.counter += 1 if size is None else int(np.prod(size))
        return self._gen.random(size)

    def spawn(self, i):
        """Independent child stream with a deterministic id."""
        return RngStream(self.seed, stream=(self.stream << 16) + 1 + i)


def _clamp(p):
    if p < -CLAMP_SLACK or p > 1.0 + CLAMP_SLACK:
        raise ConditionalClampError(f"conditional {p} outside [0,1] beyond slack")
    return min(max(p, 0.0), 1.0)


def sample_explicit(dist, rng):
    """Inverse-CDF draw over the deterministic support order."""
    u = float(rng.uniform())
    acc = 0.0
    sets = dist.sets()
    for S in sets:
        acc += float(dist.support[S])
        if u < acc:
            return S
    return sets[-1]


def sample_sequential(oracle, w, rng):
    """Visit elements in ascending order; include element k with probability
    g_{J, I+k}(w) / g_{J, I}(w).  Exact in rational mode.
    """
    I, J = [], []
    for k in range(oracle.n):
        num = oracle.constrained_count(w, I + [k], J)
        den = oracle.constrained_count(w, I, J)
        if float(den) == 0.0:
            raise RuntimeError("impossible prefix: zero denominator in sequential sampler")
        p = _clamp(float(num) / float(den) if isinstance(den, float) else float(num / den))
        if float(rng.uniform()) < p:
            I.append(k)
        else:
            J.append(k)
    return frozenset(I)


def thin(S, tau, rng):
    """Keep each element of S independently with probability tau_e."""
    out = set()
    for e in sorted(S):
        if float(rng.uniform()) < float(tau[e]):
            out.add(e)
    return frozenset(out)


def empirical_tv(samples, reference):
    """(1/2) sum over sets |freq(S) - ref(S)|."""
    counts = {}
    for S in samples:
        counts[frozenset(S)] = counts.get(frozenset(S), 0) + 1
    N = len(samples)
    keys = set(counts) | set(reference.support)
    return 0.5 * sum(abs(counts.get(S, 0) / N - float(reference.support.get(S, 0.0)))
                     for S in keys)


def tv_multinomial_sigma(reference, N):
    """One-sigma bound on E-scale fluctuations of empirical TV:
    (1/2) sum_S sqrt(p_S (1-p_S) / N)."""
    tot = 0.0
    for p in reference.support.values():
        p = float(p)
        tot += math.sqrt(max(p * (1.0 - p), 0.0) / N)
    return 0.5 * tot
