"""Weighted generating-polynomial oracles.

A CountingOracle evaluates Z(w) = sum over the relevant set family of
prod_{e in S} w_e, per-element marginal sums, constrained sums (pinned
include/exclude blocks via forward-difference interpolation), and the
coefficient extraction used for thinned base measures.

Two precision modes:
  * "double": partition/marginal_sum return log-magnitudes (float, -inf
    for zero); constrained_count/thinned_mass return plain floats since the
    interpolation sums are signed.
  * "rational": everything returns exact rationals.
"""

from __future__ import annotations

import math
from math import comb, factorial

import numpy as np

from ._rat import R, as_rational
from .env import EnumerationBudgetError

MATCHING_MEMO_CAP = 1_000_000
DOUBLE_ZERO_FLOOR = 1e-300


class CountingOverflowError(OverflowError):
    """Double-mode value exceeded float range; rerun in exact-rational mode."""


class SingularRepresentationError(RuntimeError):
    """A determinantal representation with singular A A^T was supplied."""


# ---------------------------------------------------------------------------
# determinants
# ---------------------------------------------------------------------------

def det_bareiss(M):
    """Fraction-free Bareiss determinant over exact numbers."""
    M = [row[:] for row in M]
    n = len(M)
    if n == 0:
        return R(1)
    sign = 1
    prev = R(1)
    for k in range(n - 1):
        if M[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if piv is None:
                return R(0)
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev
            M[i][k] = R(0)
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def det_double(M):
    """Partial-pivot LU determinant for float matrices."""
    A = np.array(M, dtype=float)
    n = A.shape[0]
    if n == 0:
        return 1.0
    sign, logdet = np.linalg.slogdet(A)
    if sign == 0:
        return 0.0
    val = sign * math.exp(logdet)
    return val


# ---------------------------------------------------------------------------
# base measures
# ---------------------------------------------------------------------------

class BaseMeasure:
    """A full-support probability measure on the bases of a matroid.

    kinds: "explicit-table" (normalized mass table), "determinantal"
    (mu0(B) proportional to det(A_B)^2), "uniform-spanning-tree".
    """

    def __init__(self, kind, matroid, table=None, A=None):
        self.kind = kind
        self.matroid = matroid
        self.A = None
        if kind == "explicit-table":
            total = sum(table.values())
            # normalization is exact when the masses are rationals
            self.table = {frozenset(B): v / total for B, v in table.items()}
        elif kind == "determinantal":
            self.A = [list(map(as_rational, row)) for row in A]
            gram = _mat_mul_t(self.A, self.A)
            if det_bareiss(gram) == 0:
                raise SingularRepresentationError("A A^T is singular")
        elif kind == "uniform-spanning-tree":
            if matroid.variant != "graphic":
                raise ValueError("uniform-spanning-tree needs a graphic matroid")
        else:
            raise ValueError(f"unknown base measure kind {kind}")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def uniform_on_bases(matroid):
        if matroid.variant == "graphic":
            return BaseMeasure("uniform-spanning-tree", matroid)
        bases = matroid.bases()
        return BaseMeasure("explicit-table", matroid,
                           table={B: R(1, len(bases)) for B in bases})

    @staticmethod
    def determinantal(A):
        from .env import Matroid
        m = Matroid.linear([[_ratf(v) for v in row] for row in A])
        return BaseMeasure("determinantal", m, A=A)

    @staticmethod
    def explicit(matroid, table):
        return BaseMeasure("explicit-table", matroid, table=table)

    def enumerate_bases(self):
        if self.kind == "explicit-table":
            return sorted(self.table, key=lambda B: tuple(sorted(B)))
        return self.matroid.bases()

    def mass(self, B):
        """Normalized mu0(B)."""
        B = frozenset(B)
        if self.kind == "explicit-table":
            return self.table.get(B, 0)
        if self.kind == "uniform-spanning-tree":
            bases = self.matroid.bases()
            return R(1, len(bases)) if B in set(bases) else R(0)
        # determinantal
        cols = sorted(B)
        sub = [[row[c] for c in cols] for row in self.A]
        gram = _mat_mul_t(sub, sub)
        num = det_bareiss(gram)
        den = det_bareiss(_mat_mul_t(self.A, self.A))
        return num / den

    def to_table(self):
        return {B: self.mass(B) for B in self.enumerate_bases()}


def _ratf(v):
    from fractions import Fraction
    return Fraction(v) if not isinstance(v, float) else Fraction(v)


def _mat_mul_t(A, B):
    """A @ B^T for row-major exact matrices."""
    return [[sum(a * b for a, b in zip(ra, rb)) for rb in B] for ra in A]


# ---------------------------------------------------------------------------
# the oracle
# ---------------------------------------------------------------------------

_ENV_BACKENDS = {"enumeration", "matching-recursion", "ksym-dp"}
_BASE_BACKENDS = {"enumeration", "matrix-tree", "cauchy-binet", "tabulated-base-measure"}


class CountingOracle:
    def __init__(self, backend, env=None, base=None, mode="double"):
        if mode not in ("double", "rational"):
            raise ValueError("mode must be 'double' or 'rational'")
        self.backend = backend
        self.env = env
        self.base = base
        self.mode = mode

        if base is not None:
            if backend not in _BASE_BACKENDS:
                raise ValueError(f"backend {backend} not valid for base measures")
            self.n = base.matroid.n
        elif env is not None:
            if backend not in _ENV_BACKENDS:
                raise ValueError(f"backend {backend} not valid for environments")
            if backend == "matching-recursion" and "edges" not in env.meta:
                raise ValueError("matching-recursion needs a graph environment")
            if backend == "ksym-dp" and env.kind != "k-uniform":
                raise ValueError("ksym-dp needs a k-uniform environment")
            self.n = env.n
        else:
            raise ValueError("need an env or a base measure")

        self._sets = None           # enumeration cache: list of frozensets
        self._masks = None          # and numpy masks/incidence for double mode

    # -- enumeration support ---------------------------------------------

    def _family(self):
        if self._sets is None:
            if self.base is not None:
                if self.base.kind == "explicit-table":
                    self._sets = self.base.enumerate_bases()
                    self._weights0 = [self.base.table[B] for B in self._sets]
                else:
                    self._sets = self.base.enumerate_bases()
                    self._weights0 = [self.base.mass(B) for B in self._sets]
            else:
                self._sets = self.env.enumerate_feasible()
                self._weights0 = [R(1)] * len(self._sets)
        return self._sets, self._weights0

    # -- core evaluation: plain value in rational mode, log in double -----

    def _g_rational(self, w):
        w = [as_rational(v) for v in w]
        if self.backend == "enumeration" or self.backend == "tabulated-base-measure":
            sets, m0 = self._family()
            total = R(0)
            for S, mu in zip(sets, m0):
                t = as_rational(mu)
                for e in S:
                    t *= w[e]
                total += t
            return total
        if self.backend == "matching-recursion":
            return _matching_partition(self.env.meta["edges"], w, R(1), R(0))
        if self.backend == "ksym-dp":
            k = self.env.meta["k"]
            return _esym_truncated_sum(w, k, R(1), R(0))
        if self.backend == "matrix-tree":
            return _matrix_tree_g(self.base, w, exact=True)
        if self.backend == "cauchy-binet":
            return _cauchy_binet_g(self.base, w, exact=True)
        raise AssertionError(self.backend)

    def _g_log(self, w):
        """log of the generating value, -inf for zero (double mode)."""
        w = np.asarray(w, dtype=float)
        if self.backend in ("enumeration", "tabulated-base-measure"):
            sets, m0 = self._family()
            logs = []
            for S, mu in zip(sets, m0):
                mu = float(mu)
                if mu == 0.0:
                    continue
                acc = math.log(mu)
                ok = True
                for e in S:
                    if w[e] <= 0.0:
                        ok = False
                        break
                    acc += math.log(w[e])
                if ok:
                    logs.append(acc)
            if not logs:
                return -math.inf
            m = max(logs)
            return m + math.log(sum(math.exp(v - m) for v in logs))
        if self.backend == "matching-recursion":
            val = _matching_partition(self.env.meta["edges"], list(map(float, w)), 1.0, 0.0)
            return math.log(val) if val > 0 else -math.inf
        if self.backend == "ksym-dp":
            val = _esym_truncated_sum(list(map(float, w)), self.env.meta["k"], 1.0, 0.0)
            return math.log(val) if val > 0 else -math.inf
        if self.backend == "matrix-tree":
            val = _matrix_tree_g(self.base, list(map(float, w)), exact=False)
            return math.log(val) if val > 0 else -math.inf
        if self.backend == "cauchy-binet":
            val = _cauchy_binet_g(self.base, list(map(float, w)), exact=False)
            return math.log(val) if val > 0 else -math.inf
        raise AssertionError(self.backend)

    def _g_plain(self, w):
        """Plain (linear-scale) value in the current mode."""
        if self.mode == "rational":
            return self._g_rational(w)
        lg = self._g_log(w)
        if lg == -math.inf:
            return 0.0
        if lg > 700:
            raise CountingOverflowError("partition value overflows double; use rational mode")
        return math.exp(lg)

    # -- public operations -------------------------------------------------

    def partition(self, w):
        self._check_w(w)
        if self.mode == "rational":
            return self._g_rational(w)
        return self._g_log(w)

    def marginal_sum(self, w, e):
        """Z restricted to sets containing e (= w_e dZ/dw_e)."""
        self._check_w(w)
        if self.backend == "matching-recursion":
            edges = self.env.meta["edges"]
            u, v = edges[e]
            keep = [i for i in range(len(edges)) if i != e
                    and u not in edges[i] and v not in edges[i]]
            sub = {i: edges[i] for i in keep}
            if self.mode == "rational":
                w = [as_rational(x) for x in w]
                return w[e] * _matching_partition_sub(sub, w, R(1), R(0))
            val = _matching_partition_sub(sub, list(map(float, w)), 1.0, 0.0)
            return (math.log(float(w[e])) + math.log(val)) if val > 0 and w[e] > 0 else -math.inf
        if self.backend == "ksym-dp":
            k = self.env.meta["k"]
            rest = [w[i] for i in range(self.n) if i != e]
            if self.mode == "rational":
                rest = [as_rational(x) for x in rest]
                return as_rational(w[e]) * _esym_truncated_sum(rest, k - 1, R(1), R(0))
            val = _esym_truncated_sum(list(map(float, rest)), k - 1, 1.0, 0.0)
            return (math.log(float(w[e])) + math.log(val)) if val > 0 and w[e] > 0 else -math.inf
        if self.backend in ("enumeration", "tabulated-base-measure"):
            sets, m0 = self._family()
            if self.mode == "rational":
                w = [as_rational(v) for v in w]
                total = R(0)
                for S, mu in zip(sets, m0):
                    if e in S:
                        t = as_rational(mu)
                        for f in S:
                            t *= w[f]
                        total += t
                return total
            logs = []
            for S, mu in zip(sets, m0):
                if e not in S or float(mu) == 0.0:
                    continue
                acc = math.log(float(mu))
                ok = True
                for f in S:
                    if w[f] <= 0:
                        ok = False
                        break
                    acc += math.log(float(w[f]))
                if ok:
                    logs.append(acc)
            if not logs:
                return -math.inf
            m = max(logs)
            return m + math.log(sum(math.exp(v - m) for v in logs))
        # determinant backends: multi-affinity gives marginal = Z(w) - Z(w | w_e = 0)
        w0 = list(w)
        w0[e] = 0
        if self.mode == "rational":
            return self._g_rational(w) - self._g_rational(w0)
        a = self._g_log(w)
        b = self._g_log(w0)
        if b == -math.inf:
            return a
        if b >= a:
            return -math.inf
        return a + math.log1p(-math.exp(b - a))

    def marginal_probability(self, w, e):
        """P[e in S] under the w-tilted measure."""
        if self.mode == "rational":
            return self.marginal_sum(w, e) / self._g_rational(w)
        num = self.marginal_sum(w, e)
        if num == -math.inf:
            return 0.0
        return math.exp(num - self._g_log(w))

    def marginals(self, w):
        if self.backend in ("enumeration", "tabulated-base-measure") and self.mode == "double":
            # vectorized path used heavily by the dual solvers
            self._ensure_numpy_family()
            logw = np.where(np.asarray(w, float) > 0,
                            np.log(np.maximum(np.asarray(w, float), 1e-320)), -np.inf)
            logmass = self._inc @ logw + self._logm0
            m = logmass.max()
            p = np.exp(logmass - m)
            p /= p.sum()
            return self._inc.T @ p
        return np.array([float(self.marginal_probability(w, e)) for e in range(self.n)])

    def _ensure_numpy_family(self):
        if self._masks is None:
            sets, m0 = self._family()
            inc = np.zeros((len(sets), self.n))
            for i, S in enumerate(sets):
                for e in S:
                    inc[i, e] = 1.0
            self._inc = inc
            self._logm0 = np.array([math.log(float(v)) if float(v) > 0 else -np.inf
                                    for v in m0])
            self._masks = [sum(1 << e for e in S) for S in sets]

    def second_moments(self, w):
        """Matrix M with M[e,f] = P[e in S and f in S]; enumeration backends only."""
        self._ensure_numpy_family()
        logw = np.where(np.asarray(w, float) > 0,
                        np.log(np.maximum(np.asarray(w, float), 1e-320)), -np.inf)
        logmass = self._inc @ logw + self._logm0
        m = logmass.max()
        p = np.exp(logmass - m)
        p /= p.sum()
        return self._inc.T @ (self._inc * p[:, None])

    def constrained_count(self, w, I, J):
        """Sum over sets containing all of I and none of J, by interpolation.

        Evaluates the oracle on the (|I|+1) x (|J|+1) grid of rescaled weight
        vectors and combines with signed binomial forward-difference
        coefficients.  Exact-rational mode is required beyond 8 pinned
        elements: the alternating sums are catastrophically ill-conditioned.
        """
        I, J = sorted(set(I)), sorted(set(J))
        if set(I) & set(J):
            raise ValueError("include and exclude sets must be disjoint")
        d, m = len(I), len(J)
        if d + m > 8 and self.mode != "rational":
            raise ValueError("more than 8 pinned elements requires rational mode")
        self._check_w(w)

        def scaled(a, b):
            ww = list(w)
            for i in I:
                ww[i] = ww[i] * (1 + a)
            for j in J:
                ww[j] = ww[j] * b
            return ww

        if self.mode == "rational":
            total = R(0)
            for a in range(d + 1):
                ca = (-1) ** (d - a) * comb(d, a)
                inner = R(0)
                for b in range(1, m + 2):
                    cb = (-1) ** (b - 1) * comb(m + 1, b)
                    inner += cb * self._g_rational(scaled(a, b))
                total += ca * inner
            return total / factorial(d)

        # double mode: common-scale alternating sum
        grid = {}
        logs = []
        for a in range(d + 1):
            for b in range(1, m + 2):
                lg = self._g_log(scaled(a, b))
                grid[(a, b)] = lg
                if lg != -math.inf:
                    logs.append(lg)
        if not logs:
            return 0.0
        M = max(logs)
        acc = 0.0
        for a in range(d + 1):
            ca = (-1) ** (d - a) * comb(d, a)
            for b in range(1, m + 2):
                cb = (-1) ** (b - 1) * comb(m + 1, b)
                lg = grid[(a, b)]
                if lg != -math.inf:
                    acc += ca * cb * math.exp(lg - M)
        val = acc / factorial(d)
        if not math.isfinite(val):
            raise CountingOverflowError("interpolation sum overflowed; use rational mode")
        if M > 700:
            raise CountingOverflowError("interpolation values overflow double; use rational mode")
        return val * math.exp(M)

    def thinned_mass(self, w, tau, T):
        """Value proportional to mu*(T): prod_{i in T} tau_i times the
        degree-|T| coefficient of g along the T-block scaling, over Z(w).

        The coefficient is extracted with the |T|-step forward difference at
        nodes t = 1..|T|+1.
        """
        T = sorted(set(T))
        d = len(T)
        self._check_w(w)

        def wt(t):
            ww = list(w)
            for i in range(self.n):
                if i in T:
                    ww[i] = ww[i] * t
                else:
                    ww[i] = ww[i] * (1 - tau[i]) if self.mode == "rational" else \
                        float(ww[i]) * max(1.0 - float(tau[i]), 0.0)
            if self.mode != "rational":
                ww = [v if v > 0 else DOUBLE_ZERO_FLOOR for v in ww]
            return ww

        if self.mode == "rational":
            w = [as_rational(v) for v in w]
            tau = [as_rational(v) for v in tau]
            lead = R(0)
            for a in range(d + 1):
                ca = (-1) ** (d - a) * comb(d, a)
                lead += ca * self._g_rational(wt(1 + a))
            lead /= factorial(d)
            tt = R(1)
            for i in T:
                tt *= tau[i]
            return tt * lead / self._g_rational(w)

        logs = [self._g_log(wt(1 + a)) for a in range(d + 1)]
        finite = [v for v in logs if v != -math.inf]
        if not finite:
            return 0.0
        M = max(finite)
        acc = 0.0
        for a, lg in enumerate(logs):
            if lg != -math.inf:
                acc += (-1) ** (d - a) * comb(d, a) * math.exp(lg - M)
        lead = acc / factorial(d)
        tt = 1.0
        for i in T:
            tt *= float(tau[i])
        lz = self._g_log(w)
        val = tt * lead * math.exp(M - lz)
        if not math.isfinite(val):
            raise CountingOverflowError("thinned-mass extraction overflowed; use rational mode")
        return max(val, 0.0)

    def _check_w(self, w):
        if len(w) != self.n:
            raise ValueError("weight vector length mismatch")


# ---------------------------------------------------------------------------
# backend kernels
# ---------------------------------------------------------------------------

def _matching_partition(edges, w, one, zero):
    """Matching generating polynomial via Z(G) = Z(G-e) + w_e Z(G-u-v)."""
    sub = {i: edges[i] for i in range(len(edges))}
    return _matching_partition_sub(sub, w, one, zero)


def _matching_partition_sub(sub, w, one, zero, memo=None):
    if memo is None:
        memo = {}
    return _mp_rec(frozenset(sub), {i: e for i, e in sub.items()}, w, one, memo)


def _mp_rec(key, edges, w, one, memo):
    if not key:
        return one
    if key in memo:
        return memo[key]
    e = min(key)
    u, v = edges[e]
    rest = key - {e}
    # delete e
    val = _mp_rec(rest, edges, w, one, memo)
    # take e: drop everything touching u or v
    rest2 = frozenset(i for i in rest if u not in edges[i] and v not in edges[i])
    val = val + w[e] * _mp_rec(rest2, edges, w, one, memo)
    if len(memo) < MATCHING_MEMO_CAP:
        memo[key] = val
    return val


def _esym_truncated_sum(w, k, one, zero):
    """Sum of elementary symmetric polynomials e_0 + ... + e_k of w."""
    if k < 0:
        return zero
    dp = [zero] * (k + 1)
    dp[0] = one
    for x in w:
        for j in range(min(k, len(w)), 0, -1):
            dp[j] = dp[j] + dp[j - 1] * x
    total = zero
    for v in dp:
        total = total + v
    return total


def _weighted_laplacian(base, w):
    m = base.matroid
    nv = m.meta["n_vertices"]
    edges = m.meta["edges"]
    L = [[0 for _ in range(nv)] for _ in range(nv)]
    for e, (u, v) in enumerate(edges):
        if u == v:
            continue
        L[u][u] += w[e]
        L[v][v] += w[e]
        L[u][v] -= w[e]
        L[v][u] -= w[e]
    return L


def _matrix_tree_g(base, w, exact):
    """Normalized spanning-tree generating value det L_red(w) / #trees."""
    if exact:
        w = [as_rational(v) for v in w]
    L = _weighted_laplacian(base, w)
    red = [row[1:] for row in L[1:]]
    if exact:
        red = [[as_rational(v) for v in row] for row in red]
        num = det_bareiss(red)
        ones = _weighted_laplacian(base, [R(1)] * len(w))
        den = det_bareiss([[as_rational(v) for v in row[1:]] for row in ones[1:]])
        return num / den
    num = det_double(red)
    ones = _weighted_laplacian(base, [1.0] * len(w))
    den = det_double([row[1:] for row in ones[1:]])
    return num / den


def _cauchy_binet_g(base, w, exact):
    """det(A diag(w) A^T) / det(A A^T) = sum_B mu0(B) w^B."""
    A = base.A
    r = len(A)
    if exact:
        w = [as_rational(v) for v in w]
        Aw = [[A[i][j] * w[j] for j in range(len(w))] for i in range(r)]
        num = det_bareiss(_mat_mul_t(Aw, A))
        den = det_bareiss(_mat_mul_t(A, A))
        if den == 0:
            raise SingularRepresentationError("A A^T is singular")
        return num / den
    Af = np.array([[float(v) for v in row] for row in A])
    num = det_double(Af @ np.diag(np.asarray(w, float)) @ Af.T)
    den = det_double(Af @ Af.T)
    if den == 0:
        raise SingularRepresentationError("A A^T is singular")
    return num / den


# ---------------------------------------------------------------------------
# module-level wrappers
# ---------------------------------------------------------------------------

def partition(oracle, w):
    return oracle.partition(w)


def marginal_sum(oracle, w, e):
    return oracle.marginal_sum(w, e)


def constrained_count(oracle, w, I, J):
    return oracle.constrained_count(w, I, J)


def thinned_mass(oracle, w, tau, T):
    return oracle.thinned_mass(w, tau, T)
