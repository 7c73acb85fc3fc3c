# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled replay kernel; semantics identical to _replay_py.replay_batch."""

cdef double CAP_SLACK = 1e-9


def replay_batch(int n,
                 double[::1] mass,
                 long long[::1] support_masks,
                 double[::1] support_cdf,
                 double[::1] x,
                 long long[:, ::1] orders,
                 double[:, ::1] u,
                 long long[::1] accept_counts,
                 long long[::1] outcome_counts):
    cdef Py_ssize_t n_rep = orders.shape[0]
    cdef Py_ssize_t K = support_masks.shape[0]
    cdef Py_ssize_t r, j, lo, hi, mid
    cdef long long m, t, tb, bit, e
    cdef double u0, ua, uc, q, xe, denom, p
    for r in range(n_rep):
        u0 = u[r, 0]
        lo = 0
        hi = K - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if u0 < support_cdf[mid]:
                hi = mid
            else:
                lo = mid + 1
        m = support_masks[lo]
        for j in range(n):
            e = orders[r, j]
            bit = 1ll << e
            t = m & ~bit
            tb = t | bit
            denom = mass[t] + mass[tb]
            q = mass[tb] / denom
            xe = x[e]
            if q > xe + CAP_SLACK:
                raise ValueError(
                    "witness violates stationary caps at element %d, mask %d" % (e, t))
            ua = u[r, 1 + 2 * j]
            uc = u[r, 2 + 2 * j]
            if ua < xe:
                p = q / xe
                if p > 1.0:
                    p = 1.0
                if uc < p:
                    m = tb
                    accept_counts[e] += 1
                else:
                    m = t
            else:
                m = t
        outcome_counts[m] += 1
    return 0
