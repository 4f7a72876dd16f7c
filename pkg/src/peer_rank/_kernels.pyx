# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled scoring kernels; see ``_pure.py`` for the reference semantics."""
import numpy as np

from libc.math cimport pow
from libc.stdint cimport int64_t

cdef double ONE_THIRD = 1.0 / 3.0


cdef inline double _reviewer_score(double prs_r, double lo, double hi) noexcept nogil:
    cdef double span = hi - lo
    if span <= 0.0:
        return 2.5
    return (prs_r - lo) / span * 3.0 + 1.0


cdef inline double _expectation_score(double win, double los, double lo, double hi) noexcept nogil:
    cdef double span = hi - lo
    cdef double es
    if span <= 0.0 or win == los:
        return 0.5
    if los < win:
        es = 0.5 - (win - los) / span
        if es < 0.01:
            es = 0.01
        return es
    es = 0.5 + (los - win) / span
    if es > 1.0:
        es = 1.0
    return es


cdef Py_ssize_t _review_deltas(
    const double[::1] prs,
    Py_ssize_t reviewer,
    const int64_t[::1] peers,
    const double[::1] scores,
    double ss_floor,
    double cap,
    double lo,
    double hi,
    double[::1] delta,
    int64_t[:, ::1] pairs,
    double[:, ::1] factors,
    bint record,
) noexcept nogil:
    cdef Py_ssize_t k = peers.shape[0]
    cdef Py_ssize_t a, b, count = 0
    cdef double smin, smax, s, den, rs, es, ss, inc, sa, sb, win
    for a in range(k):
        delta[a] = 0.0
    if k < 2:
        return 0
    smin = scores[0]
    smax = scores[0]
    for a in range(1, k):
        s = scores[a]
        if s < smin:
            smin = s
        if s > smax:
            smax = s
    den = smax - smin
    if den <= 0.0:
        return 0
    rs = _reviewer_score(prs[reviewer], lo, hi)
    for a in range(k):
        sa = scores[a]
        win = prs[peers[a]]
        for b in range(k):
            sb = scores[b]
            if not sa > sb:
                continue
            ss = (sa - sb) / den
            if ss < ss_floor:
                continue
            es = _expectation_score(win, prs[peers[b]], lo, hi)
            inc = pow(rs * es * ss, ONE_THIRD)
            if inc > cap:
                inc = cap
            delta[a] += inc
            delta[b] -= inc
            if record:
                pairs[count, 0] = a
                pairs[count, 1] = b
                factors[count, 0] = rs
                factors[count, 1] = es
                factors[count, 2] = ss
                factors[count, 3] = inc
            count += 1
    return count


def score_review(prs, Py_ssize_t reviewer, peers, scores, double ss_floor,
                 double cap, double lo, double hi):
    """Score one review against a frozen rating vector.

    Same contract as ``peer_rank._pure.score_review``.
    """
    cdef const double[::1] prs_v = np.ascontiguousarray(prs, dtype=np.float64)
    cdef const int64_t[::1] peers_v = np.ascontiguousarray(peers, dtype=np.int64)
    cdef const double[::1] scores_v = np.ascontiguousarray(scores, dtype=np.float64)
    cdef Py_ssize_t k = peers_v.shape[0]
    cdef Py_ssize_t npairs = k * (k - 1) // 2 if k > 1 else 0
    pairs = np.empty((npairs, 2), dtype=np.int64)
    factors = np.empty((npairs, 4), dtype=np.float64)
    delta = np.zeros(k, dtype=np.float64)
    cdef int64_t[:, ::1] pairs_v = pairs
    cdef double[:, ::1] factors_v = factors
    cdef double[::1] delta_v = delta
    cdef Py_ssize_t count
    with nogil:
        count = _review_deltas(prs_v, reviewer, peers_v, scores_v, ss_floor, cap,
                               lo, hi, delta_v, pairs_v, factors_v, True)
    return pairs[:count].copy(), factors[:count].copy(), delta


def apply_round(double[::1] prs, reviewers, offsets, peers, scores,
                double ss_floor, double cap):
    """Apply a sequence of reviews to ``prs`` in place.

    Same contract as ``peer_rank._pure.apply_round``.
    """
    cdef const int64_t[::1] rev_v = np.ascontiguousarray(reviewers, dtype=np.int64)
    cdef const int64_t[::1] off_v = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef const int64_t[::1] peers_v = np.ascontiguousarray(peers, dtype=np.int64)
    cdef const double[::1] scores_v = np.ascontiguousarray(scores, dtype=np.float64)
    cdef Py_ssize_t n_rev = rev_v.shape[0]
    cdef Py_ssize_t n = prs.shape[0]
    cdef Py_ssize_t r, a, i, k, start, maxk = 0
    cdef double lo, hi, v
    if n_rev == 0 or n == 0:
        return
    for r in range(n_rev):
        k = off_v[r + 1] - off_v[r]
        if k > maxk:
            maxk = k
    delta = np.zeros(max(maxk, 1), dtype=np.float64)
    dummy_pairs = np.empty((1, 2), dtype=np.int64)
    dummy_factors = np.empty((1, 4), dtype=np.float64)
    cdef double[::1] delta_v = delta
    cdef int64_t[:, ::1] dp = dummy_pairs
    cdef double[:, ::1] df = dummy_factors
    with nogil:
        lo = prs[0]
        hi = prs[0]
        for i in range(1, n):
            v = prs[i]
            if v < lo:
                lo = v
            if v > hi:
                hi = v
        for r in range(n_rev):
            start = off_v[r]
            k = off_v[r + 1] - start
            _review_deltas(prs, rev_v[r], peers_v[start:start + k],
                           scores_v[start:start + k], ss_floor, cap, lo, hi,
                           delta_v[:k], dp, df, False)
            for a in range(k):
                i = peers_v[start + a]
                prs[i] = prs[i] + delta_v[a]
            lo = prs[0]
            hi = prs[0]
            for i in range(1, n):
                v = prs[i]
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
