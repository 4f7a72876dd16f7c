"""Pure-Python scoring kernels.

Mirror of ``_kernels.pyx``. Every floating point expression is written in the
same order as the compiled version so both backends return identical bits.
"""
import numpy as np

ONE_THIRD = 1.0 / 3.0


def _reviewer_score(prs_r, lo, hi):
    span = hi - lo
    if span <= 0.0:
        return 2.5
    return (prs_r - lo) / span * 3.0 + 1.0


def _expectation_score(win, los, lo, hi):
    span = hi - lo
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


def _review_deltas(prs, reviewer, peers, scores, ss_floor, cap, lo, hi, delta, audit):
    k = len(peers)
    for a in range(k):
        delta[a] = 0.0
    if k < 2:
        return
    smin = smax = scores[0]
    for a in range(1, k):
        s = scores[a]
        if s < smin:
            smin = s
        if s > smax:
            smax = s
    den = smax - smin
    if den <= 0.0:
        return
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
            inc = (rs * es * ss) ** ONE_THIRD
            if inc > cap:
                inc = cap
            delta[a] += inc
            delta[b] -= inc
            if audit is not None:
                audit.append((a, b, rs, es, ss, inc))


def score_review(prs, reviewer, peers, scores, ss_floor, cap, lo, hi):
    """Score one review against a frozen rating vector.

    ``peers`` must be sorted by employee id so that pairs come out in
    (winner, loser) order. Returns ``(pairs, factors, delta)`` where ``pairs``
    holds positions into ``peers``, ``factors`` the rows (rs, es, ss, inc) and
    ``delta`` the net change per peer.
    """
    prs_l = np.asarray(prs, dtype=np.float64).tolist()
    peers_l = [int(p) for p in peers]
    scores_l = [float(s) for s in scores]
    delta = [0.0] * len(peers_l)
    audit = []
    _review_deltas(prs_l, int(reviewer), peers_l, scores_l, float(ss_floor),
                   float(cap), float(lo), float(hi), delta, audit)
    pairs = np.array([(a, b) for a, b, *_ in audit], dtype=np.int64).reshape(-1, 2)
    factors = np.array([row[2:] for row in audit], dtype=np.float64).reshape(-1, 4)
    return pairs, factors, np.array(delta, dtype=np.float64)


def apply_round(prs, reviewers, offsets, peers, scores, ss_floor, cap):
    """Apply a sequence of reviews to ``prs`` in place.

    Review ``r`` is issued by ``reviewers[r]`` and covers
    ``peers[offsets[r]:offsets[r + 1]]`` with grid scores from the same slice
    of ``scores``. Each review reads the ratings left by the previous one.
    """
    vals = np.asarray(prs, dtype=np.float64).tolist()
    peers_l = [int(p) for p in peers]
    scores_l = [float(s) for s in scores]
    offs = [int(o) for o in offsets]
    floor = float(ss_floor)
    cap = float(cap)
    n_rev = len(reviewers)
    if n_rev == 0 or not vals:
        return
    maxk = max(offs[r + 1] - offs[r] for r in range(n_rev))
    delta = [0.0] * maxk
    lo = min(vals)
    hi = max(vals)
    for r in range(n_rev):
        start, stop = offs[r], offs[r + 1]
        seg = peers_l[start:stop]
        k = stop - start
        view = delta[:k]
        _review_deltas(vals, int(reviewers[r]), seg, scores_l[start:stop],
                       floor, cap, lo, hi, view, None)
        for a in range(k):
            p = seg[a]
            vals[p] = vals[p] + view[a]
        lo = min(vals)
        hi = max(vals)
    prs[:] = vals
