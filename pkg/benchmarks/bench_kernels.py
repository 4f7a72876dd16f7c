"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--size 500] [--peers 20] [--repeat 5]

Both backends receive identical inputs; the script also checks that their
outputs agree bit for bit.
"""
import argparse
import sys
import timeit

import numpy as np

from peer_rank import _backend, _pure
from peer_rank.core import DEFAULT_SS_FLOOR


def make_round(n, m, seed):
    """One round of reviews: every employee reviews ``m`` random others."""
    rng = np.random.default_rng(seed)
    prs = rng.standard_normal(n)
    prs -= prs.mean()
    reviewers = np.arange(n, dtype=np.int64)
    peers = np.concatenate([np.sort(rng.choice(np.delete(np.arange(n), r), size=m, replace=False))
                            for r in range(n)]).astype(np.int64)
    offsets = np.arange(0, n * m + 1, m, dtype=np.int64)
    scores = rng.random(n * m)
    return prs, reviewers, offsets, peers, scores


def bench(kernels, data, repeat):
    prs, reviewers, offsets, peers, scores = data
    seg_p, seg_s = peers[:offsets[1]], scores[:offsets[1]]
    lo, hi = float(prs.min()), float(prs.max())

    def one_review():
        return kernels.score_review(prs, 0, seg_p, seg_s, DEFAULT_SS_FLOOR, np.inf, lo, hi)

    def one_round():
        work = prs.copy()
        kernels.apply_round(work, reviewers, offsets, peers, scores, DEFAULT_SS_FLOOR, np.inf)
        return work

    t_review = min(timeit.repeat(one_review, number=20, repeat=repeat)) / 20
    t_round = min(timeit.repeat(one_round, number=1, repeat=repeat))
    return t_review, t_round, one_review(), one_round()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=500)
    ap.add_argument("--peers", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if _backend.compiled is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1

    data = make_round(args.size, args.peers, args.seed)
    results = {name: bench(mod, data, args.repeat)
               for name, mod in (("python", _pure), ("compiled", _backend.compiled))}

    py, cc = results["python"], results["compiled"]
    same = (all(np.array_equal(a, b) for a, b in zip(py[2], cc[2])) and np.array_equal(py[3], cc[3]))
    print(f"n={args.size} m={args.peers}")
    print(f"{'backend':<10}{'score_review':>16}{'apply_round':>16}")
    for name, (t_review, t_round, *_) in results.items():
        print(f"{name:<10}{t_review * 1e6:>13.1f} us{t_round * 1e3:>13.2f} ms")
    print(f"speedup   {py[0] / cc[0]:>15.1f}x{py[1] / cc[1]:>15.1f}x")
    print(f"outputs bit-identical: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
