"""The compiled and pure-Python kernels must agree bit for bit."""
import numpy as np
import pytest

from peer_rank import _backend, _pure
from peer_rank.core import Axis
from peer_rank.simulation import SimConfig, _round_scores, build_world

compiled = _backend.compiled
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def _random_case(rng, n=15):
    prs = rng.normal(size=n) * rng.choice([0.0, 1.0, 10.0])
    k = int(rng.integers(0, 12))
    peers = np.sort(rng.choice(n, size=min(k, n), replace=False)).astype(np.int64)
    if rng.integers(2):
        scores = rng.integers(0, 6, size=peers.shape[0]) / 5.0
    else:
        scores = rng.random(peers.shape[0])
    reviewer = int(rng.integers(n))
    cap = float(rng.choice([np.inf, 0.5, 1.2]))
    return prs, reviewer, peers, scores, 0.05, cap, float(prs.min()), float(prs.max())


@needs_compiled
def test_score_review_identical():
    rng = np.random.default_rng(5)
    for _ in range(500):
        case = _random_case(rng)
        for got, want in zip(compiled.score_review(*case), _pure.score_review(*case)):
            assert got.dtype == want.dtype and got.shape == want.shape
            assert np.array_equal(got, want)


@needs_compiled
@pytest.mark.parametrize("noise", [0.0, 0.4, 1.0])
def test_apply_round_identical(noise):
    world = build_world(SimConfig(n=80, p=0.2, m=8, noise=noise, rounds=1, replications=1,
                                  base_seed=3), 0)
    grid = _round_scores(world, noise)
    start = world.book.values(Axis.SKILL)
    outputs = []
    for kernels in (compiled, _pure):
        prs = start.copy()
        for _ in range(3):
            kernels.apply_round(prs, world.reviewers, world.offsets,
                                world.flat_peers[world.by_id], grid[world.by_id], 0.05, np.inf)
        outputs.append(prs)
    assert np.array_equal(outputs[0], outputs[1])


def test_apply_round_no_reviews_is_noop():
    prs = np.array([1.0, -1.0])
    for kernels in filter(None, (compiled, _pure)):
        kernels.apply_round(prs, np.empty(0, np.int64), np.zeros(1, np.int64),
                            np.empty(0, np.int64), np.empty(0), 0.05, np.inf)
    assert prs.tolist() == [1.0, -1.0]


def test_backend_reported():
    assert _backend.BACKEND in ("compiled", "python")


@pytest.mark.skipif(_backend.compiled is None, reason="compiled kernels not built")
def test_benchmark_script_runs(capsys):
    import os
    import runpy
    path = os.path.join(os.path.dirname(__file__), os.pardir, "benchmarks", "bench_kernels.py")
    bench = runpy.run_path(path)
    assert bench["main"](["--size", "40", "--peers", "5", "--repeat", "1"]) == 0
    assert "bit-identical: True" in capsys.readouterr().out
