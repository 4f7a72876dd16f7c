"""Simulated organizations used to check that scores recover true performance.

A replication builds a weighted random collaboration network, draws a latent
performance value per employee, and then runs review rounds. In each round
every employee with at least two collaborators rates their closest peers on
the skill axis, with scores blurred by noise. After every round the Spearman
correlation between the skill scores and the latent performance is recorded.

All randomness for a replication comes from one generator seeded by
``replication_seed(base_seed, replication_index)``. The draw order is fixed:
edge presence, edge weights, performance, then one block of noise draws per
round.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import median
from typing import Callable, Iterable, Sequence

import numpy as np

from .analysis import spearman
from .core import (DEFAULT_SS_FLOOR, TEAM_LIMIT, Axis, GridPlacement, GridReview,
                   NOT_EVALUATED, RatingBook, ReviewKind, _cap_value)
from .errors import DegenerateInputError, DomainError

SEED_MASK = (1 << 64) - 1


def replication_seed(base_seed: int, replication_index: int) -> np.random.SeedSequence:
    """Seed material for one replication.

    ``SeedSequence`` hashes (entropy, spawn_key) into the generator state, so
    distinct replication indices give distinct, independent streams.
    """
    return np.random.SeedSequence(entropy=int(base_seed) & SEED_MASK,
                                  spawn_key=(int(replication_index),))


def make_rng(base_seed: int, replication_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(replication_seed(base_seed, replication_index)))


@dataclass(frozen=True)
class SimConfig:
    n: int
    p: float
    m: int
    noise: float
    rounds: int
    replications: int
    base_seed: int
    cap: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"organization size must be >= 2, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"edge probability outside [0, 1]: {self.p}")
        if not 1 <= self.m <= TEAM_LIMIT:
            raise DomainError(f"peers per review must be in [1, {TEAM_LIMIT}], got {self.m}")
        if not 0.0 <= self.noise <= 1.0:
            raise DomainError(f"noise outside [0, 1]: {self.noise}")
        if self.rounds < 0:
            raise DomainError(f"rounds must be >= 0, got {self.rounds}")
        if self.replications < 1:
            raise DomainError(f"replications must be >= 1, got {self.replications}")
        if not 0 <= self.base_seed <= SEED_MASK:
            raise DomainError(f"base seed must fit in an unsigned 64-bit integer, got {self.base_seed}")
        _cap_value(self.cap)


@dataclass
class WeightedGraph:
    """Undirected graph stored as an edge list (u < v) plus CSR adjacency."""

    n: int
    u: np.ndarray
    v: np.ndarray
    weight: np.ndarray
    _indptr: np.ndarray = field(init=False, repr=False)
    _nbr: np.ndarray = field(init=False, repr=False)
    _nbr_w: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        src = np.concatenate([self.u, self.v])
        dst = np.concatenate([self.v, self.u])
        w = np.concatenate([self.weight, self.weight])
        order = np.lexsort((dst, src))
        self._nbr = dst[order]
        self._nbr_w = w[order]
        counts = np.bincount(src, minlength=self.n)
        self._indptr = np.concatenate([[0], np.cumsum(counts)])

    @property
    def edge_count(self) -> int:
        return int(self.u.shape[0])

    def degree(self, vertex: int) -> int:
        return int(self._indptr[vertex + 1] - self._indptr[vertex])

    def neighbors(self, vertex: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor ids (ascending) and the matching edge weights."""
        lo, hi = self._indptr[vertex], self._indptr[vertex + 1]
        return self._nbr[lo:hi], self._nbr_w[lo:hi]


def generate_network(n: int, p: float, rng: np.random.Generator) -> WeightedGraph:
    """Erdos-Renyi G(n, p) with independent uniform (0, 1) edge weights."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p outside [0, 1]: {p}")
    iu, iv = np.triu_indices(n, k=1)
    present = rng.random(iu.shape[0]) < p
    u = iu[present].astype(np.int64)
    v = iv[present].astype(np.int64)
    weight = rng.uniform(np.nextafter(0.0, 1.0), 1.0, size=u.shape[0])
    return WeightedGraph(n, u, v, weight)


def closest_peers(graph: WeightedGraph, vertex: int, m: int) -> list[int]:
    """Up to ``m`` neighbors by descending edge weight, ties to the smaller id."""
    nbr, w = graph.neighbors(vertex)
    order = np.lexsort((nbr, -w))
    return nbr[order][:m].tolist()


def assign_performance(n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return rng.standard_normal(n)


def noisy_score(true_score: float, noise: float, rng: np.random.Generator) -> float:
    """Blend the true score with a standard normal draw, weighted by ``noise``."""
    if not 0.0 <= noise <= 1.0:
        raise DomainError(f"noise outside [0, 1]: {noise}")
    return _blend(true_score, rng.standard_normal(), noise)


def _blend(true_score, random, noise):
    return true_score * (1.0 - noise) + random * noise


def employee_ids(n: int) -> list[str]:
    """Zero-padded ids, so string order matches vertex order."""
    width = len(str(n - 1))
    return [f"e{i:0{width}d}" for i in range(n)]


@dataclass
class SimWorld:
    graph: WeightedGraph
    performance: np.ndarray
    peer_lists: list[list[int]]
    book: RatingBook
    rng: np.random.Generator
    # flattened review layout, fixed for the life of the world
    reviewers: np.ndarray = field(init=False, repr=False)
    offsets: np.ndarray = field(init=False, repr=False)
    flat_peers: np.ndarray = field(init=False, repr=False)
    by_id: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.performance.setflags(write=False)
        reviewers = [v for v, peers in enumerate(self.peer_lists) if len(peers) >= 2]
        sizes = [len(self.peer_lists[v]) for v in reviewers]
        self.reviewers = np.array(reviewers, dtype=np.int64)
        self.offsets = np.concatenate([[0], np.cumsum(sizes, dtype=np.int64)]).astype(np.int64)
        flat = [p for v in reviewers for p in self.peer_lists[v]]
        self.flat_peers = np.array(flat, dtype=np.int64)
        # within each review, the kernel wants peers in id order
        perm = []
        for r, v in enumerate(reviewers):
            start = int(self.offsets[r])
            seg = self.peer_lists[v]
            perm.extend(start + i for i in sorted(range(len(seg)), key=seg.__getitem__))
        self.by_id = np.array(perm, dtype=np.int64)

    @property
    def ids(self) -> tuple[str, ...]:
        return self.book.employees


def build_world(config: SimConfig, replication_index: int) -> SimWorld:
    rng = make_rng(config.base_seed, replication_index)
    graph = generate_network(config.n, config.p, rng)
    performance = assign_performance(config.n, rng)
    peer_lists = [closest_peers(graph, v, config.m) for v in range(config.n)]
    book = RatingBook(employee_ids(config.n))
    return SimWorld(graph, performance, peer_lists, book, rng)


def _round_scores(world: SimWorld, noise: float) -> np.ndarray:
    """Grid coordinates for every review of one round, in peer-list order."""
    if world.flat_peers.shape[0] == 0:
        return np.empty(0)
    z = world.rng.standard_normal(world.flat_peers.shape[0])
    raw = _blend(world.performance[world.flat_peers], z, noise)
    starts = world.offsets[:-1]
    lo = np.minimum.reduceat(raw, starts)
    hi = np.maximum.reduceat(raw, starts)
    sizes = np.diff(world.offsets)
    lo = np.repeat(lo, sizes)
    span = np.repeat(hi, sizes) - lo
    grid = np.full_like(raw, 0.5)
    ok = span > 0
    grid[ok] = (raw[ok] - lo[ok]) / span[ok]
    return grid


def round_reviews(world: SimWorld, grid: np.ndarray, timestamp: int = 0) -> list[GridReview]:
    """The round's reviews as :class:`GridReview` objects (skill axis only)."""
    ids = world.ids
    out = []
    for r, v in enumerate(world.reviewers.tolist()):
        start, stop = int(world.offsets[r]), int(world.offsets[r + 1])
        placements = tuple(
            GridPlacement(ids[p], NOT_EVALUATED, float(s))
            for p, s in zip(world.flat_peers[start:stop].tolist(), grid[start:stop].tolist())
        )
        out.append(GridReview(ids[v], timestamp, ReviewKind.TEAM, placements))
    return out


def run_round(world: SimWorld, noise: float, cap: float | None = None,
              ss_floor: float = DEFAULT_SS_FLOOR) -> SimWorld:
    """One synchronous round: every eligible employee reviews once, by ascending id."""
    if not 0.0 <= noise <= 1.0:
        raise DomainError(f"noise outside [0, 1]: {noise}")
    grid = _round_scores(world, noise)
    world.book.apply_batch(
        Axis.SKILL,
        world.reviewers,
        world.offsets,
        world.flat_peers[world.by_id],
        grid[world.by_id],
        cap=cap,
        ss_floor=ss_floor,
    )
    return world


def _rho(performance, prs):
    try:
        return spearman(performance, prs)
    except DegenerateInputError:
        return None


def run_simulation(config: SimConfig, replication_index: int,
                   on_round: Callable[[int, SimWorld], None] | None = None) -> list[float | None]:
    """Spearman correlation between performance and skill score after each round.

    Entries are ``None`` when the score vector has no variance yet.
    """
    world = build_world(config, replication_index)
    series = []
    for rnd in range(1, config.rounds + 1):
        run_round(world, config.noise, config.cap)
        if on_round is not None:
            on_round(rnd, world)
        series.append(_rho(world.performance, world.book.values(Axis.SKILL)))
    return series


@dataclass(frozen=True)
class SimRow:
    config_id: int
    n: int
    p: float
    m: int
    noise: float
    replication: int
    round: int
    rho: float | None


@dataclass
class SimResult:
    configs: tuple[SimConfig, ...]
    rows: list[SimRow]

    def series(self, config_id: int, replication: int) -> list[float | None]:
        return [r.rho for r in self.rows if r.config_id == config_id and r.replication == replication]

    def medians(self, config_id: int, absolute: bool = False) -> list[float | None]:
        """Median correlation per round across replications, ignoring undefined entries."""
        rounds = self.configs[config_id].rounds
        buckets: list[list[float]] = [[] for _ in range(rounds)]
        for r in self.rows:
            if r.config_id == config_id and r.rho is not None:
                buckets[r.round - 1].append(abs(r.rho) if absolute else r.rho)
        return [median(b) if b else None for b in buckets]

    @property
    def all_medians(self) -> dict[int, list[float | None]]:
        return {cid: self.medians(cid) for cid in range(len(self.configs))}


def config_grid(sizes: Iterable[int], peers: Iterable[int], noises: Iterable[float], *,
                p: float, rounds: int, replications: int, base_seed: int,
                cap: float | None = None) -> list[SimConfig]:
    """Cartesian product of sizes x peers x noises, in that nesting order."""
    return [
        SimConfig(n=n, p=p, m=m, noise=noise, rounds=rounds, replications=replications,
                  base_seed=base_seed, cap=cap)
        for n in sizes for m in peers for noise in noises
    ]


def sweep(configs: Sequence[SimConfig], workers: int = 1) -> SimResult:
    """Run every (config, replication) cell.

    Cells may run on a thread pool; the result is ordered by
    (config id, replication, round) regardless of completion order.
    """
    configs = tuple(configs)
    if not configs:
        raise DomainError("sweep needs at least one config")
    cells = [(cid, rep) for cid, cfg in enumerate(configs) for rep in range(cfg.replications)]

    def run(cell):
        cid, rep = cell
        return cell, run_simulation(configs[cid], rep)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            done = dict(pool.map(run, cells))
    else:
        done = dict(map(run, cells))

    rows = []
    for cid, rep in sorted(done):
        cfg = configs[cid]
        for rnd, rho in enumerate(done[cid, rep], start=1):
            rows.append(SimRow(cid, cfg.n, cfg.p, cfg.m, cfg.noise, rep, rnd, rho))
    return SimResult(configs, rows)

