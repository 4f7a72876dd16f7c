"""Peer Rank Score state and scoring.

Each employee carries two independent scores, one per grid axis. A grid
review expands into pairwise comparisons on each axis; every comparison moves
a positive increment from the loser to the winner, so each axis stays
zero-sum. All factors of a review are read from the ratings as they were
before the review, and the review is applied as a single batch.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Union

import numpy as np

from . import _backend, _pure
from .errors import DomainError, ReviewValidationError, UnknownEmployeeError

DEFAULT_SS_FLOOR = 0.05
TEAM_LIMIT = 20
SAMPLING_LIMIT = 5


class Axis(enum.Enum):
    TEAMWORK = "teamwork"
    SKILL = "skill"

    @property
    def index(self) -> int:
        return 0 if self is Axis.TEAMWORK else 1


class Metric(enum.Enum):
    TEAMWORK = "teamwork"
    SKILL = "skill"
    AGGREGATE = "aggregate"


class ReviewKind(enum.Enum):
    TEAM = "team"
    SAMPLING = "sampling"

    @property
    def max_placements(self) -> int:
        return TEAM_LIMIT if self is ReviewKind.TEAM else SAMPLING_LIMIT


class _Sentinel(enum.Enum):
    NOT_EVALUATED = "not evaluated"

    def __repr__(self):
        return "NOT_EVALUATED"


NOT_EVALUATED = _Sentinel.NOT_EVALUATED
"""Marks a peer dropped off the grid on one axis."""

Coordinate = Union[float, _Sentinel]


def _check_coordinate(value, peer, axis):
    if value is NOT_EVALUATED:
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ReviewValidationError(
            f"{axis} coordinate of {peer!r} must be a number in [0, 1] or NOT_EVALUATED, "
            f"got {value!r}"
        )
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ReviewValidationError(f"{axis} coordinate of {peer!r} outside [0, 1]: {value!r}")
    return value


def _check_id(value, what):
    if not isinstance(value, str) or not value:
        raise ReviewValidationError(f"{what} must be a non-empty string, got {value!r}")


@dataclass(frozen=True)
class GridPlacement:
    peer: str
    teamwork: Coordinate
    skill: Coordinate

    def __post_init__(self):
        _check_id(self.peer, "peer id")
        object.__setattr__(self, "teamwork", _check_coordinate(self.teamwork, self.peer, "teamwork"))
        object.__setattr__(self, "skill", _check_coordinate(self.skill, self.peer, "skill"))

    def coordinate(self, axis: Axis) -> Coordinate:
        return self.teamwork if axis is Axis.TEAMWORK else self.skill


@dataclass(frozen=True)
class GridReview:
    """One reviewer's placement of peers on the teamwork x skill grid."""

    reviewer: str
    timestamp: int | str
    kind: ReviewKind
    placements: tuple[GridPlacement, ...]

    def __post_init__(self):
        _check_id(self.reviewer, "reviewer id")
        if not isinstance(self.kind, ReviewKind):
            raise ReviewValidationError(f"unknown review kind {self.kind!r}")
        placements = tuple(self.placements)
        object.__setattr__(self, "placements", placements)
        seen = set()
        for p in placements:
            if not isinstance(p, GridPlacement):
                raise ReviewValidationError(f"placement must be a GridPlacement, got {p!r}")
            if p.peer == self.reviewer:
                raise ReviewValidationError(f"reviewer {self.reviewer!r} placed themselves on the grid")
            if p.peer in seen:
                raise ReviewValidationError(f"peer {p.peer!r} placed twice")
            seen.add(p.peer)
        limit = self.kind.max_placements
        if len(placements) > limit:
            raise ReviewValidationError(
                f"{self.kind.value} review holds {len(placements)} placements, limit is {limit}"
            )

    def evaluated(self, axis: Axis) -> list[tuple[str, float]]:
        """(peer, coordinate) pairs placed on ``axis``, sorted by peer id."""
        out = [(p.peer, p.coordinate(axis)) for p in self.placements]
        return sorted((peer, c) for peer, c in out if c is not NOT_EVALUATED)


@dataclass(frozen=True)
class PairwiseComparison:
    axis: Axis
    winner: str
    loser: str
    spread: float

    def __post_init__(self):
        if self.winner == self.loser:
            raise DomainError("winner and loser must differ")
        if not 0.0 < self.spread <= 1.0:
            raise DomainError(f"spread outside (0, 1]: {self.spread!r}")


@dataclass(frozen=True)
class AuditRecord:
    """Factor breakdown of one applied comparison."""

    comparison: PairwiseComparison
    reviewer: str
    rs: float
    es: float
    ss: float
    increment: float


class AxisStats(NamedTuple):
    minimum: float
    maximum: float
    range: float


def aggregate_score(teamwork_prs: float, skill_prs: float) -> float:
    """Combine the two axis scores as the length of the (teamwork, skill) vector."""
    if not (math.isfinite(teamwork_prs) and math.isfinite(skill_prs)):
        raise DomainError("aggregate_score needs finite inputs")
    return math.hypot(teamwork_prs, skill_prs)


def _cap_value(cap) -> float:
    if cap is None:
        return math.inf
    cap = float(cap)
    if not cap > 0.0:
        raise DomainError(f"increment cap must be positive, got {cap!r}")
    return cap


def pair_increment(rs: float, es: float, ss: float, cap: float | None = None) -> float:
    """Cube root of the product of the three factors, clamped to ``cap``.

    ``cap=None`` means unbounded.
    """
    if not 1.0 <= rs <= 4.0:
        raise DomainError(f"reviewer score outside [1, 4]: {rs!r}")
    if not 0.01 <= es <= 1.0:
        raise DomainError(f"expectation score outside [0.01, 1]: {es!r}")
    if not 0.0 < ss <= 1.0:
        raise DomainError(f"score spread outside (0, 1]: {ss!r}")
    inc = (rs * es * ss) ** _pure.ONE_THIRD
    return min(_cap_value(cap), inc)


def expand_review(review: GridReview, axis: Axis, ss_floor: float = DEFAULT_SS_FLOOR) -> list[PairwiseComparison]:
    """Turn the placements on one axis into normalized pairwise comparisons.

    Spreads are measured relative to the widest gap in this review. Pairs
    closer than ``ss_floor`` and exact ties are dropped. Output is sorted by
    (winner, loser).
    """
    placed = review.evaluated(axis)
    if len(placed) < 2:
        return []
    scores = [s for _, s in placed]
    den = max(scores) - min(scores)
    if den <= 0.0:
        return []
    out = []
    for winner, sw in placed:
        for loser, sl in placed:
            if not sw > sl:
                continue
            spread = (sw - sl) / den
            if spread < ss_floor:
                continue
            out.append(PairwiseComparison(axis, winner, loser, spread))
    return out


class RatingBook:
    """Per-employee scores on both axes.

    Employees enter at 0. Mutation happens only through :meth:`register` and
    :meth:`apply`; the min/max statistics are refreshed once per call.
    """

    def __init__(self, employees: Iterable[str] = ()):
        self._ids: list[str] = []
        self._index: dict[str, int] = {}
        self._prs = np.zeros((2, 0), dtype=np.float64)
        self._stats = np.zeros((2, 2), dtype=np.float64)
        self.register_many(employees)

    @classmethod
    def from_scores(cls, records: Iterable[tuple[str, float, float]]) -> RatingBook:
        records = list(records)
        book = cls(r[0] for r in records)
        for emp, tw, sk in records:
            i = book._index[emp]
            book._prs[0, i] = float(tw)
            book._prs[1, i] = float(sk)
        book._refresh()
        return book

    def register(self, employee: str) -> None:
        self.register_many((employee,))

    def register_many(self, employees: Iterable[str]) -> None:
        new = []
        for emp in employees:
            if emp in self._index:
                continue
            _check_id(emp, "employee id")
            self._index[emp] = len(self._ids)
            self._ids.append(emp)
            new.append(emp)
        if new:
            self._prs = np.concatenate([self._prs, np.zeros((2, len(new)))], axis=1)
            self._refresh()

    def _refresh(self):
        if self._prs.shape[1] == 0:
            self._stats[:] = 0.0
        else:
            self._stats[:, 0] = self._prs.min(axis=1)
            self._stats[:, 1] = self._prs.max(axis=1)

    def copy(self) -> RatingBook:
        other = RatingBook.__new__(RatingBook)
        other._ids = list(self._ids)
        other._index = dict(self._index)
        other._prs = self._prs.copy()
        other._stats = self._stats.copy()
        return other

    def __len__(self):
        return len(self._ids)

    def __contains__(self, employee):
        return employee in self._index

    def __repr__(self):
        return f"RatingBook({len(self)} employees)"

    @property
    def employees(self) -> tuple[str, ...]:
        """Registered ids in registration order."""
        return tuple(self._ids)

    def index_of(self, employee: str) -> int:
        try:
            return self._index[employee]
        except KeyError:
            raise UnknownEmployeeError(employee) from None

    def prs(self, employee: str, axis: Axis) -> float:
        return float(self._prs[axis.index, self.index_of(employee)])

    def values(self, axis: Axis) -> np.ndarray:
        """Copy of the score vector for ``axis`` in registration order."""
        return self._prs[axis.index].copy()

    def stats(self, axis: Axis) -> AxisStats:
        lo, hi = self._stats[axis.index]
        return AxisStats(float(lo), float(hi), float(hi - lo))

    def total(self, axis: Axis) -> float:
        return float(self._prs[axis.index].sum())

    def as_dict(self) -> dict[str, tuple[float, float]]:
        return {e: (float(self._prs[0, i]), float(self._prs[1, i])) for i, e in enumerate(self._ids)}

    def apply(self, review: GridReview, cap: float | None = None,
              ss_floor: float = DEFAULT_SS_FLOOR) -> list[AuditRecord]:
        """Apply one review in place and return its audit trail.

        Raises :class:`UnknownEmployeeError` without touching the book if any
        participant is unregistered.
        """
        reviewer_idx = self.index_of(review.reviewer)
        for p in review.placements:
            self.index_of(p.peer)
        cap_value = _cap_value(cap)

        new_prs = self._prs.copy()
        audits = []
        for axis in Axis:
            placed = review.evaluated(axis)
            if len(placed) < 2:
                continue
            row = axis.index
            peers = np.array([self._index[e] for e, _ in placed], dtype=np.int64)
            scores = np.array([s for _, s in placed], dtype=np.float64)
            lo, hi = self._stats[row]
            pairs, factors, delta = _backend.score_review(
                self._prs[row], reviewer_idx, peers, scores, ss_floor, cap_value, lo, hi
            )
            new_prs[row, peers] += delta
            for (a, b), (rs, es, ss, inc) in zip(pairs.tolist(), factors.tolist()):
                comp = PairwiseComparison(axis, placed[a][0], placed[b][0], ss)
                audits.append(AuditRecord(comp, review.reviewer, rs, es, ss, inc))

        self._prs = new_prs
        self._refresh()
        return audits

    def apply_batch(self, axis: Axis, reviewers, offsets, peers, scores,
                    cap: float | None = None, ss_floor: float = DEFAULT_SS_FLOOR) -> None:
        """Apply a run of index-encoded reviews on one axis, in order.

        Review ``r`` is issued by employee index ``reviewers[r]`` and places
        ``peers[offsets[r]:offsets[r + 1]]`` (sorted by id) at the matching
        ``scores``. Equivalent to calling :meth:`apply` once per review, but
        without building review objects or audit records.
        """
        row = np.ascontiguousarray(self._prs[axis.index])
        _backend.apply_round(row, reviewers, offsets, peers, scores, ss_floor, _cap_value(cap))
        self._prs[axis.index] = row
        self._refresh()


def apply_review(book: RatingBook, review: GridReview, cap: float | None = None,
                 ss_floor: float = DEFAULT_SS_FLOOR) -> tuple[RatingBook, list[AuditRecord]]:
    """Functional form of :meth:`RatingBook.apply`; ``book`` is left untouched."""
    updated = book.copy()
    audits = updated.apply(review, cap=cap, ss_floor=ss_floor)
    return updated, audits


def reviewer_score(book: RatingBook, reviewer: str, axis: Axis) -> float:
    """Reviewer weight in [1, 4], linear in the reviewer's standing on ``axis``."""
    lo, hi, _ = book.stats(axis)
    return _pure._reviewer_score(book.prs(reviewer, axis), lo, hi)


def expectation_score(book: RatingBook, winner: str, loser: str, axis: Axis) -> float:
    """Surprise of ``winner`` beating ``loser``: 0.5 when even, up to 1 for an upset."""
    lo, hi, _ = book.stats(axis)
    return _pure._expectation_score(book.prs(winner, axis), book.prs(loser, axis), lo, hi)


def leaderboard(book: RatingBook, metric: Metric | Axis) -> list[tuple[str, float]]:
    """Employees by descending score; ties go to the smaller id."""
    metric = Metric(metric.value)
    scores = book.as_dict()
    if metric is Metric.TEAMWORK:
        rows = [(e, tw) for e, (tw, _) in scores.items()]
    elif metric is Metric.SKILL:
        rows = [(e, sk) for e, (_, sk) in scores.items()]
    else:
        rows = [(e, aggregate_score(tw, sk)) for e, (tw, sk) in scores.items()]
    return sorted(rows, key=lambda r: (-r[1], r[0]))
