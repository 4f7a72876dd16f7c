import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brute import brute_apply
from conftest import random_review
from peer_rank.core import (NOT_EVALUATED, Axis, GridPlacement, GridReview, Metric,
                            RatingBook, ReviewKind, aggregate_score, apply_review,
                            expand_review, expectation_score, leaderboard, pair_increment,
                            reviewer_score)
from peer_rank.errors import DomainError, ReviewValidationError, UnknownEmployeeError


def review(reviewer, *placements, kind=ReviewKind.TEAM, ts=0):
    return GridReview(reviewer, ts, kind, tuple(GridPlacement(*p) for p in placements))


def skill_only(reviewer, scores):
    return review(reviewer, *[(peer, NOT_EVALUATED, s) for peer, s in scores.items()])


# -- aggregate_score ---------------------------------------------------------

@pytest.mark.parametrize("tw, sk, expected", [(3, 4, 5), (0, 0, 0), (-3, -4, 5)])
def test_aggregate_score(tw, sk, expected):
    assert aggregate_score(tw, sk) == expected


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_aggregate_score_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        aggregate_score(bad, 1.0)


# -- review validation -------------------------------------------------------

def test_self_review_rejected():
    with pytest.raises(ReviewValidationError, match="themselves"):
        review("a", ("a", 0.1, 0.2))


def test_duplicate_peer_rejected():
    with pytest.raises(ReviewValidationError, match="twice"):
        review("a", ("b", 0.1, 0.2), ("b", 0.3, 0.4))


def test_roster_limits():
    peers = [(f"p{i:02d}", 0.5, 0.5) for i in range(21)]
    review("a", *peers[:20])
    with pytest.raises(ReviewValidationError, match="limit is 20"):
        review("a", *peers)
    review("a", *peers[:5], kind=ReviewKind.SAMPLING)
    with pytest.raises(ReviewValidationError, match="limit is 5"):
        review("a", *peers[:6], kind=ReviewKind.SAMPLING)


@pytest.mark.parametrize("bad", [-0.01, 1.01, None, "0.5", True, math.nan])
def test_coordinate_validation(bad):
    with pytest.raises(ReviewValidationError):
        GridPlacement("b", bad, 0.5)


# -- expand_review -----------------------------------------------------------

def test_five_distinct_placements_give_ten_pairs():
    r = skill_only("r", {"a": 0.1, "b": 0.3, "c": 0.5, "d": 0.7, "e": 0.9})
    assert len(expand_review(r, Axis.SKILL)) == 10


def test_two_placements_give_one_pair():
    (comp,) = expand_review(skill_only("r", {"a": 0.2, "b": 0.8}), Axis.SKILL)
    assert (comp.winner, comp.loser, comp.spread) == ("b", "a", 1.0)


def test_near_tie_filtered():
    r = skill_only("r", {"a": 0.20, "b": 0.21, "c": 0.90})
    # oracle: spreads over the 0.70 range
    assert (0.21 - 0.20) / 0.70 < 0.05
    comps = expand_review(r, Axis.SKILL)
    assert [(c.winner, c.loser) for c in comps] == [("c", "a"), ("c", "b")]
    assert comps[0].spread == pytest.approx(1.0, abs=1e-12)
    assert comps[1].spread == pytest.approx((0.90 - 0.21) / 0.70, abs=1e-12)


def test_all_equal_scores_give_nothing():
    assert expand_review(skill_only("r", {"a": 0.4, "b": 0.4, "c": 0.4}), Axis.SKILL) == []


def test_fewer_than_two_evaluated():
    assert expand_review(skill_only("r", {"a": 0.4}), Axis.SKILL) == []
    r = review("r", ("a", NOT_EVALUATED, 0.1), ("b", 0.9, 0.2))
    assert expand_review(r, Axis.TEAMWORK) == []
    assert len(expand_review(r, Axis.SKILL)) == 1


def test_output_sorted_by_winner_then_loser():
    r = skill_only("r", {"d": 0.9, "a": 0.0, "c": 0.5, "b": 0.6})
    pairs = [(c.winner, c.loser) for c in expand_review(r, Axis.SKILL)]
    assert pairs == sorted(pairs)


@settings(max_examples=200)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=20, unique=True))
def test_pair_count_without_floor(scores):
    r = skill_only("r", {f"p{i:02d}": s for i, s in enumerate(scores)})
    k = len(scores)
    assert len(expand_review(r, Axis.SKILL, ss_floor=0.0)) == k * (k - 1) // 2
    assert len(expand_review(r, Axis.SKILL)) <= k * (k - 1) // 2


# -- reviewer_score / expectation_score ------------------------------------------

@pytest.fixture
def spread_book():
    return RatingBook.from_scores([("lo", 0, -2.0), ("mid", 0, 1.0), ("hi", 0, 4.0), ("q", 0, 2.5)])


def test_reviewer_score_endpoints(spread_book):
    assert reviewer_score(spread_book, "hi", Axis.SKILL) == 4.0
    assert reviewer_score(spread_book, "lo", Axis.SKILL) == 1.0
    assert reviewer_score(spread_book, "mid", Axis.SKILL) == 2.5


def test_reviewer_score_flat_book():
    book = RatingBook(["a", "b"])
    assert reviewer_score(book, "a", Axis.TEAMWORK) == 2.5


def test_reviewer_score_unknown(spread_book):
    with pytest.raises(UnknownEmployeeError):
        reviewer_score(spread_book, "zed", Axis.SKILL)


def test_expectation_score_cases(spread_book):
    assert expectation_score(spread_book, "mid", "mid", Axis.SKILL) == 0.5
    assert expectation_score(spread_book, "hi", "lo", Axis.SKILL) == 0.01
    assert expectation_score(spread_book, "lo", "hi", Axis.SKILL) == 1.0
    # upset over a quarter of the range (range 6, gap 1.5)
    assert expectation_score(spread_book, "mid", "q", Axis.SKILL) == pytest.approx(0.75, abs=1e-12)
    assert expectation_score(spread_book, "q", "mid", Axis.SKILL) == pytest.approx(0.25, abs=1e-12)
    assert expectation_score(spread_book, "hi", "lo", Axis.TEAMWORK) == 0.5


@given(st.floats(0, 10), st.floats(0, 10))
def test_expectation_score_monotone_in_gap(g1, g2):
    g1, g2 = sorted((g1, g2))
    book = RatingBook.from_scores([("lo", 0, -10.0), ("hi", 0, 10.0), ("x", 0, 0.0),
                                   ("y1", 0, g1), ("y2", 0, g2)])
    # upset: x (lower) beats y
    assert expectation_score(book, "x", "y1", Axis.SKILL) <= expectation_score(book, "x", "y2", Axis.SKILL)
    # expected: y beats x
    assert expectation_score(book, "y1", "x", Axis.SKILL) >= expectation_score(book, "y2", "x", Axis.SKILL)


# -- pair_increment ----------------------------------------------------------

@pytest.mark.parametrize("args, expected", [
    ((4, 1, 1, None), 1.587401),
    ((1, 0.01, 0.05, None), 0.079370),
    ((1, 1, 1, None), 1.0),
    ((4, 1, 1, 0.5), 0.5),
])
def test_pair_increment(args, expected):
    assert pair_increment(*args) == pytest.approx(expected, abs=1e-6)


def test_pair_increment_matches_cbrt():
    assert pair_increment(4, 1, 1) == pytest.approx(float(np.cbrt(4.0)), abs=1e-15)
    assert pair_increment(1, 0.01, 0.05) == pytest.approx(float(np.cbrt(0.0005)), abs=1e-15)


@pytest.mark.parametrize("args", [(0.9, 0.5, 0.5), (4.1, 0.5, 0.5), (2, 0.001, 0.5),
                                  (2, 1.1, 0.5), (2, 0.5, 0.0), (2, 0.5, 1.5)])
def test_pair_increment_domain(args):
    with pytest.raises(DomainError):
        pair_increment(*args)


def test_pair_increment_bad_cap():
    with pytest.raises(DomainError):
        pair_increment(1, 1, 1, cap=0)


# -- apply_review -------------------------------------------------------------

def test_fresh_book_single_pair():
    book = RatingBook(["r", "a", "b"])
    new, audit = apply_review(book, skill_only("r", {"a": 0.2, "b": 0.8}))
    expected = float(np.cbrt(2.5 * 0.5 * 1.0))
    assert expected == pytest.approx(1.077217, abs=1e-6)
    (rec,) = audit
    assert (rec.rs, rec.es, rec.ss) == (2.5, 0.5, 1.0)
    assert rec.increment == pytest.approx(expected, abs=1e-15)
    assert new.prs("b", Axis.SKILL) == pytest.approx(expected, abs=1e-15)
    assert new.prs("a", Axis.SKILL) == pytest.approx(-expected, abs=1e-15)
    assert new.prs("r", Axis.SKILL) == 0.0
    # original untouched
    assert book.prs("b", Axis.SKILL) == 0.0


def test_snapshot_semantics_within_review():
    # pairs (c,b) and (b,a) share b; with snapshot reads, the increment of the
    # second pair does not see the first pair's update
    book = RatingBook.from_scores([("r", 0, 1.0), ("a", 0, -1.0), ("b", 0, 0.5),
                                   ("c", 0, -0.5), ("z", 0, 0.0)])
    shared, audit_shared = apply_review(book, skill_only("r", {"a": 0.0, "b": 0.5, "c": 1.0}))
    alone, audit_alone = apply_review(book, skill_only("r", {"a": 0.0, "b": 0.5}))
    rec_shared = [r for r in audit_shared if (r.comparison.winner, r.comparison.loser) == ("b", "a")]
    (rec_alone,) = audit_alone
    # same ss because b-a = 0.5 of the range in the first review, 1.0 in the
    # second; compare rs and es, which come from the snapshot
    assert rec_shared[0].rs == rec_alone.rs
    assert rec_shared[0].es == rec_alone.es


def test_unknown_participant_leaves_book_unchanged():
    book = RatingBook(["r", "a"])
    before = book.as_dict()
    with pytest.raises(UnknownEmployeeError):
        book.apply(skill_only("r", {"a": 0.1, "ghost": 0.9}))
    with pytest.raises(UnknownEmployeeError):
        book.apply(skill_only("ghost", {"a": 0.1, "r": 0.9}))
    assert book.as_dict() == before


def test_cap_applies():
    book = RatingBook(["r", "a", "b"])
    _, audit = apply_review(book, skill_only("r", {"a": 0.2, "b": 0.8}), cap=0.3)
    assert audit[0].increment == 0.3


def test_registration_order_irrelevant():
    rv = review("r", ("a", 0.1, 0.9), ("b", 0.7, 0.4), ("c", 0.4, 0.0))
    one, _ = apply_review(RatingBook(["r", "a", "b", "c"]), rv)
    two, _ = apply_review(RatingBook(["c", "b", "a", "r"]), rv)
    assert one.as_dict() == two.as_dict()


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    employees = [f"e{i}" for i in range(int(rng.integers(2, 11)))]
    init = [(e, float(rng.normal()), float(rng.normal())) for e in employees]
    book = RatingBook.from_scores(init)
    scores = {e: (tw, sk) for e, tw, sk in init}
    for _ in range(int(rng.integers(1, 6))):
        rv = random_review(rng, employees, tie_grid=bool(rng.integers(2)))
        audit = book.apply(rv)
        scores, trail = brute_apply(scores, rv)
        got = book.as_dict()
        for e in employees:
            assert got[e] == pytest.approx(scores[e], abs=1e-12)
        keys = [(a.comparison.axis.value, a.comparison.winner, a.comparison.loser) for a in audit]
        assert sorted(keys) == sorted(t[:3] for t in trail)
        by_key = {t[:3]: t[3:] for t in trail}
        for a in audit:
            rs, es, ss, inc = by_key[(a.comparison.axis.value, a.comparison.winner, a.comparison.loser)]
            assert (a.rs, a.es, a.ss, a.increment) == pytest.approx((rs, es, ss, inc), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_zero_sum_and_factor_ranges(seed):
    rng = np.random.default_rng(seed)
    employees = [f"e{i:02d}" for i in range(int(rng.integers(2, 30)))]
    book = RatingBook(employees)
    for _ in range(int(rng.integers(1, 40))):
        for rec in book.apply(random_review(rng, employees)):
            assert 1.0 <= rec.rs <= 4.0
            assert 0.01 <= rec.es <= 1.0
            assert 0.05 <= rec.ss <= 1.0
            assert 0.079370 <= rec.increment <= 1.587402
        assert abs(book.total(Axis.TEAMWORK)) < 1e-9
        assert abs(book.total(Axis.SKILL)) < 1e-9
        lo, hi, span = book.stats(Axis.SKILL)
        assert lo <= hi and span >= 0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.randoms(use_true_random=False))
def test_permutation_invariance(seed, shuffler):
    rng = np.random.default_rng(seed)
    employees = [f"e{i}" for i in range(12)]
    init = [(e, float(rng.normal()), float(rng.normal())) for e in employees]
    rv = random_review(rng, employees, tie_grid=True)
    placements = list(rv.placements)
    shuffler.shuffle(placements)
    shuffled = GridReview(rv.reviewer, rv.timestamp, rv.kind, tuple(placements))
    a, _ = apply_review(RatingBook.from_scores(init), rv)
    b, _ = apply_review(RatingBook.from_scores(init), shuffled)
    assert a.as_dict() == b.as_dict()


def _affine(rv, a, b):
    def f(c):
        return NOT_EVALUATED if c is NOT_EVALUATED else a * c + b
    return GridReview(rv.reviewer, rv.timestamp, rv.kind,
                      tuple(GridPlacement(p.peer, f(p.teamwork), f(p.skill)) for p in rv.placements))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 1.0), st.floats(0.0, 1.0))
def test_affine_invariance(seed, scale, shift_frac):
    rng = np.random.default_rng(seed)
    employees = [f"e{i}" for i in range(15)]
    book = RatingBook.from_scores([(e, float(rng.normal()), float(rng.normal())) for e in employees])
    rv = random_review(rng, employees)
    shift = shift_frac * (1.0 - scale)
    _, base = apply_review(book, rv)
    _, moved = apply_review(book, _affine(rv, scale, shift))
    assert [(r.comparison.axis, r.comparison.winner, r.comparison.loser) for r in base] == \
        [(r.comparison.axis, r.comparison.winner, r.comparison.loser) for r in moved]
    for x, y in zip(base, moved):
        assert y.ss == pytest.approx(x.ss, abs=1e-12)
        assert y.increment == pytest.approx(x.increment, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_affine_invariance_exact_for_power_of_two_scale(seed):
    rng = np.random.default_rng(seed)
    employees = [f"e{i}" for i in range(15)]
    book = RatingBook.from_scores([(e, float(rng.normal()), float(rng.normal())) for e in employees])
    rv = random_review(rng, employees, tie_grid=True)
    _, base = apply_review(book, rv)
    _, moved = apply_review(book, _affine(rv, 0.5, 0.0))
    assert base == moved


# -- leaderboard --------------------------------------------------------------

def test_leaderboard_empty():
    assert leaderboard(RatingBook(), Metric.AGGREGATE) == []


def test_leaderboard_ties_by_id():
    book = RatingBook(["b", "a", "c"])
    assert [e for e, _ in leaderboard(book, Metric.SKILL)] == ["a", "b", "c"]


def test_leaderboard_aggregate():
    book = RatingBook.from_scores([("x", 3.0, 4.0), ("y", -3.0, -4.0), ("z", 1.0, 1.0), ("w", -1, -1)])
    rows = leaderboard(book, Metric.AGGREGATE)
    assert rows[0] == ("x", 5.0) and rows[1] == ("y", 5.0)
    assert leaderboard(book, Metric.TEAMWORK)[0] == ("x", 3.0)
    assert leaderboard(book, Axis.SKILL)[-1] == ("y", -4.0)


def test_book_stats_and_registration():
    book = RatingBook()
    assert book.stats(Axis.SKILL) == (0.0, 0.0, 0.0)
    book.register("a")
    book.register("a")
    assert len(book) == 1 and "a" in book
    with pytest.raises(ReviewValidationError):
        book.register("")
