"""Peer Rank Score: pairwise peer-review ratings and an organization simulator."""
from ._backend import BACKEND
from .analysis import group_mean_compare, pearson, render_report, spearman
from .core import (NOT_EVALUATED, AuditRecord, Axis, GridPlacement, GridReview, Metric,
                   PairwiseComparison, RatingBook, ReviewKind, aggregate_score, apply_review,
                   expand_review, expectation_score, leaderboard, pair_increment, reviewer_score)
from .errors import (DegenerateInputError, DomainError, ParseError, PeerRankError,
                     ReviewValidationError, UnknownEmployeeError)
from .simulation import SimConfig, SimResult, run_simulation, sweep

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "NOT_EVALUATED", "AuditRecord", "Axis", "DegenerateInputError", "DomainError",
    "GridPlacement", "GridReview", "Metric", "PairwiseComparison", "ParseError", "PeerRankError",
    "RatingBook", "ReviewKind", "ReviewValidationError", "SimConfig", "SimResult",
    "UnknownEmployeeError", "aggregate_score", "apply_review", "expand_review",
    "expectation_score", "group_mean_compare", "leaderboard", "pair_increment", "pearson",
    "render_report", "reviewer_score", "run_simulation", "spearman", "sweep",
]
