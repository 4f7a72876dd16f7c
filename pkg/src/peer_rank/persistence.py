"""Review files and rating snapshots.

Both formats are newline-delimited JSON. Review file, one review per line::

    {"reviewer": "ann", "timestamp": 3, "kind": "team",
     "placements": [{"peer": "bob", "teamwork": 0.4, "skill": null}, ...]}

A ``null`` coordinate means the peer was left off the grid on that axis.

Snapshot file, a header line followed by one line per employee in id order::

    {"format_version": 1, "as_of_timestamp": 3, "employee_count": 2}
    {"employee": "ann", "prs_teamwork": 0.5, "prs_skill": -0.25}

Floats are written with ``repr`` so values survive a round trip exactly.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import IO, Iterable

from .core import NOT_EVALUATED, GridPlacement, GridReview, RatingBook, ReviewKind
from .errors import ParseError, PeerRankError

SNAPSHOT_VERSION = 1
SNAPSHOT_SUM_TOL = 1e-6

_REVIEW_KEYS = {"reviewer", "timestamp", "kind", "placements"}
_PLACEMENT_KEYS = {"peer", "teamwork", "skill"}


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(", ", ": "), ensure_ascii=False, allow_nan=False)


def _lines(stream):
    for lineno, line in enumerate(stream, start=1):
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(lineno, f"not UTF-8: {exc}") from None
        line = line.strip()
        if line:
            yield lineno, line


def _check_timestamp(value, lineno):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ParseError(lineno, f"timestamp must be an integer or string, got {value!r}")
    return value


def _coordinate(value, lineno, peer, axis):
    if value is None:
        return NOT_EVALUATED
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(lineno, f"{axis} of {peer!r} must be a number or null, got {value!r}")
    return float(value)


def _review_from_record(rec, lineno) -> GridReview:
    if not isinstance(rec, dict):
        raise ParseError(lineno, "record must be a JSON object")
    keys = set(rec)
    if keys != _REVIEW_KEYS:
        missing, extra = _REVIEW_KEYS - keys, keys - _REVIEW_KEYS
        raise ParseError(lineno, f"bad record keys (missing {sorted(missing)}, unexpected {sorted(extra)})")
    try:
        kind = ReviewKind(rec["kind"])
    except ValueError:
        raise ParseError(lineno, f"unknown review kind {rec['kind']!r}") from None
    if not isinstance(rec["placements"], list):
        raise ParseError(lineno, "placements must be a list")
    placements = []
    for p in rec["placements"]:
        if not isinstance(p, dict) or set(p) != _PLACEMENT_KEYS:
            raise ParseError(lineno, f"placement must have exactly the keys {sorted(_PLACEMENT_KEYS)}")
        peer = p["peer"]
        placements.append((peer, _coordinate(p["teamwork"], lineno, peer, "teamwork"),
                           _coordinate(p["skill"], lineno, peer, "skill")))
    try:
        return GridReview(
            reviewer=rec["reviewer"],
            timestamp=_check_timestamp(rec["timestamp"], lineno),
            kind=kind,
            placements=tuple(GridPlacement(*p) for p in placements),
        )
    except PeerRankError as exc:
        raise ParseError(lineno, str(exc)) from None


def parse_reviews(stream: Iterable[str] | Iterable[bytes] | IO) -> list[GridReview]:
    """Read and validate every record of a review file.

    Errors carry the 1-based line number of the offending record.
    """
    reviews = []
    last = None
    for lineno, line in _lines(stream):
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"malformed JSON: {exc.msg}") from None
        review = _review_from_record(rec, lineno)
        if last is not None:
            if type(last) is not type(review.timestamp):
                raise ParseError(lineno, "timestamps mix integers and strings")
            if review.timestamp < last:
                raise ParseError(lineno, f"timestamp {review.timestamp!r} goes backwards (after {last!r})")
        last = review.timestamp
        reviews.append(review)
    return reviews


def _coord_out(value):
    return None if value is NOT_EVALUATED else value


def serialize_review(review: GridReview) -> str:
    return _dumps({
        "reviewer": review.reviewer,
        "timestamp": review.timestamp,
        "kind": review.kind.value,
        "placements": [
            {"peer": p.peer, "teamwork": _coord_out(p.teamwork), "skill": _coord_out(p.skill)}
            for p in review.placements
        ],
    })


def serialize_reviews(reviews: Iterable[GridReview]) -> str:
    return "".join(serialize_review(r) + "\n" for r in reviews)


def replay_order(reviews: Iterable[GridReview]) -> list[GridReview]:
    """Reviews sorted by (timestamp, reviewer); stable for exact duplicates."""
    return sorted(reviews, key=lambda r: (r.timestamp, r.reviewer))


def dump_snapshot(book: RatingBook, as_of=None) -> str:
    scores = book.as_dict()
    lines = [_dumps({"format_version": SNAPSHOT_VERSION, "as_of_timestamp": as_of,
                     "employee_count": len(scores)})]
    for emp in sorted(scores):
        tw, sk = scores[emp]
        lines.append(_dumps({"employee": emp, "prs_teamwork": tw, "prs_skill": sk}))
    return "\n".join(lines) + "\n"


def load_snapshot(stream) -> tuple[RatingBook, object]:
    """Parse a snapshot; returns the book and its ``as_of_timestamp``."""
    lines = list(_lines(stream))
    if not lines:
        raise ParseError(1, "empty snapshot")

    def obj(lineno, line):
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"malformed JSON: {exc.msg}") from None
        if not isinstance(rec, dict):
            raise ParseError(lineno, "record must be a JSON object")
        return rec

    lineno, line = lines[0]
    header = obj(lineno, line)
    if set(header) != {"format_version", "as_of_timestamp", "employee_count"}:
        raise ParseError(lineno, "bad snapshot header")
    if header["format_version"] != SNAPSHOT_VERSION:
        raise ParseError(lineno, f"unsupported snapshot version {header['format_version']!r}")
    as_of = header["as_of_timestamp"]
    if as_of is not None:
        _check_timestamp(as_of, lineno)

    records = []
    last = None
    for lineno, line in lines[1:]:
        rec = obj(lineno, line)
        if set(rec) != {"employee", "prs_teamwork", "prs_skill"}:
            raise ParseError(lineno, "bad snapshot record")
        emp = rec["employee"]
        if not isinstance(emp, str) or not emp:
            raise ParseError(lineno, f"employee must be a non-empty string, got {emp!r}")
        if last is not None and emp <= last:
            raise ParseError(lineno, f"employee {emp!r} out of order or duplicated")
        last = emp
        vals = []
        for key in ("prs_teamwork", "prs_skill"):
            v = rec[key]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParseError(lineno, f"{key} must be a finite number, got {v!r}")
            vals.append(float(v))
        records.append((emp, *vals))

    if header["employee_count"] != len(records):
        raise ParseError(lines[0][0], f"header says {header['employee_count']} employees, "
                                      f"found {len(records)}")
    for i, axis in ((1, "teamwork"), (2, "skill")):
        total = math.fsum(r[i] for r in records)
        if abs(total) > SNAPSHOT_SUM_TOL:
            raise ParseError(lines[0][0], f"{axis} scores sum to {total!r}, expected 0")
    return RatingBook.from_scores(records), as_of


def atomic_write(path: str | os.PathLike, data: bytes | str) -> None:
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
