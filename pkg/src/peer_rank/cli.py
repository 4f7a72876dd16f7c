"""Command-line entry point.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""
from __future__ import annotations

import argparse
import sys

from . import _backend
from .analysis import render_report
from .core import Axis, Metric, RatingBook, leaderboard
from .errors import PeerRankError
from .persistence import (atomic_write, dump_snapshot, load_snapshot, parse_reviews,
                          replay_order)
from .simulation import config_grid, sweep

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="peer-rank", description="Peer Rank Score engine and simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run a simulation sweep and write a report")
    sim.add_argument("--size", type=int, action="append", help="organization size (repeatable, default 500)")
    sim.add_argument("--density", type=float, default=0.1, help="edge probability of the network")
    sim.add_argument("--peers", type=int, action="append", help="peers per review (repeatable, default 20)")
    sim.add_argument("--noise", type=float, action="append", help="noise level in [0, 1] (repeatable, default 0)")
    sim.add_argument("--rounds", type=int, default=10)
    sim.add_argument("--replications", type=_positive_int, default=30)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--cap", type=float, default=None, help="maximum increment (default unbounded)")
    sim.add_argument("--out", help="output file (default stdout)")
    sim.add_argument("--format", choices=("csv", "svg"), default="csv")
    sim.add_argument("--jobs", type=_positive_int, default=1, help="worker threads")

    app = sub.add_parser("apply", help="replay a review file onto a snapshot")
    app.add_argument("--reviews", required=True)
    app.add_argument("--snapshot-in")
    app.add_argument("--snapshot-out", required=True)
    app.add_argument("--cap", type=float, default=None)
    app.add_argument("--as-of", help="only apply reviews with timestamp <= this value")

    rank = sub.add_parser("rank", help="print a leaderboard from a snapshot")
    rank.add_argument("--snapshot", required=True)
    rank.add_argument("--metric", choices=[m.value for m in Metric], default="aggregate")
    rank.add_argument("--top", type=_positive_int, default=None)

    pairs = sub.add_parser("pairs", help="print expanded comparisons with factor breakdowns")
    pairs.add_argument("--reviews", required=True)
    pairs.add_argument("--axis", choices=[a.value for a in Axis] + ["both"], default="both")
    pairs.add_argument("--snapshot-in")
    pairs.add_argument("--cap", type=float, default=None)

    parser.add_argument("--version", action="version", version=f"%(prog)s 0.1.0 ({_backend.BACKEND} kernels)")
    return parser


def _read_reviews(path):
    with open(path, "rb") as fh:
        return parse_reviews(fh)


def _read_snapshot(path):
    with open(path, "rb") as fh:
        return load_snapshot(fh)


def _coerce_like(value, example):
    if isinstance(example, int):
        try:
            return int(value)
        except ValueError:
            raise PeerRankError(f"--as-of {value!r} is not an integer timestamp") from None
    return value


def _replay(args):
    reviews = _read_reviews(args.reviews)
    if args.snapshot_in:
        book, as_of = _read_snapshot(args.snapshot_in)
    else:
        book, as_of = RatingBook(), None
    ordered = replay_order(reviews)
    if ordered and as_of is not None:
        if type(as_of) is not type(ordered[0].timestamp):
            raise PeerRankError("snapshot timestamp type does not match the review file")
        # reviews at or before the snapshot time are already in the book
        ordered = [r for r in ordered if r.timestamp > as_of]
    until = getattr(args, "as_of", None)
    if until is not None and ordered:
        until = _coerce_like(until, ordered[0].timestamp)
        ordered = [r for r in ordered if r.timestamp <= until]
    return book, as_of, ordered


def _cmd_simulate(args, out):
    configs = config_grid(args.size or [500], args.peers or [20],
                          args.noise if args.noise is not None else [0.0],
                          p=args.density, rounds=args.rounds, replications=args.replications,
                          base_seed=args.seed, cap=args.cap)
    data = render_report(sweep(configs, workers=args.jobs), args.format)
    if args.out:
        atomic_write(args.out, data)
    else:
        out.write(data.decode("utf-8"))
    return EXIT_OK


def _cmd_apply(args, out):
    book, as_of, ordered = _replay(args)
    for review in ordered:
        book.register(review.reviewer)
        book.register_many(p.peer for p in review.placements)
        book.apply(review, cap=args.cap)
        as_of = review.timestamp
    atomic_write(args.snapshot_out, dump_snapshot(book, as_of))
    print(f"applied {len(ordered)} reviews; {len(book)} employees", file=out)
    return EXIT_OK


def _cmd_rank(args, out):
    book, _ = _read_snapshot(args.snapshot)
    rows = leaderboard(book, Metric(args.metric))
    if args.top is not None:
        rows = rows[:args.top]
    for pos, (emp, score) in enumerate(rows, start=1):
        print(f"{pos}\t{emp}\t{score:.15g}", file=out)
    return EXIT_OK


def _cmd_pairs(args, out):
    book, _, ordered = _replay(args)
    print("review\ttimestamp\treviewer\taxis\twinner\tloser\trs\tes\tss\tincrement", file=out)
    for i, review in enumerate(ordered):
        book.register(review.reviewer)
        book.register_many(p.peer for p in review.placements)
        for rec in book.apply(review, cap=args.cap):
            c = rec.comparison
            if args.axis != "both" and c.axis.value != args.axis:
                continue
            print(f"{i}\t{review.timestamp}\t{rec.reviewer}\t{c.axis.value}\t{c.winner}\t{c.loser}\t"
                  f"{rec.rs!r}\t{rec.es!r}\t{rec.ss!r}\t{rec.increment!r}", file=out)
    return EXIT_OK


_COMMANDS = {"simulate": _cmd_simulate, "apply": _cmd_apply, "rank": _cmd_rank, "pairs": _cmd_pairs}


def main(argv=None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, out)
    except (PeerRankError, OSError) as exc:
        print(f"peer-rank {args.command}: error: {exc}", file=err)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
