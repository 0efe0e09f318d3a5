"""Command-line front end: ``omrned compare|batch|convert|standardize|ser|stats``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .diff import DiffOptions, diff_scores, edits_to_jsonl, format_edits
from .kern import (
    TOKEN_CATEGORIES,
    EkernSyntaxError,
    TokenFilter,
    from_ekern,
    parse_lenient,
    standardize,
    to_ekern,
    tokenize,
)
from .metrics import EmptyReference, category_percentages, omr_ned, round_half_up, ser
from .model import CATEGORIES, Category
from .reporting import batch_compare, corpus_stats, histogram_csv, stats_text, summary_text, write_csv

logger = logging.getLogger("omrned")

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1 instead of argparse's 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _category(name: str) -> Category:
    try:
        return Category.from_name(name)
    except ValueError:
        valid = ", ".join(c.value for c in CATEGORIES)
        raise argparse.ArgumentTypeError(f"unknown category {name!r} (valid: {valid})") from None


def _token_category(name: str) -> str:
    if name not in TOKEN_CATEGORIES:
        valid = ", ".join(sorted(TOKEN_CATEGORIES))
        raise argparse.ArgumentTypeError(f"unknown token category {name!r} (valid: {valid})")
    return name


def _positive(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def default_jobs() -> int:
    env = os.environ.get("OMRNED_JOBS")
    if env:
        try:
            return _positive(env)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"OMRNED_JOBS: {exc}") from None
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="omrned", description="OMR-NED evaluation of Humdrum **kern scores.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log parse warnings")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    diff_opts = argparse.ArgumentParser(add_help=False)
    diff_opts.add_argument("--exclude-category", action="append", type=_category, default=[],
                           metavar="NAME", help="drop a category from the distance (repeatable)")
    diff_opts.add_argument("--detail", choices=["default"], default="default",
                           help="symbol detail level (only 'default' is supported)")
    diff_opts.add_argument("--ser", action="store_true", help="also report the symbol error rate")
    diff_opts.add_argument("--format", choices=["kern", "ekern"], default="kern",
                           help="token encoding used for SER (default kern)")

    p = sub.add_parser("compare", parents=[diff_opts], help="compare one prediction to its reference")
    p.add_argument("ref", type=Path)
    p.add_argument("pred", type=Path)
    dump = p.add_mutually_exclusive_group()
    dump.add_argument("--edits", action="store_true", help="print the edit list")
    dump.add_argument("--edits-jsonl", action="store_true", help="print the edit list as JSON lines")

    p = sub.add_parser("batch", parents=[diff_opts], help="compare folders of same-named files")
    p.add_argument("ref_dir", type=Path)
    p.add_argument("pred_dir", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True, help="CSV report path")
    p.add_argument("--jobs", type=_positive, default=None,
                   help="worker processes (default: $OMRNED_JOBS or CPU count)")
    p.add_argument("--header-comment", action="store_true",
                   help="start the CSV with a schema version comment line")

    p = sub.add_parser("convert", help="convert between kern and ekern")
    p.add_argument("--to", choices=["ekern", "kern"], required=True)
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)

    p = sub.add_parser("standardize", help="rewrite kern in canonical form")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)

    p = sub.add_parser("ser", help="symbol error rate of a prediction")
    p.add_argument("ref", type=Path)
    p.add_argument("pred", type=Path)
    p.add_argument("--format", choices=["kern", "ekern"], default="kern")

    p = sub.add_parser("stats", help="token counts and pitch histogram of a corpus")
    p.add_argument("directory", type=Path)
    p.add_argument("--pitch-histogram", type=Path, metavar="CSV", help="write pitch,count CSV")
    p.add_argument("--exclude-token", action="append", type=_token_category, default=[],
                   metavar="NAME", help="drop a token category before counting (repeatable)")
    p.add_argument("--sample-std", action="store_true", help="sample instead of population std")
    return ap


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="")


def _pct(frac) -> str:
    return f"{round_half_up(frac * 100, 1):.1f}%"


def _log_warnings(name: Path, warnings) -> None:
    for w in warnings:
        logger.warning("%s:%s:%s: %s: %s", name, w.line, w.column, w.rule, w.message)


def cmd_compare(args) -> int:
    ref_text, pred_text = _read(args.ref), _read(args.pred)
    ref, ref_warn = parse_lenient(ref_text)
    pred, pred_warn = parse_lenient(pred_text)
    _log_warnings(args.ref, ref_warn)
    _log_warnings(args.pred, pred_warn)
    d = diff_scores(pred, ref, DiffOptions(frozenset(args.exclude_category)))
    out = []
    for c in CATEGORIES:
        if c not in args.exclude_category:
            out.append(f"{c.value:<13} {d.per_category[c]}")
    out.append(f"total edits: {d.distance} (insertions {d.insertions}, deletions {d.deletions})")
    out.append(f"symbols: pred {d.n_pred}, ref {d.n_ref}")
    m = omr_ned(d)
    out.append(f"OMR-NED: {m} ({_pct(m.fraction)})")
    if d.distance:
        groups = category_percentages(d)
        out.append("groups: " + ", ".join(f"{g.value} {v:.1f}%" for g, v in groups.items()))
    if args.ser:
        try:
            s = ser(tokenize(ref_text, encoding=args.format), tokenize(pred_text, encoding=args.format))
            out.append(f"SER: {s} ({_pct(s.fraction)})")
        except EmptyReference as exc:
            out.append(f"SER: undefined ({exc})")
    if ref_warn or pred_warn:
        out.append(f"parse warnings: ref {len(ref_warn)}, pred {len(pred_warn)}")
    print("\n".join(out))
    if args.edits:
        sys.stdout.write(format_edits(d.edits))
    elif args.edits_jsonl:
        sys.stdout.write(edits_to_jsonl(d.edits))
    return EXIT_OK


def cmd_batch(args) -> int:
    jobs = args.jobs if args.jobs is not None else default_jobs()
    report = batch_compare(args.ref_dir, args.pred_dir, DiffOptions(frozenset(args.exclude_category)),
                           with_ser=args.ser, jobs=jobs, encoding=args.format)
    write_csv(report, args.output, header_comment=args.header_comment)
    sys.stdout.write(summary_text(report))
    return EXIT_OK


def cmd_convert(args) -> int:
    text = _read(args.input)
    _write(args.output, to_ekern(text) if args.to == "ekern" else from_ekern(text))
    return EXIT_OK


def cmd_standardize(args) -> int:
    _write(args.output, standardize(_read(args.input)))
    return EXIT_OK


def cmd_ser(args) -> int:
    ref = tokenize(_read(args.ref), encoding=args.format)
    pred = tokenize(_read(args.pred), encoding=args.format)
    try:
        s = ser(ref, pred)
    except EmptyReference as exc:
        raise UsageError(str(exc)) from None
    print(f"SER: {s} ({_pct(s.fraction)}) [{s.numerator}/{s.denominator}]")
    return EXIT_OK


def cmd_stats(args) -> int:
    try:
        flt = TokenFilter.excluding(*args.exclude_token)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    stats = corpus_stats(args.directory, flt, sample_std=args.sample_std)
    if args.pitch_histogram:
        _write(args.pitch_histogram, histogram_csv(stats))
    sys.stdout.write(stats_text(stats))
    return EXIT_OK


COMMANDS = {
    "compare": cmd_compare,
    "batch": cmd_batch,
    "convert": cmd_convert,
    "standardize": cmd_standardize,
    "ser": cmd_ser,
    "stats": cmd_stats,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                            format="%(levelname)s %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, UnicodeDecodeError, EkernSyntaxError) as exc:
        print(f"omrned: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
