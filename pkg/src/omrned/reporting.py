"""Folder-vs-folder evaluation, the per-file CSV report and corpus statistics."""

from __future__ import annotations

import csv
import io
import logging
import statistics
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from .diff import DiffOptions, DiffResult, diff_scores
from .kern import TokenFilter, data_tokens, parse_lenient, read_document, tokenize
from .kern.reader import SPINE_TYPES
from .kern.tokens import TokenProblem, parse_note_token
from .metrics import MetricValue, edit_distance, omr_ned, round_half_up
from .model import CATEGORIES, STEPS, Score, SymbolBag

logger = logging.getLogger(__name__)

SCORE_SUFFIXES = (".krn", ".kern", ".ekrn")
CSV_HEADER = ["file"] + [c.value for c in CATEGORIES] + [
    "total_edits", "pred_symbols", "ref_symbols", "omr_ned"]
REPORT_COMMENT = "# omr-ned-report v1"

PathLike = Union[str, Path]


class DirectoryNotFound(FileNotFoundError):
    pass


@dataclass(frozen=True)
class ReportRow:
    file: str
    per_category: SymbolBag
    total: int
    n_pred: int
    n_ref: int
    omr_ned: MetricValue
    ser: Optional[MetricValue] = None
    status: str = "ok"
    warning_count: int = 0


@dataclass(frozen=True)
class RunReport:
    rows: tuple[ReportRow, ...]
    with_ser: bool = False

    @property
    def per_category(self) -> SymbolBag:
        total = SymbolBag()
        for r in self.rows:
            total = total + r.per_category
        return total

    @property
    def total_edits(self) -> int:
        return sum(r.total for r in self.rows)

    @property
    def n_pred(self) -> int:
        return sum(r.n_pred for r in self.rows)

    @property
    def n_ref(self) -> int:
        return sum(r.n_ref for r in self.rows)

    @property
    def omr_ned(self) -> MetricValue:
        """Pooled over the run: sum of edits over sum of symbols."""
        return MetricValue(self.total_edits, self.n_pred + self.n_ref)

    @property
    def macro_omr_ned(self) -> Fraction:
        if not self.rows:
            return Fraction(0)
        return sum((r.omr_ned.fraction for r in self.rows), Fraction(0)) / len(self.rows)

    @property
    def ser(self) -> Optional[MetricValue]:
        vals = [r.ser for r in self.rows if r.ser is not None]
        if not self.with_ser:
            return None
        return MetricValue(sum(v.numerator for v in vals), sum(v.denominator for v in vals))


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8", errors="replace")


def row_from_diff(name: str, d: DiffResult, ser_value: Optional[MetricValue] = None,
                  status: str = "ok", warning_count: int = 0) -> ReportRow:
    return ReportRow(name, d.per_category, d.distance, d.n_pred, d.n_ref, omr_ned(d),
                     ser_value, status, warning_count)


def compare_texts(ref_text: Optional[str], pred_text: Optional[str],
                  opts: Optional[DiffOptions] = None, with_ser: bool = False, name: str = "",
                  encoding: str = "kern") -> ReportRow:
    """Evaluate one prediction against its reference; ``pred_text=None`` means missing."""
    ref, ref_warn = parse_lenient(ref_text or "")
    if pred_text is None:
        pred, pred_warn = Score(), []
    else:
        pred, pred_warn = parse_lenient(pred_text)
    d = diff_scores(pred, ref, opts)
    ser_value = None
    if with_ser:
        ref_tokens = tokenize(ref_text or "", encoding=encoding)
        pred_tokens = tokenize(pred_text, encoding=encoding) if pred_text is not None else []
        if ref_tokens:
            ser_value = MetricValue(edit_distance(ref_tokens, pred_tokens), len(ref_tokens))
    n_warn = len(ref_warn) + len(pred_warn)
    if pred_text is None:
        status = "missing_pair"
    elif n_warn:
        status = f"parse_warnings({n_warn})"
    else:
        status = "ok"
    return row_from_diff(name, d, ser_value, status, n_warn)


def _evaluate(job: tuple) -> ReportRow:
    name, ref_path, pred_path, opts, with_ser, encoding = job
    pred_text = _read(Path(pred_path)) if pred_path else None
    return compare_texts(_read(Path(ref_path)), pred_text, opts, with_ser, name, encoding)


def score_files(directory: Path) -> list[Path]:
    return sorted((p for p in directory.iterdir()
                   if p.is_file() and p.suffix.lower() in SCORE_SUFFIXES), key=lambda p: p.name)


def batch_compare(gt_dir: PathLike, pred_dir: PathLike, opts: Optional[DiffOptions] = None,
                  with_ser: bool = False, jobs: int = 1, encoding: str = "kern") -> RunReport:
    gt_dir, pred_dir = Path(gt_dir), Path(pred_dir)
    for d in (gt_dir, pred_dir):
        if not d.is_dir():
            raise DirectoryNotFound(f"not a directory: {d}")
    opts = opts or DiffOptions()
    job_list = []
    for ref_path in score_files(gt_dir):
        pred_path = pred_dir / ref_path.name
        job_list.append((ref_path.name, str(ref_path), str(pred_path) if pred_path.is_file() else None,
                         opts, with_ser, encoding))
    if jobs > 1 and len(job_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_evaluate, job_list))
    else:
        rows = [_evaluate(j) for j in job_list]
    for r in rows:
        if r.status != "ok":
            logger.info("%s: %s", r.file, r.status)
    return RunReport(tuple(rows), with_ser)


def _ratio(m: Optional[MetricValue]) -> str:
    if m is None:
        return ""
    return f"{round_half_up(m.fraction, 4):.4f}"


def report_csv(report: RunReport, with_ser: Optional[bool] = None, header_comment: bool = False) -> str:
    with_ser = report.with_ser if with_ser is None else with_ser
    buf = io.StringIO()
    if header_comment:
        buf.write(REPORT_COMMENT + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER + (["ser"] if with_ser else []))
    for r in report.rows:
        row = [r.file] + [r.per_category[c] for c in CATEGORIES] + [
            r.total, r.n_pred, r.n_ref, _ratio(r.omr_ned)]
        if with_ser:
            row.append(_ratio(r.ser))
        w.writerow(row)
    pc = report.per_category
    summary = ["TOTAL"] + [pc[c] for c in CATEGORIES] + [
        report.total_edits, report.n_pred, report.n_ref, _ratio(report.omr_ned)]
    if with_ser:
        summary.append(_ratio(report.ser))
    w.writerow(summary)
    return buf.getvalue()


def write_csv(report: RunReport, out: PathLike, with_ser: Optional[bool] = None,
              header_comment: bool = False) -> None:
    Path(out).write_text(report_csv(report, with_ser, header_comment), encoding="utf-8", newline="")


def summary_text(report: RunReport) -> str:
    lines = [
        f"files: {len(report.rows)}",
        f"total edits: {report.total_edits}",
        f"symbols (pred/ref): {report.n_pred}/{report.n_ref}",
        f"OMR-NED (pooled): {report.omr_ned.value:.4f}",
        f"OMR-NED (mean of files): {float(report.macro_omr_ned):.4f}",
    ]
    if report.ser is not None:
        lines.append(f"SER (pooled): {report.ser.value:.4f}")
    flagged = [r for r in report.rows if r.status != "ok"]
    for r in flagged:
        lines.append(f"  {r.file}: {r.status}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# corpus statistics

@dataclass
class CorpusStats:
    file_count: int
    token_counts: dict[str, int]
    mean_tokens: float
    std_tokens: float
    pitch_histogram: Counter = field(default_factory=Counter)
    errors: dict[str, str] = field(default_factory=dict)


def pitch_sort_key(name: str) -> tuple[int, int]:
    return (int(name[1:]), STEPS.index(name[0]))


def pitch_tokens(text: str) -> list[str]:
    """Spelled pitch plus octave (e.g. ``C4``) of every note in the kern spines."""
    doc = read_document(text, strict=False)
    out = []
    for rec in doc.records:
        if rec.kind != "data":
            continue
        for cell, track in zip(rec.cells, rec.spines):
            if cell == "." or SPINE_TYPES.get(doc.spines[track]) not in ("kern", "ekern"):
                continue
            for sub in cell.split(" "):
                try:
                    tok = parse_note_token(sub)
                except TokenProblem:
                    continue
                if tok.pitch and not tok.is_rest:
                    out.append(f"{tok.step}{tok.octave}")
    return out


def corpus_stats(directory: PathLike, flt: Optional[TokenFilter] = None, sample_std: bool = False) -> CorpusStats:
    directory = Path(directory)
    if not directory.is_dir():
        raise DirectoryNotFound(f"not a directory: {directory}")
    flt = flt or TokenFilter.full()
    counts: dict[str, int] = {}
    hist: Counter = Counter()
    errors: dict[str, str] = {}
    for path in score_files(directory):
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            errors[path.name] = str(exc)
            logger.warning("skipping %s: %s", path, exc)
            continue
        counts[path.name] = len(data_tokens(tokenize(text, flt)))
        hist.update(pitch_tokens(text))
    values = list(counts.values())
    mean = statistics.fmean(values) if values else 0.0
    if len(values) < 1 or (sample_std and len(values) < 2):
        std = 0.0
    else:
        std = statistics.stdev(values) if sample_std else statistics.pstdev(values)
    return CorpusStats(len(values), counts, mean, std, hist, errors)


def histogram_csv(stats: CorpusStats) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pitch", "count"])
    for name in sorted(stats.pitch_histogram, key=pitch_sort_key):
        w.writerow([name, stats.pitch_histogram[name]])
    return buf.getvalue()


def stats_text(stats: CorpusStats) -> str:
    lines = [
        f"files: {stats.file_count}",
        f"tokens per file: {stats.mean_tokens:.1f} ± {stats.std_tokens:.1f}",
        f"pitch tokens: {sum(stats.pitch_histogram.values())}",
    ]
    if stats.pitch_histogram:
        top = sorted(stats.pitch_histogram.items(), key=lambda kv: (-kv[1], pitch_sort_key(kv[0])))[:5]
        lines.append("most frequent: " + ", ".join(f"{p} ({n})" for p, n in top))
    for name, err in stats.errors.items():
        lines.append(f"unreadable: {name}: {err}")
    return "\n".join(lines) + "\n"
