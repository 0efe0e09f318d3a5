"""OMR-NED, symbol error rate and per-group error profiles."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from rapidfuzz.distance import Levenshtein

from .diff import DiffResult
from .model import ReportGroup, report_group


class EmptyReference(ValueError):
    """SER is undefined for an empty reference sequence."""


@dataclass(frozen=True)
class MetricValue:
    numerator: int
    denominator: int

    @property
    def fraction(self) -> Fraction:
        if self.denominator == 0:
            return Fraction(0)
        return Fraction(self.numerator, self.denominator)

    @property
    def value(self) -> float:
        return float(self.fraction)

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        return f"{self.value:.4f}"


def omr_ned(d: DiffResult) -> MetricValue:
    """(I + D) / (N1 + N2); two empty scores score 0."""
    return MetricValue(d.insertions + d.deletions, d.n_pred + d.n_ref)


def edit_distance(ref_tokens: Sequence, pred_tokens: Sequence) -> int:
    """Unit-cost Levenshtein distance between two token sequences."""
    return Levenshtein.distance(list(pred_tokens), list(ref_tokens))


def ser(ref_tokens: Sequence, pred_tokens: Sequence) -> MetricValue:
    if not ref_tokens:
        raise EmptyReference("symbol error rate needs a non-empty reference")
    return MetricValue(edit_distance(ref_tokens, pred_tokens), len(ref_tokens))


def round_half_up(x: Fraction | float, places: int = 1) -> float:
    q = Decimal(1).scaleb(-places)
    if isinstance(x, Fraction):
        d = Decimal(x.numerator) / Decimal(x.denominator)
    else:
        d = Decimal(repr(x))
    return float(d.quantize(q, rounding=ROUND_HALF_UP))


def group_distances(d: DiffResult) -> dict[ReportGroup, int]:
    out = {g: 0 for g in ReportGroup}
    for cat, n in d.per_category.items():
        out[report_group(cat)] += n
    return out


def category_percentages(d: DiffResult) -> dict[ReportGroup, float]:
    """Share of the edit distance falling in each report group, in percent (1 decimal)."""
    total = d.insertions + d.deletions
    groups = group_distances(d)
    if total == 0:
        return {g: 0.0 for g in ReportGroup}
    return {g: round_half_up(Fraction(100 * n, total)) for g, n in groups.items()}
