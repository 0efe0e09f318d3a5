"""OMR-NED: categorized symbol-level evaluation of optical music recognition output."""

from .diff import DiffOptions, DiffResult, Edit, Location, diff_scores
from .kern import parse_lenient, parse_strict, standardize, to_ekern, from_ekern, tokenize
from .metrics import MetricValue, category_percentages, omr_ned, ser
from .model import Category, ReportGroup, Score, SymbolBag, count_symbols

__version__ = "0.1.0"

__all__ = [
    "Category",
    "DiffOptions",
    "DiffResult",
    "Edit",
    "Location",
    "MetricValue",
    "ReportGroup",
    "Score",
    "SymbolBag",
    "category_percentages",
    "count_symbols",
    "diff_scores",
    "from_ekern",
    "omr_ned",
    "parse_lenient",
    "parse_strict",
    "ser",
    "standardize",
    "to_ekern",
    "tokenize",
]
