"""Humdrum **kern input/output."""

from __future__ import annotations

from ..model import Score
from .builder import build_score
from .formats import (
    RECORD_SEP,
    SPINE_SEP,
    TOKEN_CATEGORIES,
    TokenFilter,
    data_tokens,
    detokenize,
    ekern_atoms,
    from_ekern,
    standardize,
    to_ekern,
    tokenize,
)
from .reader import (
    EkernSyntaxError,
    KernDocument,
    KernSyntaxError,
    ParseWarning,
    read_document,
)


def parse_strict(text: str) -> Score:
    """Parse well-formed kern; raises :class:`KernSyntaxError` on any irregularity."""
    return build_score(read_document(text, strict=True))


def parse_lenient(text: str) -> tuple[Score, list[ParseWarning]]:
    """Parse arbitrary text, repairing what it can. Never raises on content."""
    doc = read_document(text, strict=False)
    return build_score(doc, tuple(doc.warnings)), list(doc.warnings)


__all__ = [
    "EkernSyntaxError",
    "KernDocument",
    "KernSyntaxError",
    "ParseWarning",
    "RECORD_SEP",
    "SPINE_SEP",
    "TOKEN_CATEGORIES",
    "TokenFilter",
    "data_tokens",
    "detokenize",
    "ekern_atoms",
    "from_ekern",
    "parse_lenient",
    "parse_strict",
    "read_document",
    "standardize",
    "to_ekern",
    "tokenize",
]
