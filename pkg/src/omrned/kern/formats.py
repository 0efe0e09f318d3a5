"""Text-level transforms: standardized kern, ekern and token sequences."""

from __future__ import annotations

from dataclasses import dataclass

from .builder import canonical_key
from .reader import SPINE_TYPES, KernDocument, Record, read_document
from .tokens import EKERN_PIECE_SEP, EKERN_SYMBOL_SEP, NoteToken, parse_note_token

RECORD_SEP = "<nl>"
SPINE_SEP = "<t>"

TOKEN_CATEGORIES = frozenset({
    "durations", "pitches", "accidentals", "articulations", "dynamics",
    "ornaments", "lyrics", "barlines", "interpretations",
})


@dataclass(frozen=True)
class TokenFilter:
    """Categories of sub-symbols kept by :func:`tokenize`."""

    included: frozenset = TOKEN_CATEGORIES

    def __post_init__(self) -> None:
        inc = frozenset(self.included)
        if not inc:
            raise ValueError("a token filter must include at least one category")
        unknown = inc - TOKEN_CATEGORIES
        if unknown:
            raise ValueError(f"unknown token categories {sorted(unknown)}; "
                             f"valid: {sorted(TOKEN_CATEGORIES)}")
        object.__setattr__(self, "included", inc)

    @classmethod
    def full(cls) -> "TokenFilter":
        return cls(TOKEN_CATEGORIES)

    @classmethod
    def excluding(cls, *names: str) -> "TokenFilter":
        return cls(TOKEN_CATEGORIES - set(names))

    def __contains__(self, name: str) -> bool:
        return name in self.included


def _is_kern(doc: KernDocument, track: int) -> bool:
    return SPINE_TYPES.get(doc.spines[track]) in ("kern", "ekern")


def _note_tokens(cell: str) -> list[NoteToken]:
    return [parse_note_token(s) for s in cell.split(" ")]


def _standard_cells(doc: KernDocument, rec: Record) -> list[str]:
    if rec.kind == "data":
        out = []
        for cell, track in zip(rec.cells, rec.spines):
            if cell != "." and _is_kern(doc, track):
                cell = " ".join(t.canonical() for t in _note_tokens(cell))
            out.append(cell)
        return out
    if rec.kind == "interp":
        return [canonical_key(c) if c.startswith("*k[") else c for c in rec.cells]
    return list(rec.cells)


def _standard_records(doc: KernDocument) -> list[tuple[Record, list[str]]]:
    out = []
    for rec in doc.records:
        if rec.kind == "global":
            continue
        if rec.kind == "exclusive":
            cells = ["**kern" if SPINE_TYPES.get(c) == "ekern" else c for c in rec.cells]
            out.append((rec, cells))
            continue
        out.append((rec, _standard_cells(doc, rec)))
    return out


def standardize_document(doc: KernDocument) -> str:
    lines = ["\t".join(cells) for _, cells in _standard_records(doc)]
    return "\n".join(lines) + "\n" if lines else ""


def standardize(text: str) -> str:
    """Rewrite kern text in the single canonical form (lenient read)."""
    return standardize_document(read_document(text, strict=False))


# -- ekern --------------------------------------------------------------------

def to_ekern(text: str) -> str:
    doc = read_document(text, strict=False)
    lines = []
    for rec, cells in _standard_records(doc):
        if rec.kind == "exclusive":
            cells = ["**ekern" if SPINE_TYPES.get(c) == "kern" else c for c in cells]
        elif rec.kind == "data":
            cells = [
                " ".join(t.ekern() for t in _note_tokens(c))
                if c != "." and _is_kern(doc, tr) else c
                for c, tr in zip(cells, rec.spines)
            ]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n" if lines else ""


def from_ekern(text: str) -> str:
    """Convert ekern back to standardized kern.

    Raises :class:`~omrned.kern.reader.EkernSyntaxError` on misplaced
    separators; other irregularities are repaired leniently.
    """
    return standardize_document(read_document(text, strict=False, ekern_strict=True))


def ekern_atoms(ekern_cell: str) -> list[str]:
    """Split an ekern cell into its vocabulary atoms."""
    atoms = []
    for sub in ekern_cell.split(" "):
        for sym in sub.split(EKERN_SYMBOL_SEP):
            atoms.extend(p for p in sym.split(EKERN_PIECE_SEP) if p)
    return atoms


# -- tokens -------------------------------------------------------------------

def _filter_cell(doc: KernDocument, rec: Record, cell: str, track: int, flt: TokenFilter,
                 ekern: bool = False) -> list[str]:
    out = _filter_cell_text(doc, rec, cell, track, flt)
    if ekern and out and rec.kind == "data" and out != "." and _is_kern(doc, track):
        return ekern_atoms(" ".join(t.ekern() for t in _note_tokens(out)))
    return [out] if out else []


def _filter_cell_text(doc: KernDocument, rec: Record, cell: str, track: int, flt: TokenFilter) -> str:
    stype = SPINE_TYPES.get(doc.spines[track], "unknown")
    if rec.kind == "barline":
        return cell if "barlines" in flt else ""
    if rec.kind == "interp":
        if cell == "*-" or cell in ("*^", "*v", "*x"):
            return cell
        return cell if "interpretations" in flt else ""
    if rec.kind != "data":
        return cell
    if stype == "dynam" and "dynamics" not in flt:
        return ""
    if stype == "text" and "lyrics" not in flt:
        return ""
    if cell == "." or stype not in ("kern", "ekern"):
        return cell
    subs = []
    for t in _note_tokens(cell):
        s = t.filtered(
            keep_durations="durations" in flt,
            keep_pitches="pitches" in flt,
            keep_accidentals="accidentals" in flt,
            keep_articulations="articulations" in flt,
            keep_ornaments="ornaments" in flt,
        ).canonical()
        if s:
            subs.append(s)
    return " ".join(subs)


def tokenize(text: str, flt: TokenFilter | None = None, encoding: str = "kern") -> list[str]:
    """One token per cell of the standardized document, with separator tokens.

    ``RECORD_SEP`` separates records and ``SPINE_SEP`` separates cells of one
    record. Cells left empty by the filter are omitted, as are records left
    without cells. With ``encoding="ekern"`` each kern data cell is emitted as
    its ekern atoms instead of a single token.
    """
    if encoding not in ("kern", "ekern"):
        raise ValueError(f"unknown encoding {encoding!r}")
    flt = flt or TokenFilter.full()
    doc = read_document(text, strict=False)
    out: list[str] = []
    for rec, cells in _standard_records(doc):
        kept = [_filter_cell(doc, rec, c, tr, flt, encoding == "ekern")
                for c, tr in zip(cells, rec.spines)]
        kept = [c for c in kept if c]
        if not kept:
            continue
        if out:
            out.append(RECORD_SEP)
        for j, c in enumerate(kept):
            if j:
                out.append(SPINE_SEP)
            out.extend(c)
    return out


def detokenize(tokens: list[str]) -> str:
    text = "".join("\n" if t == RECORD_SEP else "\t" if t == SPINE_SEP else t for t in tokens)
    return text + "\n" if text else ""


def data_tokens(tokens: list[str]) -> list[str]:
    return [t for t in tokens if t not in (RECORD_SEP, SPINE_SEP)]
