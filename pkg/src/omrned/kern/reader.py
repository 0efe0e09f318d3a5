"""Record-level Humdrum reader: spine topology, cell counts and cell cleanup.

The same code path serves strict and lenient reading. Every irregularity goes
through :meth:`_Diagnostics.issue`, which raises :class:`KernSyntaxError` in
strict mode and records a :class:`ParseWarning` (then applies the recovery) in
lenient mode. A strict-valid document therefore yields no warnings.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Optional

from .tokens import (
    EKERN_PIECE_SEP,
    EKERN_SYMBOL_SEP,
    TokenProblem,
    parse_note_token,
    validate_duration,
)

logger = logging.getLogger(__name__)

SPINE_TYPES = {
    "**kern": "kern",
    "**ekern": "ekern",
    "**dynam": "dynam",
    "**dyn": "dynam",
    "**text": "text",
    "**silbe": "text",
    "**harm": "harm",
    "**mxhm": "harm",
}

CLEF_RE = re.compile(r"^\*clef([GFCX])(v+|\^+)?(\d)?$")
KEY_RE = re.compile(r"^\*k\[((?:[a-g](?:#{1,2}|-{1,2}|n))*)\]$")
METER_RE = re.compile(r"^\*M(\d+)/(\d+)$")
MET_RE = re.compile(r"^\*met\((.*)\)$")
OTTAVA_RE = re.compile(r"^\*(X?)(8va|8ba|15ma|15mb)$")
DYNAM_WORD_RE = re.compile(r"^[a-zA-Z]+$")


class KernSyntaxError(ValueError):
    """Malformed input in strict mode. ``line`` and ``column`` are 1-based."""

    def __init__(self, line: int, column: int, reason: str):
        super().__init__(f"line {line}, column {column}: {reason}")
        self.line = line
        self.column = column
        self.reason = reason


class EkernSyntaxError(KernSyntaxError):
    """Misplaced ekern separators."""


@dataclass(frozen=True)
class ParseWarning:
    line: int
    column: int
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column} [{self.rule}] {self.message}"


@dataclass
class Record:
    line: int
    kind: str  # exclusive | interp | data | barline | local | global
    cells: list[str]
    spines: list[int] = field(default_factory=list)  # track index per cell


@dataclass
class KernDocument:
    spines: list[str]  # exclusive interpretation per track, e.g. "**kern"
    records: list[Record]
    provenance: str = "raw"
    warnings: list[ParseWarning] = field(default_factory=list)

    def spine_type(self, track: int) -> str:
        return SPINE_TYPES.get(self.spines[track], "unknown")


class _Diagnostics:
    def __init__(self, strict: bool, ekern_strict: bool = False):
        self.strict = strict
        self.ekern_strict = ekern_strict
        self.warnings: list[ParseWarning] = []

    def issue(self, line: int, column: int, rule: str, message: str, ekern: bool = False) -> None:
        if ekern and self.ekern_strict:
            raise EkernSyntaxError(line, column, message)
        if self.strict:
            raise KernSyntaxError(line, column, message)
        self.warnings.append(ParseWarning(line, column, rule, message))


def _kind_of(cell: str) -> str:
    if cell.startswith("!!"):
        return "global"
    if cell.startswith("**"):
        return "exclusive"
    if cell.startswith("*"):
        return "interp"
    if cell.startswith("="):
        return "barline"
    if cell.startswith("!"):
        return "local"
    return "data"


_NULL_FOR = {"interp": "*", "data": ".", "local": "!"}


def _cell_columns(line: str) -> list[int]:
    cols, pos = [], 1
    for cell in line.split("\t"):
        cols.append(pos)
        pos += len(cell) + 1
    return cols


# ---------------------------------------------------------------------------
# cell cleanup

def clean_note_cell(cell: str, line: int, column: int, diag: _Diagnostics) -> str:
    """Validate a kern data cell; in lenient mode return the repaired cell."""
    if cell == ".":
        return cell
    before = len(diag.warnings)
    kept = []
    first_duration: Optional[str] = None
    for sub in cell.split(" "):
        if sub == "":
            diag.issue(line, column, "bad-cell", "empty chord subtoken")
            continue
        if sub == ".":
            diag.issue(line, column, "bad-cell", "null subtoken inside a chord")
            continue

        def report(pos: int, rule: str, message: str, _col=column) -> None:
            diag.issue(line, _col + pos, rule, message)

        tok = parse_note_token(sub, report)
        if not tok.pitch:
            diag.issue(line, column, "bad-cell", f"no pitch or rest in {sub!r}")
            continue
        reason = validate_duration(tok)
        if reason:
            diag.issue(line, column, "unsupported-duration", reason)
            tok.duration = "4"
        if tok.duration and first_duration is None:
            first_duration = tok.duration
        kept.append(tok)
        column += len(sub) + 1
    if not kept:
        return "."
    if not first_duration and not all(t.is_grace for t in kept):
        diag.issue(line, column, "missing-duration", f"no duration in {cell!r}")
        kept[0].duration = "4"
    if len(diag.warnings) == before:
        return cell
    # something was repaired: emit the cleaned tokens
    return " ".join(t.canonical() for t in kept)


def ekern_cell_to_kern(cell: str, line: int, column: int, diag: _Diagnostics) -> str:
    if cell == ".":
        return cell
    out = []
    for sub in cell.split(" "):
        joined = sub.replace(EKERN_SYMBOL_SEP, "").replace(EKERN_PIECE_SEP, "")
        bad = (not sub or sub[0] in (EKERN_SYMBOL_SEP, EKERN_PIECE_SEP)
               or sub[-1] in (EKERN_SYMBOL_SEP, EKERN_PIECE_SEP)
               or any(p == "" for p in re.split("[@·]", sub)))
        if not bad:
            try:
                bad = parse_note_token(joined).ekern() != sub
            except TokenProblem:
                bad = False  # left to the kern-level checks
        if bad:
            diag.issue(line, column, "ekern-separator", f"misplaced ekern separators in {sub!r}",
                       ekern=True)
        out.append(joined)
        column += len(sub) + 1
    return " ".join(out)


def clean_dynam_cell(cell: str, line: int, column: int, diag: _Diagnostics) -> str:
    if cell == ".":
        return cell
    kept = []
    for sub in cell.split(" "):
        if sub in ("<", ">", "[", "]", "(", ")") or DYNAM_WORD_RE.match(sub):
            kept.append(sub)
        else:
            diag.issue(line, column, "bad-cell", f"unrecognized dynamic {sub!r}")
    return " ".join(kept) if kept else "."


def check_interpretation(cell: str, line: int, column: int, diag: _Diagnostics) -> str:
    """Validate the clef/key/meter family of tandem interpretations."""
    if cell.startswith("*clef"):
        ok = CLEF_RE.match(cell)
    elif cell.startswith("*k["):
        ok = KEY_RE.match(cell)
    elif re.match(r"^\*M\d", cell):
        ok = METER_RE.match(cell)
    elif cell.startswith("*met("):
        ok = MET_RE.match(cell)
    else:
        return cell
    if not ok:
        diag.issue(line, column, "bad-interpretation", f"malformed interpretation {cell!r}")
        return "*"
    return cell


# ---------------------------------------------------------------------------
# reader

def read_document(text: str, strict: bool = True, ekern_strict: bool = False) -> KernDocument:
    diag = _Diagnostics(strict, ekern_strict)
    raw_lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    lines = [(i + 1, ln) for i, ln in enumerate(raw_lines) if ln.strip() != ""]

    records: list[Record] = []
    # header
    idx = 0
    while idx < len(lines) and lines[idx][1].startswith("!!"):
        records.append(Record(lines[idx][0], "global", [lines[idx][1]]))
        idx += 1
    if idx >= len(lines):
        diag.issue(1, 1, "missing-header", "no exclusive interpretation (empty document)")
        return KernDocument([], records, warnings=diag.warnings)

    lineno, head = lines[idx]
    spines: list[str]
    if head.startswith("**"):
        spines = head.split("\t")
        for j, (cell, col) in enumerate(zip(spines, _cell_columns(head))):
            if not cell.startswith("**"):
                diag.issue(lineno, col, "missing-header", f"bad exclusive interpretation {cell!r}")
                spines[j] = "**kern"
            elif cell not in SPINE_TYPES:
                diag.issue(lineno, col, "unknown-spine", f"unsupported spine type {cell!r}")
        idx += 1
    else:
        width = max(len(ln.split("\t")) for _, ln in lines[idx:]
                    if not ln.startswith("!!"))
        diag.issue(lineno, 1, "missing-header",
                   f"no **kern header; assuming {width} kern spine(s)")
        spines = ["**kern"] * width
    records.append(Record(lineno, "exclusive", list(spines), list(range(len(spines)))))

    columns: list[int] = list(range(len(spines)))  # live columns -> track
    terminated = False
    for lineno, text_line in lines[idx:]:
        if text_line.startswith("!!"):
            records.append(Record(lineno, "global", [text_line]))
            continue
        if terminated:
            diag.issue(lineno, 1, "trailing-content", "content after all spines were terminated")
            continue
        cells = text_line.split("\t")
        cols = _cell_columns(text_line)
        kind = _kind_of(cells[0])
        if kind == "exclusive":
            diag.issue(lineno, 1, "spine-path", "exclusive interpretation inside the document")
            continue

        # rule 2: cell-count repair
        if len(cells) != len(columns):
            diag.issue(lineno, cols[min(len(cols), len(columns)) - 1] if columns else 1,
                       "cell-count",
                       f"{len(cells)} cells for {len(columns)} active spines")
            if len(cells) < len(columns):
                pad = cells[0] if kind == "barline" else _NULL_FOR[kind]
                cols += [cols[-1]] * (len(columns) - len(cells))
                cells = cells + [pad] * (len(columns) - len(cells))
            else:
                cells, cols = cells[:len(columns)], cols[:len(columns)]

        # mixed record kinds
        for j, cell in enumerate(cells):
            ck = _kind_of(cell) if cell else "empty"
            if ck != kind:
                diag.issue(lineno, cols[j], "bad-cell",
                           f"{cell!r} does not belong in a {kind} record")
                cells[j] = cells[0] if kind == "barline" else _NULL_FOR[kind]

        tracks = list(columns)
        if kind == "interp":
            cells = [check_interpretation(c, lineno, cols[j], diag) for j, c in enumerate(cells)]
            columns = _apply_spine_paths(cells, columns, lineno, cols, diag)
            terminated = not columns
        elif kind == "data":
            for j, cell in enumerate(cells):
                stype = SPINE_TYPES.get(spines[tracks[j]], "unknown")
                if stype == "ekern":
                    cell = ekern_cell_to_kern(cell, lineno, cols[j], diag)
                    stype = "kern"
                if stype == "kern":
                    cells[j] = clean_note_cell(cell, lineno, cols[j], diag)
                elif stype == "dynam":
                    cells[j] = clean_dynam_cell(cell, lineno, cols[j], diag)
                else:
                    cells[j] = cell.strip() or "."
        records.append(Record(lineno, kind, cells, tracks))

    if not terminated:
        last = lines[-1][0] if lines else 1
        diag.issue(last, 1, "missing-terminator", "spines not terminated; closing them")
        records.append(Record(last + 1, "interp", ["*-"] * len(columns), list(columns)))

    return KernDocument(spines, records, warnings=diag.warnings)


def _apply_spine_paths(cells: list[str], columns: list[int], lineno: int,
                       cols: list[int], diag: _Diagnostics) -> list[int]:
    """Return the live column->track list after the manipulators in ``cells``."""
    out: list[int] = []
    j = 0
    n = len(cells)
    while j < n:
        c = cells[j]
        if c == "*^":
            out += [columns[j], columns[j]]
            j += 1
        elif c == "*v":
            k = j
            while k < n and cells[k] == "*v":
                k += 1
            if k - j < 2:
                diag.issue(lineno, cols[j], "spine-path", "lone *v merge")
                cells[j] = "*"
                out.append(columns[j])
                j += 1
                continue
            if len(set(columns[j:k])) != 1:
                diag.issue(lineno, cols[j], "spine-path", "*v merges sub-spines of different spines")
            out.append(columns[j])
            j = k
        elif c == "*x":
            if j + 1 < n and cells[j + 1] == "*x":
                out += [columns[j + 1], columns[j]]
                j += 2
            else:
                diag.issue(lineno, cols[j], "spine-path", "unpaired *x exchange")
                cells[j] = "*"
                out.append(columns[j])
                j += 1
        elif c == "*-":
            j += 1
        elif c == "*+":
            diag.issue(lineno, cols[j], "spine-path", "*+ spine addition is not supported")
            cells[j] = "*"
            out.append(columns[j])
            j += 1
        else:
            out.append(columns[j])
            j += 1
    return out
