"""Build a :class:`~omrned.model.Score` from a read :class:`KernDocument`.

Timing follows the Humdrum grid: each data record starts when the earliest
sounding note of the previous records ends (grace notes do not advance
time). Offsets restart at zero after every barline.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..model import (
    Arpeggio,
    ChordSymbol,
    Clef,
    Direction,
    Dynamic,
    Ending,
    KeySignature,
    Lyric,
    Measure,
    NonNoteObject,
    NoteEvent,
    Ottava,
    Part,
    REST_TYPES,
    RestEvent,
    Score,
    Slur,
    StaffGroup,
    TimeSignature,
)
from .reader import (
    CLEF_RE,
    KEY_RE,
    MET_RE,
    METER_RE,
    OTTAVA_RE,
    SPINE_TYPES,
    KernDocument,
)
from .tokens import NoteToken, parse_note_token, visual_value

logger = logging.getLogger(__name__)

SHARP_ORDER = "fcgdaeb"
FLAT_ORDER = "beadgcf"
_DISPLAY = {-2: "--", -1: "-", 0: "n", 1: "#", 2: "##"}
_HEAD = {1: "whole", 2: "half"}
SECTION_RE = re.compile(r"^\*>([^\[\]]+)$")
PART_RE = re.compile(r"^\*part(\d+)$")


def canonical_key(cell: str) -> str:
    """Sort a ``*k[...]`` key signature into circle-of-fifths order."""
    m = KEY_RE.match(cell)
    if not m:
        return cell
    items = re.findall(r"[a-g](?:#{1,2}|-{1,2}|n)", m.group(1))

    def order(item: str) -> tuple[int, int]:
        if item[1] == "#":
            return (0, SHARP_ORDER.index(item[0]))
        if item[1] == "-":
            return (1, FLAT_ORDER.index(item[0]))
        return (2, "cdefgab".index(item[0]))

    return "*k[" + "".join(sorted(items, key=order)) + "]"


@dataclass
class _Obj:
    """Mutable non-note placeholder, frozen into a NonNoteObject at the end."""
    offset: Fraction
    kind: object
    open_abs: Optional[Fraction] = None
    duration: Optional[Fraction] = None
    label: str = ""


@dataclass
class _MeasureBuf:
    notes: list = field(default_factory=list)
    rests: list = field(default_factory=list)
    objs: list = field(default_factory=list)


@dataclass
class _PartState:
    pid: int
    measures: list[_MeasureBuf] = field(default_factory=list)
    current: _MeasureBuf = field(default_factory=_MeasureBuf)
    key_alter: dict = field(default_factory=dict)
    acc_state: dict = field(default_factory=dict)
    open_slurs: list = field(default_factory=list)
    open_ottavas: dict = field(default_factory=dict)
    sections: list = field(default_factory=list)  # (measure index, label, _Obj|None)
    pending_directions: list = field(default_factory=list)
    text_tracks: list = field(default_factory=list)
    part_label: Optional[str] = None


@dataclass
class _Column:
    track: int
    end: Fraction = Fraction(0)
    beam_depth: int = 0


def _attach_tracks(spines: list[str]) -> tuple[dict[int, int], list[int]]:
    """Map every track to a part id; non-kern spines join the kern spine to their left."""
    kern_tracks = [t for t, s in enumerate(spines) if SPINE_TYPES.get(s) in ("kern", "ekern")]
    part_of: dict[int, int] = {t: i for i, t in enumerate(kern_tracks)}
    for t, s in enumerate(spines):
        if t in part_of or not kern_tracks:
            continue
        left = [k for k in kern_tracks if k < t]
        part_of[t] = part_of[left[-1]] if left else 0
    return part_of, kern_tracks


def build_score(doc: KernDocument, warnings: tuple = ()) -> Score:
    part_of, kern_tracks = _attach_tracks(doc.spines)
    parts = [_PartState(i) for i in range(len(kern_tracks))]
    stype = {t: SPINE_TYPES.get(s, "unknown") for t, s in enumerate(doc.spines)}
    for t in sorted(part_of):
        if stype[t] == "text":
            parts[part_of[t]].text_tracks.append(t)

    columns: list[_Column] = []
    cur = Fraction(0)           # time of the next data record within the measure
    measure_abs = Fraction(0)   # absolute start of the current measure
    segment_has_data = False
    last_span = Fraction(0)
    hairpins: dict[int, list[_Obj]] = {}

    def add_obj(pid: int, kind, offset: Fraction, dedupe: Optional[set] = None) -> _Obj:
        if dedupe is not None:
            key = (pid, repr(kind))
            if key in dedupe:
                return None
            dedupe.add(key)
        obj = _Obj(offset, kind)
        parts[pid].current.objs.append(obj)
        return obj

    def close_measure() -> None:
        nonlocal cur, measure_abs, segment_has_data, last_span
        span = max([cur] + [c.end for c in columns])
        if segment_has_data:
            last_span = span
            for p in parts:
                p.measures.append(p.current)
                p.current = _MeasureBuf()
                p.acc_state = {}
            measure_abs += span
        # empty segments keep their objects in the buffer for the next measure
        cur = Fraction(0)
        for c in columns:
            c.end = Fraction(0)
        segment_has_data = False

    for rec in doc.records:
        if rec.kind == "exclusive":
            columns = [_Column(t) for t in rec.spines]
            continue
        if rec.kind in ("global",):
            continue
        if rec.kind == "barline":
            close_measure()
            continue
        if rec.kind == "local":
            for j, cell in enumerate(rec.cells):
                t = rec.spines[j]
                if stype[t] in ("kern", "ekern") and cell.startswith("!LO:TX"):
                    text = _layout_text(cell)
                    if text:
                        parts[part_of[t]].pending_directions.append(text)
            continue
        if rec.kind == "interp":
            seen: set = set()
            met_seen: set = set()
            for j, cell in enumerate(rec.cells):
                t = rec.spines[j]
                if stype[t] not in ("kern", "ekern") or cell == "*":
                    continue
                _interpretation(cell, parts[part_of[t]], cur, measure_abs + cur,
                                add_obj, seen, met_seen)
            columns = _next_columns(rec.cells, columns)
            continue

        # data record
        segment_has_data = True
        has_grace = False
        for p in parts:
            for text in p.pending_directions:
                add_obj(p.pid, Direction(text), cur)
            p.pending_directions = []
        for j, cell in enumerate(rec.cells):
            col = columns[j]
            t = col.track
            if cell == ".":
                continue
            kind = stype[t]
            pid = part_of.get(t)
            if pid is None:
                continue
            if kind in ("kern", "ekern"):
                dur, grace = _note_cell(cell, parts[pid], col, cur, measure_abs + cur, add_obj)
                has_grace = has_grace or grace
                if not grace:
                    col.end = cur + dur
            elif kind == "dynam":
                _dynam_cell(cell, pid, t, cur, measure_abs + cur, add_obj, hairpins)
            elif kind == "text":
                syl = cell.strip("-").strip()
                if syl and syl != "_":
                    verse = parts[pid].text_tracks.index(t) + 1
                    add_obj(pid, Lyric(syl, str(verse)), cur)
            elif kind == "harm":
                add_obj(pid, ChordSymbol(cell), cur)
        if not has_grace:
            later = [c.end for c in columns if c.end > cur]
            if later:
                cur = min(later)

    # final segment: "all content since the last barline forms one measure"
    if segment_has_data:
        close_measure()
    for p in parts:
        leftover = p.current.objs
        if leftover:
            if p.measures:
                for o in leftover:
                    o.offset = last_span
                p.measures[-1].objs.extend(leftover)
            else:
                p.measures.append(p.current)

    _close_sections(parts)
    frozen_parts = tuple(_freeze(p) for p in parts)
    groups = _staff_groups(parts)
    return Score(frozen_parts, groups, tuple(warnings))


# ---------------------------------------------------------------------------

def _layout_text(cell: str) -> str:
    for param in cell.split(":")[2:]:
        if param.startswith("t="):
            return param[2:].replace("&colon;", ":")
    return ""


def _next_columns(cells: list[str], columns: list[_Column]) -> list[_Column]:
    out: list[_Column] = []
    j, n = 0, len(cells)
    while j < n:
        c = cells[j]
        if c == "*^":
            a = columns[j]
            out += [a, _Column(a.track, a.end, a.beam_depth)]
            j += 1
        elif c == "*v" and j + 1 < n and cells[j + 1] == "*v":
            k = j
            while k < n and cells[k] == "*v":
                k += 1
            merged = columns[j:k]
            out.append(_Column(merged[0].track, max(m.end for m in merged),
                               max(m.beam_depth for m in merged)))
            j = k
        elif c == "*x" and j + 1 < n and cells[j + 1] == "*x":
            out += [columns[j + 1], columns[j]]
            j += 2
        elif c == "*-":
            j += 1
        else:
            out.append(columns[j])
            j += 1
    return out


def _interpretation(cell, part: _PartState, cur, abs_time, add_obj, seen, met_seen) -> None:
    m = CLEF_RE.match(cell)
    if m:
        shape, shift, line = m.groups()
        octave = 0
        if shift:
            octave = -len(shift) if shift[0] == "v" else len(shift)
        default_line = {"G": 2, "F": 4, "C": 3, "X": 3}[shape]
        add_obj(part.pid, Clef(shape, int(line) if line else default_line, octave), cur, seen)
        return
    m = KEY_RE.match(cell)
    if m:
        accs = re.findall(r"[a-g](?:#{1,2}|-{1,2}|n)", canonical_key(cell)[3:-1])
        part.key_alter = {}
        for a in accs:
            sign = 0 if a[1] == "n" else (1 if a[1] == "#" else -1)
            part.key_alter[a[0].upper()] = sign * (len(a) - 1)
        if accs:
            add_obj(part.pid, KeySignature(tuple(accs)), cur, seen)
        return
    m = METER_RE.match(cell)
    if m:
        add_obj(part.pid, TimeSignature(int(m.group(1)), int(m.group(2))), cur, seen)
        return
    m = MET_RE.match(cell)
    if m:
        form = {"c": "common", "c|": "cut"}.get(m.group(1))
        if form is None or (part.pid in met_seen):
            return
        met_seen.add(part.pid)
        buf = part.current.objs
        for i in range(len(buf) - 1, -1, -1):
            o = buf[i]
            if isinstance(o.kind, TimeSignature) and o.offset == cur:
                o.kind = TimeSignature(o.kind.top, o.kind.bottom, form)
                return
        add_obj(part.pid, TimeSignature(None, None, form), cur)
        return
    m = OTTAVA_RE.match(cell)
    if m:
        closing, kind = m.groups()
        if closing:
            obj = part.open_ottavas.pop(kind, None)
            if obj is not None:
                obj.duration = abs_time - obj.open_abs
        elif kind not in part.open_ottavas:
            obj = add_obj(part.pid, Ottava(kind), cur, seen)
            if obj is not None:
                obj.open_abs = abs_time
                part.open_ottavas[kind] = obj
        return
    m = PART_RE.match(cell)
    if m:
        if part.part_label is None:
            part.part_label = m.group(1)
        return
    m = SECTION_RE.match(cell)
    if m:
        label = m.group(1)
        if any(s[1] == label and s[0] == len(part.measures) for s in part.sections):
            return
        digits = re.search(r"(\d+)$", label)
        obj = None
        if digits:
            obj = add_obj(part.pid, Ending(digits.group(1), 1), cur, seen)
        part.sections.append((len(part.measures), label, obj))
        return
    logger.debug("ignoring interpretation %r", cell)


def _note_cell(cell: str, part: _PartState, col: _Column, cur: Fraction, abs_time: Fraction,
               add_obj) -> tuple[Fraction, bool]:
    """Add the notes/rests of one kern cell. Returns (duration, is_grace)."""
    toks = [parse_note_token(s) for s in cell.split(" ")]
    lead_duration = next((t.duration for t in toks if t.duration), "")
    beamed = col.beam_depth > 0 or any(c in "LJ" for t in toks for c in t.beams)
    for t in toks:
        for c in t.beams:
            if c == "L":
                col.beam_depth += 1
            elif c == "J":
                col.beam_depth = max(0, col.beam_depth - 1)
    grace = all(t.is_grace for t in toks)
    arpeggio = max((t.arpeggio for t in toks), key=len)
    if arpeggio:
        add_obj(part.pid, Arpeggio("normal", arpeggio == "::"), cur)

    duration = Fraction(0)
    for t in toks:
        if not t.duration and lead_duration:
            t.duration = lead_duration
        for s in t.slurs:
            if s.endswith("("):
                obj = add_obj(part.pid, Slur(None), cur)
                obj.open_abs = abs_time
                part.open_slurs.append(obj)
            elif part.open_slurs:
                obj = part.open_slurs.pop()
                obj.duration = abs_time - obj.open_abs
        if t.duration and not duration:
            duration = t.quarter_length()
        if t.invisible:
            continue
        recip = int(t.duration) if t.duration else 4
        value = visual_value(recip)
        if t.is_rest:
            head = "whole" if t.pitch == "rr" else REST_TYPES[int(math.log2(value))]
            part.current.rests.append(RestEvent(cur, head, t.dots))
            continue
        part.current.notes.append(_note_event(t, part, cur, value, beamed))
    return duration, grace


def _note_event(t: NoteToken, part: _PartState, cur: Fraction, value: int, beamed: bool) -> NoteEvent:
    step, octave = t.step, t.octave
    alter = t.alter
    state_key = (step, octave)
    prevailing = part.acc_state.get(state_key, part.key_alter.get(step, 0))
    tied_from = any(c in "]_" for c in t.ties)
    shown: Optional[str] = None
    if "y" in t.acc_flags:
        shown = None
    elif "X" in t.acc_flags or (alter != prevailing and not tied_from):
        shown = _DISPLAY[alter]
    part.acc_state[state_key] = alter

    flags = max(0, int(math.log2(value)) - 2)
    marker = "beam" if beamed else "flag"
    grace = {"": "none", "q": "slashed", "qq": "plain", "Q": "plain"}[t.grace]
    return NoteEvent(
        offset=cur,
        step=step,
        octave=octave,
        accidental=shown,
        tie_to_next=any(c in "[_" for c in t.ties),
        head_type=_HEAD.get(value, "quarter"),
        flags_beams=(marker,) * flags,
        dots=t.dots,
        articulations=tuple(t.articulations),
        ornaments=tuple(t.ornaments),
        grace=grace,
    )


def _dynam_cell(cell, pid, track, cur, abs_time, add_obj, hairpins) -> None:
    opened = hairpins.setdefault(track, [])
    for sub in cell.split(" "):
        if sub in ("<", ">"):
            direction = "crescendo" if sub == "<" else "diminuendo"
            obj = add_obj(pid, Dynamic("", True, direction, None), cur)
            obj.open_abs = abs_time
            opened.append(obj)
        elif sub in ("[", "]"):
            want = "crescendo" if sub == "[" else "diminuendo"
            match = [o for o in opened if o.kind.hairpin_direction == want] or opened
            if match:
                obj = match[-1]
                opened.remove(obj)
                obj.duration = abs_time - obj.open_abs
        elif sub not in ("(", ")"):
            add_obj(pid, Dynamic(sub), cur)


def _close_sections(parts: list[_PartState]) -> None:
    for p in parts:
        n_measures = len(p.measures)
        for i, (start, _label, obj) in enumerate(p.sections):
            if obj is None:
                continue
            end = p.sections[i + 1][0] if i + 1 < len(p.sections) else n_measures
            obj.kind = Ending(obj.kind.name_text, max(1, end - start))


def _freeze_obj(o: _Obj) -> NonNoteObject:
    k = o.kind
    if isinstance(k, Slur):
        k = Slur(o.duration)
    elif isinstance(k, Ottava):
        k = Ottava(k.type, o.duration)
    elif isinstance(k, Dynamic) and k.is_hairpin:
        k = Dynamic("", True, k.hairpin_direction, o.duration)
    return NonNoteObject(o.offset, k)


def _freeze(p: _PartState) -> Part:
    measures = tuple(
        Measure(i, tuple(m.notes), tuple(m.rests), tuple(_freeze_obj(o) for o in m.objs))
        for i, m in enumerate(p.measures)
    )
    return Part(p.pid, measures)


def _staff_groups(parts: list[_PartState]) -> tuple[StaffGroup, ...]:
    by_label: dict[str, list[int]] = {}
    for p in parts:
        if p.part_label:
            by_label.setdefault(p.part_label, []).append(p.pid)
    groups = [tuple(sorted(ids)) for ids in by_label.values() if len(ids) > 1]
    return tuple(StaffGroup(g) for g in sorted(groups))
