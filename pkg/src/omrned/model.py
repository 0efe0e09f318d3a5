"""File-format-agnostic visual notation model and symbol counting.

Everything here is an immutable value. Offsets are :class:`fractions.Fraction`
quarter-note positions relative to the start of the enclosing measure.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

Offset = Fraction


class Category(enum.Enum):
    PITCH = "pitch"
    ACCIDENTAL = "accidental"
    TIE = "tie"
    NOTEHEAD = "notehead"
    FLAGS_BEAMS = "flagsbeams"
    DOTS = "dots"
    ARTICULATIONS = "articulations"
    ORNAMENTS = "ornaments"
    GRACE = "grace"
    DYNAMIC = "dynamic"
    CLEF = "clef"
    KEY_SIGNATURE = "keysig"
    TIME_SIGNATURE = "timesig"
    SLUR = "slur"
    OTTAVA = "ottava"
    DIRECTION = "direction"
    ARPEGGIO = "arpeggio"
    CHORD_SYMBOL = "chordsymbol"
    LYRIC = "lyric"
    ENDING = "ending"
    MEASURE = "measure"
    PART = "part"
    STAFF_GROUP = "staffgroup"

    @classmethod
    def from_name(cls, name: str) -> "Category":
        """Look up a category by CSV column name or enum member name."""
        key = name.strip().lower().replace("_", "").replace("-", "")
        for cat in cls:
            if key in (cat.value, cat.name.lower().replace("_", "")):
                return cat
        raise ValueError(
            f"unknown category {name!r}; valid names: {', '.join(c.value for c in cls)}"
        )


CATEGORIES: tuple[Category, ...] = tuple(Category)


class ReportGroup(enum.Enum):
    NOTE = "Note"
    EXTRA = "Extra"
    LYRICS = "Lyrics"
    MEASURE = "Measure"
    PART = "Part"
    STAFF_GROUP = "StaffGroup"


_NOTE_CATEGORIES = frozenset({
    Category.PITCH, Category.ACCIDENTAL, Category.TIE, Category.NOTEHEAD,
    Category.FLAGS_BEAMS, Category.DOTS, Category.ARTICULATIONS,
    Category.ORNAMENTS, Category.GRACE,
})
_STRUCTURAL = {
    Category.LYRIC: ReportGroup.LYRICS,
    Category.MEASURE: ReportGroup.MEASURE,
    Category.PART: ReportGroup.PART,
    Category.STAFF_GROUP: ReportGroup.STAFF_GROUP,
}


def report_group(cat: Category) -> ReportGroup:
    if cat in _NOTE_CATEGORIES:
        return ReportGroup.NOTE
    return _STRUCTURAL.get(cat, ReportGroup.EXTRA)


class SymbolBag(Mapping):
    """Per-category symbol counts. Missing categories read as zero."""

    __slots__ = ("_counts",)

    def __init__(self, counts: Union[Mapping[Category, int], Iterable[tuple[Category, int]], None] = None):
        items = counts.items() if isinstance(counts, Mapping) else (counts or ())
        acc: dict[Category, int] = {}
        for cat, n in items:
            if n < 0:
                raise ValueError(f"negative count for {cat}: {n}")
            if n:
                acc[cat] = acc.get(cat, 0) + n
        self._counts = acc

    def __getitem__(self, cat: Category) -> int:
        return self._counts.get(cat, 0)

    def __iter__(self) -> Iterator[Category]:
        return (c for c in CATEGORIES if c in self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def __add__(self, other: "SymbolBag") -> "SymbolBag":
        if not isinstance(other, SymbolBag):
            return NotImplemented
        return SymbolBag(list(self._counts.items()) + list(other._counts.items()))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SymbolBag):
            return self._counts == other._counts
        if isinstance(other, Mapping):
            return self._counts == {k: v for k, v in other.items() if v}
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._counts.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{c.value}={n}" for c, n in self.items())
        return f"SymbolBag({inner})"

    def total(self) -> int:
        return sum(self._counts.values())

    def without(self, exclude: Iterable[Category]) -> "SymbolBag":
        drop = set(exclude)
        return SymbolBag({c: n for c, n in self._counts.items() if c not in drop})

    def as_vector(self) -> tuple[int, ...]:
        return tuple(self[c] for c in CATEGORIES)


def bag(**counts: int) -> SymbolBag:
    """Shorthand: ``bag(pitch=1, notehead=1)``."""
    return SymbolBag({Category(k): v for k, v in counts.items()})


# ---------------------------------------------------------------------------
# measure contents

HEAD_TYPES = ("whole", "half", "quarter")
REST_TYPES = ("whole", "half", "quarter", "eighth", "16th", "32nd", "64th", "128th", "256th")
STEPS = "CDEFGAB"
ACCIDENTALS = ("--", "-", "n", "#", "##")
GRACE_KINDS = ("none", "plain", "slashed")


def _check_offset(offset: Fraction) -> None:
    if not isinstance(offset, Fraction):
        raise TypeError(f"offset must be a Fraction, got {type(offset).__name__}")
    if offset < 0:
        raise ValueError(f"negative offset {offset}")


@dataclass(frozen=True)
class NoteEvent:
    offset: Fraction
    step: str
    octave: int
    accidental: Optional[str] = None
    tie_to_next: bool = False
    head_type: str = "quarter"
    flags_beams: tuple[str, ...] = ()
    dots: int = 0
    articulations: tuple[str, ...] = ()
    ornaments: tuple[str, ...] = ()
    grace: str = "none"

    def __post_init__(self) -> None:
        _check_offset(self.offset)
        if self.step not in STEPS or len(self.step) != 1:
            raise ValueError(f"bad step {self.step!r}")
        if self.accidental is not None and self.accidental not in ACCIDENTALS:
            raise ValueError(f"bad accidental {self.accidental!r}")
        if self.head_type not in HEAD_TYPES:
            raise ValueError(f"bad head type {self.head_type!r}")
        if self.flags_beams and self.head_type != "quarter":
            raise ValueError("flags/beams require a quarter note head")
        if any(m not in ("flag", "beam") for m in self.flags_beams):
            raise ValueError(f"bad flag/beam markers {self.flags_beams}")
        if self.dots < 0:
            raise ValueError("negative dot count")
        if self.grace not in GRACE_KINDS:
            raise ValueError(f"bad grace kind {self.grace!r}")
        # multisets are kept sorted so equality ignores source order
        object.__setattr__(self, "flags_beams", tuple(sorted(self.flags_beams)))
        object.__setattr__(self, "articulations", tuple(sorted(self.articulations)))
        object.__setattr__(self, "ornaments", tuple(sorted(self.ornaments)))

    @property
    def pitch_name(self) -> str:
        return f"{self.step}{self.octave}"

    def describe(self) -> str:
        acc = self.accidental or ""
        return f"note {self.step}{acc}{self.octave} {self.head_type}"


@dataclass(frozen=True)
class RestEvent:
    offset: Fraction
    head_type: str = "quarter"
    dots: int = 0

    def __post_init__(self) -> None:
        _check_offset(self.offset)
        if self.head_type not in REST_TYPES:
            raise ValueError(f"bad rest type {self.head_type!r}")
        if self.dots < 0:
            raise ValueError("negative dot count")

    def describe(self) -> str:
        return f"rest {self.head_type}" + "." * self.dots


# -- non-note payloads -------------------------------------------------------

@dataclass(frozen=True)
class Dynamic:
    text: str = ""
    is_hairpin: bool = False
    hairpin_direction: Optional[str] = None  # "crescendo" | "diminuendo"
    hairpin_duration: Optional[Fraction] = None


@dataclass(frozen=True)
class Clef:
    shape: str = "G"
    line: int = 2
    octave_shift: int = 0


@dataclass(frozen=True)
class KeySignature:
    # displayed accidentals, e.g. ("f#", "c#")
    accidentals: tuple[str, ...] = ()

    @property
    def accidental_count(self) -> int:
        return len(self.accidentals)

    @property
    def mode_of_accidental(self) -> Optional[str]:
        if not self.accidentals:
            return None
        return "flat" if self.accidentals[0].endswith("-") else "sharp"


@dataclass(frozen=True)
class TimeSignature:
    top: Optional[int] = None
    bottom: Optional[int] = None
    symbol_form: str = "none"  # none | common | cut

    def symbols(self) -> tuple[str, ...]:
        if self.symbol_form != "none":
            return (f"symbol:{self.symbol_form}",)
        out = []
        if self.top is not None:
            out.append(f"top:{self.top}")
        if self.bottom is not None:
            out.append(f"bottom:{self.bottom}")
        return tuple(out)


@dataclass(frozen=True)
class Slur:
    duration: Optional[Fraction] = None


@dataclass(frozen=True)
class Ottava:
    type: str = "8va"
    duration: Optional[Fraction] = None


@dataclass(frozen=True)
class Direction:
    text: str = ""


@dataclass(frozen=True)
class Arpeggio:
    type: str = "normal"
    spans_staves: bool = False


@dataclass(frozen=True)
class ChordSymbol:
    text: str = ""


@dataclass(frozen=True)
class Lyric:
    syllable_text: str = ""
    verse_id: str = "1"


@dataclass(frozen=True)
class Ending:
    name_text: str = ""
    measure_count: int = 1


NonNoteKind = Union[Dynamic, Clef, KeySignature, TimeSignature, Slur, Ottava,
                    Direction, Arpeggio, ChordSymbol, Lyric, Ending]

KIND_CATEGORY: dict[type, Category] = {
    Dynamic: Category.DYNAMIC,
    Clef: Category.CLEF,
    KeySignature: Category.KEY_SIGNATURE,
    TimeSignature: Category.TIME_SIGNATURE,
    Slur: Category.SLUR,
    Ottava: Category.OTTAVA,
    Direction: Category.DIRECTION,
    Arpeggio: Category.ARPEGGIO,
    ChordSymbol: Category.CHORD_SYMBOL,
    Lyric: Category.LYRIC,
    Ending: Category.ENDING,
}


@dataclass(frozen=True)
class NonNoteObject:
    offset: Fraction
    kind: NonNoteKind

    def __post_init__(self) -> None:
        _check_offset(self.offset)
        if type(self.kind) not in KIND_CATEGORY:
            raise TypeError(f"unsupported non-note kind {type(self.kind).__name__}")

    @property
    def category(self) -> Category:
        return KIND_CATEGORY[type(self.kind)]

    def describe(self) -> str:
        k = self.kind
        name = type(k).__name__
        if isinstance(k, (Direction, ChordSymbol)):
            return f"{name} {k.text!r}"
        if isinstance(k, Lyric):
            return f"{name} {k.syllable_text!r} verse {k.verse_id}"
        if isinstance(k, Dynamic):
            return f"{name} {k.hairpin_direction}" if k.is_hairpin else f"{name} {k.text}"
        if isinstance(k, TimeSignature):
            if k.symbol_form != "none":
                return f"{name} {k.symbol_form}"
            return f"{name} {k.top}/{k.bottom}"
        if isinstance(k, KeySignature):
            return f"{name} [{''.join(k.accidentals)}]"
        if isinstance(k, Clef):
            return f"{name} {k.shape}{k.line}"
        return name


# ---------------------------------------------------------------------------
# containers

@dataclass(frozen=True)
class Measure:
    index: int
    notes: tuple[NoteEvent, ...] = ()
    rests: tuple[RestEvent, ...] = ()
    non_notes: tuple[NonNoteObject, ...] = ()

    def content_key(self) -> tuple:
        """Measure contents without the positional index."""
        return (self.notes, self.rests, self.non_notes)


@dataclass(frozen=True)
class Part:
    id: int
    measures: tuple[Measure, ...] = ()


@dataclass(frozen=True)
class StaffGroup:
    members: tuple[int, ...]


@dataclass(frozen=True)
class Score:
    parts: tuple[Part, ...] = ()
    staff_groups: tuple[StaffGroup, ...] = ()
    source_warnings: tuple = field(default=(), compare=True)


# ---------------------------------------------------------------------------
# counting

def _note_bag(n: NoteEvent) -> SymbolBag:
    return SymbolBag({
        Category.PITCH: 1,
        Category.ACCIDENTAL: 1 if n.accidental else 0,
        Category.TIE: 1 if n.tie_to_next else 0,
        Category.NOTEHEAD: 1,
        Category.FLAGS_BEAMS: len(n.flags_beams),
        Category.DOTS: n.dots,
        Category.ARTICULATIONS: len(n.articulations),
        Category.ORNAMENTS: len(n.ornaments),
        Category.GRACE: {"none": 0, "plain": 1, "slashed": 2}[n.grace],
    })


def non_note_symbol_count(kind: NonNoteKind) -> int:
    if isinstance(kind, Dynamic):
        return 2 if kind.is_hairpin else 1
    if isinstance(kind, KeySignature):
        return kind.accidental_count
    if isinstance(kind, TimeSignature):
        return len(kind.symbols())
    if isinstance(kind, Ottava):
        return 2
    if isinstance(kind, Direction):
        return len(kind.text)
    if isinstance(kind, Arpeggio):
        return 2 if kind.spans_staves else 1
    if isinstance(kind, Lyric):
        return len(kind.syllable_text) + 1
    if isinstance(kind, Ending):
        return len(kind.name_text) + 1
    # Clef, Slur, ChordSymbol
    return 1


CountableObject = Union[NoteEvent, RestEvent, NonNoteObject, Measure, Part, StaffGroup, Score]


def count_symbols(obj: CountableObject) -> SymbolBag:
    if isinstance(obj, NoteEvent):
        return _note_bag(obj)
    if isinstance(obj, RestEvent):
        return SymbolBag({Category.NOTEHEAD: 1, Category.DOTS: obj.dots})
    if isinstance(obj, NonNoteObject):
        return SymbolBag({obj.category: non_note_symbol_count(obj.kind)})
    if isinstance(obj, Measure):
        total = SymbolBag({Category.MEASURE: 1})
        for child in (*obj.notes, *obj.rests, *obj.non_notes):
            total = total + count_symbols(child)
        return total
    if isinstance(obj, Part):
        total = SymbolBag({Category.PART: 1})
        for m in obj.measures:
            total = total + count_symbols(m)
        return total
    if isinstance(obj, StaffGroup):
        return SymbolBag({Category.STAFF_GROUP: 1})
    if isinstance(obj, Score):
        total = SymbolBag()
        for child in (*obj.parts, *obj.staff_groups):
            total = total + count_symbols(child)
        return total
    raise TypeError(f"cannot count symbols of {type(obj).__name__}")


# ---------------------------------------------------------------------------
# invariant checks (used by tests and by lenient ingestion sanity checks)

def _time_span(ts: TimeSignature) -> Optional[Fraction]:
    if ts.top is not None and ts.bottom:
        return Fraction(ts.top * 4, ts.bottom)
    if ts.symbol_form == "common":
        return Fraction(4)
    if ts.symbol_form == "cut":
        return Fraction(4)
    return None


def check_invariants(score: Score, strict_spans: bool = False) -> list[str]:
    """Return a list of violated model invariants (empty when the score is sound).

    With ``strict_spans`` note/rest offsets must also lie inside the measure's
    notated span whenever a time signature is in force.
    """
    problems = []
    part_ids = [p.id for p in score.parts]
    if len(set(part_ids)) != len(part_ids):
        problems.append("duplicate part ids")
    seen_members: set[int] = set()
    for g in score.staff_groups:
        for m in g.members:
            if m not in part_ids:
                problems.append(f"staff group references missing part {m}")
            if m in seen_members:
                problems.append(f"part {m} belongs to more than one staff group")
            seen_members.add(m)
    for part in score.parts:
        span = None
        for i, m in enumerate(part.measures):
            if m.index != i:
                problems.append(f"part {part.id}: measure index {m.index} at position {i}")
            for obj in (*m.notes, *m.rests, *m.non_notes):
                off = obj.offset
                if off.denominator <= 0 or off < 0:
                    problems.append(f"part {part.id} measure {i}: bad offset {off}")
            for nn in m.non_notes:
                if isinstance(nn.kind, TimeSignature) and nn.offset == 0:
                    span = _time_span(nn.kind) or span
            if strict_spans and span is not None:
                for ev in (*m.notes, *m.rests):
                    if ev.offset >= span:
                        problems.append(
                            f"part {part.id} measure {i}: offset {ev.offset} beyond span {span}")
            if count_symbols(m).total() < 1:
                problems.append(f"part {part.id} measure {i}: empty symbol bag")
    return problems
