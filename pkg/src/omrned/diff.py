"""Categorized insert/delete edit lists between two scores.

Substitutions never appear: a changed symbol is one deletion plus one
insertion. Parts are paired by position, measures by a Levenshtein-style
alignment whose substitution cost is the measure-level diff, and inside a
measure only objects sharing an exact offset (and, for notes, a spelled pitch)
are compared field by field.

All alignment and matching choices are made on the complete symbol content.
Excluded categories are filtered out afterwards, so excluding a category
never changes the distance reported for another one.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from rapidfuzz.distance import Indel

from .model import (
    CATEGORIES,
    Arpeggio,
    Category,
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
    RestEvent,
    Score,
    Slur,
    SymbolBag,
    TimeSignature,
    count_symbols,
)

INSERT = "insert"
DELETE = "delete"

# groups up to this size are matched by exhaustive search; larger ones greedily
EXACT_MATCH_LIMIT = 6


@dataclass(frozen=True)
class Location:
    part: int
    measure: Optional[int] = None
    offset: Optional[Fraction] = None
    description: str = ""

    def __str__(self) -> str:
        bits = [f"part {self.part}"]
        if self.measure is not None:
            bits.append(f"measure {self.measure}")
        if self.offset is not None:
            bits.append(f"offset {self.offset}")
        if self.description:
            bits.append(self.description)
        return ", ".join(bits)


@dataclass(frozen=True)
class Edit:
    kind: str
    category: Category
    count: int
    location: Location

    def __post_init__(self) -> None:
        if self.kind not in (INSERT, DELETE):
            raise ValueError(f"bad edit kind {self.kind!r}")
        if self.count < 1:
            raise ValueError("edit count must be positive")


@dataclass(frozen=True)
class DiffOptions:
    exclude: frozenset = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "exclude", frozenset(self.exclude))


@dataclass(frozen=True)
class DiffResult:
    edits: tuple[Edit, ...]
    per_category: SymbolBag
    insertions: int
    deletions: int
    n_pred: int
    n_ref: int
    pred_counts: SymbolBag = field(default_factory=SymbolBag)
    ref_counts: SymbolBag = field(default_factory=SymbolBag)

    @property
    def distance(self) -> int:
        return self.insertions + self.deletions


# ---------------------------------------------------------------------------
# primitive distances

def string_indel_distance(a: str, b: str) -> int:
    """|a| + |b| - 2 LCS(a, b): insert/delete-only edit distance."""
    return Indel.distance(a, b)


# a raw edit before it is tied to a part/measure: (kind, category, count, offset, description)
RawEdit = tuple[str, Category, int, Optional[Fraction], str]


def _multiset_edits(cat: Category, pred: Iterable, ref: Iterable,
                    offset: Optional[Fraction], desc: str) -> list[RawEdit]:
    p, r = Counter(pred), Counter(ref)
    out: list[RawEdit] = []
    d = sum((p - r).values())
    i = sum((r - p).values())
    if d:
        out.append((DELETE, cat, d, offset, desc))
    if i:
        out.append((INSERT, cat, i, offset, desc))
    return out


def _text_edits(cat: Category, a: str, b: str, offset, desc) -> list[RawEdit]:
    dist = string_indel_distance(a, b)
    if not dist:
        return []
    lcs = (len(a) + len(b) - dist) // 2
    out: list[RawEdit] = []
    if len(a) - lcs:
        out.append((DELETE, cat, len(a) - lcs, offset, desc))
    if len(b) - lcs:
        out.append((INSERT, cat, len(b) - lcs, offset, desc))
    return out


def _whole(kind: str, obj, offset, desc) -> list[RawEdit]:
    return [(kind, cat, n, offset, desc) for cat, n in count_symbols(obj).items()]


# ---------------------------------------------------------------------------
# field-wise comparison of paired objects

_GRACE_SYMBOLS = {"none": (), "plain": ("grace",), "slashed": ("grace", "slash")}


def note_pair_edits(p: NoteEvent, r: NoteEvent) -> list[RawEdit]:
    off, desc = p.offset, p.describe()
    out: list[RawEdit] = []
    out += _multiset_edits(Category.ACCIDENTAL, [p.accidental] if p.accidental else [],
                           [r.accidental] if r.accidental else [], off, desc)
    out += _multiset_edits(Category.TIE, ["tie"] * p.tie_to_next, ["tie"] * r.tie_to_next, off, desc)
    out += _multiset_edits(Category.NOTEHEAD, [p.head_type], [r.head_type], off, desc)
    out += _multiset_edits(Category.FLAGS_BEAMS, p.flags_beams, r.flags_beams, off, desc)
    out += _multiset_edits(Category.DOTS, ["dot"] * p.dots, ["dot"] * r.dots, off, desc)
    out += _multiset_edits(Category.ARTICULATIONS, p.articulations, r.articulations, off, desc)
    out += _multiset_edits(Category.ORNAMENTS, p.ornaments, r.ornaments, off, desc)
    out += _multiset_edits(Category.GRACE, _GRACE_SYMBOLS[p.grace], _GRACE_SYMBOLS[r.grace], off, desc)
    return out


def rest_pair_edits(p: RestEvent, r: RestEvent) -> list[RawEdit]:
    return _multiset_edits(Category.DOTS, ["dot"] * p.dots, ["dot"] * r.dots, p.offset, p.describe())


def _dur(d: Optional[Fraction]) -> str:
    return "open" if d is None else str(d)


def non_note_symbols(kind) -> tuple[list[str], str]:
    """Atomic symbols and the character-counted text payload of a non-note."""
    if isinstance(kind, Dynamic):
        if kind.is_hairpin:
            return [f"hairpin:{kind.hairpin_direction}", f"duration:{_dur(kind.hairpin_duration)}"], ""
        return [f"mark:{kind.text}"], ""
    if isinstance(kind, Clef):
        return [f"clef:{kind.shape}{kind.line}:{kind.octave_shift}"], ""
    if isinstance(kind, KeySignature):
        return list(kind.accidentals), ""
    if isinstance(kind, TimeSignature):
        return list(kind.symbols()), ""
    if isinstance(kind, Slur):
        return [f"duration:{_dur(kind.duration)}"], ""
    if isinstance(kind, Ottava):
        return [f"type:{kind.type}", f"duration:{_dur(kind.duration)}"], ""
    if isinstance(kind, Direction):
        return [], kind.text
    if isinstance(kind, Arpeggio):
        return [f"type:{kind.type}"] + (["spans-staves"] if kind.spans_staves else []), ""
    if isinstance(kind, ChordSymbol):
        return [f"chord:{kind.text}"], ""
    if isinstance(kind, Lyric):
        return [f"verse:{kind.verse_id}"], kind.syllable_text
    if isinstance(kind, Ending):
        return [f"measures:{kind.measure_count}"], kind.name_text
    raise TypeError(type(kind).__name__)


def non_note_pair_edits(p: NonNoteObject, r: NonNoteObject) -> list[RawEdit]:
    cat = p.category
    pa, pt = non_note_symbols(p.kind)
    ra, rt = non_note_symbols(r.kind)
    desc = p.describe()
    return _multiset_edits(cat, pa, ra, p.offset, desc) + _text_edits(cat, pt, rt, p.offset, desc)


# ---------------------------------------------------------------------------
# cost keys

Cost = tuple[int, ...]  # (total, per-category counts in CATEGORIES order)
_CAT_INDEX = {c: i + 1 for i, c in enumerate(CATEGORIES)}
ZERO: Cost = (0,) * (len(CATEGORIES) + 1)


def cost_of(edits: Iterable[RawEdit]) -> Cost:
    v = [0] * (len(CATEGORIES) + 1)
    for _kind, cat, n, _off, _desc in edits:
        v[0] += n
        v[_CAT_INDEX[cat]] += n
    return tuple(v)


def add_cost(a: Cost, b: Cost) -> Cost:
    return tuple(x + y for x, y in zip(a, b))


def bag_cost(b: SymbolBag) -> Cost:
    v = [0] * (len(CATEGORIES) + 1)
    for cat, n in b.items():
        v[0] += n
        v[_CAT_INDEX[cat]] += n
    return tuple(v)


# ---------------------------------------------------------------------------
# matching inside one key group

def match_group(pred: Sequence, ref: Sequence,
                pair_edits: Callable[[object, object], list[RawEdit]]) -> list[tuple[int, int]]:
    """Minimum-cost pairing of two candidate lists sharing a match key.

    Cost keys are compared as (total, per-category vector) so the choice does
    not depend on which side is the prediction. Returns index pairs into the
    given sequences.
    """
    if not pred or not ref:
        return []
    if len(pred) == 1 and len(ref) == 1:
        return [(0, 0)]
    pcost = [[cost_of(pair_edits(p, r)) for r in ref] for p in pred]
    unp = [bag_cost(count_symbols(p)) for p in pred]
    unr = [bag_cost(count_symbols(r)) for r in ref]

    if max(len(pred), len(ref)) <= EXACT_MATCH_LIMIT:
        best_key, best_pairs = None, []
        swap = len(pred) > len(ref)
        small, large = (len(ref), len(pred)) if swap else (len(pred), len(ref))
        for perm in itertools.permutations(range(large), small):
            pairs = [(perm[k], k) if swap else (k, perm[k]) for k in range(small)]
            key = ZERO
            used_p = {i for i, _ in pairs}
            used_r = {j for _, j in pairs}
            for i, j in pairs:
                key = add_cost(key, pcost[i][j])
            for i in range(len(pred)):
                if i not in used_p:
                    key = add_cost(key, unp[i])
            for j in range(len(ref)):
                if j not in used_r:
                    key = add_cost(key, unr[j])
            if best_key is None or key < best_key:
                best_key, best_pairs = key, pairs
        return sorted(best_pairs)

    # greedy: repeatedly take the cheapest remaining pair
    pairs = []
    free_p, free_r = set(range(len(pred))), set(range(len(ref)))
    while free_p and free_r:
        i, j = min(((i, j) for i in free_p for j in free_r),
                   key=lambda ij: (pcost[ij[0]][ij[1]], ij))
        pairs.append((i, j))
        free_p.discard(i)
        free_r.discard(j)
    return sorted(pairs)


def _sort_key(obj) -> str:
    return repr(obj)


def _grouped(items: Iterable, key: Callable) -> dict:
    groups: dict = {}
    for it in sorted(items, key=_sort_key):
        groups.setdefault(key(it), []).append(it)
    return groups


def _diff_objects(pred: Iterable, ref: Iterable, key: Callable, pair_edits) -> list[RawEdit]:
    gp, gr = _grouped(pred, key), _grouped(ref, key)
    out: list[RawEdit] = []
    for k in sorted(set(gp) | set(gr), key=repr):
        P, R = gp.get(k, []), gr.get(k, [])
        pairs = match_group(P, R, pair_edits)
        for i, j in pairs:
            out += pair_edits(P[i], R[j])
        mp = {i for i, _ in pairs}
        mr = {j for _, j in pairs}
        for i, p in enumerate(P):
            if i not in mp:
                out += _whole(DELETE, p, p.offset, p.describe())
        for j, r in enumerate(R):
            if j not in mr:
                out += _whole(INSERT, r, r.offset, r.describe())
    return out


def _note_key(n: NoteEvent):
    return (n.offset, n.step, n.octave)


def _rest_key(r: RestEvent):
    return (r.offset, r.head_type)


def _non_note_key(o: NonNoteObject):
    return (o.offset, type(o.kind).__name__)


@lru_cache(maxsize=65536)
def _measure_edits_cached(pred_content: tuple, ref_content: tuple) -> tuple[RawEdit, ...]:
    pn, pr, po = pred_content
    rn, rr, ro = ref_content
    out = _diff_objects(pn, rn, _note_key, note_pair_edits)
    out += _diff_objects(pr, rr, _rest_key, rest_pair_edits)
    out += _diff_objects(po, ro, _non_note_key, non_note_pair_edits)
    return tuple(out)


def measure_raw_edits(pred_m: Measure, ref_m: Measure) -> tuple[RawEdit, ...]:
    if pred_m.content_key() == ref_m.content_key():
        return ()
    return _measure_edits_cached(pred_m.content_key(), ref_m.content_key())


def _place(raw: Iterable[RawEdit], part: int, measure: Optional[int],
           ref_part: Optional[int] = None, ref_measure: Optional[int] = None) -> list[Edit]:
    """Attach locations: deletions live in the prediction, insertions in the reference."""
    out = []
    for kind, cat, n, off, desc in raw:
        if kind == INSERT and ref_part is not None:
            loc = Location(ref_part, ref_measure, off, desc)
        else:
            loc = Location(part, measure, off, desc)
        out.append(Edit(kind, cat, n, loc))
    return out


def diff_measure(pred_m: Measure, ref_m: Measure, part: int = 0, ref_part: Optional[int] = None) -> list[Edit]:
    return _place(measure_raw_edits(pred_m, ref_m), part, pred_m.index,
                  part if ref_part is None else ref_part, ref_m.index)


def _whole_measure(kind: str, m: Measure, part: int) -> list[Edit]:
    return [Edit(kind, cat, n, Location(part, m.index, None, f"whole measure {m.index}"))
            for cat, n in count_symbols(m).items()]


# ---------------------------------------------------------------------------
# measure alignment

SUB, DEL, INS = "sub", "del", "ins"


def measure_alignment(pred: Sequence[Measure], ref: Sequence[Measure]) -> tuple[Cost, list[tuple[str, int, int]]]:
    """Optimal monotone alignment of two measure lists.

    Returns the cost key and the operations as (op, pred index, ref index);
    ties prefer substitution, then deletion, then insertion.
    """
    n, m = len(pred), len(ref)
    dcost = [bag_cost(count_symbols(x)) for x in pred]
    icost = [bag_cost(count_symbols(x)) for x in ref]
    D: list[list[Cost]] = [[ZERO] * (m + 1) for _ in range(n + 1)]
    op: list[list[str]] = [[""] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        D[i][0] = add_cost(D[i - 1][0], dcost[i - 1])
        op[i][0] = DEL
    for j in range(1, m + 1):
        D[0][j] = add_cost(D[0][j - 1], icost[j - 1])
        op[0][j] = INS
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            best = add_cost(D[i - 1][j - 1], cost_of(measure_raw_edits(pred[i - 1], ref[j - 1])))
            choice = SUB
            cand = add_cost(D[i - 1][j], dcost[i - 1])
            if cand < best:
                best, choice = cand, DEL
            cand = add_cost(D[i][j - 1], icost[j - 1])
            if cand < best:
                best, choice = cand, INS
            D[i][j], op[i][j] = best, choice
    ops = []
    i, j = n, m
    while i or j:
        o = op[i][j]
        if o == SUB:
            ops.append((SUB, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif o == DEL:
            ops.append((DEL, i - 1, -1))
            i -= 1
        else:
            ops.append((INS, -1, j - 1))
            j -= 1
    ops.reverse()
    return D[n][m], ops


def align_measures(pred_part: Part, ref_part: Part) -> list[Edit]:
    _, ops = measure_alignment(pred_part.measures, ref_part.measures)
    out: list[Edit] = []
    for o, i, j in ops:
        if o == SUB:
            out += diff_measure(pred_part.measures[i], ref_part.measures[j], pred_part.id, ref_part.id)
        elif o == DEL:
            out += _whole_measure(DELETE, pred_part.measures[i], pred_part.id)
        else:
            out += _whole_measure(INSERT, ref_part.measures[j], ref_part.id)
    return out


def _whole_part(kind: str, p: Part) -> list[Edit]:
    return [Edit(kind, cat, n, Location(p.id, None, None, f"whole part {p.id}"))
            for cat, n in count_symbols(p).items()]


def align_parts(pred: Score, ref: Score) -> tuple[list[tuple[Part, Part]], list[Edit]]:
    """Pair parts by position; surplus parts and unmatched staff groups become edits."""
    pairs = list(zip(pred.parts, ref.parts))
    edits: list[Edit] = []
    for p in pred.parts[len(ref.parts):]:
        edits += _whole_part(DELETE, p)
    for r in ref.parts[len(pred.parts):]:
        edits += _whole_part(INSERT, r)
    pg = Counter(g.members for g in pred.staff_groups)
    rg = Counter(g.members for g in ref.staff_groups)
    for members in sorted((pg - rg).elements()):
        edits.append(Edit(DELETE, Category.STAFF_GROUP, 1,
                          Location(members[0], None, None, f"staff group {list(members)}")))
    for members in sorted((rg - pg).elements()):
        edits.append(Edit(INSERT, Category.STAFF_GROUP, 1,
                          Location(members[0], None, None, f"staff group {list(members)}")))
    return pairs, edits


def diff_scores(pred: Score, ref: Score, opts: Optional[DiffOptions] = None) -> DiffResult:
    opts = opts or DiffOptions()
    pairs, edits = align_parts(pred, ref)
    for p, r in pairs:
        edits += align_measures(p, r)
    edits = [e for e in edits if e.category not in opts.exclude]
    per_cat = SymbolBag([(e.category, e.count) for e in edits])
    ins = sum(e.count for e in edits if e.kind == INSERT)
    dels = sum(e.count for e in edits if e.kind == DELETE)
    pc = count_symbols(pred).without(opts.exclude)
    rc = count_symbols(ref).without(opts.exclude)
    return DiffResult(tuple(edits), per_cat, ins, dels, pc.total(), rc.total(), pc, rc)


def replay(pred_counts: SymbolBag, edits: Iterable[Edit]) -> SymbolBag:
    """Apply an edit list to per-category counts; deletions must be available."""
    counts = {c: pred_counts[c] for c in CATEGORIES}
    for e in edits:
        counts[e.category] += e.count if e.kind == INSERT else -e.count
        if counts[e.category] < 0:
            raise ValueError(f"edit list deletes more {e.category.value} symbols than exist")
    return SymbolBag(counts)


# ---------------------------------------------------------------------------
# serialization

def format_edits(edits: Iterable[Edit]) -> str:
    lines = []
    for e in edits:
        sign = "+" if e.kind == INSERT else "-"
        lines.append(f"{sign}{e.count} {e.category.value:<13} {e.location}")
    return "\n".join(lines) + ("\n" if lines else "")


def edit_record(e: Edit) -> dict:
    loc = e.location
    return {
        "kind": e.kind,
        "category": e.category.value,
        "count": e.count,
        "part": loc.part,
        "measure": loc.measure,
        "offset": None if loc.offset is None else str(loc.offset),
        "object": loc.description,
    }


def edits_to_jsonl(edits: Iterable[Edit]) -> str:
    return "".join(json.dumps(edit_record(e), sort_keys=True) + "\n" for e in edits)


def edits_from_jsonl(text: str) -> list[Edit]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        off = None if d["offset"] is None else Fraction(d["offset"])
        out.append(Edit(d["kind"], Category(d["category"]), d["count"],
                        Location(d["part"], d["measure"], off, d["object"])))
    return out
