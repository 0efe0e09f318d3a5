"""Deliberately naive reference implementations used as test oracles.

Nothing here calls into the library's distance code: costs are rebuilt from
the model fields, and searches enumerate every candidate explicitly.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from itertools import combinations, permutations, product

import numpy as np

from omrned.model import (
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
    RestEvent,
    Slur,
    TimeSignature,
)


# -- sequences ----------------------------------------------------------------

def levenshtein_recursive(a, b) -> int:
    """Textbook recursion without memoization (only the equal-head shortcut)."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    if a[0] == b[0]:
        return levenshtein_recursive(a[1:], b[1:])
    return 1 + min(
        levenshtein_recursive(a[1:], b),
        levenshtein_recursive(a, b[1:]),
        levenshtein_recursive(a[1:], b[1:]),
    )


def levenshtein_trie(lb: int, max_len: int, k: int) -> np.ndarray:
    """Distances from every sequence of length <= ``max_len`` to every one of length ``lb``.

    Symbols are 0..k-1. Rows follow (length, itertools.product order), columns
    follow product order. The recursion above is evaluated bottom-up over a
    prefix trie of the left operand, so each prefix row is computed once and
    shared by all of its extensions.
    """
    B = np.array(list(product(range(k), repeat=lb)), dtype=np.int8).reshape(k ** lb, lb)
    rows = np.broadcast_to(np.arange(lb + 1, dtype=np.int8), (1, len(B), lb + 1)).copy()
    out = [rows[:, :, lb].copy()]
    for i in range(max_len):
        prev = np.repeat(rows, k, axis=0)
        last = np.tile(np.arange(k, dtype=np.int8), k ** i)[:, None]
        rows = np.empty_like(prev)
        rows[:, :, 0] = i + 1
        for j in range(lb):
            diag = prev[:, :, j] + (last != B[None, :, j])
            rows[:, :, j + 1] = np.minimum(np.minimum(prev[:, :, j + 1], rows[:, :, j]) + 1, diag)
        out.append(rows[:, :, lb].copy())
    return np.concatenate(out, axis=0)


def lcs_length(a: str, b: str) -> int:
    """Longest common subsequence by checking subsequences of the shorter string."""
    if len(a) > len(b):
        a, b = b, a
    for k in range(len(a), 0, -1):
        for idx in combinations(range(len(a)), k):
            sub = [a[i] for i in idx]
            it = iter(b)
            if all(ch in it for ch in sub):
                return k
    return 0


def indel_oracle(a: str, b: str) -> int:
    return len(a) + len(b) - 2 * lcs_length(a, b)


# -- symbol content of model objects -----------------------------------------

def _note_symbols(n: NoteEvent) -> Counter:
    c = Counter()
    c[(Category.PITCH, f"{n.step}{n.octave}")] += 1
    if n.accidental:
        c[(Category.ACCIDENTAL, n.accidental)] += 1
    if n.tie_to_next:
        c[(Category.TIE, "tie")] += 1
    c[(Category.NOTEHEAD, n.head_type)] += 1
    for m in n.flags_beams:
        c[(Category.FLAGS_BEAMS, m)] += 1
    c[(Category.DOTS, ".")] += n.dots
    for a in n.articulations:
        c[(Category.ARTICULATIONS, a)] += 1
    for o in n.ornaments:
        c[(Category.ORNAMENTS, o)] += 1
    if n.grace != "none":
        c[(Category.GRACE, "grace")] += 1
    if n.grace == "slashed":
        c[(Category.GRACE, "slash")] += 1
    return c


def _kind_parts(k) -> tuple[Category, Counter, str]:
    """Category, atomic symbols, and free text (compared by indel) of a non-note."""
    if isinstance(k, Dynamic):
        if k.is_hairpin:
            return Category.DYNAMIC, Counter({("dir", k.hairpin_direction): 1, ("dur", k.hairpin_duration): 1}), ""
        return Category.DYNAMIC, Counter({("mark", k.text): 1}), ""
    if isinstance(k, Clef):
        return Category.CLEF, Counter({(k.shape, k.line, k.octave_shift): 1}), ""
    if isinstance(k, KeySignature):
        return Category.KEY_SIGNATURE, Counter(k.accidentals), ""
    if isinstance(k, TimeSignature):
        if k.symbol_form != "none":
            return Category.TIME_SIGNATURE, Counter({("sym", k.symbol_form): 1}), ""
        c = Counter()
        if k.top is not None:
            c[("top", k.top)] += 1
        if k.bottom is not None:
            c[("bottom", k.bottom)] += 1
        return Category.TIME_SIGNATURE, c, ""
    if isinstance(k, Slur):
        return Category.SLUR, Counter({("dur", k.duration): 1}), ""
    if isinstance(k, Ottava):
        return Category.OTTAVA, Counter({("type", k.type): 1, ("dur", k.duration): 1}), ""
    if isinstance(k, Direction):
        return Category.DIRECTION, Counter(), k.text
    if isinstance(k, Arpeggio):
        c = Counter({("type", k.type): 1})
        if k.spans_staves:
            c[("span",)] += 1
        return Category.ARPEGGIO, c, ""
    if isinstance(k, ChordSymbol):
        return Category.CHORD_SYMBOL, Counter({k.text: 1}), ""
    if isinstance(k, Lyric):
        return Category.LYRIC, Counter({("verse", k.verse_id): 1}), k.syllable_text
    if isinstance(k, Ending):
        return Category.ENDING, Counter({("count", k.measure_count): 1}), k.name_text
    raise TypeError(k)


def object_cost(obj) -> Counter:
    """Per-category cost of inserting or deleting ``obj`` wholesale."""
    if isinstance(obj, NoteEvent):
        out = Counter()
        for (cat, _), n in _note_symbols(obj).items():
            out[cat] += n
        return out
    if isinstance(obj, RestEvent):
        return Counter({Category.NOTEHEAD: 1, Category.DOTS: obj.dots})
    cat, atoms, text = _kind_parts(obj.kind)
    return Counter({cat: sum(atoms.values()) + len(text)})


def pair_cost(p, r) -> Counter:
    """Per-category cost of turning a matched ``p`` into ``r`` (symmetric difference)."""
    if isinstance(p, NoteEvent):
        a, b = _note_symbols(p), _note_symbols(r)
        out = Counter()
        for (cat, _), n in ((a - b) + (b - a)).items():
            out[cat] += n
        return out
    if isinstance(p, RestEvent):
        return Counter({Category.DOTS: abs(p.dots - r.dots)})
    cat, pa, pt = _kind_parts(p.kind)
    _, ra, rt = _kind_parts(r.kind)
    return Counter({cat: sum(((pa - ra) + (ra - pa)).values()) + indel_oracle(pt, rt)})


def match_key(obj):
    if isinstance(obj, NoteEvent):
        return ("note", obj.offset, obj.step, obj.octave)
    if isinstance(obj, RestEvent):
        return ("rest", obj.offset, obj.head_type)
    return ("other", obj.offset, type(obj.kind).__name__)


def as_key(c: Counter) -> tuple:
    """Lexicographic comparison key: (total, per-category vector)."""
    return (sum(c.values()),) + tuple(c[cat] for cat in CATEGORIES)


def best_matching(P: list, R: list) -> Counter:
    """Exhaustive minimum over every partial matching of two same-key groups."""
    pc = [[as_key(pair_cost(p, r)) for r in R] for p in P]
    up = [as_key(object_cost(p)) for p in P]
    ur = [as_key(object_cost(r)) for r in R]
    width = len(CATEGORIES) + 1
    best = None
    for k in range(0, min(len(P), len(R)) + 1):
        for pi in combinations(range(len(P)), k):
            rest_p = [up[i] for i in range(len(P)) if i not in pi]
            for rj in permutations(range(len(R)), k):
                parts = [pc[i][j] for i, j in zip(pi, rj)] + rest_p
                parts += [ur[j] for j in range(len(R)) if j not in rj]
                key = tuple(sum(v[x] for v in parts) for x in range(width))
                if best is None or key < best:
                    best = key
    if best is None:
        return Counter()
    return Counter({c: best[i + 1] for i, c in enumerate(CATEGORIES) if best[i + 1]})


def measure_objects(m: Measure) -> list:
    return [*m.notes, *m.rests, *m.non_notes]


def measure_cost(pm: Measure, rm: Measure) -> Counter:
    groups: dict = {}
    for side, objs in ((0, measure_objects(pm)), (1, measure_objects(rm))):
        for o in objs:
            groups.setdefault(match_key(o), ([], []))[side].append(o)
    total = Counter()
    for P, R in groups.values():
        total += best_matching(P, R)
    return total


def whole_measure_cost(m: Measure) -> Counter:
    c = Counter({Category.MEASURE: 1})
    for o in measure_objects(m):
        c += object_cost(o)
    return c


def all_alignments(n: int, m: int):
    """Every monotone alignment of n and m items as a list of (op, i, j)."""
    if n == 0 and m == 0:
        yield []
        return
    if n and m:
        for rest in all_alignments(n - 1, m - 1):
            yield rest + [("sub", n - 1, m - 1)]
    if n:
        for rest in all_alignments(n - 1, m):
            yield rest + [("del", n - 1, -1)]
    if m:
        for rest in all_alignments(n, m - 1):
            yield rest + [("ins", -1, m - 1)]


def brute_force_alignment(pred: list[Measure], ref: list[Measure]) -> Counter:
    sub = {(i, j): measure_cost(p, r) for i, p in enumerate(pred) for j, r in enumerate(ref)}
    dels = [whole_measure_cost(p) for p in pred]
    ins = [whole_measure_cost(r) for r in ref]
    best = None
    for ops in all_alignments(len(pred), len(ref)):
        c = Counter()
        for op, i, j in ops:
            c += sub[i, j] if op == "sub" else dels[i] if op == "del" else ins[j]
        if best is None or as_key(c) < as_key(best):
            best = c
    return best


def offset(x) -> Fraction:
    return Fraction(x)
