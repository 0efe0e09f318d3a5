from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from omrned.model import (
    CATEGORIES,
    Category,
    KeySignature,
    Lyric,
    Measure,
    NonNoteObject,
    NoteEvent,
    Part,
    ReportGroup,
    RestEvent,
    Score,
    StaffGroup,
    SymbolBag,
    TimeSignature,
    bag,
    check_invariants,
    count_symbols,
    report_group,
)

from strategies import measures, non_notes, notes, rests, scores

Z = Fraction(0)


def nn(kind, offset=Z):
    return NonNoteObject(offset, kind)


# -- counting examples -------------------------------------------------------

def test_numeric_time_signature_is_two_symbols():
    assert count_symbols(nn(TimeSignature(12, 8))) == bag(timesig=2)


def test_common_time_is_one_symbol():
    assert count_symbols(nn(TimeSignature(symbol_form="common"))) == bag(timesig=1)


def test_minimal_quarter_note():
    b = count_symbols(NoteEvent(Z, "C", 4))
    assert b == bag(pitch=1, notehead=1)
    assert b.total() == 2


def test_dotted_beamed_staccato_sharp_eighth():
    n = NoteEvent(Z, "A", 4, accidental="#", head_type="quarter", flags_beams=("beam",),
                  dots=1, articulations=("staccato",))
    assert count_symbols(n) == bag(pitch=1, accidental=1, notehead=1, flagsbeams=1, dots=1,
                                   articulations=1)
    assert count_symbols(n).total() == 6


def test_key_signature_counts_accidentals():
    assert count_symbols(nn(KeySignature(("f#", "c#", "g#")))) == bag(keysig=3)


def test_lyric_counts_characters_plus_verse():
    assert count_symbols(nn(Lyric("love", "1"))) == bag(lyric=5)


def test_grace_counts():
    assert count_symbols(NoteEvent(Z, "C", 4, grace="plain"))[Category.GRACE] == 1
    assert count_symbols(NoteEvent(Z, "C", 4, grace="slashed"))[Category.GRACE] == 2


def test_rest_counts_head_and_dots():
    assert count_symbols(RestEvent(Z, "eighth", 2)) == bag(notehead=1, dots=2)


def test_structural_symbols():
    m = Measure(0, (NoteEvent(Z, "C", 4),))
    assert count_symbols(m) == bag(measure=1, pitch=1, notehead=1)
    p = Part(0, (m,))
    assert count_symbols(p)[Category.PART] == 1
    s = Score((p, Part(1, ())), (StaffGroup((0, 1)),))
    assert count_symbols(s) == bag(measure=1, pitch=1, notehead=1, part=2, staffgroup=1)
    assert count_symbols(Score()).total() == 0


# -- validation --------------------------------------------------------------

def test_flags_need_quarter_head():
    with pytest.raises(ValueError):
        NoteEvent(Z, "C", 4, head_type="half", flags_beams=("flag",))


def test_float_offsets_rejected():
    with pytest.raises(TypeError):
        NoteEvent(0.5, "C", 4)


def test_negative_offset_rejected():
    with pytest.raises(ValueError):
        RestEvent(Fraction(-1))


def test_multisets_ignore_order():
    a = NoteEvent(Z, "C", 4, articulations=("accent", "staccato"))
    b = NoteEvent(Z, "C", 4, articulations=("staccato", "accent"))
    assert a == b


# -- report groups -----------------------------------------------------------

@pytest.mark.parametrize("cat,group", [
    (Category.FLAGS_BEAMS, ReportGroup.NOTE),
    (Category.GRACE, ReportGroup.NOTE),
    (Category.DYNAMIC, ReportGroup.EXTRA),
    (Category.ENDING, ReportGroup.EXTRA),
    (Category.LYRIC, ReportGroup.LYRICS),
    (Category.MEASURE, ReportGroup.MEASURE),
    (Category.PART, ReportGroup.PART),
    (Category.STAFF_GROUP, ReportGroup.STAFF_GROUP),
])
def test_report_group(cat, group):
    assert report_group(cat) is group


def test_report_group_is_total_and_surjective():
    assert {report_group(c) for c in CATEGORIES} == set(ReportGroup)
    assert len(CATEGORIES) == 23


def test_category_lookup():
    assert Category.from_name("FlagsBeams") is Category.FLAGS_BEAMS
    assert Category.from_name("key_signature") is Category.KEY_SIGNATURE
    with pytest.raises(ValueError, match="valid names"):
        Category.from_name("tempo")


# -- properties --------------------------------------------------------------

bags = st.dictionaries(st.sampled_from(CATEGORIES), st.integers(0, 50)).map(SymbolBag)


@given(bags, bags, bags)
def test_bag_addition_is_commutative_monoid(a, b, c):
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)
    assert a + SymbolBag() == a
    assert (a + b).total() == a.total() + b.total()


@given(st.one_of(notes(), rests, non_notes))
def test_objects_have_at_least_one_symbol(obj):
    # empty key signatures never become objects, so every generated object counts
    if isinstance(obj, NonNoteObject) and isinstance(obj.kind, KeySignature) and not obj.kind.accidentals:
        return
    assert count_symbols(obj).total() >= 1


@given(measures())
def test_measure_count_is_compositional(m):
    expected = SymbolBag({Category.MEASURE: 1})
    for child in (*m.notes, *m.rests, *m.non_notes):
        expected = expected + count_symbols(child)
    assert count_symbols(m) == expected


@given(scores())
def test_score_count_is_sum_of_parts_and_groups(s):
    total = sum(count_symbols(p).total() for p in s.parts) + len(s.staff_groups)
    assert count_symbols(s).total() == total
    assert check_invariants(s) == []


@given(st.integers(0, 1000), st.integers(1, 1000), st.integers(1, 50))
def test_offset_equality_is_exact(a, b, k):
    assert Fraction(a, b) == Fraction(k * a, k * b)
    n1 = NoteEvent(Fraction(a, b), "C", 4)
    n2 = NoteEvent(Fraction(k * a, k * b), "C", 4)
    assert n1 == n2 and hash(n1) == hash(n2)


def test_invariant_checker_flags_problems():
    s = Score((Part(0, (Measure(1),)),), (StaffGroup((0, 3)),))
    problems = check_invariants(s)
    assert any("missing part 3" in p for p in problems)
    assert any("measure index" in p for p in problems)
