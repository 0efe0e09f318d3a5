"""Library results against brute-force oracles."""

import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omrned.diff import cost_of, diff_scores, match_group, note_pair_edits
from rapidfuzz import process
from rapidfuzz.distance import Levenshtein

from omrned.metrics import edit_distance, ser
from omrned.model import CATEGORIES, NoteEvent, Part, Score, count_symbols

import oracles
from strategies import measures, notes, reindex

ALPHABET = "abc"


def as_counter(per_category) -> Counter:
    return Counter({c: n for c, n in per_category.items() if n})


# -- measure alignment ---------------------------------------------------------

measure_lists = st.lists(measures(max_events=6), max_size=4).map(reindex)


def alignment_matches(pred_ms, ref_ms) -> bool:
    d = diff_scores(Score((Part(0, pred_ms),)), Score((Part(0, ref_ms),)))
    got = as_counter(d.per_category)
    want = oracles.brute_force_alignment(list(pred_ms), list(ref_ms))
    # part symbols match; only measure content is aligned
    return oracles.as_key(got) == oracles.as_key(want)


@settings(max_examples=150)
@given(measure_lists, measure_lists)
def test_alignment_equals_exhaustive_search(pred_ms, ref_ms):
    assert alignment_matches(pred_ms, ref_ms)


def test_alignment_three_by_three_one_note_differs():
    a = list(reindex([oracles_measure(["C"]), oracles_measure(["D"]), oracles_measure(["E"])]))
    b = list(reindex([oracles_measure(["C"]), oracles_measure(["F"]), oracles_measure(["E"])]))
    assert alignment_matches(tuple(a), tuple(b))
    assert diff_scores(Score((Part(0, tuple(a)),)), Score((Part(0, tuple(b)),))).distance == 4


def oracles_measure(steps):
    from omrned.model import Measure
    return Measure(0, tuple(NoteEvent(Fraction(i), s, 4) for i, s in enumerate(steps)))


# -- matching inside a key group -----------------------------------------------

def same_key_group(n):
    return st.lists(notes(offs=st.just(Fraction(0))), min_size=n, max_size=n).map(
        lambda ns: [NoteEvent(Fraction(0), "C", 4, x.accidental, x.tie_to_next, x.head_type, x.flags_beams,
                              x.dots, x.articulations, x.ornaments, x.grace) for x in ns])


groups = st.integers(1, 6).flatmap(same_key_group)


@settings(max_examples=150)
@given(groups, groups)
def test_matching_equals_exhaustive_assignment(P, R):
    pairs = match_group(P, R, note_pair_edits)
    got = Counter()
    for i, j in pairs:
        for kind, cat, n, _, _ in note_pair_edits(P[i], R[j]):
            got[cat] += n
    for i in set(range(len(P))) - {i for i, _ in pairs}:
        got += Counter(dict(count_symbols(P[i])))
    for j in set(range(len(R))) - {j for _, j in pairs}:
        got += Counter(dict(count_symbols(R[j])))
    want = oracles.best_matching(P, R)
    assert oracles.as_key(got) == oracles.as_key(want)


@given(notes(), notes())
def test_pair_cost_matches_oracle(p, r):
    r = NoteEvent(p.offset, p.step, p.octave, r.accidental, r.tie_to_next, r.head_type, r.flags_beams,
                  r.dots, r.articulations, r.ornaments, r.grace)
    got = cost_of(note_pair_edits(p, r))
    want = oracles.pair_cost(p, r)
    assert got == (sum(want.values()),) + tuple(want[c] for c in CATEGORIES)


# -- SER -----------------------------------------------------------------------

def sequences(max_len):
    for n in range(max_len + 1):
        yield from itertools.product(ALPHABET, repeat=n)


def test_ser_single_substitution():
    assert ser(list("abc"), list("abd")).fraction == Fraction(1, 3)


def test_edit_distance_exhaustive_short_pairs():
    seqs = list(sequences(4))
    for a in seqs:
        for b in seqs:
            assert edit_distance(a, b) == oracles.levenshtein_recursive(a, b)


def test_edit_distance_exhaustive_combined_length_eight():
    # every sequence up to length 8 appears, against every partner that fits the budget
    count = 0
    for la in range(9):
        for a in itertools.product(ALPHABET, repeat=la):
            for lb in range(9 - la):
                for b in itertools.product(ALPHABET, repeat=lb):
                    assert edit_distance(a, b) == oracles.levenshtein_recursive(a, b)
                    count += 1
    assert count == sum((n + 1) * 3 ** n for n in range(9))


@settings(max_examples=300)
@given(st.lists(st.sampled_from(ALPHABET), max_size=8), st.lists(st.sampled_from(ALPHABET), max_size=8))
def test_edit_distance_random_pairs_up_to_eight(a, b):
    assert edit_distance(a, b) == oracles.levenshtein_recursive(a, b)


def words(n):
    return ["".join(t) for t in itertools.product(ALPHABET, repeat=n)]


def test_trie_oracle_matches_recursion():
    left = [w for n in range(6) for w in words(n)]
    for lb in range(6):
        table = oracles.levenshtein_trie(lb, 5, len(ALPHABET))
        for i, a in enumerate(left):
            for j, b in enumerate(words(lb)):
                assert table[i, j] == oracles.levenshtein_recursive(a, b)


def exhaustive_ser_mismatches(max_len=8) -> tuple[int, int]:
    """(pairs checked, mismatches) over every pair of sequences up to ``max_len``.

    The library distance is rapidfuzz's Levenshtein scorer (what edit_distance
    calls), run through cdist because ~97M Python-level calls would take minutes.
    """
    left = [w for n in range(max_len + 1) for w in words(n)]
    checked = bad = 0
    for lb in range(max_len + 1):
        got = process.cdist(left, words(lb), scorer=Levenshtein.distance, dtype=np.int8)
        want = oracles.levenshtein_trie(lb, max_len, len(ALPHABET))
        checked += got.size
        bad += int(np.count_nonzero(got != want))
    return checked, bad


def test_edit_distance_exhaustive_up_to_eight():
    checked, bad = exhaustive_ser_mismatches()
    assert checked == sum(3 ** n for n in range(9)) ** 2 and bad == 0


def test_wrapper_agrees_with_scorer():
    for a in sequences(4):
        for b in sequences(3):
            assert edit_distance(a, b) == Levenshtein.distance("".join(b), "".join(a))


def test_ser_rejects_empty_reference():
    from omrned.metrics import EmptyReference
    with pytest.raises(EmptyReference):
        ser([], ["a"])
