from fractions import Fraction

import pytest
from hypothesis import given, settings

from omrned.diff import DiffResult, diff_scores
from omrned.kern import parse_strict
from omrned.metrics import (
    MetricValue,
    category_percentages,
    edit_distance,
    group_distances,
    omr_ned,
    round_half_up,
    ser,
)
from omrned.model import Category, ReportGroup, Score, SymbolBag, bag

from strategies import score_pairs


def result(per_category: SymbolBag, ins: int, dels: int, n_pred=100, n_ref=100) -> DiffResult:
    return DiffResult((), per_category, ins, dels, n_pred, n_ref)


def test_metric_value_zero_over_zero():
    assert MetricValue(0, 0).fraction == 0
    assert str(MetricValue(0, 0)) == "0.0000"


def test_identical_scores_score_zero():
    s = parse_strict("**kern\n4c\n*-\n")
    assert omr_ned(diff_scores(s, s)).value == 0


def test_empty_prediction_scores_one():
    ref = parse_strict("**kern\n4c\n4d\n*-\n")
    assert omr_ned(diff_scores(Score(), ref)).fraction == 1


def test_time_signature_example_ratio():
    pred = parse_strict("**kern\n*clefG2\n*M2/4\n2c\n=\n*-\n")
    ref = parse_strict("**kern\n*clefG2\n*M3/4\n2c\n=\n*-\n")
    m = omr_ned(diff_scores(pred, ref))
    assert (m.numerator, m.denominator) == (2, 14)
    assert str(m) == "0.1429"


def test_ser_examples():
    assert ser(list("abc"), list("abc")).value == 0
    assert ser(list("abc"), list("abd")).fraction == Fraction(1, 3)
    assert ser(["a"], list("bbbb")).fraction == 4  # may exceed 1


def test_edit_distance_counts_substitutions_once():
    assert edit_distance(["x"], ["y"]) == 1


def test_percentages_all_lyrics():
    d = result(bag(lyric=7), 3, 4)
    p = category_percentages(d)
    assert p[ReportGroup.LYRICS] == 100.0
    assert sum(p.values()) == 100.0


def test_percentages_65_35():
    d = result(bag(pitch=40, notehead=25, lyric=35), 50, 50)
    p = category_percentages(d)
    assert p[ReportGroup.NOTE] == 65.0 and p[ReportGroup.LYRICS] == 35.0
    assert all(v == 0.0 for g, v in p.items() if g not in (ReportGroup.NOTE, ReportGroup.LYRICS))


def test_percentages_zero_errors():
    assert set(category_percentages(result(SymbolBag(), 0, 0)).values()) == {0.0}


def test_percentages_sum_to_100_within_rounding():
    d = result(bag(pitch=1, clef=1, lyric=1), 2, 1)
    p = category_percentages(d)
    assert p[ReportGroup.NOTE] == 33.3
    assert abs(sum(p.values()) - 100) <= 0.1 * len(ReportGroup)


def test_group_distances():
    g = group_distances(result(bag(pitch=2, dynamic=3, measure=1), 3, 3))
    assert g[ReportGroup.NOTE] == 2 and g[ReportGroup.EXTRA] == 3 and g[ReportGroup.MEASURE] == 1


@pytest.mark.parametrize("x,out", [(Fraction(1, 8), 0.1), (Fraction(5, 100), 0.1), (0.25, 0.3), (Fraction(-1, 20), -0.1)])
def test_round_half_up(x, out):
    assert round_half_up(x) == out


@settings(max_examples=200)
@given(score_pairs())
def test_omr_ned_bounds_and_symmetry(pair):
    pred, ref = pair
    a = omr_ned(diff_scores(pred, ref))
    b = omr_ned(diff_scores(ref, pred))
    assert 0 <= a.fraction <= 1
    assert a == b
    assert (a.fraction == 0) == (diff_scores(pred, ref).distance == 0)
