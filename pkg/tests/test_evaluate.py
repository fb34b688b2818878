import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from comira.errors import UndefinedCorrelationError
from comira.evaluate import (
    EvalRecord,
    accuracy_gap,
    bin_accuracy,
    build_report,
    emit_report,
    load_report,
    pearson_r,
    topk_correct,
    vqa_accuracy,
    yes_rate_by_pmi,
)


def oracle_vqa_official(prediction, answers):
    """Direct enumeration of all leave-one-out subsets."""
    from comira.scoring import normalize_answer

    pred = normalize_answer(prediction)
    normed = [normalize_answer(a) for a in answers]
    scores = []
    for i in range(len(normed)):
        subset = normed[:i] + normed[i + 1 :]
        scores.append(min(sum(1 for a in subset if a == pred) / 3.0, 1.0))
    return sum(scores) / len(scores)


# -- vqa accuracy -------------------------------------------------------------


def test_vqa_accuracy_three_of_ten():
    answers = ["cat"] * 3 + ["dog"] * 7
    assert vqa_accuracy("cat", answers) == pytest.approx(0.9, abs=1e-15)
    assert vqa_accuracy("cat", answers) == pytest.approx(
        oracle_vqa_official("cat", answers), abs=1e-15
    )


def test_vqa_accuracy_one_of_ten():
    answers = ["cat"] + ["dog"] * 9
    assert vqa_accuracy("cat", answers) == pytest.approx(0.3, abs=1e-15)
    assert vqa_accuracy("cat", answers) == pytest.approx(
        oracle_vqa_official("cat", answers), abs=1e-15
    )


def test_vqa_accuracy_zero_matches():
    assert vqa_accuracy("bird", ["cat"] * 10) == 0.0


def test_vqa_accuracy_normalizes_answers():
    answers = ["The cat!", "a cat", "CAT", "dog", "dog", "dog", "dog",
               "dog", "dog", "dog"]
    assert vqa_accuracy("cat.", answers) == pytest.approx(0.9, abs=1e-15)


def test_vqa_accuracy_small_sets_force_simple():
    assert vqa_accuracy("cat", ["cat", "cat", "dog"]) == pytest.approx(2 / 3)
    assert vqa_accuracy("cat", ["cat"], mode="official") == pytest.approx(1 / 3)


def test_vqa_accuracy_simple_mode():
    answers = ["cat"] * 3 + ["dog"] * 7
    assert vqa_accuracy("cat", answers, mode="simple") == 1.0


def test_vqa_accuracy_validation():
    with pytest.raises(ValueError):
        vqa_accuracy("cat", [])
    with pytest.raises(ValueError):
        vqa_accuracy("cat", ["cat"], mode="bogus")


@given(
    n_match=st.integers(min_value=0, max_value=10),
    total=st.integers(min_value=4, max_value=12),
)
@settings(max_examples=100, deadline=None)
def test_vqa_official_matches_oracle_and_stays_near_simple(n_match, total):
    n_match = min(n_match, total)
    answers = ["yes"] * n_match + ["no"] * (total - n_match)
    official = vqa_accuracy("yes", answers)
    simple = vqa_accuracy("yes", answers, mode="simple")
    assert official == pytest.approx(oracle_vqa_official("yes", answers), abs=1e-12)
    assert abs(official - simple) <= 1 / 3 + 1e-12


# -- topk ----------------------------------------------------------------------


def test_topk_examples():
    assert topk_correct(["cat", "dog"], "cat", 1) is True
    assert topk_correct(["cat", "dog"], "dog", 1) is False
    assert topk_correct(["cat", "dog"], "dog", 5) is True
    assert topk_correct(["cat", "dog"], "bird", 5) is False
    with pytest.raises(ValueError):
        topk_correct(["cat"], "cat", 0)
    with pytest.raises(ValueError):
        topk_correct([], "cat", 1)


# -- binning --------------------------------------------------------------------


def records_from(pmis, correct):
    return [
        EvalRecord(example_id=f"e{i}", pmi=p, correctness=c)
        for i, (p, c) in enumerate(zip(pmis, correct))
    ]


def test_bin_sizes_equal_counts():
    recs = records_from(range(100), [1.0] * 100)
    bins = bin_accuracy(recs, 20)
    assert [b.n for b in bins] == [5] * 20
    assert all(b.accuracy == 1.0 for b in bins)


def test_bin_sizes_differ_by_at_most_one():
    recs = records_from(range(103), [0.0] * 103)
    sizes = [b.n for b in bin_accuracy(recs, 20)]
    assert sum(sizes) == 103
    assert max(sizes) - min(sizes) <= 1


def test_bins_ordered_by_pmi_mean():
    recs = records_from([5, 3, 8, 1, 9, 2, 7, 4, 6, 0], [1.0] * 10)
    bins = bin_accuracy(recs, 5)
    means = [b.pmi_mean for b in bins]
    assert means == sorted(means)


def test_bin_ties_use_stable_order():
    recs = records_from([1.0] * 6, [0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
    bins = bin_accuracy(recs, 2)
    assert [b.n for b in bins] == [3, 3]
    assert bins[0].accuracy == 0.0 and bins[1].accuracy == 1.0


def test_bin_too_few_records():
    with pytest.raises(ValueError):
        bin_accuracy(records_from([1, 2, 3], [1, 1, 1]), 4)
    with pytest.raises(ValueError):
        bin_accuracy(records_from([1, 2, 3], [1, 1, 1]), 1)


# -- pearson -------------------------------------------------------------------


def test_pearson_exact_lines():
    assert pearson_r([(1, 1), (2, 2), (3, 3)]) == pytest.approx(1.0, abs=1e-12)
    assert pearson_r([(1, 3), (2, 2), (3, 1)]) == pytest.approx(-1.0, abs=1e-12)


def test_pearson_four_point_case():
    # hand computation: covariance sum 1.0, sxx 5, syy 1 -> 1/sqrt(5)
    r = pearson_r([(0, 0), (1, 1), (2, 0), (3, 1)])
    assert r == pytest.approx(0.4472, abs=1e-4)
    assert r == pytest.approx(1 / math.sqrt(5), abs=1e-12)


def test_pearson_errors():
    with pytest.raises(ValueError):
        pearson_r([(1, 1)])
    with pytest.raises(UndefinedCorrelationError):
        pearson_r([(1, 1), (1, 2)])
    with pytest.raises(UndefinedCorrelationError):
        pearson_r([(1, 1), (2, 1)])


@given(
    points=st.lists(
        st.tuples(
            st.integers(min_value=-100, max_value=100).map(float),
            st.integers(min_value=-100, max_value=100).map(float),
        ),
        min_size=3,
        max_size=20,
    ),
    a=st.floats(min_value=0.1, max_value=10),
    b=st.floats(min_value=-5, max_value=5),
)
@settings(max_examples=100, deadline=None)
def test_pearson_affine_invariance(points, a, b):
    try:
        base = pearson_r(points)
    except UndefinedCorrelationError:
        return
    scaled = pearson_r([(a * x + b, y) for x, y in points])
    flipped = pearson_r([(-x, y) for x, y in points])
    assert scaled == pytest.approx(base, abs=1e-9)
    assert flipped == pytest.approx(-base, abs=1e-9)


# -- accuracy gap -----------------------------------------------------------


def test_gap_extreme_sets():
    pmis = list(range(100))
    correct = [0.0] * 5 + [0.5] * 90 + [1.0] * 5
    recs = records_from(pmis, correct)
    assert accuracy_gap(recs, 0.05) == pytest.approx(1.0)
    assert accuracy_gap(records_from(pmis, [1.0] * 100), 0.05) == 0.0


def test_gap_median_split_constructed():
    pmis = list(range(40))
    correct = [1.0 if p > 19.5 else 0.0 for p in pmis]
    recs = records_from(pmis, correct)
    assert accuracy_gap(recs, 0.05) == pytest.approx(1.0)


def test_gap_tail_sizing_and_validation():
    recs = records_from(range(10), [1.0] * 10)
    assert accuracy_gap(recs, 0.5) == 0.0  # ceil(5) both tails
    with pytest.raises(ValueError):
        accuracy_gap(recs, 0.51)
    with pytest.raises(ValueError):
        accuracy_gap(recs, 0.0)
    with pytest.raises(ValueError):
        accuracy_gap([], 0.05)


def test_gap_deterministic_tie_break():
    recs = [
        EvalRecord("b", 1.0, 1.0),
        EvalRecord("a", 1.0, 0.0),
        EvalRecord("c", 2.0, 1.0),
        EvalRecord("d", 0.0, 0.0),
    ]
    # bottom tail=1 -> pmi 0 ('d'); top tail=1 -> pmi 2 ('c')
    assert accuracy_gap(recs, 0.25) == 1.0
    ordered_ties = [
        EvalRecord("a", 1.0, 0.0),
        EvalRecord("b", 1.0, 1.0),
        EvalRecord("c", 1.0, 1.0),
        EvalRecord("d", 1.0, 0.0),
    ]
    # all-equal pmi: tails resolve by example_id -> bottom 'a'(0), top 'd'(0)
    assert accuracy_gap(ordered_ties, 0.25) == 0.0


@given(
    seed=st.integers(min_value=0, max_value=1000),
)
@settings(max_examples=50, deadline=None)
def test_gap_invariant_under_monotone_pmi_transform(seed):
    import random

    rng = random.Random(seed)
    recs = [
        EvalRecord(f"e{i}", rng.uniform(-5, 5), rng.choice([0.0, 1.0]))
        for i in range(40)
    ]
    base = accuracy_gap(recs, 0.1)
    transformed = [
        EvalRecord(r.example_id, math.exp(r.pmi), r.correctness) for r in recs
    ]
    assert accuracy_gap(transformed, 0.1) == pytest.approx(base, abs=1e-12)


# -- yes rate ----------------------------------------------------------------


def yes_records(pmis, preds):
    return [
        EvalRecord(
            example_id=f"y{i}",
            pmi=p,
            correctness=1.0 if a == "yes" else 0.0,
            predicted_answer=a,
            ground_truth_is_yes=True,
        )
        for i, (p, a) in enumerate(zip(pmis, preds))
    ]


def test_yes_rate_constant_predictions():
    recs = yes_records(range(20), ["yes"] * 20)
    assert all(b.yes_rate == 1.0 for b in yes_rate_by_pmi(recs, 4))
    recs = yes_records(range(20), ["no"] * 20)
    assert all(b.yes_rate == 0.0 for b in yes_rate_by_pmi(recs, 4))


def test_yes_rate_step_with_pmi():
    pmis = list(range(40))
    preds = ["yes" if p >= 20 else "no" for p in pmis]
    bins = yes_rate_by_pmi(yes_records(pmis, preds), 4)
    assert [b.yes_rate for b in bins] == [0.0, 0.0, 1.0, 1.0]


def test_yes_rate_validation():
    with pytest.raises(ValueError):
        yes_rate_by_pmi([], 4)
    bad = [EvalRecord("x", 0.0, 1.0, predicted_answer=None,
                      ground_truth_is_yes=True)]
    with pytest.raises(ValueError):
        yes_rate_by_pmi(bad * 4, 2)


# -- reports -------------------------------------------------------------------


def test_report_round_trip(tmp_path):
    recs = records_from(range(100), [i / 99 for i in range(100)])
    report = build_report(recs, num_bins=10, tail_fraction=0.05)
    path = str(tmp_path / "report.json")
    emit_report(report, path, format="json")
    assert load_report(path) == report


def test_report_csv_shape(tmp_path):
    recs = records_from(range(60), [1.0] * 60)
    report = build_report(recs, num_bins=12)
    path = str(tmp_path / "report.csv")
    emit_report(report, path, format="csv")
    lines = open(path).read().strip().splitlines()
    assert lines[0] == "bin_index,pmi_mean,accuracy,n"
    assert len(lines) == 13
    with pytest.raises(ValueError):
        emit_report(report, path, format="xml")


def test_report_fields_consistent():
    import random

    rng = random.Random(4)
    recs = [
        EvalRecord(f"e{i}", rng.uniform(-2, 2), rng.choice([0.0, 1.0]))
        for i in range(200)
    ]
    report = build_report(recs, num_bins=20, tail_fraction=0.05, excluded=7)
    assert sum(b.n for b in report.bins) == 200
    assert report.excluded == 7
    assert report.accuracy_gap == pytest.approx(accuracy_gap(recs, 0.05))
    means = [b.pmi_mean for b in report.bins]
    assert means == sorted(means)
    assert report.pearson_r_records is not None


def test_report_pearson_none_when_degenerate():
    recs = records_from(range(40), [1.0] * 40)
    report = build_report(recs, num_bins=4)
    assert report.pearson_r is None
    assert report.pearson_r_records is None
    assert report.accuracy_gap == 0.0


def test_binned_pearson_on_sorted_correctness_is_one():
    pmis = list(range(100))
    correct = [p / 99 for p in pmis]
    report = build_report(records_from(pmis, correct), num_bins=10)
    assert report.pearson_r == pytest.approx(1.0, abs=1e-9)
