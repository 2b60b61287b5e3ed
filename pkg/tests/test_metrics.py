"""Evaluation measures against hand-computed values, brute-force pair
counting, and scikit-learn as an independent oracle."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import f1_score, roc_auc_score

from tes_osr.metrics import (
    EvalReport,
    auroc,
    confusion_matrix,
    macro_f1,
    openness,
    per_class_scores,
)


def brute_force_auroc(scores: np.ndarray, is_known: np.ndarray) -> float:
    """O(n^2) pair counting: wins plus half-credit ties over all pairs."""
    known = scores[is_known]
    unknown = scores[~is_known]
    total = 0.0
    for a in known:
        for b in unknown:
            if a > b:
                total += 1.0
            elif a == b:
                total += 0.5
    return total / (len(known) * len(unknown))


class TestOpenness:
    def test_closed_set_is_zero(self):
        assert openness(7, 7, 7) == 0.0

    def test_published_endpoints(self):
        assert openness(10, 57, 10) == pytest.approx(0.4536, abs=0.0005)
        assert openness(10, 12, 10) == pytest.approx(0.0465, abs=0.0005)

    def test_formula(self):
        assert openness(2, 6, 2) == pytest.approx(1.0 - np.sqrt(0.5), abs=1e-12)

    def test_train_count_must_be_positive(self):
        with pytest.raises(ValueError):
            openness(0, 5, 5)

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            openness(1, -1, 5)
        with pytest.raises(ValueError):
            openness(1, 5, -1)

    def test_zero_denominator_rejected(self):
        with pytest.raises(ValueError):
            openness(1, 0, 0)

    def test_undefined_when_train_dominates(self):
        with pytest.raises(ValueError):
            openness(10, 9, 10)
        assert openness(10, 10, 10) == 0.0

    @settings(max_examples=100, deadline=None)
    @given(
        st.integers(min_value=1, max_value=50),
        st.integers(min_value=0, max_value=200),
        st.integers(min_value=0, max_value=200),
    )
    def test_range_and_monotonicity(self, train, extra_e, extra_r):
        base = openness(train, train + extra_e, train + extra_r)
        assert 0.0 <= base < 1.0
        assert openness(train, train + extra_e + 1, train + extra_r) >= base
        assert openness(train, train + extra_e, train + extra_r + 1) >= base
        if train > 1 and 2 * (train - 1) <= 2 * train + extra_e + extra_r:
            assert openness(train - 1, train + extra_e, train + extra_r) >= base


class TestConfusionMatrix:
    def test_row_sums_are_truth_counts(self):
        truth = np.array([0, 0, 1, 2, 2, 2])
        preds = np.array([0, 1, 1, 2, 0, 2])
        m = confusion_matrix(truth, preds, 3)
        assert m.sum() == 6
        assert m.sum(axis=1).tolist() == [2, 1, 3]

    def test_cells(self):
        m = confusion_matrix(np.array([0, 1]), np.array([1, 1]), 2)
        assert m.tolist() == [[0, 1], [0, 1]]

    def test_label_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            confusion_matrix(np.array([0, 3]), np.array([0, 0]), 3)
        with pytest.raises(ValueError):
            confusion_matrix(np.array([0, 0]), np.array([0, -1]), 3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            confusion_matrix(np.array([]), np.array([]), 2)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            confusion_matrix(np.array([0, 1]), np.array([0]), 2)


def realize_confusion(conf: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    truth, preds = [], []
    for t in range(conf.shape[0]):
        for p in range(conf.shape[1]):
            truth.extend([t] * conf[t, p])
            preds.extend([p] * conf[t, p])
    return np.array(truth), np.array(preds)


class TestMacroF1:
    def test_perfect_predictions(self):
        labels = np.array([0, 1, 2, 2, 1, 0])
        score, _ = macro_f1(labels, labels, 3)
        assert score == 1.0

    def test_hand_computed_three_class_example(self):
        conf = np.array([[8, 1, 1], [0, 9, 1], [2, 0, 9]])
        truth, preds = realize_confusion(conf)
        score, per_class = macro_f1(truth, preds, 3)
        assert per_class[0].f1 == pytest.approx(0.8, abs=1e-12)
        assert per_class[1].f1 == pytest.approx(0.9, abs=1e-12)
        assert per_class[2].f1 == pytest.approx(9.0 / 11.0, abs=1e-12)
        assert score == pytest.approx((0.8 + 0.9 + 9.0 / 11.0) / 3.0, abs=1e-12)
        assert score == pytest.approx(0.8394, abs=1e-4)

    def test_everything_rejected_scores_zero(self):
        truth = np.array([0, 0, 1, 1])
        preds = np.array([2, 2, 2, 2])  # U on all, but truth is all known
        score, per_class = macro_f1(truth, preds, 3)
        assert score == 0.0
        assert all(s.f1 == 0.0 for s in per_class)

    def test_absent_class_flagged_and_divides_mean(self):
        truth = np.array([0, 1])
        preds = np.array([0, 1])
        score, per_class = macro_f1(truth, preds, 3)
        assert per_class[2].absent
        assert not per_class[0].absent
        assert score == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_sample_order_invariant(self):
        rng = np.random.default_rng(0)
        truth = rng.integers(0, 3, size=60)
        preds = rng.integers(0, 3, size=60)
        a, _ = macro_f1(truth, preds, 3)
        perm = rng.permutation(60)
        b, _ = macro_f1(truth[perm], preds[perm], 3)
        assert a == b

    def test_relabel_symmetry(self):
        rng = np.random.default_rng(1)
        truth = rng.integers(0, 3, size=60)
        preds = rng.integers(0, 3, size=60)
        a, _ = macro_f1(truth, preds, 3)
        swap = np.array([1, 0, 2])
        b, _ = macro_f1(swap[truth], swap[preds], 3)
        assert a == pytest.approx(b, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1), st.integers(min_value=2, max_value=5))
    def test_matches_sklearn(self, seed, n_classes):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 80))
        truth = rng.integers(0, n_classes, size=n)
        preds = rng.integers(0, n_classes, size=n)
        ours, _ = macro_f1(truth, preds, n_classes)
        ref = f1_score(
            truth, preds, labels=np.arange(n_classes), average="macro", zero_division=0
        )
        assert ours == pytest.approx(ref, abs=1e-12)

    def test_support_counts(self):
        _, per_class = macro_f1(np.array([0, 0, 1]), np.array([0, 1, 1]), 2)
        assert per_class[0].support == 2
        assert per_class[1].support == 1


class TestAuroc:
    def test_perfect_separation(self):
        scores = np.array([0.9, 0.8, 0.4, 0.2])
        known = np.array([True, True, False, False])
        assert auroc(scores, known) == 1.0

    def test_three_of_four_pairs(self):
        scores = np.array([0.6, 0.3, 0.5, 0.1])
        known = np.array([True, True, False, False])
        assert auroc(scores, known) == 0.75

    def test_all_ties_give_half(self):
        scores = np.full(10, 3.3)
        known = np.array([True] * 4 + [False] * 6)
        assert auroc(scores, known) == 0.5

    def test_reversed_separation_is_zero(self):
        scores = np.array([0.1, 0.2, 0.8, 0.9])
        known = np.array([True, True, False, False])
        assert auroc(scores, known) == 0.0

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            auroc(np.array([1.0, 2.0]), np.array([True, True]))

    def test_nonfinite_scores_rejected(self):
        with pytest.raises(ValueError):
            auroc(np.array([np.nan, 1.0]), np.array([True, False]))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            auroc(np.array([1.0, 2.0]), np.array([True]))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_matches_brute_force_exactly(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 120))
        # quantized scores force plenty of ties
        scores = np.round(rng.normal(size=n), 1)
        known = rng.uniform(size=n) < 0.5
        if known.all() or not known.any():
            known[0] = True
            known[-1] = False
        assert auroc(scores, known) == brute_force_auroc(scores, known)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_matches_sklearn(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 200))
        scores = np.round(rng.normal(size=n), 2)
        known = rng.uniform(size=n) < 0.5
        if known.all() or not known.any():
            known[0] = True
            known[-1] = False
        assert auroc(scores, known) == pytest.approx(
            roc_auc_score(known, scores), abs=1e-12
        )


class TestEvalReport:
    def test_to_dict_merges_extras(self):
        conf = np.eye(2, dtype=np.int64)
        report = EvalReport(
            openness=0.1,
            macro_f1=0.9,
            auroc=None,
            per_class=per_class_scores(conf),
            confusion=conf,
            known_count=2,
            unknown_count=0,
            extras={"variant": "tes"},
        )
        d = report.to_dict()
        assert d["variant"] == "tes"
        assert d["auroc"] is None
        assert d["confusion"] == [[1, 0], [0, 1]]
        assert d["per_class"][0]["f1"] == 1.0
