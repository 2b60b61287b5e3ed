"""Collective decision scores, threshold calibration, and the accept/reject
rule. A passthrough student (identity trunk, coordinate-picking heads) turns
feature rows into head logits verbatim, so every calibration quantity can be
checked against hand arithmetic."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tes_osr import nn
from tes_osr.datagen import LabeledDataset
from tes_osr.recognition import (
    Prediction,
    Thresholds,
    calibrate_thresholds,
    collective_decision_scores,
    decide,
    load_thresholds,
    lower_quantile,
    predict,
    predict_batch,
    save_thresholds,
)
from tes_osr.student import StudentModel, student_forward


def passthrough_student(width: int) -> StudentModel:
    """Student whose head logits equal the input features, coordinate for
    coordinate: head k reads feature k. width = known classes + 1."""
    trunk = nn.init_model([nn.dense(width, width)], 0)
    trunk.params["layer0.w"].data[:] = np.eye(width).ravel()
    trunk.params["layer0.b"].data[:] = 0.0
    heads = []
    for k in range(width):
        head = nn.init_model([nn.dense(width, 1)], 0)
        w = np.zeros((width, 1))
        w[k, 0] = 1.0
        head.params["layer0.w"].data[:] = w.ravel()
        head.params["layer0.b"].data[:] = 0.0
        heads.append(head)
    return StudentModel(trunk, heads)


class TestCollectiveDecisionScores:
    def test_equal_logits_give_zero(self):
        out = collective_decision_scores(np.array([2.0, 2.0, 2.0]))
        assert np.all(out == 0.0)

    def test_worked_example_exact(self):
        out = collective_decision_scores(np.array([2.0, 0.0, 0.0]))
        assert out.tolist() == [2.0, -1.0, -1.0]

    def test_shift_invariance_tight(self):
        rng = np.random.default_rng(0)
        logits = rng.normal(scale=3.0, size=(1000, 5))
        base = collective_decision_scores(logits)
        shifted = collective_decision_scores(logits + 7.3)
        assert np.max(np.abs(shifted - base)) < 1e-9

    def test_batch_matches_vector(self):
        batch = np.array([[1.0, -2.0, 0.5], [3.0, 3.0, 3.0]])
        rows = collective_decision_scores(batch)
        for i in range(2):
            assert np.array_equal(rows[i], collective_decision_scores(batch[i]))

    def test_scores_sum_to_zero(self):
        rng = np.random.default_rng(1)
        logits = rng.normal(size=(200, 4))
        cds = collective_decision_scores(logits)
        assert np.max(np.abs(cds.sum(axis=1))) < 1e-9

    def test_single_head_rejected(self):
        with pytest.raises(ValueError):
            collective_decision_scores(np.array([1.0]))

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(
            st.floats(min_value=-50, max_value=50, allow_nan=False),
            min_size=2,
            max_size=8,
        ),
        st.floats(min_value=-20, max_value=20, allow_nan=False),
    )
    def test_shift_invariance_property(self, logits, c):
        arr = np.array(logits)
        a = collective_decision_scores(arr)
        b = collective_decision_scores(arr + c)
        assert np.max(np.abs(a - b)) < 1e-9


class TestLowerQuantile:
    def test_twenty_point_oracle(self):
        # index floor(0.05 * 19) = 0, so the answer is the minimum
        values = np.arange(1.0, 21.0)
        assert lower_quantile(values, 0.05) == 1.0

    def test_never_interpolates(self):
        assert lower_quantile(np.array([10.0, 20.0, 30.0, 40.0]), 0.5) == 20.0

    def test_endpoints(self):
        values = np.array([5.0, 1.0, 9.0])
        assert lower_quantile(values, 0.0) == 1.0
        assert lower_quantile(values, 1.0) == 9.0

    def test_unsorted_input(self):
        assert lower_quantile(np.array([3.0, 1.0, 2.0]), 0.5) == 2.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            lower_quantile(np.array([]), 0.5)

    @pytest.mark.parametrize("q", [-0.1, 1.5])
    def test_out_of_range_rejected(self, q):
        with pytest.raises(ValueError):
            lower_quantile(np.array([1.0]), q)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(min_value=-100, max_value=100), min_size=1, max_size=50),
        st.floats(min_value=0.0, max_value=1.0),
    )
    def test_result_is_an_element(self, values, q):
        arr = np.array(values)
        out = lower_quantile(arr, q)
        assert out in arr


def calibration_dataset(n_per_class: int = 20):
    """Class-y rows put cds_y = 1..n on head y: logits (v,0,0) give
    cds = (v, -v/2, -v/2), so the score IS the feature value."""
    rows = []
    labels = []
    for y in range(2):
        for v in range(1, n_per_class + 1):
            row = np.zeros(3)
            row[y] = float(v)
            rows.append(row)
            labels.append(y)
    return LabeledDataset(np.array(rows), np.array(labels), 2)


class TestCalibrateThresholds:
    def test_twenty_sample_oracle(self):
        student = passthrough_student(3)
        data = calibration_dataset()
        th = calibrate_thresholds(student, data, coverage=0.95)
        assert th.eps_cds[0] == 1.0
        assert th.eps_cds[1] == 1.0
        assert th.eps_cds[-1] == 0.0
        # p_U = sigmoid(0) = 0.5 on every row, so its quantile is exact
        assert th.eps_unknown == 0.5

    def test_coverage_near_one_takes_class_minimum(self):
        student = passthrough_student(3)
        data = calibration_dataset(n_per_class=50)
        th = calibrate_thresholds(student, data, coverage=0.999)
        assert th.eps_cds[0] == 1.0 and th.eps_cds[1] == 1.0

    def test_quantile_moves_with_sample_count(self):
        student = passthrough_student(3)
        data = calibration_dataset(n_per_class=200)
        th = calibrate_thresholds(student, data, coverage=0.95)
        # floor(0.05 * 199) = 9, sorted value at that index is 10
        assert th.eps_cds[0] == 10.0

    def test_accept_rate_meets_granularity_bound(self):
        student = passthrough_student(3)
        data = calibration_dataset()
        th = calibrate_thresholds(student, data, coverage=0.95)
        labels, _, _ = predict_batch(student, th, data.features)
        for y in range(2):
            rate = float(np.mean(labels[data.labels == y] == y))
            assert rate >= 0.95 - 1.0 / 20.0

    def test_thin_class_rejected(self):
        student = passthrough_student(3)
        data = calibration_dataset(n_per_class=19)
        with pytest.raises(ValueError, match="fewer than 20"):
            calibrate_thresholds(student, data)

    def test_never_correct_class_named_in_error(self):
        student = passthrough_student(3)
        # class-1 rows still put their score on head 0
        rows = np.zeros((40, 3))
        rows[:, 0] = np.arange(1.0, 41.0)
        data = LabeledDataset(rows, np.repeat([0, 1], 20), 2)
        with pytest.raises(ValueError, match="class 1"):
            calibrate_thresholds(student, data)

    @pytest.mark.parametrize("coverage", [0.0, 1.0, -0.5, 2.0])
    def test_bad_coverage_rejected(self, coverage):
        with pytest.raises(ValueError):
            calibrate_thresholds(passthrough_student(3), calibration_dataset(), coverage)

    def test_class_count_mismatch_rejected(self):
        student = passthrough_student(4)  # three known heads
        with pytest.raises(ValueError):
            calibrate_thresholds(student, calibration_dataset())

    def test_flag_propagates(self):
        th = calibrate_thresholds(
            passthrough_student(3), calibration_dataset(), use_uncertainty=True
        )
        assert th.use_uncertainty


class TestDecide:
    def make_thresholds(self, use_uncertainty=False):
        return Thresholds(
            np.array([1.0, 1.0, 0.0]), eps_unknown=0.6, use_uncertainty=use_uncertainty
        )

    def test_all_below_thresholds_rejects(self):
        th = self.make_thresholds()
        assert decide(np.array([0.5, 0.2, -0.7]), 0.1, th) == 2

    def test_boundary_equality_rejects(self):
        th = self.make_thresholds()
        assert decide(np.array([1.0, 0.0, -1.0]), 0.1, th) == 2
        assert decide(np.array([np.nextafter(1.0, 2.0), 0.0, -1.0]), 0.1, th) == 0

    def test_rejection_argmax_stays_unknown(self):
        th = self.make_thresholds()
        assert decide(np.array([-2.0, -2.0, 4.0]), 0.9, th) == 2

    def test_uncertainty_gate(self):
        scores = np.array([3.0, 0.0, -3.0])
        off = self.make_thresholds(use_uncertainty=False)
        on = self.make_thresholds(use_uncertainty=True)
        assert decide(scores, 0.7, off) == 0  # gate ignored
        assert decide(scores, 0.7, on) == 2  # 0.7 >= 0.6 rejects
        assert decide(scores, 0.6, on) == 2  # boundary is strict
        assert decide(scores, 0.59, on) == 0

    def test_argmax_tie_breaks_low(self):
        th = Thresholds(np.array([0.0, 0.0, 0.0]), 0.5)
        assert decide(np.array([2.0, 2.0, -4.0]), 0.1, th) == 0

    def test_width_mismatch_rejected(self):
        with pytest.raises(ValueError):
            decide(np.array([1.0, 2.0]), 0.1, self.make_thresholds())


class TestPredict:
    def setup_method(self):
        self.student = passthrough_student(3)
        self.th = Thresholds(np.array([1.0, 1.0, 0.0]), eps_unknown=0.6)

    def test_single_matches_batch(self):
        batch = np.array([[3.0, 0.0, 0.0], [0.0, 0.0, 2.0], [0.4, 0.4, 0.4]])
        labels, cds, p_u = predict_batch(self.student, self.th, batch)
        for i in range(len(batch)):
            one = predict(self.student, self.th, batch[i])
            assert one.label == labels[i]
            assert np.array_equal(one.cds, cds[i])
            assert one.p_unknown == p_u[i]

    def test_accept_and_reject_labels(self):
        labels, _, _ = predict_batch(
            self.student,
            self.th,
            np.array([[3.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.2, 0.2, 0.2]]),
        )
        assert labels.tolist() == [0, 1, 2]

    def test_decision_shift_invariant_in_logits(self):
        batch = np.random.default_rng(2).normal(scale=2.0, size=(50, 3))
        a, _, _ = predict_batch(self.student, self.th, batch)
        b, _, _ = predict_batch(self.student, self.th, batch + 11.0)
        assert np.array_equal(a, b)

    def test_multi_sample_input_rejected(self):
        with pytest.raises(ValueError):
            predict(self.student, self.th, np.zeros((2, 3)))

    def test_prediction_carries_scores(self):
        p = predict(self.student, self.th, np.array([3.0, 0.0, 0.0]))
        assert isinstance(p, Prediction)
        assert p.cds[0] == 3.0
        assert p.p_unknown == 0.5

    def test_uncertainty_on_only_adds_rejections(self):
        batch = np.random.default_rng(3).normal(scale=2.0, size=(200, 3))
        off = Thresholds(np.array([0.5, 0.5, 0.0]), eps_unknown=0.5, use_uncertainty=False)
        on = Thresholds(np.array([0.5, 0.5, 0.0]), eps_unknown=0.5, use_uncertainty=True)
        l_off, _, _ = predict_batch(self.student, off, batch)
        l_on, _, _ = predict_batch(self.student, on, batch)
        known_on = l_on != 2
        assert np.all(l_off[known_on] == l_on[known_on])
        assert set(np.flatnonzero(known_on)) <= set(np.flatnonzero(l_off != 2))

    def test_raising_thresholds_never_unrejects(self):
        batch = np.random.default_rng(4).normal(scale=2.0, size=(200, 3))
        low = Thresholds(np.array([0.2, 0.2, 0.0]), 0.5)
        high = Thresholds(np.array([0.2, 1.5, 0.0]), 0.5)
        l_low, _, _ = predict_batch(self.student, low, batch)
        l_high, _, _ = predict_batch(self.student, high, batch)
        was_unknown = l_low == 2
        assert np.all(l_high[was_unknown] == 2)


class TestThresholdIO:
    def test_round_trip_exact(self, tmp_path):
        th = Thresholds(
            np.array([0.123456789012345, -2.5, 0.0]),
            eps_unknown=0.9876543210123,
            use_uncertainty=True,
            coverage=0.9,
        )
        p = tmp_path / "thresholds.txt"
        save_thresholds(th, p)
        back = load_thresholds(p)
        assert np.array_equal(back.eps_cds, th.eps_cds)
        assert back.eps_unknown == th.eps_unknown
        assert back.use_uncertainty is True
        assert back.coverage == th.coverage

    def test_flag_off_round_trips(self, tmp_path):
        th = Thresholds(np.array([1.0, 0.0]), 0.5, use_uncertainty=False)
        p = tmp_path / "t.txt"
        save_thresholds(th, p)
        assert load_thresholds(p).use_uncertainty is False

    def test_unknown_key_names_line(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("coverage 0.95\nwat 3\n")
        with pytest.raises(ValueError, match="line 2"):
            load_thresholds(p)

    def test_incomplete_table_rejected(self, tmp_path):
        p = tmp_path / "gap.txt"
        p.write_text("coverage 0.95\neps_cds 0 1.0\neps_cds 2 1.0\neps_cds U 0.0\neps_unknown 0.5\nuse_uncertainty 0\n")
        with pytest.raises(ValueError, match="incomplete"):
            load_thresholds(p)

    def test_missing_rejection_entry_rejected(self, tmp_path):
        p = tmp_path / "nou.txt"
        p.write_text("eps_cds 0 1.0\neps_cds 1 1.0\neps_unknown 0.5\n")
        with pytest.raises(ValueError, match="incomplete"):
            load_thresholds(p)

    def test_bad_number_names_line(self, tmp_path):
        p = tmp_path / "num.txt"
        p.write_text("coverage x\n")
        with pytest.raises(ValueError, match="line 1"):
            load_thresholds(p)
