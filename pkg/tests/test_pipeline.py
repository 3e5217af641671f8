"""Tests for the hierarchical composition and evaluation metrics."""

import json

import numpy as np
import pytest

from bait.data import SamplePair, StanceLabel
from bait.errors import ContractError, IntegrityError, ParameterError
from bait.metrics import confusion_matrix, evaluate, fnc_score
from bait.nn.layers import DenseLayerParams
from bait.pipeline import BaitModel, HierarchicalStanceClassifier, bait_predict_batch
from bait.relatednet import RelatedNetClassifier, RelatedNetConfig, RelatedNetParams
from bait.stage2 import AgreemNetConfig, TopKNetClassifier, TopKNetConfig, TopKNetParams

from conftest import make_corpus
from oracles import fnc_points_loops

A, D, C, U = (int(StanceLabel.AGR), int(StanceLabel.DSG),
              int(StanceLabel.DSC), int(StanceLabel.UNR))


class TestFncScore:
    def test_hand_case_mixed(self):
        assert fnc_score([U, C], [U, A]) == pytest.approx(40.0, abs=1e-9)

    def test_perfect_predictions(self):
        assert fnc_score([U, A, D, C], [U, A, D, C]) == pytest.approx(100.0, abs=1e-9)

    def test_all_unrelated_hand_case(self):
        assert fnc_score([U, U], [U, A]) == pytest.approx(20.0, abs=1e-9)

    def test_all_unrelated_closed_form_on_random_corpora(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            gold = rng.integers(0, 4, size=int(rng.integers(2, 200)))
            if not (gold == U).any() and not (gold != U).any():
                continue
            n_unr = int(np.sum(gold == U))
            n_rel = len(gold) - n_unr
            expected = 100.0 * 0.25 * n_unr / (0.25 * n_unr + n_rel)
            got = fnc_score(np.full_like(gold, U), gold)
            assert got == pytest.approx(expected, abs=1e-9)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            gold = rng.integers(0, 4, size=40)
            pred = rng.integers(0, 4, size=40)
            points, maximum = fnc_points_loops(pred, gold)
            assert fnc_score(pred, gold) == pytest.approx(
                100.0 * points / maximum, abs=1e-9)

    def test_bounds_and_exactness(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            gold = rng.integers(0, 4, size=25)
            pred = rng.integers(0, 4, size=25)
            s = fnc_score(pred, gold)
            assert 0.0 <= s <= 100.0
            assert (s == 100.0) == bool(np.all(pred == gold))

    def test_empty_rejected(self):
        with pytest.raises(ParameterError):
            fnc_score([], [])


class TestEvaluate:
    def test_all_correct(self):
        report = evaluate([A, D, C, U], [A, D, C, U])
        np.testing.assert_array_equal(report.per_class_accuracy, 1.0)
        assert report.overall_accuracy == 1.0
        assert report.fnc_score_percent == 100.0

    def test_hand_counted_case(self):
        report = evaluate([U, A, A], [U, U, A])
        assert report.per_class_accuracy[U] == 0.5
        assert report.per_class_accuracy[A] == 1.0
        assert report.overall_accuracy == pytest.approx(2 / 3)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(3)
        gold = rng.integers(0, 4, size=60)
        pred = rng.integers(0, 4, size=60)
        base = evaluate(pred, gold)
        perm = rng.permutation(60)
        shuffled = evaluate(pred[perm], gold[perm])
        np.testing.assert_array_equal(base.confusion, shuffled.confusion)
        assert base.overall_accuracy == shuffled.overall_accuracy
        assert base.fnc_score_percent == shuffled.fnc_score_percent

    def test_length_mismatch_rejected(self):
        with pytest.raises(ContractError):
            evaluate([A], [A, U])

    def test_json_schema(self):
        report = evaluate([A, U], [A, U])
        payload = json.loads(report.to_json())
        assert set(payload) == {"per_class_accuracy", "overall_accuracy",
                                "fnc_score", "confusion_matrix", "class_order"}
        assert payload["class_order"] == ["agree", "disagree", "discuss", "unrelated"]
        assert np.asarray(payload["confusion_matrix"]).shape == (4, 4)


class TestConfusionMatrix:
    def test_perfect_predictions_are_diagonal(self):
        gold = [A, A, D, C, U, U, U]
        matrix = confusion_matrix(gold, gold)
        np.testing.assert_array_equal(np.diag(matrix), [2, 1, 1, 3])
        assert matrix.sum() == 7

    def test_single_off_diagonal_cell(self):
        matrix = confusion_matrix([D], [A])
        assert matrix[A, D] == 1
        assert matrix.sum() == 1

    def test_row_sums_equal_gold_counts(self):
        rng = np.random.default_rng(4)
        gold = rng.integers(0, 4, size=100)
        pred = rng.integers(0, 4, size=100)
        matrix = confusion_matrix(pred, gold)
        np.testing.assert_array_equal(
            matrix.sum(axis=1), [np.sum(gold == c) for c in range(4)])


def _constant_output_model(p_related, stage2_dist, sim_dim=16, nli_dim=24,
                           threshold=0.5):
    """Rig both stages to emit fixed distributions via zero weights + biases."""
    rn_config = RelatedNetConfig(k=2, hidden_a=4, hidden_b=4, dropout_p=0.0,
                                 sim_dim=sim_dim)
    rn_params = RelatedNetParams.init(rn_config, np.random.default_rng(0))
    for layer in rn_params.layers:
        layer.weight[:] = 0
        layer.bias[:] = 0
    rn_params.layers[-1].bias[:] = np.log([1 - p_related, p_related])

    tk_config = TopKNetConfig(k=2, hidden_a=4, hidden_b=4, dropout_p=0.0,
                              nli_dim=nli_dim)
    tk_params = TopKNetParams.init(tk_config, np.random.default_rng(1))
    for layer in tk_params.layers:
        layer.weight[:] = 0
        layer.bias[:] = 0
    tk_params.layers[-1].bias[:] = np.log(stage2_dist)
    return BaitModel(rn_config, rn_params, "topknet", tk_config, tk_params,
                     threshold=threshold)


@pytest.fixture(scope="module")
def dataset():
    return make_corpus(n_samples=20, seed=9).dataset(body_len=10)


class TestBaitGating:
    def test_low_related_probability_forces_unrelated(self, dataset):
        model = _constant_output_model(0.1, [0.2, 0.7, 0.1])
        pred = bait_predict_batch(model, dataset)
        assert np.all(pred == U)

    def test_gate_open_returns_stage2_argmax(self, dataset):
        model = _constant_output_model(0.9, [0.2, 0.7, 0.1])
        pred = bait_predict_batch(model, dataset)
        assert np.all(pred == D)

    def test_boundary_probability_proceeds_to_stage2(self, dataset):
        model = _constant_output_model(0.5, [0.1, 0.1, 0.8], threshold=0.5)
        pred = bait_predict_batch(model, dataset)
        assert np.all(pred == C)

    def test_argmax_tie_breaks_lexicographically(self, dataset):
        model = _constant_output_model(0.9, [0.4, 0.4, 0.2])
        pred = bait_predict_batch(model, dataset)
        assert np.all(pred == A)

    def test_gating_soundness_property(self, dataset):
        rng = np.random.default_rng(5)
        for _ in range(5):
            p = float(rng.uniform(0.05, 0.95))
            dist = rng.dirichlet(np.ones(3))
            model = _constant_output_model(p, dist)
            pred = bait_predict_batch(model, dataset)
            if p >= 0.5:
                assert np.all(pred != U)
            else:
                assert np.all(pred == U)

    def test_store_dim_mismatch_rejected(self, dataset):
        model = _constant_output_model(0.9, [0.3, 0.3, 0.4], sim_dim=99)
        with pytest.raises(IntegrityError):
            bait_predict_batch(model, dataset)


class TestHierarchicalEstimator:
    def test_fit_predict_end_to_end(self):
        corpus = make_corpus(n_samples=260, seed=13)
        ds = corpus.dataset(body_len=12)
        clf = HierarchicalStanceClassifier(
            relatednet=RelatedNetClassifier(k=2, hidden_a=16, hidden_b=8,
                                            dropout=0.1, epochs=40, patience=40,
                                            lr=3e-3, seed=0),
            stage2=TopKNetClassifier(k=2, hidden_a=16, hidden_b=8, dropout=0.1,
                                     epochs=40, patience=40, lr=3e-3, seed=0),
        )
        clf.fit(ds)
        pred = clf.predict(ds)
        gold = ds.labels()
        report = evaluate(pred, gold)
        majority = max(np.bincount(gold, minlength=4)) / len(gold)
        assert report.overall_accuracy > majority
