import logging
import math

import numpy as np
import pytest

from boosted_cascade.diffkernel import grad_check, make_rng, random_problem
from boosted_cascade.diffkernel.heads import merge_pairs
from boosted_cascade.diffkernel.rng import STREAM_GRADCHECK
from boosted_cascade.errors import ConfigError, DataError, LabelError
from boosted_cascade.losses import (
    LOSS_FAMILIES, ClassWeights, LossCurve, SmoothPairwiseError, WeightedCrossEntropy, compute_class_weights,
    resolve_loss_cls, smooth_pwe, weighted_ce,
)


def test_compute_class_weights():
    labels = np.zeros((100, 2), dtype=int)
    labels[:25, 0] = 1
    labels[:50, 1] = 1
    weights = compute_class_weights(labels)
    assert weights.weights[0] == pytest.approx(3.0)
    assert weights.weights[1] == pytest.approx(1.0)
    assert list(weights.positives) == [25, 50]
    assert list(weights.negatives) == [75, 50]

def test_compute_class_weights_fallbacks(caplog):
    labels = np.array([[0, 1], [0, 1], [0, 1]])
    with caplog.at_level(logging.WARNING):
        weights = compute_class_weights(labels, ['none', 'all'])
    assert weights.weights[0] == pytest.approx(3.0)
    assert weights.weights[1] == pytest.approx(1.0 / 3.0)
    assert np.all(weights.weights > 0)
    assert 'none' in caplog.text and 'all' in caplog.text

def test_compute_class_weights_errors():
    with pytest.raises(DataError):
        compute_class_weights(np.zeros((0, 3)))
    with pytest.raises(LabelError):
        compute_class_weights(np.array([[0, 2]]))

def test_weighted_ce_hand_value():
    breakdown = weighted_ce([[0.5]], [[1]], ClassWeights([3.0]))
    assert breakdown.total == pytest.approx(3.0 * math.log(2.0), abs=1e-9)
    assert breakdown.total == pytest.approx(2.07944, abs=1e-5)
    assert breakdown.per_class[0] == pytest.approx(3.0 * math.log(2.0), abs=1e-12)

def test_weighted_ce_perfect_prediction_is_near_zero():
    assert weighted_ce([[1.0 - 1e-12]], [[1]], ClassWeights([5.0])).total < 1e-10

def test_weighted_ce_unit_weights_is_binary_cross_entropy():
    rng = make_rng(3)
    q = rng.uniform(0.01, 0.99, size=(10, 4))
    y = (rng.random((10, 4)) < 0.5).astype(int)
    breakdown = weighted_ce(q, y, ClassWeights(np.ones(4)))
    bce = -(y * np.log(q) + (1 - y) * np.log(1 - q)).mean(axis=1)
    assert np.allclose(breakdown.per_example, bce, atol=1e-12)
    assert breakdown.total == pytest.approx(breakdown.per_example.mean(), abs=1e-10)

def test_weighted_ce_rejects_bad_labels():
    with pytest.raises(LabelError):
        weighted_ce([[0.5]], [[0.5]], ClassWeights([1.0]))

def test_weighted_cross_entropy_logits_match_predictions():
    rng = make_rng(4)
    logits = rng.normal(size=(6, 6))
    y = (rng.random((6, 3)) < 0.5).astype(int)
    loss = WeightedCrossEntropy(ClassWeights([2.0, 1.0, 0.5]))
    from_logits = loss.evaluate(logits, y)
    margin = logits[:, 1::2] - logits[:, 0::2]
    from_q = loss.from_predictions(1.0 / (1.0 + np.exp(-margin)), y)
    assert from_logits.total == pytest.approx(from_q.total, abs=1e-12)
    assert np.allclose(from_logits.grad_logits, from_q.grad_logits, atol=1e-12)

def test_weighted_cross_entropy_saturated_logits_stay_finite():
    loss = WeightedCrossEntropy(ClassWeights([1.0]))
    breakdown = loss.evaluate([[800.0, -800.0]], [[1]])
    assert breakdown.total == pytest.approx(1600.0)
    assert np.all(np.isfinite(breakdown.grad_logits))

def test_smooth_pwe_hand_values():
    assert smooth_pwe([[0.9, 0.2, 0.1]], [[1, 0, 0]]).total == pytest.approx(
        math.log(1 + math.exp(-0.7) + math.exp(-0.8)), abs=1e-9)
    assert smooth_pwe([[0.9, 0.2, 0.1]], [[1, 0, 0]]).total == pytest.approx(0.6657319272479287, abs=1e-9)
    assert smooth_pwe([[0.4, 0.4]], [[1, 0]]).total == pytest.approx(math.log(2.0), abs=1e-9)

def test_smooth_pwe_empty_sets_contribute_zero():
    breakdown = smooth_pwe([[0.3, 0.6], [0.2, 0.9], [0.5, 0.5]], [[1, 1], [0, 0], [1, 0]])
    assert breakdown.per_example[0] == 0.0
    assert breakdown.per_example[1] == 0.0
    assert breakdown.per_example[2] == pytest.approx(math.log(2.0))
    assert breakdown.per_class is None

def test_smooth_pwe_permutation_invariant():
    s = np.array([[0.9, 0.7, 0.2, 0.4, 0.1]])
    y = np.array([[1, 1, 0, 0, 0]])
    perm = [1, 0, 4, 2, 3]
    assert smooth_pwe(s[:, perm], y[:, perm]).total == pytest.approx(smooth_pwe(s, y).total, abs=1e-14)

def test_smooth_pwe_decreases_when_positive_score_rises():
    rng = make_rng(5)
    for _ in range(50):
        s = rng.uniform(0.05, 0.9, size=(1, 5))
        y = np.array([[1, 0, 1, 0, 0]])
        higher = s.copy()
        higher[0, 2] += 0.05
        assert smooth_pwe(higher, y).total < smooth_pwe(s, y).total

def test_per_example_losses_are_independent():
    rng = make_rng(6)
    q = rng.uniform(0.05, 0.95, size=(5, 3))
    y = (rng.random((5, 3)) < 0.5).astype(int)
    weights = ClassWeights([1.5, 1.0, 2.0])
    for loss in (lambda a, b: weighted_ce(a, b, weights), smooth_pwe):
        full = loss(q, y).per_example
        kept = np.delete(np.arange(5), 2)
        assert np.allclose(loss(q[kept], y[kept]).per_example, full[kept], atol=1e-15)

def test_losses_are_non_negative():
    rng = make_rng(7)
    logits = rng.normal(scale=3.0, size=(20, 8))
    y = (rng.random((20, 4)) < 0.4).astype(int)
    for loss in (WeightedCrossEntropy.for_training_labels(np.vstack([y, 1 - y])), SmoothPairwiseError()):
        assert np.all(loss.evaluate(logits, y).per_example >= 0)

@pytest.mark.parametrize('family', list(LOSS_FAMILIES))
def test_grad_check_twenty_random_draws(family):
    loss_cls = resolve_loss_cls(family)
    for draw in range(20):
        network, inputs, labels = random_problem(make_rng(0, STREAM_GRADCHECK, list(LOSS_FAMILIES).index(family), draw))
        report = grad_check(network, loss_cls.for_training_labels(labels), inputs, labels, epsilon=1e-5)
        assert report.max_relative_error < 1e-4, f"draw {draw}: {report.describe_worst()}"

def test_pwe_gradient_only_moves_margins():
    rng = make_rng(8)
    logits = rng.normal(size=(4, 6))
    y = (rng.random((4, 3)) < 0.5).astype(int)
    grad = SmoothPairwiseError().evaluate(logits, y).grad_logits
    assert np.allclose(grad[:, 0::2], -grad[:, 1::2])
    shifted = logits + merge_pairs(np.ones((4, 3)), np.ones((4, 3)))
    assert SmoothPairwiseError().evaluate(shifted, y).total == pytest.approx(
        SmoothPairwiseError().evaluate(logits, y).total, abs=1e-12)

def test_loss_serialization():
    loss = WeightedCrossEntropy(ClassWeights([3.0, 0.5]))
    restored = WeightedCrossEntropy.from_dict(loss.to_dict())
    assert np.array_equal(restored.class_weights.weights, loss.class_weights.weights)
    assert SmoothPairwiseError.from_dict(SmoothPairwiseError().to_dict()).name == 'PWE'

def test_resolve_loss_cls():
    assert resolve_loss_cls('BR-CE') is WeightedCrossEntropy
    assert resolve_loss_cls('PWE') is SmoothPairwiseError
    assert resolve_loss_cls('boosted_cascade.losses.SmoothPairwiseError') is SmoothPairwiseError
    with pytest.raises(ConfigError):
        resolve_loss_cls('hinge')
    with pytest.raises(ConfigError):
        resolve_loss_cls('boosted_cascade.losses.Missing')

def test_loss_curve_csv(tmp_path):
    curve = LossCurve(['a', 'b'])
    loss = WeightedCrossEntropy(ClassWeights([1.0, 1.0]))
    curve.record(0, 0.1, loss.evaluate(np.zeros((1, 4)), [[1, 0]]))
    lines = curve.to_csv_text().splitlines()
    assert lines[0] == 'step,lr,total_loss,ce_a,ce_b'
    assert lines[1].startswith('0,0.1,')
    assert curve.last_loss == pytest.approx(math.log(2.0))
    path = curve.write(str(tmp_path / 'level_0.csv'))
    assert open(path).read() == curve.to_csv_text()

def test_loss_curve_csv_without_classes():
    curve = LossCurve()
    curve.record(0, 0.1, SmoothPairwiseError().evaluate(np.zeros((1, 4)), [[1, 0]]))
    assert curve.to_csv_text().splitlines()[0] == 'step,lr,total_loss'
