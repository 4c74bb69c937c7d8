"""Mask scoring: confusion counts, the five metrics, aggregation."""

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sonarsim.metrics import (
    ConfusionCounts,
    aggregate,
    binarize,
    confusion,
    iou,
    iou_from_counts,
    report_to_dict,
    report_to_json,
    score,
)

# 4x4 worked example:
#   target has 5 obstacle pixels, prediction recovers 3 of them,
#   adds 1 false alarm, misses 2. tp=3 fp=1 fn=2 tn=10.
TARGET = np.array(
    [[1, 1, 0, 0],
     [1, 1, 0, 0],
     [0, 0, 0, 0],
     [1, 0, 0, 0]], dtype=np.uint8)
PRED = np.array(
    [[1, 1, 0, 0],
     [0, 1, 0, 1],
     [0, 0, 0, 0],
     [0, 0, 0, 0]], dtype=np.uint8)


def test_confusion_on_worked_example():
    c = confusion(PRED, TARGET)
    assert (c.tp, c.fp, c.fn, c.tn) == (3, 1, 2, 10)
    assert c.total == 16


def test_metrics_on_worked_example():
    r = score(confusion(PRED, TARGET))
    assert r.accuracy == 13 / 16
    assert r.precision == 3 / 4
    assert r.sensitivity == 3 / 5
    assert r.specificity == 10 / 11
    assert r.iou == 3 / 6  # 3 / (3 + 1 + 2)
    assert r.iou_mode == "foreground"


def test_agreement_mode_equals_accuracy():
    r = score(confusion(PRED, TARGET), iou_mode="agreement")
    assert r.iou == r.accuracy == 13 / 16


def test_iou_rejects_unknown_mode():
    with pytest.raises(ValueError, match="mode"):
        iou_from_counts(ConfusionCounts(1, 1, 1, 1), "jaccard")
    with pytest.raises(ValueError, match="iou_mode"):
        score(ConfusionCounts(1, 1, 1, 1), iou_mode="background")


# -------------------------------------------------- undefined metrics

def test_precision_undefined_without_positive_predictions():
    pred = np.zeros((4, 4), np.uint8)
    r = score(confusion(pred, TARGET))
    assert r.precision is None
    assert r.sensitivity == 0.0
    assert r.iou == 0.0


def test_sensitivity_undefined_without_actual_positives():
    target = np.zeros((4, 4), np.uint8)
    r = score(confusion(PRED, target))
    assert r.sensitivity is None
    assert r.specificity == 12 / 16
    assert r.precision == 0.0


def test_specificity_undefined_without_actual_negatives():
    ones = np.ones((3, 3), np.uint8)
    r = score(confusion(ones, ones))
    assert r.specificity is None
    assert r.accuracy == 1.0 and r.precision == 1.0 and r.sensitivity == 1.0


def test_two_empty_masks_have_unit_foreground_iou():
    z = np.zeros((5, 5), np.uint8)
    assert iou(z, z) == 1.0
    r = score(confusion(z, z))
    assert r.iou == 1.0 and r.accuracy == 1.0
    assert r.precision is None and r.sensitivity is None


def test_score_rejects_empty_counts():
    with pytest.raises(ValueError):
        score(ConfusionCounts(0, 0, 0, 0))


def test_confusion_rejects_shape_mismatch():
    with pytest.raises(ValueError, match="shape"):
        confusion(np.zeros((2, 3)), np.zeros((3, 2)))


# ------------------------------------------------------------ binarize

def test_binarize_threshold_is_inclusive():
    p = np.array([0.0, 0.49, 0.5, 0.51, 1.0])
    assert binarize(p).tolist() == [0, 0, 1, 1, 1]
    assert binarize(p, threshold=0.51).tolist() == [0, 0, 0, 1, 1]


def test_binarize_validates_input():
    with pytest.raises(ValueError):
        binarize(np.array([0.2, np.nan]))
    with pytest.raises(ValueError):
        binarize(np.array([0.2, 1.3]))
    with pytest.raises(ValueError):
        binarize(np.array([-0.1, 0.3]))


def test_binarize_returns_uint8():
    out = binarize(np.array([[0.9, 0.1]]))
    assert out.dtype == np.uint8 and out.shape == (1, 2)


# ----------------------------------------------------------- aggregate

def test_aggregate_micro_average_differs_from_mean():
    # sample A: tp=1 fp=1 (precision 1/2); sample B: tp=3 fp=1 (3/4)
    a = score(ConfusionCounts(tp=1, tn=2, fp=1, fn=0))
    b = score(ConfusionCounts(tp=3, tn=0, fp=1, fn=0))
    agg = aggregate([a, b])
    assert agg.precision == 4 / 6  # (1+3)/(2+4), not (1/2 + 3/4)/2
    assert agg.counts == ConfusionCounts(tp=4, tn=2, fp=2, fn=0)
    assert agg.n_samples == 2


def test_aggregate_skips_no_samples_and_mixed_modes():
    with pytest.raises(ValueError):
        aggregate([])
    a = score(ConfusionCounts(1, 1, 1, 1), iou_mode="foreground")
    b = score(ConfusionCounts(1, 1, 1, 1), iou_mode="agreement")
    with pytest.raises(ValueError, match="mode"):
        aggregate([a, b])


def test_aggregate_keeps_undefined_metrics_undefined():
    # no actual positives anywhere: sensitivity stays None after pooling
    z = np.zeros((4, 4), np.uint8)
    reports = [score(confusion(z, z)) for _ in range(3)]
    agg = aggregate(reports)
    assert agg.sensitivity is None and agg.precision is None
    assert agg.n_samples == 3


def test_counts_add():
    a = ConfusionCounts(1, 2, 3, 4)
    b = ConfusionCounts(10, 20, 30, 40)
    assert a + b == ConfusionCounts(11, 22, 33, 44)


# ------------------------------------------------------------- reports

def test_report_json_uses_null_for_undefined():
    z = np.zeros((2, 2), np.uint8)
    text = report_to_json(score(confusion(z, z)))
    data = json.loads(text)
    assert data["precision"] is None
    assert data["sensitivity"] is None
    assert data["iou"] == 1.0
    assert data["counts"] == {"tp": 0, "tn": 4, "fp": 0, "fn": 0}


def test_report_dict_round_trips_through_json():
    r = score(confusion(PRED, TARGET))
    assert json.loads(report_to_json(r)) == json.loads(
        json.dumps(report_to_dict(r)))


# ---------------------------------------------------------- properties

def _slow_metrics(pred, target):
    """Nested-loop oracle with exact rational arithmetic."""
    tp = tn = fp = fn = 0
    for i in range(pred.shape[0]):
        for k in range(pred.shape[1]):
            p, t = int(pred[i, k]), int(target[i, k])
            tp += p and t
            tn += (not p) and (not t)
            fp += p and not t
            fn += t and not p
    total = pred.size
    out = {"accuracy": Fraction(tp + tn, total)}
    out["precision"] = Fraction(tp, tp + fp) if tp + fp else None
    out["sensitivity"] = Fraction(tp, tp + fn) if tp + fn else None
    out["specificity"] = Fraction(tn, tn + fp) if tn + fp else None
    u = tp + fp + fn
    out["iou"] = Fraction(tp, u) if u else Fraction(1)
    return out


def test_matches_brute_force_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        pred = (rng.random((8, 8)) < rng.random()).astype(np.uint8)
        target = (rng.random((8, 8)) < rng.random()).astype(np.uint8)
        want = _slow_metrics(pred, target)
        r = score(confusion(pred, target))
        for name in ("accuracy", "precision", "sensitivity", "specificity", "iou"):
            got, exp = getattr(r, name), want[name]
            if exp is None:
                assert got is None
            else:
                assert got == float(exp)


_mask = st.integers(0, (1 << 16) - 1)


def _unpack(bits):
    return np.array([(bits >> i) & 1 for i in range(16)], np.uint8).reshape(4, 4)


@given(_mask, _mask)
def test_accuracy_always_equals_agreement_iou(pb, tb):
    pred, target = _unpack(pb), _unpack(tb)
    r = score(confusion(pred, target), iou_mode="agreement")
    assert r.iou == r.accuracy


@given(_mask, _mask)
def test_foreground_iou_is_symmetric(pb, tb):
    pred, target = _unpack(pb), _unpack(tb)
    assert iou(pred, target) == iou(target, pred)


@given(_mask, _mask)
def test_defined_metrics_stay_in_unit_interval(pb, tb):
    r = score(confusion(_unpack(pb), _unpack(tb)))
    for name in ("accuracy", "precision", "sensitivity", "specificity", "iou"):
        v = getattr(r, name)
        assert v is None or 0.0 <= v <= 1.0


@given(_mask)
def test_perfect_prediction_scores_one(bits):
    m = _unpack(bits)
    r = score(confusion(m, m))
    assert r.accuracy == 1.0 and r.iou == 1.0
    assert (r.counts.fp, r.counts.fn) == (0, 0)
