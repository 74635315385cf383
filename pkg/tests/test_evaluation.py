import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mer.errors import MerWarning, TrainingError, ValidationError
from mer.evaluation import (Protocol, compute_metrics, confusion_matrix, midrank_auc, plan_folds,
                            run_experiment)
from fixtures_metrics import FIXTURES


@pytest.mark.parametrize("cm,acc,tpr,fpr,f1", FIXTURES)
def test_hand_computed_fixtures(cm, acc, tpr, fpr, f1):
    m = compute_metrics(np.array(cm), [str(i) for i in range(len(cm))])
    for got, want in ((m.accuracy, acc), (m.tpr, tpr), (m.fpr, fpr), (m.f_measure, f1)):
        assert got == pytest.approx(float(want), abs=1e-15)


def test_auc_midranks():
    true = np.array(["a", "a", "b", "b"])
    sa = np.array([0.9, 0.4, 0.4, 0.1])
    scores = np.stack([sa, 1 - sa], axis=1)
    m = compute_metrics(confusion_matrix(true, ["a", "a", "a", "b"], ["a", "b"]), ["a", "b"], scores, true)
    assert m.auc == pytest.approx(0.875)
    assert midrank_auc(np.ones(5), np.array([1, 0, 1, 0, 0], bool)) == 0.5
    assert midrank_auc(np.arange(3), np.ones(3, bool)) == 0.5


def test_equal_scores_give_half():
    true = np.array(["a", "b", "c", "a"])
    m = compute_metrics(confusion_matrix(true, ["a"] * 4, list("abc")), list("abc"), np.full((4, 3), 0.5), true)
    assert all(v["auc"] == 0.5 for v in m.per_class.values())


def test_empty_confusion_rejected():
    with pytest.raises(ValidationError):
        compute_metrics(np.zeros((2, 2)), ["a", "b"])


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 7).flatmap(lambda k: st.lists(st.integers(0, 30), min_size=k * k, max_size=k * k)))
def test_weighted_tpr_equals_accuracy(cells):
    k = int(round(len(cells) ** 0.5))
    cm = np.array(cells).reshape(k, k)
    if cm.sum() == 0:
        cm[0, 0] = 1
    m = compute_metrics(cm, [str(i) for i in range(k)])
    assert m.tpr == pytest.approx(m.accuracy, abs=1e-12)
    for v in (m.tpr, m.fpr, m.precision, m.f_measure, m.auc):
        assert 0.0 <= v <= 1.0


def _labels(draw_sizes, n_subjects, seed):
    rng = np.random.default_rng(seed)
    labels = {}
    i = 0
    for c, n in enumerate(draw_sizes):
        for _ in range(n):
            labels[(f"s{rng.integers(n_subjects)}", f"clip{i:03d}")] = f"c{c}"
            i += 1
    return labels


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 25), min_size=2, max_size=6), st.integers(2, 9), st.integers(0, 10**6),
       st.integers(2, 10))
def test_fold_partition_and_loso_isolation(sizes, n_subjects, seed, k):
    labels = _labels(sizes, n_subjects, seed)
    if len(set(labels.values())) < 2:
        return
    everything = set(labels)
    plan = plan_folds(labels, Protocol("kfold", k, seed))
    tests = [set(f.test) for f in plan.folds]
    assert sum(map(len, tests)) == len(everything) and set().union(*tests) == everything
    for f in plan.folds:
        assert set(f.train) | set(f.test) == everything and not set(f.train) & set(f.test)
    # stratification: per class, fold counts differ by at most one
    for c in set(labels.values()):
        per_fold = [sum(labels[x] == c for x in t) for t in tests] + [0] * (k - len(tests))
        assert max(per_fold) - min(per_fold) <= 1
    subjects = {s for s, _ in labels}
    if len(subjects) >= 2:
        loso = plan_folds(labels, Protocol("loso"))
        assert len(loso) == len(subjects)
        for f, s in zip(loso.folds, sorted(subjects)):
            assert {x[0] for x in f.test} == {s}
            assert s not in {x[0] for x in f.train}


def test_stratified_examples():
    labels = {("s", f"c{i:02d}"): "ab"[i % 2] for i in range(20)}
    plan = plan_folds(labels, Protocol("kfold", 10, 3))
    assert len(plan) == 10
    for f in plan.folds:
        assert sorted(labels[x] for x in f.test) == ["a", "b"]
    labels[("s", "lonely")] = "z"
    plan = plan_folds(labels, Protocol("kfold", 10, 3))
    assert sum(("s", "lonely") in f.test for f in plan.folds) == 1


def test_loso_examples():
    labels = {(s, f"{s}_{i}"): "ab"[i % 2] for s in ("s1", "s2", "s3") for i in range(3)}
    plan = plan_folds(labels, Protocol("loso"))
    assert [sorted({x[0] for x in f.test}) for f in plan.folds] == [["s1"], ["s2"], ["s3"]]
    with pytest.raises(ValidationError):
        plan_folds({("s1", "a"): "x", ("s1", "b"): "y"}, Protocol("loso"))


def test_protocol_parse():
    assert Protocol.parse("10-fold").name == "kfold"
    assert Protocol.parse("LOSO").kind == "loso"
    assert Protocol.parse("5-fold").k == 5
    with pytest.raises(ValidationError):
        Protocol.parse("bootstrap")


def _blobs(seed=0, per=12, subjects=4):
    rng = np.random.default_rng(seed)
    feats, labels = {}, {}
    for c, center in enumerate(([0, 0, 0], [6, 0, 0], [0, 6, 0])):
        for i in range(per):
            key = (f"s{i % subjects}", f"{c}_{i}")
            feats[key] = np.array(center) + 0.4 * rng.normal(size=3)
            labels[key] = "ABC"[c]
    return feats, labels


def test_separable_set_perfect():
    feats, labels = _blobs()
    for proto in (Protocol("kfold", 10, 0), Protocol("loso")):
        rep = run_experiment(feats, labels, plan_folds(labels, proto))
        assert rep.metrics.accuracy == 1.0 and rep.metrics.f_measure == 1.0
        assert rep.n_evaluated == len(labels)


def test_deterministic():
    feats, labels = _blobs(1)
    plan = plan_folds(labels, Protocol("kfold", 5, 7))
    a = run_experiment(feats, labels, plan)
    b = run_experiment(feats, labels, plan_folds(labels, Protocol("kfold", 5, 7)))
    assert np.array_equal(a.confusion, b.confusion) and a.predictions == b.predictions


def test_fold_without_two_training_classes_skipped():
    feats = {("s1", "a1"): np.array([0.0]), ("s1", "a2"): np.array([0.1]),
             ("s2", "b1"): np.array([5.0]), ("s2", "b2"): np.array([5.1]),
             ("s3", "a3"): np.array([0.2])}
    labels = {k: k[1][0] for k in feats}
    with pytest.warns(MerWarning, match="fold 1"):
        rep = run_experiment(feats, labels, plan_folds(labels, Protocol("loso")))
    assert rep.skipped_folds == [1] and rep.n_evaluated == 3
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(TrainingError):
            two = {k: v for k, v in labels.items() if k[0] != "s3"}
            run_experiment(feats, two, plan_folds(two, Protocol("loso")))


def test_missing_features_rejected():
    feats, labels = _blobs()
    feats.pop(next(iter(feats)))
    with pytest.raises(ValidationError):
        run_experiment(feats, labels, plan_folds(labels, Protocol("loso")))
