"""Cross-validation protocols, pooled confusion matrices and weighted metrics.

All folds' test predictions are pooled into one confusion matrix and the
metrics are computed once on the pool. Per-class rates are averaged with
weights proportional to each class's true-class support.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import MerWarning, TrainingError, ValidationError
from .svm import SmoConfig, predict_many, train_multiclass

logger = logging.getLogger(__name__)

Key = tuple[str, str]  # (subject_id, clip_id)


@dataclass(frozen=True)
class Protocol:
    kind: str  # "kfold" | "loso"
    k: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("kfold", "loso"):
            raise ValidationError(f"unknown protocol {self.kind!r}; expected kfold or loso")
        if self.kind == "kfold" and self.k < 2:
            raise ValidationError("k-fold needs k >= 2")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "Protocol":
        t = text.strip().lower().replace("_", "-")
        if t in ("loso", "leave-one-subject-out"):
            return cls("loso", seed=seed)
        if t in ("kfold", "10-fold", "k-fold", "10fold", "cv"):
            return cls("kfold", 10, seed)
        if t.endswith("fold") and t[:-4].rstrip("-").isdigit():
            return cls("kfold", int(t[:-4].rstrip("-")), seed)
        raise ValidationError(f"unknown protocol {text!r}; expected kfold, <k>-fold or loso")

    @property
    def name(self) -> str:
        return "loso" if self.kind == "loso" else ("kfold" if self.k == 10 else f"{self.k}-fold")


@dataclass(frozen=True)
class Fold:
    train: tuple[Key, ...]
    test: tuple[Key, ...]


@dataclass(frozen=True)
class FoldPlan:
    protocol: Protocol
    folds: tuple[Fold, ...]

    def __len__(self):
        return len(self.folds)


def plan_folds(labels: Mapping[Key, str], protocol: Protocol) -> FoldPlan:
    """Split labelled clips into folds.

    k-fold: each class's clips (sorted, then shuffled with ``protocol.seed``)
    are dealt round-robin over the folds, continuing where the previous
    class stopped so fold sizes stay balanced. Empty folds are dropped.
    LOSO: one fold per subject, in sorted subject order.
    """
    keys = sorted(labels)
    classes = sorted(set(labels.values()))
    if len(classes) < 2:
        raise ValidationError(f"need at least 2 classes to plan folds, got {classes}")
    if protocol.kind == "loso":
        subjects = sorted({k[0] for k in keys})
        if len(subjects) < 2:
            raise ValidationError("leave-one-subject-out needs at least 2 subjects")
        folds = []
        for s in subjects:
            test = tuple(k for k in keys if k[0] == s)
            train = tuple(k for k in keys if k[0] != s)
            folds.append(Fold(train, test))
        return FoldPlan(protocol, tuple(folds))

    rng = np.random.default_rng(protocol.seed)
    buckets: list[list[Key]] = [[] for _ in range(protocol.k)]
    slot = 0
    for c in classes:
        members = [k for k in keys if labels[k] == c]
        for i in rng.permutation(len(members)):
            buckets[slot % protocol.k].append(members[i])
            slot += 1
    folds = []
    for bucket in buckets:
        if not bucket:
            continue
        test = set(bucket)
        folds.append(Fold(tuple(k for k in keys if k not in test), tuple(sorted(bucket))))
    return FoldPlan(protocol, tuple(folds))


def confusion_matrix(true: Sequence[str], pred: Sequence[str], classes: Sequence[str]) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(true, pred):
        cm[index[t], index[p]] += 1
    return cm


def midrank_auc(scores: np.ndarray, positive: np.ndarray) -> float:
    """Mann-Whitney AUC with midranks for ties; 0.5 when one side is empty."""
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive, dtype=bool)
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        return 0.5
    ranks = rankdata(scores, method="average")
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass
class Metrics:
    accuracy: float
    tpr: float
    fpr: float
    precision: float
    f_measure: float
    auc: float
    per_class: dict[str, dict[str, float]]


def compute_metrics(confusion: np.ndarray, classes: Sequence[str], scores: Optional[np.ndarray] = None,
                    true: Optional[Sequence[str]] = None) -> Metrics:
    """Weighted metrics from a confusion matrix (rows true, columns predicted).

    ``scores`` is an ``(n_clips, n_classes)`` array of per-class scores and
    ``true`` the clips' true labels; both are needed for AUC, which is
    reported as 0.5 when they are omitted.
    """
    cm = np.asarray(confusion, dtype=np.float64)
    total = cm.sum()
    if total <= 0:
        raise ValidationError("confusion matrix is empty")
    tp = np.diag(cm)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    fp = predicted - tp
    fn = support - tp
    tn = total - tp - fp - fn

    def ratio(num, den):
        return np.divide(num, den, out=np.zeros_like(num), where=den > 0)

    recall = ratio(tp, support)
    fpr = ratio(fp, fp + tn)
    precision = ratio(tp, predicted)
    f1 = ratio(2 * precision * recall, precision + recall)
    if scores is not None and true is not None:
        true = np.asarray(true)
        auc = np.array([midrank_auc(scores[:, i], true == c) for i, c in enumerate(classes)])
    else:
        auc = np.full(len(classes), 0.5)
    w = support / total
    per_class = {
        c: {"support": int(support[i]), "tpr": float(recall[i]), "fpr": float(fpr[i]),
            "precision": float(precision[i]), "f_measure": float(f1[i]), "auc": float(auc[i])}
        for i, c in enumerate(classes)
    }
    return Metrics(
        accuracy=float(tp.sum() / total),
        tpr=float(w @ recall),
        fpr=float(w @ fpr),
        precision=float(w @ precision),
        f_measure=float(w @ f1),
        auc=float(w @ auc),
        per_class=per_class,
    )


@dataclass
class EvaluationReport:
    feature: str
    scheme: str
    protocol: str
    classes: list[str]
    confusion: np.ndarray
    metrics: Metrics
    predictions: dict[Key, str] = field(default_factory=dict)
    scores: dict[Key, np.ndarray] = field(default_factory=dict)
    skipped_folds: list[int] = field(default_factory=list)
    seed: int = 0

    @property
    def n_evaluated(self) -> int:
        return int(self.confusion.sum())

    @property
    def cell_id(self) -> tuple[str, str, str]:
        return (self.feature, self.scheme, self.protocol)


def run_experiment(features: Mapping[Key, np.ndarray], labels: Mapping[Key, str], plan: FoldPlan,
                   cfg: SmoConfig = SmoConfig(), classes: Optional[Sequence[str]] = None,
                   feature: str = "", scheme: str = "") -> EvaluationReport:
    """Train/test every fold of ``plan`` and pool the predictions."""
    missing = [k for k in labels if k not in features]
    if missing:
        raise ValidationError(f"{len(missing)} labelled clip(s) have no features, e.g. {missing[0]}")
    dims = {np.asarray(features[k]).size for k in labels}
    if len(dims) > 1:
        raise ValidationError(f"feature vectors have mixed dimensions {sorted(dims)}")
    classes = list(classes) if classes is not None else sorted(set(labels.values()))
    predictions: dict[Key, str] = {}
    scores: dict[Key, np.ndarray] = {}
    skipped = []
    for i, fold in enumerate(plan.folds):
        train_classes = {labels[k] for k in fold.train}
        if len(train_classes) < 2:
            warnings.warn(f"fold {i}: training split has {len(train_classes)} class(es); skipped",
                          MerWarning, stacklevel=2)
            skipped.append(i)
            continue
        X = np.stack([np.asarray(features[k], dtype=np.float64) for k in fold.train])
        y = [labels[k] for k in fold.train]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MerWarning)  # absent classes are expected in small folds
            try:
                model = train_multiclass(X, y, cfg, classes=classes)
            except TrainingError as exc:
                warnings.warn(f"fold {i}: {exc}; skipped", MerWarning, stacklevel=2)
                skipped.append(i)
                continue
        Xt = np.stack([np.asarray(features[k], dtype=np.float64) for k in fold.test])
        col = {c: j for j, c in enumerate(classes)}
        for key, pred in zip(fold.test, predict_many(model, Xt)):
            predictions[key] = pred.label
            full = np.zeros(len(classes))
            for c, s in zip(model.classes, pred.scores):
                full[col[c]] = s
            scores[key] = full
    evaluated = sorted(predictions)
    if not evaluated:
        raise TrainingError("no fold could be evaluated")
    true = [labels[k] for k in evaluated]
    pred = [predictions[k] for k in evaluated]
    cm = confusion_matrix(true, pred, classes)
    score_mat = np.stack([scores[k] for k in evaluated])
    metrics = compute_metrics(cm, classes, score_mat, true)
    return EvaluationReport(feature, scheme, plan.protocol.name, classes, cm, metrics, predictions, scores,
                            skipped, plan.protocol.seed)
