"""Soft-margin SVM trained with Platt's Sequential Minimal Optimization.

Binary machines use the decision function ``f(x) = sum_i a_i y_i K(x_i, x) + b``.
Multiclass models are one-vs-one: one binary machine per class pair,
majority vote at prediction time.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import FormatError, MerWarning, TrainingError, ValidationError

logger = logging.getLogger(__name__)

MODEL_FORMAT = "mer-svm"
MODEL_VERSION = 1


@dataclass(frozen=True)
class SmoConfig:
    C: float = 1.0
    kkt_tolerance: float = 1e-3
    alpha_epsilon: float = 1e-12
    solver_tolerance: float = 1e-6  # stop once the worst violating pair is within this
    kernel: str = "linear"
    gamma: float = 1.0  # rbf only
    max_passes: Optional[int] = None  # None -> max(10 * n, 1000); one pass = n pair updates

    def __post_init__(self):
        if not self.C > 0:
            raise ValidationError("C must be positive")
        if not (self.kkt_tolerance > 0 and self.alpha_epsilon > 0 and self.solver_tolerance > 0):
            raise ValidationError("tolerances must be positive")
        if self.solver_tolerance > self.kkt_tolerance:
            raise ValidationError("solver_tolerance may not exceed kkt_tolerance")
        if self.kernel not in ("linear", "rbf"):
            raise ValidationError(f"unknown kernel {self.kernel!r}")
        if self.kernel == "rbf" and not self.gamma > 0:
            raise ValidationError("rbf gamma must be positive")


def kernel_matrix(a: np.ndarray, b: np.ndarray, kernel: str = "linear", gamma: float = 1.0) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    dot = a @ b.T
    if kernel == "linear":
        return dot
    sq = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * dot
    return np.exp(-gamma * np.maximum(sq, 0.0))


@dataclass
class SmoResult:
    alpha: np.ndarray
    b: float
    passes: int
    steps: int
    converged: bool


class _Smo:
    """Two-variable SMO over a precomputed kernel matrix.

    The error cache holds ``F_i = sum_j a_j y_j K_ij - y_i`` (bias excluded,
    so it cancels in ``F_1 - F_2``). Each step takes the worst KKT violator
    and pairs it with the partner maximising ``|F_1 - F_2|``, then solves the
    pair analytically with box clipping. The loop stops once the largest
    violation pair is within ``solver_tolerance`` (at most ``kkt_tolerance``).
    """

    def __init__(self, K: np.ndarray, y: np.ndarray, cfg: SmoConfig):
        self.K = K
        self.y = y.astype(np.float64)
        self.C = float(cfg.C)
        self.tol = cfg.solver_tolerance
        self.bound_eps = 1e-12 * self.C
        self.alpha = np.zeros(len(y))
        self.F = -self.y.copy()
        self.steps = 0

    def _up_low(self) -> tuple[np.ndarray, np.ndarray]:
        # I_up: alpha_t may move so that y_t alpha_t increases; I_low: decreases
        a, y = self.alpha, self.y
        below = a < self.C - self.bound_eps
        above = a > self.bound_eps
        up = (below & (y > 0)) | (above & (y < 0))
        low = (below & (y < 0)) | (above & (y > 0))
        return up, low

    def select_pair(self) -> Optional[tuple[int, int]]:
        up, low = self._up_low()
        if not up.any() or not low.any():
            return None
        score = -self.F  # -y_t * gradient_t
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        if score[i] - score[low].min() <= self.tol:
            return None
        # partner: largest guaranteed dual gain (score gap)^2 / curvature
        cand = np.flatnonzero(low & (score < score[i]))
        gap = score[i] - score[cand]
        curv = self.K[i, i] + self.K[cand, cand] - 2.0 * self.K[i, cand]
        curv = np.where(curv > 1e-12, curv, 1e-12)
        j = int(cand[np.argmax(gap * gap / curv)])
        return i, j

    def take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        K, y, C = self.K, self.y, self.C
        a1, a2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = y[i1], y[i2]
        E1, E2 = self.F[i1], self.F[i2]
        s = y1 * y2
        if y1 != y2:
            L, H = max(0.0, a2 - a1), min(C, C + a2 - a1)
        else:
            L, H = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        if H - L <= 0.0:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 1e-12:
            a2_new = min(max(a2 + y2 * (E1 - E2) / eta, L), H)
        else:
            # dual gain along the constraint line: d*y2*(E1-E2) - eta*d^2/2
            def gain(d):
                return d * y2 * (E1 - E2) - 0.5 * eta * d * d
            g_lo, g_hi = gain(L - a2), gain(H - a2)
            a2_new = L if g_lo > g_hi else H if g_hi > g_lo else a2
        if a2_new == a2:
            return False
        a1_new = min(max(a1 + s * (a2 - a2_new), 0.0), C)
        d1, d2 = y1 * (a1_new - a1), y2 * (a2_new - a2)
        self.F += d1 * K[i1] + d2 * K[i2]
        self.alpha[i1], self.alpha[i2] = a1_new, a2_new
        self.steps += 1
        return True

    def bias(self) -> float:
        """Average ``y_t - g_t`` over free vectors, else the midpoint of the feasible interval."""
        score = -self.F
        a = self.alpha
        free = (a > self.bound_eps) & (a < self.C - self.bound_eps)
        if free.any():
            return float(np.mean(score[free]))
        up, low = self._up_low()
        hi = score[up].max() if up.any() else None
        lo = score[low].min() if low.any() else None
        if hi is None:
            return float(lo)
        if lo is None:
            return float(hi)
        return float(0.5 * (hi + lo))

    def run(self, max_steps: int) -> SmoResult:
        converged = False
        while self.steps < max_steps:
            pair = self.select_pair()
            if pair is None:
                converged = True
                break
            if not self.take_step(*pair):
                break  # numerically stalled
        n = max(len(self.y), 1)
        return SmoResult(self.alpha.copy(), self.bias(), -(-self.steps // n), self.steps, converged)


def smo_solve(K: np.ndarray, y: np.ndarray, cfg: SmoConfig = SmoConfig()) -> SmoResult:
    """Solve the SVM dual for kernel matrix ``K`` and labels ``y`` in {-1, +1}."""
    y = np.asarray(y)
    if not np.all(np.isin(y, (-1, 1))):
        raise ValidationError("binary labels must be -1 or +1")
    if (y > 0).sum() == 0 or (y < 0).sum() == 0:
        raise TrainingError("binary training needs at least one example of each sign")
    n = len(y)
    max_passes = cfg.max_passes if cfg.max_passes is not None else max(10 * n, 1000)
    # one pass = n pair updates
    result = _Smo(np.asarray(K, dtype=np.float64), y, cfg).run(max(1, max_passes) * n)
    if not result.converged:
        logger.info("SMO stopped after %d steps without reaching the KKT tolerance", result.steps)
    return result


def dual_objective(alpha: np.ndarray, K: np.ndarray, y: np.ndarray) -> float:
    """``sum(alpha) - 0.5 * (alpha*y)^T K (alpha*y)``."""
    ay = np.asarray(alpha) * np.asarray(y, dtype=np.float64)
    return float(np.sum(alpha) - 0.5 * ay @ K @ ay)


def kkt_violations(alpha: np.ndarray, b: float, K: np.ndarray, y: np.ndarray, C: float,
                   bound_eps: float = 1e-12) -> np.ndarray:
    """Per-point violation of the soft-margin KKT conditions (0 when satisfied).

    With margin ``m_i = y_i f(x_i)``: ``alpha_i = 0`` needs ``m_i >= 1``,
    ``alpha_i = C`` needs ``m_i <= 1`` and free points need ``m_i = 1``.
    """
    y = np.asarray(y, dtype=np.float64)
    m = y * (np.asarray(K) @ (alpha * y) + b)
    at_zero = alpha <= bound_eps * C
    at_c = alpha >= C * (1 - bound_eps)
    return np.where(at_zero, np.maximum(0.0, 1.0 - m), np.where(at_c, np.maximum(0.0, m - 1.0), np.abs(m - 1.0)))


@dataclass(eq=False)
class BinaryModel:
    """Support vectors, their ``alpha`` coefficients and labels, and the bias."""

    support_vectors: np.ndarray
    labels: np.ndarray
    alphas: np.ndarray
    bias: float
    class_pair: tuple[str, str] = ("+1", "-1")  # (label for f > 0, label for f <= 0)
    kernel: str = "linear"
    gamma: float = 1.0

    @property
    def coef(self) -> np.ndarray:
        return self.alphas * self.labels

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if len(self.alphas) == 0:
            return np.full(len(X), self.bias)
        if self.kernel == "linear":
            w = self.coef @ self.support_vectors
            return X @ w + self.bias
        return kernel_matrix(X, self.support_vectors, self.kernel, self.gamma) @ self.coef + self.bias


def _check_features(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if not np.all(np.isfinite(X)):
        raise ValidationError("features contain non-finite values")
    return X


def train_binary(X, y, cfg: SmoConfig = SmoConfig(), class_pair: tuple[str, str] = ("+1", "-1")) -> BinaryModel:
    """Train one soft-margin machine on rows of ``X`` with labels in {-1, +1}."""
    X = _check_features(X)
    y = np.asarray(y)
    if len(X) != len(y):
        raise ValidationError("X and y lengths differ")
    if len(np.unique(y)) < 2:
        raise TrainingError("binary training needs examples of both classes")
    K = kernel_matrix(X, X, cfg.kernel, cfg.gamma)
    res = smo_solve(K, y, cfg)
    keep = res.alpha > cfg.alpha_epsilon
    return BinaryModel(X[keep].copy(), y[keep].astype(np.float64), res.alpha[keep].copy(), res.b,
                       class_pair, cfg.kernel, cfg.gamma)


@dataclass(eq=False)
class SvmModel:
    classes: list[str]
    binaries: list[BinaryModel]
    feature_min: np.ndarray
    feature_max: np.ndarray
    config: SmoConfig = field(default_factory=SmoConfig)

    @property
    def n_features(self) -> int:
        return len(self.feature_min)

    def normalize(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValidationError(f"expected {self.n_features} features, got {X.shape[1]}")
        return min_max_apply(X, self.feature_min, self.feature_max)


def min_max_fit(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return X.min(axis=0), X.max(axis=0)


def min_max_apply(X: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    span = hi - lo
    constant = span <= 0
    out = (X - lo) / np.where(constant, 1.0, span)
    out[:, constant] = 0.0
    return out


def train_multiclass(X, labels: Sequence[str], cfg: SmoConfig = SmoConfig(),
                     classes: Optional[Sequence[str]] = None) -> SvmModel:
    """One-vs-one SMO machines on min-max normalised features.

    ``classes`` fixes the class order (defaults to sorted labels); classes
    with no training examples are skipped with a warning.
    """
    X = _check_features(X)
    labels = np.asarray([str(l) for l in labels])
    if len(X) != len(labels):
        raise ValidationError("X and labels lengths differ")
    order = list(classes) if classes is not None else sorted(set(labels.tolist()))
    present = [c for c in order if np.any(labels == c)]
    missing = [c for c in order if c not in present]
    if missing:
        warnings.warn(f"classes without training examples skipped: {missing}", MerWarning, stacklevel=2)
    if len(present) < 2:
        raise TrainingError(f"need at least 2 classes to train, got {present}")
    lo, hi = min_max_fit(X)
    Xn = min_max_apply(X, lo, hi)
    binaries = []
    for a, b in combinations(present, 2):
        mask = (labels == a) | (labels == b)
        y = np.where(labels[mask] == a, 1, -1)
        binaries.append(train_binary(Xn[mask], y, cfg, class_pair=(a, b)))
    return SvmModel(present, binaries, lo, hi, cfg)


@dataclass
class Prediction:
    label: str
    votes: np.ndarray
    scores: np.ndarray  # vote share per class, in [0, 1]
    margins: np.ndarray  # summed |decision value| over each class's machines


def predict_many(model: SvmModel, X) -> list[Prediction]:
    X = _check_features(X)
    Xn = model.normalize(X)
    k = len(model.classes)
    index = {c: i for i, c in enumerate(model.classes)}
    votes = np.zeros((len(X), k), dtype=np.int64)
    margins = np.zeros((len(X), k))
    for bm in model.binaries:
        f = bm.decision_function(Xn)
        ia, ib = index[bm.class_pair[0]], index[bm.class_pair[1]]
        pos = f > 0
        votes[pos, ia] += 1
        votes[~pos, ib] += 1
        margins[:, ia] += np.abs(f)
        margins[:, ib] += np.abs(f)
    out = []
    for v, m in zip(votes, margins):
        top = np.flatnonzero(v == v.max())
        if len(top) > 1:
            best = m[top].max()
            top = top[m[top] == best]
        winner = int(top[0])  # lowest class index among remaining ties
        out.append(Prediction(model.classes[winner], v, v / max(k - 1, 1), m))
    return out


def predict(model: SvmModel, x) -> Prediction:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValidationError("predict expects a single feature vector")
    return predict_many(model, x[None, :])[0]


# -- serialisation -----------------------------------------------------------

def model_to_dict(model: SvmModel) -> dict:
    cfg = model.config
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "config": {"C": cfg.C, "kkt_tolerance": cfg.kkt_tolerance, "alpha_epsilon": cfg.alpha_epsilon,
                   "solver_tolerance": cfg.solver_tolerance,
                   "kernel": cfg.kernel, "gamma": cfg.gamma, "max_passes": cfg.max_passes},
        "classes": list(model.classes),
        "normalization": {"min": model.feature_min.tolist(), "max": model.feature_max.tolist()},
        "binaries": [
            {"class_pair": list(bm.class_pair), "bias": bm.bias, "alpha_y": bm.coef.tolist(),
             "alpha": bm.alphas.tolist(), "support_vectors": bm.support_vectors.tolist()}
            for bm in model.binaries
        ],
    }


def model_from_dict(data: dict) -> SvmModel:
    if data.get("format") != MODEL_FORMAT:
        raise FormatError("not a mer-svm model file")
    if data.get("version") != MODEL_VERSION:
        raise FormatError(f"unsupported model version {data.get('version')}")
    cfg = SmoConfig(**data["config"])
    n_features = len(data["normalization"]["min"])
    binaries = []
    for b in data["binaries"]:
        ay = np.asarray(b["alpha_y"], dtype=np.float64)
        sv = np.asarray(b["support_vectors"], dtype=np.float64).reshape(len(ay), n_features)
        binaries.append(BinaryModel(sv, np.sign(ay), np.asarray(b["alpha"], dtype=np.float64), float(b["bias"]),
                                    tuple(b["class_pair"]), cfg.kernel, cfg.gamma))
    return SvmModel(list(data["classes"]), binaries,
                    np.asarray(data["normalization"]["min"], dtype=np.float64),
                    np.asarray(data["normalization"]["max"], dtype=np.float64), cfg)


def save_model(model: SvmModel, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n", encoding="utf-8")


def load_model(path) -> SvmModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid model file ({exc})") from None
    return model_from_dict(data)
