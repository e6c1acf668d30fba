"""Multinomial logistic regression trained by full-batch gradient descent, and
classification metrics."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .domain import CognitiveLabel
from .errors import InputError, TrainingError

FORMAT = "synthcog-classifier"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class Hyper:
    learning_rate: float = 0.1
    epochs: int = 2000
    l2: float = 1e-3
    class_weighting: bool = True


@dataclass
class Classifier:
    weights: np.ndarray            # (n_classes, n_kept)
    bias: np.ndarray               # (n_classes,)
    mean: np.ndarray               # (n_kept,)
    std: np.ndarray                # (n_kept,)
    classes: list                  # CognitiveLabel, ascending severity
    kept: np.ndarray               # bool mask over input features
    feature_names: tuple = ()
    hyper: Hyper = field(default_factory=Hyper)
    loss_history: list = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return int(self.kept.size)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "classes": [c.name for c in self.classes],
            "feature_names": list(self.feature_names),
            "kept": self.kept.astype(bool).tolist(),
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "hyper": self.hyper.__dict__,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Classifier":
        if d.get("format") != FORMAT or d.get("version") != FORMAT_VERSION:
            raise InputError("not a version-1 classifier document")
        return cls(np.array(d["weights"], dtype=float), np.array(d["bias"], dtype=float),
                   np.array(d["mean"], dtype=float), np.array(d["std"], dtype=float),
                   [CognitiveLabel[n] for n in d["classes"]], np.array(d["kept"], dtype=bool),
                   tuple(d["feature_names"]), Hyper(**d["hyper"]))


def save_model(model: Classifier, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=1)


def load_model(path) -> Classifier:
    with open(path, encoding="utf-8") as fh:
        return Classifier.from_dict(json.load(fh))


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _loss_grad_t(W, b, XT, YT, sw_n, l2):
    # class-major layout: XT (F, n), YT (K, n), sw_n = sample_weight / n
    Z = W @ XT
    Z += b[:, None]
    zmax = Z.max(axis=0)
    E = np.exp(Z - zmax)
    s = E.sum(axis=0)
    lse = zmax + np.log(s)
    z_true = (Z * YT).sum(axis=0)
    loss = float(sw_n @ (lse - z_true)) + 0.5 * l2 * float((W * W).sum())
    E /= s
    E -= YT
    E *= sw_n
    return loss, E @ XT.T + l2 * W, E.sum(axis=1)


def loss_and_grad(W, b, X, Y, sample_weight, l2):
    """Weighted mean cross-entropy plus ``l2/2 * ||W||^2`` and its gradient
    with respect to ``W`` and ``b``. ``Y`` is one-hot (n, K)."""
    X = np.asarray(X, dtype=float)
    sw_n = np.asarray(sample_weight, dtype=float) / X.shape[0]
    return _loss_grad_t(W, b, np.ascontiguousarray(X.T), np.ascontiguousarray(np.asarray(Y, dtype=float).T),
                        sw_n, l2)


def standardize(X, mean, std):
    return (X - mean) / std


def destandardize(Z, mean, std):
    return Z * std + mean


def _as_matrix(features) -> np.ndarray:
    if isinstance(features, np.ndarray):
        return np.atleast_2d(features.astype(float))
    return np.array([f.as_array() if hasattr(f, "as_array") else f for f in features], dtype=float)


def train(features, labels: Sequence, hyper: Hyper | None = None,
          feature_names: Sequence[str] = ()) -> Classifier:
    """Fit softmax regression on standardised features.

    Zero-variance features are dropped with a warning. With class weighting each
    class contributes equally to the loss.
    """
    hyper = hyper or Hyper()
    X = _as_matrix(features)
    y = np.array([int(l) for l in labels])
    if X.shape[0] != y.size:
        raise InputError("features and labels differ in length")
    if not np.all(np.isfinite(X)):
        raise InputError("features contain NaN or infinite values")
    classes = sorted(set(y.tolist()))
    if len(classes) < 2:
        raise TrainingError("training data contains a single class")
    counts = {c: int((y == c).sum()) for c in classes}
    small = [CognitiveLabel(c).name for c, n in counts.items() if n < 10]
    if small:
        warnings.warn(f"fewer than 10 training examples for {small}", stacklevel=2)

    std = X.std(axis=0)
    kept = std > 1e-12
    if not kept.all():
        dropped = [feature_names[i] if feature_names else str(i) for i in np.flatnonzero(~kept)]
        warnings.warn(f"dropping constant features {dropped}", stacklevel=2)
    if not kept.any():
        raise TrainingError("every feature is constant")
    Xk = X[:, kept]
    mean = Xk.mean(axis=0)
    std = Xk.std(axis=0)
    Z = standardize(Xk, mean, std)

    index = {c: i for i, c in enumerate(classes)}
    Y = np.zeros((y.size, len(classes)))
    Y[np.arange(y.size), [index[v] for v in y]] = 1.0
    if hyper.class_weighting:
        per_class = {c: y.size / (len(classes) * n) for c, n in counts.items()}
        sw = np.array([per_class[v] for v in y])
    else:
        sw = np.ones(y.size)

    W = np.zeros((len(classes), Z.shape[1]))
    b = np.zeros(len(classes))
    ZT, YT, sw_n = np.ascontiguousarray(Z.T), np.ascontiguousarray(Y.T), sw / y.size
    history = []
    for _ in range(hyper.epochs):
        loss, gW, gb = _loss_grad_t(W, b, ZT, YT, sw_n, hyper.l2)
        history.append(loss)
        W -= hyper.learning_rate * gW
        b -= hyper.learning_rate * gb
    history.append(_loss_grad_t(W, b, ZT, YT, sw_n, hyper.l2)[0])
    if not np.all(np.isfinite(W)):
        raise TrainingError("weights diverged")
    return Classifier(W, b, mean, std, [CognitiveLabel(c) for c in classes], kept,
                      tuple(feature_names), hyper, history)


def predict_proba(model: Classifier, features) -> np.ndarray:
    X = _as_matrix(features)
    if X.shape[1] != model.n_features:
        raise InputError(f"expected {model.n_features} features, got {X.shape[1]}")
    Z = standardize(X[:, model.kept], model.mean, model.std)
    return softmax(Z @ model.weights.T + model.bias)


def predict_labels(model: Classifier, features) -> np.ndarray:
    # argmax takes the first maximum, i.e. the least severe class on ties
    P = predict_proba(model, features)
    return np.array([int(model.classes[i]) for i in P.argmax(axis=1)])


def predict(model: Classifier, fv) -> tuple[CognitiveLabel, np.ndarray]:
    P = predict_proba(model, [fv])[0]
    return model.classes[int(P.argmax())], P


@dataclass
class Metrics:
    accuracy: float
    precision: dict
    recall: dict
    f1: dict
    macro_f1: float
    confusion: np.ndarray          # rows = truth, cols = prediction
    labels: list
    support: dict

    def f1_of(self, label: CognitiveLabel) -> float:
        return self.f1.get(label, 0.0)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "labels": [l.name for l in self.labels],
            "precision": {l.name: v for l, v in self.precision.items()},
            "recall": {l.name: v for l, v in self.recall.items()},
            "f1": {l.name: v for l, v in self.f1.items()},
            "confusion": self.confusion.tolist(),
        }


def classification_metrics(y_true, y_pred, labels: Sequence | None = None) -> Metrics:
    y_true = np.asarray([int(v) for v in y_true])
    y_pred = np.asarray([int(v) for v in y_pred])
    if y_true.size == 0:
        raise InputError("empty evaluation set")
    if labels is None:
        labels = sorted(set(y_true.tolist()) | set(y_pred.tolist()))
    labels = [CognitiveLabel(int(l)) for l in labels]
    idx = {int(l): i for i, l in enumerate(labels)}
    cm = np.zeros((len(labels), len(labels)), dtype=int)
    for t, p in zip(y_true, y_pred):
        cm[idx[int(t)], idx[int(p)]] += 1
    precision, recall, f1, support = {}, {}, {}, {}
    for i, lab in enumerate(labels):
        tp = cm[i, i]
        pred_n = cm[:, i].sum()
        true_n = cm[i, :].sum()
        p = tp / pred_n if pred_n else 0.0
        r = tp / true_n if true_n else 0.0
        precision[lab], recall[lab] = float(p), float(r)
        f1[lab] = float(2 * p * r / (p + r)) if p + r > 0 else 0.0
        support[lab] = int(true_n)
    present = [lab for lab in labels if support[lab] > 0]
    macro = float(np.mean([f1[lab] for lab in present])) if present else 0.0
    return Metrics(float(np.trace(cm) / y_true.size), precision, recall, f1, macro, cm, labels, support)


def evaluate(model: Classifier, features, labels) -> Metrics:
    if len(labels) == 0:
        raise InputError("empty evaluation set")
    all_labels = sorted(set(int(c) for c in model.classes) | set(int(l) for l in labels))
    return classification_metrics(labels, predict_labels(model, features), all_labels)
