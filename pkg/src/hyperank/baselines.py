"""Organizer baselines: embedding-distance ranking and a from-scratch
multinomial logistic regression over term vectors."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embeddings import cosine
from .errors import DataValidationError
from .ranker import RankedList


@dataclass
class LogRegModel:
    weights: np.ndarray  # num_labels x dim
    bias: np.ndarray  # num_labels
    label_order: tuple[str, ...]

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        n_labels = len(self.label_order)
        if self.weights.ndim != 2 or self.weights.shape[0] != n_labels:
            raise DataValidationError("weights must be num_labels x dim")
        if self.bias.shape != (n_labels,):
            raise DataValidationError("bias must have one entry per label")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise DataValidationError("model has non-finite parameters")


def distance_rank(
    term_vectors: dict[str, np.ndarray],
    term_texts: dict[str, str],
    label_vectors: dict[str, np.ndarray],
) -> list[RankedList]:
    """Rank labels per term by ascending cosine distance (1 - cosine),
    ties broken by ascending label name. Rows sorted by origin_id."""
    if not label_vectors:
        raise DataValidationError("no label vectors to rank against")
    ranked = []
    for origin_id in sorted(term_vectors):
        vec = term_vectors[origin_id]
        distances = sorted(
            ((1.0 - cosine(vec, lvec), label) for label, lvec in label_vectors.items()),
        )
        ranked.append(
            RankedList(
                origin_id=origin_id,
                term=term_texts.get(origin_id, origin_id),
                labels=tuple(label for _, label in distances),
            )
        )
    return ranked


def softmax_ce(
    W: np.ndarray, b: np.ndarray, X: np.ndarray, y_idx: np.ndarray, l2: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean softmax cross-entropy with an (l2/2)*||W||^2 penalty (bias
    unpenalized). Returns (loss, dW, db)."""
    n = X.shape[0]
    logits = X @ W.T + b
    row_max = logits.max(axis=1, keepdims=True)
    log_z = row_max[:, 0] + np.log(np.exp(logits - row_max).sum(axis=1))
    loss = float(-(logits[np.arange(n), y_idx] - log_z).mean() + 0.5 * l2 * (W**2).sum())
    P = np.exp(logits - log_z[:, None])
    P[np.arange(n), y_idx] -= 1.0
    G = P / n
    dW = G.T @ X + l2 * W
    db = G.sum(axis=0)
    return loss, dW, db


def train_logreg(
    X,
    y: list[str],
    lr: float = 0.1,
    epochs: int = 500,
    l2: float = 1e-4,
    seed: int = 0,
    labels: list[str] | None = None,
) -> LogRegModel:
    """Full-batch gradient descent from zero initialization.

    `labels` widens the class set beyond those present in y (unseen
    classes keep zero rows and behave as bias-only). The seed is accepted
    for CLI uniformity; full-batch descent from zero has no randomness.
    """
    del seed
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataValidationError("X must be a non-empty 2-D array")
    if X.shape[0] != len(y):
        raise DataValidationError(f"{X.shape[0]} rows but {len(y)} labels")
    if not np.all(np.isfinite(X)):
        raise DataValidationError("X has non-finite entries")
    label_order = tuple(sorted(set(labels) if labels is not None else set(y)))
    index_of = {label: i for i, label in enumerate(label_order)}
    try:
        y_idx = np.array([index_of[label] for label in y], dtype=np.int64)
    except KeyError as exc:
        raise DataValidationError(f"label {exc.args[0]!r} missing from the label set") from None

    W = np.zeros((len(label_order), X.shape[1]), dtype=np.float64)
    b = np.zeros(len(label_order), dtype=np.float64)
    for _ in range(epochs):
        _, dW, db = softmax_ce(W, b, X, y_idx, l2)
        W -= lr * dW
        b -= lr * db
    return LogRegModel(weights=W, bias=b, label_order=label_order)


def predict_proba(model: LogRegModel, vector) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.float64)
    if vector.shape != (model.weights.shape[1],):
        raise DataValidationError(
            f"vector has shape {vector.shape}, model expects ({model.weights.shape[1]},)"
        )
    logits = model.weights @ vector + model.bias
    logits -= logits.max()
    exp = np.exp(logits)
    return exp / exp.sum()


def logreg_rank(model: LogRegModel, vector, origin_id: str, term: str) -> RankedList:
    """Labels by descending predicted probability, ties lexicographic."""
    probs = predict_proba(model, vector)
    ordered = sorted(zip(model.label_order, probs), key=lambda kv: (-kv[1], kv[0]))
    return RankedList(origin_id=origin_id, term=term, labels=tuple(label for label, _ in ordered))


def save_logreg(model: LogRegModel, path: str | Path) -> None:
    payload = {
        "label_order": list(model.label_order),
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_logreg(path: str | Path) -> LogRegModel:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        return LogRegModel(
            weights=np.array(payload["weights"], dtype=np.float64),
            bias=np.array(payload["bias"], dtype=np.float64),
            label_order=tuple(payload["label_order"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataValidationError(f"{path}: bad logreg model file: {exc}") from exc
