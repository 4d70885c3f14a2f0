"""Projection-head training over frozen base embeddings.

The backbone stays fixed; a linear map (W, b) is trained by plain
gradient descent on multiple-negatives-ranking loss and online
contrastive loss with analytically derived gradients, so every update is
exactly reproducible and checkable against finite differences.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingTable
from .errors import DataValidationError
from .negsampler import ScoredPair

OBJECTIVES = ("multi", "mnr", "contrastive", "regression")


@dataclass
class ProjectionModel:
    W: np.ndarray
    b: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise DataValidationError("model shapes disagree: W is dim_out x dim_in, b is dim_out")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b))):
            raise DataValidationError("model has non-finite parameters")

    @property
    def dim_in(self) -> int:
        return self.W.shape[1]

    @property
    def dim_out(self) -> int:
        return self.W.shape[0]


@dataclass
class TrainConfig:
    epochs: int = 25
    batch_size: int = 20
    learning_rate: float = 1e-3
    margin: float = 0.5
    mnr_scale: float = 20.0
    positive_threshold: float = 0.5
    seed: int = 0
    dim_out: int | None = None
    objective: str = "multi"

    def __post_init__(self):
        if self.epochs < 0:
            raise DataValidationError("epochs must be >= 0")
        if self.batch_size < 2:
            raise DataValidationError("batch_size must be >= 2 for in-batch negatives")
        if self.learning_rate <= 0:
            raise DataValidationError("learning_rate must be positive")
        if not 0 < self.margin <= 1:
            raise DataValidationError("margin must be in (0, 1]")
        if self.mnr_scale <= 0:
            raise DataValidationError("mnr_scale must be positive")
        if self.objective not in OBJECTIVES:
            raise DataValidationError(f"objective must be one of {OBJECTIVES}")


def init_model(dim_in: int, dim_out: int | None = None, metadata: dict | None = None) -> ProjectionModel:
    """Identity-padded initialization: top-left identity, zeros elsewhere,
    zero bias. With dim_out = dim_in the untrained model is a no-op, so
    epoch-0 ranking reduces to raw base-embedding cosine."""
    if dim_out is None:
        dim_out = dim_in
    if dim_in <= 0 or dim_out <= 0:
        raise DataValidationError("model dimensions must be positive")
    W = np.zeros((dim_out, dim_in), dtype=np.float64)
    for i in range(min(dim_out, dim_in)):
        W[i, i] = 1.0
    return ProjectionModel(W=W, b=np.zeros(dim_out, dtype=np.float64), metadata=metadata or {})


def encode(model: ProjectionModel, base) -> np.ndarray:
    base = np.asarray(base, dtype=np.float64)
    if base.shape != (model.dim_in,):
        raise DataValidationError(
            f"base vector has shape {base.shape}, model expects ({model.dim_in},)"
        )
    return model.W @ base + model.b


def _encode_batch(model: ProjectionModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # rows of X are base vectors; returns projections and their norms
    A = X @ model.W.T + model.b
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms == 0.0):
        raise DataValidationError("projection collapsed a text to the zero vector")
    return A, norms


def _batch_vectors(table: EmbeddingTable, texts: list[str]) -> np.ndarray:
    return np.stack([table.vector_for(t) for t in texts])


def _cosine_backprop(A, B, na, nb, coef_a, coef_b):
    """Route per-cell cosine gradients to the projected matrices.

    coef_a[i, j] = dL/dS[i, j] weights for the a-side rows, coef_b the
    b-side; with S[i, j] = cos(A_i, B_j):
      dL/dA_i = sum_j c_ij (B_j / (na_i nb_j) - S_ij A_i / na_i^2)
    and symmetrically for B.
    """
    U = A / na[:, None]
    V = B / nb[:, None]
    S = U @ V.T
    dA = (coef_a @ V) / na[:, None] - ((coef_a * S).sum(axis=1) / na**2)[:, None] * A
    dB = (coef_b.T @ U) / nb[:, None] - ((coef_b * S).sum(axis=0) / nb**2)[:, None] * B
    return S, dA, dB


def mnr_loss(
    batch: list[tuple[str, str]],
    model: ProjectionModel,
    table: EmbeddingTable,
    scale: float = 20.0,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Multiple-negatives-ranking loss over a batch of positive pairs.

    Every other pair's b-side in the batch acts as a negative: loss is
    the mean softmax cross-entropy of scale * cosine rows against the
    diagonal. Returns (loss, dW, db) with exact gradients.
    """
    if not batch:
        raise DataValidationError("mnr_loss needs a non-empty batch")
    X_a = _batch_vectors(table, [a for a, _ in batch])
    X_b = _batch_vectors(table, [b for _, b in batch])
    A, na = _encode_batch(model, X_a)
    B, nb = _encode_batch(model, X_b)
    n = len(batch)

    U = A / na[:, None]
    V = B / nb[:, None]
    S = U @ V.T
    M = scale * S
    row_max = M.max(axis=1, keepdims=True)
    log_z = row_max[:, 0] + np.log(np.exp(M - row_max).sum(axis=1))
    loss = float(-(np.diag(M) - log_z).mean())

    P = np.exp(M - log_z[:, None])
    G = (scale / n) * (P - np.eye(n))
    _, dA, dB = _cosine_backprop(A, B, na, nb, G, G)
    dW = dA.T @ X_a + dB.T @ X_b
    db = dA.sum(axis=0) + dB.sum(axis=0)
    return loss, dW, db


def contrastive_loss(
    batch: list[tuple[str, str, int]],
    model: ProjectionModel,
    table: EmbeddingTable,
    margin: float = 0.5,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Online contrastive loss over (text_a, text_b, binary label) triples.

    With d = 1 - cosine: keeps the hard positives (d strictly above the
    easiest in-batch negative) and hard negatives (d strictly below the
    hardest in-batch positive); a batch missing one side uses all pairs
    of the other. Loss is the mean of d^2 over kept positives and
    max(0, margin - d)^2 over kept negatives; an empty selection gives
    loss 0. Returns (loss, dW, db).
    """
    if not batch:
        raise DataValidationError("contrastive_loss needs a non-empty batch")
    X_a = _batch_vectors(table, [a for a, _, _ in batch])
    X_b = _batch_vectors(table, [b for _, b, _ in batch])
    labels = np.array([y for _, _, y in batch], dtype=np.int64)
    A, na = _encode_batch(model, X_a)
    B, nb = _encode_batch(model, X_b)

    U = A / na[:, None]
    V = B / nb[:, None]
    cos = (U * V).sum(axis=1)
    d = 1.0 - cos
    pos = labels == 1
    neg = ~pos

    if pos.any() and neg.any():
        keep_pos = pos & (d > d[neg].min())
        keep_neg = neg & (d < d[pos].max())
    elif pos.any():
        keep_pos = pos
        keep_neg = neg  # all False
    else:
        keep_pos = pos
        keep_neg = neg

    n_kept = int(keep_pos.sum() + keep_neg.sum())
    zero_grads = np.zeros_like(model.W), np.zeros_like(model.b)
    if n_kept == 0:
        return 0.0, *zero_grads

    terms = np.zeros(len(batch))
    terms[keep_pos] = d[keep_pos] ** 2
    terms[keep_neg] = np.maximum(0.0, margin - d[keep_neg]) ** 2
    loss = float(terms.sum() / n_kept)

    # dL/d(cos_i) = -dL/d(d_i) since d = 1 - cos
    dcos = np.zeros(len(batch))
    dcos[keep_pos] = -2.0 * d[keep_pos] / n_kept
    hinge = keep_neg & (d < margin)
    dcos[hinge] = 2.0 * (margin - d[hinge]) / n_kept

    dA = dcos[:, None] * (V / na[:, None] - (cos / na**2)[:, None] * A)
    dB = dcos[:, None] * (U / nb[:, None] - (cos / nb**2)[:, None] * B)
    dW = dA.T @ X_a + dB.T @ X_b
    db = dA.sum(axis=0) + dB.sum(axis=0)
    return loss, dW, db


def regression_loss(
    batch: list[tuple[str, str, float]],
    model: ProjectionModel,
    table: EmbeddingTable,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Squared error between pair cosine and its graded target score.

    Ablation objective: unlike the two ranking losses it consumes the
    0.4/0.8 grades directly. Returns (loss, dW, db).
    """
    if not batch:
        raise DataValidationError("regression_loss needs a non-empty batch")
    X_a = _batch_vectors(table, [a for a, _, _ in batch])
    X_b = _batch_vectors(table, [b for _, b, _ in batch])
    targets = np.array([s for _, _, s in batch], dtype=np.float64)
    A, na = _encode_batch(model, X_a)
    B, nb = _encode_batch(model, X_b)

    U = A / na[:, None]
    V = B / nb[:, None]
    cos = (U * V).sum(axis=1)
    n = len(batch)
    loss = float(((cos - targets) ** 2).mean())
    dcos = 2.0 * (cos - targets) / n

    dA = dcos[:, None] * (V / na[:, None] - (cos / na**2)[:, None] * A)
    dB = dcos[:, None] * (U / nb[:, None] - (cos / nb**2)[:, None] * B)
    dW = dA.T @ X_a + dB.T @ X_b
    db = dA.sum(axis=0) + dB.sum(axis=0)
    return loss, dW, db


def _chunks(items, size):
    return [items[i : i + size] for i in range(0, len(items), size)]


def train(
    pairs: list[ScoredPair],
    table: EmbeddingTable,
    cfg: TrainConfig,
) -> tuple[ProjectionModel, list[tuple[int, str, float]]]:
    """Train a projection head by gradient descent.

    Per epoch the MNR pool (score-1.0 pairs) and the contrastive pool
    (all pairs, binarized at positive_threshold) are shuffled
    independently and their batches interleaved MNR-first; whichever pool
    has batches left over runs them consecutively. The objective field
    restricts training to a single pool ("mnr", "contrastive") or to the
    score-regression ablation ("regression").

    Returns the model and loss-report rows (epoch, objective, mean loss),
    one row per objective active that epoch plus a "combined" row.
    """
    if not pairs:
        raise DataValidationError("empty training set")
    dim_in = table.dim
    model = init_model(
        dim_in,
        cfg.dim_out,
        metadata={
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
            "learning_rate": cfg.learning_rate,
            "margin": cfg.margin,
            "mnr_scale": cfg.mnr_scale,
            "positive_threshold": cfg.positive_threshold,
            "seed": cfg.seed,
            "objective": cfg.objective,
            "n_pairs": len(pairs),
        },
    )
    for pair in pairs:
        table.vector_for(pair.text_a)
        table.vector_for(pair.text_b)

    mnr_pool = [(p.text_a, p.text_b) for p in pairs if p.score == 1.0]
    contrastive_pool = [
        (p.text_a, p.text_b, 1 if p.score >= cfg.positive_threshold else 0) for p in pairs
    ]
    regression_pool = [(p.text_a, p.text_b, p.score) for p in pairs]
    use_mnr = cfg.objective in ("multi", "mnr")
    use_contrastive = cfg.objective in ("multi", "contrastive")
    if use_mnr and not mnr_pool:
        raise DataValidationError("no score-1.0 pairs available for the MNR objective")

    report: list[tuple[int, str, float]] = []
    for epoch in range(1, cfg.epochs + 1):
        rng = random.Random(f"{cfg.seed}:epoch:{epoch}")
        steps: list[tuple[str, list]] = []
        if cfg.objective == "regression":
            pool = list(regression_pool)
            rng.shuffle(pool)
            steps = [("regression", batch) for batch in _chunks(pool, cfg.batch_size)]
        else:
            mnr_batches = []
            contrastive_batches = []
            if use_mnr:
                pool = list(mnr_pool)
                rng.shuffle(pool)
                mnr_batches = _chunks(pool, cfg.batch_size)
            if use_contrastive:
                pool = list(contrastive_pool)
                rng.shuffle(pool)
                contrastive_batches = _chunks(pool, cfg.batch_size)
            for i in range(max(len(mnr_batches), len(contrastive_batches))):
                if i < len(mnr_batches):
                    steps.append(("mnr", mnr_batches[i]))
                if i < len(contrastive_batches):
                    steps.append(("contrastive", contrastive_batches[i]))

        losses: dict[str, list[float]] = {}
        for objective, batch in steps:
            if objective == "mnr":
                loss, dW, db = mnr_loss(batch, model, table, cfg.mnr_scale)
            elif objective == "contrastive":
                loss, dW, db = contrastive_loss(batch, model, table, cfg.margin)
            else:
                loss, dW, db = regression_loss(batch, model, table)
            model.W = model.W - cfg.learning_rate * dW
            model.b = model.b - cfg.learning_rate * db
            losses.setdefault(objective, []).append(loss)

        for objective in sorted(losses):
            report.append((epoch, objective, float(np.mean(losses[objective]))))
        all_losses = [loss for batch_losses in losses.values() for loss in batch_losses]
        report.append((epoch, "combined", float(np.mean(all_losses))))
    return model, report


def save_model(model: ProjectionModel, path: str | Path) -> None:
    """Write the model as JSON; floats use Python's shortest round-trip
    repr so load_model recovers parameters bit-exactly."""
    payload = {
        "dim_in": model.dim_in,
        "dim_out": model.dim_out,
        "W": model.W.tolist(),
        "b": model.b.tolist(),
        "metadata": model.metadata,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> ProjectionModel:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        model = ProjectionModel(
            W=np.array(payload["W"], dtype=np.float64),
            b=np.array(payload["b"], dtype=np.float64),
            metadata=payload.get("metadata", {}),
        )
        declared = (payload["dim_out"], payload["dim_in"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataValidationError(f"{path}: bad model file: {exc}") from exc
    if model.W.shape != declared:
        raise DataValidationError(
            f"{path}: W shape {model.W.shape} disagrees with declared {declared}"
        )
    return model


def write_loss_report(report: list[tuple[int, str, float]], path: str | Path) -> None:
    """Write loss-report rows as CSV `epoch,objective,mean_loss`."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("epoch,objective,mean_loss\n")
        for epoch, objective, mean_loss in report:
            handle.write(f"{epoch},{objective},{mean_loss!r}\n")
