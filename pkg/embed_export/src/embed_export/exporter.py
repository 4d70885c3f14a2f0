"""Run a pretrained encoder over texts and write hyperank wire files."""

from __future__ import annotations

import logging
import re
from pathlib import Path

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

log = logging.getLogger("embed_export")

_WIRE_WS = re.compile(r"[\t\n\r]+")

POOLINGS = ("mean", "first")


class ExportError(ValueError):
    """Raised when inputs or the requested model cannot produce an export.

    The CLI maps this to exit code 2.
    """


def wire_id(text: str) -> str:
    """Canonical embedding id for a text.

    Tabs and newlines collapse to one space so every id survives the
    one-row-per-line wire format; the consumer keys lookups the same way.
    """
    return _WIRE_WS.sub(" ", text)


def load_texts(path: str | Path) -> list[str]:
    """Read one text per line, in order, skipping blank lines."""
    path = Path(path)
    texts = [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not texts:
        raise ExportError(f"{path}: no texts found")
    return texts


def _dedupe(texts: list[str]) -> list[str]:
    seen: dict[str, str] = {}
    for text in texts:
        key = wire_id(text)
        if key in seen:
            log.warning("duplicate text collapsed: %r", text[:80])
        else:
            seen[key] = text
    return list(seen.values())


def _pool(hidden: torch.Tensor, mask: torch.Tensor, pooling: str) -> torch.Tensor:
    if pooling == "first":
        return hidden[:, 0, :]
    # mean over real tokens only; padding positions carry mask 0
    weights = mask.unsqueeze(-1).to(hidden.dtype)
    return (hidden * weights).sum(dim=1) / weights.sum(dim=1).clamp(min=1.0)


def encode_texts(model, tokenizer, texts: list[str], *, pooling: str = "mean",
                 batch_size: int = 32) -> np.ndarray:
    """Encode texts to one pooled vector each, in input order.

    Pooling is "mean" (attention-mask-weighted mean over token vectors)
    or "first" (the first-token vector). Inference runs in eval mode at
    float32 so repeated exports agree.
    """
    if pooling not in POOLINGS:
        raise ExportError(f"unknown pooling {pooling!r}, expected one of {POOLINGS}")
    if batch_size < 1:
        raise ExportError("batch_size must be >= 1")
    if not texts:
        raise ExportError("no texts to encode")
    model = model.float().eval()
    encode_kwargs = {"padding": True, "truncation": True, "return_tensors": "pt"}
    # tokenizers without a configured limit report a sentinel huge
    # model_max_length; clamp to the encoder's position table instead
    limit = getattr(model.config, "max_position_embeddings", None)
    if limit and tokenizer.model_max_length > limit:
        encode_kwargs["max_length"] = limit
    rows = []
    with torch.inference_mode():
        for start in range(0, len(texts), batch_size):
            batch = texts[start:start + batch_size]
            encoded = tokenizer(batch, **encode_kwargs)
            hidden = model(**encoded).last_hidden_state
            rows.append(_pool(hidden, encoded["attention_mask"], pooling))
    matrix = torch.cat(rows, dim=0).numpy().astype(np.float64)
    if not np.all(np.isfinite(matrix)):
        raise ExportError("encoder produced non-finite components")
    return matrix


def _write_wire(path: Path, ids: list[str], matrix: np.ndarray) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
        for id_, row in zip(ids, matrix):
            floats = " ".join(format(x, ".17g") for x in row)
            handle.write(f"{id_}\t{floats}\n")


def export(model_name: str, texts_path: str | Path, out_path: str | Path, *,
           pooling: str = "mean", batch_size: int = 32) -> tuple[int, int]:
    """Export pooled embeddings for every unique text in ``texts_path``.

    Writes the ``<count> <dim>`` header plus one tab-delimited row per
    unique text (first occurrence wins, later duplicates are logged and
    dropped) and returns ``(count, dim)``.
    """
    texts = _dedupe(load_texts(texts_path))
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_name)
        model = AutoModel.from_pretrained(model_name)
    except (OSError, ValueError) as exc:
        raise ExportError(f"cannot load model {model_name!r}: {exc}") from exc
    matrix = encode_texts(model, tokenizer, texts, pooling=pooling, batch_size=batch_size)
    _write_wire(Path(out_path), [wire_id(t) for t in texts], matrix)
    return matrix.shape[0], matrix.shape[1]
