"""Base embeddings: a text wire format, a hashing embedder, and cosine."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import preprocess
from .errors import DataValidationError

_WIRE_WS = re.compile(r"[\t\n\r]+")


def wire_id(text: str) -> str:
    """Canonical embedding id for a text.

    Tabs and newlines collapse to one space so every id survives the
    one-row-per-line wire format; all lookups go through this.
    """
    return _WIRE_WS.sub(" ", text)


@dataclass
class EmbeddingTable:
    """id -> vector map with a fixed dimension.

    Immutable by convention once populated; cosine and lookups are
    thread-safe after that point.
    """

    dim: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim <= 0:
            raise DataValidationError("embedding dim must be positive")

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, text: str) -> bool:
        return wire_id(text) in self.vectors

    def add(self, id_: str, vector) -> None:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.dim,):
            raise DataValidationError(
                f"vector for {id_!r} has length {vector.shape}, expected ({self.dim},)"
            )
        if not np.all(np.isfinite(vector)):
            raise DataValidationError(f"vector for {id_!r} has non-finite components")
        if id_ in self.vectors:
            raise DataValidationError(f"duplicate embedding id {id_!r}")
        self.vectors[id_] = vector

    def vector_for(self, text: str) -> np.ndarray:
        """Vector for a text, keyed by its canonical wire id."""
        try:
            return self.vectors[wire_id(text)]
        except KeyError:
            raise DataValidationError(f"no embedding for text {text[:80]!r}") from None


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    """Write the text wire format: ``<count> <dim>`` then one
    ``<id><TAB><v1> <v2> ...`` row per vector, floats at 17 significant
    digits so parsing recovers every bit."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"{len(table.vectors)} {table.dim}\n")
        for id_, vector in table.vectors.items():
            row = " ".join(format(x, ".17g") for x in vector)
            handle.write(f"{id_}\t{row}\n")


def load_embeddings(path: str | Path) -> EmbeddingTable:
    path = Path(path)
    with path.open(encoding="utf-8") as handle:
        header = handle.readline().split()
        if len(header) != 2:
            raise DataValidationError(f"{path}:1: header must be '<count> <dim>'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise DataValidationError(f"{path}:1: bad header: {exc}") from exc
        if count < 0 or dim <= 0:
            raise DataValidationError(f"{path}:1: bad header values {count} {dim}")
        table = EmbeddingTable(dim)
        for lineno, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            id_, sep, row = line.partition("\t")
            if not sep or not id_:
                raise DataValidationError(f"{path}:{lineno}: expected '<id><TAB><floats>'")
            values = row.split()
            if len(values) != dim:
                raise DataValidationError(
                    f"{path}:{lineno}: row has {len(values)} values, header says {dim}"
                )
            try:
                vector = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise DataValidationError(f"{path}:{lineno}: bad float: {exc}") from exc
            if not np.all(np.isfinite(vector)):
                raise DataValidationError(f"{path}:{lineno}: non-finite component")
            if id_ in table.vectors:
                raise DataValidationError(f"{path}:{lineno}: duplicate id {id_!r}")
            table.vectors[id_] = vector
    if len(table.vectors) != count:
        raise DataValidationError(
            f"{path}: header declares {count} rows, found {len(table.vectors)}"
        )
    return table


def hash_embed(text: str, dim: int, seed: int) -> np.ndarray:
    """Deterministic unit vector from feature-hashed character trigrams.

    The preprocessed text's trigrams are hashed (seed folded into the
    hash input) into ``dim`` signed buckets and the result L2-normalized.
    Texts too short to produce a trigram, or whose signs fully cancel,
    map to the first basis vector. A stand-in for transformer encoders in
    tests and demos, not a quality claim.
    """
    if dim < 8:
        raise DataValidationError("hash_embed dim must be >= 8")
    vec = np.zeros(dim, dtype=np.float64)
    clean = preprocess(text)
    for i in range(len(clean) - 2):
        gram = clean[i : i + 3]
        digest = hashlib.blake2b(
            f"{seed}|{gram}".encode("utf-8"), digest_size=8
        ).digest()
        value = int.from_bytes(digest, "big")
        sign = 1.0 if value & (1 << 63) else -1.0
        vec[value % dim] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        vec[0] = 1.0
        return vec
    return vec / norm


def hash_table(texts, dim: int, seed: int) -> EmbeddingTable:
    """EmbeddingTable covering every distinct text via hash_embed."""
    table = EmbeddingTable(dim)
    for text in texts:
        id_ = wire_id(text)
        if id_ not in table.vectors:
            table.vectors[id_] = hash_embed(text, dim, seed)
    return table


def cosine(u, v) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding spill."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or u.shape != v.shape:
        raise DataValidationError(f"cosine length mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise DataValidationError("cosine undefined for a zero vector")
    return float(min(1.0, max(-1.0, float(np.dot(u, v)) / (nu * nv))))


def text_vector(table: EmbeddingTable, text: str) -> np.ndarray:
    """Vector for a text: exact-id lookup, else the mean of its
    preprocessed tokens' vectors (for token-level tables)."""
    id_ = wire_id(text)
    if id_ in table.vectors:
        return table.vectors[id_]
    found = [table.vectors[tok] for tok in preprocess(text).split() if tok in table.vectors]
    if not found:
        raise DataValidationError(f"no embedding for text or tokens of {text[:80]!r}")
    return np.mean(found, axis=0)
