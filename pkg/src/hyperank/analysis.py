"""PCA projection of label embeddings with explained-variance ratios."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DataValidationError

POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000


def _power_components(C: np.ndarray, n_components: int) -> tuple[np.ndarray, np.ndarray]:
    # iterated power method with deflation; C is symmetric PSD
    dim = C.shape[0]
    C = C.copy()
    values = np.zeros(n_components)
    vectors = np.zeros((n_components, dim))
    # deterministic start: ones plus a small ramp so no single symmetry
    # axis can trap the iteration
    start = np.ones(dim) + np.linspace(0.0, 0.5, dim)
    start /= np.linalg.norm(start)
    for comp in range(n_components):
        v = start.copy()
        for _ in range(POWER_MAX_ITER):
            w = C @ v
            norm = np.linalg.norm(w)
            if norm == 0.0:
                break  # deflated to the null space: eigenvalue 0
            w /= norm
            if np.linalg.norm(w - v) < POWER_TOL:
                v = w
                break
            v = w
        eigenvalue = float(v @ C @ v)
        values[comp] = max(eigenvalue, 0.0)
        vectors[comp] = v
        C -= eigenvalue * np.outer(v, v)
    return values, vectors


def pca_project(
    vectors, n_components: int = 2, method: str = "auto"
) -> tuple[np.ndarray, np.ndarray]:
    """Project vectors onto their top principal components.

    Returns (coordinates, explained_variance_ratios) where ratios are
    eigenvalue / total variance. The covariance eigenproblem is solved by
    full symmetric eigendecomposition for dim <= 64 (or method="eigh")
    and by power iteration with deflation otherwise. Components are
    sign-fixed so each one's largest-magnitude entry is positive.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DataValidationError("pca_project needs at least 2 vectors")
    if not 1 <= n_components <= X.shape[1]:
        raise DataValidationError("n_components must be in [1, dimension]")
    if method not in ("auto", "eigh", "power"):
        raise DataValidationError("method must be auto, eigh, or power")
    Xc = X - X.mean(axis=0)
    C = (Xc.T @ Xc) / (X.shape[0] - 1)
    trace = float(np.trace(C))
    if trace <= 0.0:
        raise DataValidationError("zero variance: all vectors identical")

    use_eigh = method == "eigh" or (method == "auto" and X.shape[1] <= 64)
    if use_eigh:
        eigenvalues, eigenvectors = np.linalg.eigh(C)
        order = np.argsort(eigenvalues)[::-1][:n_components]
        values = np.maximum(eigenvalues[order], 0.0)
        components = eigenvectors[:, order].T
    else:
        values, components = _power_components(C, n_components)

    for comp in components:
        if comp[np.argmax(np.abs(comp))] < 0:
            comp *= -1.0
    coordinates = Xc @ components.T
    return coordinates, values / trace


def write_pca_csv(
    labels: list[str], coordinates: np.ndarray, ratios, path: str | Path
) -> None:
    """CSV `label,pc1,pc2,...` plus a trailing sidecar line
    `# explained_variance: r1,r2,...`."""
    coordinates = np.asarray(coordinates, dtype=np.float64)
    if len(labels) != coordinates.shape[0]:
        raise DataValidationError("one label per coordinate row required")
    n_components = coordinates.shape[1]
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["label"] + [f"pc{i}" for i in range(1, n_components + 1)])
        for label, row in zip(labels, coordinates):
            writer.writerow([label] + [repr(float(v)) for v in row])
        handle.write("# explained_variance: " + ",".join(repr(float(r)) for r in ratios) + "\n")
