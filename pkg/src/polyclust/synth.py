"""Synthetic instances with known ground truth."""
from __future__ import annotations

import numpy as np


def minmax(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    lo, hi = X.min(axis=0), X.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return (X - lo) / span


def blobs(n_blobs: int, n: int, sep: float = 10.0, seed: int = 0, dim: int = 2):
    """Isotropic unit-variance Gaussian blobs.

    Centers sit on a regular polygon (a segment for two blobs) with
    neighbouring centers ``sep`` apart, so ``sep`` is the separation in
    units of the blob spread. ``n`` points are split as evenly as possible.
    Returns ``(X, labels)`` in raw units.
    """
    if n_blobs < 1 or n < n_blobs:
        raise ValueError("need at least one point per blob")
    rng = np.random.default_rng(seed)
    if n_blobs == 1:
        centers = np.zeros((1, dim))
    else:
        radius = sep / (2 * np.sin(np.pi / n_blobs))
        ang = 2 * np.pi * np.arange(n_blobs) / n_blobs
        centers = np.zeros((n_blobs, dim))
        centers[:, 0] = radius * np.cos(ang)
        if dim > 1:
            centers[:, 1] = radius * np.sin(ang)
    counts = np.full(n_blobs, n // n_blobs)
    counts[: n % n_blobs] += 1
    labels = np.repeat(np.arange(n_blobs), counts)
    X = centers[labels] + rng.standard_normal((n, dim))
    return X, labels


def xor_diagonal(n: int = 200, gap: float = 0.35, length: float = 1.0, width: float = 0.03, seed: int = 0):
    """Two thin parallel strips along the main diagonal.

    The strips are ``2 * gap`` apart across the diagonal and overlap in both
    coordinate ranges, so no axis-parallel cut separates them while
    ``x - y`` does.
    """
    rng = np.random.default_rng(seed)
    half = n // 2
    labels = np.repeat([0, 1], [half, n - half])
    t = rng.uniform(-length / 2, length / 2, n)
    off = np.where(labels == 0, gap, -gap) + rng.uniform(-width, width, n)
    along = np.array([1.0, 1.0]) / np.sqrt(2)
    across = np.array([-1.0, 1.0]) / np.sqrt(2)
    X = t[:, None] * along + off[:, None] * across
    return X, labels


def write_csv(path, X) -> None:
    import csv

    X = np.asarray(X, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{d}" for d in range(X.shape[1])])
        for row in X:
            w.writerow([repr(float(v)) for v in row])
