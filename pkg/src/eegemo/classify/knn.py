"""Brute-force k-nearest-neighbors with fully deterministic tie handling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KnnModel:
    """Stored training rows and labels; prediction is majority vote of the
    k nearest by Euclidean distance. Equal distances prefer the lower
    training-row index; tied votes fall back to the single nearest
    neighbor's label."""

    train_x: np.ndarray
    train_y: np.ndarray
    k: int

    def __post_init__(self):
        x = np.ascontiguousarray(self.train_x, dtype=np.float64)
        y = np.asarray(self.train_y, dtype=np.int64)
        if x.ndim != 2:
            raise ValueError("training matrix must be 2-D")
        if len(y) != x.shape[0]:
            raise ValueError(f"{x.shape[0]} rows but {len(y)} labels")
        if not np.all(np.isfinite(x)):
            raise ValueError("training rows must be finite")
        if not 1 <= self.k <= x.shape[0]:
            raise ValueError(f"k={self.k} outside [1, {x.shape[0]}]")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "train_x", x)
        object.__setattr__(self, "train_y", y)


def knn_predict(model: KnnModel, queries) -> np.ndarray:
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if queries.shape[1] != model.train_x.shape[1]:
        raise ValueError(f"query dimension {queries.shape[1]} != "
                         f"training dimension {model.train_x.shape[1]}")
    out = np.empty(queries.shape[0], dtype=np.int64)
    for i, q in enumerate(queries):
        diff = model.train_x - q
        dist_sq = np.einsum("ij,ij->i", diff, diff)
        order = np.argsort(dist_sq, kind="stable")  # ties -> lower row index
        top = model.train_y[order[:model.k]]
        votes: dict[int, int] = {}
        for label in top:
            votes[int(label)] = votes.get(int(label), 0) + 1
        best = max(votes.values())
        winners = [label for label, c in votes.items() if c == best]
        out[i] = winners[0] if len(winners) == 1 else top[0]
    return out
