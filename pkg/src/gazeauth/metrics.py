"""Accuracy and confusion accounting over the twelve shape classes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .shapes import SHAPE_IDS, SHAPE_INDEX


@dataclass(frozen=True)
class ConfusionMatrix:
    """Row-normalized true-class vs predicted-class matrix with trial counts."""

    counts: np.ndarray  # (12, 12) int, rows = true class

    def __post_init__(self):
        arr = np.asarray(self.counts, dtype=int)
        k = len(SHAPE_IDS)
        if arr.shape != (k, k):
            raise ValueError(f"confusion matrix must be {k}x{k}, got {arr.shape}")
        object.__setattr__(self, "counts", arr)

    @classmethod
    def from_pairs(cls, y_true, y_pred) -> "ConfusionMatrix":
        counts = np.zeros((len(SHAPE_IDS), len(SHAPE_IDS)), dtype=int)
        for t, p in zip(y_true, y_pred):
            counts[SHAPE_INDEX[t], SHAPE_INDEX[p]] += 1
        return cls(counts)

    @property
    def trials_per_class(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def normalized(self) -> np.ndarray:
        """Rows divided by true-class counts; untested classes stay all-zero."""
        totals = self.trials_per_class.astype(float)
        out = np.zeros_like(self.counts, dtype=float)
        tested = totals > 0
        out[tested] = self.counts[tested] / totals[tested, None]
        return out

    @property
    def accuracy(self) -> float:
        total = self.counts.sum()
        return float(np.trace(self.counts) / total) if total else 0.0

    @property
    def per_class_accuracy(self) -> dict[str, float]:
        norm = self.normalized
        return {sid: float(norm[i, i]) for i, sid in enumerate(SHAPE_IDS)}

    def to_lists(self) -> list[list[float]]:
        return [[float(v) for v in row] for row in self.normalized]
