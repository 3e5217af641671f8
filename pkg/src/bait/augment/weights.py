"""Balanced per-class loss weights: w_c = N / (C * n_c)."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError


def balanced_class_weights(counts) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim != 1 or counts.size == 0:
        raise ParameterError(f"counts must be a nonempty vector, got shape {counts.shape}")
    if np.any(counts <= 0):
        raise ParameterError("every class count must be positive")
    return counts.sum() / (counts.size * counts)
