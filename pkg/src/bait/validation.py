"""Small input-validation helpers used across module boundaries."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, ParameterError


def as_matrix(x, name: str = "x") -> np.ndarray:
    """Coerce to a 2-D float array, rejecting non-finite entries."""
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.floating):
        arr = arr.astype(np.float32)
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite entries")
    return arr


def as_vector(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.floating):
        arr = arr.astype(np.float32)
    return arr


def check_probability(p: float, name: str = "p", *, upper_open: bool = True) -> float:
    hi_ok = p < 1.0 if upper_open else p <= 1.0
    if not (0.0 <= p and hi_ok):
        bound = "[0, 1)" if upper_open else "[0, 1]"
        raise ParameterError(f"{name} must be in {bound}, got {p}")
    return float(p)


def check_positive(value, name: str):
    if not value > 0:
        raise ParameterError(f"{name} must be positive, got {value}")
    return value


def check_count(value: int, name: str, minimum: int = 1) -> int:
    if int(value) != value or value < minimum:
        raise ParameterError(f"{name} must be an integer >= {minimum}, got {value}")
    return int(value)
