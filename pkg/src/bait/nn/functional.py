"""Core forward operations.

Every operation accepts plain ndarrays (inference) or taped ``Var`` inputs
(training); passing ``tape=None`` returns plain values, passing a ``Tape``
returns a ``Var`` wired for :func:`backward`.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError, ParameterError
from ..validation import check_probability
from . import autodiff as ad
from .autodiff import Tape, Var, value_of
from .layers import DenseLayerParams


def dense_forward(x, layer, tape: Tape | None = None):
    """x (B, in) through one dense layer: y = x @ W.T + b."""
    xv = value_of(x)
    wv = value_of(layer.weight)
    if xv.ndim != 2:
        raise DimensionError(f"input must be 2-D, got shape {xv.shape}")
    if xv.shape[1] != wv.shape[1]:
        raise DimensionError(
            f"input shape {xv.shape} incompatible with weight shape {wv.shape}"
        )
    return ad.dense(x, layer.weight, layer.bias, tape)


def relu(x, tape: Tape | None = None):
    return ad.relu(x, tape)


def dropout(x, p: float, training: bool, rng: np.random.Generator | None = None,
            tape: Tape | None = None):
    """Inverted dropout: train-time zeroing with 1/(1-p) rescale, inference identity."""
    check_probability(p, "dropout probability")
    if not training or p == 0.0:
        return x
    if rng is None:
        raise ParameterError("training-mode dropout needs a seeded generator")
    xv = value_of(x)
    keep = rng.random(xv.shape) >= p
    mask = keep.astype(xv.dtype) / np.asarray(1.0 - p, dtype=xv.dtype)
    return ad.mul_elementwise(x, mask, tape)


def softmax(x, tape: Tape | None = None):
    """Softmax of a vector or of each row of a matrix (max-subtracted)."""
    xv = value_of(x)
    if xv.ndim not in (1, 2):
        raise DimensionError(f"softmax expects a vector or matrix, got shape {xv.shape}")
    return ad.softmax_rows(x, tape)


def weighted_cross_entropy(probs, label: int, weights, eps: float = 1e-12) -> float:
    """-weights[label] * ln(probs[label] + eps) for one distribution."""
    p = np.asarray(value_of(probs), dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if p.ndim != 1:
        raise DimensionError(f"probs must be a vector, got shape {p.shape}")
    if not 0 <= label < p.shape[0]:
        raise IndexError(f"label {label} out of range for {p.shape[0]} classes")
    if not w[label] > 0:
        raise ParameterError(f"weight for label {label} must be positive, got {w[label]}")
    return float(-w[label] * np.log(p[label] + eps))


def weighted_cross_entropy_mean(probs, labels, weights, tape: Tape | None = None):
    """Batch mean of the weighted log-loss; the training-time reduction."""
    labels = np.asarray(labels)
    weights = np.asarray(weights, dtype=np.float64)
    pv = value_of(probs)
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= pv.shape[1]:
        raise IndexError("label out of range")
    return ad.weighted_nll_mean(probs, labels, weights, tape)


def cosine_similarity(u, v) -> float:
    """u.v / (|u||v|), accumulated in float64; zero-norm inputs give 0."""
    value, _ = cosine_similarity_checked(u, v)
    return value


def cosine_similarity_checked(u, v) -> tuple[float, bool]:
    """Cosine plus a degeneracy flag (True when either norm is zero)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionError(f"vector shapes differ: {u.shape} vs {v.shape}")
    nu = np.sqrt(np.dot(u, u))
    nv = np.sqrt(np.dot(v, v))
    if nu == 0.0 or nv == 0.0:
        return 0.0, True
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0)), False


def cosine_matrix(head: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Cosine of one head vector (D,) against each row of (..., L, D), float64.

    Zero-norm rows map to 0 (the degenerate sentinel).
    """
    head = np.asarray(head, dtype=np.float64)
    rows64 = np.asarray(rows, dtype=np.float64)
    nh = np.sqrt((head * head).sum())
    dots = rows64 @ head
    norms = np.sqrt((rows64 * rows64).sum(axis=-1))
    denom = norms * nh
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = np.where(denom > 0, dots / denom, 0.0)
    return sims


def mlp_forward(x, layers: list, dropout_p: float, mode: str,
                rng: np.random.Generator | None = None, tape: Tape | None = None):
    """Hidden dense+ReLU+dropout stack, final dense, row softmax."""
    training = mode == "train"
    h = x
    for layer in layers[:-1]:
        h = dense_forward(h, layer, tape)
        h = relu(h, tape)
        h = dropout(h, dropout_p, training, rng, tape)
    logits = dense_forward(h, layers[-1], tape)
    return softmax(logits, tape)
