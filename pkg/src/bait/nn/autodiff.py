"""Reverse-mode automatic differentiation over numpy arrays.

A :class:`Tape` records one backward closure per primitive applied during a
forward pass. Trainable leaves are :class:`Var` objects wrapping parameter
arrays; plain ndarrays are treated as constants and receive no gradient.
Replaying the recorded closures in reverse order accumulates exact gradients
of a scalar loss into ``Var.grad``.

The primitive set is deliberately small: dense layers, elementwise
activations, dropout, (masked) softmax, the weighted log-loss, batched
attention contractions, concatenation, and a row-wise cosine. That covers the
three model families in this package and nothing more.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import ContractError

Arrayish = "Var | np.ndarray"


class Var:
    """A differentiable value: an ndarray plus an accumulated gradient."""

    __slots__ = ("value", "grad")

    def __init__(self, value: np.ndarray):
        self.value = np.asarray(value)
        self.grad: np.ndarray | None = None

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad = None


class Tape:
    """Ordered record of backward closures for one forward pass."""

    def __init__(self):
        self._steps: list[tuple[Var, Callable[[np.ndarray], None]]] = []

    def record(self, out: Var, backward: Callable[[np.ndarray], None]) -> None:
        self._steps.append((out, backward))

    def backward(self, loss) -> None:
        """Seed the scalar loss with gradient 1 and replay in reverse."""
        if not isinstance(loss, Var):
            raise ContractError("loss must be a taped Var, got a constant")
        if np.ndim(loss.value) != 0 and np.size(loss.value) != 1:
            raise ContractError(
                f"backward requires a scalar loss, got shape {np.shape(loss.value)}"
            )
        loss.grad = np.ones_like(loss.value)
        for out, step in reversed(self._steps):
            if out.grad is not None:
                step(out.grad)


def value_of(x) -> np.ndarray:
    return x.value if isinstance(x, Var) else x


def _accum(x, g: np.ndarray) -> None:
    # Constants swallow gradients; never mutate an existing grad in place
    # because first assignments may alias views of upstream buffers.
    if isinstance(x, Var):
        x.grad = g if x.grad is None else x.grad + g


def _emit(tape: Tape | None, value: np.ndarray, backward) -> "Var | np.ndarray":
    if tape is None:
        return value
    out = Var(value)
    tape.record(out, backward)
    return out


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------


def dense(x, weight, bias, tape: Tape | None = None):
    """y = x @ W.T + b for x of shape (B, in), W (out, in), b (out,)."""
    xv, wv, bv = value_of(x), value_of(weight), value_of(bias)
    y = xv @ wv.T + bv

    def backward(g):
        _accum(x, g @ wv)
        _accum(weight, g.T @ xv)
        _accum(bias, g.sum(axis=0))

    return _emit(tape, y, backward)


def linear_nobias(x, weight, tape: Tape | None = None):
    """y = x @ W.T with x of shape (..., in) and W (out, in)."""
    xv, wv = value_of(x), value_of(weight)
    y = xv @ wv.T

    def backward(g):
        _accum(x, g @ wv)
        g2 = g.reshape(-1, g.shape[-1])
        x2 = xv.reshape(-1, xv.shape[-1])
        _accum(weight, g2.T @ x2)

    return _emit(tape, y, backward)


def relu(x, tape: Tape | None = None):
    xv = value_of(x)
    y = np.maximum(xv, 0)

    def backward(g):
        _accum(x, g * (xv > 0))

    return _emit(tape, y, backward)


def scale(x, c: float, tape: Tape | None = None):
    xv = value_of(x)

    def backward(g):
        _accum(x, g * c)

    return _emit(tape, xv * c, backward)


def mul_elementwise(x, mask: np.ndarray, tape: Tape | None = None):
    """Multiply by a constant array (dropout masks)."""
    xv = value_of(x)

    def backward(g):
        _accum(x, g * mask)

    return _emit(tape, xv * mask, backward)


def reshape(x, shape, tape: Tape | None = None):
    xv = value_of(x)
    old = xv.shape

    def backward(g):
        _accum(x, g.reshape(old))

    return _emit(tape, xv.reshape(shape), backward)


def transpose(x, axes, tape: Tape | None = None):
    xv = value_of(x)
    inverse = np.argsort(axes)

    def backward(g):
        _accum(x, g.transpose(inverse))

    return _emit(tape, xv.transpose(axes), backward)


def concat_cols(parts, tape: Tape | None = None):
    """Concatenate (B, d_i) blocks along the last axis."""
    values = [value_of(p) for p in parts]
    widths = [v.shape[-1] for v in values]
    y = np.concatenate(values, axis=-1)
    offsets = np.cumsum([0] + widths)

    def backward(g):
        for part, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            _accum(part, g[..., lo:hi])

    return _emit(tape, y, backward)


def softmax_rows(x, tape: Tape | None = None):
    """Row-wise softmax with max subtraction; float64 normalizer."""
    xv = value_of(x)
    shifted = xv - xv.max(axis=-1, keepdims=True)
    e = np.exp(shifted.astype(np.float64))
    p64 = e / e.sum(axis=-1, keepdims=True)
    p = p64.astype(xv.dtype)

    def backward(g):
        inner = (g * p).sum(axis=-1, keepdims=True)
        _accum(x, p * (g - inner))

    return _emit(tape, p, backward)


def masked_softmax(scores, mask: np.ndarray, tape: Tape | None = None):
    """Softmax over the last axis restricted to ``mask`` (True = usable).

    ``mask`` broadcasts against ``scores``; masked positions get exactly zero
    probability and exactly zero gradient. Every row must have at least one
    usable position (callers enforce this).
    """
    sv = value_of(scores)
    mask = np.broadcast_to(mask, sv.shape)
    neg = np.where(mask, sv, -np.inf)
    shifted = neg - neg.max(axis=-1, keepdims=True)
    e = np.exp(shifted.astype(np.float64))
    p64 = e / e.sum(axis=-1, keepdims=True)
    p = p64.astype(sv.dtype)

    def backward(g):
        inner = (g * p).sum(axis=-1, keepdims=True)
        _accum(scores, p * (g - inner))

    return _emit(tape, p, backward)


def attention_scores(q, k, tape: Tape | None = None):
    """scores[b,h,l] = sum_d q[b,h,d] * k[b,h,l,d]."""
    qv, kv = value_of(q), value_of(k)
    y = np.einsum("bhd,bhld->bhl", qv, kv, optimize=True)

    def backward(g):
        _accum(q, np.einsum("bhl,bhld->bhd", g, kv, optimize=True))
        _accum(k, np.einsum("bhl,bhd->bhld", g, qv, optimize=True))

    return _emit(tape, y, backward)


def attention_combine(weights, v, tape: Tape | None = None):
    """out[b,h,d] = sum_l weights[b,h,l] * v[b,h,l,d]."""
    wv, vv = value_of(weights), value_of(v)
    y = np.einsum("bhl,bhld->bhd", wv, vv, optimize=True)

    def backward(g):
        _accum(weights, np.einsum("bhd,bhld->bhl", g, vv, optimize=True))
        _accum(v, np.einsum("bhl,bhd->bhld", wv, g, optimize=True))

    return _emit(tape, y, backward)


def cosine_rows(u, v, tape: Tape | None = None):
    """Row-wise cosine similarity, shape (B, 1); zero-norm rows give 0."""
    uv, vv = value_of(u), value_of(v)
    u64 = uv.astype(np.float64)
    v64 = vv.astype(np.float64)
    dot = (u64 * v64).sum(axis=-1, keepdims=True)
    nu = np.sqrt((u64 * u64).sum(axis=-1, keepdims=True))
    nv = np.sqrt((v64 * v64).sum(axis=-1, keepdims=True))
    denom = nu * nv
    safe = denom > 0
    cos = np.where(safe, dot / np.where(safe, denom, 1.0), 0.0)
    y = cos.astype(uv.dtype)

    def backward(g):
        g64 = g.astype(np.float64)
        with np.errstate(invalid="ignore", divide="ignore"):
            du = np.where(safe, v64 / denom - cos * u64 / (nu * nu), 0.0)
            dv = np.where(safe, u64 / denom - cos * v64 / (nv * nv), 0.0)
        _accum(u, (g64 * du).astype(uv.dtype))
        _accum(v, (g64 * dv).astype(vv.dtype))

    return _emit(tape, y, backward)


def weighted_nll_mean(probs, labels: np.ndarray, weights: np.ndarray,
                      tape: Tape | None = None, eps: float = 1e-12):
    """Mean over the batch of -weights[y] * ln(probs[y] + eps)."""
    pv = value_of(probs)
    n = pv.shape[0]
    rows = np.arange(n)
    picked = pv[rows, labels].astype(np.float64)
    w = weights[labels].astype(np.float64)
    losses = -w * np.log(picked + eps)
    y = np.asarray(losses.mean(), dtype=pv.dtype)

    def backward(g):
        dp = np.zeros_like(pv)
        dp[rows, labels] = (-w / (picked + eps) / n * float(g)).astype(pv.dtype)
        _accum(probs, dp)

    return _emit(tape, y, backward)
