"""Multi-head scaled dot-product attention with decoupled per-head dims.

Queries and keys may live in a different space than values (here: SIM-space
queries/keys, NLI-space values). Per-head dims d_k and d_v are free
parameters, so any head count is legal regardless of the input widths.
Projections are pure matrices (no biases).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, DimensionError
from ..validation import check_count
from . import autodiff as ad
from .autodiff import Tape, value_of
from .layers import xavier_uniform


@dataclass
class AttentionParams:
    """Projection matrices for multi-head attention.

    query_proj: (H*d_k, q_dim); key_proj: (H*d_k, k_dim);
    value_proj: (H*d_v, v_dim); output_proj: (out_dim, H*d_v).
    """

    num_heads: int
    d_k: int
    d_v: int
    query_proj: np.ndarray
    key_proj: np.ndarray
    value_proj: np.ndarray
    output_proj: np.ndarray

    def __post_init__(self):
        check_count(self.num_heads, "num_heads")
        check_count(self.d_k, "d_k")
        check_count(self.d_v, "d_v")
        h, dk, dv = self.num_heads, self.d_k, self.d_v
        if value_of(self.query_proj).shape[0] != h * dk:
            raise DimensionError(
                f"query_proj rows {value_of(self.query_proj).shape[0]} != H*d_k {h * dk}"
            )
        if value_of(self.key_proj).shape[0] != h * dk:
            raise DimensionError(
                f"key_proj rows {value_of(self.key_proj).shape[0]} != H*d_k {h * dk}"
            )
        if value_of(self.value_proj).shape[0] != h * dv:
            raise DimensionError(
                f"value_proj rows {value_of(self.value_proj).shape[0]} != H*d_v {h * dv}"
            )
        if value_of(self.output_proj).shape[1] != h * dv:
            raise DimensionError(
                f"output_proj cols {value_of(self.output_proj).shape[1]} != H*d_v {h * dv}"
            )

    @property
    def q_dim(self) -> int:
        return value_of(self.query_proj).shape[1]

    @property
    def k_dim(self) -> int:
        return value_of(self.key_proj).shape[1]

    @property
    def v_dim(self) -> int:
        return value_of(self.value_proj).shape[1]

    @property
    def out_dim(self) -> int:
        return value_of(self.output_proj).shape[0]

    def n_params(self) -> int:
        return sum(value_of(m).size for m in
                   (self.query_proj, self.key_proj, self.value_proj, self.output_proj))

    def matrices(self) -> list[np.ndarray]:
        """Projections in declaration (serialization) order."""
        return [self.query_proj, self.key_proj, self.value_proj, self.output_proj]

    def copy(self) -> "AttentionParams":
        return AttentionParams(
            self.num_heads, self.d_k, self.d_v,
            value_of(self.query_proj).copy(), value_of(self.key_proj).copy(),
            value_of(self.value_proj).copy(), value_of(self.output_proj).copy(),
        )


def init_attention(q_dim: int, k_dim: int, v_dim: int, out_dim: int,
                   num_heads: int, d_k: int, d_v: int,
                   rng: np.random.Generator, dtype=np.float32) -> AttentionParams:
    return AttentionParams(
        num_heads=num_heads, d_k=d_k, d_v=d_v,
        query_proj=xavier_uniform(q_dim, num_heads * d_k, rng, dtype),
        key_proj=xavier_uniform(k_dim, num_heads * d_k, rng, dtype),
        value_proj=xavier_uniform(v_dim, num_heads * d_v, rng, dtype),
        output_proj=xavier_uniform(num_heads * d_v, out_dim, rng, dtype),
    )


def identity_attention(qk_dim: int, v_dim: int, dtype=np.float64) -> AttentionParams:
    """Single head, all projections identity: the bare weighted-average form."""
    return AttentionParams(
        num_heads=1, d_k=qk_dim, d_v=v_dim,
        query_proj=np.eye(qk_dim, dtype=dtype),
        key_proj=np.eye(qk_dim, dtype=dtype),
        value_proj=np.eye(v_dim, dtype=dtype),
        output_proj=np.eye(v_dim, dtype=dtype),
    )


def attention_batch(query, keys, values, key_mask: np.ndarray,
                    params: AttentionParams, tape: Tape | None = None):
    """Batched attention.

    query (B, q_dim); keys (B, L, k_dim); values (B, L, v_dim);
    key_mask (B, L) boolean, True = usable key. Returns
    (attended (B, out_dim), weights (B, H, L) ndarray).
    """
    qv, kv, vv = value_of(query), value_of(keys), value_of(values)
    mask = np.asarray(key_mask, dtype=bool)
    if qv.ndim != 2 or kv.ndim != 3 or vv.ndim != 3:
        raise DimensionError(
            f"expected query (B,q), keys (B,L,k), values (B,L,v); got "
            f"{qv.shape}, {kv.shape}, {vv.shape}"
        )
    b, l = kv.shape[0], kv.shape[1]
    if vv.shape[:2] != (b, l) or qv.shape[0] != b or mask.shape != (b, l):
        raise DimensionError(
            f"batch/length mismatch: query {qv.shape}, keys {kv.shape}, "
            f"values {vv.shape}, mask {mask.shape}"
        )
    if qv.shape[1] != params.q_dim or kv.shape[2] != params.k_dim \
            or vv.shape[2] != params.v_dim:
        raise DimensionError(
            f"input widths ({qv.shape[1]}, {kv.shape[2]}, {vv.shape[2]}) do not match "
            f"projections ({params.q_dim}, {params.k_dim}, {params.v_dim})"
        )
    if not mask.any(axis=1).all():
        raise DegenerateInputError("attention over a fully-masked key set")

    h, dk, dv = params.num_heads, params.d_k, params.d_v

    q = ad.linear_nobias(query, params.query_proj, tape)        # (B, H*dk)
    q = ad.reshape(q, (b, h, dk), tape)                         # (B, H, dk)
    k = ad.linear_nobias(keys, params.key_proj, tape)           # (B, L, H*dk)
    k = ad.reshape(k, (b, l, h, dk), tape)
    k = ad.transpose(k, (0, 2, 1, 3), tape)                     # (B, H, L, dk)
    v = ad.linear_nobias(values, params.value_proj, tape)       # (B, L, H*dv)
    v = ad.reshape(v, (b, l, h, dv), tape)
    v = ad.transpose(v, (0, 2, 1, 3), tape)                     # (B, H, L, dv)

    scores = ad.attention_scores(q, k, tape)                    # (B, H, L)
    scores = ad.scale(scores, 1.0 / np.sqrt(dk), tape)
    weights = ad.masked_softmax(scores, mask[:, None, :], tape)

    attended = ad.attention_combine(weights, v, tape)           # (B, H, dv)
    attended = ad.reshape(attended, (b, h * dv), tape)
    out = ad.linear_nobias(attended, params.output_proj, tape)  # (B, out_dim)
    return out, value_of(weights)


def multihead_attention(query, keys, values, key_mask, params: AttentionParams):
    """Single-query attention: query (1, q_dim) or (q_dim,), keys/values (L, *).

    Returns (attended (out_dim,), weights (H, L)).
    """
    q = np.asarray(query, dtype=np.float64)
    if q.ndim == 1:
        q = q[None, :]
    if q.ndim != 2 or q.shape[0] != 1:
        raise DimensionError(f"query must be a single row, got shape {np.shape(query)}")
    keys = np.asarray(keys)
    values = np.asarray(values)
    mask = np.asarray(key_mask, dtype=bool)
    out, weights = attention_batch(
        q, keys[None, :, :], values[None, :, :], mask[None, :], params
    )
    return out[0], weights[0]
