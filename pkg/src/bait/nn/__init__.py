"""Minimal dense-network substrate: autodiff, layers, attention, Adam."""

from .autodiff import Tape, Var, value_of
from .attention import (
    AttentionParams,
    attention_batch,
    identity_attention,
    init_attention,
    multihead_attention,
)
from .functional import (
    cosine_matrix,
    cosine_similarity,
    cosine_similarity_checked,
    dense_forward,
    dropout,
    mlp_forward,
    relu,
    softmax,
    weighted_cross_entropy,
    weighted_cross_entropy_mean,
)
from .layers import DenseLayerParams, init_mlp, kaiming_uniform, xavier_uniform
from .optim import OptimizerState, adam_step

__all__ = [
    "AttentionParams",
    "DenseLayerParams",
    "OptimizerState",
    "Tape",
    "Var",
    "adam_step",
    "attention_batch",
    "cosine_matrix",
    "cosine_similarity",
    "cosine_similarity_checked",
    "dense_forward",
    "dropout",
    "identity_attention",
    "init_attention",
    "init_mlp",
    "kaiming_uniform",
    "mlp_forward",
    "multihead_attention",
    "relu",
    "softmax",
    "value_of",
    "weighted_cross_entropy",
    "weighted_cross_entropy_mean",
    "xavier_uniform",
]
