"""Dense layer parameter containers and initialization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError


@dataclass
class DenseLayerParams:
    """Weights of one fully-connected layer: weight (out, in), bias (out,)."""

    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        self.weight = np.asarray(self.weight)
        self.bias = np.asarray(self.bias)
        if self.weight.ndim != 2 or self.bias.ndim != 1:
            raise DimensionError(
                f"expected 2-D weight and 1-D bias, got {self.weight.shape} / {self.bias.shape}"
            )
        if self.bias.shape[0] != self.weight.shape[0]:
            raise DimensionError(
                f"bias length {self.bias.shape[0]} != weight rows {self.weight.shape[0]}"
            )

    @property
    def n_in(self) -> int:
        return self.weight.shape[1]

    @property
    def n_out(self) -> int:
        return self.weight.shape[0]

    def n_params(self) -> int:
        return self.weight.size + self.bias.size

    def copy(self) -> "DenseLayerParams":
        return DenseLayerParams(self.weight.copy(), self.bias.copy())


def kaiming_uniform(n_in: int, n_out: int, rng: np.random.Generator,
                    dtype=np.float32) -> DenseLayerParams:
    """He-uniform init, the standard choice ahead of ReLU."""
    bound = np.sqrt(6.0 / n_in)
    weight = rng.uniform(-bound, bound, size=(n_out, n_in)).astype(dtype)
    bias = np.zeros(n_out, dtype=dtype)
    return DenseLayerParams(weight, bias)


def xavier_uniform(n_in: int, n_out: int, rng: np.random.Generator,
                   dtype=np.float32) -> np.ndarray:
    """Glorot-uniform matrix (no bias), used for output and projection layers."""
    bound = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-bound, bound, size=(n_out, n_in)).astype(dtype)


def init_mlp(sizes: list[int], rng: np.random.Generator,
             dtype=np.float32) -> list[DenseLayerParams]:
    """Initialize a chain of dense layers for the given width sequence.

    Hidden layers get Kaiming init (they feed ReLUs); the final layer gets
    Xavier init (it feeds a softmax).
    """
    layers = []
    for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        if i == len(sizes) - 2:
            weight = xavier_uniform(n_in, n_out, rng, dtype)
            layers.append(DenseLayerParams(weight, np.zeros(n_out, dtype=dtype)))
        else:
            layers.append(kaiming_uniform(n_in, n_out, rng, dtype))
    return layers
