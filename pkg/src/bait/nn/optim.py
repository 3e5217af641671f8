"""Adam optimizer with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, ParameterError

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


@dataclass
class OptimizerState:
    """First/second-moment accumulators, shapes mirroring the parameters."""

    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    step: int = 0

    @classmethod
    def for_params(cls, params: list[np.ndarray]) -> "OptimizerState":
        return cls(
            m=[np.zeros_like(p, dtype=np.float64) for p in params],
            v=[np.zeros_like(p, dtype=np.float64) for p in params],
            step=0,
        )


def adam_step(params: list[np.ndarray], grads: list[np.ndarray],
              state: OptimizerState, lr: float):
    """One Adam update, in place on the parameter arrays.

    Moments are kept in float64 so long runs stay stable even with float32
    parameters. Returns (params, state) for call-site chaining.
    """
    if lr <= 0:
        raise ParameterError(f"learning rate must be positive, got {lr}")
    if len(params) != len(grads) or len(params) != len(state.m):
        raise DimensionError(
            f"params/grads/state lengths differ: {len(params)}/{len(grads)}/{len(state.m)}"
        )
    state.step += 1
    t = state.step
    bc1 = 1.0 - BETA1 ** t
    bc2 = 1.0 - BETA2 ** t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise DimensionError(f"grad shape {g.shape} != param shape {p.shape}")
        g64 = g.astype(np.float64)
        m *= BETA1
        m += (1.0 - BETA1) * g64
        v *= BETA2
        v += (1.0 - BETA2) * np.square(g64)
        update = (lr * (m / bc1) / (np.sqrt(v / bc2) + EPS)).astype(p.dtype)
        p -= update
    return params, state
