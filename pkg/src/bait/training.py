"""Shared minibatch training loop: Adam, early stopping, seeded determinism.

Model modules plug in through a small core adapter (init_params / wrap /
forward); the loop owns batching, the weighted log-loss, validation scoring
by unweighted average class accuracy, and best-parameter selection.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .features import PairDataset
from .nn import Tape, Var, adam_step, value_of, weighted_cross_entropy_mean
from .nn.optim import OptimizerState

log = logging.getLogger(__name__)


@dataclass
class TrainingConfig:
    epochs: int = 30
    batch_size: int = 32
    lr: float = 1e-3
    patience: int = 5
    seed: int = 0
    class_weight: np.ndarray | None = None

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ParameterError("epochs and batch_size must be >= 1")
        if self.lr <= 0:
            raise ParameterError(f"learning rate must be positive, got {self.lr}")


class VarLayer:
    """Dense layer view whose weight/bias are taped Vars sharing the buffers."""

    __slots__ = ("weight", "bias")

    def __init__(self, layer):
        self.weight = Var(layer.weight)
        self.bias = Var(layer.bias)


def wrap_dense_layers(layers) -> tuple[list[VarLayer], list[Var]]:
    wrapped = [VarLayer(l) for l in layers]
    flat = [v for w in wrapped for v in (w.weight, w.bias)]
    return wrapped, flat


@dataclass
class TrainResult:
    params: object
    history: list[dict] = field(default_factory=list)
    best_epoch: int = -1
    best_metric: float = float("nan")


def unweighted_average_class_accuracy(y_true, y_pred) -> float:
    """Mean per-class recall over the classes present in y_true."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    recalls = []
    for c in np.unique(y_true):
        sel = y_true == c
        recalls.append(float(np.mean(y_pred[sel] == c)))
    return float(np.mean(recalls))


def predict_proba_batched(core, params, dataset: PairDataset,
                          batch_size: int = 256) -> np.ndarray:
    chunks = []
    for lo in range(0, len(dataset), batch_size):
        idx = range(lo, min(lo + batch_size, len(dataset)))
        views = dataset.views(idx)
        probs = core.forward(views, params, mode="eval", rng=None, tape=None)
        chunks.append(value_of(probs))
    return np.concatenate(chunks, axis=0)


def fit_model(core, train: PairDataset, y_train: np.ndarray,
              validation: PairDataset | None, y_val: np.ndarray | None,
              tcfg: TrainingConfig) -> TrainResult:
    if len(train) == 0:
        raise ParameterError("training split is empty")
    y_train = np.asarray(y_train)
    if len(y_train) != len(train):
        raise ParameterError(
            f"{len(y_train)} labels for {len(train)} training samples"
        )

    rng = np.random.default_rng(tcfg.seed)
    params = core.init_params(rng)
    wrapped, leaves = core.wrap(params)
    buffers = [v.value for v in leaves]
    state = OptimizerState.for_params(buffers)
    weights = (np.ones(core.n_classes, dtype=np.float64)
               if tcfg.class_weight is None
               else np.asarray(tcfg.class_weight, dtype=np.float64))
    if weights.shape != (core.n_classes,):
        raise ParameterError(
            f"class_weight must have {core.n_classes} entries, got {weights.shape}"
        )

    n = len(train)
    best = TrainResult(params=core.snapshot(params), history=[])
    epochs_since_best = 0
    for epoch in range(tcfg.epochs):
        order = rng.permutation(n)
        losses = []
        for lo in range(0, n, tcfg.batch_size):
            idx = order[lo:lo + tcfg.batch_size]
            views = train.views(idx)
            for v in leaves:
                v.zero_grad()
            tape = Tape()
            probs = core.forward(views, wrapped, mode="train", rng=rng, tape=tape)
            loss = weighted_cross_entropy_mean(probs, y_train[idx], weights, tape)
            tape.backward(loss)
            grads = [v.grad if v.grad is not None else np.zeros_like(v.value)
                     for v in leaves]
            adam_step(buffers, grads, state, tcfg.lr)
            losses.append(float(value_of(loss)))
        entry = {"epoch": epoch, "train_loss": float(np.mean(losses))}

        if validation is not None and len(validation) > 0:
            val_probs = predict_proba_batched(core, params, validation)
            metric = unweighted_average_class_accuracy(
                y_val, np.argmax(val_probs, axis=1)
            )
            entry["val_uaca"] = metric
            if best.best_epoch < 0 or metric > best.best_metric:
                best.best_epoch = epoch
                best.best_metric = metric
                best.params = core.snapshot(params)
                epochs_since_best = 0
            else:
                epochs_since_best += 1
        best.history.append(entry)
        log.debug("epoch %d: %s", epoch, entry)
        if validation is not None and epochs_since_best >= tcfg.patience:
            break

    if validation is None or len(validation) == 0:
        best.params = core.snapshot(params)
        best.best_epoch = len(best.history) - 1
    return best


def deep_copy_params(params):
    return copy.deepcopy(params)
