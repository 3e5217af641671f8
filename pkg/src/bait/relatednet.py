"""Stage 1: related-vs-unrelated classification from SIM embeddings.

The classifier input is the SIM-head embedding concatenated with the k
most head-similar SIM-body sentence embeddings (similarity-descending), fed
through an MLP with four hidden layers and a binary softmax. A training-free
threshold baseline over mean top-5 similarities is included for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .data import StanceLabel, headline_split
from .errors import DimensionError, ParameterError
from .features import PaddedBody, PairDataset
from .nn import mlp_forward
from .nn.functional import cosine_matrix
from .nn.layers import DenseLayerParams, init_mlp
from .training import (
    TrainingConfig,
    TrainResult,
    fit_model,
    predict_proba_batched,
    wrap_dense_layers,
)
from .validation import check_count, check_probability

UNRELATED, RELATED = 0, 1  # binary class order; probs[:, 1] = P(related)


@dataclass(frozen=True)
class RelatedNetConfig:
    k: int = 4
    hidden_a: int = 600
    hidden_b: int = 600
    dropout_p: float = 0.277
    sim_dim: int = 384

    def __post_init__(self):
        check_count(self.k, "k")
        check_count(self.hidden_a, "hidden_a")
        check_count(self.hidden_b, "hidden_b")
        check_count(self.sim_dim, "sim_dim")
        check_probability(self.dropout_p, "dropout_p")

    def layer_sizes(self) -> list[int]:
        return [(self.k + 1) * self.sim_dim,
                self.hidden_a, self.hidden_a, self.hidden_a,
                self.hidden_b, 2]

    def param_count(self) -> int:
        sizes = self.layer_sizes()
        return sum((i + 1) * o for i, o in zip(sizes[:-1], sizes[1:]))


@dataclass
class RelatedNetParams:
    layers: list[DenseLayerParams]

    @classmethod
    def init(cls, config: RelatedNetConfig, rng: np.random.Generator) -> "RelatedNetParams":
        return cls(init_mlp(config.layer_sizes(), rng))

    def count(self) -> int:
        return sum(l.n_params() for l in self.layers)

    def flat(self) -> list[np.ndarray]:
        return [a for l in self.layers for a in (l.weight, l.bias)]

    def copy(self) -> "RelatedNetParams":
        return RelatedNetParams([l.copy() for l in self.layers])


def top_k_similar(sim_head: np.ndarray, body: PaddedBody, k: int
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Indices of the k unmasked body rows most cosine-similar to the head.

    Similarity-descending; ties break toward the lower sentence index; when
    fewer than k rows are real, the last real index is repeated so the
    output width stays fixed.
    """
    check_count(k, "k")
    idx, scores = top_k_batch(np.asarray(sim_head)[None, :],
                              body.matrix[None, :, :],
                              body.mask[None, :], k)
    return idx[0], scores[0]


def top_k_batch(sim_head: np.ndarray, sim_body: np.ndarray, mask: np.ndarray,
                k: int) -> tuple[np.ndarray, np.ndarray]:
    """Batched top-k: sim_head (B, D), sim_body (B, L, D), mask (B, L)."""
    head64 = sim_head.astype(np.float64)
    body64 = sim_body.astype(np.float64)
    dots = np.einsum("bd,bld->bl", head64, body64, optimize=True)
    hn = np.sqrt((head64 * head64).sum(axis=1, keepdims=True))
    bn = np.sqrt((body64 * body64).sum(axis=2))
    denom = hn * bn
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = np.where(denom > 0, dots / denom, 0.0)
    sims = np.where(mask, sims, -np.inf)
    order = np.argsort(-sims, axis=1, kind="stable")
    n_real = mask.sum(axis=1)
    # rank positions past the last real sentence repeat the last real index
    positions = np.arange(k)[None, :]
    last_real = np.clip(n_real - 1, 0, None)[:, None]
    idx = np.take_along_axis(order, np.minimum(positions, last_real), axis=1)
    scores = np.take_along_axis(sims, idx, axis=1)
    return idx, scores


def build_relatednet_features(views, k: int) -> np.ndarray:
    """[SIM-head | top-k SIM-body rows], similarity-descending, (B, (k+1)*D)."""
    idx, _ = top_k_batch(views.sim_head, views.sim_body, views.mask, k)
    rows = np.take_along_axis(views.sim_body, idx[:, :, None], axis=1)
    b = views.sim_head.shape[0]
    return np.concatenate([views.sim_head, rows.reshape(b, -1)], axis=1)


def relatednet_probs(views, layers, config: RelatedNetConfig, mode: str = "eval",
                     rng=None, tape=None):
    feats = build_relatednet_features(views, config.k)
    if feats.shape[1] != config.layer_sizes()[0]:
        raise DimensionError(
            f"feature width {feats.shape[1]} != configured input {config.layer_sizes()[0]}"
        )
    return mlp_forward(feats, layers, config.dropout_p, mode, rng, tape)


def relatednet_forward(sim_head: np.ndarray, body: PaddedBody,
                       params: RelatedNetParams, config: RelatedNetConfig,
                       mode: str = "eval", rng=None) -> float:
    """P(related) for one pair."""
    from .features import BatchViews

    views = BatchViews(
        sim_head=np.asarray(sim_head)[None, :],
        nli_head=np.zeros((1, 0), dtype=np.float32),
        sim_body=body.matrix[None, :, :],
        nli_body=np.zeros((1, body.matrix.shape[0], 0), dtype=np.float32),
        mask=body.mask[None, :],
    )
    probs = relatednet_probs(views, params.layers, config, mode, rng)
    return float(probs[0, RELATED])


def threshold_baseline(dataset: PairDataset, k: int = 5) -> tuple[float, float]:
    """Best related-F1 achievable by thresholding mean top-k similarity.

    Returns (threshold, f1) where predicting related = score >= threshold.
    """
    if len(dataset) == 0:
        raise ParameterError("threshold_baseline needs a nonempty dataset")
    scores = np.empty(len(dataset))
    for lo in range(0, len(dataset), 512):
        idx = range(lo, min(lo + 512, len(dataset)))
        views = dataset.views(idx)
        _, top_scores = top_k_batch(views.sim_head, views.sim_body, views.mask, k)
        scores[lo:lo + len(top_scores)] = top_scores.mean(axis=1)
    related = dataset.labels() != int(StanceLabel.UNR)
    return best_f1_threshold(scores, related)


def best_f1_threshold(scores: np.ndarray, positive: np.ndarray) -> tuple[float, float]:
    """Sweep observed score values; maximize F1 of the positive class."""
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    tp = np.cumsum(positive[order])
    predicted = np.arange(1, len(scores) + 1)
    total_pos = positive.sum()
    f1 = 2 * tp / (predicted + total_pos)  # = 2TP / (2TP + FP + FN)
    # a threshold at score s means "every sample scoring >= s is related":
    # only positions where the next score is strictly smaller are realizable
    realizable = np.ones(len(scores), dtype=bool)
    realizable[:-1] = sorted_scores[:-1] > sorted_scores[1:]
    f1 = np.where(realizable, f1, -1.0)
    best = int(np.argmax(f1))
    return float(sorted_scores[best]), float(f1[best])


class _RelatedNetCore:
    n_classes = 2

    def __init__(self, config: RelatedNetConfig):
        self.config = config

    def init_params(self, rng):
        return RelatedNetParams.init(self.config, rng)

    def wrap(self, params):
        return wrap_dense_layers(params.layers)

    def forward(self, views, layers_or_params, mode, rng, tape):
        layers = (layers_or_params.layers
                  if isinstance(layers_or_params, RelatedNetParams)
                  else layers_or_params)
        return relatednet_probs(views, layers, self.config, mode, rng, tape)

    def snapshot(self, params):
        return params.copy()


def train_relatednet(train: PairDataset, validation: PairDataset | None,
                     config: RelatedNetConfig, tcfg: TrainingConfig
                     ) -> TrainResult:
    """Train on binary related labels derived from the stances."""
    y_train = (train.labels() != int(StanceLabel.UNR)).astype(np.int64)
    y_val = None
    if validation is not None:
        y_val = (validation.labels() != int(StanceLabel.UNR)).astype(np.int64)
    return fit_model(_RelatedNetCore(config), train, y_train, validation, y_val, tcfg)


class RelatedNetClassifier(BaseEstimator, ClassifierMixin):
    """sklearn-style estimator for the stage-1 binary decision.

    ``X`` is a PairDataset; ``y`` defaults to related = stance != unrelated.
    """

    def __init__(self, k=4, hidden_a=600, hidden_b=600, dropout=0.277,
                 lr=1e-4, batch_size=32, epochs=30, patience=5,
                 class_weight=None, validation_fraction=0.3, seed=0):
        self.k = k
        self.hidden_a = hidden_a
        self.hidden_b = hidden_b
        self.dropout = dropout
        self.lr = lr
        self.batch_size = batch_size
        self.epochs = epochs
        self.patience = patience
        self.class_weight = class_weight
        self.validation_fraction = validation_fraction
        self.seed = seed

    def _config(self, sim_dim: int) -> RelatedNetConfig:
        return RelatedNetConfig(self.k, self.hidden_a, self.hidden_b,
                                self.dropout, sim_dim)

    def _tcfg(self) -> TrainingConfig:
        return TrainingConfig(epochs=self.epochs, batch_size=self.batch_size,
                              lr=self.lr, patience=self.patience, seed=self.seed,
                              class_weight=self.class_weight)

    def fit(self, X: PairDataset, y=None, validation: PairDataset | None = None):
        train = X
        if validation is None and self.validation_fraction:
            split = headline_split(X.samples, self.validation_fraction, self.seed)
            train, validation = X.subset_from(split.train), X.subset_from(split.validation)
        self.config_ = self._config(X.bundle.sim_dim)
        result = train_relatednet(train, validation, self.config_, self._tcfg())
        self.params_ = result.params
        self.history_ = result.history
        self.best_epoch_ = result.best_epoch
        self.classes_ = np.array([UNRELATED, RELATED])
        return self

    def predict_proba(self, X: PairDataset) -> np.ndarray:
        return predict_proba_batched(_RelatedNetCore(self.config_), self.params_, X)

    def predict(self, X: PairDataset) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)
