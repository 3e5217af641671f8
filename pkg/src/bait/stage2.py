"""Stage 2: three-way classification of related pairs.

TopKNet concatenates the NLI-head embedding with the NLI-body rows of the k
sentences most SIM-similar to the head. AgreemNet instead builds an
attention-weighted body representation (SIM-head query, SIM-body keys,
NLI-body values) and classifies [attended body | NLI-head | cosine of the
two]. Both end in a 3-way softmax over agree / disagree / discuss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .data import StanceLabel, headline_split
from .errors import ContractError, IntegrityError
from .features import PaddedBody, PairDataset
from .nn import AttentionParams, attention_batch, init_attention, mlp_forward
from .nn.autodiff import Var, concat_cols, cosine_rows
from .nn.layers import DenseLayerParams, init_mlp
from .relatednet import RelatedNetConfig, top_k_batch
from .training import (
    TrainingConfig,
    TrainResult,
    fit_model,
    predict_proba_batched,
    wrap_dense_layers,
)
from .validation import check_count, check_probability

STAGE2_CLASSES = (StanceLabel.AGR, StanceLabel.DSG, StanceLabel.DSC)


@dataclass(frozen=True)
class TopKNetConfig:
    k: int = 3
    hidden_a: int = 60
    hidden_b: int = 60
    dropout_p: float = 0.301
    nli_dim: int = 768

    def __post_init__(self):
        check_count(self.k, "k")
        check_count(self.hidden_a, "hidden_a")
        check_count(self.hidden_b, "hidden_b")
        check_count(self.nli_dim, "nli_dim")
        check_probability(self.dropout_p, "dropout_p")

    def layer_sizes(self) -> list[int]:
        return [(self.k + 1) * self.nli_dim,
                self.hidden_a, self.hidden_a, self.hidden_a,
                self.hidden_b, 3]

    def param_count(self) -> int:
        sizes = self.layer_sizes()
        return sum((i + 1) * o for i, o in zip(sizes[:-1], sizes[1:]))


@dataclass(frozen=True)
class AgreemNetConfig:
    num_heads: int = 11
    d_k: int = 64
    d_v: int = 64
    hidden_a: int = 60
    hidden_b: int = 20
    dropout_p: float = 0.105
    sim_dim: int = 384
    nli_dim: int = 768

    def __post_init__(self):
        for name in ("num_heads", "d_k", "d_v", "hidden_a", "hidden_b",
                     "sim_dim", "nli_dim"):
            check_count(getattr(self, name), name)
        check_probability(self.dropout_p, "dropout_p")

    def classifier_sizes(self) -> list[int]:
        return [2 * self.nli_dim + 1, self.hidden_a, self.hidden_a,
                self.hidden_b, 3]

    def attention_param_count(self) -> int:
        h, dk, dv = self.num_heads, self.d_k, self.d_v
        return (h * dk * self.sim_dim     # query projection
                + h * dk * self.sim_dim   # key projection
                + h * dv * self.nli_dim   # value projection
                + self.nli_dim * h * dv)  # output projection

    def param_count(self) -> int:
        sizes = self.classifier_sizes()
        dense = sum((i + 1) * o for i, o in zip(sizes[:-1], sizes[1:]))
        return self.attention_param_count() + dense


@dataclass
class TopKNetParams:
    layers: list[DenseLayerParams]

    @classmethod
    def init(cls, config: TopKNetConfig, rng: np.random.Generator) -> "TopKNetParams":
        return cls(init_mlp(config.layer_sizes(), rng))

    def count(self) -> int:
        return sum(l.n_params() for l in self.layers)

    def flat(self) -> list[np.ndarray]:
        return [a for l in self.layers for a in (l.weight, l.bias)]

    def copy(self) -> "TopKNetParams":
        return TopKNetParams([l.copy() for l in self.layers])


@dataclass
class AgreemNetParams:
    attention: AttentionParams
    layers: list[DenseLayerParams]

    @classmethod
    def init(cls, config: AgreemNetConfig, rng: np.random.Generator) -> "AgreemNetParams":
        attention = init_attention(
            q_dim=config.sim_dim, k_dim=config.sim_dim, v_dim=config.nli_dim,
            out_dim=config.nli_dim, num_heads=config.num_heads,
            d_k=config.d_k, d_v=config.d_v, rng=rng,
        )
        return cls(attention, init_mlp(config.classifier_sizes(), rng))

    def count(self) -> int:
        return self.attention.n_params() + sum(l.n_params() for l in self.layers)

    def flat(self) -> list[np.ndarray]:
        # attention projections serialize before the dense layers
        return list(self.attention.matrices()) + \
            [a for l in self.layers for a in (l.weight, l.bias)]

    def copy(self) -> "AgreemNetParams":
        return AgreemNetParams(self.attention.copy(), [l.copy() for l in self.layers])


def stage2_param_count(config) -> int:
    """Closed-form parameter total for any of the three model configs."""
    if isinstance(config, (TopKNetConfig, AgreemNetConfig, RelatedNetConfig)):
        return config.param_count()
    raise ContractError(f"unknown config type {type(config).__name__}")


def _check_mask_consistency(sim_body: PaddedBody, nli_body: PaddedBody) -> None:
    if not np.array_equal(sim_body.mask, nli_body.mask):
        raise IntegrityError("SIM and NLI bodies have different sentence masks")


def topknet_probs(views, layers, config: TopKNetConfig, mode: str = "eval",
                  rng=None, tape=None):
    idx, _ = top_k_batch(views.sim_head, views.sim_body, views.mask, config.k)
    rows = np.take_along_axis(views.nli_body, idx[:, :, None], axis=1)
    b = views.nli_head.shape[0]
    feats = np.concatenate([views.nli_head, rows.reshape(b, -1)], axis=1)
    return mlp_forward(feats, layers, config.dropout_p, mode, rng, tape)


def topknet_forward(nli_head, nli_body: PaddedBody, sim_head,
                    sim_body: PaddedBody, params: TopKNetParams,
                    config: TopKNetConfig, mode: str = "eval", rng=None
                    ) -> np.ndarray:
    """Distribution over (agree, disagree, discuss) for one pair."""
    from .features import BatchViews

    _check_mask_consistency(sim_body, nli_body)
    views = BatchViews(
        sim_head=np.asarray(sim_head)[None, :],
        nli_head=np.asarray(nli_head)[None, :],
        sim_body=sim_body.matrix[None, :, :],
        nli_body=nli_body.matrix[None, :, :],
        mask=sim_body.mask[None, :],
    )
    return topknet_probs(views, params.layers, config, mode, rng)[0]


def agreemnet_probs(views, params_like, config: AgreemNetConfig,
                    mode: str = "eval", rng=None, tape=None):
    attention = params_like.attention
    layers = params_like.layers
    attended, _ = attention_batch(views.sim_head, views.sim_body,
                                  views.nli_body, views.mask, attention, tape)
    cos = cosine_rows(views.nli_head, attended, tape)
    feats = concat_cols([attended, views.nli_head, cos], tape)
    return mlp_forward(feats, layers, config.dropout_p, mode, rng, tape)


def agreemnet_forward(nli_head, nli_body: PaddedBody, sim_head,
                      sim_body: PaddedBody, params: AgreemNetParams,
                      config: AgreemNetConfig, mode: str = "eval", rng=None
                      ) -> np.ndarray:
    """Distribution over (agree, disagree, discuss) for one pair."""
    from .features import BatchViews

    _check_mask_consistency(sim_body, nli_body)
    views = BatchViews(
        sim_head=np.asarray(sim_head)[None, :],
        nli_head=np.asarray(nli_head)[None, :],
        sim_body=sim_body.matrix[None, :, :],
        nli_body=nli_body.matrix[None, :, :],
        mask=sim_body.mask[None, :],
    )
    return agreemnet_probs(views, params, config, mode, rng)[0]


class _TopKNetCore:
    n_classes = 3

    def __init__(self, config: TopKNetConfig):
        self.config = config

    def init_params(self, rng):
        return TopKNetParams.init(self.config, rng)

    def wrap(self, params):
        return wrap_dense_layers(params.layers)

    def forward(self, views, layers_or_params, mode, rng, tape):
        layers = (layers_or_params.layers
                  if isinstance(layers_or_params, TopKNetParams)
                  else layers_or_params)
        return topknet_probs(views, layers, self.config, mode, rng, tape)

    def snapshot(self, params):
        return params.copy()


class _VarAgreemNet:
    def __init__(self, params: AgreemNetParams, layers):
        self.attention = AttentionParams(
            params.attention.num_heads, params.attention.d_k, params.attention.d_v,
            Var(params.attention.query_proj), Var(params.attention.key_proj),
            Var(params.attention.value_proj), Var(params.attention.output_proj),
        )
        self.layers = layers


class _AgreemNetCore:
    n_classes = 3

    def __init__(self, config: AgreemNetConfig):
        self.config = config

    def init_params(self, rng):
        return AgreemNetParams.init(self.config, rng)

    def wrap(self, params):
        layers, leaves = wrap_dense_layers(params.layers)
        wrapped = _VarAgreemNet(params, layers)
        attn_vars = [wrapped.attention.query_proj, wrapped.attention.key_proj,
                     wrapped.attention.value_proj, wrapped.attention.output_proj]
        return wrapped, attn_vars + leaves

    def forward(self, views, params_like, mode, rng, tape):
        return agreemnet_probs(views, params_like, self.config, mode, rng, tape)

    def snapshot(self, params):
        return params.copy()


def _check_related_only(labels: np.ndarray) -> np.ndarray:
    if np.any(labels == int(StanceLabel.UNR)):
        raise ContractError("stage-2 training received an unrelated sample")
    return labels


def train_stage2(kind: str, train: PairDataset, validation: PairDataset | None,
                 config, tcfg: TrainingConfig) -> TrainResult:
    """Train a stage-2 model on related samples only (labels 0/1/2)."""
    core = _TopKNetCore(config) if kind == "topknet" else _AgreemNetCore(config)
    y_train = _check_related_only(train.labels())
    y_val = None
    if validation is not None:
        y_val = _check_related_only(validation.labels())
    return fit_model(core, train, y_train, validation, y_val, tcfg)


class _Stage2Estimator(BaseEstimator, ClassifierMixin):
    """Common fit/predict plumbing for the two stage-2 estimators."""

    def _core(self, bundle):
        raise NotImplementedError

    def _tcfg(self) -> TrainingConfig:
        return TrainingConfig(epochs=self.epochs, batch_size=self.batch_size,
                              lr=self.lr, patience=self.patience, seed=self.seed,
                              class_weight=self.class_weight)

    def fit(self, X: PairDataset, y=None, validation: PairDataset | None = None):
        train = X
        if validation is None and self.validation_fraction:
            split = headline_split(X.samples, self.validation_fraction, self.seed)
            train = X.subset_from(split.train)
            validation = X.subset_from(split.validation)
        core = self._core(X.bundle)
        self.config_ = core.config
        y_train = _check_related_only(train.labels()) if y is None else np.asarray(y)
        y_val = (_check_related_only(validation.labels())
                 if validation is not None else None)
        result = fit_model(core, train, y_train, validation, y_val, self._tcfg())
        self.params_ = result.params
        self.history_ = result.history
        self.best_epoch_ = result.best_epoch
        self.classes_ = np.array([int(c) for c in STAGE2_CLASSES])
        self._core_ = type(core)(self.config_)
        return self

    def predict_proba(self, X: PairDataset) -> np.ndarray:
        return predict_proba_batched(self._core_, self.params_, X)

    def predict(self, X: PairDataset) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


class TopKNetClassifier(_Stage2Estimator):
    def __init__(self, k=3, hidden_a=60, hidden_b=60, dropout=0.301,
                 lr=1e-3, batch_size=64, epochs=30, patience=5,
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

    def _core(self, bundle):
        return _TopKNetCore(TopKNetConfig(self.k, self.hidden_a, self.hidden_b,
                                          self.dropout, bundle.nli_dim))


class AgreemNetClassifier(_Stage2Estimator):
    def __init__(self, num_heads=11, d_k=64, d_v=64, hidden_a=60, hidden_b=20,
                 dropout=0.105, lr=1e-3, batch_size=128, epochs=30, patience=5,
                 class_weight=None, validation_fraction=0.3, seed=0):
        self.num_heads = num_heads
        self.d_k = d_k
        self.d_v = d_v
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

    def _core(self, bundle):
        return _AgreemNetCore(AgreemNetConfig(
            self.num_heads, self.d_k, self.d_v, self.hidden_a, self.hidden_b,
            self.dropout, bundle.sim_dim, bundle.nli_dim))
