"""Hierarchical composition: stage-1 gate, then stage-2 refinement.

A pair first goes through the related-vs-unrelated classifier; below the
decision threshold the prediction is unrelated and the procedure stops,
otherwise the stage-2 model picks among agree / disagree / discuss
(ties broken in that order).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .data import StanceLabel
from .errors import IntegrityError, ParameterError
from .features import PairDataset
from .relatednet import RELATED, RelatedNetClassifier, RelatedNetConfig, RelatedNetParams
from .stage2 import (
    AgreemNetClassifier,
    AgreemNetConfig,
    AgreemNetParams,
    TopKNetClassifier,
    TopKNetConfig,
    TopKNetParams,
    _AgreemNetCore,
    _TopKNetCore,
)
from .relatednet import _RelatedNetCore
from .training import predict_proba_batched

STAGE2_TO_STANCE = np.array([int(StanceLabel.AGR), int(StanceLabel.DSG),
                             int(StanceLabel.DSC)])


@dataclass
class BaitModel:
    """Bundled parameters of both stages plus the gating threshold."""

    relatednet_config: RelatedNetConfig
    relatednet_params: RelatedNetParams
    stage2_kind: str  # "topknet" | "agreemnet"
    stage2_config: "TopKNetConfig | AgreemNetConfig"
    stage2_params: "TopKNetParams | AgreemNetParams"
    threshold: float = 0.5

    def __post_init__(self):
        if self.stage2_kind not in ("topknet", "agreemnet"):
            raise ParameterError(f"unknown stage-2 kind {self.stage2_kind!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ParameterError(f"threshold must be in [0, 1], got {self.threshold}")

    def _stage2_core(self):
        return (_TopKNetCore(self.stage2_config) if self.stage2_kind == "topknet"
                else _AgreemNetCore(self.stage2_config))


def bait_predict_batch(model: BaitModel, dataset: PairDataset) -> np.ndarray:
    """Stance predictions (ints in class order) for every pair in the dataset."""
    if dataset.bundle.sim_head.dim != model.relatednet_config.sim_dim:
        raise IntegrityError(
            f"stores carry SIM dim {dataset.bundle.sim_head.dim}, model expects "
            f"{model.relatednet_config.sim_dim}"
        )
    related_probs = predict_proba_batched(
        _RelatedNetCore(model.relatednet_config), model.relatednet_params, dataset
    )[:, RELATED]
    predictions = np.full(len(dataset), int(StanceLabel.UNR), dtype=np.int64)
    gate = related_probs >= model.threshold  # >= means related at the boundary
    if gate.any():
        subset = dataset.subset(np.flatnonzero(gate))
        stage2_probs = predict_proba_batched(
            model._stage2_core(), model.stage2_params, subset
        )
        predictions[gate] = STAGE2_TO_STANCE[np.argmax(stage2_probs, axis=1)]
    return predictions


def bait_predict(model: BaitModel, dataset: PairDataset, index: int) -> StanceLabel:
    """Predict one pair; argmax ties fall to the earlier class in AGR<DSG<DSC."""
    return StanceLabel(int(bait_predict_batch(model, dataset.subset([index]))[0]))


class HierarchicalStanceClassifier(BaseEstimator, ClassifierMixin):
    """Meta-estimator: fits the stage-1 gate on everything and the stage-2
    model on the related subset, then predicts hierarchically."""

    def __init__(self, relatednet: RelatedNetClassifier | None = None,
                 stage2: "TopKNetClassifier | AgreemNetClassifier | None" = None,
                 threshold: float = 0.5):
        self.relatednet = relatednet
        self.stage2 = stage2
        self.threshold = threshold

    def fit(self, X: PairDataset, y=None):
        relatednet = self.relatednet if self.relatednet is not None \
            else RelatedNetClassifier()
        stage2 = self.stage2 if self.stage2 is not None else TopKNetClassifier()
        relatednet.fit(X)
        related_idx = np.flatnonzero(X.labels() != int(StanceLabel.UNR))
        stage2.fit(X.subset(related_idx))
        kind = "topknet" if isinstance(stage2, TopKNetClassifier) else "agreemnet"
        self.model_ = BaitModel(
            relatednet_config=relatednet.config_,
            relatednet_params=relatednet.params_,
            stage2_kind=kind,
            stage2_config=stage2.config_,
            stage2_params=stage2.params_,
            threshold=self.threshold,
        )
        self.classes_ = np.array([int(c) for c in StanceLabel])
        self.relatednet_ = relatednet
        self.stage2_ = stage2
        return self

    def predict(self, X: PairDataset) -> np.ndarray:
        return bait_predict_batch(self.model_, X)
