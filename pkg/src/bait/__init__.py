"""Hierarchical news stance detection over frozen sentence embeddings.

Two-stage classification (related-vs-unrelated, then agree/disagree/discuss)
trained from scratch on precomputed SIM/NLI sentence embeddings, with
class-imbalance augmentation and Gaussian-process hyperparameter search.
"""

from .data import SamplePair, StanceLabel
from .features import EmbeddingBundle, PaddedBody, PairDataset, pad_truncate_body
from .metrics import EvaluationReport, confusion_matrix, evaluate, fnc_score
from .pipeline import BaitModel, HierarchicalStanceClassifier, bait_predict_batch
from .relatednet import RelatedNetClassifier, RelatedNetConfig, threshold_baseline
from .stage2 import (
    AgreemNetClassifier,
    AgreemNetConfig,
    TopKNetClassifier,
    TopKNetConfig,
    stage2_param_count,
)
from .store import EmbeddingStore, load_embedding_store, write_embedding_store

__version__ = "0.1.0"

__all__ = [
    "AgreemNetClassifier",
    "AgreemNetConfig",
    "BaitModel",
    "EmbeddingBundle",
    "EmbeddingStore",
    "EvaluationReport",
    "HierarchicalStanceClassifier",
    "PaddedBody",
    "PairDataset",
    "RelatedNetClassifier",
    "RelatedNetConfig",
    "SamplePair",
    "StanceLabel",
    "TopKNetClassifier",
    "TopKNetConfig",
    "bait_predict_batch",
    "confusion_matrix",
    "evaluate",
    "fnc_score",
    "load_embedding_store",
    "pad_truncate_body",
    "stage2_param_count",
    "threshold_baseline",
    "write_embedding_store",
]
