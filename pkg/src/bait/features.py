"""Body padding/truncation and lazy per-pair embedding views.

Bodies are padded with all-zero rows (or truncated) to a fixed length so
batches stack; an explicit boolean mask marks real sentences. Consumers must
respect the mask; padded rows never enter the math.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .data import SamplePair, stances_array
from .errors import DegenerateInputError, DimensionError, IntegrityError
from .store import EmbeddingStore, Space, Unit

log = logging.getLogger(__name__)

BODY_LEN = 50


@dataclass
class PaddedBody:
    matrix: np.ndarray  # (length, dim) float32, zero rows where mask is False
    mask: np.ndarray    # (length,) bool, True = real sentence, true-prefix

    def __post_init__(self):
        if not self.mask.any():
            raise DegenerateInputError("padded body with no real sentences")

    @property
    def n_real(self) -> int:
        return int(self.mask.sum())


def pad_truncate_body(body: np.ndarray, length: int = BODY_LEN) -> PaddedBody:
    """Pad with zero rows up to ``length`` or keep only the first ``length``."""
    body = np.asarray(body)
    if body.ndim != 2:
        raise DimensionError(f"body must be (n, dim), got shape {body.shape}")
    n = body.shape[0]
    if n == 0:
        raise DegenerateInputError("body has zero sentences")
    dtype = body.dtype if np.issubdtype(body.dtype, np.floating) else np.float32
    matrix = np.zeros((length, body.shape[1]), dtype=dtype)
    mask = np.zeros(length, dtype=bool)
    keep = min(n, length)
    matrix[:keep] = body[:keep]
    mask[:keep] = True
    return PaddedBody(matrix, mask)


@dataclass
class EmbeddingBundle:
    """The four store views a pair needs."""

    sim_head: EmbeddingStore
    nli_head: EmbeddingStore
    sim_body: EmbeddingStore
    nli_body: EmbeddingStore

    def __post_init__(self):
        expected = [
            ("sim_head", self.sim_head, Space.SIM, Unit.HEAD),
            ("nli_head", self.nli_head, Space.NLI, Unit.HEAD),
            ("sim_body", self.sim_body, Space.SIM, Unit.BODY),
            ("nli_body", self.nli_body, Space.NLI, Unit.BODY),
        ]
        for name, store, space, unit in expected:
            if store.space != space or store.unit != unit:
                raise IntegrityError(
                    f"{name} store is {store.space.name}-{store.unit.name}, "
                    f"expected {space.name}-{unit.name}"
                )
        if self.sim_head.dim != self.sim_body.dim:
            raise IntegrityError(
                f"SIM dims differ: head {self.sim_head.dim} vs body {self.sim_body.dim}"
            )
        if self.nli_head.dim != self.nli_body.dim:
            raise IntegrityError(
                f"NLI dims differ: head {self.nli_head.dim} vs body {self.nli_body.dim}"
            )

    @property
    def sim_dim(self) -> int:
        return self.sim_head.dim

    @property
    def nli_dim(self) -> int:
        return self.nli_head.dim


@dataclass
class BatchViews:
    """Materialized embeddings for a batch of pairs."""

    sim_head: np.ndarray  # (B, sim_dim)
    nli_head: np.ndarray  # (B, nli_dim)
    sim_body: np.ndarray  # (B, L, sim_dim)
    nli_body: np.ndarray  # (B, L, nli_dim)
    mask: np.ndarray      # (B, L) bool

    def __len__(self) -> int:
        return self.sim_head.shape[0]


class PairDataset:
    """Sample pairs bound to embedding stores, materialized per batch.

    Samples whose body has zero sentences are dropped with a warning at
    construction; every surviving id is checked to resolve in all four
    stores, and the SIM/NLI body sentence counts must agree.
    """

    def __init__(self, samples: list[SamplePair], bundle: EmbeddingBundle,
                 body_len: int = BODY_LEN):
        self.bundle = bundle
        self.body_len = body_len
        kept = []
        dropped = 0
        for s in samples:
            for store, attr, key in (
                (bundle.sim_head, "sim_head", s.headline_id),
                (bundle.nli_head, "nli_head", s.headline_id),
                (bundle.sim_body, "sim_body", s.body_id),
                (bundle.nli_body, "nli_body", s.body_id),
            ):
                if key not in store:
                    raise IntegrityError(f"{attr} store has no record for id {key}")
            n_sim = bundle.sim_body.matrix(s.body_id).shape[0]
            n_nli = bundle.nli_body.matrix(s.body_id).shape[0]
            if n_sim != n_nli:
                raise IntegrityError(
                    f"body {s.body_id}: SIM has {n_sim} sentences, NLI has {n_nli}"
                )
            if n_sim == 0:
                dropped += 1
                continue
            kept.append(s)
        if dropped:
            log.warning("dropped %d sample(s) with zero-sentence bodies", dropped)
        self.samples = kept

    def __len__(self) -> int:
        return len(self.samples)

    def labels(self) -> np.ndarray:
        return stances_array(self.samples)

    def subset(self, indices) -> "PairDataset":
        return self.subset_from([self.samples[i] for i in indices])

    def subset_from(self, samples: list[SamplePair]) -> "PairDataset":
        """New dataset over the same stores; samples must already be valid."""
        sub = PairDataset.__new__(PairDataset)
        sub.bundle = self.bundle
        sub.body_len = self.body_len
        sub.samples = list(samples)
        return sub

    def views(self, indices=None) -> BatchViews:
        if indices is None:
            indices = range(len(self.samples))
        b = self.bundle
        sim_head = np.stack([b.sim_head.vector(self.samples[i].headline_id) for i in indices])
        nli_head = np.stack([b.nli_head.vector(self.samples[i].headline_id) for i in indices])
        n = len(sim_head)
        sim_body = np.zeros((n, self.body_len, b.sim_dim), dtype=np.float32)
        nli_body = np.zeros((n, self.body_len, b.nli_dim), dtype=np.float32)
        mask = np.zeros((n, self.body_len), dtype=bool)
        for row, i in enumerate(indices):
            body_id = self.samples[i].body_id
            padded_sim = pad_truncate_body(b.sim_body.matrix(body_id), self.body_len)
            padded_nli = pad_truncate_body(b.nli_body.matrix(body_id), self.body_len)
            sim_body[row] = padded_sim.matrix
            nli_body[row] = padded_nli.matrix
            mask[row] = padded_sim.mask
        return BatchViews(sim_head, nli_head, sim_body, nli_body, mask)
