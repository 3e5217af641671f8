"""Dataset schemas: stance labels, sample pairs, CSV loaders, splitting.

The CSV formats are the challenge-distribution ones: stances files carry
``Headline,Body ID,Stance`` and bodies files carry ``Body ID,articleBody``,
UTF-8 with RFC-4180 quoting.
"""

from __future__ import annotations

import csv
import enum
import unicodedata
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrityError, ParameterError, ParseError

N_CLASSES = 4


class StanceLabel(enum.IntEnum):
    """The four stances, in the canonical class order used everywhere."""

    AGR = 0
    DSG = 1
    DSC = 2
    UNR = 3

    @classmethod
    def from_text(cls, text: str) -> "StanceLabel":
        try:
            return _TEXT_TO_LABEL[text.strip().lower()]
        except KeyError:
            raise ParseError(f"unknown stance {text!r}") from None

    @property
    def text(self) -> str:
        return _LABEL_TO_TEXT[self]


_LABEL_TO_TEXT = {
    StanceLabel.AGR: "agree",
    StanceLabel.DSG: "disagree",
    StanceLabel.DSC: "discuss",
    StanceLabel.UNR: "unrelated",
}
_TEXT_TO_LABEL = {v: k for k, v in _LABEL_TO_TEXT.items()}

RELATED_LABELS = (StanceLabel.AGR, StanceLabel.DSG, StanceLabel.DSC)


@dataclass(frozen=True)
class SamplePair:
    headline_id: int
    body_id: int
    stance: StanceLabel


def normalize_headline(text: str) -> str:
    """Headline identity: NFC normalization plus whitespace trimming."""
    return unicodedata.normalize("NFC", text).strip()


def load_stances_csv(path, headline_table: list[str] | None = None
                     ) -> tuple[list[SamplePair], list[str]]:
    """Read a stances CSV into sample pairs plus a headline id table.

    Headline ids are assigned by order of first appearance. Passing an
    existing ``headline_table`` (e.g. a store sidecar) makes ids resolve
    against it, with unseen headlines appended.
    """
    headlines = list(headline_table) if headline_table is not None else []
    index = {normalize_headline(h): i for i, h in enumerate(headlines)}
    samples = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        _require_columns(reader, ("Headline", "Body ID", "Stance"), path)
        for row_no, row in enumerate(reader, start=2):
            text = normalize_headline(row["Headline"])
            if text not in index:
                index[text] = len(headlines)
                headlines.append(text)
            try:
                body_id = int(row["Body ID"])
            except (TypeError, ValueError):
                raise ParseError(f"bad Body ID {row['Body ID']!r}", line=row_no) from None
            try:
                stance = StanceLabel.from_text(row["Stance"])
            except ParseError as exc:
                raise ParseError(str(exc), line=row_no) from None
            samples.append(SamplePair(index[text], body_id, stance))
    return samples, headlines


def load_bodies_csv(path) -> dict[int, str]:
    """Read a bodies CSV into an id -> text map; duplicate ids are rejected."""
    bodies: dict[int, str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        _require_columns(reader, ("Body ID", "articleBody"), path)
        for row_no, row in enumerate(reader, start=2):
            try:
                body_id = int(row["Body ID"])
            except (TypeError, ValueError):
                raise ParseError(f"bad Body ID {row['Body ID']!r}", line=row_no) from None
            if body_id in bodies:
                raise IntegrityError(f"duplicate Body ID {body_id}")
            bodies[body_id] = row["articleBody"]
    return bodies


def _require_columns(reader: csv.DictReader, columns, path):
    have = reader.fieldnames or []
    missing = [c for c in columns if c not in have]
    if missing:
        raise ParseError(f"{path}: missing column(s) {', '.join(missing)}", line=1)


@dataclass
class ClassDistribution:
    counts: np.ndarray       # (4,) ints, class order AGR, DSG, DSC, UNR
    proportions: np.ndarray  # (4,) floats summing to 1

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def class_distribution(samples) -> ClassDistribution:
    if len(samples) == 0:
        raise ParameterError("class_distribution needs a nonempty sample list")
    counts = np.zeros(N_CLASSES, dtype=np.int64)
    for s in samples:
        counts[int(s.stance)] += 1
    return ClassDistribution(counts, counts / counts.sum())


@dataclass
class DatasetSplit:
    train: list[SamplePair]
    validation: list[SamplePair]
    validation_headline_ids: frozenset[int] = field(default_factory=frozenset)


def headline_split(samples, fraction: float = 0.30, seed: int = 0) -> DatasetSplit:
    """Headline-disjoint split: a seeded random ``fraction`` of distinct
    headline ids moves to validation together with all their samples."""
    if not 0.0 < fraction < 1.0:
        raise ParameterError(f"fraction must be in (0, 1), got {fraction}")
    ids = sorted({s.headline_id for s in samples})
    if len(ids) < 2:
        raise ParameterError(f"need at least 2 distinct headlines, got {len(ids)}")
    n_val = int(round(fraction * len(ids)))
    n_val = min(max(n_val, 1), len(ids) - 1)
    rng = np.random.default_rng(seed)
    val_ids = frozenset(int(i) for i in rng.choice(ids, size=n_val, replace=False))
    train = [s for s in samples if s.headline_id not in val_ids]
    val = [s for s in samples if s.headline_id in val_ids]
    return DatasetSplit(train, val, val_ids)


def write_stances_csv(path, samples, headlines: list[str]) -> None:
    """Write pairs back out in the stances schema."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Headline", "Body ID", "Stance"])
        for s in samples:
            writer.writerow([headlines[s.headline_id], s.body_id, s.stance.text])


def stances_array(samples) -> np.ndarray:
    return np.array([int(s.stance) for s in samples], dtype=np.int64)


def related_mask(samples) -> np.ndarray:
    return np.array([s.stance != StanceLabel.UNR for s in samples], dtype=bool)
