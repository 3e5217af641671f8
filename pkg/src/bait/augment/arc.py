"""Adapting the argument-comprehension corpus into the four-stance schema.

Each user post becomes an article body; its paired claim becomes the
headline. A post supporting its claim is agree, supporting the opposing
claim is disagree, and supporting neither is discuss. Unrelated samples are
manufactured by seeded cross-topic pairing until they make up 75% of the
adapted corpus.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..data import SamplePair, StanceLabel, normalize_headline
from ..errors import ParameterError, ParseError

_SUPPORT_TO_STANCE = {
    "claim": StanceLabel.AGR,
    "opposing": StanceLabel.DSG,
    "neither": StanceLabel.DSC,
}
_COLUMNS = ("topic", "post", "claim", "opposing_claim", "support")


@dataclass(frozen=True)
class ArcRecord:
    topic: str
    post: str
    claim: str
    opposing_claim: str
    support: str  # claim | opposing | neither


def load_arc_csv(path) -> list[ArcRecord]:
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in _COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ParseError(f"{path}: missing column(s) {', '.join(missing)}", line=1)
        for row_no, row in enumerate(reader, start=2):
            values = {c: (row.get(c) or "").strip() for c in _COLUMNS}
            empty = [c for c in _COLUMNS if not values[c]]
            if empty:
                raise ParseError(f"record missing field(s) {', '.join(empty)}",
                                 line=row_no)
            if values["support"] not in _SUPPORT_TO_STANCE:
                raise ParseError(f"unknown support label {values['support']!r}",
                                 line=row_no)
            records.append(ArcRecord(**values))
    return records


@dataclass
class AdaptedCorpus:
    samples: list[SamplePair]
    headlines: list[str]
    bodies: dict[int, str]
    headline_topics: dict[int, str]


def adapt_arc(records: list[ArcRecord], seed: int = 0,
              unrelated_proportion: float = 0.75) -> AdaptedCorpus:
    if not records:
        raise ParameterError("no records to adapt")
    if not 0.0 < unrelated_proportion < 1.0:
        raise ParameterError(
            f"unrelated proportion must be in (0, 1), got {unrelated_proportion}")

    headlines: list[str] = []
    headline_ids: dict[str, int] = {}
    headline_topics: dict[int, str] = {}

    def headline_id(text: str, topic: str) -> int:
        text = normalize_headline(text)
        if text not in headline_ids:
            headline_ids[text] = len(headlines)
            headlines.append(text)
            headline_topics[len(headlines) - 1] = topic
        return headline_ids[text]

    samples: list[SamplePair] = []
    bodies: dict[int, str] = {}
    body_topics: dict[int, str] = {}
    for body_id, record in enumerate(records):
        bodies[body_id] = record.post
        body_topics[body_id] = record.topic
        hid = headline_id(record.claim, record.topic)
        headline_id(record.opposing_claim, record.topic)  # register for pairing
        samples.append(SamplePair(hid, body_id, _SUPPORT_TO_STANCE[record.support]))

    topics = {t for t in body_topics.values()}
    if len(topics) < 2:
        raise ParameterError("cross-topic unrelated pairing needs >= 2 topics")

    n_related = len(samples)
    ratio = unrelated_proportion / (1.0 - unrelated_proportion)
    n_unrelated = int(round(ratio * n_related))
    rng = np.random.default_rng(seed)
    used = {(s.headline_id, s.body_id) for s in samples}
    all_headline_ids = np.arange(len(headlines))
    attempts = 0
    while n_unrelated > 0 and attempts < 1000 * n_unrelated:
        attempts += 1
        body_id = int(rng.integers(0, len(records)))
        hid = int(rng.choice(all_headline_ids))
        if headline_topics[hid] == body_topics[body_id]:
            continue
        if (hid, body_id) in used:
            continue
        used.add((hid, body_id))
        samples.append(SamplePair(hid, body_id, StanceLabel.UNR))
        n_unrelated -= 1
    if n_unrelated > 0:
        raise ParameterError(
            "could not generate enough cross-topic unrelated pairs")
    return AdaptedCorpus(samples, headlines, bodies, headline_topics)
