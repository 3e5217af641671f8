"""Shared fixtures: synthetic corpora with learnable class structure.

Embeddings are built so both classification stages are solvable: SIM space
carries topic alignment (related bodies contain sentences near the headline's
topic direction), and NLI space carries a global per-stance direction mixed
into the core sentences of related bodies.
"""

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bait.data import SamplePair, StanceLabel
from bait.features import EmbeddingBundle, PairDataset
from bait.store import EmbeddingStore, Space, Unit


def _unit(v):
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.where(n > 0, n, 1.0)


@dataclass
class SyntheticCorpus:
    samples: list
    bundle: EmbeddingBundle
    headlines: list[str]
    bodies: dict[int, str]
    headline_topics: dict[int, int]

    def dataset(self, body_len=50) -> PairDataset:
        return PairDataset(self.samples, self.bundle, body_len=body_len)


def _orthonormal(n, dim, rng):
    q, _ = np.linalg.qr(rng.normal(size=(dim, n)))
    return q.T[:n]


def _noisy(direction, ratio, rng):
    """Unit vector at cosine ~ 1/sqrt(1+ratio^2) from ``direction``."""
    noise = rng.normal(size=direction.shape)
    return _unit(_unit(direction) + ratio * _unit(noise))


def make_corpus(n_samples=300, sim_dim=16, nli_dim=24, n_topics=6,
                n_headlines=40, seed=0, body_len_range=(4, 12),
                proportions=(0.074, 0.02, 0.177, 0.728)) -> SyntheticCorpus:
    rng = np.random.default_rng(seed)
    topics = _orthonormal(n_topics, sim_dim, rng)
    topic_nli = _orthonormal(n_topics + 3, nli_dim, rng)
    stance_dirs = topic_nli[n_topics:]  # AGR, DSG, DSC; orthogonal to topics
    topic_nli = topic_nli[:n_topics]

    headline_topic = rng.integers(0, n_topics, size=n_headlines)
    sim_head, nli_head = {}, {}
    for h in range(n_headlines):
        t = headline_topic[h]
        sim_head[h] = _noisy(topics[t], 0.35, rng)[None, :].astype(np.float32)
        nli_head[h] = _noisy(topic_nli[t], 0.35, rng)[None, :].astype(np.float32)

    p = np.asarray(proportions, dtype=float)
    labels = rng.choice(4, size=n_samples, p=p / p.sum())
    sim_body, nli_body = {}, {}
    samples = []

    def build_body(body_id, topic, stance):
        n_sent = int(rng.integers(*body_len_range))
        n_core = max(2, int(0.6 * n_sent))
        sim_rows = np.empty((n_sent, sim_dim))
        nli_rows = np.empty((n_sent, nli_dim))
        core_set = set(rng.permutation(n_sent)[:n_core].tolist())
        for i in range(n_sent):
            if i in core_set:
                sim_rows[i] = _noisy(topics[topic], 0.4, rng)
                mix = 0.5 * topic_nli[topic] + 1.2 * stance_dirs[stance]
                nli_rows[i] = _noisy(mix, 0.35, rng)
            else:
                sim_rows[i] = _unit(rng.normal(size=sim_dim))
                nli_rows[i] = _unit(rng.normal(size=nli_dim))
        sim_body[body_id] = sim_rows.astype(np.float32)
        nli_body[body_id] = nli_rows.astype(np.float32)

    next_body = 0
    bodies_by_topic: dict[int, list[int]] = {}
    for label in labels:
        stance = StanceLabel(int(label))
        h = int(rng.integers(0, n_headlines))
        t = int(headline_topic[h])
        if stance == StanceLabel.UNR:
            # body about a different topic
            other = int((t + 1 + rng.integers(0, n_topics - 1)) % n_topics)
            pool = bodies_by_topic.get(other, [])
            if pool and rng.random() < 0.5:
                body_id = int(rng.choice(pool))
            else:
                body_id = next_body
                next_body += 1
                build_body(body_id, other, int(rng.integers(0, 3)))
                bodies_by_topic.setdefault(other, []).append(body_id)
        else:
            body_id = next_body
            next_body += 1
            build_body(body_id, t, int(stance))
            bodies_by_topic.setdefault(t, []).append(body_id)
        samples.append(SamplePair(h, body_id, stance))

    bundle = EmbeddingBundle(
        sim_head=EmbeddingStore(Space.SIM, Unit.HEAD, sim_dim, sim_head),
        nli_head=EmbeddingStore(Space.NLI, Unit.HEAD, nli_dim, nli_head),
        sim_body=EmbeddingStore(Space.SIM, Unit.BODY, sim_dim, sim_body),
        nli_body=EmbeddingStore(Space.NLI, Unit.BODY, nli_dim, nli_body),
    )
    headlines = [f"headline {h} about topic {headline_topic[h]}" for h in range(n_headlines)]
    bodies = {bid: f"body {bid} text." for bid in sim_body}
    return SyntheticCorpus(samples, bundle, headlines, bodies,
                           {h: int(t) for h, t in enumerate(headline_topic)})


def write_corpus_files(corpus: SyntheticCorpus, directory) -> dict:
    """Materialize a synthetic corpus as the on-disk file set the CLI reads."""
    import csv
    from pathlib import Path

    from bait.store import write_embedding_store, write_sidecar

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, store in (("sim_head", corpus.bundle.sim_head),
                        ("nli_head", corpus.bundle.nli_head),
                        ("sim_body", corpus.bundle.sim_body),
                        ("nli_body", corpus.bundle.nli_body)):
        paths[f"{name}_store"] = directory / f"{name}.store"
        write_embedding_store(paths[f"{name}_store"], store)
    paths["sidecar"] = directory / "headlines.txt"
    write_sidecar(paths["sidecar"], corpus.headlines)
    paths["stances"] = directory / "stances.csv"
    with open(paths["stances"], "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Headline", "Body ID", "Stance"])
        for s in corpus.samples:
            writer.writerow([corpus.headlines[s.headline_id], s.body_id,
                             s.stance.text])
    paths["bodies"] = directory / "bodies.csv"
    with open(paths["bodies"], "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Body ID", "articleBody"])
        for body_id in sorted(corpus.bodies):
            writer.writerow([body_id, corpus.bodies[body_id]])
    return paths


@pytest.fixture(scope="session")
def small_corpus() -> SyntheticCorpus:
    return make_corpus(n_samples=300, seed=7)
