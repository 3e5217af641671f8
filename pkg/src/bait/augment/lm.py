"""Add-k smoothed n-gram language model used to rank negation candidates.

The scorer interface is deliberately tiny so a stronger external model can
stand in; the default is a trigram model with k = 0.01, sentence-boundary
markers, and a closed vocabulary with an unknown-word bucket.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Iterable, Protocol

from ..errors import ParameterError

_TOKEN_RE = re.compile(r"[a-z0-9']+")
BOS, EOS, UNK = "<s>", "</s>", "<unk>"


class LMScorer(Protocol):
    def score(self, sentence: str) -> float:
        """Log-probability of the sentence; deterministic for a fixed model."""


def tokenize_words(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class NgramLanguageModel:
    def __init__(self, n: int = 3, k: float = 0.01):
        if n < 1:
            raise ParameterError(f"order must be >= 1, got {n}")
        if k <= 0:
            raise ParameterError(f"smoothing constant must be positive, got {k}")
        self.n = n
        self.k = k
        self.ngram_counts: Counter = Counter()
        self.context_counts: Counter = Counter()
        self.vocab: set[str] = set()

    def fit(self, corpus: Iterable[str]) -> "NgramLanguageModel":
        sentences = [tokenize_words(s) for s in corpus]
        if not sentences:
            raise ParameterError("training corpus is empty")
        for tokens in sentences:
            self.vocab.update(tokens)
        self.vocab.update((BOS, EOS, UNK))
        for tokens in sentences:
            padded = [BOS] * (self.n - 1) + tokens + [EOS]
            for i in range(self.n - 1, len(padded)):
                ngram = tuple(padded[i - self.n + 1:i + 1])
                self.ngram_counts[ngram] += 1
                self.context_counts[ngram[:-1]] += 1
        return self

    def score(self, sentence: str) -> float:
        if not self.vocab:
            raise ParameterError("model has not been fitted")
        tokens = [t if t in self.vocab else UNK for t in tokenize_words(sentence)]
        padded = [BOS] * (self.n - 1) + tokens + [EOS]
        v = len(self.vocab)
        total = 0.0
        for i in range(self.n - 1, len(padded)):
            ngram = tuple(padded[i - self.n + 1:i + 1])
            numerator = self.ngram_counts[ngram] + self.k
            denominator = self.context_counts[ngram[:-1]] + self.k * v
            total += math.log(numerator / denominator)
        return total


def ngram_lm(corpus: Iterable[str], n: int = 3, k: float = 0.01) -> NgramLanguageModel:
    return NgramLanguageModel(n=n, k=k).fit(corpus)
