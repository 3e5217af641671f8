"""Class-imbalance mitigation: weights, negation synthesis, ARC adaptation."""

from .arc import AdaptedCorpus, ArcRecord, adapt_arc, load_arc_csv
from .conllu import DependencyToken, ParsedHeadline, detokenize, parse_conllu
from .lm import LMScorer, NgramLanguageModel, ngram_lm
from .negate import (
    NegationResult,
    SynthesisResult,
    flip_stance,
    negate_headline,
    synthesize_flipped_samples,
)
from .weights import balanced_class_weights
from .wordnet import WordNetIndex, load_wordnet

__all__ = [
    "AdaptedCorpus",
    "ArcRecord",
    "DependencyToken",
    "LMScorer",
    "NegationResult",
    "NgramLanguageModel",
    "ParsedHeadline",
    "SynthesisResult",
    "WordNetIndex",
    "adapt_arc",
    "balanced_class_weights",
    "detokenize",
    "flip_stance",
    "load_arc_csv",
    "load_wordnet",
    "negate_headline",
    "ngram_lm",
    "parse_conllu",
    "synthesize_flipped_samples",
]
