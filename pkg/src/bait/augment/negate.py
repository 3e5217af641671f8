"""Rule-based headline negation and flipped-sample synthesis.

Three methods are attempted in order, the first applicable one winning:

1. remove an existing "not"/"n't" that functions as a negation modifier;
2. if the root verb carries an auxiliary, insert "not" after the last one;
3. swap the root verb for a WordNet antonym, inflected to match, keeping
   the candidate the language model scores highest.
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass, field

from ..data import SamplePair, StanceLabel
from ..errors import ParameterError
from .conllu import ParsedHeadline, detokenize
from .lm import LMScorer
from .wordnet import WordNetIndex

log = logging.getLogger(__name__)

NEGATOR_FORMS = {"not", "n't", "n’t"}
AUX_RELATIONS = {"aux", "aux:pass", "auxpass"}

METHOD_REMOVE = "remove_not"
METHOD_INSERT = "insert_not"
METHOD_SWAP = "antonym_swap"


@dataclass(frozen=True)
class NegationResult:
    method: str
    text: str


# irregular forms: lemma -> (3sg, past, participle, gerund)
_IRREGULAR = {
    "be": ("is", "was", "been", "being"),
    "have": ("has", "had", "had", "having"),
    "do": ("does", "did", "done", "doing"),
    "go": ("goes", "went", "gone", "going"),
    "say": ("says", "said", "said", "saying"),
    "get": ("gets", "got", "gotten", "getting"),
    "make": ("makes", "made", "made", "making"),
    "take": ("takes", "took", "taken", "taking"),
    "give": ("gives", "gave", "given", "giving"),
    "find": ("finds", "found", "found", "finding"),
    "come": ("comes", "came", "come", "coming"),
    "know": ("knows", "knew", "known", "knowing"),
    "think": ("thinks", "thought", "thought", "thinking"),
    "rise": ("rises", "rose", "risen", "rising"),
    "fall": ("falls", "fell", "fallen", "falling"),
    "break": ("breaks", "broke", "broken", "breaking"),
    "buy": ("buys", "bought", "bought", "buying"),
    "sell": ("sells", "sold", "sold", "selling"),
    "win": ("wins", "won", "won", "winning"),
    "lose": ("loses", "lost", "lost", "losing"),
    "hold": ("holds", "held", "held", "holding"),
    "keep": ("keeps", "kept", "kept", "keeping"),
    "leave": ("leaves", "left", "left", "leaving"),
    "send": ("sends", "sent", "sent", "sending"),
    "shut": ("shuts", "shut", "shut", "shutting"),
    "sit": ("sits", "sat", "sat", "sitting"),
    "stand": ("stands", "stood", "stood", "standing"),
    "run": ("runs", "ran", "run", "running"),
    "begin": ("begins", "began", "begun", "beginning"),
    "deny": ("denies", "denied", "denied", "denying"),
}

_TAGS = ("base", "3sg", "past", "part", "ger")
_SIBILANT_ENDINGS = ("s", "x", "z", "ch", "sh", "o")
_VOWELS = "aeiou"


# polysyllabic verbs that still double (final-syllable stress)
_FINAL_STRESS = {"admit", "commit", "permit", "submit", "omit", "occur",
                 "refer", "prefer", "regret", "control", "equip", "compel",
                 "propel", "rebut", "emit"}


def _doubles_final(lemma: str) -> bool:
    # consonant-vowel-consonant ending, and doubling only under final stress
    if not (len(lemma) >= 3
            and lemma[-1] not in _VOWELS + "wxy"
            and lemma[-2] in _VOWELS
            and lemma[-3] not in _VOWELS):
        return False
    monosyllabic = len(re.findall(f"[{_VOWELS}]+", lemma)) == 1
    return monosyllabic or lemma in _FINAL_STRESS


def inflect(lemma: str, tag: str) -> str:
    """Inflect a verb lemma to the requested tag with regular spelling rules."""
    if tag not in _TAGS:
        raise ParameterError(f"unknown inflection tag {tag!r}")
    lemma = lemma.lower()
    if tag == "base":
        return lemma
    if lemma in _IRREGULAR:
        third, past, part, ger = _IRREGULAR[lemma]
        return {"3sg": third, "past": past, "part": part, "ger": ger}[tag]
    if tag == "3sg":
        if lemma.endswith("y") and lemma[-2:-1] not in _VOWELS:
            return lemma[:-1] + "ies"
        if lemma.endswith(_SIBILANT_ENDINGS):
            return lemma + "es"
        return lemma + "s"
    if tag in ("past", "part"):
        if lemma.endswith("e"):
            return lemma + "d"
        if lemma.endswith("y") and lemma[-2:-1] not in _VOWELS:
            return lemma[:-1] + "ied"
        if _doubles_final(lemma):
            return lemma + lemma[-1] + "ed"
        return lemma + "ed"
    # gerund
    if lemma.endswith("e") and not lemma.endswith(("ee", "oe", "ye")):
        return lemma[:-1] + "ing"
    if _doubles_final(lemma):
        return lemma + lemma[-1] + "ing"
    return lemma + "ing"


def classify_inflection(surface: str, lemma: str) -> str | None:
    """Which tag maps lemma to this surface form, if any."""
    surface = surface.lower()
    for tag in _TAGS:
        if inflect(lemma, tag) == surface:
            return tag
    return None


def inflect_like(antonym: str, surface: str, lemma: str) -> str | None:
    """Inflect an antonym lemma to mirror the root's surface form.

    Multiword antonyms inflect their first component; returns None when the
    root's form cannot be classified.
    """
    tag = classify_inflection(surface, lemma)
    if tag is None:
        return None
    parts = antonym.split("_")
    inflected = inflect(parts[0], tag)
    result = " ".join([inflected] + parts[1:])
    if surface[:1].isupper():
        result = result[:1].upper() + result[1:]
    return result


def _is_negation_modifier(token) -> bool:
    if token.form.lower() not in NEGATOR_FORMS:
        return False
    return token.deprel == "neg" or (
        token.deprel == "advmod" and token.lemma.lower() == "not"
    )


def negate_headline(parsed: ParsedHeadline, wn: WordNetIndex,
                    lm: LMScorer) -> NegationResult | None:
    tokens = sorted(parsed.tokens, key=lambda t: t.index)

    # method 1: drop an existing negation modifier
    for victim in tokens:
        if _is_negation_modifier(victim):
            text = detokenize([t.form for t in tokens if t.index != victim.index])
            if text != parsed.text:
                return NegationResult(METHOD_REMOVE, text)
            return None

    root = parsed.root
    if root.upos != "VERB":
        return None

    # method 2: root verb with an auxiliary -> "not" after the last auxiliary
    aux = [t for t in parsed.children(root.index) if t.deprel in AUX_RELATIONS]
    if aux:
        after = max(t.index for t in aux)
        forms = []
        for t in tokens:
            forms.append(t.form)
            if t.index == after:
                forms.append("not")
        return NegationResult(METHOD_INSERT, detokenize(forms))

    # method 3: antonym swap ranked by language-model score
    candidates = []
    for antonym in sorted(wn.antonyms(root.lemma)):
        replacement = inflect_like(antonym, root.form, root.lemma)
        if replacement is None:
            continue
        forms = [replacement if t.index == root.index else t.form for t in tokens]
        text = detokenize(forms)
        if text != parsed.text:
            candidates.append((lm.score(text), text))
    if not candidates:
        return None
    best_score = max(score for score, _ in candidates)
    best_text = next(text for score, text in candidates if score == best_score)
    return NegationResult(METHOD_SWAP, best_text)


def flip_stance(stance: StanceLabel) -> StanceLabel:
    if stance == StanceLabel.AGR:
        return StanceLabel.DSG
    if stance == StanceLabel.DSG:
        return StanceLabel.AGR
    raise ParameterError(f"only agree/disagree flip, got {stance.text}")


@dataclass
class SynthesisResult:
    samples: list[SamplePair] = field(default_factory=list)
    headlines: list[str] = field(default_factory=list)  # ids start at id_base
    id_base: int = 0
    log: list[dict] = field(default_factory=list)
    method_counts: Counter = field(default_factory=Counter)
    skipped_missing_parse: int = 0


def synthesize_flipped_samples(samples, parses: dict[int, ParsedHeadline],
                               wn: WordNetIndex, lm: LMScorer,
                               id_base: int,
                               directions=(StanceLabel.AGR,)) -> SynthesisResult:
    """Emit label-flipped copies of samples whose headline negates.

    ``directions`` lists the source stances to flip (default: agree only).
    Original samples are never modified; each successfully negated headline
    gets one new id, shared by all its flipped samples.
    """
    directions = set(directions)
    if not directions <= {StanceLabel.AGR, StanceLabel.DSG}:
        raise ParameterError("flip directions must be within {AGR, DSG}")
    result = SynthesisResult(id_base=id_base)
    eligible = [s for s in samples if s.stance in directions]
    by_headline: dict[int, list] = {}
    for s in eligible:
        by_headline.setdefault(s.headline_id, []).append(s)

    new_ids: dict[int, int] = {}
    for headline_id in sorted(by_headline):
        parsed = parses.get(headline_id)
        if parsed is None:
            result.skipped_missing_parse += 1
            log.warning("no parse for headline %d; skipped", headline_id)
            continue
        negation = negate_headline(parsed, wn, lm)
        if negation is None:
            continue
        new_id = id_base + len(result.headlines)
        new_ids[headline_id] = new_id
        result.headlines.append(negation.text)
        result.method_counts[negation.method] += 1
        result.log.append({
            "headline_id": headline_id,
            "method": negation.method,
            "original": parsed.text,
            "negated": negation.text,
        })
        for s in by_headline[headline_id]:
            result.samples.append(
                SamplePair(new_id, s.body_id, flip_stance(s.stance))
            )
    return result
