"""CoNLL-U ingestion for dependency-annotated headlines.

Parses are produced externally; this reader maps the ID, FORM, LEMMA, UPOS,
HEAD and DEPREL columns, skips multiword-token ranges and empty nodes, and
requires exactly one root per sentence. Sentence comments of the form
``# headline_id = N`` bind a parse to its headline.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import IntegrityError, ParseError

_N_COLUMNS = 10
_HEADLINE_ID_RE = re.compile(r"#\s*headline_id\s*=\s*(\d+)")
_TEXT_RE = re.compile(r"#\s*text\s*=\s*(.*)")

# punctuation that attaches to the preceding token when detokenizing
_ATTACH_LEFT = {".", ",", ";", ":", "!", "?", ")", "]", "}", "%", "'", "''",
                "’", "”", "...", "n't", "n’t", "'s", "'re",
                "'ve", "'ll", "'d", "'m"}
_ATTACH_RIGHT = {"(", "[", "{", "“", "‘", "``", "$"}


@dataclass(frozen=True)
class DependencyToken:
    index: int       # 1-based position in the sentence
    form: str
    lemma: str
    upos: str
    head: int        # 0 = root
    deprel: str


@dataclass
class ParsedHeadline:
    headline_id: int
    tokens: list[DependencyToken]
    text: str = ""

    def __post_init__(self):
        roots = [t for t in self.tokens if t.head == 0]
        if len(roots) != 1:
            raise IntegrityError(
                f"headline {self.headline_id}: expected exactly one root, "
                f"found {len(roots)}"
            )
        length = len(self.tokens)
        for t in self.tokens:
            if not 0 <= t.head <= length:
                raise IntegrityError(
                    f"headline {self.headline_id}: head {t.head} outside [0, {length}]"
                )
        if not self.text:
            self.text = detokenize([t.form for t in self.tokens])

    @property
    def root(self) -> DependencyToken:
        return next(t for t in self.tokens if t.head == 0)

    def children(self, index: int) -> list[DependencyToken]:
        return [t for t in self.tokens if t.head == index]


def detokenize(forms) -> str:
    """Space-join with punctuation attachment; contracted "n't" renders "not"."""
    out: list[str] = []
    for form in forms:
        piece = "not" if form.lower() in ("n't", "n’t") else form
        if out and (form in _ATTACH_LEFT and piece == form):
            out[-1] += piece
        elif out and out[-1] in _ATTACH_RIGHT:
            out[-1] += piece
        else:
            out.append(piece)
    return " ".join(out)


def parse_conllu(path) -> list[ParsedHeadline]:
    headlines: list[ParsedHeadline] = []
    tokens: list[DependencyToken] = []
    current_id: int | None = None
    current_text = ""

    def finish():
        nonlocal tokens, current_id, current_text
        if tokens:
            hid = current_id if current_id is not None else len(headlines)
            headlines.append(ParsedHeadline(hid, tokens, current_text))
        tokens = []
        current_id = None
        current_text = ""

    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                finish()
                continue
            if line.startswith("#"):
                if m := _HEADLINE_ID_RE.match(line):
                    current_id = int(m.group(1))
                elif m := _TEXT_RE.match(line):
                    current_text = m.group(1).strip()
                continue
            columns = line.split("\t")
            if len(columns) != _N_COLUMNS:
                raise ParseError(
                    f"expected {_N_COLUMNS} tab-separated columns, got {len(columns)}",
                    line=line_no,
                )
            token_id, form, lemma, upos = columns[0], columns[1], columns[2], columns[3]
            if "-" in token_id or "." in token_id:
                continue  # multiword-token range / empty node
            try:
                index = int(token_id)
            except ValueError:
                raise ParseError(f"bad token id {token_id!r}", line=line_no) from None
            try:
                head = int(columns[6])
            except ValueError:
                raise ParseError(f"non-numeric head {columns[6]!r}", line=line_no) from None
            tokens.append(DependencyToken(index, form, lemma, upos, head, columns[7]))
    finish()
    return headlines
