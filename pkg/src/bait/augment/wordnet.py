"""Reader for WordNet 3.x ``index.verb`` / ``data.verb`` database files.

Only what antonym lookup needs is kept: the lemma -> synset index, synset
member lemmas, and antonym pointers (symbol ``!``), resolved to lemma pairs
and closed under symmetry. Lemmas are lowercase with underscores joining
multiword entries, as in the database itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ParseError


@dataclass
class WordNetIndex:
    verb_synsets: dict[str, list[int]] = field(default_factory=dict)
    synset_lemmas: dict[int, list[str]] = field(default_factory=dict)
    antonym_map: dict[str, set[str]] = field(default_factory=dict)

    def antonyms(self, lemma: str) -> set[str]:
        return set(self.antonym_map.get(lemma.lower(), ()))

    def add_antonym_pair(self, a: str, b: str) -> None:
        a, b = a.lower(), b.lower()
        self.antonym_map.setdefault(a, set()).add(b)
        self.antonym_map.setdefault(b, set()).add(a)


def _is_license_line(line: str) -> bool:
    return line.startswith(" ")


def _parse_offset(text: str, line_no: int, path) -> int:
    if not text.isdigit():
        raise ParseError(f"{path}: malformed synset offset {text!r}", line=line_no)
    return int(text)


def load_wordnet(index_path, data_path) -> WordNetIndex:
    index = WordNetIndex()
    pending: list[tuple[int, int, int, int, int]] = []  # src_off, src_w, tgt_off, tgt_w, line

    with open(data_path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            if _is_license_line(raw) or not raw.strip():
                continue
            body = raw.split(" | ")[0]
            fields = body.split()
            offset = _parse_offset(fields[0], line_no, data_path)
            try:
                w_cnt = int(fields[3], 16)
                words = [fields[4 + 2 * i].lower() for i in range(w_cnt)]
                p_cnt = int(fields[4 + 2 * w_cnt])
            except (IndexError, ValueError):
                raise ParseError(f"{data_path}: malformed synset line",
                                 line=line_no) from None
            index.synset_lemmas[offset] = words
            base = 5 + 2 * w_cnt
            for p in range(p_cnt):
                try:
                    symbol = fields[base + 4 * p]
                    tgt_offset = _parse_offset(fields[base + 4 * p + 1], line_no, data_path)
                    source_target = fields[base + 4 * p + 3]
                except IndexError:
                    raise ParseError(f"{data_path}: truncated pointer list",
                                     line=line_no) from None
                if symbol != "!":
                    continue
                try:
                    src_w = int(source_target[:2], 16)
                    tgt_w = int(source_target[2:], 16)
                except ValueError:
                    raise ParseError(
                        f"{data_path}: bad source/target field {source_target!r}",
                        line=line_no) from None
                pending.append((offset, src_w, tgt_offset, tgt_w, line_no))

    for src_off, src_w, tgt_off, tgt_w, line_no in pending:
        if tgt_off not in index.synset_lemmas:
            raise ParseError(
                f"{data_path}: dangling antonym pointer to offset {tgt_off:08d}",
                line=line_no)
        sources = ([index.synset_lemmas[src_off][src_w - 1]] if src_w > 0
                   else index.synset_lemmas[src_off])
        targets = ([index.synset_lemmas[tgt_off][tgt_w - 1]] if tgt_w > 0
                   else index.synset_lemmas[tgt_off])
        for a in sources:
            for b in targets:
                index.add_antonym_pair(a, b)

    with open(index_path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            if _is_license_line(raw) or not raw.strip():
                continue
            fields = raw.split()
            lemma, pos = fields[0].lower(), fields[1]
            if pos != "v":
                continue
            try:
                synset_cnt = int(fields[2])
            except ValueError:
                raise ParseError(f"{index_path}: bad synset count",
                                 line=line_no) from None
            offsets = [_parse_offset(f, line_no, index_path)
                       for f in fields[-synset_cnt:]]
            for off in offsets:
                if off not in index.synset_lemmas:
                    raise ParseError(
                        f"{index_path}: dangling synset offset {off:08d} "
                        f"for lemma {lemma!r}", line=line_no)
            index.verb_synsets[lemma] = offsets

    return index
