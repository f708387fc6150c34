"""Verb-noun co-occurrence tables and PP-attachment test tuples.

All input files are tab-separated UTF-8 text. Blank lines and lines whose
first non-blank character is ``#`` are ignored; anything else that does not
parse is a hard error carrying the 1-based line number. Word tokens may not
contain whitespace or parentheses and may not start with ``#`` (those would
be ambiguous in the tree serialization format).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "Attachment",
    "AttachmentTuple",
    "CoocData",
    "ParseError",
    "build_cooc",
    "dump_cooc",
    "load_cooc",
    "load_tuples",
    "restrict",
]


class ParseError(ValueError):
    """Malformed line in an input file."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class Attachment(enum.Enum):
    """Attachment site of a (prep, noun2) phrase; NO_DECISION is only a verdict."""

    VERB = "V"
    NOUN1 = "N"
    NO_DECISION = "NONE"


@dataclass(frozen=True)
class CoocData:
    """Immutable verb-noun frequency table.

    ``nouns`` and ``verbs`` are the full vocabularies in first-appearance
    order; ``freq`` holds only the strictly positive counts keyed by
    ``(noun, verb)``; ``total`` is the number of observed pairs.
    """

    nouns: tuple[str, ...]
    verbs: tuple[str, ...]
    freq: Mapping[tuple[str, str], int]
    total: int

    def __post_init__(self):
        if not self.nouns or not self.verbs:
            raise ValueError("noun and verb vocabularies must be non-empty")
        if len(set(self.nouns)) != len(self.nouns):
            raise ValueError("duplicate nouns in vocabulary")
        if len(set(self.verbs)) != len(self.verbs):
            raise ValueError("duplicate verbs in vocabulary")
        nouns = set(self.nouns)
        verbs = set(self.verbs)
        running = 0
        for (noun, verb), count in self.freq.items():
            if noun not in nouns or verb not in verbs:
                raise ValueError(f"frequency entry ({noun}, {verb}) outside vocabulary")
            if not isinstance(count, (int, np.integer)) or count <= 0:
                raise ValueError(f"count for ({noun}, {verb}) must be a positive integer")
            running += int(count)
        if running != self.total:
            raise ValueError(f"total {self.total} does not match sum of counts {running}")

    def count(self, noun: str, verb: str) -> int:
        return self.freq.get((noun, verb), 0)

    def noun_total(self, noun: str) -> int:
        """Total count of one noun across all verbs."""
        return sum(c for (n, _), c in self.freq.items() if n == noun)

    def to_matrix(self) -> np.ndarray:
        """Counts as an int64 array with shape (len(nouns), len(verbs))."""
        ni = {n: i for i, n in enumerate(self.nouns)}
        vi = {v: j for j, v in enumerate(self.verbs)}
        out = np.zeros((len(self.nouns), len(self.verbs)), dtype=np.int64)
        for (noun, verb), count in self.freq.items():
            out[ni[noun], vi[verb]] = count
        return out


def _check_word(token: str, path, line_no: int, column: str) -> str:
    word = token.strip()
    if not word:
        raise ParseError(path, line_no, f"empty {column} field")
    if any(ch.isspace() for ch in word):
        raise ParseError(path, line_no, f"{column} {word!r} contains whitespace")
    if "(" in word or ")" in word:
        raise ParseError(path, line_no, f"{column} {word!r} contains parentheses")
    if word.startswith("#"):
        raise ParseError(path, line_no, f"{column} {word!r} may not start with '#'")
    return word


def _check_count(token: str, path, line_no: int) -> int:
    try:
        count = int(token.strip())
    except ValueError:
        raise ParseError(path, line_no, f"count {token.strip()!r} is not an integer") from None
    if count < 0:
        raise ParseError(path, line_no, f"count {count} is negative")
    return count


def _skip(line: str) -> bool:
    stripped = line.strip()
    return not stripped or stripped.startswith("#")


def build_cooc(entries: Iterable[tuple[str, str, int]]) -> CoocData:
    """Accumulate (verb, noun, count) observations into a CoocData.

    Vocabulary order follows first appearance; a zero count registers the
    words without adding a frequency entry.
    """
    nouns: dict[str, None] = {}
    verbs: dict[str, None] = {}
    freq: dict[tuple[str, str], int] = {}
    total = 0
    for verb, noun, count in entries:
        if count < 0:
            raise ValueError(f"negative count for ({noun}, {verb})")
        verbs.setdefault(verb, None)
        nouns.setdefault(noun, None)
        if count:
            key = (noun, verb)
            freq[key] = freq.get(key, 0) + int(count)
            total += int(count)
    if not nouns:
        raise ValueError("no co-occurrence observations")
    return CoocData(tuple(nouns), tuple(verbs), freq, total)


def load_cooc(path) -> CoocData:
    """Read a co-occurrence TSV: ``verb <TAB> noun [<TAB> count]`` per line."""
    entries: list[tuple[str, str, int]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if _skip(line):
                continue
            fields = line.split("\t")
            if len(fields) not in (2, 3):
                raise ParseError(path, line_no, f"expected 2 or 3 fields, got {len(fields)}")
            verb = _check_word(fields[0], path, line_no, "verb")
            noun = _check_word(fields[1], path, line_no, "noun")
            count = _check_count(fields[2], path, line_no) if len(fields) == 3 else 1
            entries.append((verb, noun, count))
    if not entries:
        raise ValueError(f"{path}: no co-occurrence data lines")
    return build_cooc(entries)


def dump_cooc(data: CoocData, path) -> None:
    """Write the TSV form; reloading reproduces the frequency table and total.

    Words whose every count is zero are preserved with an explicit
    zero-count line so the vocabulary survives the round trip.
    """
    seen_nouns: set[str] = set()
    seen_verbs: set[str] = set()
    with open(path, "w", encoding="utf-8") as fh:
        for verb in data.verbs:
            for noun in data.nouns:
                count = data.count(noun, verb)
                if count:
                    fh.write(f"{verb}\t{noun}\t{count}\n")
                    seen_nouns.add(noun)
                    seen_verbs.add(verb)
        for noun in data.nouns:
            if noun not in seen_nouns:
                fh.write(f"{data.verbs[0]}\t{noun}\t0\n")
        for verb in data.verbs:
            if verb not in seen_verbs:
                fh.write(f"{verb}\t{data.nouns[0]}\t0\n")


def restrict(data: CoocData, nouns: Iterable[str]) -> CoocData:
    """Keep only the rows for ``nouns``; verbs and their order are unchanged."""
    keep = set(nouns)
    if not keep:
        raise ValueError("cannot restrict to an empty noun set")
    known = set(data.nouns)
    for noun in keep:
        if noun not in known:
            raise ValueError(f"unknown noun: {noun}")
    kept_nouns = tuple(n for n in data.nouns if n in keep)
    freq = {key: c for key, c in data.freq.items() if key[0] in keep}
    return CoocData(kept_nouns, data.verbs, freq, sum(freq.values()))


@dataclass(frozen=True)
class AttachmentTuple:
    """One PP-attachment test case with its gold attachment site."""

    verb: str
    noun1: str
    prep: str
    noun2: str
    gold: Attachment

    def __post_init__(self):
        if self.gold not in (Attachment.VERB, Attachment.NOUN1):
            raise ValueError(f"gold label must be VERB or NOUN1, got {self.gold}")


_GOLD = {"V": Attachment.VERB, "N": Attachment.NOUN1}


def load_tuples(path) -> list[AttachmentTuple]:
    """Read attachment tuples: ``verb noun1 prep noun2 gold`` with gold V or N."""
    tuples: list[AttachmentTuple] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if _skip(line):
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise ParseError(path, line_no, f"expected 5 fields, got {len(fields)}")
            words = [_check_word(f, path, line_no, name)
                     for f, name in zip(fields[:4], ("verb", "noun1", "prep", "noun2"))]
            gold = fields[4].strip()
            if gold not in _GOLD:
                raise ParseError(path, line_no, f"gold label must be V or N, got {gold!r}")
            tuples.append(AttachmentTuple(*words, _GOLD[gold]))
    return tuples
