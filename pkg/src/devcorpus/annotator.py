"""Rule-based tense, polarity and length labelling of cleaned sentences.

Labels come from the final word token. Auxiliary verbs are checked first for
tense; otherwise the longest suffix found in the pattern table decides.
"""
from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .model import (
    AnnotatedSentence,
    Category,
    Origin,
    Polarity,
    Tense,
    classify_length,
)
from .segmenter import tokenize_words

# Reference entries; a loaded table may add to these but only drops them
# when explicitly allowed.
REFERENCE_NONPAST = ("छु", "छौँ", "छस्", "छेस्", "छौ", "छ", "छे", "छन्", "छिन्", "छौं",
                 "दिनँ", "दैनौँ", "दैनस्", "दैनौ", "दिनौ")
REFERENCE_PAST = ("एँ", "यौँ", "यौं", "इस्", "यौ", "यो", "ई", "ए", "इन्", "इनँ", "एनौ",
              "इनस्", "इनौ", "एन", "इन", "एनन्", "इनन्")
REFERENCE_AFFIRMATIVE = ("छु", "छौँ", "छस्", "छेस्", "छौ", "छ", "छे", "छन्", "छिन्",
                     "एँ", "यौँ", "यौं", "इस्", "यौ", "यो", "ई", "ए")
REFERENCE_NEGATIVE = ("दिनँ", "दैनौँ", "दैनस्", "दैनौ", "दिनौ", "इनौ", "एन", "इन",
                  "एनन्", "इनन्")
REFERENCE_NEGATIVE_INFLECTIONS = ("छैन", "हुँदैन", "थिएन")
REFERENCE_PAST_AUX = ("थियो", "थिए")
REFERENCE_NONPAST_AUX = ("छ", "छन्")

_JOINERS = re.compile("[\u200c\u200d]")
_LATIN = re.compile(r"[A-Za-z]")
_DIGIT = re.compile(r"[0-9०-९]")


class PatternTableError(ValueError):
    pass


class NotCleanedError(ValueError):
    """Raised when annotate() receives text that did not come out of the cleaner."""


def _is_devanagari(s: str) -> bool:
    return bool(s) and all("\u0900" <= c <= "\u097f" for c in s)


@dataclass(frozen=True)
class PatternTable:
    nonpast_suffixes: frozenset[str]
    past_suffixes: frozenset[str]
    affirmative_suffixes: frozenset[str]
    negative_suffixes: frozenset[str]
    negative_inflections: frozenset[str]
    past_auxiliaries: frozenset[str]
    nonpast_auxiliaries: frozenset[str]
    negative_prefix: str = "न"
    version: int = 1

    def __post_init__(self):
        for name in ("nonpast_suffixes", "past_suffixes", "affirmative_suffixes",
                     "negative_suffixes"):
            entries = getattr(self, name)
            if not entries:
                raise PatternTableError(f"{name} is empty")
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if isinstance(value, frozenset):
                bad = sorted(e for e in value if not _is_devanagari(e))
                if bad:
                    raise PatternTableError(f"{name}: non-Devanagari entries {bad}")
        clash = self.nonpast_suffixes & self.past_suffixes
        if clash:
            raise PatternTableError(f"suffixes in both tense sets: {sorted(clash)}")
        clash = self.affirmative_suffixes & (self.negative_suffixes | self.negative_inflections)
        if clash:
            raise PatternTableError(f"suffixes in both polarity sets: {sorted(clash)}")
        if self.past_auxiliaries & self.nonpast_auxiliaries:
            raise PatternTableError("auxiliary listed as both past and non-past")
        if not _is_devanagari(self.negative_prefix):
            raise PatternTableError("negative prefix must be Devanagari")

    @cached_property
    def tense_suffixes(self) -> dict[str, Tense]:
        out = {s: Tense.NON_PAST for s in self.nonpast_suffixes}
        out.update({s: Tense.PAST for s in self.past_suffixes})
        return out

    @cached_property
    def polarity_suffixes(self) -> dict[str, Polarity]:
        out = {s: Polarity.AFFIRMATIVE for s in self.affirmative_suffixes}
        out.update({s: Polarity.NEGATIVE for s in self.negative_suffixes})
        out.update({s: Polarity.NEGATIVE for s in self.negative_inflections})
        return out

    @cached_property
    def verb_endings(self) -> frozenset[str]:
        """Every string whose presence at the end of a token marks a verb."""
        return (self.nonpast_suffixes | self.past_suffixes | self.negative_inflections
                | self.past_auxiliaries | self.nonpast_auxiliaries)


def _check_reference_entries(table: PatternTable) -> None:
    required = {
        "nonpast_suffixes": REFERENCE_NONPAST,
        "past_suffixes": REFERENCE_PAST,
        "affirmative_suffixes": REFERENCE_AFFIRMATIVE,
        "negative_suffixes": REFERENCE_NEGATIVE,
        "negative_inflections": REFERENCE_NEGATIVE_INFLECTIONS,
        "past_auxiliaries": REFERENCE_PAST_AUX,
        "nonpast_auxiliaries": REFERENCE_NONPAST_AUX,
    }
    for name, entries in required.items():
        missing = [e for e in entries if e not in getattr(table, name)]
        if missing:
            raise PatternTableError(
                f"{name} is missing reference entries {missing}; "
                "pass allow_removal=True to override")


def load_pattern_table(path: Union[str, Path, None] = None,
                       allow_removal: bool = False) -> PatternTable:
    """Load a pattern table file, defaulting to the bundled one."""
    if path is None:
        raw = resources.files("devcorpus.data").joinpath("patterns.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    data = json.loads(raw)
    try:
        table = PatternTable(
            nonpast_suffixes=_entries(data["nonpast_suffixes"]),
            past_suffixes=_entries(data["past_suffixes"]),
            affirmative_suffixes=_entries(data["affirmative_suffixes"]),
            negative_suffixes=_entries(data["negative_suffixes"]),
            negative_inflections=_entries(data.get("negative_inflections", [])),
            past_auxiliaries=_entries(data.get("past_auxiliaries", [])),
            nonpast_auxiliaries=_entries(data.get("nonpast_auxiliaries", [])),
            negative_prefix=unicodedata.normalize("NFC", data.get("negative_prefix", "न")),
            version=int(data.get("version", 1)),
        )
    except KeyError as exc:
        raise PatternTableError(f"pattern table lacks field {exc}") from None
    if not allow_removal:
        _check_reference_entries(table)
    return table


def _entries(values) -> frozenset[str]:
    return frozenset(_JOINERS.sub("", unicodedata.normalize("NFC", v)) for v in values)


_DEFAULT: Optional[PatternTable] = None


def default_table() -> PatternTable:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_pattern_table()
    return _DEFAULT


def final_verb_token(sentence: str) -> Optional[str]:
    tokens = tokenize_words(sentence)
    if not tokens:
        return None
    return _JOINERS.sub("", tokens[-1]) or None


def longest_suffix(token: str, patterns) -> Optional[str]:
    """Longest entry of ``patterns`` that ``token`` ends with."""
    if not patterns:
        return None
    longest = max(map(len, patterns))
    for size in range(min(longest, len(token)), 0, -1):
        tail = token[-size:]
        if tail in patterns:
            return tail
    return None


def classify_token_tense(token: str, tables: PatternTable) -> Tense:
    if token in tables.past_auxiliaries:
        return Tense.PAST
    if token in tables.nonpast_auxiliaries:
        return Tense.NON_PAST
    lookup = tables.tense_suffixes
    hit = longest_suffix(token, lookup)
    return lookup[hit] if hit is not None else Tense.UNKNOWN


def _has_negative_prefix(token: str, tables: PatternTable) -> bool:
    p = tables.negative_prefix
    if not token.startswith(p) or len(token) <= len(p):
        return False
    # "न" followed by a vowel sign or virama is part of the stem (नाच्यो)
    return not unicodedata.category(token[len(p)]).startswith("M")


def classify_token_polarity(token: str, tables: PatternTable) -> Polarity:
    lookup = tables.polarity_suffixes
    hit = longest_suffix(token, lookup)
    if hit is None:
        return Polarity.UNKNOWN
    polarity = lookup[hit]
    if polarity is Polarity.AFFIRMATIVE and _has_negative_prefix(token, tables):
        rest = token[len(tables.negative_prefix):]
        if longest_suffix(rest, lookup) is not None:
            return Polarity.NEGATIVE
    return polarity


def classify_tense(sentence: str, tables: Optional[PatternTable] = None) -> Tense:
    token = final_verb_token(sentence)
    if token is None:
        return Tense.UNKNOWN
    return classify_token_tense(token, tables or default_table())


def classify_polarity(sentence: str, tables: Optional[PatternTable] = None) -> Polarity:
    token = final_verb_token(sentence)
    if token is None:
        return Polarity.UNKNOWN
    return classify_token_polarity(token, tables or default_table())


def looks_cleaned(sentence: str, terminators=("।", "?", "!")) -> bool:
    return (
        bool(sentence)
        and sentence == " ".join(sentence.split())
        and sentence[-1] in terminators
        and not _LATIN.search(sentence)
        and not _DIGIT.search(sentence)
        and bool(tokenize_words(sentence))
    )


def annotate(sentence: str, category: Category, tables: Optional[PatternTable] = None, *,
             sentence_id: str = "", origin: Origin = Origin.SCRAPED,
             source_article_id: Optional[str] = None) -> AnnotatedSentence:
    if not looks_cleaned(sentence):
        raise NotCleanedError(f"not a cleaned sentence: {sentence!r}")
    tables = tables or default_table()
    n = len(tokenize_words(sentence))
    return AnnotatedSentence(
        id=sentence_id,
        text=sentence,
        category=Category(category),
        word_count=n,
        length_class=classify_length(n),
        tense=classify_tense(sentence, tables),
        polarity=classify_polarity(sentence, tables),
        source_article_id=source_article_id,
        origin=origin,
    )


__all__ = [
    "PatternTable", "PatternTableError", "NotCleanedError", "load_pattern_table",
    "default_table", "final_verb_token", "longest_suffix", "classify_tense",
    "classify_polarity", "classify_token_tense", "classify_token_polarity",
    "classify_length", "annotate", "looks_cleaned",
]
