"""Sentence cleaning and rejection rules.

``clean_pipeline`` either returns a normalized sentence or a typed
rejection. The rule order is fixed because it decides which rejection a
sentence is attributed to:

1. foreign script (any Basic-Latin letter)
2. location prefix + noise stripping, repeated until nothing changes
3. empty after cleaning (or advert only)
4. too many special characters
5. terminal punctuation normalized to a danda
6. verb-ending check
"""
from __future__ import annotations

import enum
import json
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

from .annotator import PatternTable, default_table, final_verb_token, longest_suffix
from .segmenter import DANDA, tokenize_words

_LATIN = re.compile(r"[A-Za-z]")
_DIGITS = re.compile(r"[0-9०-९]+")
_ELLIPSIS = re.compile(r"\.{2,}|…")
_PRE_DANDA = re.compile(r"[\s,]+(?=।)")
_LEADING_JUNK = re.compile(r"^[\s\-:_]+")
_QUOTES = "\"'“”‘’«»"
# allowed besides Devanagari letters/marks and whitespace
_PLAIN_PUNCT = frozenset("।॥?!,;:'\"-\u2013\u2014()‘’“”.\u200c\u200d")

_MAX_PASSES = 10


class Rejection(str, enum.Enum):
    FOREIGN_SCRIPT = "ForeignScript"
    NO_VERB_ENDING = "NoVerbEnding"
    TOO_MANY_SPECIALS = "TooManySpecials"
    EMPTY_AFTER_CLEAN = "EmptyAfterClean"
    ADVERT_PHRASE = "AdvertPhrase"


@dataclass(frozen=True)
class CleanOutcome:
    cleaned: Optional[str] = None
    rejection: Optional[Rejection] = None

    def __post_init__(self):
        if (self.cleaned is None) == (self.rejection is None):
            raise ValueError("exactly one of cleaned/rejection must be set")

    @property
    def ok(self) -> bool:
        return self.cleaned is not None


@dataclass(frozen=True)
class CleanerConfig:
    advert_phrases: tuple[str, ...] = ("सूचना तथा सुझाव",)
    location_separators: tuple[str, ...] = (":", "\u2013", "-")
    max_prefix_tokens: int = 3
    typo_fixes: tuple[tuple[str, str], ...] = (("न््", "न्"),)
    verb_patterns: frozenset[str] = field(default_factory=lambda: default_table().verb_endings)
    terminators: frozenset[str] = frozenset({DANDA, "?", "!"})
    max_special_ratio: float = 0.1

    def __post_init__(self):
        for find, repl in self.typo_fixes:
            if not find:
                raise ValueError("typo fix with empty search string")
            if len(repl) > len(find) or find in repl:
                raise ValueError(f"typo fix {find!r} -> {repl!r} could grow the text")
        if not self.location_separators:
            raise ValueError("no location separators configured")
        if self.max_prefix_tokens < 1:
            raise ValueError("max_prefix_tokens must be >= 1")
        if not self.verb_patterns:
            raise ValueError("verb pattern set is empty")
        if not 0 <= self.max_special_ratio <= 1:
            raise ValueError("max_special_ratio must lie in [0, 1]")
        object.__setattr__(self, "_prefix_re", _prefix_regex(
            self.location_separators, self.max_prefix_tokens))

    @classmethod
    def from_table(cls, tables: PatternTable, **kwargs) -> CleanerConfig:
        return cls(verb_patterns=tables.verb_endings, **kwargs)


def _prefix_regex(separators: Iterable[str], max_tokens: int) -> re.Pattern:
    seps = "".join(re.escape(s) for s in separators)
    word = rf"[^\s{seps}]+"
    return re.compile(
        rf"^\s*{word}(?:\s+{word}){{0,{max_tokens - 1}}}\s*[{seps}](?:\s+|$)")


def load_cleaner_config(path: Union[str, Path, None] = None,
                        tables: Optional[PatternTable] = None) -> CleanerConfig:
    if path is None:
        raw = resources.files("devcorpus.data").joinpath("cleaner.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    data = json.loads(raw)
    nfc = lambda s: unicodedata.normalize("NFC", s)  # noqa: E731
    kwargs = {}
    if "advert_phrases" in data:
        kwargs["advert_phrases"] = tuple(nfc(p) for p in data["advert_phrases"])
    if "location_separators" in data:
        kwargs["location_separators"] = tuple(data["location_separators"])
    if "max_prefix_tokens" in data:
        kwargs["max_prefix_tokens"] = int(data["max_prefix_tokens"])
    if "typo_fixes" in data:
        kwargs["typo_fixes"] = tuple((nfc(f), nfc(r)) for f, r in data["typo_fixes"])
    if "max_special_ratio" in data:
        kwargs["max_special_ratio"] = float(data["max_special_ratio"])
    tables = tables or default_table()
    return CleanerConfig(verb_patterns=tables.verb_endings, **kwargs)


DEFAULT_CLEANER: Optional[CleanerConfig] = None


def default_cleaner() -> CleanerConfig:
    global DEFAULT_CLEANER
    if DEFAULT_CLEANER is None:
        DEFAULT_CLEANER = CleanerConfig()
    return DEFAULT_CLEANER


def contains_foreign_script(sentence: str) -> bool:
    return _LATIN.search(sentence) is not None


def _strip_outer_quotes(text: str, terminators) -> str:
    text = text.lstrip(_QUOTES + " ")
    end = len(text)
    while end and text[end - 1] in terminators:
        end -= 1
    head, tail = text[:end], text[end:]
    return head.rstrip(_QUOTES + " ") + tail


def strip_noise(sentence: str, cfg: Optional[CleanerConfig] = None) -> str:
    cfg = cfg or default_cleaner()
    text = sentence
    for _ in range(_MAX_PASSES):
        before = text
        for find, repl in cfg.typo_fixes:
            text = text.replace(find, repl)
        if text == before:
            break
    for phrase in cfg.advert_phrases:
        text = text.replace(phrase, " ")
    text = _DIGITS.sub(" ", text)
    text = _ELLIPSIS.sub(" ", text)
    text = " ".join(text.split())
    for _ in range(_MAX_PASSES):
        before = text
        text = _strip_outer_quotes(text, cfg.terminators)
        text = _LEADING_JUNK.sub("", text)
        if text == before:
            break
    text = _PRE_DANDA.sub("", text)
    return " ".join(text.split())


def strip_location_prefix(sentence: str, cfg: Optional[CleanerConfig] = None) -> str:
    cfg = cfg or default_cleaner()
    m = cfg._prefix_re.match(sentence)
    if m is None:
        return sentence
    return sentence[m.end():]


def ends_with_verb(sentence: str, patterns: Union[frozenset, set, None] = None) -> bool:
    patterns = default_cleaner().verb_patterns if patterns is None else patterns
    token = final_verb_token(sentence)
    if token is None:
        return False
    return token in patterns or longest_suffix(token, patterns) is not None


def _is_word_char(ch: str) -> bool:
    return unicodedata.category(ch)[0] in "LM"


def _special_ratio(text: str) -> float:
    chars = [c for c in text if not c.isspace()]
    if not chars:
        return 0.0
    special = sum(1 for c in chars if not _is_word_char(c) and c not in _PLAIN_PUNCT)
    return special / len(chars)


def normalize_terminal(text: str, terminators=frozenset({DANDA, "?", "!"})) -> str:
    """Drop trailing punctuation other than terminators; append a danda if none is left."""
    text = text.rstrip()
    while text and text[-1] not in terminators and not _is_word_char(text[-1]):
        text = text[:-1].rstrip()
    text = _PRE_DANDA.sub("", text)
    if text and text[-1] not in terminators:
        text += DANDA
    return text


def _reject(reason: Rejection) -> CleanOutcome:
    return CleanOutcome(rejection=reason)


def clean_pipeline(sentence: str, cfg: Optional[CleanerConfig] = None) -> CleanOutcome:
    cfg = cfg or default_cleaner()
    if contains_foreign_script(sentence):
        return _reject(Rejection.FOREIGN_SCRIPT)

    text = sentence
    for _ in range(_MAX_PASSES):
        before = text
        text = strip_noise(strip_location_prefix(text, cfg), cfg)
        if text == before:
            break

    if not tokenize_words(text):
        if any(p in sentence for p in cfg.advert_phrases):
            return _reject(Rejection.ADVERT_PHRASE)
        return _reject(Rejection.EMPTY_AFTER_CLEAN)
    if _special_ratio(text) > cfg.max_special_ratio:
        return _reject(Rejection.TOO_MANY_SPECIALS)

    text = normalize_terminal(text, cfg.terminators)
    if not ends_with_verb(text, cfg.verb_patterns):
        return _reject(Rejection.NO_VERB_ENDING)
    return CleanOutcome(cleaned=text)


def light_clean(sentence: str, cfg: Optional[CleanerConfig] = None) -> CleanOutcome:
    """Basic cleaning for already-curated parallel data.

    Only noise stripping and terminal punctuation are applied; the verb and
    special-character filters are skipped.
    """
    cfg = cfg or default_cleaner()
    if contains_foreign_script(sentence):
        return _reject(Rejection.FOREIGN_SCRIPT)
    text = sentence
    for _ in range(_MAX_PASSES):
        before = text
        text = strip_noise(text, cfg)
        if text == before:
            break
    if not tokenize_words(text):
        return _reject(Rejection.EMPTY_AFTER_CLEAN)
    return CleanOutcome(cleaned=normalize_terminal(text, cfg.terminators))
