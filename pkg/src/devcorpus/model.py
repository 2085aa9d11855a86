"""Domain types shared by every pipeline stage.

All records are frozen dataclasses so they can be passed between worker
threads freely.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional


class Category(str, enum.Enum):
    AGRICULTURE = "Agriculture"
    HEALTH = "Health"
    EDUCATION_TECHNOLOGY = "EducationTechnology"
    CULTURE_TOURISM_SOCIETY = "CultureTourismSociety"
    GENERAL_COMMUNICATION = "GeneralCommunication"


class LengthClass(str, enum.Enum):
    BELOW_MIN = "BelowMin"
    SHORT = "Short"
    MEDIUM = "Medium"
    LONG = "Long"
    VERY_LONG = "VeryLong"
    OUT_OF_RANGE = "OutOfRange"


class Tense(str, enum.Enum):
    PAST = "Past"
    NON_PAST = "NonPast"
    UNKNOWN = "Unknown"


class Polarity(str, enum.Enum):
    AFFIRMATIVE = "Affirmative"
    NEGATIVE = "Negative"
    UNKNOWN = "Unknown"


class SimilarityBand(str, enum.Enum):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"
    UNASSIGNED = "Unassigned"


class Origin(str, enum.Enum):
    SCRAPED = "Scraped"
    BORROWED = "Borrowed"
    SYNTHETIC = "Synthetic"


class Split(str, enum.Enum):
    TRAIN = "Train"
    TEST = "Test"
    UNASSIGNED = "Unassigned"


# (lowest word count, highest word count or None for unbounded), inclusive
LENGTH_BOUNDS: dict[LengthClass, tuple[int, Optional[int]]] = {
    LengthClass.BELOW_MIN: (0, 2),
    LengthClass.SHORT: (3, 7),
    LengthClass.MEDIUM: (8, 15),
    LengthClass.LONG: (16, 21),
    LengthClass.VERY_LONG: (22, 39),
    LengthClass.OUT_OF_RANGE: (40, None),
}


def classify_length(word_count: int) -> LengthClass:
    if word_count < 0:
        raise ValueError(f"word count must be non-negative, got {word_count}")
    if word_count < 3:
        return LengthClass.BELOW_MIN
    if word_count <= 7:
        return LengthClass.SHORT
    if word_count <= 15:
        return LengthClass.MEDIUM
    if word_count <= 21:
        return LengthClass.LONG
    if word_count < 40:
        return LengthClass.VERY_LONG
    return LengthClass.OUT_OF_RANGE


@dataclass(frozen=True)
class Article:
    id: str
    source_domain: str
    url: str
    title: str
    body: str
    raw_category: Optional[str] = None
    published_date: Optional[str] = None
    author: Optional[str] = None
    keywords: tuple[str, ...] = ()


@dataclass(frozen=True)
class AnnotatedSentence:
    id: str
    text: str
    category: Category
    word_count: int
    length_class: LengthClass
    tense: Tense
    polarity: Polarity
    similarity_band: SimilarityBand = SimilarityBand.UNASSIGNED
    source_article_id: Optional[str] = None
    origin: Origin = Origin.SCRAPED

    def with_band(self, band: SimilarityBand) -> AnnotatedSentence:
        return replace(self, similarity_band=band)


@dataclass(frozen=True)
class ParallelPair:
    id: str
    nepali: AnnotatedSentence
    tamang: str = ""
    split: Split = Split.UNASSIGNED


@dataclass(frozen=True)
class CorpusManifest:
    pairs: tuple[ParallelPair, ...]
    stats: "DistributionTable"  # noqa: F821  (defined in devcorpus.report)
    seed: int
    pipeline_config_hash: str


@dataclass(frozen=True)
class Verdict:
    violations: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_record(pair: ParallelPair) -> Verdict:
    """Check a pair against the record invariants.

    Every violated rule is reported, not only the first one found.
    """
    problems: list[str] = []
    s = pair.nepali
    if not pair.id:
        problems.append("empty pair id")
    if not s.id:
        problems.append("empty sentence id")
    if not s.text.strip():
        problems.append("empty source text")
    if s.word_count < 0:
        problems.append("negative word_count")
    elif classify_length(s.word_count) != s.length_class:
        problems.append("length_class mismatch")
    if pair.split != Split.UNASSIGNED and not pair.tamang.strip():
        problems.append("empty translation")
    for label, text in (("source", s.text), ("translation", pair.tamang)):
        if "\t" in text or "\n" in text or "\r" in text:
            problems.append(f"{label} text contains tab or newline")
    return Verdict(tuple(problems))
