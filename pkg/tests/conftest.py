from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from devcorpus.model import (
    AnnotatedSentence,
    Category,
    Origin,
    ParallelPair,
    Polarity,
    SimilarityBand,
    Split,
    Tense,
    classify_length,
)

DATA = Path(__file__).parent / "data"
FIXTURE = DATA / "fixture"

settings.register_profile(
    "repo", deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

# Devanagari letters, vowel signs and a few marks, for fuzzing
DEVANAGARI = [chr(c) for c in range(0x0905, 0x0915)] + \
             [chr(c) for c in range(0x0915, 0x0939)] + \
             [chr(c) for c in range(0x093E, 0x094D)] + ["्", "ं", "ँ"]


def sentence(text: str = "ऊ घर गयो।", *, sid: str = "s1", category=Category.HEALTH,
             word_count: int = 3, tense=Tense.PAST, polarity=Polarity.AFFIRMATIVE,
             band=SimilarityBand.UNASSIGNED, origin=Origin.SCRAPED,
             length_class=None) -> AnnotatedSentence:
    return AnnotatedSentence(
        id=sid, text=text, category=category, word_count=word_count,
        length_class=length_class or classify_length(word_count), tense=tense,
        polarity=polarity, similarity_band=band, source_article_id="a1", origin=origin)


def pair(pid: str = "p1", tamang: str = "ङा नाम।", split=Split.TRAIN, **kw) -> ParallelPair:
    kw.setdefault("sid", pid)
    return ParallelPair(pid, sentence(**kw), tamang, split)


@pytest.fixture
def fixture_dir() -> Path:
    return FIXTURE


# acceptance criterion number -> (title, "PASS" | "FAIL"), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, status = ACCEPTANCE[n]
        terminalreporter.write_line(f"{status} criterion {n}: {title}")
