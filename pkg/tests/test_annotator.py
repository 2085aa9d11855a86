import json

import pytest
from hypothesis import given, strategies as st

from devcorpus.annotator import (
    REFERENCE_NEGATIVE_INFLECTIONS,
    NotCleanedError,
    PatternTable,
    PatternTableError,
    annotate,
    classify_polarity,
    classify_tense,
    classify_token_polarity,
    classify_token_tense,
    default_table,
    final_verb_token,
    load_pattern_table,
    longest_suffix,
)
from devcorpus.model import Category, LengthClass, Polarity, Tense

from conftest import DEVANAGARI

T = default_table()


def oracle_longest(token, patterns):
    hits = [p for p in patterns if token.endswith(p)]
    return max(hits, key=len) if hits else None


def test_table_sizes():
    assert len(T.nonpast_suffixes) == 15
    assert len(T.past_suffixes) == 17
    assert len(T.affirmative_suffixes) == 17
    assert len(T.negative_suffixes) == 10
    assert set(REFERENCE_NEGATIVE_INFLECTIONS) <= T.negative_inflections
    assert T.past_auxiliaries == {"थियो", "थिए"}
    assert T.nonpast_auxiliaries == {"छ", "छन्"}


@pytest.mark.parametrize("sentence,token", [
    ("आजको मौसम राम्रो छ।", "छ"), ("।", None), ("ऊ घर गयो।", "गयो"), ("", None),
])
def test_final_token(sentence, token):
    assert final_verb_token(sentence) == token


@pytest.mark.parametrize("sentence,tense", [
    ("आजको मौसम राम्रो छ।", Tense.NON_PAST),
    ("ऊ घर गयो।", Tense.PAST),
    ("नेपाल राम्रो", Tense.UNKNOWN),
    ("ऊ घर गएको थियो।", Tense.PAST),
    ("उनीहरू घरमा छन्।", Tense.NON_PAST),
    ("म जान्दिनँ।", Tense.NON_PAST),
])
def test_tense_examples(sentence, tense):
    assert classify_tense(sentence) is tense


@pytest.mark.parametrize("sentence,polarity", [
    ("ऊ आउँछ।", Polarity.AFFIRMATIVE),
    ("ऊ आउँदैन... ", Polarity.NEGATIVE),
    ("त्यो छैन।", Polarity.NEGATIVE),
    ("यो हुँदैन।", Polarity.NEGATIVE),
    ("ऊ त्यहाँ थिएन।", Polarity.NEGATIVE),
    ("म जान्दिनँ।", Polarity.NEGATIVE),
    ("नेपाल राम्रो", Polarity.UNKNOWN),
])
def test_polarity_examples(sentence, polarity):
    assert classify_polarity(sentence) is polarity


def test_negative_prefix():
    assert classify_token_polarity("नगयो", T) is Polarity.NEGATIVE
    # न followed by a vowel sign is part of the stem
    assert classify_token_polarity("नाच्यो", T) is Polarity.AFFIRMATIVE
    assert classify_token_tense("नगयो", T) is Tense.PAST


def test_joiners_are_ignored():
    assert classify_tense("उनीहरू घरमा छन्‌।") is Tense.NON_PAST
    assert classify_polarity("उनी घरमा छिन्‍।") is Polarity.AFFIRMATIVE


def test_unique_longest_suffix_of_gayo():
    hits = [p for p in T.tense_suffixes if "गयो".endswith(p)]
    assert hits == ["यो"]


@given(st.lists(st.sampled_from(DEVANAGARI), max_size=6).map("".join),
       st.sampled_from(sorted(T.tense_suffixes | T.polarity_suffixes.keys())))
def test_longest_suffix_matches_oracle(stem, suffix):
    token = stem + suffix
    assert longest_suffix(token, T.tense_suffixes) == oracle_longest(token, T.tense_suffixes)
    assert longest_suffix(token, T.polarity_suffixes) == oracle_longest(token, T.polarity_suffixes)


@given(st.text(max_size=40))
def test_classifiers_are_total(text):
    assert classify_tense(text) in set(Tense)
    assert classify_polarity(text) in set(Polarity)


def test_annotate_examples():
    a = annotate("आजको मौसम राम्रो छ।", Category.GENERAL_COMMUNICATION)
    assert (a.word_count, a.length_class, a.tense, a.polarity) == \
        (4, LengthClass.SHORT, Tense.NON_PAST, Polarity.AFFIRMATIVE)
    b = annotate("ऊ घर गयो।", Category.GENERAL_COMMUNICATION)
    assert (b.word_count, b.length_class, b.tense, b.polarity) == \
        (3, LengthClass.SHORT, Tense.PAST, Polarity.AFFIRMATIVE)
    assert b.similarity_band.value == "Unassigned"


@pytest.mark.parametrize("text", ["Hello क।", "क ख", "क  ख।", "क १ ख।", ""])
def test_annotate_rejects_uncleaned(text):
    with pytest.raises(NotCleanedError):
        annotate(text, Category.HEALTH)


def _table_json(tmp_path, **changes):
    base = {
        "nonpast_suffixes": sorted(T.nonpast_suffixes),
        "past_suffixes": sorted(T.past_suffixes),
        "affirmative_suffixes": sorted(T.affirmative_suffixes),
        "negative_suffixes": sorted(T.negative_suffixes),
        "negative_inflections": sorted(T.negative_inflections),
        "past_auxiliaries": sorted(T.past_auxiliaries),
        "nonpast_auxiliaries": sorted(T.nonpast_auxiliaries),
    }
    base.update(changes)
    path = tmp_path / "patterns.json"
    path.write_text(json.dumps(base, ensure_ascii=False), encoding="utf-8")
    return path


def test_table_can_be_extended(tmp_path):
    path = _table_json(tmp_path, past_suffixes=sorted(T.past_suffixes | {"एको"}))
    table = load_pattern_table(path)
    assert classify_token_tense("गएको", table) is Tense.PAST


def test_removing_reference_entries_needs_flag(tmp_path):
    path = _table_json(tmp_path, past_suffixes=sorted(T.past_suffixes - {"यो"}))
    with pytest.raises(PatternTableError, match="missing reference"):
        load_pattern_table(path)
    assert "यो" not in load_pattern_table(path, allow_removal=True).past_suffixes


def test_overlapping_tense_sets_rejected(tmp_path):
    path = _table_json(tmp_path, past_suffixes=sorted(T.past_suffixes | {"छ"}))
    with pytest.raises(PatternTableError, match="both tense"):
        load_pattern_table(path)


def test_non_devanagari_entry_rejected():
    with pytest.raises(PatternTableError, match="non-Devanagari"):
        PatternTable(frozenset({"छ", "x"}), frozenset({"यो"}), frozenset({"छ"}),
                     frozenset({"एन"}), frozenset(), frozenset(), frozenset())
