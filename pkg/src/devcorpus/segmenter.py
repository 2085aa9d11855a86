"""Sentence splitting and word tokenization for Devanagari text."""
from __future__ import annotations

from dataclasses import dataclass

DANDA = "।"
DOUBLE_DANDA = "॥"

# closing marks that stay attached to the sentence they terminate
_CLOSERS = frozenset("\"'”’)]")

# stripped from both ends of every token
TOKEN_PUNCT = "।॥?!,\"'-\u2013\u2014()….:;“”‘’[]"


@dataclass(frozen=True)
class SegmenterConfig:
    terminators: frozenset[str] = frozenset({DANDA, "?", "!"})
    preserve_terminator: bool = True

    def __post_init__(self):
        if not self.terminators:
            raise ValueError("terminator set must not be empty")


DEFAULT_SEGMENTER = SegmenterConfig()


def split_sentences(text: str, cfg: SegmenterConfig = DEFAULT_SEGMENTER) -> list[str]:
    """Split ``text`` after every run of terminator characters.

    A run like ``?!`` ends one sentence, and closing quotes or brackets
    written directly after it stay with that sentence. Any trailing text
    without a terminator becomes the last element.
    """
    out: list[str] = []
    buf: list[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in cfg.terminators:
            j = i
            while j < n and text[j] in cfg.terminators:
                j += 1
            k = j
            while k < n and text[k] in _CLOSERS:
                k += 1
            if cfg.preserve_terminator:
                buf.append(text[i:k])
            else:
                buf.append(text[j:k])
            _flush(buf, out)
            i = k
        else:
            buf.append(ch)
            i += 1
    _flush(buf, out)
    return out


def _flush(buf: list[str], out: list[str]) -> None:
    sentence = " ".join("".join(buf).split())
    if sentence:
        out.append(sentence)
    buf.clear()


def tokenize_words(sentence: str) -> list[str]:
    tokens = []
    for raw in sentence.split():
        tok = raw.strip(TOKEN_PUNCT)
        if tok:
            tokens.append(tok)
    return tokens


def word_count(sentence: str) -> int:
    return len(tokenize_words(sentence))
