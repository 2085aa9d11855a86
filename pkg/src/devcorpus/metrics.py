"""Corpus-level BLEU, chrF and chrF++.

Statistics are computed per segment and summed over the corpus before the
final score is formed, so the scores match the usual corpus-level tools
for single-reference, whitespace-tokenized input.
"""
from __future__ import annotations

import enum
import math
import string
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Sequence

# chrF++ word splitting peels one ASCII punctuation mark off a word
_WORD_PUNCT = frozenset(string.punctuation)


class MetricInputError(ValueError):
    pass


class Smoothing(str, enum.Enum):
    NONE = "none"
    EXPONENTIAL = "exp"


@dataclass(frozen=True)
class BleuConfig:
    max_ngram_order: int = 4
    smoothing: Smoothing = Smoothing.EXPONENTIAL
    tokenization: str = "whitespace"

    def __post_init__(self):
        if self.max_ngram_order < 1:
            raise ValueError("max_ngram_order must be >= 1")
        object.__setattr__(self, "smoothing", Smoothing(self.smoothing))
        if self.tokenization != "whitespace":
            raise ValueError(f"unsupported tokenization {self.tokenization!r}")


@dataclass(frozen=True)
class ChrfConfig:
    char_order: int = 6
    word_order: int = 0
    beta: float = 2.0
    segment_average: bool = False

    def __post_init__(self):
        if self.char_order < 1:
            raise ValueError("char_order must be >= 1")
        if self.word_order < 0:
            raise ValueError("word_order must be >= 0")
        if not self.beta > 0:
            raise ValueError("beta must be positive")


CHRF = ChrfConfig()
CHRF_PP = ChrfConfig(word_order=2)


@dataclass(frozen=True)
class MetricReport:
    metric: str
    score: float
    config: dict
    sentence_count: int

    def to_dict(self) -> dict:
        return {"metric": self.metric, "score": self.score, "config": self.config,
                "sentence_count": self.sentence_count}


def _check_inputs(hypotheses: Sequence[str], references: Sequence[str]) -> None:
    if len(hypotheses) != len(references):
        raise MetricInputError(
            f"hypothesis/reference count mismatch: {len(hypotheses)} vs {len(references)}")
    if not hypotheses:
        raise MetricInputError("need at least one segment")


def _ngrams(items: Sequence, n: int) -> Counter:
    return Counter(tuple(items[i:i + n]) for i in range(len(items) - n + 1))


# ---------------------------------------------------------------------- BLEU

def bleu_statistics(hyp: str, ref: str, max_order: int = 4) -> list[int]:
    """[hyp_len, ref_len, match_1, total_1, ..., match_N, total_N] for one segment."""
    h, r = hyp.split(), ref.split()
    stats = [len(h), len(r)]
    for n in range(1, max_order + 1):
        hc, rc = _ngrams(h, n), _ngrams(r, n)
        stats.append(sum(min(c, rc[g]) for g, c in hc.items()))
        stats.append(max(len(h) - n + 1, 0))
    return stats


def bleu_from_statistics(stats: Sequence[int], cfg: BleuConfig = BleuConfig()) -> float:
    hyp_len, ref_len = stats[0], stats[1]
    matches = stats[2::2]
    totals = stats[3::2]
    if hyp_len == 0 or not any(matches):
        return 0.0
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    log_sum, orders, halving = 0.0, 0, 1.0
    for m, t in zip(matches, totals):
        if t == 0:
            # no n-grams of this order anywhere in the corpus
            break
        orders += 1
        if m == 0:
            if cfg.smoothing is Smoothing.NONE:
                return 0.0
            halving *= 2.0
            p = 1.0 / (halving * t)
        else:
            p = m / t
        log_sum += math.log(p)
    return min(100.0, 100.0 * bp * math.exp(log_sum / orders))


def bleu(hypotheses: Sequence[str], references: Sequence[str],
         cfg: BleuConfig = BleuConfig()) -> MetricReport:
    _check_inputs(hypotheses, references)
    total = [0] * (2 + 2 * cfg.max_ngram_order)
    for h, r in zip(hypotheses, references):
        for i, v in enumerate(bleu_statistics(h.rstrip(), r.rstrip(), cfg.max_ngram_order)):
            total[i] += v
    cfg_dict = asdict(cfg)
    cfg_dict["smoothing"] = cfg.smoothing.value
    return MetricReport("BLEU", bleu_from_statistics(total, cfg), cfg_dict, len(hypotheses))


# ---------------------------------------------------------------------- chrF

def _chrf_words(sentence: str) -> list[str]:
    words = []
    for w in sentence.split():
        if len(w) > 1 and w[-1] in _WORD_PUNCT:
            words += [w[:-1], w[-1]]
        elif len(w) > 1 and w[0] in _WORD_PUNCT:
            words += [w[0], w[1:]]
        else:
            words.append(w)
    return words


def chrf_statistics(hyp: str, ref: str, cfg: ChrfConfig = CHRF) -> list[int]:
    """Flat [hyp, ref, match] triples: char orders 1..n, then word orders 1..m."""
    stats: list[int] = []
    hc, rc = "".join(hyp.split()), "".join(ref.split())
    for n in range(1, cfg.char_order + 1):
        stats += _triple(_ngrams(hc, n), _ngrams(rc, n))
    if cfg.word_order:
        hw, rw = _chrf_words(hyp), _chrf_words(ref)
        for n in range(1, cfg.word_order + 1):
            stats += _triple(_ngrams(hw, n), _ngrams(rw, n))
    return stats


def _triple(h: Counter, r: Counter) -> list[int]:
    # hypothesis n-grams are not counted when the reference has none of that order
    n_hyp = sum(h.values()) if r else 0
    return [n_hyp, sum(r.values()), sum(min(c, r[g]) for g, c in h.items())]


def chrf_from_statistics(stats: Sequence[int], beta: float = 2.0) -> float:
    """F-beta of precision and recall averaged over the orders present on both sides."""
    prec_sum = rec_sum = 0.0
    orders = 0
    for i in range(0, len(stats), 3):
        n_hyp, n_ref, n_match = stats[i:i + 3]
        if n_hyp > 0 and n_ref > 0:
            prec_sum += n_match / n_hyp
            rec_sum += n_match / n_ref
            orders += 1
    if orders == 0:
        return 0.0
    p, r = prec_sum / orders, rec_sum / orders
    if p + r == 0:
        return 0.0
    b2 = beta * beta
    return min(100.0, 100.0 * (1 + b2) * p * r / (b2 * p + r))


def _chrf_report(name: str, hypotheses, references, cfg: ChrfConfig) -> MetricReport:
    _check_inputs(hypotheses, references)
    per_segment = [chrf_statistics(h, r, cfg) for h, r in zip(hypotheses, references)]
    if cfg.segment_average:
        score = sum(chrf_from_statistics(s, cfg.beta) for s in per_segment) / len(per_segment)
    else:
        score = chrf_from_statistics([sum(col) for col in zip(*per_segment)], cfg.beta)
    return MetricReport(name, score, asdict(cfg), len(hypotheses))


def chrf(hypotheses: Sequence[str], references: Sequence[str],
         cfg: ChrfConfig = CHRF) -> MetricReport:
    if cfg.word_order != 0:
        raise ValueError("chrf() takes word_order=0; use chrf_pp() for word n-grams")
    return _chrf_report("chrF", hypotheses, references, cfg)


def chrf_pp(hypotheses: Sequence[str], references: Sequence[str],
            cfg: ChrfConfig = CHRF_PP) -> MetricReport:
    if cfg.word_order == 0:
        raise ValueError("chrf_pp() needs word_order > 0")
    return _chrf_report("chrF++", hypotheses, references, cfg)


METRICS = {"bleu": bleu, "chrf": chrf, "chrfpp": chrf_pp}


def score_all(hypotheses: Sequence[str], references: Sequence[str],
              names: Sequence[str] = ("bleu", "chrf", "chrfpp")) -> list[MetricReport]:
    unknown = [n for n in names if n not in METRICS]
    if unknown:
        raise ValueError(f"unknown metrics {unknown}; choose from {sorted(METRICS)}")
    return [METRICS[n](hypotheses, references) for n in names]
