"""Quota apportionment, stratified sampling and train/test splitting."""
from __future__ import annotations

import hashlib
import random
from collections import defaultdict
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .model import (
    AnnotatedSentence,
    Category,
    LengthClass,
    Origin,
    ParallelPair,
    Polarity,
    SimilarityBand,
    Split,
    Tense,
)

AXES = ("category", "length_class", "tense", "polarity", "similarity_band")
DEFAULT_RELAXATION = ("similarity_band", "polarity", "tense", "length_class", "category")

StratumKey = tuple[str, str, str, str, str]


class SamplingError(ValueError):
    pass


def derive_seed(seed: int, stage: str) -> int:
    """Independent per-stage seed so stages never share a random stream."""
    digest = hashlib.sha256(f"{seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(str(x))


def _default_axes() -> dict[str, dict[str, Fraction]]:
    return {
        "category": {c.value: Fraction(1, 5) for c in Category},
        "length_class": {LengthClass.SHORT.value: Fraction(35, 100),
                         LengthClass.MEDIUM.value: Fraction(40, 100),
                         LengthClass.LONG.value: Fraction(15, 100),
                         LengthClass.VERY_LONG.value: Fraction(10, 100)},
        "tense": {Tense.PAST.value: Fraction(1, 2), Tense.NON_PAST.value: Fraction(1, 2)},
        "polarity": {Polarity.AFFIRMATIVE.value: Fraction(1, 2),
                     Polarity.NEGATIVE.value: Fraction(1, 2)},
        "similarity_band": {SimilarityBand.LOW.value: Fraction(1, 3),
                            SimilarityBand.MEDIUM.value: Fraction(1, 3),
                            SimilarityBand.HIGH.value: Fraction(1, 3)},
    }


@dataclass(frozen=True)
class DistributionSpec:
    total_requested: int
    axes: Mapping[str, Mapping[str, Fraction]] = field(default_factory=_default_axes)
    relaxation: tuple[str, ...] = DEFAULT_RELAXATION

    def __post_init__(self):
        if self.total_requested <= 0:
            raise SamplingError("total_requested must be positive")
        if set(self.axes) != set(AXES):
            raise SamplingError(f"axes must be exactly {AXES}, got {sorted(self.axes)}")
        if sorted(self.relaxation) != sorted(AXES):
            raise SamplingError("relaxation order must list every axis once")
        normalized = {}
        for axis in AXES:
            props = {str(k): as_fraction(v) for k, v in self.axes[axis].items()}
            if any(p < 0 for p in props.values()):
                raise SamplingError(f"negative proportion on axis {axis}")
            total = sum(props.values(), Fraction(0))
            if abs(float(total) - 1.0) > 1e-9:
                raise SamplingError(f"proportions on axis {axis} sum to {float(total)}, not 1")
            normalized[axis] = {k: v / total for k, v in props.items()}
        object.__setattr__(self, "axes", normalized)

    def proportion(self, key: StratumKey) -> Fraction:
        p = Fraction(1)
        for axis, value in zip(AXES, key):
            p *= self.axes[axis].get(value, Fraction(0))
        return p


def stratum_key(s: AnnotatedSentence) -> StratumKey:
    return (s.category.value, s.length_class.value, s.tense.value, s.polarity.value,
            s.similarity_band.value)


@dataclass
class QuotaTable:
    requested: dict[StratumKey, int]
    ideal: dict[StratumKey, Fraction]
    available: dict[StratumKey, int]
    realized: dict[StratumKey, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.requested.values())

    def to_tsv(self) -> str:
        lines = ["\t".join(AXES + ("ideal", "available", "requested", "realized"))]
        for key in sorted(self.requested):
            lines.append("\t".join(key + (
                f"{float(self.ideal.get(key, 0)):.6f}",
                str(self.available.get(key, 0)),
                str(self.requested[key]),
                str(self.realized.get(key, 0)),
            )))
        return "\n".join(lines) + "\n"


def largest_remainder(ideals: Sequence[Fraction], total: int) -> list[int]:
    """Hamilton apportionment; equal remainders go to the lower index."""
    floors = [int(x // 1) for x in ideals]
    spare = total - sum(floors)
    if spare < 0 or spare > len(ideals):
        raise SamplingError(f"ideals do not sum to {total}")
    order = sorted(range(len(ideals)), key=lambda i: (-(ideals[i] - floors[i]), i))
    for i in order[:spare]:
        floors[i] += 1
    return floors


def _group_key(key: StratumKey, relaxed: set[str]) -> tuple:
    return tuple(v for axis, v in zip(AXES, key) if axis not in relaxed)


def compute_targets(pool_stats: Mapping[StratumKey, int], spec: DistributionSpec) -> QuotaTable:
    if not pool_stats or sum(pool_stats.values()) == 0:
        raise SamplingError("sampling pool is empty")
    pool_size = sum(pool_stats.values())
    if spec.total_requested > pool_size:
        raise SamplingError(
            f"requested {spec.total_requested} sentences but the pool holds only "
            f"{pool_size} (short by {spec.total_requested - pool_size})")

    targeted = [[v for v, p in spec.axes[a].items() if p > 0] for a in AXES]
    strata = sorted(set(pool_stats) | set(product(*targeted)))
    ideal = {k: spec.total_requested * spec.proportion(k) for k in strata}
    quotas = dict(zip(strata, largest_remainder([ideal[k] for k in strata],
                                                spec.total_requested)))
    avail = {k: pool_stats.get(k, 0) for k in strata}
    rank = {k: i for i, k in enumerate(strata)}

    for k in strata:
        excess = quotas[k] - avail[k]
        if excess <= 0:
            continue
        quotas[k] = avail[k]
        relaxed: set[str] = set()
        for axis in spec.relaxation:
            relaxed.add(axis)
            group = _group_key(k, relaxed)
            members = [m for m in strata if _group_key(m, relaxed) == group]
            while excess:
                open_ = [m for m in members if quotas[m] < avail[m]]
                if not open_:
                    break
                best = min(open_, key=lambda m: (-(ideal[m] - quotas[m]), rank[m]))
                quotas[best] += 1
                excess -= 1
            if not excess:
                break
        if excess:
            raise SamplingError("could not place quota; pool exhausted")

    return QuotaTable(
        requested={k: q for k, q in quotas.items() if q or avail[k]},
        ideal={k: ideal[k] for k in strata if quotas[k] or avail[k]},
        available={k: avail[k] for k in strata if quotas[k] or avail[k]},
    )


def pool_statistics(pool: Iterable[AnnotatedSentence]) -> dict[StratumKey, int]:
    stats: dict[StratumKey, int] = defaultdict(int)
    for s in pool:
        if s.origin == Origin.SCRAPED:
            stats[stratum_key(s)] += 1
    return dict(stats)


def stratified_sample(pool: Sequence[AnnotatedSentence], quotas: QuotaTable,
                      seed: int) -> list[str]:
    """Return selected ids in pool order.

    Scraped sentences are drawn per stratum; Borrowed and Synthetic ones
    pass through untouched.
    """
    rng = random.Random(derive_seed(seed, "sample"))
    members: dict[StratumKey, list[int]] = defaultdict(list)
    chosen: set[int] = set()
    for i, s in enumerate(pool):
        if s.origin == Origin.SCRAPED:
            members[stratum_key(s)].append(i)
        else:
            chosen.add(i)
    unknown = set(quotas.requested) | set(members)
    for key in sorted(unknown):
        want = quotas.requested.get(key, 0)
        have = members.get(key, [])
        if want > len(have):
            raise SamplingError(f"stratum {key}: quota {want} exceeds {len(have)} available")
        picked = rng.sample(have, want) if want else []
        quotas.realized[key] = len(picked)
        chosen.update(picked)
    return [pool[i].id for i in sorted(chosen)]


def _split_key(pair: ParallelPair) -> tuple[str, str]:
    return (pair.nepali.category.value, pair.nepali.length_class.value)


def round_half_up(x: Fraction) -> int:
    return int((x + Fraction(1, 2)) // 1)


def split_train_test(pairs: Sequence[ParallelPair], test_fraction, seed: int,
                     key: Callable[[ParallelPair], Hashable] = _split_key,
                     ) -> tuple[list[ParallelPair], list[ParallelPair]]:
    """Stratified split; each stratum's test share is within one item of exact."""
    f = as_fraction(test_fraction)
    if not 0 < f < 1:
        raise SamplingError(f"test_fraction must lie strictly between 0 and 1, got {test_fraction}")
    groups: dict[Hashable, list[int]] = defaultdict(list)
    for i, p in enumerate(pairs):
        groups[key(p)].append(i)
    keys = sorted(groups)
    n_test = round_half_up(len(pairs) * f)
    per_group = largest_remainder([len(groups[k]) * f for k in keys], n_test)
    rng = random.Random(derive_seed(seed, "split"))
    test_idx: set[int] = set()
    for k, m in zip(keys, per_group):
        test_idx.update(rng.sample(groups[k], m))
    train = [replace(p, split=Split.TRAIN) for i, p in enumerate(pairs) if i not in test_idx]
    test = [replace(p, split=Split.TEST) for i, p in enumerate(pairs) if i in test_idx]
    return train, test


def default_spec(total: int) -> DistributionSpec:
    return DistributionSpec(total_requested=total)


__all__ = [
    "AXES", "DistributionSpec", "QuotaTable", "SamplingError", "compute_targets",
    "largest_remainder", "stratified_sample", "split_train_test", "pool_statistics",
    "stratum_key", "derive_seed", "round_half_up", "default_spec",
]

