"""Exact and embedding-based near-duplicate removal."""
from __future__ import annotations

import logging
import math
import unicodedata
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Protocol, Sequence, Union

import numpy as np

from .model import Origin, SimilarityBand

log = logging.getLogger(__name__)

NORM_TOL = 1e-6


class EmbeddingError(RuntimeError):
    pass


class EmbeddingProvider(Protocol):
    def embed(self, sentence_id: str, text: str) -> np.ndarray: ...


def _text_of(item) -> str:
    return item if isinstance(item, str) else item.text


def exact_dedup(sentences: Sequence) -> list:
    """Keep the first occurrence of each text (compared after NFC)."""
    seen: set[str] = set()
    out = []
    for s in sentences:
        key = unicodedata.normalize("NFC", _text_of(s))
        if key in seen:
            continue
        seen.add(key)
        out.append(s)
    return out


def _unit(v, what: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{what} must be one-dimensional")
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not math.isfinite(norm):
        raise ValueError(f"{what} has zero or non-finite norm")
    return v / norm


def cosine(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    score = float(np.dot(_unit(a, "a"), _unit(b, "b")))
    return min(1.0, max(-1.0, score))


# ------------------------------------------------------------------ providers

@dataclass(frozen=True, eq=False)
class HashedNgramEmbedder:
    """Character n-gram counts hashed into ``dim`` buckets, TF-IDF weighted.

    Without ``fit`` every bucket has idf 1. Hashing uses CRC-32 so vectors
    are identical across processes.
    """

    dim: int = 512
    ngram_range: tuple[int, int] = (2, 3)
    idf: Optional[np.ndarray] = None

    def _counts(self, text: str) -> np.ndarray:
        padded = " " + " ".join(unicodedata.normalize("NFC", text).split()) + " "
        counts = np.zeros(self.dim, dtype=np.float64)
        lo, hi = self.ngram_range
        for n in range(lo, hi + 1):
            for i in range(len(padded) - n + 1):
                gram = padded[i:i + n]
                if gram.strip():
                    counts[zlib.crc32(gram.encode("utf-8")) % self.dim] += 1.0
        return counts

    def fit(self, texts: Iterable[str]) -> HashedNgramEmbedder:
        df = np.zeros(self.dim, dtype=np.float64)
        n_docs = 0
        for t in texts:
            df += self._counts(t) > 0
            n_docs += 1
        idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
        return HashedNgramEmbedder(self.dim, self.ngram_range, idf)

    def embed(self, sentence_id: str, text: str) -> np.ndarray:
        v = self._counts(text)
        if self.idf is not None:
            v = v * self.idf
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise EmbeddingError(f"{sentence_id}: no character n-grams in {text!r}")
        return v / norm


@dataclass(frozen=True, eq=False)
class FileBackedEmbeddings:
    vectors: Mapping[str, np.ndarray]
    dim: int

    def embed(self, sentence_id: str, text: str) -> np.ndarray:
        try:
            return self.vectors[sentence_id]
        except KeyError:
            raise EmbeddingError(f"{sentence_id}: no vector in sidecar file") from None

    @classmethod
    def from_mapping(cls, vectors: Mapping[str, Sequence[float]]) -> FileBackedEmbeddings:
        dims = {len(v) for v in vectors.values()}
        if len(dims) > 1:
            raise ValueError(f"mixed vector dimensions {sorted(dims)}")
        unit = {k: _unit(v, f"vector {k}") for k, v in vectors.items()}
        return cls(unit, dims.pop() if dims else 0)


def load_vector_sidecar(path: Union[str, Path]) -> FileBackedEmbeddings:
    """Read ``#dim=D`` followed by ``id<TAB>v1,...,vD`` lines."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if dim is None:
                if not line.startswith("#dim="):
                    raise ValueError(f"{path}:{lineno}: expected '#dim=D' header")
                dim = int(line[5:])
                continue
            sid, _, values = line.partition("\t")
            v = np.array([float(x) for x in values.split(",")], dtype=np.float64)
            if v.shape != (dim,):
                raise ValueError(f"{path}:{lineno}: expected {dim} values, got {v.size}")
            norm = float(np.linalg.norm(v))
            if norm == 0.0:
                raise ValueError(f"{path}:{lineno}: zero vector for {sid}")
            if abs(norm - 1.0) > NORM_TOL:
                log.warning("%s:%d: vector for %s has norm %.6g, normalizing", path, lineno, sid, norm)
            vectors[sid] = v / norm
    if dim is None:
        raise ValueError(f"{path}: empty sidecar file")
    return FileBackedEmbeddings(vectors, dim)


def write_vector_sidecar(path: Union[str, Path], vectors: Mapping[str, Sequence[float]]) -> None:
    dims = {len(v) for v in vectors.values()}
    if len(dims) != 1:
        raise ValueError("sidecar needs at least one vector and a single dimension")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#dim={dims.pop()}\n")
        for sid, v in vectors.items():
            fh.write(sid + "\t" + ",".join(repr(float(x)) for x in v) + "\n")


# ---------------------------------------------------------------- the index

class CandidateIndex:
    """Exact similarity search over a fixed set of unit vectors."""

    def __init__(self, vectors: Mapping[str, np.ndarray]):
        self.ids = tuple(vectors)
        if self.ids:
            self._matrix = np.vstack([np.asarray(vectors[i], dtype=np.float64) for i in self.ids])
        else:
            self._matrix = np.zeros((0, 0))
        self._matrix.setflags(write=False)

    def __len__(self) -> int:
        return len(self.ids)

    def similarities(self, query) -> np.ndarray:
        if not self.ids:
            return np.zeros(0)
        return self._matrix @ np.asarray(query, dtype=np.float64)

    def query(self, vector, threshold: float) -> list[str]:
        sims = self.similarities(vector)
        return [self.ids[i] for i in np.flatnonzero(sims > threshold)]


def build_candidate_index(vectors: Mapping[str, np.ndarray]) -> CandidateIndex:
    return CandidateIndex(vectors)


# ------------------------------------------------------------ the filter

@dataclass
class DedupReport:
    kept: list[str] = field(default_factory=list)
    dropped: list[tuple[str, str, float]] = field(default_factory=list)
    comparisons_made: int = 0


def _embed_all(items: Sequence, provider: EmbeddingProvider) -> np.ndarray:
    rows = []
    for item in items:
        try:
            v = provider.embed(item.id, item.text)
        except EmbeddingError:
            raise
        except Exception as exc:
            raise EmbeddingError(f"{item.id}: embedding failed: {exc}") from exc
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1 or abs(float(np.linalg.norm(v)) - 1.0) > NORM_TOL:
            raise EmbeddingError(f"{item.id}: provider returned a non-unit vector")
        rows.append(v)
    return np.vstack(rows) if rows else np.zeros((0, 0))


def semantic_filter(sentences: Sequence, provider: EmbeddingProvider,
                    threshold: float = 0.8, skip_borrowed: bool = True) -> DedupReport:
    """Greedy scan: drop a sentence whose similarity to an already-kept one
    is strictly greater than ``threshold``.

    Items need ``id`` and ``text``; if they carry ``category`` it must be a
    single value. Items with origin Borrowed are kept without comparison.
    """
    categories = {getattr(s, "category", None) for s in sentences}
    if len(categories) > 1:
        raise ValueError(f"semantic_filter expects one category, got {len(categories)}")
    report = DedupReport()
    candidates = [s for s in sentences
                  if not (skip_borrowed and getattr(s, "origin", None) == Origin.BORROWED)]
    matrix = _embed_all(candidates, provider)
    kept_mat = np.empty_like(matrix)
    kept_ids: list[str] = []
    cand_pos = {id(s): k for k, s in enumerate(candidates)}
    for s in sentences:
        k = cand_pos.get(id(s))
        if k is None:
            report.kept.append(s.id)
            continue
        nk = len(kept_ids)
        if nk:
            sims = kept_mat[:nk] @ matrix[k]
            report.comparisons_made += nk
            best = int(np.argmax(sims))
            if sims[best] > threshold:
                report.dropped.append((s.id, kept_ids[best], float(sims[best])))
                continue
        kept_mat[nk] = matrix[k]
        kept_ids.append(s.id)
        report.kept.append(s.id)
    return report


def band_for(score: Optional[float], edges: tuple[float, float]) -> SimilarityBand:
    if score is None:
        return SimilarityBand.UNASSIGNED
    if score < edges[0]:
        return SimilarityBand.LOW
    if score < edges[1]:
        return SimilarityBand.MEDIUM
    return SimilarityBand.HIGH


DEFAULT_BAND_EDGES = (0.8 / 3, 1.6 / 3)


def similarity_bands(sentences: Sequence, provider: EmbeddingProvider,
                     edges: tuple[float, float] = DEFAULT_BAND_EDGES) -> dict[str, SimilarityBand]:
    """Band each sentence by its highest similarity to any other sentence in the list.

    Borrowed sentences and singleton lists stay Unassigned.
    """
    items = [s for s in sentences if getattr(s, "origin", None) != Origin.BORROWED]
    bands = {s.id: SimilarityBand.UNASSIGNED for s in sentences}
    if len(items) < 2:
        return bands
    matrix = _embed_all(items, provider)
    sims = matrix @ matrix.T
    np.fill_diagonal(sims, -np.inf)
    for row, s in zip(sims, items):
        bands[s.id] = band_for(float(row.max()), edges)
    return bands
