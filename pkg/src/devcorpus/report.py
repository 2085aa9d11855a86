"""Distribution tables and manifest files.

A manifest directory holds:

``corpus.src.txt`` / ``corpus.tgt.txt``
    Nepali and Tamang text, one pair per line, line-aligned.
``corpus.meta.tsv``
    One row per pair, columns ``META_COLUMNS``, with a header row.
``stats.txt`` / ``stats.json``
    The distribution table, human- and machine-readable.
``manifest.json``
    Seed, pipeline config hash and pair count.

All files are UTF-8 with LF line endings.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .model import (
    AnnotatedSentence,
    Category,
    CorpusManifest,
    LengthClass,
    Origin,
    ParallelPair,
    Polarity,
    SimilarityBand,
    Split,
    Tense,
    validate_record,
)

FORMAT_VERSION = 1

META_COLUMNS = ("pair_id", "split", "sentence_id", "origin", "category", "word_count",
                "length_class", "tense", "polarity", "similarity_band",
                "source_article_id", "nepali", "tamang")

AXIS_VALUES: dict[str, tuple[str, ...]] = {
    "length": tuple(c.value for c in (LengthClass.SHORT, LengthClass.MEDIUM, LengthClass.LONG,
                                      LengthClass.VERY_LONG, LengthClass.BELOW_MIN,
                                      LengthClass.OUT_OF_RANGE)),
    "tense": (Tense.NON_PAST.value, Tense.PAST.value, Tense.UNKNOWN.value),
    "polarity": (Polarity.AFFIRMATIVE.value, Polarity.NEGATIVE.value, Polarity.UNKNOWN.value),
    "category": tuple(c.value for c in Category),
}
# shown only when non-zero
_OPTIONAL_ROWS = {("length", LengthClass.BELOW_MIN.value), ("length", LengthClass.OUT_OF_RANGE.value)}


class ReportError(RuntimeError):
    pass


def percent_tenths(count: int, total: int) -> int:
    """count/total as a percentage in tenths, rounded half up."""
    if total == 0:
        return 0
    return (2000 * count + total) // (2 * total)


def format_percent(count: int, total: int) -> str:
    t = percent_tenths(count, total)
    return f"{t // 10}.{t % 10}"


@dataclass
class ColumnStats:
    total: int = 0
    counts: dict[str, dict[str, int]] = field(
        default_factory=lambda: {axis: {v: 0 for v in values} for axis, values in AXIS_VALUES.items()})

    def add(self, s: AnnotatedSentence) -> None:
        self.total += 1
        self.counts["length"][s.length_class.value] += 1
        self.counts["tense"][s.tense.value] += 1
        self.counts["polarity"][s.polarity.value] += 1
        self.counts["category"][s.category.value] += 1

    def rows(self, axis: str) -> list[tuple[str, int, str]]:
        return [(v, c, format_percent(c, self.total)) for v, c in self.counts[axis].items()]


@dataclass
class DistributionTable:
    columns: dict[str, ColumnStats]

    def to_dict(self) -> dict:
        return {
            "columns": {
                name: {
                    "total": col.total,
                    "axes": {axis: {v: {"count": c, "percent": p} for v, c, p in col.rows(axis)}
                             for axis in AXIS_VALUES},
                }
                for name, col in self.columns.items()
            }
        }

    @classmethod
    def from_dict(cls, data: dict) -> DistributionTable:
        columns = {}
        for name, col in data["columns"].items():
            stats = ColumnStats(total=col["total"])
            for axis, rows in col["axes"].items():
                for value, cell in rows.items():
                    stats.counts[axis][value] = cell["count"]
                    if cell["percent"] != format_percent(cell["count"], stats.total):
                        raise ReportError(f"{name}/{axis}/{value}: stored percentage "
                                          f"{cell['percent']} disagrees with counts")
            columns[name] = stats
        return cls(columns)

    def render(self) -> str:
        names = list(self.columns)
        header = ["axis", "value"] + names
        lines = [header]
        for axis in AXIS_VALUES:
            for value in AXIS_VALUES[axis]:
                cells = [self.columns[n].counts[axis][value] for n in names]
                if (axis, value) in _OPTIONAL_ROWS and not any(cells):
                    continue
                lines.append([axis, value] + [
                    f"{c:,} ({format_percent(c, self.columns[n].total)}%)"
                    for c, n in zip(cells, names)])
        lines.append(["total", ""] + [f"{self.columns[n].total:,}" for n in names])
        widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
        return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
                         for row in lines) + "\n"


def column_name(pair: ParallelPair, by_origin: bool) -> str:
    if by_origin:
        return f"{pair.nepali.origin.value}:{pair.split.value}"
    return pair.split.value


def corpus_stats(source: Union[CorpusManifest, Iterable[ParallelPair]],
                 by_origin: bool = False) -> DistributionTable:
    pairs = source.pairs if isinstance(source, CorpusManifest) else source
    columns: dict[str, ColumnStats] = {}
    if not by_origin:
        columns = {Split.TRAIN.value: ColumnStats(), Split.TEST.value: ColumnStats()}
    for p in pairs:
        columns.setdefault(column_name(p, by_origin), ColumnStats()).add(p.nepali)
    return DistributionTable(columns)


def build_manifest(pairs: Sequence[ParallelPair], seed: int, config_hash: str) -> CorpusManifest:
    pairs = tuple(pairs)
    return CorpusManifest(pairs=pairs, stats=corpus_stats(pairs), seed=seed,
                          pipeline_config_hash=config_hash)


# ------------------------------------------------------------------ meta TSV

def pair_to_row(p: ParallelPair) -> list[str]:
    s = p.nepali
    return [p.id, p.split.value, s.id, s.origin.value, s.category.value, str(s.word_count),
            s.length_class.value, s.tense.value, s.polarity.value, s.similarity_band.value,
            s.source_article_id or "", s.text, p.tamang]


def pair_from_row(row: Sequence[str]) -> ParallelPair:
    if len(row) != len(META_COLUMNS):
        raise ReportError(f"expected {len(META_COLUMNS)} columns, got {len(row)}")
    r = dict(zip(META_COLUMNS, row))
    sentence = AnnotatedSentence(
        id=r["sentence_id"],
        text=r["nepali"],
        category=Category(r["category"]),
        word_count=int(r["word_count"]),
        length_class=LengthClass(r["length_class"]),
        tense=Tense(r["tense"]),
        polarity=Polarity(r["polarity"]),
        similarity_band=SimilarityBand(r["similarity_band"]),
        source_article_id=r["source_article_id"] or None,
        origin=Origin(r["origin"]),
    )
    return ParallelPair(id=r["pair_id"], nepali=sentence, tamang=r["tamang"],
                        split=Split(r["split"]))


def format_meta(pairs: Iterable[ParallelPair]) -> str:
    lines = ["\t".join(META_COLUMNS)]
    for p in pairs:
        verdict = validate_record(p)
        if not verdict.ok:
            raise ReportError(f"pair {p.id!r} is invalid: {', '.join(verdict.violations)}")
        lines.append("\t".join(pair_to_row(p)))
    return "\n".join(lines) + "\n"


def parse_meta(text: str) -> list[ParallelPair]:
    lines = text.split("\n")
    if not lines or lines[0] != "\t".join(META_COLUMNS):
        raise ReportError("meta TSV header does not match the expected columns")
    return [pair_from_row(line.split("\t")) for line in lines[1:] if line]


def write_meta(pairs: Iterable[ParallelPair], path: Union[str, Path]) -> None:
    _write(Path(path), format_meta(pairs))


def read_meta(path: Union[str, Path]) -> list[ParallelPair]:
    return parse_meta(_read(Path(path)))


def _write(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc}") from exc


def _read(path: Path) -> str:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as exc:
        raise ReportError(f"cannot read {path}: {exc}") from exc


# ------------------------------------------------------------------ manifest

def emit_manifest(manifest: CorpusManifest, destination: Union[str, Path],
                  extra_files: Optional[dict[str, str]] = None) -> list[Path]:
    dest = Path(destination)
    try:
        dest.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportError(f"cannot create {dest}: {exc}") from exc
    stats = corpus_stats(manifest)
    files = {
        "corpus.src.txt": "".join(p.nepali.text + "\n" for p in manifest.pairs),
        "corpus.tgt.txt": "".join(p.tamang + "\n" for p in manifest.pairs),
        "corpus.meta.tsv": format_meta(manifest.pairs),
        "stats.txt": stats.render(),
        "stats.json": _dumps(stats.to_dict()),
        "manifest.json": _dumps({
            "format_version": FORMAT_VERSION,
            "seed": manifest.seed,
            "pipeline_config_hash": manifest.pipeline_config_hash,
            "pair_count": len(manifest.pairs),
        }),
    }
    files.update(extra_files or {})
    written = []
    for name, text in files.items():
        _write(dest / name, text)
        written.append(dest / name)
    return written


def load_manifest(source: Union[str, Path]) -> CorpusManifest:
    src = Path(source)
    info = json.loads(_read(src / "manifest.json"))
    pairs = parse_meta(_read(src / "corpus.meta.tsv"))
    if len(pairs) != info["pair_count"]:
        raise ReportError(f"{src}: meta has {len(pairs)} rows, manifest says {info['pair_count']}")
    src_lines = _read(src / "corpus.src.txt").split("\n")[:-1]
    tgt_lines = _read(src / "corpus.tgt.txt").split("\n")[:-1]
    if len(src_lines) != len(pairs) or len(tgt_lines) != len(pairs):
        raise ReportError(f"{src}: parallel text files are not aligned with the meta table")
    for i, (p, s, t) in enumerate(zip(pairs, src_lines, tgt_lines), 1):
        if p.nepali.text != s or p.tamang != t:
            raise ReportError(f"{src}: line {i} of the text files disagrees with pair {p.id}")
    stored = DistributionTable.from_dict(json.loads(_read(src / "stats.json")))
    stats = corpus_stats(pairs)
    if stored.to_dict() != stats.to_dict():
        raise ReportError(f"{src}: stats.json does not match the pairs")
    return CorpusManifest(pairs=tuple(pairs), stats=stats, seed=int(info["seed"]),
                          pipeline_config_hash=info["pipeline_config_hash"])


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, sort_keys=True) + "\n"
