"""End-to-end corpus construction.

Stages run in a fixed order and each records how many items came in, how
many went out and why the rest were rejected. Every random draw comes from
``derive_seed(config.seed, stage_name)``.
"""
from __future__ import annotations

import hashlib
import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence, Union

from . import ingest
from .annotator import NotCleanedError, PatternTable, annotate, default_table, load_pattern_table
from .cleaner import CleanerConfig, clean_pipeline, light_clean, load_cleaner_config
from .dedup import (
    DEFAULT_BAND_EDGES,
    EmbeddingProvider,
    HashedNgramEmbedder,
    exact_dedup,
    load_vector_sidecar,
    semantic_filter,
    similarity_bands,
)
from .model import (
    AnnotatedSentence,
    Article,
    Category,
    CorpusManifest,
    LengthClass,
    Origin,
    ParallelPair,
    Split,
)
from .report import build_manifest, emit_manifest
from .sampler import (
    DEFAULT_RELAXATION,
    DistributionSpec,
    QuotaTable,
    SamplingError,
    compute_targets,
    pool_statistics,
    split_train_test,
    stratified_sample,
)
from .segmenter import split_sentences

log = logging.getLogger(__name__)

PATH_KEYS = ("dump", "keyword_map", "layers", "patterns", "cleaner", "embeddings",
             "translations", "borrowed")


class PipelineConfigError(ValueError):
    """Raised before any stage runs."""


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str, reports: Sequence["StageReport"]):
        counts = "; ".join(f"{r.stage}: {r.input_count}->{r.output_count}" for r in reports)
        super().__init__(f"stage {stage} failed: {message}"
                         + (f" (completed: {counts})" if counts else ""))
        self.stage = stage
        self.reports = list(reports)


# ------------------------------------------------------------------- config

@dataclass(frozen=True)
class PipelineConfig:
    seed: int
    dump: Optional[Path] = None
    keyword_map: Optional[Path] = None
    layers: Optional[Path] = None
    patterns: Optional[Path] = None
    cleaner: Optional[Path] = None
    embeddings: Optional[Path] = None
    translations: Optional[Path] = None
    borrowed: Optional[Path] = None
    threshold: float = 0.8
    band_edges: tuple[float, float] = DEFAULT_BAND_EDGES
    sample_size: Optional[int] = None
    axes: Optional[dict] = None
    relaxation: tuple[str, ...] = DEFAULT_RELAXATION
    test_fraction: str = "0.25"
    keep_below_min: bool = False
    workers: int = 1

    def validate(self, require_dump: bool = True) -> None:
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise PipelineConfigError("seed must be an integer")
        if require_dump and self.dump is None:
            raise PipelineConfigError("no article dump configured")
        for key in PATH_KEYS:
            p = getattr(self, key)
            if p is not None and not Path(p).is_file():
                raise PipelineConfigError(f"{key}: file not found: {p}")
        if not 0 <= self.threshold <= 1:
            raise PipelineConfigError("threshold must lie in [0, 1]")
        lo, hi = self.band_edges
        if not 0 <= lo <= hi <= 1:
            raise PipelineConfigError("band_edges must satisfy 0 <= low <= high <= 1")
        if self.sample_size is not None and self.sample_size <= 0:
            raise PipelineConfigError("sample_size must be positive")
        if not 0 < Fraction(self.test_fraction) < 1:
            raise PipelineConfigError("test_fraction must lie strictly between 0 and 1")
        if self.workers < 1:
            raise PipelineConfigError("workers must be >= 1")
        try:
            self.distribution(1)
        except SamplingError as exc:
            raise PipelineConfigError(f"distribution: {exc}") from None

    def distribution(self, total: int) -> DistributionSpec:
        kwargs: dict[str, Any] = {"relaxation": tuple(self.relaxation)}
        if self.axes is not None:
            kwargs["axes"] = self.axes
        return DistributionSpec(total_requested=total, **kwargs)

    def digest(self) -> str:
        """Hash of every setting that can change the output, plus input file contents.

        Paths themselves and the worker count are left out so that moving the
        inputs or changing parallelism keeps the hash.
        """
        h = hashlib.sha256()
        settings = {
            "seed": self.seed,
            "threshold": self.threshold,
            "band_edges": list(self.band_edges),
            "sample_size": self.sample_size,
            "axes": {a: {k: str(v) for k, v in vals.items()} for a, vals in
                     (self.axes or {}).items()},
            "relaxation": list(self.relaxation),
            "test_fraction": str(self.test_fraction),
            "keep_below_min": self.keep_below_min,
        }
        h.update(json.dumps(settings, sort_keys=True).encode())
        for key in PATH_KEYS:
            p = getattr(self, key)
            h.update(f"\0{key}=".encode())
            if p is not None:
                h.update(hashlib.sha256(Path(p).read_bytes()).digest())
        return h.hexdigest()


def config_from_dict(data: dict, base_dir: Union[str, Path, None] = None) -> PipelineConfig:
    """Build a config from its JSON form. Relative paths resolve against ``base_dir``."""
    if not isinstance(data, dict):
        raise PipelineConfigError("config must be a JSON object")
    if "seed" not in data:
        raise PipelineConfigError("config has no seed")
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    kwargs: dict[str, Any] = {"seed": data["seed"]}
    paths = data.get("paths", {})
    unknown = set(paths) - set(PATH_KEYS)
    if unknown:
        raise PipelineConfigError(f"unknown path keys {sorted(unknown)}")
    for key, value in paths.items():
        if value is not None:
            kwargs[key] = base / value
    dist = data.get("distribution", {})
    if "sample_size" in dist:
        kwargs["sample_size"] = dist["sample_size"]
    if "axes" in dist:
        kwargs["axes"] = dist["axes"]
    if "relaxation" in dist:
        kwargs["relaxation"] = tuple(dist["relaxation"])
    for key in ("threshold", "keep_below_min", "workers"):
        if key in data:
            kwargs[key] = data[key]
    if "band_edges" in data:
        kwargs["band_edges"] = tuple(data["band_edges"])
    if "test_fraction" in data:
        kwargs["test_fraction"] = str(data["test_fraction"])
    try:
        return PipelineConfig(**kwargs)
    except TypeError as exc:
        raise PipelineConfigError(str(exc)) from None


def load_config(path: Union[str, Path], require_dump: bool = True, **overrides) -> PipelineConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise PipelineConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PipelineConfigError(f"{path}: invalid JSON: {exc}") from exc
    cfg = config_from_dict(data, path.parent)
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    cfg.validate(require_dump=require_dump)
    return cfg


# ------------------------------------------------------------------ reports

@dataclass
class StageReport:
    stage: str
    input_count: int = 0
    output_count: int = 0
    rejections: dict[str, int] = field(default_factory=dict)
    notes: dict[str, int] = field(default_factory=dict)

    def reject(self, reason: str, n: int = 1) -> None:
        self.rejections[reason] = self.rejections.get(reason, 0) + n

    @property
    def conserved(self) -> bool:
        return self.input_count == self.output_count + sum(self.rejections.values())

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CleanedSentence:
    id: str
    text: str
    category: Category
    source_article_id: Optional[str] = None
    origin: Origin = Origin.SCRAPED


@dataclass
class Resources:
    tables: PatternTable
    cleaner: CleanerConfig
    layers: tuple
    keyword_map: ingest.KeywordMap

    @classmethod
    def from_config(cls, cfg: PipelineConfig) -> Resources:
        tables = load_pattern_table(cfg.patterns) if cfg.patterns else default_table()
        return cls(
            tables=tables,
            cleaner=load_cleaner_config(cfg.cleaner, tables),
            layers=ingest.load_layers(cfg.layers),
            keyword_map=ingest.load_keyword_map(cfg.keyword_map),
        )


@dataclass
class PipelineResult:
    manifest: CorpusManifest
    reports: list[StageReport]
    quotas: Optional[QuotaTable] = None

    def report_json(self) -> str:
        return json.dumps([r.to_dict() for r in self.reports], indent=2,
                          ensure_ascii=False) + "\n"


# ------------------------------------------------------------------- stages

def stage_ingest(lines: Iterable[str], res: Resources) -> tuple[list[tuple[Article, Category]], list[StageReport]]:
    lines = [l for l in lines if l.strip()]
    parsed = ingest.parse_article_stream(lines)
    rep = StageReport("ingest", input_count=len(lines), output_count=len(parsed.articles))
    for reason, n in parsed.reasons.items():
        rep.reject("DuplicateId" if reason == "duplicate id" else "Malformed", n)

    cat = StageReport("categorize", input_count=len(parsed.articles))
    articles, dropped = ingest.dedup_urls(parsed.articles)
    if dropped:
        cat.reject("DuplicateUrl", dropped)
    out = []
    for a in articles:
        c = ingest.categorize(a, res.layers, res.keyword_map)
        if c is None:
            cat.reject("Uncategorized")
        else:
            out.append((a, c))
    cat.output_count = len(out)
    return out, [rep, cat]


def _clean_article(article: Article, category: Category,
                   cleaner: CleanerConfig) -> tuple[int, list[CleanedSentence], Counter]:
    raw = split_sentences(article.body)
    kept, rejected = [], Counter()
    for i, sentence in enumerate(raw):
        outcome = clean_pipeline(sentence, cleaner)
        if outcome.ok:
            kept.append(CleanedSentence(f"{article.id}:{i}", outcome.cleaned, category, article.id))
        else:
            rejected[outcome.rejection.value] += 1
    return len(raw), kept, rejected


def stage_segment_clean(articles: Sequence[tuple[Article, Category]], res: Resources,
                        workers: int = 1) -> tuple[list[CleanedSentence], list[StageReport]]:
    job = lambda pair: _clean_article(pair[0], pair[1], res.cleaner)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, articles))
        # map() preserves input order, so the result is independent of scheduling
    else:
        results = [job(a) for a in articles]

    seg = StageReport("segment", input_count=len(articles))
    clean = StageReport("clean")
    out: list[CleanedSentence] = []
    for n_raw, kept, rejected in results:
        if n_raw == 0:
            seg.reject("NoSentences")
        clean.input_count += n_raw
        out.extend(kept)
        for reason, n in sorted(rejected.items()):
            clean.reject(reason, n)
    seg.output_count = seg.input_count - seg.rejections.get("NoSentences", 0)
    seg.notes["sentences"] = clean.input_count
    clean.output_count = len(out)
    return out, [seg, clean]


def read_borrowed(path: Union[str, Path]) -> list[tuple[str, Category, str, str]]:
    """Borrowed parallel data: TSV with header ``id category nepali tamang``."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != ["id", "category", "nepali", "tamang"]:
            raise PipelineConfigError(f"{path}: expected header id/category/nepali/tamang")
        for lineno, line in enumerate(fh, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise PipelineConfigError(f"{path}:{lineno}: expected 4 columns")
            try:
                rows.append((parts[0], Category(parts[1]), parts[2], parts[3]))
            except ValueError:
                raise PipelineConfigError(f"{path}:{lineno}: unknown category {parts[1]!r}") from None
    return rows


def stage_borrowed(rows, res: Resources) -> tuple[list[CleanedSentence], dict[str, str], StageReport]:
    rep = StageReport("borrowed", input_count=len(rows))
    out, translations = [], {}
    for rid, category, nepali, tamang in rows:
        outcome = light_clean(nepali, res.cleaner)
        if not outcome.ok:
            rep.reject(outcome.rejection.value)
            continue
        sid = f"borrowed:{rid}"
        out.append(CleanedSentence(sid, outcome.cleaned, category, None, Origin.BORROWED))
        translations[sid] = " ".join(tamang.split())
    rep.output_count = len(out)
    return out, translations, rep


def stage_annotate(sentences: Sequence[CleanedSentence], res: Resources,
                   keep_below_min: bool = False) -> tuple[list[AnnotatedSentence], StageReport]:
    rep = StageReport("annotate", input_count=len(sentences))
    out = []
    for s in sentences:
        try:
            a = annotate(s.text, s.category, res.tables, sentence_id=s.id, origin=s.origin,
                         source_article_id=s.source_article_id)
        except NotCleanedError:
            rep.reject("NotCleaned")
            continue
        if a.length_class is LengthClass.OUT_OF_RANGE:
            rep.reject(LengthClass.OUT_OF_RANGE.value)
        elif a.length_class is LengthClass.BELOW_MIN and not keep_below_min:
            rep.reject(LengthClass.BELOW_MIN.value)
        else:
            out.append(a)
    rep.output_count = len(out)
    return out, rep


def stage_exact_dedup(sentences: Sequence[AnnotatedSentence]) -> tuple[list[AnnotatedSentence], StageReport]:
    out = exact_dedup(sentences)
    rep = StageReport("exact_dedup", input_count=len(sentences), output_count=len(out))
    if len(sentences) > len(out):
        rep.reject("Duplicate", len(sentences) - len(out))
    return out, rep


def builtin_provider(sentences: Sequence[AnnotatedSentence]) -> HashedNgramEmbedder:
    return HashedNgramEmbedder().fit(s.text for s in sentences)


def stage_semantic(sentences: Sequence[AnnotatedSentence], provider: EmbeddingProvider,
                   threshold: float = 0.8, edges=DEFAULT_BAND_EDGES,
                   ) -> tuple[list[AnnotatedSentence], StageReport]:
    """Per-category greedy filter, then similarity bands over what was kept."""
    rep = StageReport("semantic_filter", input_count=len(sentences))
    by_cat: dict[Category, list[AnnotatedSentence]] = {}
    for s in sentences:
        by_cat.setdefault(s.category, []).append(s)
    keep: dict[str, AnnotatedSentence] = {}
    for cat in Category:
        group = by_cat.get(cat, [])
        if not group:
            continue
        result = semantic_filter(group, provider, threshold)
        rep.notes[f"comparisons:{cat.value}"] = result.comparisons_made
        if result.dropped:
            rep.reject("NearDuplicate", len(result.dropped))
        kept_ids = set(result.kept)
        kept = [s for s in group if s.id in kept_ids]
        bands = similarity_bands(kept, provider, edges)
        for s in kept:
            keep[s.id] = s.with_band(bands[s.id])
    out = [keep[s.id] for s in sentences if s.id in keep]
    rep.output_count = len(out)
    return out, rep


def stage_sample(pool: Sequence[AnnotatedSentence], cfg: PipelineConfig,
                 ) -> tuple[list[AnnotatedSentence], Optional[QuotaTable], StageReport]:
    rep = StageReport("sample", input_count=len(pool))
    stats = pool_statistics(pool)
    scraped = sum(stats.values())
    if scraped == 0:
        selected = list(pool)
        quotas = None
    else:
        quotas = compute_targets(stats, cfg.distribution(cfg.sample_size or scraped))
        ids = set(stratified_sample(pool, quotas, cfg.seed))
        selected = [s for s in pool if s.id in ids]
    if len(pool) > len(selected):
        rep.reject("NotSelected", len(pool) - len(selected))
    rep.output_count = len(selected)
    return selected, quotas, rep


def read_translations(path: Union[str, Path]) -> dict[str, str]:
    """TSV with header ``sentence_id tamang``."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        if fh.readline().rstrip("\n").split("\t") != ["sentence_id", "tamang"]:
            raise PipelineConfigError(f"{path}: expected header sentence_id/tamang")
        for lineno, line in enumerate(fh, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            sid, sep, text = line.partition("\t")
            if not sep or "\t" in text:
                raise PipelineConfigError(f"{path}:{lineno}: expected 2 columns")
            out[sid] = " ".join(text.split())
    return out


def stage_split(selected: Sequence[AnnotatedSentence], translations: Optional[dict[str, str]],
                test_fraction, seed: int) -> tuple[list[ParallelPair], StageReport]:
    """Pair sentences with translations and split them.

    Without any translations the pairs are emitted untranslated and
    unsplit; otherwise untranslated sentences are dropped.
    """
    rep = StageReport("split", input_count=len(selected))
    if translations is None:
        pairs = [ParallelPair(s.id, s) for s in selected]
        rep.output_count = len(pairs)
        rep.notes[Split.UNASSIGNED.value] = len(pairs)
        return pairs, rep
    pairs = []
    for s in selected:
        tamang = translations.get(s.id, "")
        if tamang.strip():
            pairs.append(ParallelPair(s.id, s, tamang))
        else:
            rep.reject("Untranslated")
    train, test = split_train_test(pairs, test_fraction, seed)
    rep.output_count = len(train) + len(test)
    rep.notes[Split.TRAIN.value] = len(train)
    rep.notes[Split.TEST.value] = len(test)
    return train + test, rep


# ----------------------------------------------------------------- pipeline

def _run_stage(name: str, reports: list[StageReport], fn: Callable, *args):
    try:
        return fn(*args)
    except (PipelineConfigError, StageError):
        raise
    except Exception as exc:
        raise StageError(name, str(exc), reports) from exc


def run_pipeline(cfg: PipelineConfig, out_dir: Union[str, Path, None] = None) -> PipelineResult:
    cfg.validate()
    res = Resources.from_config(cfg)
    reports: list[StageReport] = []

    try:
        lines = Path(cfg.dump).read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise StageError("ingest", f"cannot read {cfg.dump}: {exc}", reports) from exc
    articles, reps = _run_stage("ingest", reports, stage_ingest, lines, res)
    reports += reps
    cleaned, reps = _run_stage("clean", reports, stage_segment_clean, articles, res, cfg.workers)
    reports += reps

    translations: Optional[dict[str, str]] = None
    if cfg.translations is not None:
        translations = read_translations(cfg.translations)
    if cfg.borrowed is not None:
        rows = read_borrowed(cfg.borrowed)
        extra, borrowed_tr, rep = _run_stage("borrowed", reports, stage_borrowed, rows, res)
        reports.append(rep)
        cleaned = cleaned + extra
        translations = {**(translations or {}), **borrowed_tr}

    annotated, rep = _run_stage("annotate", reports, stage_annotate, cleaned, res,
                                cfg.keep_below_min)
    reports.append(rep)
    unique, rep = _run_stage("exact_dedup", reports, stage_exact_dedup, annotated)
    reports.append(rep)

    provider = (load_vector_sidecar(cfg.embeddings) if cfg.embeddings
                else builtin_provider(unique))
    filtered, rep = _run_stage("semantic_filter", reports, stage_semantic, unique, provider,
                               cfg.threshold, cfg.band_edges)
    reports.append(rep)
    selected, quotas, rep = _run_stage("sample", reports, stage_sample, filtered, cfg)
    reports.append(rep)
    pairs, rep = _run_stage("split", reports, stage_split, selected, translations,
                            cfg.test_fraction, cfg.seed)
    reports.append(rep)

    manifest = build_manifest(pairs, cfg.seed, cfg.digest())
    result = PipelineResult(manifest, reports, quotas)
    if out_dir is not None:
        extra = {"stage_report.json": result.report_json()}
        if quotas is not None:
            extra["quotas.tsv"] = quotas.to_tsv()
        _run_stage("emit", reports, emit_manifest, manifest, out_dir, extra)
    return result


__all__ = [
    "PipelineConfig", "PipelineConfigError", "StageError", "StageReport", "PipelineResult",
    "CleanedSentence", "Resources", "config_from_dict", "load_config", "run_pipeline",
    "stage_ingest", "stage_segment_clean", "stage_borrowed", "stage_annotate",
    "stage_exact_dedup", "stage_semantic", "stage_sample", "stage_split",
    "read_translations", "read_borrowed", "builtin_provider",
]
