"""Command line entry point.

Every stage can run on its own over the intermediate files of the stage
before it:

    ingest    dump.jsonl     -> articles.jsonl   (categorized, raw_category = category)
    clean     articles.jsonl -> sentences.tsv
    annotate  sentences.tsv  -> meta.tsv
    dedup     meta.tsv       -> meta.tsv         (exact + semantic, bands filled in)
    sample    meta.tsv       -> meta.tsv         (+ <out>.quotas.tsv)
    split     meta.tsv       -> manifest directory
    stats     manifest directory or meta.tsv -> table on stdout
    score     hypothesis + reference files -> metric report
    run       the whole chain from --config

Exit codes: 0 success, 1 invalid input or configuration, 2 stage failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import ingest
from .dedup import load_vector_sidecar
from .metrics import METRICS, MetricInputError
from .model import Category, Origin, ParallelPair
from .pipeline import (
    CleanedSentence,
    PipelineConfig,
    PipelineConfigError,
    Resources,
    StageError,
    StageReport,
    builtin_provider,
    load_config,
    read_translations,
    run_pipeline,
    stage_annotate,
    stage_exact_dedup,
    stage_ingest,
    stage_sample,
    stage_segment_clean,
    stage_semantic,
    stage_split,
)
from .report import (
    ReportError,
    build_manifest,
    corpus_stats,
    emit_manifest,
    load_manifest,
    read_meta,
    write_meta,
)

EXIT_OK, EXIT_INVALID, EXIT_STAGE = 0, 1, 2

SENTENCE_COLUMNS = ("sentence_id", "source_article_id", "category", "origin", "text")

log = logging.getLogger("devcorpus")


class UsageError(ValueError):
    pass


# ------------------------------------------------------------ file helpers

def write_sentences(sentences: Sequence[CleanedSentence], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(SENTENCE_COLUMNS) + "\n")
        for s in sentences:
            fh.write("\t".join((s.id, s.source_article_id or "", s.category.value,
                                s.origin.value, s.text)) + "\n")


def read_sentences(path: Path) -> list[CleanedSentence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        if fh.readline().rstrip("\n").split("\t") != list(SENTENCE_COLUMNS):
            raise UsageError(f"{path}: not a sentences file (bad header)")
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip("\n").split("\t")
            if parts == [""]:
                continue
            if len(parts) != len(SENTENCE_COLUMNS):
                raise UsageError(f"{path}:{lineno}: expected {len(SENTENCE_COLUMNS)} columns")
            sid, art, cat, origin, text = parts
            out.append(CleanedSentence(sid, text, Category(cat), art or None, Origin(origin)))
    return out


def _print_reports(reports: Sequence[StageReport]) -> None:
    for r in reports:
        rej = ", ".join(f"{k}={v}" for k, v in sorted(r.rejections.items()))
        print(f"{r.stage:<16} in={r.input_count:<7} out={r.output_count:<7} {rej}",
              file=sys.stderr)


def _config(args, require_dump: bool = False) -> PipelineConfig:
    overrides = {"seed": getattr(args, "seed", None), "workers": getattr(args, "workers", None)}
    if args.config:
        return load_config(args.config, require_dump=require_dump, **overrides)
    if overrides["seed"] is None and require_dump:
        raise PipelineConfigError("--config is required")
    cfg = PipelineConfig(seed=overrides["seed"] if overrides["seed"] is not None else 0,
                         workers=overrides["workers"] or 1)
    cfg.validate(require_dump=require_dump)
    return cfg


def _need_seed(args) -> None:
    if args.seed is None and not args.config:
        raise PipelineConfigError("a seed is required: pass --seed or --config")


def _need_file(path: Optional[str], what: str) -> Path:
    if not path:
        raise UsageError(f"{what} is required")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what}: file not found: {p}")
    return p


# ---------------------------------------------------------------- commands

def cmd_run(args) -> int:
    cfg = _config(args, require_dump=True)
    out = Path(args.out or "corpus_out")
    result = run_pipeline(cfg, out)
    _print_reports(result.reports)
    print(f"{len(result.manifest.pairs)} pairs written to {out}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    cfg = _config(args)
    src = _need_file(args.input or (cfg.dump and str(cfg.dump)), "--input")
    res = Resources.from_config(cfg)
    lines = src.read_text(encoding="utf-8").splitlines()
    articles, reports = stage_ingest(lines, res)
    ingest.write_article_stream([replace(a, raw_category=c.value) for a, c in articles],
                                _out(args, "articles.jsonl"))
    _print_reports(reports)
    return EXIT_OK


def cmd_clean(args) -> int:
    cfg = _config(args)
    res = Resources.from_config(cfg)
    parsed = ingest.parse_article_stream(_need_file(args.input, "--input"))
    cats = [(a, _category_of(a, res)) for a in parsed.articles]
    missing = [a.id for a, c in cats if c is None]
    if missing:
        raise UsageError(f"articles without a category (run ingest first): {missing[:5]}")
    sentences, reports = stage_segment_clean(cats, res, cfg.workers)
    write_sentences(sentences, _out(args, "sentences.tsv"))
    _print_reports(reports)
    return EXIT_OK


def cmd_annotate(args) -> int:
    cfg = _config(args)
    res = Resources.from_config(cfg)
    sentences = read_sentences(_need_file(args.input, "--input"))
    annotated, rep = stage_annotate(sentences, res, cfg.keep_below_min or args.keep_below_min)
    write_meta(_as_pairs(annotated), _out(args, "meta.tsv"))
    _print_reports([rep])
    return EXIT_OK


def cmd_dedup(args) -> int:
    cfg = _config(args)
    pool = [p.nepali for p in read_meta(_need_file(args.input, "--input"))]
    unique, rep1 = stage_exact_dedup(pool)
    sidecar = args.embeddings or (cfg.embeddings and str(cfg.embeddings))
    provider = load_vector_sidecar(sidecar) if sidecar else builtin_provider(unique)
    threshold = args.threshold if args.threshold is not None else cfg.threshold
    kept, rep2 = stage_semantic(unique, provider, threshold, cfg.band_edges)
    write_meta(_as_pairs(kept), _out(args, "meta.tsv"))
    _print_reports([rep1, rep2])
    return EXIT_OK


def cmd_sample(args) -> int:
    _need_seed(args)
    cfg = _config(args)
    if args.size is not None:
        cfg = replace(cfg, sample_size=args.size)
        cfg.validate(require_dump=False)
    pool = [p.nepali for p in read_meta(_need_file(args.input, "--input"))]
    selected, quotas, rep = stage_sample(pool, cfg)
    out = _out(args, "meta.tsv")
    write_meta(_as_pairs(selected), out)
    if quotas is not None:
        Path(str(out) + ".quotas.tsv").write_text(quotas.to_tsv(), encoding="utf-8")
    _print_reports([rep])
    return EXIT_OK


def cmd_split(args) -> int:
    _need_seed(args)
    cfg = _config(args)
    pool = [p.nepali for p in read_meta(_need_file(args.input, "--input"))]
    tr_path = args.translations or (cfg.translations and str(cfg.translations))
    translations = read_translations(_need_file(tr_path, "--translations")) if tr_path else None
    pairs, rep = stage_split(pool, translations, cfg.test_fraction, cfg.seed)
    manifest = build_manifest(pairs, cfg.seed, cfg.digest())
    emit_manifest(manifest, _out(args, "corpus_out"))
    _print_reports([rep])
    return EXIT_OK


def cmd_stats(args) -> int:
    src = Path(args.input)
    if src.is_dir():
        pairs = load_manifest(src).pairs
    else:
        pairs = read_meta(_need_file(args.input, "--input"))
    table = corpus_stats(pairs, by_origin=args.by_origin)
    if args.json:
        print(json.dumps(table.to_dict(), indent=2, ensure_ascii=False, sort_keys=True))
    else:
        print(table.render(), end="")
    return EXIT_OK


def cmd_score(args) -> int:
    hyp = _need_file(args.hyp, "--hyp").read_text(encoding="utf-8").splitlines()
    ref = _need_file(args.ref, "--ref").read_text(encoding="utf-8").splitlines()
    names = [n.strip() for n in args.metrics.split(",") if n.strip()]
    unknown = [n for n in names if n not in METRICS]
    if unknown:
        raise UsageError(f"unknown metrics {unknown}; choose from {sorted(METRICS)}")
    if len(hyp) != len(ref):
        raise UsageError(f"line count mismatch: {len(hyp)} vs {len(ref)}")
    reports = [METRICS[n](hyp, ref) for n in names]
    for r in reports:
        print(f"{r.metric:<8} {r.score:8.4f}  (n={r.sentence_count})")
    if args.out:
        Path(args.out).write_text(
            json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
    return EXIT_OK


def _category_of(article, res: Resources) -> Optional[Category]:
    # ingest output already carries the canonical name
    if article.raw_category in {c.value for c in Category}:
        return Category(article.raw_category)
    return ingest.regularize_category(article.raw_category, res.keyword_map)


def _as_pairs(sentences):
    return [ParallelPair(s.id, s) for s in sentences]


def _out(args, default: str) -> Path:
    return Path(args.out or default)


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="devcorpus", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, seed=True, io=True):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        p.add_argument("--config", help="pipeline config (JSON)")
        if seed:
            p.add_argument("--seed", type=int, help="overrides the config seed")
        if io:
            p.add_argument("--input", help="input file")
            p.add_argument("--out", help="output path")
        return p

    p = add("run", cmd_run, "run the full pipeline", io=False)
    p.add_argument("--out", help="manifest directory (default corpus_out)")
    p.add_argument("--workers", type=int, help="threads for per-article stages")

    add("ingest", cmd_ingest, "parse and categorize an article dump")
    p = add("clean", cmd_clean, "segment and clean articles")
    p.add_argument("--workers", type=int)
    p = add("annotate", cmd_annotate, "annotate cleaned sentences")
    p.add_argument("--keep-below-min", action="store_true")
    p = add("dedup", cmd_dedup, "exact and semantic deduplication")
    p.add_argument("--embeddings", help="vector sidecar file")
    p.add_argument("--threshold", type=float)
    p = add("sample", cmd_sample, "stratified sampling")
    p.add_argument("--size", type=int, help="number of scraped sentences to keep")
    p = add("split", cmd_split, "pair with translations and split train/test")
    p.add_argument("--translations", help="TSV of sentence_id and tamang")

    p = sub.add_parser("stats", help="distribution table")
    p.set_defaults(func=cmd_stats)
    p.add_argument("--input", required=True, help="manifest directory or meta.tsv")
    p.add_argument("--by-origin", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("score", help="BLEU, chrF and chrF++")
    p.set_defaults(func=cmd_score)
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--metrics", default="bleu,chrf,chrfpp")
    p.add_argument("--out", help="write the report as JSON")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (PipelineConfigError, UsageError, ingest.ConfigError, MetricInputError,
            ingest.IngestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _print_reports(exc.reports)
        return EXIT_STAGE
    except (ReportError, OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
