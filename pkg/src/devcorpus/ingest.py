"""Article dump parsing and category extraction.

The dump is JSON Lines with the fields listed in ``ARTICLE_FIELDS``. Raw
categories are found with a layered rule funnel (first matching layer
wins) and then mapped onto the five corpus categories by a keyword map.
"""
from __future__ import annotations

import datetime as dt
import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union
from urllib.parse import urlsplit, urlunsplit

from .model import Article, Category

log = logging.getLogger(__name__)

ARTICLE_FIELDS = ("id", "source_domain", "url", "title", "body", "raw_category",
                  "published_date", "author", "keywords")
LAYER_FIELDS = ("url_path", "source_domain", "raw_category", "keywords", "title")


class IngestError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


@dataclass
class IngestResult:
    articles: list[Article] = field(default_factory=list)
    skipped: int = 0
    reasons: dict[str, int] = field(default_factory=dict)

    def skip(self, lineno: int, reason: str) -> None:
        self.skipped += 1
        self.reasons[reason] = self.reasons.get(reason, 0) + 1
        log.warning("line %d skipped: %s", lineno, reason)


def _nfc(value):
    return unicodedata.normalize("NFC", value) if isinstance(value, str) else value


def _optional_text(record: dict, key: str) -> Optional[str]:
    value = record.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise ValueError(f"{key} must be a string")
    return _nfc(value)


def article_from_record(record: dict, fallback_id: str) -> Article:
    if not isinstance(record, dict):
        raise ValueError("record is not an object")
    body = record.get("body")
    if not isinstance(body, str):
        raise ValueError("missing body")
    body = _nfc(body)
    if not body.strip():
        raise ValueError("empty body")
    date = _optional_text(record, "published_date")
    if date:
        dt.date.fromisoformat(date[:10])
    keywords = record.get("keywords") or []
    if isinstance(keywords, str):
        keywords = [k.strip() for k in keywords.split(",") if k.strip()]
    if not all(isinstance(k, str) for k in keywords):
        raise ValueError("keywords must be strings")
    url = _optional_text(record, "url") or ""
    domain = _optional_text(record, "source_domain")
    if domain is None:
        domain = urlsplit(url).hostname or ""
    return Article(
        id=str(record.get("id") if record.get("id") is not None else fallback_id),
        source_domain=domain,
        url=url,
        title=_optional_text(record, "title") or "",
        body=body,
        raw_category=_optional_text(record, "raw_category"),
        published_date=date,
        author=_optional_text(record, "author"),
        keywords=tuple(_nfc(k) for k in keywords),
    )


def parse_article_stream(source: Union[str, Path, Iterable[str]]) -> IngestResult:
    """Read a JSON Lines article dump.

    Malformed lines and duplicate ids are skipped with a warning and
    counted; only an unreadable source raises.
    """
    if isinstance(source, (str, Path)):
        try:
            with open(source, encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except (OSError, UnicodeDecodeError) as exc:
            raise IngestError(f"cannot read article dump {source}: {exc}") from exc
    else:
        lines = source

    result = IngestResult()
    seen: set[str] = set()
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            article = article_from_record(json.loads(line), fallback_id=f"line-{lineno}")
        except (ValueError, TypeError) as exc:
            result.skip(lineno, f"malformed: {exc}")
            continue
        if article.id in seen:
            result.skip(lineno, "duplicate id")
            continue
        seen.add(article.id)
        result.articles.append(article)
    return result


def article_to_record(article: Article) -> dict:
    return {
        "id": article.id,
        "source_domain": article.source_domain,
        "url": article.url,
        "title": article.title,
        "body": article.body,
        "raw_category": article.raw_category,
        "published_date": article.published_date,
        "author": article.author,
        "keywords": list(article.keywords),
    }


def serialize_article(article: Article) -> str:
    return json.dumps(article_to_record(article), ensure_ascii=False, separators=(",", ":"))


def write_article_stream(articles: Iterable[Article], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for a in articles:
            fh.write(serialize_article(a) + "\n")


def normalize_url(url: str) -> str:
    parts = urlsplit(url)
    return urlunsplit((parts.scheme.lower(), parts.netloc.lower(), parts.path, parts.query, ""))


def dedup_urls(articles: Sequence[Article]) -> tuple[list[Article], int]:
    """Drop later articles whose normalized URL was already seen."""
    kept, seen, dropped = [], set(), 0
    for a in articles:
        if a.url:
            key = normalize_url(a.url)
            if key in seen:
                dropped += 1
                continue
            seen.add(key)
        kept.append(a)
    return kept, dropped


# ---------------------------------------------------------------- categories

@dataclass(frozen=True)
class CategoryRuleLayer:
    layer_index: int
    field: str
    pattern: str
    target: Optional[str] = None

    def __post_init__(self):
        if self.field not in LAYER_FIELDS:
            raise ConfigError(f"layer {self.layer_index}: unknown field {self.field!r}")
        try:
            object.__setattr__(self, "_regex", re.compile(self.pattern, re.IGNORECASE))
        except re.error as exc:
            raise ConfigError(f"layer {self.layer_index}: bad pattern: {exc}") from None

    def _candidates(self, article: Article) -> list[str]:
        if self.field == "url_path":
            return [s for s in urlsplit(article.url).path.split("/") if s]
        if self.field == "keywords":
            return list(article.keywords)
        value = getattr(article, self.field)
        return [value] if value else []

    def match(self, article: Article) -> Optional[str]:
        for text in self._candidates(article):
            m = self._regex.search(text)
            if m is None:
                continue
            if self.target is not None:
                return self.target
            if m.groups() and m.group(1):
                return m.group(1)
            return text
        return None


def extract_category_layered(article: Article,
                             layers: Sequence[CategoryRuleLayer]) -> Optional[str]:
    if not layers:
        raise ConfigError("no category layers configured")
    for layer in sorted(layers, key=lambda l: l.layer_index):
        hit = layer.match(article)
        if hit is not None:
            return hit
    return None


@dataclass(frozen=True)
class KeywordMap:
    entries: tuple[tuple[str, Category], ...]

    def __post_init__(self):
        compiled = []
        for pattern, target in self.entries:
            if not isinstance(target, Category):
                raise ConfigError(f"keyword map target {target!r} is not a category")
            try:
                compiled.append((re.compile(pattern, re.IGNORECASE), target))
            except re.error as exc:
                raise ConfigError(f"bad keyword pattern {pattern!r}: {exc}") from None
        object.__setattr__(self, "_compiled", tuple(compiled))

    @classmethod
    def from_pairs(cls, pairs) -> KeywordMap:
        entries = []
        for pattern, target in pairs:
            try:
                entries.append((_nfc(pattern), Category(target)))
            except ValueError:
                raise ConfigError(f"unknown category {target!r} for {pattern!r}") from None
        return cls(tuple(entries))


def regularize_category(raw: Optional[str], kmap: KeywordMap) -> Optional[Category]:
    if not raw:
        return None
    raw = _nfc(raw)
    for regex, target in kmap._compiled:
        if regex.search(raw):
            return target
    return None


def _read_data(path, name: str):
    if path is None:
        return json.loads(resources.files("devcorpus.data").joinpath(name).read_text("utf-8"))
    return json.loads(Path(path).read_text(encoding="utf-8"))


def load_keyword_map(path: Union[str, Path, None] = None) -> KeywordMap:
    data = _read_data(path, "keyword_map.json")
    return KeywordMap.from_pairs((e["pattern"], e["category"]) for e in data["entries"])


def load_layers(path: Union[str, Path, None] = None) -> tuple[CategoryRuleLayer, ...]:
    data = _read_data(path, "category_layers.json")
    layers = tuple(
        CategoryRuleLayer(int(e["layer_index"]), e["field"], e["pattern"], e.get("target"))
        for e in data["layers"])
    if not layers:
        raise ConfigError("layer config is empty")
    indices = [l.layer_index for l in layers]
    if len(set(indices)) != len(indices):
        raise ConfigError("duplicate layer_index in layer config")
    return tuple(sorted(layers, key=lambda l: l.layer_index))


def categorize(article: Article, layers: Sequence[CategoryRuleLayer],
               kmap: KeywordMap) -> Optional[Category]:
    return regularize_category(extract_category_layered(article, layers), kmap)
