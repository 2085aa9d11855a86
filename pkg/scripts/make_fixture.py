"""Generate the synthetic article fixture under tests/data/fixture.

The articles are template-built Nepali text, not real news. They mix clean
verb-final sentences of every length class with the kinds of noise the
cleaner has to handle (location prefixes, digits, ellipses, adverts,
English lines, verbless fragments) plus exact and near duplicates.

The Tamang side is a placeholder (the Nepali words in reverse order); it
only exists so the split stage has something to pair with.

    python scripts/make_fixture.py [--seed 2024] [--out tests/data/fixture]
"""
from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

from devcorpus.segmenter import split_sentences

ROOT = Path(__file__).resolve().parents[1]

SECTIONS = {
    "Agriculture": ("agriculture", "कृषि"),
    "Health": ("health", "स्वास्थ्य"),
    "EducationTechnology": ("technology", "शिक्षा"),
    "CultureTourismSociety": ("culture", "संस्कृति"),
    "GeneralCommunication": ("literature", "साहित्य"),
}

NOUNS = {
    "Agriculture": "धान मकै गहुँ खेत मल बीउ सिँचाइ बाली तरकारी गाई बाख्रा कोदो".split(),
    "Health": "अस्पताल औषधि खोप बिरामी उपचार रोग पोषण सरसफाइ नर्स जाँच".split(),
    "EducationTechnology": "विद्यालय कम्प्युटर किताब कक्षा इन्टरनेट पाठ परीक्षा मोबाइल पुस्तकालय".split(),
    "CultureTourismSociety": "मन्दिर चाड नाच गीत हिमाल यात्रा मेला परम्परा पाहुना गुम्बा".split(),
    "GeneralCommunication": "बजार बाटो घर गाउँ सहर कुरा सन्देश परिवार भेला चिठी".split(),
}
SUBJECTS = "किसान डाक्टर विद्यार्थी शिक्षक पर्यटक गाउँले आमा बुबा समिति दिदी भाइ साथी".split()
FILLERS = ("राम्रो नयाँ ठूलो सानो धेरै थोरै पुरानो सफा मीठो सुन्दर आज हिजो भोलि यहाँ "
           "त्यहाँ पनि सबै अलि निकै बिस्तारै छिटो").split()
CASES = ["मा", "को", "लाई", ""]
VERBS = [
    "गर्छ", "गर्छन्", "जान्छ", "आउँछ", "पढ्छिन्", "हुन्छ", "गर्छु",        # non-past
    "गयो", "आयो", "खायो", "भयो", "गए", "आए", "पायो", "थियो",              # past
    "गर्दैन", "हुँदैन", "गर्दैनौ", "छैन", "गएन", "आएनन्", "खाएन",        # negative
]
NOISE = [
    "This line was written in English.",
    "नेपाल सुन्दर देश।",
    "सूचना तथा सुझाव।",
    "१२३ ४५६।",
    "@@ ## $$ %% किसान गयो।",
]


def words_for(length: int, category: str, rng: random.Random) -> list[str]:
    words = [rng.choice(SUBJECTS)]
    while len(words) < length - 1:
        if rng.random() < 0.4:
            words.append(rng.choice(NOUNS[category]) + rng.choice(CASES))
        else:
            words.append(rng.choice(FILLERS))
    return words + [rng.choice(VERBS)]


def pick_length(rng: random.Random) -> int:
    r = rng.random()
    if r < 0.03:
        return 2
    if r < 0.05:
        return rng.randint(40, 44)
    if r < 0.37:
        return rng.randint(3, 7)
    if r < 0.75:
        return rng.randint(8, 15)
    if r < 0.90:
        return rng.randint(16, 21)
    return rng.randint(22, 30)


def make_sentence(category: str, rng: random.Random) -> str:
    words = words_for(pick_length(rng), category, rng)
    if len(words) >= 5:
        if rng.random() < 0.1:
            words = ["काठमाडौं", ":"] + words
        if rng.random() < 0.1:
            words.insert(2, "२०८०")
    end = "…" if rng.random() < 0.05 else "।"
    return " ".join(words) + end


def build(seed: int, n_articles: int = 50) -> tuple[list[str], list[str]]:
    rng = random.Random(seed)
    categories = list(SECTIONS)
    history: dict[str, list[str]] = {c: [] for c in categories}
    lines, article_bodies = [], []
    for i in range(n_articles):
        category = categories[i % len(categories)]
        section, raw = SECTIONS[category]
        sentences = []
        for _ in range(rng.randint(6, 12)):
            roll = rng.random()
            prior = history[category]
            if roll < 0.06 and prior:
                sentences.append(rng.choice(prior))                      # exact repeat
            elif roll < 0.12 and prior:
                words = rng.choice(prior).rstrip("।…").split()
                words[0] = rng.choice(SUBJECTS)                          # near repeat
                sentences.append(" ".join(words) + "।")
            elif roll < 0.18:
                sentences.append(rng.choice(NOISE))
            else:
                sentences.append(make_sentence(category, rng))
            history[category].append(sentences[-1])
        aid = f"a{i:03d}"
        domain = "khabar.example.np" if i % 2 else "samachar.example.com"
        record = {
            "id": aid,
            "source_domain": domain,
            "url": f"https://{domain}/{section}/{aid}",
            "title": f"{raw} {rng.choice(NOUNS[category])}",
            "body": " ".join(sentences),
            "raw_category": raw if i % 3 else None,
            "published_date": f"2023-{1 + i % 12:02d}-{1 + i % 28:02d}",
            "author": rng.choice(["संवाददाता", "सम्पादक", None]),
            "keywords": [raw, rng.choice(NOUNS[category])],
        }
        lines.append(json.dumps(record, ensure_ascii=False))
        article_bodies.append((aid, record["body"]))

    # rejects for the ingest and categorize stages
    lines.append("{not valid json")
    lines.append(json.dumps({"id": "dup-url", "url": "HTTPS://SAMACHAR.EXAMPLE.COM/agriculture/a000",
                             "body": "किसान खेत गयो।", "raw_category": "कृषि"}, ensure_ascii=False))
    lines.append(json.dumps({"id": "sports-1", "url": "https://khel.example.np/sports/1",
                             "body": "खेलाडी मैदान गयो।", "raw_category": "sports"},
                            ensure_ascii=False))

    translations = ["sentence_id\ttamang"]
    for aid, body in article_bodies:
        for j, sentence in enumerate(split_sentences(body)):
            if rng.random() < 0.1:
                continue                                                  # left untranslated
            placeholder = " ".join(reversed(sentence.rstrip("।…?!").split()))
            if placeholder.strip():
                translations.append(f"{aid}:{j}\t{placeholder}।")
    return lines, translations


def latin_only(n: int = 5) -> list[str]:
    out = []
    for i in range(n):
        out.append(json.dumps({
            "id": f"en{i}", "url": f"https://en.example.com/health/{i}",
            "title": "Health news", "body": "Doctors met today. The clinic opened early. Vaccines arrived.",
            "raw_category": "health", "keywords": ["health"],
        }))
    return out


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", type=Path, default=ROOT / "tests" / "data" / "fixture")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    lines, translations = build(args.seed)
    (args.out / "articles.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (args.out / "translations.tsv").write_text("\n".join(translations) + "\n", encoding="utf-8")
    (args.out / "latin.jsonl").write_text("\n".join(latin_only()) + "\n", encoding="utf-8")

    config = {
        "seed": 7,
        "paths": {"dump": "articles.jsonl", "translations": "translations.tsv"},
        "threshold": 0.8,
        "distribution": {"sample_size": 240},
        "test_fraction": 0.25,
        "keep_below_min": False,
        "workers": 1,
    }
    (args.out / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    latin = dict(config, paths={"dump": "latin.jsonl"})
    (args.out / "latin_config.json").write_text(json.dumps(latin, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} dump lines and {len(translations) - 1} translations to {args.out}")


if __name__ == "__main__":
    main()
