"""Deterministic synthetic multilingual corpus for smoke-testing the pipeline.

Builds an invented vocabulary per language with aligned vectors, an English
annotated-span corpus, translation tables, target-language articles grouped
into events (some sharing a report id), simulated sentence-level frame
predictions and small background corpora, plus a ready-to-run config.
"""
from __future__ import annotations

import dataclasses
import datetime as dt
import json
from pathlib import Path

import numpy as np
import yaml

from .corpus import Article, split_sentences, tokenize, truncate_text, write_articles
from .embeddings import VectorStore, save_vectors
from .frames import FRAMES
from .keywords import load_stopwords

LANGUAGES = ("ru", "fr", "es", "it")
_LETTERS = {
    "en": ("bcdfglmnprstvw", "aeiou"),
    "fr": ("bcdfglmnprstv", "aeiouéè"),
    "es": ("bcdfglmnprstvñ", "aeiouá"),
    "it": ("bcdfglmnprstvz", "aeiouò"),
    "ru": ("бвгдзклмнпрстф", "аеиоуыя"),
}
# Relative frame emphasis per language, so salience differs across languages.
_EMPHASIS = {
    "ru": {9: 3.0, 13: 2.5, 10: 2.0, 8: 1.5},
    "fr": {3: 3.0, 13: 2.0, 7: 2.0, 10: 1.5},
    "es": {11: 3.0, 1: 1.5, 12: 1.5},
    "it": {14: 3.0, 6: 1.5, 1: 1.5},
}
_COUNTRIES = [("Russia", 0.45), ("Ukraine", 0.15), ("Belarus", 0.05), ("Moldova", 0.05),
              ("Latvia", 0.04), ("Armenia", 0.08), ("Georgia", 0.08), ("Kazakhstan", 0.06),
              ("Uzbekistan", 0.04)]
# Frames each region leans towards.
_REGION_FRAMES = {"Russia": [6, 7, 8], "Ukraine": [1, 5], "Belarus": [1, 5], "Moldova": [5],
                  "Latvia": [1], "Armenia": [2], "Georgia": [2], "Kazakhstan": [3],
                  "Uzbekistan": [3]}


@dataclasses.dataclass
class SyntheticSpec:
    n_articles: int = 500
    dimension: int = 50
    core_words: int = 25
    local_words: int = 25
    filler_words: int = 250
    entities: int = 160
    span_docs: int = 160
    spans_per_doc: int = 6
    background_lines: int = 1500
    translation_coverage: float = 0.9
    seed: int = 1234


class _Vocab:
    def __init__(self, rng):
        self.rng = rng
        self.used: set[str] = set()

    def word(self, language: str) -> str:
        cons, vows = _LETTERS[language]
        stop = load_stopwords(language)
        while True:
            n = int(self.rng.integers(2, 4))
            w = "".join(cons[self.rng.integers(len(cons))] + vows[self.rng.integers(len(vows))]
                        for _ in range(n))
            if w not in self.used and w not in stop:
                self.used.add(w)
                return w


def _unit(v):
    return v / np.linalg.norm(v)


def generate(out_dir, spec: SyntheticSpec = SyntheticSpec()) -> Path:
    """Write the synthetic corpus and ``config.yaml`` into ``out_dir``; returns the config path."""
    out = Path(out_dir)
    for sub in ("vectors", "translations", "background"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    vocab = _Vocab(rng)
    d = spec.dimension
    langs = ("en",) + LANGUAGES

    centroids = {f: _unit(rng.normal(size=d)) for f in FRAMES}
    concept_vec: dict[str, np.ndarray] = {}
    forms: dict[str, dict[str, str]] = {}  # concept -> language -> word

    def concept(name, vec, languages):
        concept_vec[name] = vec
        forms[name] = {lang: vocab.word(lang) for lang in languages}

    core = {f: [] for f in FRAMES}
    local = {f: [] for f in FRAMES}
    for f in FRAMES:
        for i in range(spec.core_words):
            name = f"core{f.code}_{i}"
            concept(name, _unit(centroids[f] + 0.6 * _unit(rng.normal(size=d))), langs)
            core[f].append(name)
        for i in range(spec.local_words):
            name = f"local{f.code}_{i}"
            concept(name, _unit(centroids[f] + 0.6 * _unit(rng.normal(size=d))), LANGUAGES)
            local[f].append(name)
    fillers = []
    for i in range(spec.filler_words):
        concept(f"fill{i}", _unit(rng.normal(size=d)), langs)
        fillers.append(f"fill{i}")
    entities = []
    for i in range(spec.entities):
        concept(f"ent{i}", _unit(rng.normal(size=d)), LANGUAGES)
        entities.append(f"ent{i}")

    # Aligned and background vectors per target language.
    for lang in LANGUAGES:
        names = [c for c in forms if lang in forms[c]]
        words = [forms[c][lang] for c in names]
        aligned = np.vstack([_unit(concept_vec[c] + 0.1 * _unit(rng.normal(size=d))) for c in names])
        background = np.vstack([_unit(v + 0.1 * _unit(rng.normal(size=d))) for v in aligned])
        save_vectors(VectorStore(words, np.round(aligned, 6), lang), out / "vectors" / f"aligned.{lang}.vec")
        save_vectors(VectorStore(words, np.round(background, 6), lang),
                     out / "vectors" / f"background.{lang}.vec")
        with open(out / "translations" / f"en_{lang}.tsv", "w", encoding="utf-8", newline="\n") as fh:
            for c in core_and_fillers(core, fillers):
                if rng.random() < spec.translation_coverage:
                    fh.write(f"{forms[c]['en']}\t{forms[c][lang]}\n")

    stop = {lang: sorted(load_stopwords(lang)) for lang in langs}

    def sentence(lang, words):
        words = list(words) + [stop[lang][rng.integers(len(stop[lang]))] for _ in range(3)]
        rng.shuffle(words)
        s = " ".join(words)
        return s[0].upper() + s[1:] + "."

    # English annotated spans.
    with open(out / "spans.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for doc in range(spec.span_docs):
            for _ in range(spec.spans_per_doc):
                f = FRAMES[rng.integers(len(FRAMES))]
                words = [forms[c]["en"] for c in rng.choice(core[f], 5, replace=False)]
                words += [forms[c]["en"] for c in rng.choice(fillers, 7, replace=False)]
                fh.write(json.dumps({"doc_id": f"mfc{doc:04d}", "sentence": sentence("en", words),
                                     "frame_code": f"{f.code}.0",
                                     "annotator_count": int(rng.integers(1, 4))}) + "\n")

    # Events and articles.
    weights = {lang: np.array([_EMPHASIS[lang].get(f.code, 1.0) for f in FRAMES]) for lang in LANGUAGES}
    articles: list[Article] = []
    frames_of: dict[str, list] = {}
    start = dt.date(2015, 6, 1)
    countries = [c for c, _ in _COUNTRIES]
    cprob = np.array([p for _, p in _COUNTRIES])
    cprob = cprob / cprob.sum()

    def article(aid, lang, date, ents, report_id=None, country=None):
        w = weights[lang].copy()
        if country is not None:
            for code in _REGION_FRAMES[country]:
                w[code - 1] *= 3.0
        p = w / w.sum()
        chosen = list(rng.choice(len(FRAMES), 2, replace=False, p=p))
        frames = [FRAMES[i] for i in chosen]
        sents = []
        for _ in range(int(rng.integers(12, 17))):
            words = []
            for e in rng.choice(ents, int(rng.integers(1, 3)), replace=False):
                words.append(forms[e][lang].capitalize())
            f = frames[0] if rng.random() < 0.65 else frames[1]
            pool = core[f] + local[f]
            for c in rng.choice(pool, int(rng.integers(0, 3)), replace=False):
                words.append(forms[c][lang])
            words += [forms[c][lang] for c in rng.choice(fillers, int(rng.integers(6, 10)), replace=False)]
            sents.append(sentence(lang, words))
        body = " ".join(sents)
        frames_of[aid] = frames
        a = Article(aid, lang, date, f"outlet-{lang}-{int(rng.integers(5))}", body, report_id, None)
        articles.append(a)
        return a, country

    records_country: dict[str, str] = {}
    n_events = 0
    other_lang_p = np.array([0.4, 0.32, 0.28])
    while len(articles) < spec.n_articles:
        n_events += 1
        ev_date = start + dt.timedelta(days=int(rng.integers(0, 2800)))
        ents = list(rng.choice(entities, 4, replace=False))
        country = countries[rng.choice(len(countries), p=cprob)]
        paired = n_events % 4 == 0
        rid = f"report-{n_events:04d}" if paired else None
        aid = f"ru-{len(articles):04d}"
        article(aid, "ru", ev_date, ents, rid, country)
        records_country[aid] = country
        if paired or rng.random() < 0.55:
            lang = LANGUAGES[1 + rng.choice(3, p=other_lang_p)]
            delta = int(rng.integers(-10, 11))
            article(f"{lang}-{len(articles):04d}", lang, ev_date + dt.timedelta(days=delta), ents, rid)
        if rng.random() < 0.15:
            lang = LANGUAGES[1 + rng.choice(3, p=other_lang_p)]
            solo = list(rng.choice(entities, 4, replace=False))
            article(f"{lang}-{len(articles):04d}", lang,
                    start + dt.timedelta(days=int(rng.integers(0, 2800))), solo)

    with open(out / "articles.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for a in articles:
            rec = dataclasses.asdict(a)
            rec["published_at"] = a.published_at.isoformat()
            del rec["region"]
            if a.id in records_country:
                rec["country"] = records_country[a.id]
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
        for i in range(3):
            fh.write(json.dumps({"id": f"short-{i}", "language": "fr", "published_at": "2020-01-01",
                                 "outlet": "brief", "body": "Trop court."}) + "\n")

    # Simulated sentence-level predictions on the truncated bodies.
    word_frame = {}
    for f in FRAMES:
        for c in core[f] + local[f]:
            for lang in LANGUAGES:
                if lang in forms[c]:
                    word_frame[forms[c][lang]] = f
    with open(out / "sentence_labels.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for a in articles:
            body = truncate_text(a.body, a.language, 225)
            for i, s in enumerate(split_sentences(body, a.language)):
                hits = {word_frame[t] for t in tokenize(s) if t in word_frame}
                labels = {f for f in hits if rng.random() < 0.7}
                if rng.random() < 0.12:
                    labels.add(FRAMES[rng.integers(len(FRAMES))])
                for f in sorted(labels, key=lambda f: f.code):
                    fh.write(json.dumps({"article_id": a.id, "sentence_index": i,
                                         "frame_code": f"{f.code}.0",
                                         "confidence": round(float(rng.uniform(0.5, 1.0)), 3)}) + "\n")

    # Background paragraphs for CBOW training.
    for lang in LANGUAGES:
        with open(out / "background" / f"{lang}.txt", "w", encoding="utf-8", newline="\n") as fh:
            for _ in range(spec.background_lines):
                f = FRAMES[rng.integers(len(FRAMES))]
                pool = core[f] + local[f]
                words = [forms[c][lang] for c in rng.choice(pool, 6, replace=False)]
                words += [forms[c][lang] for c in rng.choice(fillers, 4, replace=False)]
                fh.write(sentence(lang, words) + "\n")

    config = {
        "seed": spec.seed,
        "workers": 1,
        "languages": list(LANGUAGES),
        "output_dir": "out",
        "paths": {
            "articles": "articles.jsonl",
            "spans": "spans.jsonl",
            "sentence_labels": "sentence_labels.jsonl",
            "aligned_vectors": {lang: f"vectors/aligned.{lang}.vec" for lang in LANGUAGES},
            "background_vectors": {lang: f"vectors/background.{lang}.vec" for lang in LANGUAGES},
            "background_corpora": {lang: f"background/{lang}.txt" for lang in LANGUAGES},
            "translations": {lang: f"translations/en_{lang}.tsv" for lang in LANGUAGES},
        },
        "pairing": {"grid": {"num_keywords": [10, 20], "max_ngram": [1, 2], "dedup_threshold": [0.8]}},
        "mace": {"restarts": 5, "iterations": 50},
        "cbow": {"dimension": 50, "min_count": 5, "epochs": 5, "sample_lines": 1000},
    }
    path = out / "config.yaml"
    path.write_text(yaml.safe_dump(config, sort_keys=False, allow_unicode=True), encoding="utf-8")
    return path


def core_and_fillers(core, fillers):
    for f in FRAMES:
        yield from core[f]
    yield from fillers


@dataclasses.dataclass
class PairingFixture:
    targets: list          # Russian articles
    candidates: list       # French articles: planted partners plus decoys
    planted: dict          # target id -> partner id
    stores: dict           # language -> VectorStore


def pairing_fixture(n_planted: int = 20, n_decoys: int = 200, dimension: int = 50,
                    seed: int = 0) -> PairingFixture:
    """Bilingual ru/fr fixture of paraphrase pairs that share entity embeddings, among decoys.

    Every article mentions four event entities repeatedly plus random filler
    words. A planted partner renders the target's first four sentences in
    French concept for concept and continues with four independent ones;
    decoys have their own entities. The ru and fr forms of a concept have
    near-identical vectors. All decoys fall within four weeks of some target.
    """
    rng = np.random.default_rng(seed)
    vocab = _Vocab(rng)
    words = {"ru": [], "fr": []}
    vectors = {"ru": [], "fr": []}

    def concept():
        base = _unit(rng.normal(size=dimension))
        forms = {}
        for lang in ("ru", "fr"):
            w = vocab.word(lang)
            forms[lang] = w
            words[lang].append(w)
            vectors[lang].append(_unit(base + 0.05 * _unit(rng.normal(size=dimension))))
        return forms

    fillers = [concept() for _ in range(400)]
    stop = {lang: sorted(load_stopwords(lang)) for lang in ("ru", "fr")}

    def plan(entities, n=8):
        # A sentence is a list of (concept, capitalized) slots plus stopword slots (None).
        out = []
        for _ in range(n):
            slots = [(e, True) for e in rng.choice(entities, 2, replace=False)]
            slots += [(f, False) for f in rng.choice(fillers, 6, replace=False)]
            slots += [(None, False)] * 2
            out.append([slots[k] for k in rng.permutation(len(slots))])
        return out

    def render(lang, sentences):
        text = []
        for slots in sentences:
            toks = []
            for c, cap in slots:
                if c is None:
                    toks.append(stop[lang][rng.integers(len(stop[lang]))])
                else:
                    toks.append(c[lang].capitalize() if cap else c[lang])
            sent = " ".join(toks)
            text.append(sent[0].upper() + sent[1:] + ".")
        return " ".join(text)

    start = dt.date(2016, 1, 1)
    targets, candidates, planted = [], [], {}
    for i in range(n_planted):
        ents = [concept() for _ in range(4)]
        date = start + dt.timedelta(days=int(rng.integers(0, 1000)))
        source = plan(ents)
        # The partner translates the opening half and continues independently.
        partner = source[:4] + plan(ents, 4)
        t = Article(f"ru-{i:03d}", "ru", date, "ru-outlet", render("ru", source), f"r{i:03d}")
        c = Article(f"fr-p{i:03d}", "fr", date + dt.timedelta(days=int(rng.integers(-28, 29))),
                    "fr-outlet", render("fr", partner), f"r{i:03d}")
        targets.append(t)
        candidates.append(c)
        planted[t.id] = c.id
    for j in range(n_decoys):
        anchor = targets[j % n_planted].published_at
        date = anchor + dt.timedelta(days=int(rng.integers(-28, 29)))
        candidates.append(Article(f"fr-d{j:03d}", "fr", date, "fr-outlet",
                                  render("fr", plan([concept() for _ in range(4)]))))
    order = rng.permutation(len(candidates))
    candidates = [candidates[k] for k in order]
    stores = {lang: VectorStore(words[lang], np.vstack(vectors[lang]), lang) for lang in ("ru", "fr")}
    return PairingFixture(targets, candidates, planted, stores)


def two_topic_corpus(n_lines: int = 10_000, words_per_topic: int = 10, line_length: int = 8,
                     seed: int = 0) -> tuple[list[str], list[str], list[str]]:
    """Lines drawn from one of two disjoint word pools; returns (lines, topic_a, topic_b)."""
    rng = np.random.default_rng(seed)
    topic_a = [f"alpha{i}" for i in range(words_per_topic)]
    topic_b = [f"beta{i}" for i in range(words_per_topic)]
    lines = []
    for _ in range(n_lines):
        pool = topic_a if rng.random() < 0.5 else topic_b
        lines.append(" ".join(pool[k] for k in rng.integers(0, words_per_topic, line_length)))
    return lines, topic_a, topic_b
