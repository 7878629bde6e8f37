"""Command-line entry point wiring the pipeline stages together.

Exit codes: 0 success, 1 runtime error, 2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import multiprocessing
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .config import ConfigError, PipelineConfig, load_config, validate
from .corpus import Article, load_articles, load_spans, read_region_table, tokenize, truncate_article
from .embeddings import CBOWEmbedder, CbowConfig, load_vectors, sample_lines, save_vectors
from .evaluation import (F1Report, frame_f1, gen_intruder_sets, read_frame_labels, read_intruder_key,
                         read_intruder_responses, score_intruder, write_intruder_tasks)
from .frames import FRAMES
from .keywords import KeywordConfig, load_stopwords
from .lexicon import (LexiconInducer, LexiconError, read_lexicons, read_translation_table,
                      term_document_frequencies, translate_lexicon, write_lexicons)
from .pairing import (ArticlePairer, calibrate_min_score, gold_pairs, score_gold_pairs,
                      tune_hyperparameters, write_pairs)
from .priors import load_priors
from .reliability import (MACE, build_presentation, dominant_matrix, krippendorff_alpha,
                          label_priors_for, raw_agreement)
from .salience import GroupingSpec, majority_presence, npmi, top_frame_words
from .scoring import (FrameVoteVector, article_seed, dominant_frame, ingest_sentence_labels,
                      presence_vector, read_raw_csv, score_lexicon, write_vectors_csv)

logger = logging.getLogger("polyframe")

# Module named in error messages for each subcommand.
_MODULE = {
    "validate-config": "config", "pair": "pairing", "build-lexicons": "lexicon",
    "train-embeddings": "embeddings", "score": "scoring", "agree": "reliability",
    "salience": "salience", "report": "report", "eval-intruder": "evaluation",
    "eval-f1": "evaluation", "fetch-translations": "translate", "make-synthetic": "synthetic",
}

_STATE: dict = {}


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _parallel_map(fn, items, workers: int):
    """Ordered map; forks a bounded pool when more than one worker is requested."""
    items = list(items)
    if workers <= 1 or len(items) < 2 or "fork" not in multiprocessing.get_all_start_methods():
        return [fn(x) for x in items]
    ctx = multiprocessing.get_context("fork")
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def _stopwords(cfg: PipelineConfig, language: str):
    return load_stopwords(language, cfg.path("stopwords"))


def _load_articles(cfg: PipelineConfig, languages=None) -> list[Article]:
    languages = cfg.languages if languages is None else languages
    regions = read_region_table(cfg.path("regions"))
    ingested = load_articles(cfg.path("articles"), cfg["corpus"]["min_chars"], languages, regions)
    logger.info("articles: %d loaded, %d malformed, %d too short, %d duplicate ids",
                len(ingested.articles), ingested.malformed, ingested.too_short, ingested.duplicates)
    return ingested.articles


def _truncated(cfg: PipelineConfig, articles):
    return [truncate_article(a, cfg["corpus"]["word_limit"]) for a in articles]


# --- pair ----------------------------------------------------------------

def _pair_one(target):
    return _STATE["pairer"].pairs_for(target)


def cmd_pair(cfg: PipelineConfig, args) -> int:
    pc = cfg["pairing"]
    targets_langs = [lang for lang in pc["target_languages"] if lang in cfg.languages]
    if not targets_langs:
        raise ValueError("no configured target language for pairing")
    articles = _load_articles(cfg)
    stores = {lang: load_vectors(cfg.path("aligned_vectors", lang), language=lang)
              for lang in cfg.languages}
    sw = {lang: _stopwords(cfg, lang) for lang in cfg.languages}
    kw = pc["keywords"]
    kc = KeywordConfig(kw["num_keywords"], kw["max_ngram"], kw["dedup_threshold"], kw["window"])
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    gold = gold_pairs(articles)
    if gold and pc.get("grid"):
        kc, table = tune_hyperparameters(gold, pc["grid"], stores, sw, kc.window)
        _write_csv(out / "pairing_grid.csv", list(table[0]),
                   [[r["num_keywords"], r["max_ngram"], r["dedup_threshold"], f"{r['mean_score']:.6f}",
                     r["scored_pairs"], r["gold_pairs"]] for r in table])
        logger.info("pairing: selected %s", kc)
    min_score = pc["min_score"]
    if min_score == "auto":
        if not gold:
            raise ValueError("min_score 'auto' needs gold pairs (shared report ids)")
        min_score = calibrate_min_score(score_gold_pairs(gold, kc, stores, sw), pc["coverage"])
        logger.info("pairing: calibrated min_score %.4f", min_score)
    targets = [a for a in articles if a.language in targets_langs]
    candidates = [a for a in articles if a.language not in targets_langs]
    pairer = ArticlePairer(pc["window_days"], min_score, kc.num_keywords, kc.max_ngram,
                           kc.dedup_threshold, kc.window).fit(candidates, stores, sw)
    _STATE["pairer"] = pairer
    try:
        ranked = _parallel_map(_pair_one, targets, cfg.workers)
    finally:
        _STATE.clear()
    best = [r[0] for r in ranked if r]
    write_pairs(best, out / "pairs.jsonl")
    logger.info("pairing: %d of %d targets paired", len(best), len(targets))
    return 0


# --- embeddings and lexicons ----------------------------------------------

def _background_vectors_path(cfg: PipelineConfig, language: str) -> Path:
    configured = cfg.path("background_vectors", language)
    return configured if configured is not None else cfg.output_dir / "vectors" / f"background.{language}.vec"


def cmd_train_embeddings(cfg: PipelineConfig, args) -> int:
    cb = dict(cfg["cbow"])
    n_lines = cb.pop("sample_lines")
    config = CbowConfig(**cb, seed=cfg.seed)
    corpora = cfg["paths"].get("background_corpora") or {}
    langs = [lang for lang in cfg.languages if lang in corpora]
    if not langs:
        raise ValueError("no background corpora configured")
    for lang in langs:
        lines = sample_lines(cfg.resolve(corpora[lang]), n_lines, cfg.seed)
        model = CBOWEmbedder.from_config(config, workers=cfg.workers, language=lang).fit(lines)
        path = cfg.output_dir / "vectors" / f"background.{lang}.vec"
        path.parent.mkdir(parents=True, exist_ok=True)
        save_vectors(model.vectors_, path)
        logger.info("embeddings: %s vocabulary %d, epoch losses %s", lang, len(model.vocabulary_),
                    ", ".join(f"{x:.4f}" for x in model.loss_history_))
    return 0


def cmd_build_lexicons(cfg: PipelineConfig, args) -> int:
    lx = cfg["lexicon"]
    spans = load_spans(cfg.path("spans")).articles
    if not spans:
        raise LexiconError("span file holds no usable spans")
    inducer = LexiconInducer(lx["size"], lx["df_hi"], lx["df_lo"], lx["k"], lx["min_sim"], lx["cap"],
                             cfg["source_language"]).fit(spans)
    articles = _truncated(cfg, _load_articles(cfg))
    written = list(inducer.base_lexicons_.values())
    words = sorted({w for lex in written for w in lex.words})
    for lang in cfg.languages:
        table = read_translation_table(cfg.path("translations", lang))
        vec_path = _background_vectors_path(cfg, lang)
        if not vec_path.is_file():
            raise FileNotFoundError(f"background vectors for {lang} not found: {vec_path} "
                                    "(run train-embeddings or set paths.background_vectors)")
        store = load_vectors(vec_path, language=lang)
        docs = [tokenize(a.body, lang) for a in articles if a.language == lang]
        dfs = term_document_frequencies(docs) if docs else None
        for base in inducer.base_lexicons_.values():
            try:
                written.append(translate_lexicon(base, table, lang))
            except LexiconError as exc:
                logger.warning("%s: %s", lang, exc)
        localized = inducer.localize(table, store, lang, dfs)
        written.extend(localized[f] for f in FRAMES if f in localized)
        logger.info("lexicons: %s has %d contextualized frame lexicons", lang, len(localized))
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_lexicons(written, out / "lexicons.jsonl")
    (out / "base_words.txt").write_text("".join(w + "\n" for w in words), encoding="utf-8")
    return 0


# --- scoring -------------------------------------------------------------

def _lexicons_path(cfg: PipelineConfig) -> Path:
    return cfg.output_dir / "lexicons.jsonl"


def cmd_score(cfg: PipelineConfig, args) -> int:
    lexicons = read_lexicons(_lexicons_path(cfg))
    originals = _load_articles(cfg)
    articles = _truncated(cfg, originals)
    lex_vectors = []
    for a in articles:
        per_frame = {f: lex for (lang, f), lex in lexicons.items() if lang == a.language}
        lex_vectors.append(score_lexicon(a, per_frame))
    label_bodies = articles if cfg["corpus"]["truncate_before_labels"] else originals
    ingest = ingest_sentence_labels(cfg.path("sentence_labels"), label_bodies)
    sent = {v.article_id: v for v in ingest.vectors}
    missing = [a.id for a in articles if a.id not in sent]
    if missing:
        logger.warning("scoring: %d article(s) have no sentence labels; scored as frameless", len(missing))
    sent_vectors = [sent.get(a.id) or FrameVoteVector(a.id, "sentence", (0,) * len(FRAMES))
                    for a in articles]
    out = cfg.output_dir / "scores"
    out.mkdir(parents=True, exist_ok=True)
    for method, vectors in (("lexicon", lex_vectors), ("sentence", sent_vectors)):
        write_vectors_csv(vectors, out / f"{method}_raw.csv", "raw")
        write_vectors_csv(vectors, out / f"{method}_votes.csv", "votes")
        write_vectors_csv([presence_vector(v) for v in vectors], out / f"{method}_presence.csv",
                          "presence")
    return 0


def _read_scores(cfg: PipelineConfig):
    out = cfg.output_dir / "scores"
    paths = [out / "lexicon_raw.csv", out / "sentence_raw.csv"]
    for p in paths:
        if not p.is_file():
            raise FileNotFoundError(f"scores not found: {p} (run score first)")
    lex, sent = ({v.article_id: v for v in read_raw_csv(p)} for p in paths)
    return lex, sent


def _scored_articles(cfg: PipelineConfig, lex, sent):
    return [a for a in _load_articles(cfg) if a.id in lex and a.id in sent]


# --- agreement ------------------------------------------------------------

def format_percent(x) -> str:
    return "" if x is None else f"{x:.1f}"


def _agreement_by_frame(cfg, articles, lex, sent):
    """Per frame and language: % of cells marked by either method that both mark present."""
    rows = []
    for f in FRAMES:
        row = [f.label]
        for lang in cfg.languages:
            either = both = 0
            for a in articles:
                if a.language != lang:
                    continue
                x, y = lex[a.id].vote(f) >= 1, sent[a.id].vote(f) >= 1
                either += x or y
                both += x and y
            row.append(format_percent(100.0 * both / either) if either else "")
        rows.append(row)
    return ["frame", *cfg.languages], rows


def cmd_agree(cfg: PipelineConfig, args) -> int:
    lex, sent = _read_scores(cfg)
    articles = _scored_articles(cfg, lex, sent)
    mc = cfg["mace"]
    priors = load_priors(cfg.path("frame_counts"))
    dominant_rows, competence_rows = [], []
    for lang in cfg.languages:
        group = [a for a in articles if a.language == lang]
        if not group:
            logger.warning("agreement: no scored %s articles", lang)
            continue
        ld = {a.id: dominant_frame(lex[a.id], article_seed(cfg.seed, a.id)) for a in group}
        sd = {a.id: dominant_frame(sent[a.id], article_seed(cfg.seed, a.id)) for a in group}
        decided = [aid for aid in ld if ld[aid] is not None or sd[aid] is not None]
        raw = alpha = None
        if decided:
            raw = raw_agreement({k: ld[k] for k in decided}, {k: sd[k] for k in decided})
            try:
                alpha = 100.0 * krippendorff_alpha(dominant_matrix(ld, sd))
            except ValueError as exc:
                logger.warning("agreement: alpha undefined for %s (%s)", lang, exc)
        dominant_rows.append([lang, len(group), len(decided), format_percent(raw), format_percent(alpha)])

        lp = [presence_vector(lex[a.id]) for a in group]
        sp = [presence_vector(sent[a.id]) for a in group]
        settings = [("binary", "binary", None), ("positive", "positive", None),
                    ("positive_unfiltered_priors", "positive", priors["unfiltered"]),
                    ("positive_filtered_priors", "positive", priors["filtered"])]
        for name, mode, prior in settings:
            matrix = build_presentation(lp, sp, mode)
            if len(matrix.items) == 0:
                competence_rows.append([lang, name, 0, "", ""])
                continue
            model = MACE(mc["restarts"], mc["iterations"], mc["smoothing"],
                         label_priors_for(matrix, prior), cfg.seed).fit(matrix)
            pct = model.result().as_percent()
            competence_rows.append([lang, name, len(matrix.items), format_percent(pct["lexicon"]),
                                    format_percent(pct["sentence"])])
    out = cfg.output_dir
    _write_csv(out / "agreement_dominant.csv",
               ["language", "articles", "decided", "raw_agreement", "krippendorff_alpha"], dominant_rows)
    _write_csv(out / "competence.csv", ["language", "presentation", "items", "lexicon", "sentence"],
               competence_rows)
    header, rows = _agreement_by_frame(cfg, articles, lex, sent)
    _write_csv(out / "agreement_by_frame.csv", header, rows)
    return 0


# --- salience ------------------------------------------------------------

def _salience(cfg, articles, lex, sent):
    majority = [majority_presence(presence_vector(lex[a.id]), presence_vector(sent[a.id]))
                for a in articles]
    by_lang = npmi(majority, GroupingSpec.by_language(articles, cfg.languages))
    by_region = npmi(majority, GroupingSpec.by_region(articles, cfg["regions"]))
    return by_lang, by_region


def cmd_salience(cfg: PipelineConfig, args) -> int:
    lex, sent = _read_scores(cfg)
    articles = _scored_articles(cfg, lex, sent)
    by_lang, by_region = _salience(cfg, articles, lex, sent)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    by_lang.to_csv(out / "salience_language.csv")
    by_region.to_csv(out / "salience_region.csv")
    lexicons = read_lexicons(_lexicons_path(cfg))
    rows = []
    for lang in by_lang.groups:
        frame = max(FRAMES, key=lambda f: (by_lang[(f, lang)], -f.code))
        lexicon = lexicons.get((lang, frame))
        words = []
        if lexicon is not None:
            group = [a for a in _truncated(cfg, articles) if a.language == lang]
            words = top_frame_words(frame, group, lexicon)
        rows.append([lang, frame.code, frame.label, f"{by_lang[(frame, lang)]:.4f}", " ".join(words)])
    _write_csv(out / "top_words.csv", ["language", "frame_code", "frame", "npmi", "words"], rows)
    return 0


def cmd_report(cfg: PipelineConfig, args) -> int:
    lex, sent = _read_scores(cfg)
    articles = _scored_articles(cfg, lex, sent)
    out = cfg.output_dir / "report"
    header, rows = _agreement_by_frame(cfg, articles, lex, sent)
    _write_csv(out / "agreement_by_frame.csv", header, rows)
    by_lang, by_region = _salience(cfg, articles, lex, sent)
    by_lang.to_csv(out / "salience_language.csv")
    by_region.to_csv(out / "salience_region.csv")
    return 0


# --- evaluation ----------------------------------------------------------

def cmd_eval_intruder(cfg: PipelineConfig, args) -> int:
    out = cfg.output_dir / "intruder"
    if args.key or args.responses:
        if not (args.key and args.responses):
            raise ValueError("scoring needs both --key and --responses")
        score = score_intruder(read_intruder_key(args.key), read_intruder_responses(args.responses))
        flagged = set(score.flagged())
        rows = [[f.code, f.label, f"{100 * s:.1f}", f"{100 * h:.1f}", int(f in flagged)]
                for f, (s, h) in score.per_frame.items()]
        rows.append(["", "Average", f"{100 * score.soft:.1f}", f"{100 * score.hard:.1f}", ""])
        target = Path(args.out) if args.out else out / "intruder_scores.csv"
        _write_csv(target, ["frame_code", "frame", "soft", "hard", "flagged"], rows)
        return 0
    lexicons = read_lexicons(_lexicons_path(cfg))
    out.mkdir(parents=True, exist_ok=True)
    for lang in cfg.languages:
        per_frame = {f: lex for (lg, f), lex in lexicons.items() if lg == lang}
        sets = gen_intruder_sets(per_frame, seed=cfg.seed)
        write_intruder_tasks(sets, out / f"{lang}_tasks.csv", out / f"{lang}_key.csv")
    return 0


def cmd_eval_f1(cfg: PipelineConfig, args) -> int:
    report: F1Report = frame_f1(read_frame_labels(args.predicted), read_frame_labels(args.gold),
                                all_frames=args.all_frames)
    out = Path(args.out) if args.out else cfg.output_dir / "f1.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    report.to_csv(out, out.with_name(out.stem + "_confusion.csv"))
    return 0


def cmd_fetch_translations(cfg: PipelineConfig, args) -> int:
    from .translate import fetch_translations, write_translation_table

    words = [w.strip() for w in Path(args.words).read_text(encoding="utf-8").splitlines() if w.strip()]
    table, failed = fetch_translations(words, args.target, cfg["source_language"])
    write_translation_table(table, args.out)
    if failed:
        logger.warning("translate: %d word(s) without translation", len(failed))
    return 0


def cmd_validate(cfg: PipelineConfig, args) -> int:
    problems = validate(cfg)
    if problems:
        raise ConfigError(problems)
    print("config ok")
    return 0


COMMANDS = {
    "validate-config": cmd_validate, "pair": cmd_pair, "build-lexicons": cmd_build_lexicons,
    "train-embeddings": cmd_train_embeddings, "score": cmd_score, "agree": cmd_agree,
    "salience": cmd_salience, "report": cmd_report, "eval-intruder": cmd_eval_intruder,
    "eval-f1": cmd_eval_f1, "fetch-translations": cmd_fetch_translations,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyframe", description="Multilingual frame analysis pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="pipeline config (YAML)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--workers", type=int, help="worker processes (default: config, else CPU count)")
    parser.add_argument("--language", action="append", help="restrict to this language (repeatable)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("validate-config", "pair", "build-lexicons", "train-embeddings", "score", "agree",
                 "salience", "report"):
        sub.add_parser(name)
    p = sub.add_parser("eval-intruder", help="generate intruder tasks, or score them with --key/--responses")
    p.add_argument("--key")
    p.add_argument("--responses")
    p.add_argument("--out")
    p = sub.add_parser("eval-f1")
    p.add_argument("--predicted", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--all-frames", action="store_true")
    p.add_argument("--out")
    p = sub.add_parser("fetch-translations")
    p.add_argument("--words", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", required=True)
    p = sub.add_parser("make-synthetic", help="write the bundled synthetic corpus and its config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--articles", type=int, default=500)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    module = _MODULE[args.command]
    if args.command == "make-synthetic":
        from .synthetic import SyntheticSpec, generate

        seed = 1234 if args.seed is None else args.seed
        try:
            path = generate(args.out_dir, SyntheticSpec(n_articles=args.articles, seed=seed))
        except (OSError, ValueError) as exc:
            print(f"{module}: {exc}", file=sys.stderr)
            return 1
        print(path)
        return 0
    if not args.config:
        print("config: --config is required for this command", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config, args.seed, args.workers, args.language)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config: {problem}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config: {problem}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - every module error maps to exit 1
        if args.verbose:
            logger.exception("%s failed", args.command)
        print(f"{module}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
