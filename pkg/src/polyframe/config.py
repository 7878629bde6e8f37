"""Pipeline configuration: a YAML document with mandatory seed and nested sections."""
from __future__ import annotations

import copy
import dataclasses
import os
from pathlib import Path
from typing import Any

import yaml

DEFAULTS: dict[str, Any] = {
    "workers": None,
    "languages": ["ru", "fr", "es", "it"],
    "source_language": "en",
    "output_dir": "out",
    "paths": {
        "articles": None,
        "spans": None,
        "sentence_labels": None,
        "aligned_vectors": {},
        "background_vectors": {},
        "background_corpora": {},
        "translations": {},
        "frame_counts": None,
        "regions": None,
        "stopwords": None,
    },
    "corpus": {"min_chars": 300, "word_limit": 225, "truncate_before_labels": True},
    "pairing": {
        "window_days": 28,
        "min_score": 0.55,
        "coverage": 0.9,
        "target_languages": ["ru"],
        "keywords": {"num_keywords": 20, "max_ngram": 2, "dedup_threshold": 0.8, "window": 1},
        "grid": {"num_keywords": [10, 20], "max_ngram": [1, 2], "dedup_threshold": [0.8]},
    },
    "lexicon": {"size": 250, "k": 500, "min_sim": 0.5, "cap": 300, "df_hi": 0.98, "df_lo": 0.005},
    "mace": {"restarts": 10, "iterations": 50, "smoothing": None},
    "cbow": {"dimension": 200, "window": 5, "min_count": 5, "max_vocab": 50000, "epochs": 5,
             "negative": 5, "alpha_start": 0.05, "alpha_end": 0.0001, "sample_lines": 1_000_000},
    "regions": ["Russia", "Eastern Europe", "The Caucasus", "Central Asia"],
}

PER_LANGUAGE_PATHS = ("aligned_vectors", "translations")


class ConfigError(ValueError):
    """Invalid configuration; carries every problem found."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("grid",):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


@dataclasses.dataclass
class PipelineConfig:
    seed: int
    data: dict
    base_dir: Path

    def __getitem__(self, key):
        return self.data[key]

    @property
    def workers(self) -> int:
        return self.data["workers"] or os.cpu_count() or 1

    @property
    def languages(self) -> list[str]:
        return list(self.data["languages"])

    @property
    def output_dir(self) -> Path:
        return self.resolve(self.data["output_dir"])

    def resolve(self, p) -> Path | None:
        if p is None:
            return None
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p

    def path(self, name: str, language: str | None = None) -> Path | None:
        value = self.data["paths"].get(name)
        if language is not None:
            value = (value or {}).get(language)
        return self.resolve(value)


def load_config(path, seed: int | None = None, workers: int | None = None,
                languages: list[str] | None = None) -> PipelineConfig:
    """Parse and range-check a config file; CLI overrides win over file values."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError([f"config file not found: {path}"])
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError([f"config is not valid YAML: {exc}"]) from None
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a mapping"])
    data = _merge(DEFAULTS, raw)
    if seed is not None:
        data["seed"] = seed
    if workers is not None:
        data["workers"] = workers
    if languages:
        data["languages"] = [lang for lang in data["languages"] if lang in languages]
    problems = check_ranges(data)
    if problems:
        raise ConfigError(problems)
    return PipelineConfig(int(data["seed"]), data, path.parent.resolve())


def _in(value, low, high) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and low <= value <= high


def _pos_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value > 0


def check_ranges(data: dict) -> list[str]:
    problems = []
    if "seed" not in data or not isinstance(data.get("seed"), int) or isinstance(data.get("seed"), bool):
        problems.append("seed: a mandatory integer seed is required")
    if data.get("workers") is not None and not _pos_int(data["workers"]):
        problems.append("workers: must be a positive integer")
    if not data.get("languages"):
        problems.append("languages: at least one target language is required")
    lex = data["lexicon"]
    if not _in(lex["min_sim"], -1.0, 1.0):
        problems.append(f"lexicon.min_sim: {lex['min_sim']!r} outside [-1, 1]")
    for key in ("df_hi", "df_lo"):
        if not _in(lex[key], 0.0, 1.0):
            problems.append(f"lexicon.{key}: {lex[key]!r} outside [0, 1]")
    if _in(lex["df_hi"], 0, 1) and _in(lex["df_lo"], 0, 1) and lex["df_lo"] > lex["df_hi"]:
        problems.append("lexicon.df_lo: must not exceed df_hi")
    for key in ("size", "k", "cap"):
        if not _pos_int(lex[key]):
            problems.append(f"lexicon.{key}: must be a positive integer")
    pairing = data["pairing"]
    if not _pos_int(pairing["window_days"]):
        problems.append("pairing.window_days: must be a positive integer")
    if pairing["min_score"] != "auto" and not _in(pairing["min_score"], -1.0, 1.0):
        problems.append(f"pairing.min_score: {pairing['min_score']!r} outside [-1, 1] (or 'auto')")
    if not _in(pairing["coverage"], 0.0, 1.0):
        problems.append("pairing.coverage: outside [0, 1]")
    grid = pairing.get("grid") or {}
    for axis, values in grid.items():
        if axis not in ("num_keywords", "max_ngram", "dedup_threshold"):
            problems.append(f"pairing.grid.{axis}: unknown axis")
            continue
        if not isinstance(values, list) or not values:
            problems.append(f"pairing.grid.{axis}: must be a non-empty list")
            continue
        for v in values:
            if axis == "dedup_threshold" and not _in(v, 0.0, 1.0):
                problems.append(f"pairing.grid.dedup_threshold: {v!r} outside [0, 1]")
            if axis == "max_ngram" and not (_pos_int(v) and v <= 3):
                problems.append(f"pairing.grid.max_ngram: {v!r} outside 1..3")
            if axis == "num_keywords" and not _pos_int(v):
                problems.append(f"pairing.grid.num_keywords: {v!r} not a positive integer")
    corpus = data["corpus"]
    if not _pos_int(corpus["word_limit"]):
        problems.append("corpus.word_limit: must be a positive integer")
    if not isinstance(corpus["min_chars"], int) or corpus["min_chars"] < 0:
        problems.append("corpus.min_chars: must be a non-negative integer")
    mace = data["mace"]
    for key in ("restarts", "iterations"):
        if not _pos_int(mace[key]):
            problems.append(f"mace.{key}: must be a positive integer")
    if mace["smoothing"] is not None and not _in(mace["smoothing"], 0.0, 1e6):
        problems.append("mace.smoothing: must be non-negative")
    cbow = data["cbow"]
    for key in ("dimension", "window", "min_count", "max_vocab", "epochs", "negative", "sample_lines"):
        if not _pos_int(cbow[key]):
            problems.append(f"cbow.{key}: must be a positive integer")
    if not (_in(cbow["alpha_start"], 0, 10) and _in(cbow["alpha_end"], 0, 10)
            and cbow["alpha_start"] > cbow["alpha_end"] > 0):
        problems.append("cbow: learning rate requires alpha_start > alpha_end > 0")
    return problems


def validate(config: PipelineConfig) -> list[str]:
    """File-presence and language-coverage problems (ranges are checked at load)."""
    problems = []
    for name in ("articles", "spans", "sentence_labels"):
        p = config.path(name)
        if p is None:
            problems.append(f"paths.{name}: not set")
        elif not p.is_file():
            problems.append(f"paths.{name}: file not found: {p}")
    for name in PER_LANGUAGE_PATHS:
        for lang in config.languages:
            p = config.path(name, lang)
            if p is None:
                problems.append(f"paths.{name}.{lang}: not set")
            elif not p.is_file():
                problems.append(f"paths.{name}.{lang}: file not found: {p}")
    corpora = config["paths"].get("background_corpora") or {}
    for lang in config.languages:
        p = config.path("background_vectors", lang)
        if p is None:
            if lang not in corpora:
                problems.append(f"paths.background_vectors.{lang}: not set (and no background corpus to train on)")
        elif not p.is_file():
            problems.append(f"paths.background_vectors.{lang}: file not found: {p}")
    for lang, value in corpora.items():
        p = config.resolve(value)
        if not p.is_file():
            problems.append(f"paths.background_corpora.{lang}: file not found: {p}")
    for name in ("frame_counts", "regions"):
        p = config.path(name)
        if p is not None and not p.is_file():
            problems.append(f"paths.{name}: file not found: {p}")
    p = config.path("stopwords")
    if p is not None and not p.is_dir():
        problems.append(f"paths.stopwords: directory not found: {p}")
    return problems
