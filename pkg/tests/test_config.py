import pytest
import yaml

from polyframe.config import ConfigError, load_config, validate


def write(tmp_path, data, name="c.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data), encoding="utf-8")
    return p


def test_complete_synthetic_config_validates(synthetic_world):
    _, config = synthetic_world
    cfg = load_config(config)
    assert validate(cfg) == []
    assert cfg.seed == 1234 and cfg.languages == ["ru", "fr", "es", "it"]
    assert cfg["lexicon"]["min_sim"] == 0.5  # default merged in


def test_seed_is_mandatory(tmp_path):
    with pytest.raises(ConfigError, match="seed"):
        load_config(write(tmp_path, {"languages": ["ru"]}))
    assert load_config(write(tmp_path, {"languages": ["ru"]}), seed=3).seed == 3


def test_range_problems_are_all_reported(tmp_path):
    data = {"seed": 1, "lexicon": {"min_sim": 1.5, "df_lo": 0.9, "df_hi": 0.1},
            "pairing": {"min_score": "high", "grid": {"max_ngram": [4], "colour": [1]}},
            "cbow": {"alpha_start": 0.001, "alpha_end": 0.01}}
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, data))
    text = " ".join(err.value.problems)
    for needle in ("lexicon.min_sim", "df_lo", "min_score", "max_ngram", "colour", "learning rate"):
        assert needle in text


def test_overrides_and_paths(tmp_path):
    cfg = load_config(write(tmp_path, {"seed": 1, "workers": 2, "paths": {"articles": "a.jsonl"}}),
                      seed=9, workers=1, languages=["fr", "xx"])
    assert (cfg.seed, cfg.workers, cfg.languages) == (9, 1, ["fr"])
    assert cfg.path("articles") == tmp_path / "a.jsonl"
    assert cfg.path("aligned_vectors", "fr") is None
    problems = validate(cfg)
    assert any("paths.articles: file not found" in p for p in problems)
    assert any("paths.aligned_vectors.fr: not set" in p for p in problems)


def test_invalid_documents(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.yaml")
    (tmp_path / "bad.yaml").write_text("seed: [1\n")
    with pytest.raises(ConfigError, match="YAML"):
        load_config(tmp_path / "bad.yaml")
    (tmp_path / "list.yaml").write_text("- 1\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(tmp_path / "list.yaml")
