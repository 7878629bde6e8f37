import functools
import math

import pytest
from hypothesis import given, settings, strategies as st

from polyframe.keywords import (KeywordConfig, KeywordExtractor, dedup_keywords, edit_similarity,
                                extract_keywords, levenshtein, load_stopwords, term_scores)

from conftest import make_article

LNLN3 = math.log(math.log(3.0))


def test_hand_computed_features():
    # alpha: TF 3, case 0, position lnln3, fnorm 3/(2.5+0.5)=1, rel 1+(1/2+1/2)*3/3=2, spread 1
    # beta:  TF 2, case 0, position lnln3, fnorm 2/3, rel 1+(1/2+1/2)*2/3=5/3, spread 1
    scores, _ = term_scores("alpha beta alpha beta alpha", "en", stopwords=())
    assert scores["alpha"] == pytest.approx(2.0 * LNLN3 / (0 + 1 / 2 + 1 / 2), rel=1e-12)
    assert scores["beta"] == pytest.approx((5 / 3) * LNLN3 / (0 + (2 / 3) / (5 / 3) + 1 / (5 / 3)),
                                           rel=1e-12)


def test_alpha_ranked_above_beta():
    art = make_article(body="alpha beta alpha beta alpha", language="en")
    ks = extract_keywords(art, KeywordConfig(num_keywords=5, max_ngram=1), stopwords=())
    assert ks.phrases == ["alpha", "beta"]
    s_a, s_b = 2 * LNLN3, 5 / 3 * LNLN3
    assert ks.keywords[0][1] == pytest.approx(s_a / (3 * (1 + s_a)), rel=1e-12)
    assert ks.keywords[1][1] == pytest.approx(s_b / (2 * (1 + s_b)), rel=1e-12)


def test_empty_article():
    assert extract_keywords(make_article(body=""), KeywordConfig()).keywords == ()


def test_config_axes_and_validation():
    c = KeywordConfig()
    assert (c.num_keywords, c.max_ngram, c.dedup_threshold) == (20, 2, 0.8)
    for bad in ({"num_keywords": 0}, {"max_ngram": 4}, {"dedup_threshold": 1.5}):
        with pytest.raises(ValueError):
            KeywordConfig(**bad)


@functools.lru_cache(maxsize=None)
def lev_oracle(a, b):
    if not a or not b:
        return len(a) + len(b)
    return min(lev_oracle(a[1:], b) + 1, lev_oracle(a, b[1:]) + 1,
               lev_oracle(a[1:], b[1:]) + (a[0] != b[0]))


@given(st.text("abc", max_size=7), st.text("abc", max_size=7))
def test_levenshtein_matches_recursive_oracle(a, b):
    assert levenshtein(a, b) == lev_oracle(a, b)


def test_dedup_examples():
    assert edit_similarity("kyiv visit", "kyiv visits") == pytest.approx(10 / 11)
    kept = dedup_keywords([("kyiv visit", 0.1), ("kyiv visits", 0.2)], 0.8)
    assert [p for p, _ in kept] == ["kyiv visit"]
    assert dedup_keywords([("a", 0.1)], 0.5) == [("a", 0.1)]
    exact = dedup_keywords([("ab", 0.1), ("ab", 0.2), ("abc", 0.3)], 1.0)
    assert [p for p, _ in exact] == ["ab", "abc"]


phrases = st.lists(st.text("abcd ", min_size=1, max_size=6), max_size=8)


@given(phrases, st.floats(0, 1), st.floats(0, 1))
def test_dedup_monotone_in_threshold(cands, t1, t2):
    lo, hi = sorted((t1, t2))
    ranked = [(p, float(i)) for i, p in enumerate(cands)]
    assert len(dedup_keywords(ranked, lo)) <= len(dedup_keywords(ranked, hi))


TEXT = ("The Kremlin rejected the claims. Kremlin officials said the sanctions were illegal. "
        "Western sanctions hurt European farmers, the officials added. "
        "Farmers in Spain protested against the sanctions on Monday.")


def test_keyword_set_invariants():
    stop = load_stopwords("en")
    art = make_article(body=TEXT, language="en")
    for n in (1, 2, 3):
        ks = extract_keywords(art, KeywordConfig(num_keywords=6, max_ngram=n), stop)
        assert len(ks.keywords) <= 6
        assert len(set(ks.phrases)) == len(ks.phrases)
        scores = [s for _, s in ks.keywords]
        assert scores == sorted(scores)
        for p in ks.phrases:
            assert p in TEXT.lower()
            words = p.split()
            assert len(words) <= n
            assert words[0] not in stop and words[-1] not in stop
        assert ks == extract_keywords(art, KeywordConfig(num_keywords=6, max_ngram=n), stop)


def test_capitalized_frequent_terms_rank_high():
    art = make_article(body=TEXT, language="en")
    ks = extract_keywords(art, KeywordConfig(num_keywords=3, max_ngram=1), load_stopwords("en"))
    assert "kremlin" in ks.phrases


words = st.sampled_from(["alpha", "beta", "gamma", "Delta", "the", "of", "2020"])


@settings(max_examples=50)
@given(st.lists(st.lists(words, min_size=1, max_size=8), min_size=1, max_size=5), st.integers(1, 5))
def test_extraction_properties(sentences, k):
    body = " ".join(" ".join(s) + "." for s in sentences)
    art = make_article(body=body, language="en")
    ks = extract_keywords(art, KeywordConfig(num_keywords=k, max_ngram=2), {"the", "of"})
    assert len(ks.keywords) <= k
    for p in ks.phrases:
        assert p in body.lower()
        assert not any(w in {"the", "of"} or w.isdigit() for w in p.split())


def test_stopword_lists_ship_for_all_languages():
    for lang in ("en", "ru", "fr", "es", "it"):
        assert len(load_stopwords(lang)) > 50
    assert "и" in load_stopwords("ru") and "le" in load_stopwords("fr")


def test_extractor_estimator():
    ex = KeywordExtractor(num_keywords=3, max_ngram=1).fit()
    out = ex.transform([make_article(body=TEXT, language="en")])
    assert len(out) == 1 and len(out[0].keywords) <= 3
    assert ex.get_params()["num_keywords"] == 3
