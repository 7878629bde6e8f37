import datetime as dt
import json

import pytest
from hypothesis import given, settings, strategies as st

from polyframe.corpus import (load_articles, load_spans, read_region_table, sentence_spans,
                              split_sentences, tokenize, truncate_article, truncate_text,
                              write_articles)

from conftest import FIXTURES, make_article, write_jsonl

LONG = "x" * 320


def record(aid, body=LONG, **kw):
    r = {"id": aid, "language": "ru", "published_at": "2019-05-01", "outlet": "o", "body": body}
    r.update(kw)
    return r


def test_short_bodies_filtered(tmp_path):
    path = write_jsonl(tmp_path / "a.jsonl", [record("1"), record("2", "y" * 120), record("3")])
    got = load_articles(path, min_chars=300)
    assert [a.id for a in got.articles] == ["1", "3"]
    assert got.too_short == 1 and got.malformed == 0


def test_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    got = load_articles(path)
    assert got.articles == [] and got.malformed == 0


def test_missing_date_counts_as_malformed(tmp_path):
    bad = record("2")
    del bad["published_at"]
    path = write_jsonl(tmp_path / "a.jsonl", [record("1"), bad, "{not json"])
    got = load_articles(path)
    assert [a.id for a in got.articles] == ["1"]
    assert got.malformed == 2


def test_missing_file_is_fatal(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_articles(tmp_path / "nope.jsonl")


def test_duplicate_ids_keep_first_and_language_filter(tmp_path):
    path = write_jsonl(tmp_path / "a.jsonl", [
        record("1", LONG + "first"), record("1", LONG + "second"), record("2", language="de")])
    got = load_articles(path, languages=["ru"])
    assert len(got.articles) == 1 and got.articles[0].body.endswith("first")
    assert got.duplicates == 1 and got.malformed == 1


def test_country_mapped_to_region(tmp_path):
    path = write_jsonl(tmp_path / "a.jsonl", [record("1", country="Georgia"), record("2", region="X")])
    got = load_articles(path, region_table=read_region_table())
    assert [a.region for a in got.articles] == ["The Caucasus", "X"]
    assert read_region_table()["Poland"] == "Eastern Europe"


def test_articles_round_trip(tmp_path):
    a = make_article(body=LONG, report_id="r1", region="Russia")
    write_articles([a], tmp_path / "out.jsonl")
    assert load_articles(tmp_path / "out.jsonl").articles == [a]


def test_spans(tmp_path):
    path = write_jsonl(tmp_path / "s.jsonl", [
        {"doc_id": "d", "sentence": "Wages rose.", "frame_code": "1.0", "annotator_count": 2},
        {"doc_id": "d", "sentence": "Bad.", "frame_code": "15.0", "annotator_count": 1},
    ])
    got = load_spans(path)
    assert len(got.articles) == 1 and got.malformed == 1
    assert got.articles[0].frame.label == "Economic"


def test_split_examples():
    assert split_sentences("A. B? C!", "en") == ["A.", "B?", "C!"]
    assert split_sentences("", "en") == []
    assert split_sentences("Mr. Smith arrived.", "en") == ["Mr. Smith arrived."]


@pytest.mark.parametrize("language", ["en", "ru", "fr", "es", "it"])
def test_hand_segmented_fixture(language):
    lines = (FIXTURES / "segmentation" / f"{language}.txt").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 50
    assert split_sentences(" ".join(lines), language) == lines


@given(st.text(alphabet="ab .!?\n", max_size=60))
def test_sentences_cover_input(text):
    joined = "".join(s for s in split_sentences(text, "en"))
    assert joined.replace(" ", "").replace("\n", "") == text.replace(" ", "").replace("\n", "")


def test_tokenize_examples():
    assert tokenize("The war, the War.") == ["the", "war", "the", "war"]
    assert tokenize("") == []
    assert tokenize("Well-known 2015 facts") == ["well-known", "2015", "facts"]


def test_cyrillic_tokenization_fixture():
    rows = (FIXTURES / "tokens_ru.tsv").read_text(encoding="utf-8").splitlines()
    assert len(rows) == 20
    for row in rows:
        sentence, expected = row.split("\t")
        assert tokenize(sentence, "ru") == expected.split()


def sentence_of(n, word="w"):
    return " ".join(["Go"] + [word] * (n - 1)) + "."


def test_truncation_completes_the_sentence():
    body = " ".join(sentence_of(100) for _ in range(3))
    out = truncate_article(make_article(body=body, language="en"))
    assert len(tokenize(out.body)) == 300


def test_truncation_under_limit_and_exact_boundary():
    short = make_article(body="One two three four five six seven eight nine ten.", language="en")
    assert truncate_article(short) is short
    exact = " ".join(sentence_of(45) for _ in range(5))
    assert truncate_text(exact, "en") == exact


def test_truncation_stops_at_limit_sentence():
    body = " ".join(sentence_of(100) for _ in range(4))
    assert len(tokenize(truncate_text(body, "en"))) == 300


@st.composite
def bodies(draw):
    lengths = draw(st.lists(st.integers(1, 40), min_size=1, max_size=15))
    return " ".join(sentence_of(n) for n in lengths), lengths


@settings(max_examples=60)
@given(bodies(), st.integers(1, 120))
def test_truncation_properties(data, limit):
    body, lengths = data
    once = truncate_text(body, "en", limit)
    assert body.startswith(once)
    assert truncate_text(once, "en", limit) == once
    n = len(tokenize(once))
    assert n < limit + max(lengths)
    assert n >= min(limit, sum(lengths))
    # Whole sentences only.
    assert once == body or body[len(once)] == " "


def test_sentence_spans_offsets_are_trimmed():
    text = "  First one.   Second one!  "
    assert [text[s:e] for s, e in sentence_spans(text, "en")] == ["First one.", "Second one!"]


def test_truncate_rejects_nonpositive_limit():
    with pytest.raises(ValueError):
        truncate_text("a.", "en", 0)
