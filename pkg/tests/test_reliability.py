import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyframe.frames import FRAMES, Frame
from polyframe.priors import derive_priors, read_count_table
from polyframe.reliability import (MACE, AnnotationMatrix, PriorSpec, build_presentation,
                                   coincidence_matrix, dominant_matrix, krippendorff_alpha,
                                   label_priors_for, mace, raw_agreement)
from polyframe.scoring import PresenceVector

from conftest import brute_force_alpha, mace_data


def matrix_of(units):
    items = list(range(len(units)))
    labels = {(i, j): v for i, u in enumerate(units) for j, v in enumerate(u) if v is not None}
    return AnnotationMatrix.from_labels(items, list(range(len(units[0]))), labels)


def test_raw_agreement():
    a = {"x": 1, "y": 2, "z": 3}
    assert raw_agreement(a, a) == 100.0
    assert raw_agreement(a, {"x": 2, "y": 3}) == 0.0
    assert raw_agreement(a, {"x": 1, "y": 3, "q": 1}) == 50.0
    with pytest.raises(ValueError):
        raw_agreement(a, {"q": 1})


@given(st.dictionaries(st.integers(0, 9), st.integers(0, 3), min_size=1),
       st.dictionaries(st.integers(0, 9), st.integers(0, 3), min_size=1))
def test_raw_agreement_range_and_symmetry(a, b):
    if not a.keys() & b.keys():
        return
    assert 0.0 <= raw_agreement(a, b) == raw_agreement(b, a) <= 100.0


def test_alpha_hand_example():
    units = [("a", "a"), ("a", "b"), ("b", "b"), ("b", "b")]
    m = matrix_of(units)
    assert coincidence_matrix(m).sum() == 8
    assert krippendorff_alpha(m) == pytest.approx(8 / 15, abs=1e-12)
    assert krippendorff_alpha(m) == pytest.approx(brute_force_alpha(units), abs=1e-12)


def test_alpha_perfect_and_degenerate():
    assert krippendorff_alpha(matrix_of([("a", "a"), ("b", "b"), ("c", "c")])) == 1.0
    with pytest.raises(ValueError, match="degenerate label distribution"):
        krippendorff_alpha(matrix_of([("a", "a"), ("a", "a")]))
    with pytest.raises(ValueError):
        krippendorff_alpha(matrix_of([("a", "b"), ("a", None)]))


units_strategy = st.lists(st.lists(st.one_of(st.none(), st.sampled_from("abc")), min_size=3, max_size=3),
                          min_size=2, max_size=10)


@settings(max_examples=150)
@given(units_strategy, st.permutations("abc"))
def test_alpha_oracle_bound_and_permutation(units, perm):
    try:
        expected = brute_force_alpha(units)
    except ZeroDivisionError:
        return
    m = matrix_of(units)
    if int(np.sum((m.codes != -1).sum(axis=1) >= 2)) < 2:
        return
    got = krippendorff_alpha(m)
    assert got == pytest.approx(expected, abs=1e-9)
    assert got <= 1.0 + 1e-12
    mapping = dict(zip("abc", perm))
    relabelled = [[None if v is None else mapping[v] for v in u] for u in units]
    assert krippendorff_alpha(matrix_of(relabelled)) == pytest.approx(got, abs=1e-12)


def test_matrix_csv_round_trip(tmp_path):
    m = AnnotationMatrix.from_labels(["i1", "i2"], ["lexicon", "sentence"],
                                     {("i1", "lexicon"): "1", ("i1", "sentence"): "0", ("i2", "sentence"): "1"})
    m.to_csv(tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines()[2] == "i2,,1"
    back = AnnotationMatrix.read_csv(tmp_path / "m.csv")
    assert back.items == m.items and np.array_equal(back.codes, m.codes)
    with pytest.raises(ValueError):
        AnnotationMatrix.from_labels(["i"], ["a"], {("i", "a"): "z"}, ["x"])


def test_mace_separates_spammers_and_recovers_labels():
    matrix, truth = mace_data(0)
    model = MACE(n_restarts=5, n_iter=50, seed=0).fit(matrix)
    theta = model.competence_
    assert theta[:3].min() > theta[3:].max()
    assert np.mean(np.array(model.predict()) == truth) >= 0.95
    trace = np.array(model.log_likelihood_)
    assert np.all(np.diff(trace) >= -1e-8)
    np.testing.assert_allclose(model.posteriors_.sum(axis=1), 1.0, atol=1e-9)


def test_mace_is_deterministic():
    matrix, _ = mace_data(3, n_items=50)
    a = mace(matrix, restarts=3, iterations=20, seed=7)
    b = mace(matrix, restarts=3, iterations=20, seed=7)
    assert a == b


def test_mace_single_annotator():
    m = AnnotationMatrix(tuple(range(4)), ("only",), ("x", "y"), np.array([[0], [1], [1], [0]]))
    res = mace(m, restarts=2, iterations=30)
    assert 0.0 <= res.competence["only"] <= 1.0
    for i, lab in enumerate("xyyx"):
        assert max(res.posteriors[i], key=res.posteriors[i].get) == lab


def test_skewed_prior_shifts_posteriors_within_bounds():
    matrix, _ = mace_data(1, n_items=60, n_labels=3, thetas=(0.3, 0.2))
    flat = MACE(n_restarts=2, n_iter=30, seed=0).fit(matrix)
    skewed = MACE(n_restarts=2, n_iter=30, seed=0, label_priors=[0.98, 0.01, 0.01]).fit(matrix)
    assert skewed.posteriors_[:, 0].mean() > flat.posteriors_[:, 0].mean()
    assert np.all((skewed.competence_ >= 0) & (skewed.competence_ <= 1))
    with pytest.raises(ValueError):
        MACE(label_priors=[0.5, 0.5]).fit(matrix)


def presence(aid, method, frames):
    return PresenceVector(aid, method, tuple(f in frames for f in FRAMES))


def test_presentations():
    eco, mor = Frame.ECONOMIC, Frame.MORALITY
    lex = [presence(f"a{i}", "lexicon", {eco} if i == 0 else set()) for i in range(10)]
    sen = [presence(f"a{i}", "sentence", {eco, mor} if i == 0 else set()) for i in range(10)]
    assert len(build_presentation(lex, sen, "binary").items) == 140
    pos = build_presentation(lex, sen, "positive")
    assert pos.items == (("a0", 1), ("a0", 3))
    assert pos.codes.tolist() == [[1, 1], [0, 1]]
    with pytest.raises(ValueError, match="a9"):
        build_presentation(lex, sen[:9])


def test_label_priors_for_presence_and_frames():
    spec = derive_priors(read_count_table())
    m = build_presentation([presence("a", "lexicon", {Frame.ECONOMIC})], [presence("a", "sentence", set())])
    rows = label_priors_for(m, spec)
    assert rows.shape == (14, 2)
    assert rows[0, 1] == pytest.approx(spec.distribution[Frame.ECONOMIC])
    dm = dominant_matrix({"a": Frame.ECONOMIC, "b": None}, {"a": Frame.HEALTH, "b": Frame.HEALTH})
    assert dm.label(1, 0) is None and dm.label(1, 1) is Frame.HEALTH
    assert label_priors_for(dm, spec).sum() == pytest.approx(1.0)
    assert label_priors_for(dm, PriorSpec()) is None
    with pytest.raises(ValueError):
        PriorSpec("filtered", {Frame.ECONOMIC: 0.5})
