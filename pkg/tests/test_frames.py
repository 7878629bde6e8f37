import pytest

from polyframe.frames import FRAMES, N_FRAMES, Frame


def test_exactly_fourteen_frames_with_sequential_codes():
    assert N_FRAMES == 14
    assert [f.code for f in FRAMES] == list(range(1, 15))
    assert FRAMES[0].label == "Economic"
    assert FRAMES[-1].label == "External Regulation and Reputation"


@pytest.mark.parametrize("code", [5, 5.0, "5", "5.0"])
def test_code_notations(code):
    assert Frame.from_code(code) is Frame.LEGALITY


@pytest.mark.parametrize("bad", [0, 15, "15.0", 2.5, "other", None])
def test_out_of_taxonomy_codes_rejected(bad):
    with pytest.raises(ValueError):
        Frame.from_code(bad)


def test_code_name_round_trip():
    for f in FRAMES:
        assert Frame.from_code(f.code_str) is f
        assert Frame.from_name(f.label) is f
        assert Frame.from_code(Frame.from_name(f.label).code) is f


def test_other_and_none_not_members():
    for name in ("Other", "None"):
        with pytest.raises(ValueError):
            Frame.from_name(name)
