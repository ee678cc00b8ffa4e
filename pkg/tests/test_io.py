import pytest

from gmmcrit import load_sample, parse_sample
from gmmcrit.errors import SampleFormatError
from gmmcrit.io import format_sample


def test_json_array():
    assert list(parse_sample("[3, 1.5, -2]")) == [-2.0, 1.5, 3.0]


def test_lines_with_comments_and_blanks():
    assert list(parse_sample("# data\n1.0\n\n 2e-1 \n")) == [0.2, 1.0]


@pytest.mark.parametrize(
    "text",
    ["", "   \n", "[1, \"a\"]", "[1, [2]]", "[true, 1]", "{\"x\": 1}", "1\nabc\n", "[1, NaN]", "1\ninf\n", "[1,"],
)
def test_rejects_bad_text(text):
    with pytest.raises(SampleFormatError):
        parse_sample(text)


def test_round_trip(tmp_path):
    path = tmp_path / "s.txt"
    s = parse_sample("[0.1, 0.2, 1e-300, 12345.678]")
    path.write_text(format_sample(s))
    assert load_sample(path) == s


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_sample(tmp_path / "missing.txt")
