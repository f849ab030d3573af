import json

import pytest

from wpgap.constants import REQUIRED, default_constants, load_constants
from wpgap.errors import InputFileError, ParseError, PreconditionError


def test_defaults_complete():
    c = default_constants()
    assert set(c) == set(REQUIRED)
    assert c["beta"] < c["beta1"]


def test_overrides_and_none():
    c = load_constants(overrides={"beta": 2.0, "c1": None})
    assert c["beta"] == 2.0 and c["c1"] == default_constants()["c1"]


def test_file_merges_with_defaults(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"K_sep": 0.2}))
    c = load_constants(path)
    assert c["K_sep"] == 0.2 and c["beta"] == default_constants()["beta"]


@pytest.mark.parametrize("content,error", [
    ("[1, 2]", ParseError),
    ('{"beta": "x"}', ParseError),
    ('{"beta": -1}', PreconditionError),
    ("{oops", ParseError),
])
def test_bad_files(tmp_path, content, error):
    path = tmp_path / "c.json"
    path.write_text(content)
    with pytest.raises(error):
        load_constants(path)


def test_missing_file(tmp_path):
    with pytest.raises(InputFileError):
        load_constants(tmp_path / "none.json")
