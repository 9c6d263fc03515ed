import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from privlad.errors import ParseError
from privlad.serialize import (
    csv_text,
    dump_json,
    format_float,
    parse_float,
    read_csv_rows,
    write_text,
)


def test_format_float_known_values():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(1.0) == "1"
    assert format_float(math.pi) == "3.1415926535897931"
    assert format_float(-2.5e-300) == "-2.5e-300"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_format_parse_round_trip_exact(value):
    assert parse_float(format_float(value), None, 1) == value


def test_parse_float_rejections():
    for token in ("nan", "inf", "-inf", "abc", "1.0.0", ""):
        with pytest.raises(ParseError):
            parse_float(token, "f.csv", 3)
    try:
        parse_float("oops", "f.csv", 3)
    except ParseError as err:
        assert err.path == "f.csv"
        assert err.line == 3
        assert str(err) == "f.csv: line 3: not a number: 'oops'"


def test_csv_text_layout():
    text = csv_text(["a", "b"], [["1", "2"], ["3", "4"]])
    assert text == "a,b\n1,2\n3,4\n"


def test_read_csv_rows_happy_path():
    rows = list(read_csv_rows("a,b\n1,2\n\n3,4\n", ["a", "b"]))
    assert rows == [(2, ["1", "2"]), (4, ["3", "4"])]


def test_read_csv_rows_errors():
    with pytest.raises(ParseError):
        list(read_csv_rows("", ["a"]))
    with pytest.raises(ParseError) as header:
        list(read_csv_rows("x,y\n1,2\n", ["a", "b"], path="h.csv"))
    assert header.value.line == 1
    with pytest.raises(ParseError) as width:
        list(read_csv_rows("a,b\n1,2\n7\n", ["a", "b"]))
    assert width.value.line == 3


def test_write_text_and_dump_json(tmp_path):
    text_path = str(tmp_path / "t.txt")
    write_text(text_path, "line\n")
    assert open(text_path, encoding="utf-8").read() == "line\n"
    json_path = str(tmp_path / "o.json")
    dump_json({"b": 1, "a": [1.5, math.pi]}, json_path)
    raw = open(json_path, encoding="utf-8").read()
    assert raw.endswith("\n")
    assert raw.index('"a"') < raw.index('"b"')
    assert json.loads(raw) == {"b": 1, "a": [1.5, math.pi]}
