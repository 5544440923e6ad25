import json

import numpy as np
import pytest

from normschwarz.linalg import MatrixValueError
from normschwarz.serialize import dumps_line, load_instance, matrix_from_json, matrix_to_json


def test_round_trip_is_exact():
    g = np.random.default_rng(0)
    m = g.standard_normal((3, 3)) + 1j * g.standard_normal((3, 3))
    obj = json.loads(json.dumps(matrix_to_json(m)))
    assert obj["n"] == 3
    assert np.array_equal(matrix_from_json(obj), m)


def test_layout_is_row_major_re_im_pairs():
    obj = matrix_to_json([[1, 2j], [3, 4 - 1j]])
    assert obj == {"n": 2, "entries": [[[1.0, 0.0], [0.0, 2.0]], [[3.0, 0.0], [4.0, -1.0]]]}


@pytest.mark.parametrize("bad", [
    {"n": 2, "entries": [[[1, 0], [0, 0]]]},
    {"n": 2, "entries": [[[1, 0]], [[0, 0]]]},
    {"n": 1, "entries": [[[float("nan"), 0]]]},
    {"n": 1, "entries": [[[float("inf"), 0]]]},
    {"n": 1, "entries": [[[1, 0, 0]]]},
    {"n": 1, "entries": [[["1", 0]]]},
    {"n": 0, "entries": []},
    {"n": True, "entries": [[[1, 0]]]},
    {"entries": [[[1, 0]]]},
    [[1, 0]],
])
def test_parser_rejects(bad):
    with pytest.raises(MatrixValueError):
        matrix_from_json(bad)


def test_nonfinite_input_text_rejected(tmp_path):
    path = tmp_path / "m.json"
    path.write_text('{"A": {"n": 1, "entries": [[[NaN, 0]]]}}')
    with pytest.raises(MatrixValueError):
        load_instance(path)


def test_load_instance_and_search_record(tmp_path):
    inst = {"A": matrix_to_json(np.eye(2)), "B": matrix_to_json(2 * np.eye(2))}
    p1 = tmp_path / "inst.json"
    p1.write_text(json.dumps(inst))
    p2 = tmp_path / "rec.json"
    p2.write_text(json.dumps({"trial": 0, "instance": inst}))
    for p in (p1, p2):
        got = load_instance(p)
        assert set(got) == {"A", "B"}
        assert np.array_equal(got["B"], 2 * np.eye(2))


def test_dumps_line_sanitizes():
    line = dumps_line({"a": float("inf"), "b": np.float64(1.5), "c": np.bool_(True), "d": [np.int64(3)]})
    assert json.loads(line) == {"a": None, "b": 1.5, "c": True, "d": [3]}
