"""Deterministic serialization of experiment artifacts."""

import json
import math

import pytest

from andlab.artifacts import csv_text, format_cell, json_text, write_result


class TestFormatCell:
    def test_values(self):
        assert format_cell(None) == ""
        assert format_cell(True) == "true"
        assert format_cell(False) == "false"
        assert format_cell(0.1) == "0.1"
        assert format_cell(1.0 / 3.0) == repr(1.0 / 3.0)
        assert format_cell(7) == "7"
        assert format_cell("NS") == "NS"

    def test_float_round_trips(self):
        for value in (0.1, 1e-300, 12345.6789, 2.0**-52):
            assert float(format_cell(value)) == value


class TestCsvText:
    def test_header_layout(self):
        text = csv_text(
            "demo", ["a", "b"], [[1, 0.5], [2, None]], version="0.1.0", config={"k": 1}
        )
        lines = text.splitlines()
        assert lines[0] == "# schema: andlab/demo v1"
        assert lines[1] == "# tool: andlab 0.1.0"
        assert lines[2] == '# config: {"k":1}'
        assert lines[3] == "a,b"
        assert lines[4] == "1,0.5"
        assert lines[5] == "2,"
        assert text.endswith("\n")

    def test_config_keys_sorted(self):
        text = csv_text("demo", ["a"], [], version="0", config={"z": 1, "a": 2})
        config_line = text.splitlines()[2]
        assert config_line == '# config: {"a":2,"z":1}'

    def test_row_width_mismatch(self):
        with pytest.raises(ValueError, match="row width"):
            csv_text("demo", ["a", "b"], [[1]])


class TestJsonText:
    def test_sorted_and_newline_terminated(self):
        text = json_text({"b": 1, "a": [1.5, None, True]})
        assert text == '{\n  "a": [\n    1.5,\n    null,\n    true\n  ],\n  "b": 1\n}\n'

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            json_text({"x": math.nan})


class TestWriteResult:
    def test_writes_requested_formats(self, tmp_path):
        summary = {"version": "0.1.0", "config": {"c": 1}, "value": 2}
        paths = write_result(
            tmp_path, "demo", ["a"], [[1]], summary, {"demo.matrix.mtx": "%%MatrixMarket\n"}
        )
        names = [p.name for p in paths]
        assert names == ["demo.csv", "demo.summary.json", "demo.matrix.mtx"]
        assert json.loads((tmp_path / "demo.summary.json").read_text()) == summary
        assert (tmp_path / "demo.matrix.mtx").read_text() == "%%MatrixMarket\n"

    def test_json_only(self, tmp_path):
        paths = write_result(tmp_path, "demo", ["a"], [[1]], {}, None, formats=("json",))
        assert [p.name for p in paths] == ["demo.summary.json"]
        assert not (tmp_path / "demo.csv").exists()

    def test_creates_directory(self, tmp_path):
        target = tmp_path / "nested" / "dir"
        write_result(target, "demo", ["a"], [[1]], {})
        assert (target / "demo.csv").exists()
