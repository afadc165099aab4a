import pytest

from warnsift.abstraction import TokenSequence
from warnsift.corpusio import (FormatError, read_instances, read_results_csv,
                               read_warnings, write_instances,
                               write_results_csv)


def test_warning_roundtrip_fields(tmp_path):
    path = tmp_path / "w.jsonl"
    path.write_text(
        '{"file": "a.c", "function": "f", "line": 4, "variable": "v", '
        '"label": 1, "id": "w1"}\n'
        '{"file": "a.c", "function": "g", "line": 9, "variable": "u", '
        '"label": null, "id": "w2"}\n')
    got = read_warnings(path)
    assert got[0].label == 1 and got[1].label is None
    assert got[1].line == 9


def test_warning_bad_json_raises(tmp_path):
    path = tmp_path / "w.jsonl"
    path.write_text("{not json}\n")
    with pytest.raises(FormatError):
        read_warnings(path)


def test_warning_missing_field_raises(tmp_path):
    path = tmp_path / "w.jsonl"
    path.write_text('{"file": "a.c", "line": 4}\n')
    with pytest.raises(FormatError):
        read_warnings(path)


def test_warning_bad_label_raises(tmp_path):
    path = tmp_path / "w.jsonl"
    path.write_text('{"file": "a.c", "function": "f", "line": 1, '
                    '"variable": "v", "label": 7, "id": "x"}\n')
    with pytest.raises(FormatError):
        read_warnings(path)


def test_instances_roundtrip(tmp_path):
    path = tmp_path / "i.jsonl"
    original = [TokenSequence("a", ["IfSelection", "VariableIP"], 1, "proj"),
                TokenSequence("b", ["Constant"], None, "proj")]
    write_instances(path, original)
    got = read_instances(path)
    assert got == original


def test_instances_skip_blank_lines(tmp_path):
    path = tmp_path / "i.jsonl"
    path.write_text('\n{"id": "a", "project": "p", "label": 0, "tokens": ["Null"]}\n\n')
    assert len(read_instances(path)) == 1


def test_results_csv_roundtrip(tmp_path):
    path = tmp_path / "r.csv"
    rows = [{"method": "m", "target_project": "p", "repeat": 1,
             "precision": 0.25, "recall": 0.75}]
    write_results_csv(path, rows)
    assert read_results_csv(path) == rows


def test_results_csv_header_enforced(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(FormatError):
        read_results_csv(path)


def test_results_csv_bad_cell(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("method,target_project,repeat,precision,recall\n"
                    "m,p,one,0.5,0.5\n")
    with pytest.raises(FormatError):
        read_results_csv(path)
