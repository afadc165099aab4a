"""File formats: warning reports, instance corpora, predictions, tables.

Warning reports and instance corpora are JSON Lines; result tables are
CSV with a fixed header. Readers validate eagerly so the CLI can map
failures to its data-error exit code.
"""

import csv
import json
from dataclasses import dataclass

from .abstraction import TokenSequence


class FormatError(ValueError):
    """A line or row does not match the documented schema."""


@dataclass(frozen=True)
class WarningReport:
    file: str
    function: str
    line: int
    variable: str
    label: int  # 1 = true defect, 0 = false positive, None = unlabeled
    id: str


def _load_jsonl(path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                yield lineno, json.loads(raw)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: not valid JSON ({exc})") from None


def read_warnings(path):
    reports = []
    for lineno, obj in _load_jsonl(path):
        try:
            label = obj.get("label")
            if label is not None:
                label = int(label)
                if label not in (0, 1):
                    raise ValueError
            reports.append(WarningReport(
                file=str(obj["file"]), function=str(obj["function"]),
                line=int(obj["line"]), variable=str(obj["variable"]),
                label=label, id=str(obj["id"])))
        except (KeyError, TypeError, ValueError):
            raise FormatError(f"{path}:{lineno}: bad warning record") from None
    return reports


def write_warnings(path, reports):
    with open(path, "w", encoding="utf-8") as fh:
        for r in reports:
            fh.write(json.dumps({
                "file": r.file, "function": r.function, "line": r.line,
                "variable": r.variable, "label": r.label, "id": r.id,
            }) + "\n")


def read_instances(path):
    instances = []
    for lineno, obj in _load_jsonl(path):
        try:
            label = obj.get("label")
            if label is not None:
                label = int(label)
                if label not in (0, 1):
                    raise ValueError
            tokens = [str(t) for t in obj["tokens"]]
            instances.append(TokenSequence(
                instance_id=str(obj["id"]), tokens=tokens, label=label,
                project=str(obj.get("project", ""))))
        except (KeyError, TypeError, ValueError):
            raise FormatError(f"{path}:{lineno}: bad instance record") from None
    return instances


def write_instances(path, instances):
    with open(path, "w", encoding="utf-8") as fh:
        for seq in instances:
            fh.write(json.dumps({
                "id": seq.instance_id, "project": seq.project,
                "label": seq.label, "tokens": list(seq.tokens),
            }) + "\n")


def write_predictions(path, predictions):
    with open(path, "w", encoding="utf-8") as fh:
        for p in predictions:
            fh.write(json.dumps({
                "id": p.instance_id,
                "p_clean": p.p_clean, "p_buggy": p.p_buggy, "label": p.label,
            }) + "\n")


def read_predictions(path):
    rows = []
    for lineno, obj in _load_jsonl(path):
        try:
            rows.append({
                "id": str(obj["id"]),
                "p_clean": float(obj["p_clean"]),
                "p_buggy": float(obj["p_buggy"]),
                "label": int(obj["label"]),
            })
        except (KeyError, TypeError, ValueError):
            raise FormatError(f"{path}:{lineno}: bad prediction record") from None
    return rows


RESULTS_COLUMNS = ("method", "target_project", "repeat", "precision", "recall")


def write_results_csv(path, rows):
    """Rows are dicts with the RESULTS_COLUMNS keys."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULTS_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in RESULTS_COLUMNS})


def read_results_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != RESULTS_COLUMNS:
            raise FormatError(
                f"{path}: expected columns {','.join(RESULTS_COLUMNS)}")
        rows = []
        for i, row in enumerate(reader, start=2):
            try:
                rows.append({
                    "method": row["method"],
                    "target_project": row["target_project"],
                    "repeat": int(row["repeat"]),
                    "precision": float(row["precision"]),
                    "recall": float(row["recall"]),
                })
            except (TypeError, ValueError):
                raise FormatError(f"{path}:{i}: bad results row") from None
        return rows
