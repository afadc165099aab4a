"""Deterministic generator of labeled null-dereference warning pairs.

Every pair is a bad/good function couple that differs only in the
predicate operator at the warning line: the bad member evaluates both
sides with bitwise `&` (label 1), the good member short-circuits with
`&&` (label 0). Templates vary declarations, influence chains and
distractor statements; names, constants and statement order are seeded,
so identical seeds reproduce identical bytes.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from .corpusio import WarningReport, write_warnings

TEMPLATES = ("null_deref", "decl_shuffle", "distractor")

_STRUCT_NAMES = ("pairRecord", "itemRecord", "nodeRecord", "dataRecord",
                 "boxRecord", "slotRecord")
_POINTER_NAMES = ("ptr", "node", "item", "rec", "entry", "box", "cur", "obj")
_MEMBER_NAMES = ("intOne", "value", "count", "size", "left", "weight")
_INT_NAMES = ("limit", "total", "steps", "acc", "idx", "tally")
_CALL_NAMES = ("println", "logMessage", "reportValue", "printValue")
_CHAR_VALUES = ("a", "k", "q", "y", "z")


@dataclass(frozen=True)
class GenSpec:
    pair_count: int
    seed: int = 0
    templates: tuple = TEMPLATES

    def __post_init__(self):
        if self.pair_count < 1:
            raise ValueError("pair_count must be >= 1")
        unknown = set(self.templates) - set(TEMPLATES)
        if unknown:
            raise ValueError(f"unknown templates: {sorted(unknown)}")


@dataclass
class GeneratedCorpus:
    files: list = field(default_factory=list)  # (filename, text)
    warnings: list = field(default_factory=list)


def _pick(rng, pool, count=1):
    idx = rng.permutation(len(pool))[:count]
    picked = [pool[int(i)] for i in idx]
    return picked[0] if count == 1 else picked


def _interleave(rng, first, second):
    """Seeded merge of two statement lists preserving each list's order."""
    merged = []
    i = j = 0
    while i < len(first) or j < len(second):
        if i == len(first):
            merged.append(second[j]); j += 1
        elif j == len(second):
            merged.append(first[i]); i += 1
        elif int(rng.integers(2)) == 0:
            merged.append(first[i]); i += 1
        else:
            merged.append(second[j]); j += 1
    return merged


def _template_body(rng, template):
    """Statement lines before the predicate, the predicate pieces, and the
    call line for one function body."""
    struct = _pick(rng, _STRUCT_NAMES)
    member = _pick(rng, _MEMBER_NAMES)
    call = _pick(rng, _CALL_NAMES)
    threshold = int(rng.integers(1, 10))
    if template == "null_deref":
        ip = _pick(rng, _POINTER_NAMES)
        setup = [f"{struct} *{ip} = NULL;"]
    elif template == "decl_shuffle":
        ip = _pick(rng, _POINTER_NAMES)
        n1 = _pick(rng, _INT_NAMES)
        ch = _pick(rng, _CHAR_VALUES)
        decls = [
            f"int {n1} = {int(rng.integers(1, 10))};",
            f"char {n1}_mark = '{ch}';",
            f"{struct} *{ip} = NULL;",
        ]
        order = rng.permutation(3)
        setup = [decls[int(i)] for i in order]
    elif template == "distractor":
        source, ip = _pick(rng, _POINTER_NAMES, 2)
        n1 = _pick(rng, _INT_NAMES)
        chain = [
            f"{struct} *{source} = NULL;",
            f"{struct} *{ip} = {source};",
        ]
        noise = [
            f"int {n1} = 0;",
            f"{n1} = {n1} + {int(rng.integers(1, 10))};",
        ]
        setup = _interleave(rng, chain, noise)
    else:
        raise ValueError(f"unknown template {template!r}")
    predicate = (f"({ip} != NULL)", f"({ip}->{member} == {threshold})")
    call_line = f'{call}("{member} == {threshold}");'
    return setup, predicate, call_line, ip


def _emit_function(lines, name, setup, predicate, op, call_line):
    """Append one function; returns the 1-based line of its if-statement."""
    lines.append(f"void {name}(void)")
    lines.append("{")
    for stmt in setup:
        lines.append(f"    {stmt}")
    lines.append(f"    if ({predicate[0]} {op} {predicate[1]})")
    warning_line = len(lines)
    lines.append(f"        {call_line}")
    lines.append("}")
    return warning_line


def generate(spec):
    """Generate ``spec.pair_count`` bad/good pairs, one file per pair."""
    rng = np.random.default_rng(spec.seed)
    corpus = GeneratedCorpus()
    for i in range(spec.pair_count):
        template = spec.templates[i % len(spec.templates)]
        setup, predicate, call_line, ip = _template_body(rng, template)
        filename = f"pair_{i:05d}.c"
        lines = []
        bad_name = f"check_{i:05d}_bad"
        good_name = f"check_{i:05d}_good"
        bad_line = _emit_function(lines, bad_name, setup, predicate, "&", call_line)
        lines.append("")
        good_line = _emit_function(lines, good_name, setup, predicate, "&&", call_line)
        corpus.files.append((filename, "\n".join(lines) + "\n"))
        corpus.warnings.append(WarningReport(
            file=filename, function=bad_name, line=bad_line,
            variable=ip, label=1, id=f"w{i:05d}b"))
        corpus.warnings.append(WarningReport(
            file=filename, function=good_name, line=good_line,
            variable=ip, label=0, id=f"w{i:05d}g"))
    return corpus


def write_corpus(corpus, out_dir):
    """Write sources and warnings.jsonl under ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    for filename, text in corpus.files:
        with open(os.path.join(out_dir, filename), "w", encoding="utf-8") as fh:
            fh.write(text)
    write_warnings(os.path.join(out_dir, "warnings.jsonl"), corpus.warnings)
