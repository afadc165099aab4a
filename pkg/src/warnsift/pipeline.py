"""Warning-to-instance extraction: parse, anchor, path, select, abstract."""

import os
from dataclasses import dataclass, field

from .abstraction import abstract_tokens, select_nodes
from .cfg import build_cfg, def_use_influences
from .cparser import locate_ip, parse_source
from .errors import AnchorNotFound, WarnsiftError
from .paths import PathBudget, generate_path


@dataclass
class ExtractionResult:
    instances: list = field(default_factory=list)
    errors: list = field(default_factory=list)  # dicts for the sidecar file
    dot_graphs: dict = field(default_factory=dict)  # (file, function) -> DOT text


class _SourceCache:
    def __init__(self, sources_dir):
        self.sources_dir = sources_dir
        self.trees = {}
        self.cfgs = {}

    def tree(self, filename):
        if filename not in self.trees:
            path = os.path.join(self.sources_dir, filename)
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
            self.trees[filename] = parse_source(text, filename)
        return self.trees[filename]

    def cfg(self, filename, function_node):
        key = (filename, function_node.name)
        if key not in self.cfgs:
            self.cfgs[key] = build_cfg(function_node)
        return self.cfgs[key]


def extract_one(cache, warning, budget, project=""):
    """TokenSequence for a single warning report."""
    tree = cache.tree(warning.file)
    anchor = locate_ip(tree, warning)
    function = tree.function_named(warning.function)
    cfg = cache.cfg(warning.file, function)
    target = cfg.node_for_ast(anchor.node)
    if target is None:
        raise AnchorNotFound(
            f"anchored statement at line {warning.line} has no flow node")
    path = generate_path(cfg, target.id, budget)
    influences = def_use_influences(cfg, path, anchor)
    nodes = select_nodes(path, influences, anchor)
    seq = abstract_tokens(nodes, anchor, tree,
                          instance_id=warning.id, label=warning.label)
    seq.project = project
    return seq, cfg


def extract_corpus(sources_dir, warnings, budget=PathBudget(), project="",
                   want_dot=False):
    """Extract every resolvable warning; failures land in the error list.

    Instances and errors are sorted by warning id so output files are
    stable regardless of input order.
    """
    cache = _SourceCache(sources_dir)
    result = ExtractionResult()
    for warning in warnings:
        try:
            seq, cfg = extract_one(cache, warning, budget, project)
        except (WarnsiftError, OSError, UnicodeDecodeError, RecursionError) as exc:
            result.errors.append({
                "id": warning.id,
                "error": type(exc).__name__,
                "message": str(exc),
                "file": warning.file,
                "line": warning.line,
            })
            continue
        result.instances.append(seq)
        if want_dot:
            result.dot_graphs[(warning.file, warning.function)] = cfg.to_dot()
    result.instances.sort(key=lambda seq: seq.instance_id)
    result.errors.sort(key=lambda e: e["id"])
    return result
