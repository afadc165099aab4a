"""warnsift: triage static-analysis warnings on C code.

The pipeline parses a C subset, builds per-function control flow graphs,
generates an entry-to-warning execution path, abstracts the relevant path
nodes into a closed token vocabulary, selects cross-project training
instances by BM25 relevance, and classifies warnings with a small
Transformer encoder trained from scratch. A statistics toolkit (clean-class
precision/recall, Wilcoxon signed-rank, Cohen's d, Scott-Knott ESD,
repeated two-fold cross-validation) supports evaluation.
"""

__version__ = "0.1.0"

from .abstraction import InputSequence, TokenSequence, abstract_tokens, select_nodes, to_model_input
from .cfg import ControlFlowGraph, build_cfg, def_use_influences
from .cparser import IpAnchor, locate_ip, parse_source
from .lexer import lex
from .model import Hyperparams, Prediction, forward, train
from .paths import ExecutionPath, PathBudget, enumerate_paths, generate_path
from .retrieval import Bm25Params, bm25_score, build_training_set, corpus_stats, select_instances
from .vocab import DEFAULT_VOCAB, Vocabulary

__all__ = [
    "Bm25Params", "ControlFlowGraph", "DEFAULT_VOCAB", "ExecutionPath",
    "Hyperparams", "InputSequence", "IpAnchor", "PathBudget", "Prediction",
    "TokenSequence", "Vocabulary", "abstract_tokens", "bm25_score",
    "build_cfg", "build_training_set", "corpus_stats", "def_use_influences",
    "enumerate_paths", "forward", "generate_path", "lex", "locate_ip",
    "parse_source", "select_instances", "select_nodes", "to_model_input",
    "train",
]
