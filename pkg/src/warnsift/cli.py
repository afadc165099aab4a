"""Command-line surface tying the pipeline together.

Exit codes: 0 success, 1 usage error, 2 parse error, 3 data/format error.
"""

import argparse
import json
import os
import sys

from . import archive, corpusio, crossval, model, retrieval, stats
from .errors import LexError, ParseError, WarnsiftError
from .gencorpus import TEMPLATES, GenSpec, generate, write_corpus
from .paths import PathBudget
from .pipeline import extract_corpus
from .vocab import DEFAULT_VOCAB

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_DATA = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _data_error(message):
    sys.stderr.write(f"error: {message}\n")
    return EXIT_DATA


def _add_model_flags(sub):
    sub.add_argument("--layers", type=int, default=2)
    sub.add_argument("--d-model", type=int, default=64)
    sub.add_argument("--heads", type=int, default=4)
    sub.add_argument("--d-ff", type=int, default=256)
    sub.add_argument("--lr", type=float, default=1e-3)
    sub.add_argument("--epochs", type=int, default=15)
    sub.add_argument("--patience", type=int, default=5)
    sub.add_argument("--batch-size", type=int, default=16)
    sub.add_argument("--val-fraction", type=float, default=0.20)
    sub.add_argument("--max-len", type=int, default=512)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--truncate", choices=("head", "tail"), default="head",
                     help="end of an over-long sequence to keep")


def _hyperparams(args):
    return model.Hyperparams(
        num_layers=args.layers, d_model=args.d_model, num_heads=args.heads,
        d_ff=args.d_ff, max_len=args.max_len, batch_size=args.batch_size,
        learning_rate=args.lr, max_epochs=args.epochs, patience=args.patience,
        val_fraction=args.val_fraction, seed=args.seed)


def build_parser():
    parser = _Parser(prog="warnsift",
                     description="Classify static-analysis warnings from "
                                 "control-flow-path token sequences.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="turn warnings + sources into token instances")
    p.add_argument("--sources", required=True, help="directory of C source files")
    p.add_argument("--warnings", required=True, help="warning reports (JSONL)")
    p.add_argument("-o", "--output", required=True, help="instance corpus (JSONL)")
    p.add_argument("--errors", help="sidecar for unresolvable warnings "
                                    "(default: OUTPUT.errors.jsonl)")
    p.add_argument("--project", default=None,
                   help="project name stamped into instances (default: sources dir name)")
    p.add_argument("--max-back-edges", type=int, default=1)
    p.add_argument("--max-paths", type=int, default=1)
    p.add_argument("--emit-cfg", metavar="DIR",
                   help="write per-function CFGs as DOT files")

    p = sub.add_parser("select", help="build a training set by BM25 instance selection")
    p.add_argument("--source", required=True, help="labeled source corpus (JSONL)")
    p.add_argument("--target", required=True, help="target corpus (JSONL)")
    p.add_argument("-n", type=int, default=10, help="instances kept per target")
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("train", help="train the encoder classifier")
    p.add_argument("corpus", help="labeled training corpus (JSONL)")
    p.add_argument("-o", "--output", required=True, help="model archive path")
    p.add_argument("--log", help="training log (default: OUTPUT.log)")
    _add_model_flags(p)

    p = sub.add_parser("identify", help="classify instances with a trained model")
    p.add_argument("model", help="model archive")
    p.add_argument("target", help="instance corpus (JSONL)")
    p.add_argument("-o", "--output", required=True, help="predictions (JSONL)")
    p.add_argument("--truncate", choices=("head", "tail"), default="head")

    p = sub.add_parser("evaluate", help="score predictions against labels")
    p.add_argument("predictions", help="predictions (JSONL)")
    p.add_argument("labeled", help="labeled instance corpus (JSONL)")

    p = sub.add_parser("stats", help="compare two result tables")
    p.add_argument("table_a", help="results CSV (method,target_project,repeat,precision,recall)")
    p.add_argument("table_b", help="results CSV for the other method")

    p = sub.add_parser("crossval", help="repeated two-fold cross-validation")
    p.add_argument("corpus", help="labeled corpus (JSONL)")
    p.add_argument("-o", "--output", required=True, help="results CSV")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--method", default="encoder", help="method column value")
    p.add_argument("--project", default=None,
                   help="target_project column value (default: from instances)")
    _add_model_flags(p)

    p = sub.add_parser("gen-corpus", help="generate a labeled synthetic corpus")
    p.add_argument("--pairs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--templates", default=",".join(TEMPLATES),
                   help="comma-separated template names")
    p.add_argument("-o", "--output", required=True, help="output directory")

    return parser


def cmd_extract(args):
    warnings = corpusio.read_warnings(args.warnings)
    budget = PathBudget(max_back_edge_uses=args.max_back_edges,
                        max_paths=args.max_paths)
    project = args.project
    if project is None:
        project = os.path.basename(os.path.normpath(args.sources))
    result = extract_corpus(args.sources, warnings, budget, project,
                            want_dot=bool(args.emit_cfg))
    errors_path = args.errors or args.output + ".errors.jsonl"
    with open(errors_path, "w", encoding="utf-8") as fh:
        for err in result.errors:
            fh.write(json.dumps(err) + "\n")
    if args.emit_cfg:
        os.makedirs(args.emit_cfg, exist_ok=True)
        for (filename, function), dot in sorted(result.dot_graphs.items()):
            stem = os.path.splitext(os.path.basename(filename))[0]
            with open(os.path.join(args.emit_cfg, f"{stem}.{function}.dot"),
                      "w", encoding="utf-8") as fh:
                fh.write(dot + "\n")
    if not result.instances:
        parse_failures = [e for e in result.errors
                          if e["error"] in (LexError.__name__, ParseError.__name__)]
        if result.errors and len(parse_failures) == len(result.errors):
            sys.stderr.write("error: no instances extracted: every source failed to parse\n")
            return EXIT_PARSE
        return _data_error("no instances extracted")
    corpusio.write_instances(args.output, result.instances)
    for err in result.errors:
        sys.stderr.write(f"warning: {err['id']}: {err['error']}: {err['message']}\n")
    return EXIT_OK


def cmd_select(args):
    source = corpusio.read_instances(args.source)
    target = corpusio.read_instances(args.target)
    if not source:
        return _data_error("source corpus is empty")
    if any(seq.label not in (0, 1) for seq in source):
        return _data_error("source corpus contains unlabeled instances")
    params = retrieval.Bm25Params(k1=args.k1, b=args.b)
    corpus_stats = retrieval.corpus_stats(source)
    training = retrieval.build_training_set(target, source, corpus_stats, params, args.n)
    corpusio.write_instances(args.output, training)
    return EXIT_OK


def cmd_train(args):
    corpus = corpusio.read_instances(args.corpus)
    hp = _hyperparams(args)
    params, log = model.train(corpus, hp, DEFAULT_VOCAB, truncate=args.truncate)
    archive.save_model(args.output, params, hp, DEFAULT_VOCAB)
    log_path = args.log or args.output + ".log"
    with open(log_path, "w", encoding="utf-8") as fh:
        for entry in log:
            fh.write(json.dumps({
                "epoch": entry.epoch,
                "train_loss": entry.train_loss,
                "val_accuracy": entry.val_accuracy,
                "improved": entry.improved,
            }) + "\n")
    best = max(log, key=lambda e: e.val_accuracy)
    print(f"trained {len(log)} epochs; best validation accuracy "
          f"{best.val_accuracy:.4f} at epoch {best.epoch}")
    return EXIT_OK


def cmd_identify(args):
    params, hp, _ = archive.load_model(args.model, expected_vocab=DEFAULT_VOCAB)
    target = corpusio.read_instances(args.target)
    predictions = model.predict(target, params, hp, DEFAULT_VOCAB,
                                truncate=args.truncate)
    predictions.sort(key=lambda p: p.instance_id)
    corpusio.write_predictions(args.output, predictions)
    return EXIT_OK


def cmd_evaluate(args):
    predictions = corpusio.read_predictions(args.predictions)
    labeled = corpusio.read_instances(args.labeled)
    label_by_id = {seq.instance_id: seq.label for seq in labeled}
    if None in label_by_id.values():
        return _data_error("labeled corpus contains unlabeled instances")
    pred_ids = {p["id"] for p in predictions}
    if pred_ids != set(label_by_id):
        return _data_error("prediction and label ids do not match")
    ordered = sorted(predictions, key=lambda p: p["id"])
    pred_labels = [p["label"] for p in ordered]
    true_labels = [label_by_id[p["id"]] for p in ordered]
    cm = stats.confusion(pred_labels, true_labels)
    print(f"instances: {cm.total}")
    print(f"confusion: buggy->buggy {cm.n_bb}, buggy->clean {cm.n_bc}, "
          f"clean->buggy {cm.n_cb}, clean->clean {cm.n_cc}")
    print(f"precision (clean): {stats.precision(cm):.4f}")
    print(f"recall (clean): {stats.recall(cm):.4f}")
    return EXIT_OK


def _single_method(rows, path):
    methods = {row["method"] for row in rows}
    if len(methods) != 1:
        raise corpusio.FormatError(f"{path}: expected exactly one method, got {sorted(methods)}")
    return methods.pop()


def cmd_stats(args):
    rows_a = corpusio.read_results_csv(args.table_a)
    rows_b = corpusio.read_results_csv(args.table_b)
    if not rows_a or not rows_b:
        return _data_error("results tables must be non-empty")
    name_a = _single_method(rows_a, args.table_a)
    name_b = _single_method(rows_b, args.table_b)
    key = lambda row: (row["target_project"], row["repeat"])
    rows_a.sort(key=key)
    rows_b.sort(key=key)
    if [key(r) for r in rows_a] != [key(r) for r in rows_b]:
        return _data_error("tables do not pair up on (target_project, repeat)")
    for metric in ("precision", "recall"):
        a = [r[metric] for r in rows_a]
        b = [r[metric] for r in rows_b]
        result = stats.compare(a, b)
        print(f"{metric}: p-value {result.p_value:.6g}, "
              f"d {result.d:+.3f} ({result.category})")
        ranking = stats.scott_knott_esd({name_a: a, name_b: b})
        groups = " > ".join("{" + ", ".join(g) + "}" for g in ranking.groups)
        print(f"{metric} ranking: {groups}")
    return EXIT_OK


def cmd_crossval(args):
    corpus = corpusio.read_instances(args.corpus)
    hp = _hyperparams(args)
    reports = crossval.cross_validate(corpus, hp, DEFAULT_VOCAB,
                                      repeats=args.repeats, seed=args.seed,
                                      truncate=args.truncate)
    project = args.project
    if project is None:
        names = {seq.project for seq in corpus if seq.project}
        project = names.pop() if len(names) == 1 else "corpus"
    rows = [{
        "method": args.method, "target_project": project, "repeat": r.repeat,
        "precision": repr(r.precision), "recall": repr(r.recall),
    } for r in reports]
    corpusio.write_results_csv(args.output, rows)
    print(f"wrote {len(rows)} rows to {args.output}")
    return EXIT_OK


def cmd_gen_corpus(args):
    templates = tuple(t for t in args.templates.split(",") if t)
    spec = GenSpec(pair_count=args.pairs, seed=args.seed, templates=templates)
    corpus = generate(spec)
    write_corpus(corpus, args.output)
    print(f"wrote {len(corpus.files)} files and {len(corpus.warnings)} warnings "
          f"to {args.output}")
    return EXIT_OK


_COMMANDS = {
    "extract": cmd_extract,
    "select": cmd_select,
    "train": cmd_train,
    "identify": cmd_identify,
    "evaluate": cmd_evaluate,
    "stats": cmd_stats,
    "crossval": cmd_crossval,
    "gen-corpus": cmd_gen_corpus,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except corpusio.FormatError as exc:
        return _data_error(str(exc))
    except (ValueError, OSError) as exc:
        return _data_error(str(exc))
    except WarnsiftError as exc:
        return _data_error(f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
