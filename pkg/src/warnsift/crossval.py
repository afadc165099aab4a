"""Repeated stratified two-fold cross-validation of the classifier."""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateCorpus
from .model import predict, train
from .stats import metric_report


@dataclass(frozen=True)
class FoldReport:
    repeat: int
    fold: int
    precision: float
    recall: float
    n_test: int


def _derived_seed(master_seed, repeat, fold):
    return int(np.random.SeedSequence([master_seed, repeat, fold]).generate_state(1)[0])


def _stratified_halves(corpus, rng):
    by_label = {0: [], 1: []}
    for i, seq in enumerate(corpus):
        if seq.label not in (0, 1):
            raise DegenerateCorpus(f"instance {seq.instance_id!r} is unlabeled")
        by_label[seq.label].append(i)
    if not by_label[0] or not by_label[1]:
        raise DegenerateCorpus("cross-validation needs both classes present")
    if min(len(by_label[0]), len(by_label[1])) < 2:
        raise DegenerateCorpus("need at least two instances of each class")
    fold_a, fold_b = [], []
    for label in (0, 1):
        idx = np.array(by_label[label])
        idx = idx[rng.permutation(len(idx))]
        half = len(idx) // 2
        fold_a.extend(int(i) for i in idx[:half])
        fold_b.extend(int(i) for i in idx[half:])
    return sorted(fold_a), sorted(fold_b)


def cross_validate(corpus, hp, vocab, repeats=10, seed=0, truncate="head"):
    """Per-fold clean-class metric reports, two per repeat.

    Each repeat reshuffles a stratified split from (seed, repeat); the
    training seed for every fold derives from (seed, repeat, fold) so the
    whole table is reproducible.
    """
    reports = []
    for repeat in range(1, repeats + 1):
        rng = np.random.default_rng([seed, repeat])
        fold_a, fold_b = _stratified_halves(corpus, rng)
        for fold, (train_idx, test_idx) in enumerate(
                ((fold_a, fold_b), (fold_b, fold_a)), start=1):
            train_corpus = [corpus[i] for i in train_idx]
            test_corpus = [corpus[i] for i in test_idx]
            hp_fold = replace(hp, seed=_derived_seed(seed, repeat, fold))
            # Folds are halves of whatever corpus arrived; the usual
            # 10-instance floor would reject small but valid inputs.
            params, _ = train(train_corpus, hp_fold, vocab,
                              truncate=truncate, min_instances=2)
            predictions = predict(test_corpus, params, hp_fold, vocab, truncate=truncate)
            labels = [seq.label for seq in test_corpus]
            report = metric_report([p.label for p in predictions], labels)
            reports.append(FoldReport(repeat, fold, report.precision,
                                      report.recall, len(test_corpus)))
    return reports
