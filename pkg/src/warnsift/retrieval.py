"""Okapi BM25 scoring and majority-vote instance selection.

Scores use the non-negative IDF variant ln((N - df + 0.5)/(df + 0.5) + 1),
and a query token occurring several times contributes one sum term per
occurrence. For each target instance the majority label of the top-(2n+1)
ranked source instances picks the class, then the top n source instances
of that class become training data.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

from .errors import EmptyCorpus


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.k1 <= 0:
            raise ValueError("k1 must be positive")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")


@dataclass
class CorpusStats:
    doc_count: int
    doc_freq: dict
    avg_len: float

    def idf(self, token):
        df = self.doc_freq.get(token, 0)
        return math.log((self.doc_count - df + 0.5) / (df + 0.5) + 1.0)


@dataclass(frozen=True)
class ScoredCandidate:
    source_instance_id: str
    score: float
    label: int


@dataclass
class SelectionResult:
    target_id: str
    majority_label: int
    chosen: list = field(default_factory=list)  # source instance ids


def corpus_stats(corpus):
    """Document count, per-token document frequencies and mean length."""
    if not corpus:
        raise EmptyCorpus("cannot build statistics over an empty corpus")
    doc_freq = Counter()
    total = 0
    for seq in corpus:
        total += len(seq.tokens)
        doc_freq.update(set(seq.tokens))
    return CorpusStats(len(corpus), dict(doc_freq), total / len(corpus))


def bm25_score(query, doc, stats, params=Bm25Params()):
    """Relevance of ``doc`` to ``query``, summed over query tokens with
    multiplicity."""
    tf = Counter(doc.tokens)
    norm = params.k1 * (1.0 - params.b + params.b * len(doc.tokens) / stats.avg_len)
    score = 0.0
    for token in query.tokens:
        f = tf.get(token, 0)
        if f == 0:
            continue
        score += stats.idf(token) * f * (params.k1 + 1.0) / (f + norm)
    return score


def rank_candidates(target, source_corpus, stats, params=Bm25Params()):
    """All source instances scored against ``target``, best first; ties
    break by ascending instance id."""
    scored = [
        ScoredCandidate(seq.instance_id, bm25_score(target, seq, stats, params), seq.label)
        for seq in source_corpus
    ]
    scored.sort(key=lambda c: (-c.score, c.source_instance_id))
    return scored


def select_instances(target, source_corpus, stats, params=Bm25Params(), n=10):
    """Majority-label top-n selection from the BM25 ranking.

    The vote window is the top min(2n+1, corpus size) candidates; a tied
    vote resolves to the clean label (0).
    """
    if not source_corpus:
        raise EmptyCorpus("cannot select instances from an empty source corpus")
    if n < 1:
        raise ValueError("n must be >= 1")
    for seq in source_corpus:
        if seq.label not in (0, 1):
            raise ValueError(f"source instance {seq.instance_id!r} is unlabeled")
    ranked = rank_candidates(target, source_corpus, stats, params)
    window = ranked[:min(2 * n + 1, len(ranked))]
    votes = Counter(c.label for c in window)
    majority = 1 if votes[1] > votes[0] else 0
    chosen = [c.source_instance_id for c in ranked if c.label == majority][:n]
    return SelectionResult(target.instance_id, majority, chosen)


def build_training_set(target_corpus, source_corpus, stats, params=Bm25Params(), n=10):
    """Union of per-target selections, deduplicated by source id, in first
    selection order."""
    by_id = {seq.instance_id: seq for seq in source_corpus}
    picked = []
    seen = set()
    for target in target_corpus:
        result = select_instances(target, source_corpus, stats, params, n)
        for source_id in result.chosen:
            if source_id not in seen:
                seen.add(source_id)
                picked.append(by_id[source_id])
    return picked
