"""Evaluation metrics and the nonparametric comparison toolkit.

Precision/recall score the clean (false-positive) class. The Wilcoxon
signed-rank test is exact up to 25 non-zero differences, computed from the
sign-assignment distribution; larger samples use the tie-corrected normal
approximation with continuity correction. Effect sizes use Cohen's d with
the usual negligible/small/medium/large bands, and Scott-Knott ESD ranks
methods by recursive mean splitting gated on a non-negligible effect.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import LengthMismatch, ZeroVariance

EXACT_WILCOXON_LIMIT = 25

EFFECT_NEGLIGIBLE = "N"
EFFECT_SMALL = "S"
EFFECT_MEDIUM = "M"
EFFECT_LARGE = "L"


@dataclass(frozen=True)
class ConfusionMatrix:
    n_bb: int = 0  # buggy predicted buggy
    n_bc: int = 0  # buggy predicted clean
    n_cb: int = 0  # clean predicted buggy
    n_cc: int = 0  # clean predicted clean

    @property
    def total(self):
        return self.n_bb + self.n_bc + self.n_cb + self.n_cc


@dataclass(frozen=True)
class MetricReport:
    precision: float
    recall: float
    n_clean: int
    n_buggy: int


@dataclass(frozen=True)
class TestResult:
    p_value: float
    d: float
    category: str


def confusion(predictions, labels):
    """Counts of predicted-vs-true labels (1 = buggy, 0 = clean)."""
    if len(predictions) != len(labels):
        raise LengthMismatch(
            f"{len(predictions)} predictions vs {len(labels)} labels")
    counts = {"bb": 0, "bc": 0, "cb": 0, "cc": 0}
    for pred, true in zip(predictions, labels):
        key = ("b" if true == 1 else "c") + ("b" if pred == 1 else "c")
        counts[key] += 1
    return ConfusionMatrix(counts["bb"], counts["bc"], counts["cb"], counts["cc"])


def precision(cm):
    """Clean-class precision; 0 on an empty denominator."""
    denom = cm.n_cc + cm.n_bc
    return cm.n_cc / denom if denom else 0.0


def recall(cm):
    """Clean-class recall; 0 on an empty denominator."""
    denom = cm.n_cc + cm.n_cb
    return cm.n_cc / denom if denom else 0.0


def metric_report(predictions, labels):
    cm = confusion(predictions, labels)
    return MetricReport(precision(cm), recall(cm),
                        cm.n_cc + cm.n_cb, cm.n_bb + cm.n_bc)


def _signed_rank_statistic(a, b):
    """Non-zero differences ranked by absolute value with average ties.

    Returns (ranks, signs); empty when every difference is zero.
    """
    diffs = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    diffs = diffs[diffs != 0.0]
    if diffs.size == 0:
        return np.empty(0), np.empty(0)
    ranks = rankdata(np.abs(diffs))
    return ranks, np.sign(diffs)


def _exact_counts(scaled_ranks):
    """Distribution of the doubled W+ statistic over all sign assignments.

    counts[k] = number of assignments with doubled rank sum k.
    """
    total = int(sum(scaled_ranks))
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    upper = 0
    for s in scaled_ranks:
        upper += s
        counts[s:upper + 1] += counts[0:upper + 1 - s].copy()
    return counts


def wilcoxon_signed_rank(a, b):
    """Two-sided Wilcoxon signed-rank p-value for paired samples."""
    if len(a) != len(b):
        raise LengthMismatch(f"paired samples of length {len(a)} and {len(b)}")
    ranks, signs = _signed_rank_statistic(a, b)
    n = ranks.size
    if n == 0:
        return 1.0
    w_plus = float(ranks[signs > 0].sum())
    if n <= EXACT_WILCOXON_LIMIT:
        # Average ranks are half-integers; doubling keeps everything exact.
        scaled = [int(round(2.0 * r)) for r in ranks]
        counts = _exact_counts(scaled)
        w = int(round(2.0 * w_plus))
        c_le = int(counts[:w + 1].sum())
        c_ge = int(counts[w:].sum())
        return min(1.0, 2.0 * min(c_le, c_ge) / (2 ** n))
    mean = n * (n + 1) / 4.0
    variance = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_sizes = np.unique(ranks, return_counts=True)
    variance -= float(((tie_sizes ** 3 - tie_sizes) / 48.0).sum())
    centered = w_plus - mean
    if centered > 0:
        centered -= 0.5
    elif centered < 0:
        centered += 0.5
    z = centered / math.sqrt(variance)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def effect_category(d):
    """N/S/M/L bands on |d|; the 0.8 boundary belongs to M."""
    magnitude = abs(d)
    if magnitude <= 0.2:
        return EFFECT_NEGLIGIBLE
    if magnitude <= 0.5:
        return EFFECT_SMALL
    if magnitude <= 0.8:
        return EFFECT_MEDIUM
    return EFFECT_LARGE


def cohens_d(a, b):
    """Standardized mean difference with pooled unbiased variances.

    Returns (d, category). Zero pooled variance yields d = 0 when the
    means agree and raises :class:`ZeroVariance` otherwise.
    """
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.size < 2 or y.size < 2:
        raise ValueError("cohens_d needs at least two values per sample")
    pooled = (((x.size - 1) * x.var(ddof=1) + (y.size - 1) * y.var(ddof=1))
              / (x.size + y.size - 2))
    delta = float(x.mean() - y.mean())
    if pooled == 0.0:
        if delta == 0.0:
            return 0.0, EFFECT_NEGLIGIBLE
        raise ZeroVariance("samples are constant but their means differ")
    d = delta / math.sqrt(pooled)
    return d, effect_category(d)


def compare(a, b):
    """Wilcoxon p-value plus effect size for paired metric lists."""
    p = wilcoxon_signed_rank(a, b)
    d, category = cohens_d(a, b)
    return TestResult(p, d, category)


def _effect_magnitude(x, y):
    """|d| variant used inside Scott-Knott: zero variance with different
    means counts as an infinite effect rather than an error."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or y.size < 2:
        return math.inf if x.mean() != y.mean() else 0.0
    pooled = (((x.size - 1) * x.var(ddof=1) + (y.size - 1) * y.var(ddof=1))
              / (x.size + y.size - 2))
    delta = abs(float(x.mean() - y.mean()))
    if pooled == 0.0:
        return math.inf if delta > 0.0 else 0.0
    return delta / math.sqrt(pooled)


@dataclass(frozen=True)
class SkEsdRanking:
    groups: tuple  # tuple of tuples of method names, best mean first

    def rank_of(self, name):
        for rank, group in enumerate(self.groups, start=1):
            if name in group:
                return rank
        raise KeyError(name)


def scott_knott_esd(methods, threshold=0.2):
    """Partition methods into effect-size-distinct groups, best mean first.

    Candidate splits maximize the between-group sum of squares over method
    means; a split is kept only when the effect size between the two
    concatenated halves exceeds ``threshold``.
    """
    if not methods:
        raise ValueError("scott_knott_esd needs at least one method")
    for name, values in methods.items():
        if len(values) < 2:
            raise ValueError(f"method {name!r} needs at least two values")
    means = {name: float(np.mean(vals)) for name, vals in methods.items()}
    ordered = sorted(methods, key=lambda name: (-means[name], name))

    def split(names):
        if len(names) <= 1:
            return [names]
        member_means = np.array([means[n] for n in names])
        best_k, best_ss = None, -1.0
        for k in range(1, len(names)):
            left, right = member_means[:k], member_means[k:]
            grand = member_means.mean()
            ss = (left.size * (left.mean() - grand) ** 2
                  + right.size * (right.mean() - grand) ** 2)
            if ss > best_ss + 1e-15:
                best_k, best_ss = k, ss
        left_values = np.concatenate([np.asarray(methods[n], dtype=np.float64)
                                      for n in names[:best_k]])
        right_values = np.concatenate([np.asarray(methods[n], dtype=np.float64)
                                       for n in names[best_k:]])
        if _effect_magnitude(left_values, right_values) <= threshold:
            return [names]
        return split(names[:best_k]) + split(names[best_k:])

    groups = split(ordered)
    return SkEsdRanking(tuple(tuple(g) for g in groups))
