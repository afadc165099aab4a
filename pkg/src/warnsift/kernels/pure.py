"""Numpy implementations of the encoder's hot kernels.

Reference semantics for the compiled backend: masked row softmax and
row-wise layer normalization, forward and backward, all in float64.
"""

import numpy as np

from ..errors import AllMaskedRow

NAME = "pure"


def softmax_masked(scores, keep):
    """Row softmax of ``scores`` with zero mass on positions where ``keep``
    is 0. Raises AllMaskedRow when a row keeps nothing."""
    keep_b = keep.astype(bool, copy=False)
    if not keep_b.any(axis=1).all():
        raise AllMaskedRow("softmax row with every key position masked")
    shifted = np.where(keep_b, scores, -np.inf)
    shifted = shifted - shifted.max(axis=1, keepdims=True)
    weights = np.exp(shifted)
    return weights / weights.sum(axis=1, keepdims=True)


def softmax_masked_backward(probs, grad):
    """Gradient through the masked softmax given its output ``probs``."""
    inner = (probs * grad).sum(axis=1, keepdims=True)
    return probs * (grad - inner)


def layer_norm(x, eps):
    """Normalize each row to mean 0 / variance 1 (epsilon-guarded).

    Returns the normalized rows and the per-row reciprocal standard
    deviation needed by the backward pass.
    """
    mean = x.mean(axis=1, keepdims=True)
    centered = x - mean
    var = (centered * centered).mean(axis=1)
    rstd = 1.0 / np.sqrt(var + eps)
    return centered * rstd[:, None], rstd


def layer_norm_backward(xhat, rstd, grad):
    """Gradient through layer_norm given its normalized output."""
    g_mean = grad.mean(axis=1, keepdims=True)
    gx_mean = (grad * xhat).mean(axis=1, keepdims=True)
    return rstd[:, None] * (grad - g_mean - xhat * gx_mean)
