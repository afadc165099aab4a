# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the encoder's hot kernels.

Same contracts as warnsift.kernels.pure; fused single-pass loops avoid the
temporaries the numpy versions allocate.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()

NAME = "native"


def softmax_masked(double[:, ::1] scores, const unsigned char[:, ::1] keep):
    cdef Py_ssize_t rows = scores.shape[0]
    cdef Py_ssize_t cols = scores.shape[1]
    out_arr = np.zeros((rows, cols), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double m, total
    cdef bint any_kept
    for i in range(rows):
        any_kept = False
        m = 0.0
        for j in range(cols):
            if keep[i, j]:
                if not any_kept or scores[i, j] > m:
                    m = scores[i, j]
                any_kept = True
        if not any_kept:
            from ..errors import AllMaskedRow
            raise AllMaskedRow("softmax row with every key position masked")
        total = 0.0
        for j in range(cols):
            if keep[i, j]:
                out[i, j] = exp(scores[i, j] - m)
                total += out[i, j]
        for j in range(cols):
            if keep[i, j]:
                out[i, j] /= total
    return out_arr


def softmax_masked_backward(double[:, ::1] probs, double[:, ::1] grad):
    cdef Py_ssize_t rows = probs.shape[0]
    cdef Py_ssize_t cols = probs.shape[1]
    out_arr = np.empty((rows, cols), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double inner
    for i in range(rows):
        inner = 0.0
        for j in range(cols):
            inner += probs[i, j] * grad[i, j]
        for j in range(cols):
            out[i, j] = probs[i, j] * (grad[i, j] - inner)
    return out_arr


def layer_norm(double[:, ::1] x, double eps):
    cdef Py_ssize_t rows = x.shape[0]
    cdef Py_ssize_t cols = x.shape[1]
    xhat_arr = np.empty((rows, cols), dtype=np.float64)
    rstd_arr = np.empty(rows, dtype=np.float64)
    cdef double[:, ::1] xhat = xhat_arr
    cdef double[::1] rstd = rstd_arr
    cdef Py_ssize_t i, j
    cdef double mean, var, diff, r
    for i in range(rows):
        mean = 0.0
        for j in range(cols):
            mean += x[i, j]
        mean /= cols
        var = 0.0
        for j in range(cols):
            diff = x[i, j] - mean
            var += diff * diff
        var /= cols
        r = 1.0 / sqrt(var + eps)
        rstd[i] = r
        for j in range(cols):
            xhat[i, j] = (x[i, j] - mean) * r
    return xhat_arr, rstd_arr


def layer_norm_backward(double[:, ::1] xhat, double[::1] rstd, double[:, ::1] grad):
    cdef Py_ssize_t rows = xhat.shape[0]
    cdef Py_ssize_t cols = xhat.shape[1]
    out_arr = np.empty((rows, cols), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double g_mean, gx_mean
    for i in range(rows):
        g_mean = 0.0
        gx_mean = 0.0
        for j in range(cols):
            g_mean += grad[i, j]
            gx_mean += grad[i, j] * xhat[i, j]
        g_mean /= cols
        gx_mean /= cols
        for j in range(cols):
            out[i, j] = rstd[i] * (grad[i, j] - g_mean - xhat[i, j] * gx_mean)
    return out_arr
