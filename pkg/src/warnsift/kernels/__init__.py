"""Kernel backend selection.

The compiled extension is preferred when built; the numpy fallback keeps
the package fully functional from a plain source checkout. Set
WARNSIFT_KERNELS=pure|native to force a backend, or call
:func:`set_backend` (benchmarks and parity tests do).
"""

import os

import numpy as np

from . import pure as _pure

try:
    from . import _native
except ImportError:
    _native = None

_BACKENDS = {"pure": _pure}
if _native is not None:
    _BACKENDS["native"] = _native


def _initial_backend():
    forced = os.environ.get("WARNSIFT_KERNELS")
    if forced:
        if forced not in _BACKENDS:
            raise ImportError(
                f"WARNSIFT_KERNELS={forced!r} but that backend is unavailable "
                f"(have: {sorted(_BACKENDS)})")
        return _BACKENDS[forced]
    return _BACKENDS.get("native", _pure)


_impl = _initial_backend()


def backend_name():
    return _impl.NAME


def available_backends():
    return sorted(_BACKENDS)


def set_backend(name):
    """Switch kernel implementations; returns the previous backend name."""
    global _impl
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r} (have: {sorted(_BACKENDS)})")
    previous = _impl.NAME
    _impl = _BACKENDS[name]
    return previous


def _as_f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def softmax_masked(scores, keep):
    return _impl.softmax_masked(_as_f64(scores), np.ascontiguousarray(keep, dtype=np.uint8))


def softmax_masked_backward(probs, grad):
    return _impl.softmax_masked_backward(_as_f64(probs), _as_f64(grad))


def layer_norm(x, eps):
    return _impl.layer_norm(_as_f64(x), float(eps))


def layer_norm_backward(xhat, rstd, grad):
    return _impl.layer_norm_backward(_as_f64(xhat), _as_f64(rstd), _as_f64(grad))
