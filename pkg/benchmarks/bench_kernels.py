#!/usr/bin/env python3
"""Compare the compiled kernel backend against the numpy fallback.

Times the two hot kernels (masked softmax and layer normalization, forward
and backward) on attention-shaped inputs, then a full training step of the
encoder under each backend.

Usage: python3 benchmarks/bench_kernels.py [--repeats 7]
"""

import argparse
import time

import numpy as np

from warnsift import kernels
from warnsift.model import (AdamState, Hyperparams, adam_step, backward_batch,
                            forward_batch, init_parameters,
                            zeros_like_parameters)
from warnsift.vocab import DEFAULT_VOCAB


def best_of(repeats, fn, *args):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases(rng):
    # (rows, cols) shaped like flattened attention scores / hidden rows
    softmax_shape = (16 * 4 * 128, 128)
    ln_shape = (16 * 128, 64)
    scores = rng.normal(size=softmax_shape)
    keep = (rng.uniform(size=softmax_shape) > 0.2).astype(np.uint8)
    keep[:, 0] = 1
    grad = rng.normal(size=softmax_shape)
    x = rng.normal(size=ln_shape)
    gx = rng.normal(size=ln_shape)
    probs = kernels.softmax_masked(scores, keep)
    xhat, rstd = kernels.layer_norm(x, 1e-5)
    return {
        "softmax fwd": (kernels.softmax_masked, scores, keep),
        "softmax bwd": (kernels.softmax_masked_backward, probs, grad),
        "layernorm fwd": (kernels.layer_norm, x, 1e-5),
        "layernorm bwd": (kernels.layer_norm_backward, xhat, rstd, gx),
    }


def training_step_case(rng):
    hp = Hyperparams(num_layers=2, d_model=64, num_heads=4, d_ff=256,
                     max_len=128, batch_size=16, seed=0)
    params = init_parameters(hp, len(DEFAULT_VOCAB), rng)
    state = AdamState(zeros_like_parameters(params), zeros_like_parameters(params))
    ids = rng.integers(0, len(DEFAULT_VOCAB), size=(hp.batch_size, 128))
    mask = np.ones_like(ids, dtype=np.uint8)
    for row in range(hp.batch_size):
        mask[row, int(rng.integers(24, 129)):] = 0
    labels = rng.integers(0, 2, size=hp.batch_size)

    def step():
        probs, cache = forward_batch(ids, mask, params, hp, want_cache=True)
        grads = backward_batch(probs, labels, cache, params, hp)
        adam_step(params, grads, state, hp.learning_rate)

    return step


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "native" not in backends:
        print("native backend not built; benchmarking the pure backend only")

    rows = []
    for name, case in kernel_cases(np.random.default_rng(0)).items():
        fn, *case_args = case
        timings = {}
        for backend in backends:
            kernels.set_backend(backend)
            timings[backend] = best_of(args.repeats, fn, *case_args)
        rows.append((name, timings))

    step_timings = {}
    for backend in backends:
        kernels.set_backend(backend)
        step = training_step_case(np.random.default_rng(1))
        step_timings[backend] = best_of(max(3, args.repeats // 2), step)
    rows.append(("train step (2L/d64/L128/B16)", step_timings))

    width = max(len(name) for name, _ in rows)
    header = f"{'case':<{width}}  " + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, timings in rows:
        line = f"{name:<{width}}  " + "".join(
            f"{timings[b] * 1e3:>10.2f}ms" for b in backends)
        if len(backends) == 2:
            line += f"{timings['pure'] / timings['native']:>9.2f}x"
        print(line)


if __name__ == "__main__":
    main()
