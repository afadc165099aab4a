"""Transformer-encoder classifier trained from scratch at desk scale.

Input rows are token + segment + position embeddings; each layer applies
residual multi-head self-attention and a residual feed-forward block, both
followed by row LayerNorm; the final hidden row at the [CLS] position
feeds a two-way softmax classifier. Training minimizes mean cross-entropy
with Adam, a seeded validation split, and early stopping. Everything runs
in float64 and is bit-deterministic for a given seed.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .abstraction import to_model_input
from .errors import DegenerateCorpus, IdOutOfRange, ShapeMismatch

# Learning rate appropriate when continuing from pretrained weights; the
# default below is for from-scratch training.
FINETUNE_LEARNING_RATE = 1e-6


@dataclass(frozen=True)
class Hyperparams:
    num_layers: int = 2
    d_model: int = 64
    num_heads: int = 4
    d_ff: int = 256
    max_len: int = 512
    batch_size: int = 16
    learning_rate: float = 1e-3
    max_epochs: int = 15
    patience: int = 5
    val_fraction: float = 0.20
    seed: int = 0
    ln_epsilon: float = 1e-5

    def __post_init__(self):
        if self.d_model % self.num_heads != 0:
            raise ValueError("num_heads must divide d_model")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie strictly between 0 and 1")
        for name in ("num_layers", "d_model", "num_heads", "d_ff", "max_len",
                     "batch_size", "max_epochs", "patience"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def to_dict(self):
        return {
            "num_layers": self.num_layers, "d_model": self.d_model,
            "num_heads": self.num_heads, "d_ff": self.d_ff,
            "max_len": self.max_len, "batch_size": self.batch_size,
            "learning_rate": self.learning_rate, "max_epochs": self.max_epochs,
            "patience": self.patience, "val_fraction": self.val_fraction,
            "seed": self.seed, "ln_epsilon": self.ln_epsilon,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass
class Prediction:
    instance_id: str
    p_clean: float
    p_buggy: float
    label: int


def parameter_shapes(hp, vocab_size):
    """Canonical (name, shape) list; initialization and archives follow
    this order."""
    shapes = [
        ("embed.token", (vocab_size, hp.d_model)),
        ("embed.segment", (1, hp.d_model)),
        ("embed.position", (hp.max_len, hp.d_model)),
    ]
    for i in range(hp.num_layers):
        p = f"layer{i}."
        shapes += [
            (p + "attn.wq", (hp.d_model, hp.d_model)),
            (p + "attn.wk", (hp.d_model, hp.d_model)),
            (p + "attn.wv", (hp.d_model, hp.d_model)),
            (p + "attn.wo", (hp.d_model, hp.d_model)),
            (p + "ln1.scale", (hp.d_model,)),
            (p + "ln1.shift", (hp.d_model,)),
            (p + "ffn.w1", (hp.d_model, hp.d_ff)),
            (p + "ffn.b1", (hp.d_ff,)),
            (p + "ffn.w2", (hp.d_ff, hp.d_model)),
            (p + "ffn.b2", (hp.d_model,)),
            (p + "ln2.scale", (hp.d_model,)),
            (p + "ln2.shift", (hp.d_model,)),
        ]
    shapes += [
        ("classifier.w", (hp.d_model, 2)),
        ("classifier.b", (2,)),
    ]
    return shapes


def init_parameters(hp, vocab_size, rng):
    """Seeded initialization: embeddings/projections uniform(-0.1, 0.1),
    LayerNorm scale 1 / shift 0, biases 0."""
    params = {}
    for name, shape in parameter_shapes(hp, vocab_size):
        leaf = name.rsplit(".", 1)[1]
        if leaf in ("scale",):
            params[name] = np.ones(shape)
        elif leaf in ("shift", "b", "b1", "b2"):
            params[name] = np.zeros(shape)
        else:
            params[name] = rng.uniform(-0.1, 0.1, size=shape)
    return params


def zeros_like_parameters(params):
    return {name: np.zeros_like(arr) for name, arr in params.items()}


# -- forward ---------------------------------------------------------------


def _softmax_rows(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    weights = np.exp(shifted)
    return weights / weights.sum(axis=-1, keepdims=True)


def _embed_batch(ids, params, hp):
    vocab_size = params["embed.token"].shape[0]
    if ids.size and ids.max() >= vocab_size:
        raise IdOutOfRange(f"token id {int(ids.max())} >= vocabulary size {vocab_size}")
    if ids.size and ids.min() < 0:
        raise IdOutOfRange("negative token id")
    length = ids.shape[1]
    if length > hp.max_len:
        raise ShapeMismatch(f"sequence length {length} exceeds max_len {hp.max_len}")
    return (params["embed.token"][ids]
            + params["embed.segment"][0]
            + params["embed.position"][:length])


def _key_keep_flat(mask, num_heads):
    batch, length = mask.shape
    keep = np.broadcast_to(mask[:, None, None, :],
                           (batch, num_heads, length, length))
    return np.ascontiguousarray(keep.reshape(-1, length), dtype=np.uint8)


def _layer_forward(x, lp, keep_flat, hp):
    batch, length, d = x.shape
    heads = hp.num_heads
    dh = d // heads
    scale = 1.0 / math.sqrt(dh)
    xf = x.reshape(batch * length, d)

    def split(m):
        return (xf @ m).reshape(batch, length, heads, dh).transpose(0, 2, 1, 3)

    q, k, v = split(lp["attn.wq"]), split(lp["attn.wk"]), split(lp["attn.wv"])
    scores = (q @ k.transpose(0, 1, 3, 2)) * scale
    probs = kernels.softmax_masked(
        scores.reshape(-1, length), keep_flat).reshape(scores.shape)
    merged = (probs @ v).transpose(0, 2, 1, 3).reshape(batch * length, d)
    attn = merged @ lp["attn.wo"]

    xhat1, rstd1 = kernels.layer_norm(xf + attn, hp.ln_epsilon)
    y = xhat1 * lp["ln1.scale"] + lp["ln1.shift"]
    pre = y @ lp["ffn.w1"] + lp["ffn.b1"]
    act = np.maximum(pre, 0.0)
    ffn = act @ lp["ffn.w2"] + lp["ffn.b2"]
    xhat2, rstd2 = kernels.layer_norm(y + ffn, hp.ln_epsilon)
    z = xhat2 * lp["ln2.scale"] + lp["ln2.shift"]

    cache = {"xf": xf, "q": q, "k": k, "v": v, "probs": probs, "merged": merged,
             "xhat1": xhat1, "rstd1": rstd1, "y": y, "pre": pre, "act": act,
             "xhat2": xhat2, "rstd2": rstd2}
    return z.reshape(batch, length, d), cache


def _layer_params(params, i):
    prefix = f"layer{i}."
    return {name[len(prefix):]: arr for name, arr in params.items()
            if name.startswith(prefix)}


def forward_batch(ids, mask, params, hp, want_cache=False):
    """Class probabilities for a padded batch.

    ``ids``/``mask`` are (batch, length) arrays; returns (batch, 2) rows
    (p_clean, p_buggy) and, when requested, the caches for backward.
    """
    ids = np.asarray(ids, dtype=np.int64)
    mask = np.asarray(mask, dtype=np.uint8)
    x = _embed_batch(ids, params, hp)
    keep_flat = _key_keep_flat(mask, hp.num_heads)
    layer_caches = []
    for i in range(hp.num_layers):
        x, cache = _layer_forward(x, _layer_params(params, i), keep_flat, hp)
        layer_caches.append(cache)
    h_cls = x[:, 0, :]
    logits = h_cls @ params["classifier.w"] + params["classifier.b"]
    probs = _softmax_rows(logits)
    if not want_cache:
        return probs, None
    cache = {"ids": ids, "mask": mask, "keep_flat": keep_flat,
             "layers": layer_caches, "h_cls": h_cls, "shape": x.shape}
    return probs, cache


def _layer_backward(dz, cache, lp, hp):
    batch, length, d = dz.shape
    heads = hp.num_heads
    dh = d // heads
    scale = 1.0 / math.sqrt(dh)
    dz_f = dz.reshape(batch * length, d)
    grads = {}

    grads["ln2.scale"] = (dz_f * cache["xhat2"]).sum(axis=0)
    grads["ln2.shift"] = dz_f.sum(axis=0)
    ds2 = kernels.layer_norm_backward(
        cache["xhat2"], cache["rstd2"], dz_f * lp["ln2.scale"])

    grads["ffn.w2"] = cache["act"].T @ ds2
    grads["ffn.b2"] = ds2.sum(axis=0)
    dpre = (ds2 @ lp["ffn.w2"].T) * (cache["pre"] > 0)
    grads["ffn.w1"] = cache["y"].T @ dpre
    grads["ffn.b1"] = dpre.sum(axis=0)
    dy = ds2 + dpre @ lp["ffn.w1"].T

    grads["ln1.scale"] = (dy * cache["xhat1"]).sum(axis=0)
    grads["ln1.shift"] = dy.sum(axis=0)
    ds1 = kernels.layer_norm_backward(
        cache["xhat1"], cache["rstd1"], dy * lp["ln1.scale"])

    grads["attn.wo"] = cache["merged"].T @ ds1
    dmerged = (ds1 @ lp["attn.wo"].T).reshape(batch, length, heads, dh)
    dctx = dmerged.transpose(0, 2, 1, 3)
    dprobs = dctx @ cache["v"].transpose(0, 1, 3, 2)
    dv = cache["probs"].transpose(0, 1, 3, 2) @ dctx
    dscores = kernels.softmax_masked_backward(
        cache["probs"].reshape(-1, length),
        np.ascontiguousarray(dprobs.reshape(-1, length)),
    ).reshape(batch, heads, length, length) * scale
    dq = dscores @ cache["k"]
    dk = dscores.transpose(0, 1, 3, 2) @ cache["q"]

    def merge(a):
        return a.transpose(0, 2, 1, 3).reshape(batch * length, d)

    dqf, dkf, dvf = merge(dq), merge(dk), merge(dv)
    xf = cache["xf"]
    grads["attn.wq"] = xf.T @ dqf
    grads["attn.wk"] = xf.T @ dkf
    grads["attn.wv"] = xf.T @ dvf
    dx = ds1 + dqf @ lp["attn.wq"].T + dkf @ lp["attn.wk"].T + dvf @ lp["attn.wv"].T
    return dx.reshape(batch, length, d), grads


def backward_batch(probs, labels, cache, params, hp):
    """Gradients of the mean cross-entropy over the batch."""
    batch, length, d = cache["shape"]
    grads = {}
    dlogits = probs.copy()
    dlogits[np.arange(batch), labels] -= 1.0
    dlogits /= batch
    grads["classifier.w"] = cache["h_cls"].T @ dlogits
    grads["classifier.b"] = dlogits.sum(axis=0)
    dx = np.zeros((batch, length, d))
    dx[:, 0, :] = dlogits @ params["classifier.w"].T

    for i in reversed(range(hp.num_layers)):
        dx, layer_grads = _layer_backward(
            dx, cache["layers"][i], _layer_params(params, i), hp)
        for leaf, g in layer_grads.items():
            grads[f"layer{i}.{leaf}"] = g

    ids = cache["ids"]
    dte = np.zeros_like(params["embed.token"])
    np.add.at(dte, ids, dx)
    grads["embed.token"] = dte
    grads["embed.segment"] = dx.sum(axis=(0, 1))[None, :]
    dpe = np.zeros_like(params["embed.position"])
    dpe[:length] = dx.sum(axis=0)
    grads["embed.position"] = dpe
    return grads


# -- public single-sequence operations --------------------------------------


def embed(input_seq, params, hp):
    """Embedding rows TE[id] + SE + PE[position] for one input sequence."""
    ids = np.asarray(input_seq.ids, dtype=np.int64)[None, :]
    return _embed_batch(ids, params, hp)[0]


def attention(q, k, v, mask=None, return_weights=False):
    """Scaled dot-product attention over 2-D matrices.

    ``mask`` flags key positions (1 = attend, 0 = ignore); masked keys get
    zero weight.
    """
    q = np.asarray(q, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if k.shape[0] != v.shape[0] or q.shape[1] != k.shape[1]:
        raise ShapeMismatch("attention operands disagree on dimensions")
    if mask is None:
        mask = np.ones(k.shape[0], dtype=np.uint8)
    keep = np.broadcast_to(np.asarray(mask, dtype=np.uint8), (q.shape[0], k.shape[0]))
    scores = (q @ k.T) / math.sqrt(k.shape[1])
    weights = kernels.softmax_masked(scores, np.ascontiguousarray(keep))
    out = weights @ v
    return (out, weights) if return_weights else out


def encoder_layer(x, layer_params, mask, hp):
    """One residual attention + feed-forward block over a single sequence
    (L, d_model). ``layer_params`` holds the unprefixed layer tensors."""
    x = np.asarray(x, dtype=np.float64)[None, :, :]
    mask = np.asarray(mask, dtype=np.uint8)[None, :]
    keep_flat = _key_keep_flat(mask, hp.num_heads)
    z, _ = _layer_forward(x, layer_params, keep_flat, hp)
    return z[0]


def forward(input_seq, params, hp, instance_id=""):
    """Prediction for one input sequence; probability ties label as clean."""
    ids = np.asarray(input_seq.ids, dtype=np.int64)[None, :]
    mask = np.asarray(input_seq.mask, dtype=np.uint8)[None, :]
    probs, _ = forward_batch(ids, mask, params, hp)
    p_clean, p_buggy = float(probs[0, 0]), float(probs[0, 1])
    return Prediction(instance_id, p_clean, p_buggy, 1 if p_buggy > p_clean else 0)


def loss(probs, label):
    """Cross-entropy of one prediction, probability floored at 1e-12."""
    return -math.log(max(float(probs[label]), 1e-12))


def batch_loss(probs, labels):
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.log(np.maximum(picked, 1e-12)).mean())


# -- training ----------------------------------------------------------------


def pad_batch(inputs, pad_id=0):
    """Stack variable-length InputSequences into (batch, maxlen) arrays."""
    width = max(len(seq.ids) for seq in inputs)
    ids = np.full((len(inputs), width), pad_id, dtype=np.int64)
    mask = np.zeros((len(inputs), width), dtype=np.uint8)
    for row, seq in enumerate(inputs):
        ids[row, :len(seq.ids)] = seq.ids
        mask[row, :len(seq.mask)] = seq.mask
    return ids, mask


@dataclass
class AdamState:
    m: dict
    v: dict
    t: int = 0


def adam_step(params, grads, state, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for name, g in grads.items():
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        params[name] -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    val_accuracy: float
    improved: bool


def _check_trainable(corpus, min_instances):
    if len(corpus) < min_instances:
        raise DegenerateCorpus(
            f"need at least {min_instances} labeled instances, have {len(corpus)}")
    labels = {seq.label for seq in corpus}
    if not labels <= {0, 1} or None in labels:
        raise DegenerateCorpus("every training instance needs a 0/1 label")
    if len(labels) < 2:
        raise DegenerateCorpus("training corpus contains a single class")


def _accuracy(inputs, labels, params, hp, batch_size):
    correct = 0
    for start in range(0, len(inputs), batch_size):
        chunk = inputs[start:start + batch_size]
        ids, mask = pad_batch(chunk)
        probs, _ = forward_batch(ids, mask, params, hp)
        predicted = (probs[:, 1] > probs[:, 0]).astype(int)
        correct += int((predicted == labels[start:start + batch_size]).sum())
    return correct / len(inputs)


def train(corpus, hp, vocab, truncate="head", min_instances=10):
    """Train on labeled TokenSequences; returns (best parameters, log).

    Deterministic for fixed (corpus order, hyperparameters, seed): the
    seeded master stream drives initialization and the validation split,
    and each epoch's batch order reseeds from (seed, epoch).
    """
    _check_trainable(corpus, min_instances)
    inputs = [to_model_input(seq, vocab, hp.max_len, truncate) for seq in corpus]
    labels = np.array([seq.label for seq in corpus], dtype=np.int64)

    rng = np.random.default_rng(hp.seed)
    params = init_parameters(hp, len(vocab), rng)
    perm = rng.permutation(len(corpus))
    n_val = min(max(1, int(round(hp.val_fraction * len(corpus)))), len(corpus) - 1)
    val_idx = perm[:n_val]
    train_idx = perm[n_val:]
    val_inputs = [inputs[i] for i in val_idx]
    val_labels = labels[val_idx]

    state = AdamState(zeros_like_parameters(params), zeros_like_parameters(params))
    best_params = {name: arr.copy() for name, arr in params.items()}
    best_accuracy = -1.0
    stale = 0
    log = []
    for epoch in range(1, hp.max_epochs + 1):
        order = np.random.default_rng([hp.seed, epoch]).permutation(train_idx)
        total_loss = 0.0
        for start in range(0, len(order), hp.batch_size):
            batch = order[start:start + hp.batch_size]
            ids, mask = pad_batch([inputs[i] for i in batch])
            probs, cache = forward_batch(ids, mask, params, hp, want_cache=True)
            total_loss += batch_loss(probs, labels[batch]) * len(batch)
            grads = backward_batch(probs, labels[batch], cache, params, hp)
            adam_step(params, grads, state, hp.learning_rate)
        val_accuracy = _accuracy(val_inputs, val_labels, params, hp, hp.batch_size)
        improved = val_accuracy > best_accuracy
        if improved:
            best_accuracy = val_accuracy
            best_params = {name: arr.copy() for name, arr in params.items()}
            stale = 0
        else:
            stale += 1
        log.append(EpochLog(epoch, total_loss / max(len(order), 1), val_accuracy, improved))
        if stale >= hp.patience:
            break
    return best_params, log


def predict(corpus, params, hp, vocab, truncate="head", batch_size=64):
    """Predictions for a list of TokenSequences."""
    out = []
    for start in range(0, len(corpus), batch_size):
        chunk = corpus[start:start + batch_size]
        inputs = [to_model_input(seq, vocab, hp.max_len, truncate) for seq in chunk]
        ids, mask = pad_batch(inputs)
        probs, _ = forward_batch(ids, mask, params, hp)
        for seq, row in zip(chunk, probs):
            p_clean, p_buggy = float(row[0]), float(row[1])
            out.append(Prediction(seq.instance_id, p_clean, p_buggy,
                                  1 if p_buggy > p_clean else 0))
    return out


# -- gradient checking --------------------------------------------------------


def gradient_check(params, batch, hp, step=1e-5):
    """Max relative error between analytic and central-difference gradients.

    ``batch`` is (ids, mask, labels). Meant for tiny models (d_model <= 16,
    sequence length <= 8); cost grows with the full parameter count.
    """
    ids, mask, labels = batch
    labels = np.asarray(labels, dtype=np.int64)

    def objective():
        probs, _ = forward_batch(ids, mask, params, hp)
        return batch_loss(probs, labels)

    probs, cache = forward_batch(ids, mask, params, hp, want_cache=True)
    analytic = backward_batch(probs, labels, cache, params, hp)

    worst = 0.0
    for name, arr in params.items():
        grad = analytic[name]
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            up = objective()
            flat[i] = original - step
            down = objective()
            flat[i] = original
            numeric = (up - down) / (2.0 * step)
            denom = max(abs(gflat[i]), abs(numeric), 1e-8)
            worst = max(worst, abs(gflat[i] - numeric) / denom)
    return worst
