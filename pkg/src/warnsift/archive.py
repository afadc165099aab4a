"""Model archive: a self-describing container with bit-exact round trips.

Layout: a magic line, a JSON text header (format version, vocabulary hash,
hyperparameters, tensor count), then each tensor as a name line, a shape
line, and row-major little-endian float64 bytes.
"""

import json

import numpy as np

from .errors import ArchiveError, VocabularyMismatch
from .model import Hyperparams, parameter_shapes

MAGIC = b"warnsift-model 1\n"
FORMAT_VERSION = 1


def save_model(path, params, hp, vocab):
    names = [name for name, _ in parameter_shapes(hp, params["embed.token"].shape[0])]
    missing = set(names) - set(params)
    if missing:
        raise ArchiveError(f"parameters missing tensors: {sorted(missing)}")
    header = {
        "format_version": FORMAT_VERSION,
        "vocab_sha256": vocab.sha256(),
        "vocab_size": len(vocab),
        "hyperparams": hp.to_dict(),
        "tensor_count": len(names),
    }
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for name in names:
            arr = np.ascontiguousarray(params[name], dtype="<f8")
            fh.write(name.encode("utf-8") + b"\n")
            fh.write(" ".join(str(d) for d in arr.shape).encode("ascii") + b"\n")
            fh.write(arr.tobytes(order="C"))


def _read_line(fh, what):
    line = bytearray()
    while True:
        ch = fh.read(1)
        if not ch:
            raise ArchiveError(f"truncated archive while reading {what}")
        if ch == b"\n":
            return bytes(line)
        line.extend(ch)


def load_model(path, expected_vocab=None):
    """Read an archive back into (params, hyperparams, header dict)."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ArchiveError("not a model archive (bad magic)")
        try:
            header = json.loads(_read_line(fh, "header").decode("utf-8"))
        except ValueError as exc:
            raise ArchiveError(f"unreadable archive header: {exc}") from None
        if header.get("format_version") != FORMAT_VERSION:
            raise ArchiveError(f"unsupported format version {header.get('format_version')}")
        if expected_vocab is not None and header.get("vocab_sha256") != expected_vocab.sha256():
            raise VocabularyMismatch(
                "archive was built against a different vocabulary")
        hp = Hyperparams.from_dict(header["hyperparams"])
        params = {}
        for _ in range(header["tensor_count"]):
            name = _read_line(fh, "tensor name").decode("utf-8")
            shape_line = _read_line(fh, "tensor shape").decode("ascii")
            try:
                shape = tuple(int(part) for part in shape_line.split())
            except ValueError:
                raise ArchiveError(f"bad shape line for tensor {name!r}") from None
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise ArchiveError(f"truncated data for tensor {name!r}")
            params[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
        trailing = fh.read(1)
        if trailing:
            raise ArchiveError("trailing bytes after the last tensor")
    expected = dict(parameter_shapes(hp, header["vocab_size"]))
    if set(expected) != set(params):
        raise ArchiveError("archive tensors do not match the hyperparameters")
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise ArchiveError(
                f"tensor {name!r} has shape {params[name].shape}, expected {shape}")
    return params, hp, header
