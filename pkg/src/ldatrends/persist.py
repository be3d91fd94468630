"""Binary model container.

Layout (all integers little-endian)::

    b"LDATMDL\\0"                magic
    uint32                      format version
    uint32                      header length H
    H bytes                     JSON header (sorted keys, compact)
    k*V float64                 phi, row-major
    D*k float64                 theta, row-major
    32 bytes                    SHA-256 of everything above

Identical models serialize to identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import ModelFileError
from .lda import LdaParams, TopicModel

MAGIC = b"LDATMDL\0"
FORMAT_VERSION = 1


def dumps_model(model: TopicModel) -> bytes:
    header = {
        "format_version": FORMAT_VERSION,
        "params": model.params.to_dict(),
        "vocab_hash": model.vocab_hash,
        "k": model.k,
        "n_terms": model.n_terms,
        "n_docs": int(model.theta.shape[0]),
        "doc_ids": [int(d) for d in model.doc_ids],
    }
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = b"".join([
        MAGIC,
        struct.pack("<II", FORMAT_VERSION, len(hbytes)),
        hbytes,
        np.ascontiguousarray(model.phi, dtype="<f8").tobytes(),
        np.ascontiguousarray(model.theta, dtype="<f8").tobytes(),
    ])
    return body + hashlib.sha256(body).digest()


def loads_model(data: bytes, vocab=None) -> TopicModel:
    if len(data) < len(MAGIC) + 8 + 32 or not data.startswith(MAGIC):
        raise ModelFileError("not a model file (bad magic or truncated)")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise ModelFileError("checksum mismatch: model file is corrupt or truncated")
    version, hlen = struct.unpack_from("<II", body, len(MAGIC))
    if version != FORMAT_VERSION:
        raise ModelFileError(f"model format version {version} is not supported (expected {FORMAT_VERSION})")
    start = len(MAGIC) + 8
    header = json.loads(body[start:start + hlen].decode("utf-8"))
    if vocab is not None and vocab.hash != header["vocab_hash"]:
        raise ModelFileError(
            f"vocabulary hash {vocab.hash[:12]} does not match the model's {header['vocab_hash'][:12]}"
        )
    k, v, d = header["k"], header["n_terms"], header["n_docs"]
    offset = start + hlen
    if len(body) != offset + 8 * (k * v + d * k):
        raise ModelFileError("array section has the wrong size")
    phi = np.frombuffer(body, "<f8", k * v, offset).reshape(k, v).astype(np.float64)
    theta = np.frombuffer(body, "<f8", d * k, offset + 8 * k * v).reshape(d, k).astype(np.float64)
    return TopicModel(phi, theta, LdaParams(**header["params"]),
                      np.array(header["doc_ids"], dtype=np.int64), vocab, header["vocab_hash"])


def atomic_write(path, data) -> None:
    """Write bytes or text to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(model: TopicModel, path) -> None:
    atomic_write(path, dumps_model(model))


def load_model(path, vocab=None) -> TopicModel:
    """Load a model; pass ``vocab`` to verify and attach the vocabulary."""
    return loads_model(Path(path).read_bytes(), vocab)
