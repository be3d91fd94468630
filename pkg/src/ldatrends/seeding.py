"""Pinned seed derivation.

Every stochastic component receives a seed derived from one master seed
through :func:`derive_seed`. The derivation is a BLAKE2b digest over the
textual path, so it is stable across Python and NumPy releases.
"""

import hashlib

import numpy as np

_MASK = (1 << 63) - 1


def derive_seed(master: int, *path) -> int:
    """Derive a child seed from ``master`` and a path of labels/indices."""
    text = ":".join([str(int(master))] + [str(p) for p in path])
    digest = hashlib.blake2b(text.encode("ascii"), digest_size=8).digest()
    return int.from_bytes(digest, "little") & _MASK


def rng_for(master: int, *path) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(master, *path)))
