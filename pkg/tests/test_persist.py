import struct

import numpy as np
import pytest

from ldatrends.errors import ModelFileError
from ldatrends.lda import LdaParams, fit
from ldatrends.persist import MAGIC, dumps_model, load_model, loads_model, save_model
from ldatrends.textprep import Vocabulary, prepare


@pytest.fixture(scope="module")
def fitted():
    texts = ["alpha beta gamma", "beta gamma delta", "gamma delta alpha", "delta alpha beta"]
    vocab, corpus = prepare(texts, min_df=1, max_df_fraction=1.0)
    return vocab, fit(corpus, LdaParams(2, 0.3, 0.1, 30, 10, seed=5), vocab=vocab)


def test_round_trip(tmp_path, fitted):
    vocab, model = fitted
    save_model(model, tmp_path / "m.ldat")
    back = load_model(tmp_path / "m.ldat", vocab)
    assert back.equals(model) and back.vocab is vocab
    assert load_model(tmp_path / "m.ldat").vocab_hash == vocab.hash


def test_byte_identical(fitted):
    vocab, model = fitted
    again = fit(*prepare(["alpha beta gamma", "beta gamma delta", "gamma delta alpha", "delta alpha beta"],
                         min_df=1, max_df_fraction=1.0)[1:], LdaParams(2, 0.3, 0.1, 30, 10, seed=5), vocab=vocab)
    assert dumps_model(model) == dumps_model(again)


def test_truncated(fitted):
    data = dumps_model(fitted[1])
    with pytest.raises(ModelFileError, match="checksum"):
        loads_model(data[:-5])
    flipped = bytearray(data)
    flipped[len(data) // 2] ^= 0xFF
    with pytest.raises(ModelFileError, match="checksum"):
        loads_model(bytes(flipped))
    with pytest.raises(ModelFileError):
        loads_model(b"nope")


def test_vocab_mismatch(fitted):
    other = Vocabulary(("x", "y", "z", "w"), (1, 1, 1, 1))
    with pytest.raises(ModelFileError, match="vocabulary"):
        loads_model(dumps_model(fitted[1]), other)


def test_version_mismatch(fitted):
    import hashlib

    data = bytearray(dumps_model(fitted[1])[:-32])
    struct.pack_into("<I", data, len(MAGIC), 99)
    data = bytes(data) + hashlib.sha256(bytes(data)).digest()
    with pytest.raises(ModelFileError) as exc:
        loads_model(data)
    assert "99" in str(exc.value) and "1" in str(exc.value)
