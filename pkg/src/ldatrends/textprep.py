"""Tokenization, vocabulary construction and bag-of-words corpora."""

from __future__ import annotations

import hashlib
import io
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, ParameterError

_WORD = re.compile(r"[^\W\d_]+")
_HYPHENATED = re.compile(r"[^\W\d_]+(?:-[^\W\d_]+)*")


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset:
    text = resources.files("ldatrends").joinpath("data/stopwords_en.txt").read_text("utf-8")
    words = []
    for line in text.splitlines():
        if not line.startswith("#"):
            words.extend(line.split())
    return frozenset(words)


@dataclass(frozen=True)
class TokenRules:
    min_len: int = 3
    stopwords: frozenset = field(default_factory=default_stopwords)
    split_hyphens: bool = True


def tokenize(text: str, rules: TokenRules = None) -> list:
    """Lowercase alphabetic tokens of at least ``rules.min_len`` characters.

    With ``split_hyphens`` off, hyphenated compounds such as
    ``object-oriented`` survive as a single token.
    """
    if rules is None:
        rules = TokenRules()
    pattern = _WORD if rules.split_hyphens else _HYPHENATED
    return [
        tok
        for tok in pattern.findall(text.lower())
        if len(tok) >= rules.min_len and tok not in rules.stopwords
    ]


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple
    doc_freq: tuple

    def __post_init__(self):
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})
        if len(self._index) != len(self.terms):
            raise ParameterError("duplicate terms in vocabulary")

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self._index

    def index(self, term: str) -> int:
        return self._index[term]

    def get(self, term, default=None):
        return self._index.get(term, default)

    def to_tsv(self) -> str:
        lines = ["index\tterm\tdoc_frequency"]
        lines += [f"{i}\t{t}\t{df}" for i, (t, df) in enumerate(zip(self.terms, self.doc_freq))]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> "Vocabulary":
        rows = [line.split("\t") for line in text.splitlines()[1:] if line]
        for pos, row in enumerate(rows):
            if int(row[0]) != pos:
                raise ConfigurationError(f"vocabulary index {row[0]} out of order at row {pos}")
        return cls(tuple(r[1] for r in rows), tuple(int(r[2]) for r in rows))

    @cached_property
    def hash(self) -> str:
        return hashlib.sha256(self.to_tsv().encode("utf-8")).hexdigest()


def build_vocabulary(token_docs, min_df: int = 2, max_df_fraction: float = 0.5) -> Vocabulary:
    """Keep terms whose document frequency lies in ``[min_df, max_df_fraction * D]``.

    Indices are assigned by descending document frequency with ties broken
    lexicographically, so the result does not depend on input order.
    """
    if min_df < 1:
        raise ParameterError("min_df must be >= 1")
    if not 0 < max_df_fraction <= 1:
        raise ParameterError("max_df_fraction must lie in (0, 1]")
    df = Counter()
    n_docs = 0
    for doc in token_docs:
        n_docs += 1
        df.update(set(doc))
    upper = max_df_fraction * n_docs
    kept = [(t, c) for t, c in df.items() if min_df <= c <= upper]
    if not kept:
        raise ConfigurationError(
            f"empty vocabulary (min_df={min_df}, max_df_fraction={max_df_fraction}, D={n_docs})"
        )
    kept.sort(key=lambda tc: (-tc[1], tc[0]))
    return Vocabulary(tuple(t for t, _ in kept), tuple(c for _, c in kept))


@dataclass(frozen=True)
class BowCorpus:
    """Sparse documents: per document a sorted term-index array and counts.

    ``doc_ids`` carry each document's position in the originating record
    list, so shuffled or filtered corpora stay aligned with their records.
    """

    indices: tuple
    counts: tuple
    doc_ids: np.ndarray
    n_terms: int

    @property
    def D(self) -> int:
        return len(self.indices)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([int(c.sum()) for c in self.counts], dtype=np.int64)

    @property
    def empty(self) -> np.ndarray:
        """Mask of documents left without any in-vocabulary token."""
        return self.lengths == 0

    @property
    def n_tokens(self) -> int:
        return int(self.lengths.sum())

    def doc(self, d: int) -> list:
        return list(zip(self.indices[d].tolist(), self.counts[d].tolist()))

    def subset(self, positions) -> "BowCorpus":
        positions = np.asarray(positions, dtype=np.int64)
        return BowCorpus(
            tuple(self.indices[p] for p in positions),
            tuple(self.counts[p] for p in positions),
            self.doc_ids[positions].copy(),
            self.n_terms,
        )

    def nonempty(self) -> "BowCorpus":
        return self.subset(np.flatnonzero(~self.empty))

    def dense(self) -> np.ndarray:
        out = np.zeros((self.D, self.n_terms), dtype=np.int64)
        for d, (idx, cnt) in enumerate(zip(self.indices, self.counts)):
            out[d, idx] = cnt
        return out

    @classmethod
    def from_docs(cls, docs: Sequence, n_terms: int, doc_ids=None) -> "BowCorpus":
        """Build from ``[(term_index, count), ...]`` lists."""
        indices, counts = [], []
        for doc in docs:
            merged = Counter()
            for w, c in doc:
                if not 0 <= w < n_terms:
                    raise ParameterError(f"term index {w} outside [0, {n_terms})")
                if c < 1:
                    raise ParameterError("counts must be >= 1")
                merged[int(w)] += int(c)
            ws = sorted(merged)
            indices.append(np.array(ws, dtype=np.int32))
            counts.append(np.array([merged[w] for w in ws], dtype=np.int32))
        if doc_ids is None:
            doc_ids = np.arange(len(indices), dtype=np.int64)
        return cls(tuple(indices), tuple(counts), np.asarray(doc_ids, dtype=np.int64), int(n_terms))

    def to_jsonl(self) -> str:
        buf = io.StringIO()
        for did, idx, cnt in zip(self.doc_ids.tolist(), self.indices, self.counts):
            buf.write(json.dumps({"doc_id": did, "terms": [[int(w), int(c)] for w, c in zip(idx, cnt)]}))
            buf.write("\n")
        return buf.getvalue()

    @classmethod
    def from_jsonl(cls, text: str, n_terms: int) -> "BowCorpus":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        return cls.from_docs([r["terms"] for r in rows], n_terms, [r["doc_id"] for r in rows])


def to_bow(token_docs, vocab: Vocabulary, doc_ids=None) -> BowCorpus:
    """Count in-vocabulary tokens per document; out-of-vocabulary tokens are dropped.

    Documents that end up empty are kept (see :attr:`BowCorpus.empty`).
    """
    docs = []
    for tokens in token_docs:
        c = Counter(vocab.get(t) for t in tokens)
        c.pop(None, None)
        docs.append(sorted(c.items()))
    return BowCorpus.from_docs(docs, len(vocab), doc_ids)


def shuffle(corpus: BowCorpus, seed: int) -> BowCorpus:
    """Permute document order; the permutation depends only on ``seed`` and D."""
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(corpus.D)
    return corpus.subset(perm)


@dataclass(frozen=True)
class PrepConfig:
    min_len: int = 3
    split_hyphens: bool = True
    min_df: int = 2
    max_df_fraction: float = 0.5
    extra_stopwords: tuple = ()

    def rules(self) -> TokenRules:
        return TokenRules(self.min_len, default_stopwords() | frozenset(self.extra_stopwords),
                          self.split_hyphens)


def prepare(texts, rules: TokenRules = None, min_df: int = 2, max_df_fraction: float = 0.5,
            doc_ids=None):
    """Tokenize ``texts``, build a vocabulary and return ``(vocab, corpus)``."""
    token_docs = [tokenize(t, rules) for t in texts]
    vocab = build_vocabulary(token_docs, min_df, max_df_fraction)
    return vocab, to_bow(token_docs, vocab, doc_ids)


def prepare_with(texts, cfg: PrepConfig, doc_ids=None):
    return prepare(texts, cfg.rules(), cfg.min_df, cfg.max_df_fraction, doc_ids)
