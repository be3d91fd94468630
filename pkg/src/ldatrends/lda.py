"""Latent Dirichlet allocation by collapsed Gibbs sampling.

The sampler resamples every token's topic from the leave-one-out
conditional

    p(z = k | rest) ~ (n_dk + alpha) * (n_kw + eta) / (n_k + V * eta)

and reports posterior-mean estimates of the topic-word (``phi``) and
document-topic (``theta``) distributions from the final state.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _gibbs
from .errors import GibbsInvariantError, InputError, ParameterError
from .seeding import derive_seed
from .textprep import BowCorpus, Vocabulary

logger = logging.getLogger(__name__)


class EmptyDocumentWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LdaParams:
    k: int
    alpha: float
    eta: float
    iterations: int = 1000
    burn_in: int = 500
    seed: int = 0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise ParameterError(f"k must be an integer >= 2, got {self.k}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ParameterError(f"eta must be positive, got {self.eta}")
        if self.iterations < 1 or not 0 <= self.burn_in < self.iterations:
            raise ParameterError("need iterations >= 1 and 0 <= burn_in < iterations")
        object.__setattr__(self, "k", int(self.k))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "alpha": float(self.alpha),
            "eta": float(self.eta),
            "iterations": self.iterations,
            "burn_in": self.burn_in,
            "seed": self.seed,
        }


@dataclass
class GibbsState:
    doc_of: np.ndarray
    word_of: np.ndarray
    z: np.ndarray
    n_dk: np.ndarray
    n_wk: np.ndarray
    n_k: np.ndarray
    lengths: np.ndarray
    rng: np.random.Generator = field(repr=False)

    @property
    def n_kw(self) -> np.ndarray:
        """Topic-word counts in k x V orientation."""
        return self.n_wk.T

    def check(self):
        """Raise :class:`GibbsInvariantError` if the counts are inconsistent."""
        if (self.n_dk < 0).any() or (self.n_wk < 0).any() or (self.n_k < 0).any():
            raise GibbsInvariantError("negative count")
        if not np.array_equal(self.n_dk.sum(axis=1), self.lengths):
            raise GibbsInvariantError("doc-topic rows do not sum to document lengths")
        if not np.array_equal(self.n_wk.sum(axis=0), self.n_k):
            raise GibbsInvariantError("topic-word columns do not sum to topic totals")
        if int(self.n_k.sum()) != int(self.lengths.sum()):
            raise GibbsInvariantError("topic totals do not sum to the token count")


@dataclass(frozen=True, eq=False)
class TopicModel:
    phi: np.ndarray
    theta: np.ndarray
    params: LdaParams
    doc_ids: np.ndarray
    vocab: Optional[Vocabulary] = None
    vocab_digest: str = ""

    @property
    def k(self) -> int:
        return self.phi.shape[0]

    @property
    def n_terms(self) -> int:
        return self.phi.shape[1]

    @property
    def vocab_hash(self) -> str:
        return self.vocab.hash if self.vocab is not None else self.vocab_digest

    @property
    def terms(self) -> tuple:
        if self.vocab is not None:
            return self.vocab.terms
        return tuple(f"w{i:06d}" for i in range(self.n_terms))

    def equals(self, other: "TopicModel") -> bool:
        return (
            isinstance(other, TopicModel)
            and self.params == other.params
            and self.vocab_hash == other.vocab_hash
            and np.array_equal(self.phi, other.phi)
            and np.array_equal(self.theta, other.theta)
            and np.array_equal(self.doc_ids, other.doc_ids)
        )


def _flatten(corpus: BowCorpus):
    doc_of = np.repeat(
        np.arange(corpus.D, dtype=np.int64), corpus.lengths
    ) if corpus.D else np.zeros(0, np.int64)
    words = [np.repeat(idx, cnt) for idx, cnt in zip(corpus.indices, corpus.counts)]
    word_of = np.concatenate(words).astype(np.int64) if words else np.zeros(0, np.int64)
    return doc_of, word_of


def init_state(corpus: BowCorpus, params: LdaParams) -> GibbsState:
    """Random topic assignment for every token, seeded by ``params.seed``."""
    rng = np.random.Generator(np.random.PCG64(params.seed))
    doc_of, word_of = _flatten(corpus)
    z = rng.integers(0, params.k, size=doc_of.shape[0]).astype(np.int64)
    n_dk = np.zeros((corpus.D, params.k), dtype=np.int64)
    n_wk = np.zeros((corpus.n_terms, params.k), dtype=np.int64)
    np.add.at(n_dk, (doc_of, z), 1)
    np.add.at(n_wk, (word_of, z), 1)
    n_k = np.bincount(z, minlength=params.k).astype(np.int64)
    return GibbsState(doc_of, word_of, z, n_dk, n_wk, n_k, corpus.lengths, rng)


def sweep(state: GibbsState, params: LdaParams, kernel=None):
    """Run one Gibbs sweep over every token of ``state``."""
    kernel = kernel or _gibbs.gibbs_sweep
    u = state.rng.random(state.z.shape[0])
    v_eta = state.n_wk.shape[0] * params.eta
    kernel(state.doc_of, state.word_of, state.z, state.n_dk, state.n_wk, state.n_k,
           float(params.alpha), float(params.eta), float(v_eta), u)


def conditional_distribution(state: GibbsState, params: LdaParams, d: int, w: int) -> np.ndarray:
    """Normalized leave-one-out conditional over topics for token (d, w).

    The token must already be removed from the counts.
    """
    n_dk = state.n_dk[d]
    n_w = state.n_wk[w]
    if (n_dk < 0).any() or (n_w < 0).any() or (state.n_k < 0).any():
        raise GibbsInvariantError("negative count in conditional")
    v = state.n_wk.shape[0]
    p = (n_dk + params.alpha) * (n_w + params.eta) / (state.n_k + v * params.eta)
    return p / p.sum()


def estimate(state: GibbsState, params: LdaParams):
    """Posterior-mean ``(phi, theta)`` from a sampler state."""
    v = state.n_wk.shape[0]
    phi = (state.n_wk.T + params.eta) / (state.n_k[:, None] + v * params.eta)
    theta = (state.n_dk + params.alpha) / (state.lengths[:, None] + params.k * params.alpha)
    return phi, theta


def fit(corpus: BowCorpus, params: LdaParams, vocab: Optional[Vocabulary] = None,
        check_every: int = 50, return_state: bool = False):
    """Fit LDA on the non-empty documents of ``corpus``.

    Parameters
    ----------
    corpus : BowCorpus
        Training documents. Zero-length documents are skipped.
    params : LdaParams
        Topic count, priors, sweep count and seed.
    vocab : Vocabulary, optional
        Attached to the model so topics can be reported by term.
    check_every : int
        Verify the count invariants every ``check_every`` sweeps
        (1 = after every sweep, 0 = never).
    return_state : bool
        Also return the final :class:`GibbsState`.

    Returns
    -------
    TopicModel, or (TopicModel, GibbsState) when ``return_state`` is set.
    """
    if vocab is not None and len(vocab) != corpus.n_terms:
        raise InputError("vocabulary size does not match the corpus")
    train = corpus.nonempty()
    if train.D == 0:
        raise InputError("corpus has no non-empty documents")
    state = init_state(train, params)
    for it in range(params.iterations):
        sweep(state, params)
        if check_every and (it + 1) % check_every == 0:
            state.check()
    phi, theta = estimate(state, params)
    model = TopicModel(phi, theta, params, train.doc_ids.copy(), vocab)
    return (model, state) if return_state else model


# -- held-out evaluation ---------------------------------------------------

def infer_corpus(model: TopicModel, corpus: BowCorpus, fold_in_iters: int = 50, seed: int = 0) -> np.ndarray:
    """Fold-in theta rows for every document of ``corpus``.

    Empty documents get the uniform vector.
    """
    k = model.k
    theta = np.full((corpus.D, k), 1.0 / k)
    if corpus.D == 0 or corpus.n_tokens == 0:
        return theta
    if corpus.n_terms != model.n_terms:
        raise InputError("corpus vocabulary size does not match the model")
    rng = np.random.Generator(np.random.PCG64(seed))
    doc_of, word_of = _flatten(corpus)
    z = rng.integers(0, k, size=doc_of.shape[0]).astype(np.int64)
    n_dk = np.zeros((corpus.D, k), dtype=np.int64)
    np.add.at(n_dk, (doc_of, z), 1)
    phi_wk = np.ascontiguousarray(model.phi.T)
    alpha = float(model.params.alpha)
    for _ in range(fold_in_iters):
        _gibbs.foldin_sweep(doc_of, word_of, z, n_dk, phi_wk, alpha, rng.random(z.shape[0]))
    lengths = corpus.lengths
    nz = lengths > 0
    theta[nz] = (n_dk[nz] + alpha) / (lengths[nz, None] + k * alpha)
    return theta


def infer(model: TopicModel, doc, fold_in_iters: int = 50, seed: int = 0) -> np.ndarray:
    """Theta row for one unseen document given as ``[(term_index, count), ...]``."""
    single = BowCorpus.from_docs([doc], model.n_terms)
    if single.n_tokens == 0:
        warnings.warn("empty document: returning the uniform topic vector", EmptyDocumentWarning)
    return infer_corpus(model, single, fold_in_iters, seed)[0]


def _token_log_likelihood(theta: np.ndarray, phi: np.ndarray, corpus: BowCorpus) -> float:
    total = 0.0
    for d in range(corpus.D):
        idx, cnt = corpus.indices[d], corpus.counts[d]
        if idx.size == 0:
            continue
        p = theta[d] @ phi[:, idx]
        if (p <= 0).any():
            raise FloatingPointError("zero word probability")
        total += float(np.dot(cnt, np.log(p)))
    return total


def heldout_log_likelihood(model, heldout, fold_in_iters=50, seed=0) -> float:
    theta = infer_corpus(model, heldout, fold_in_iters, seed)
    return _token_log_likelihood(theta, model.phi, heldout)


def perplexity(model: TopicModel, heldout: BowCorpus, fold_in_iters: int = 50, seed: int = 0) -> float:
    """exp(-(held-out log-likelihood) / (held-out token count)); lower is better."""
    n = heldout.n_tokens
    if n == 0:
        raise InputError("held-out corpus has no tokens")
    ll = heldout_log_likelihood(model, heldout, fold_in_iters, seed)
    value = math.exp(-ll / n)
    if not (math.isfinite(value) and value > 0):
        raise FloatingPointError(f"invalid perplexity {value}")
    return value


def log_likelihood(model: TopicModel, corpus: BowCorpus) -> float:
    """Sum over tokens of log sum_k theta_dk phi_kw, using the model's own theta."""
    rows = {int(d): r for r, d in enumerate(model.doc_ids)}
    theta = np.empty((corpus.D, model.k))
    for pos, did in enumerate(corpus.doc_ids):
        r = rows.get(int(did))
        if r is None:
            if corpus.counts[pos].size:
                raise InputError(f"document {did} was not part of the fitted corpus")
            theta[pos] = 1.0 / model.k
        else:
            theta[pos] = model.theta[r]
    return _token_log_likelihood(theta, model.phi, corpus)


def top_terms(model: TopicModel, topic: int, n: int = 10) -> list:
    """The ``n`` highest-probability terms of ``topic`` as ``(term, phi)`` pairs.

    Ties are broken by term, lexicographically.
    """
    if not 0 <= topic < model.k:
        raise ParameterError(f"topic {topic} outside [0, {model.k})")
    if n > model.n_terms:
        warnings.warn(f"n={n} exceeds vocabulary size {model.n_terms}; truncating")
        n = model.n_terms
    row = model.phi[topic]
    order = top_indices(row, model.terms, n)
    return [(model.terms[i], float(row[i])) for i in order]


def top_indices(row: np.ndarray, terms, n: int) -> np.ndarray:
    order = np.lexsort((np.asarray(terms, dtype=object).astype(str), -row))
    return order[:n]


# -- model selection -------------------------------------------------------

def perplexity_sweep(corpus: BowCorpus, ks, alpha=None, eta: float = 0.01, iterations: int = 1000,
                     burn_in: int = 500, folds: int = 20, fold_in_iters: int = 50, seed: int = 0):
    """Cross-validated perplexity for each topic count in ``ks``.

    The non-empty documents are split into ``folds`` parts (5% each for 20
    folds); every fold is held out once and scored against a model trained
    on the rest. ``alpha=None`` uses 1/k.

    Returns a list of dicts with keys ``k, perplexity, log_perplexity,
    fold_perplexities``.
    """
    docs = corpus.nonempty()
    if docs.D < folds:
        raise InputError(f"need at least {folds} non-empty documents for {folds} folds")
    perm = np.random.Generator(np.random.PCG64(derive_seed(seed, "folds"))).permutation(docs.D)
    parts = np.array_split(perm, folds)
    rows = []
    for k in ks:
        params = LdaParams(k=k, alpha=(1.0 / k if alpha is None else alpha), eta=eta,
                           iterations=iterations, burn_in=burn_in, seed=derive_seed(seed, "fit", k))
        values = []
        for f, test_idx in enumerate(parts):
            train_idx = np.setdiff1d(perm, test_idx)
            model = fit(docs.subset(np.sort(train_idx)), params, check_every=0)
            values.append(perplexity(model, docs.subset(np.sort(test_idx)), fold_in_iters,
                                     seed=derive_seed(seed, "foldin", k, f)))
        values = np.array(values)
        rows.append({
            "k": int(k),
            "perplexity": float(values.mean()),
            "log_perplexity": float(np.log(values).mean()),
            "fold_perplexities": values.tolist(),
        })
        logger.info("k=%d perplexity %.3f", k, values.mean())
    return rows
