import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ldatrends import _gibbs
from ldatrends.errors import InputError, ParameterError
from ldatrends.lda import (EmptyDocumentWarning, GibbsState, LdaParams, TopicModel, conditional_distribution,
                           fit, infer, init_state, log_likelihood, perplexity, perplexity_sweep, sweep,
                           top_terms)
from ldatrends.textprep import BowCorpus, Vocabulary

from conftest import planted_overlap


def toy_state(n_dk, n_wk, n_k, lengths):
    return GibbsState(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.int64),
                      np.array(n_dk), np.array(n_wk), np.array(n_k), np.array(lengths), None)


class TestConditional:
    def test_symmetric_empty_counts(self):
        state = toy_state([[0, 0]], [[0, 0]], [0, 0], [0])
        p = conditional_distribution(state, LdaParams(2, 0.1, 0.01), 0, 0)
        np.testing.assert_allclose(p, [0.5, 0.5])

    def test_hand_example(self):
        # n_dk=(1,0), n_kw[.,w]=(1,0), n_k=(1,0), V=2, alpha=eta=1
        state = toy_state([[1, 0]], [[1, 0], [0, 0]], [1, 0], [1])
        p = conditional_distribution(state, LdaParams(2, 1.0, 1.0), 0, 0)
        expected = np.array([4 / 3, 1 / 2]) / (4 / 3 + 1 / 2)
        np.testing.assert_allclose(p, expected, rtol=1e-12)
        assert round(p[0], 3) == 0.727 and round(p[1], 3) == 0.273

    def test_large_alpha_tends_to_uniform(self):
        state = toy_state([[5, 0, 1]], [[3, 0, 1]], [3, 0, 1], [6])
        p = conditional_distribution(state, LdaParams(3, 1e9, 1.0), 0, 0)
        np.testing.assert_allclose(p, [1 / 3] * 3, atol=1e-3)


class TestParams:
    @pytest.mark.parametrize("kw", [dict(k=1), dict(alpha=0), dict(eta=-1), dict(burn_in=1000),
                                    dict(k=2.5)])
    def test_invalid(self, kw):
        base = dict(k=2, alpha=0.1, eta=0.1)
        base.update(kw)
        with pytest.raises(ParameterError):
            LdaParams(**base)


def small_corpus(seed=0, docs=30, v=12):
    rng = np.random.default_rng(seed)
    return BowCorpus.from_docs(
        [[(int(w), int(c)) for w, c in zip(rng.choice(v, 4, replace=False), rng.integers(1, 4, 4))]
         for _ in range(docs)], v)


def test_compiled_sweep_matches_python_twin():
    corpus = small_corpus()
    params = LdaParams(3, 0.3, 0.05, seed=11)
    a, b = init_state(corpus, params), init_state(corpus, params)
    for _ in range(5):
        u = a.rng.random(a.z.shape[0])
        b.rng.random(b.z.shape[0])
        v_eta = corpus.n_terms * params.eta
        _gibbs.gibbs_sweep(a.doc_of, a.word_of, a.z, a.n_dk, a.n_wk, a.n_k, 0.3, 0.05, v_eta, u)
        _gibbs.gibbs_sweep_py(b.doc_of, b.word_of, b.z, b.n_dk, b.n_wk, b.n_k, 0.3, 0.05, v_eta, u)
        assert np.array_equal(a.z, b.z) and np.array_equal(a.n_wk, b.n_wk)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 1000), st.integers(2, 6), st.floats(0.01, 2.0), st.floats(0.001, 1.0))
def test_counts_consistent_every_sweep(seed, k, alpha, eta):
    corpus = small_corpus(seed % 7)
    params = LdaParams(k, alpha, eta, iterations=10, burn_in=0, seed=seed)
    state = init_state(corpus, params)
    for _ in range(10):
        sweep(state, params)
        state.check()
    assert int(state.n_k.sum()) == corpus.n_tokens


def test_fit_deterministic_and_stochastic_rows():
    corpus = small_corpus()
    params = LdaParams(3, 0.5, 0.1, iterations=50, burn_in=10, seed=3)
    m1, m2 = fit(corpus, params, check_every=1), fit(corpus, params)
    assert m1.equals(m2)
    np.testing.assert_allclose(m1.phi.sum(axis=1), 1, atol=1e-9)
    np.testing.assert_allclose(m1.theta.sum(axis=1), 1, atol=1e-9)


def test_fit_errors():
    empty = BowCorpus.from_docs([[], []], 4)
    with pytest.raises(InputError):
        fit(empty, LdaParams(2, 0.1, 0.1, 10, 1))


def test_fit_skips_empty_documents():
    corpus = BowCorpus.from_docs([[(0, 2)], [], [(1, 1)]], 2)
    model = fit(corpus, LdaParams(2, 0.1, 0.1, 10, 1))
    assert model.doc_ids.tolist() == [0, 2]


@pytest.fixture(scope="module")
def planted_model(sample_bow):
    vocab, corpus = sample_bow
    return fit(corpus, LdaParams(5, 0.2, 0.01, 300, 150, seed=1), vocab=vocab, check_every=0)


def test_planted_recovery(planted_model, sample):
    assert (planted_overlap(planted_model, sample) >= 0.8).sum() >= 4


def test_infer_planted_topic(planted_model, sample):
    vocab = planted_model.vocab
    for t in range(5):
        doc = [(vocab.index(w), 3) for w in sample.planted_top(t, 10) if w in vocab]
        row = infer(planted_model, doc, seed=5)
        fitted = int(np.argmax(row))
        top = {w for w, _ in top_terms(planted_model, fitted, 10)}
        assert len(top & set(sample.planted_top(t, 10))) >= 8
        np.testing.assert_allclose(row.sum(), 1, atol=1e-9)
        assert np.array_equal(row, infer(planted_model, doc, seed=5))


def test_infer_empty_doc(planted_model):
    with pytest.warns(EmptyDocumentWarning):
        row = infer(planted_model, [])
    np.testing.assert_allclose(row, np.full(5, 0.2))


def uniform_model(k, v, d=1):
    return TopicModel(np.full((k, v), 1.0 / v), np.full((d, k), 1.0 / k), LdaParams(k, 0.1, 0.1),
                      np.arange(d))


def test_perplexity_uniform_phi_is_V():
    heldout = small_corpus(3, docs=10, v=12)
    assert abs(perplexity(uniform_model(3, 12), heldout) - 12) < 1e-6


def test_degenerate_model():
    phi = np.array([[1.0, 0.0], [0.0, 1.0]])
    theta = np.array([[1.0, 0.0]])
    model = TopicModel(phi, theta, LdaParams(2, 1e-9, 0.1), np.array([0]))
    corpus = BowCorpus.from_docs([[(0, 4)]], 2)
    assert log_likelihood(model, corpus) == 0.0
    assert perplexity(model, corpus, fold_in_iters=5) == pytest.approx(1.0, abs=1e-6)


def test_log_likelihood_uniform():
    corpus = small_corpus(docs=4)
    ll = log_likelihood(uniform_model(2, 12, 4), corpus)
    assert ll == pytest.approx(corpus.n_tokens * math.log(1 / 12))


def test_log_likelihood_trained_beats_initial():
    corpus = small_corpus(docs=40)
    wins = 0
    for seed in range(5):
        trained = fit(corpus, LdaParams(3, 0.1, 0.01, 100, 50, seed))
        start = fit(corpus, LdaParams(3, 0.1, 0.01, 1, 0, seed))
        wins += log_likelihood(trained, corpus) >= log_likelihood(start, corpus)
        assert log_likelihood(trained, corpus) <= 0
    assert wins == 5


def test_top_terms():
    vocab = Vocabulary(("a", "b", "c"), (1, 1, 1))
    model = TopicModel(np.array([[0.5, 0.3, 0.2]]), np.ones((1, 1)), LdaParams(2, 0.1, 0.1),
                       np.arange(1), vocab)
    assert top_terms(model, 0, 2) == [("a", 0.5), ("b", 0.3)]
    vocab = Vocabulary(("beta", "alpha", "gamma"), (1, 1, 1))
    model = TopicModel(np.array([[0.4, 0.4, 0.2]]), np.ones((1, 1)), LdaParams(2, 0.1, 0.1),
                       np.arange(1), vocab)
    assert [t for t, _ in top_terms(model, 0, 2)] == ["alpha", "beta"]
    with pytest.warns(UserWarning):
        assert len(top_terms(model, 0, 10)) == 3
    with pytest.raises(ParameterError):
        top_terms(model, 1, 2)


def test_perplexity_sweep_columns(sample_bow):
    _, corpus = sample_bow
    rows = perplexity_sweep(corpus, [2, 5], iterations=60, burn_in=30, folds=4, seed=1)
    assert [r["k"] for r in rows] == [2, 5]
    for r in rows:
        assert r["log_perplexity"] == pytest.approx(np.mean(np.log(r["fold_perplexities"])))
        assert len(r["fold_perplexities"]) == 4
