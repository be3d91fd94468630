"""Topic stability under input-order shuffling.

Models fitted on differently shuffled copies of one corpus are compared
topic by topic: each topic of one run is paired with a topic of the other
and scored by the fraction of shared terms among their top ``n`` terms.
The raw score aggregates these overlaps into a single number in [0, 1]
that the tuner maximizes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InputError, ParameterError
from .lda import LdaParams, TopicModel, fit
from .seeding import derive_seed
from .textprep import BowCorpus, shuffle

logger = logging.getLogger(__name__)

DEFAULT_N_SET = tuple(range(1, 10))


@dataclass(frozen=True)
class StabilityConfig:
    """How the stability objective is computed.

    ``iterations``/``burn_in`` override the sweep counts of the fitted
    models (tuning runs many fits, so they are usually cheaper than the
    final fit).
    """

    m_shuffles: int = 5
    n: int = 10
    n_set: tuple = DEFAULT_N_SET
    pairing: str = "consecutive"
    matching: str = "greedy"
    iterations: int = 1000
    burn_in: int = 500
    vary_fit_seed: bool = False

    def __post_init__(self):
        if self.m_shuffles < 2:
            raise ParameterError("m_shuffles must be >= 2")
        if not self.n_set:
            raise ParameterError("n_set must not be empty")
        if self.pairing not in ("consecutive", "all"):
            raise ParameterError(f"unknown pairing {self.pairing!r}")
        if self.matching not in ("greedy", "optimal"):
            raise ParameterError(f"unknown matching {self.matching!r}")
        object.__setattr__(self, "n_set", tuple(int(v) for v in self.n_set))

    def to_dict(self):
        return {
            "m_shuffles": self.m_shuffles,
            "n": self.n,
            "n_set": list(self.n_set),
            "pairing": self.pairing,
            "matching": self.matching,
            "iterations": self.iterations,
            "burn_in": self.burn_in,
            "vary_fit_seed": self.vary_fit_seed,
            "raw_score": "mean over n in n_set and run pairs of the median matched overlap",
        }


@dataclass(frozen=True)
class TopicMatching:
    pairs: tuple  # (topic_a, topic_b, overlap)
    method: str = "greedy"

    @property
    def overlaps(self) -> np.ndarray:
        return np.array([p[2] for p in self.pairs])


@dataclass
class StabilityReport:
    matchings: list
    overlaps: np.ndarray
    median_overlap: float
    min_overlap: float
    max_overlap: float
    raw_score: float
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "raw_score": round(self.raw_score, 6),
            "median_overlap": round(self.median_overlap, 6),
            "min_overlap": round(self.min_overlap, 6),
            "max_overlap": round(self.max_overlap, 6),
            "sorted_overlaps": [round(float(v), 6) for v in np.sort(self.overlaps)[::-1]],
            "pairs": [
                {"runs": list(runs), "matching": [[a, b, round(o, 6)] for a, b, o in m.pairs]}
                for runs, m in self.matchings
            ],
        }


def _term_ranks(model: TopicModel) -> np.ndarray:
    terms = np.asarray(model.terms, dtype=str)
    ranks = np.empty(len(terms), dtype=np.int64)
    ranks[np.argsort(terms, kind="stable")] = np.arange(len(terms))
    return ranks


def top_sets(model: TopicModel, n: int) -> list:
    """Top-``n`` term-index sets per topic, ties broken by term."""
    n = min(n, model.n_terms)
    ranks = _term_ranks(model)
    return [frozenset(np.lexsort((ranks, -row))[:n].tolist()) for row in model.phi]


def overlap_matrix(sets_a, sets_b, n: int) -> np.ndarray:
    return np.array([[len(a & b) / n for b in sets_b] for a in sets_a])


def _match_sets(sets_a, sets_b, n: int, method: str, terms) -> TopicMatching:
    def ranks(sets):
        return _content_rank([tuple(sorted(terms[i] for i in s)) for s in sets])

    return match_overlaps(overlap_matrix(sets_a, sets_b, n), method, ranks(sets_a), ranks(sets_b))


def _content_rank(keys) -> np.ndarray:
    """Dense rank of each key; equal keys share a rank."""
    distinct = sorted(set(keys))
    pos = {k: i for i, k in enumerate(distinct)}
    return np.array([pos[k] for k in keys], dtype=np.int64)


def match_overlaps(ov: np.ndarray, method: str = "greedy", rank_a=None, rank_b=None) -> TopicMatching:
    """Pair rows with columns of an overlap matrix.

    Greedy matching repeatedly takes the globally largest remaining entry.
    Equal entries are ordered by ``rank_a``/``rank_b`` (content ranks of the
    topics, so the result does not depend on topic labels) and then by the
    lowest (row, column) pair.
    """
    ka, kb = ov.shape
    if method == "optimal":
        rows, cols = linear_sum_assignment(-ov)
        pairs = sorted((int(r), int(c), float(ov[r, c])) for r, c in zip(rows, cols))
        return TopicMatching(tuple(pairs), method)
    rows, cols = np.repeat(np.arange(ka), kb), np.tile(np.arange(kb), ka)
    ra = rows if rank_a is None else np.asarray(rank_a)[rows]
    rb = cols if rank_b is None else np.asarray(rank_b)[cols]
    # flat order: descending overlap, content ranks, then row, then column
    order = np.lexsort((cols, rows, rb, ra, -ov.ravel()))
    used_a, used_b, pairs = set(), set(), []
    for flat in order:
        a, b = divmod(int(flat), kb)
        if a in used_a or b in used_b:
            continue
        used_a.add(a)
        used_b.add(b)
        pairs.append((a, b, float(ov[a, b])))
        if len(pairs) == min(ka, kb):
            break
    return TopicMatching(tuple(sorted(pairs)), "greedy")


def _check_compatible(a: TopicModel, b: TopicModel):
    if a.n_terms != b.n_terms or a.vocab_hash != b.vocab_hash:
        raise InputError("models were fitted on different vocabularies")
    if a.k != b.k:
        raise InputError(f"models have different topic counts ({a.k} vs {b.k})")


def match_topics(model_a: TopicModel, model_b: TopicModel, n: int = 10, method: str = "greedy") -> TopicMatching:
    """Pair each topic of ``model_a`` with one of ``model_b`` by top-``n`` overlap."""
    _check_compatible(model_a, model_b)
    n_eff = min(n, model_a.n_terms)
    return _match_sets(top_sets(model_a, n_eff), top_sets(model_b, n_eff), n_eff, method, model_a.terms)


def match_topics_by_terms(model_a: TopicModel, model_b: TopicModel, n: int = 10,
                          method: str = "greedy") -> TopicMatching:
    """Like :func:`match_topics` but for models over different vocabularies.

    Each model's top-``n`` terms are taken within its own vocabulary and
    compared as strings, so a topic whose terms vanished from the other
    corpus scores zero.
    """
    def term_sets(model):
        terms = model.terms
        return [frozenset(terms[i] for i in s) for s in top_sets(model, n)]

    sets_a, sets_b = term_sets(model_a), term_sets(model_b)
    rank_a = _content_rank([tuple(sorted(s)) for s in sets_a])
    rank_b = _content_rank([tuple(sorted(s)) for s in sets_b])
    return match_overlaps(overlap_matrix(sets_a, sets_b, n), method, rank_a, rank_b)


def run_pairs(m: int, pairing: str = "consecutive") -> list:
    if pairing == "all":
        return [(i, j) for i in range(m) for j in range(i + 1, m)]
    return [(i, i + 1) for i in range(m - 1)]


def raw_score(models: Sequence[TopicModel], n_set=DEFAULT_N_SET, pairing: str = "consecutive",
              method: str = "greedy") -> float:
    """Mean over ``n`` in ``n_set`` and over run pairs of the median matched overlap."""
    if not n_set:
        raise ParameterError("n_set must not be empty")
    if len(models) < 2:
        raise ParameterError("raw_score needs at least two models")
    for other in models[1:]:
        _check_compatible(models[0], other)
    cache = {}

    def sets(i, n):
        if (i, n) not in cache:
            cache[i, n] = top_sets(models[i], n)
        return cache[i, n]

    medians = []
    for n in n_set:
        n_eff = min(n, models[0].n_terms)
        for i, j in run_pairs(len(models), pairing):
            m = _match_sets(sets(i, n_eff), sets(j, n_eff), n_eff, method, models[0].terms)
            medians.append(float(np.median(m.overlaps)))
    return float(np.mean(medians))


def shuffled_fits(corpus: BowCorpus, params: LdaParams, m_shuffles: int, seed: int,
                  vocab=None, vary_fit_seed: bool = False) -> list:
    """Fit one model per shuffled ordering of ``corpus``.

    Shuffle ``i`` uses ``derive_seed(seed, "shuffle", i)``. The sampler seed
    stays ``params.seed`` unless ``vary_fit_seed`` is set, so by default only
    the input order differs between runs.
    """
    models = []
    for i in range(m_shuffles):
        order_seed = derive_seed(seed, "shuffle", i)
        run_params = params
        if vary_fit_seed:
            run_params = LdaParams(params.k, params.alpha, params.eta, params.iterations,
                                   params.burn_in, derive_seed(seed, "fit", i))
        models.append(fit(shuffle(corpus, order_seed), run_params, vocab=vocab, check_every=0))
    return models


def stability_report(models, n: int = 10, n_set=DEFAULT_N_SET, pairing: str = "consecutive",
                     method: str = "greedy", config=None) -> StabilityReport:
    matchings = [
        ((i, j), match_topics(models[i], models[j], n, method))
        for i, j in run_pairs(len(models), pairing)
    ]
    overlaps = np.concatenate([m.overlaps for _, m in matchings])
    return StabilityReport(
        matchings=matchings,
        overlaps=overlaps,
        median_overlap=float(np.median(overlaps)),
        min_overlap=float(overlaps.min()),
        max_overlap=float(overlaps.max()),
        raw_score=raw_score(models, n_set, pairing, method),
        config=dict(config or {}),
    )


def overlap_curve(corpus: BowCorpus, params: LdaParams, m_shuffles: int = 20, n: int = 10, seed: int = 0,
                  n_set=DEFAULT_N_SET, pairing: str = "consecutive", method: str = "greedy",
                  vocab=None, vary_fit_seed: bool = False) -> StabilityReport:
    """Fit ``m_shuffles`` shuffled runs and summarize their top-``n`` overlaps."""
    if m_shuffles < 2:
        raise ParameterError("m_shuffles must be >= 2")
    models = shuffled_fits(corpus, params, m_shuffles, seed, vocab, vary_fit_seed)
    config = {"params": params.to_dict(), "m_shuffles": m_shuffles, "n": n, "n_set": list(n_set),
              "pairing": pairing, "matching": method, "seed": seed, "vary_fit_seed": vary_fit_seed}
    return stability_report(models, n, n_set, pairing, method, config)


def candidate_models(corpus: BowCorpus, candidate, cfg: StabilityConfig, seed: int, vocab=None) -> list:
    """The shuffled fits used to score ``candidate`` (anything with k/alpha/eta)."""
    params = LdaParams(candidate.k, candidate.alpha, candidate.eta, cfg.iterations, cfg.burn_in,
                       derive_seed(seed, "objective-fit"))
    return shuffled_fits(corpus, params, cfg.m_shuffles, seed, vocab, cfg.vary_fit_seed)


def candidate_report(corpus: BowCorpus, candidate, cfg: StabilityConfig, seed: int, vocab=None) -> StabilityReport:
    """Full stability report for ``candidate`` on the tuner's shuffle set."""
    models = candidate_models(corpus, candidate, cfg, seed, vocab)
    config = dict(cfg.to_dict(), seed=seed, params=models[0].params.to_dict())
    return stability_report(models, cfg.n, cfg.n_set, cfg.pairing, cfg.matching, config)


def stability_objective(corpus: BowCorpus, cfg: StabilityConfig, seed: int, vocab=None):
    """Build ``candidate -> raw score`` for the tuner.

    Every candidate is evaluated on the same shuffle set with the same
    sampler seed, so scores are comparable and deterministic.
    """
    def objective(candidate) -> float:
        models = candidate_models(corpus, candidate, cfg, seed, vocab)
        return raw_score(models, cfg.n_set, cfg.pairing, cfg.matching)

    return objective
