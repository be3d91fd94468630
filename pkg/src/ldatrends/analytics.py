"""Downstream studies over a fitted topic model.

Every function works on the record list plus a ``theta`` matrix aligned to
it (one row per record, NaN rows for records that were not modeled; see
:func:`align_theta`). Papers are assigned to their dominant topic.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError
from .lda import LdaParams, TopicModel, fit
from .stability import match_topics_by_terms
from .stats import CompareConfig, compare
from .seeding import derive_seed
from .textprep import PrepConfig, prepare_with


def dominant_topic(theta_row) -> int:
    """Index of the largest entry; the lowest index wins ties."""
    return int(np.argmax(np.asarray(theta_row)))


def align_theta(model: TopicModel, n_records: int) -> np.ndarray:
    """Expand model theta to one row per record (NaN where not modeled)."""
    out = np.full((n_records, model.k), np.nan)
    out[model.doc_ids] = model.theta
    return out


def dominant_topics(theta: np.ndarray) -> np.ndarray:
    """Dominant topic per row, -1 for unmodeled (NaN) rows."""
    theta = np.asarray(theta, dtype=float)
    modeled = ~np.isnan(theta).any(axis=1)
    out = np.full(theta.shape[0], -1, dtype=np.int64)
    out[modeled] = np.argmax(theta[modeled], axis=1)
    return out


def topic_frequencies(theta) -> np.ndarray:
    """Fraction of modeled papers whose dominant topic is each topic."""
    dom = dominant_topics(theta)
    counts = np.bincount(dom[dom >= 0], minlength=np.asarray(theta).shape[1])
    return counts / max(counts.sum(), 1)


def topic_coverage(theta) -> dict:
    """Topics ranked by paper share, with the cumulative share covered."""
    freq = topic_frequencies(theta)
    order = sorted(range(len(freq)), key=lambda t: (-freq[t], t))
    return {
        "order": order,
        "share": [float(freq[t]) for t in order],
        "cumulative": np.cumsum([freq[t] for t in order]).tolist(),
    }


# -- venues ----------------------------------------------------------------

@dataclass
class VenueTopicMatrix:
    venues: list
    matrix: np.ndarray
    n_papers: list
    excluded: list = field(default_factory=list)
    mode: str = "dominant"


def venue_topic_matrix(records, theta, venue_map=None, mode: str = "dominant") -> VenueTopicMatrix:
    """Per venue, the share of its modeled papers in each topic.

    ``mode="fractional"`` sums theta mass instead of counting dominant
    topics. Venues without modeled papers are listed in ``excluded``.
    ``venue_map`` (venue id -> VenueInfo) only restricts/extends the set of
    venues reported.
    """
    theta = np.asarray(theta, dtype=float)
    k = theta.shape[1]
    dom = dominant_topics(theta)
    sums = defaultdict(lambda: np.zeros(k))
    for i, rec in enumerate(records):
        if dom[i] < 0:
            sums.setdefault(rec.venue_id, np.zeros(k))
            continue
        if mode == "fractional":
            sums[rec.venue_id] += theta[i]
        else:
            sums[rec.venue_id][dom[i]] += 1
    names = sorted(set(sums) | set(venue_map or ()))
    venues, rows, n_papers, excluded = [], [], [], []
    for v in names:
        total = sums[v].sum() if v in sums else 0.0
        if total <= 0:
            excluded.append(v)
            continue
        venues.append(v)
        rows.append(sums[v] / total)
        n_papers.append(int(sum(1 for i, r in enumerate(records) if r.venue_id == v and dom[i] >= 0)))
    return VenueTopicMatrix(venues, np.array(rows).reshape(len(rows), k), n_papers, excluded, mode)


@dataclass(frozen=True)
class DendrogramNode:
    members: tuple
    height: float = 0.0
    children: tuple = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": self.members[0]}
        return {
            "height": round(self.height, 6),
            "members": list(self.members),
            "children": [c.to_dict() for c in self.children],
        }

    def leaves(self) -> list:
        if self.is_leaf:
            return [self.members[0]]
        return [leaf for c in self.children for leaf in c.leaves()]

    def cut(self, height: float) -> list:
        """Clusters (member tuples) obtained by cutting the tree at ``height``."""
        if self.is_leaf or self.height <= height:
            return [self.members]
        return [m for c in self.children for m in c.cut(height)]


def _node(a: DendrogramNode, b: DendrogramNode, height: float) -> DendrogramNode:
    first, second = sorted((a, b), key=lambda n: n.members)
    return DendrogramNode(tuple(sorted(a.members + b.members)), float(height), (first, second))


def hcluster(matrix, labels: Optional[Sequence] = None) -> DendrogramNode:
    """Complete-linkage agglomerative clustering with Euclidean distance.

    The cluster distance is the largest point-to-point distance between the
    two clusters. Among equally close pairs, the pair with the
    lexicographically smallest (sorted) member lists merges first; children
    are ordered by member list, so the tree does not depend on row order.
    """
    if isinstance(matrix, VenueTopicMatrix):
        labels = matrix.venues if labels is None else labels
        matrix = matrix.matrix
    x = np.asarray(matrix, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if labels is None:
        labels = [str(i) for i in range(x.shape[0])]
    if x.shape[0] < 2:
        raise InputError("clustering needs at least two rows")
    if len(set(labels)) != len(labels):
        raise InputError("duplicate labels")
    dist = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=-1))
    pos = {lab: i for i, lab in enumerate(labels)}
    nodes = [DendrogramNode((lab,)) for lab in labels]

    def linkage(a, b):
        ia = [pos[m] for m in a.members]
        ib = [pos[m] for m in b.members]
        return float(dist[np.ix_(ia, ib)].max())

    while len(nodes) > 1:
        nodes.sort(key=lambda n: n.members)
        best = None
        for i in range(len(nodes)):
            for j in range(i + 1, len(nodes)):
                key = (linkage(nodes[i], nodes[j]), nodes[i].members, nodes[j].members)
                if best is None or key < best[0]:
                    best = (key, i, j)
        (h, _, _), i, j = best
        merged = _node(nodes[i], nodes[j], h)
        nodes = [n for t, n in enumerate(nodes) if t not in (i, j)] + [merged]
    return nodes[0]


def sibling_groups(tree: DendrogramNode) -> dict:
    """For each leaf, the members of the smallest cluster containing it and another leaf."""
    out = {}

    def walk(node):
        if node.is_leaf:
            return
        for child in node.children:
            if child.is_leaf:
                out.setdefault(child.members[0], node.members)
            walk(child)

    walk(tree)
    return out


# -- time ------------------------------------------------------------------

@dataclass
class TrendSeries:
    years: list
    fractions: np.ndarray  # len(years) x k
    counts: list
    stack_order: list
    venue_type: Optional[str] = None

    def rows(self):
        """``(year, topic, fraction)`` in stack order, most popular topic first."""
        for y, row in zip(self.years, self.fractions):
            for t in self.stack_order:
                yield y, t, float(row[t])


def topic_evolution(records, theta, venue_type: Optional[str] = None,
                    year_range=(1992, 2016)) -> TrendSeries:
    """Per-year share of papers by dominant topic, optionally for one venue type."""
    y0, y1 = year_range
    if y0 > y1:
        raise InputError(f"empty year range {year_range}")
    theta = np.asarray(theta, dtype=float)
    k = theta.shape[1]
    dom = dominant_topics(theta)
    per_year = defaultdict(lambda: np.zeros(k))
    for i, rec in enumerate(records):
        if dom[i] < 0 or not y0 <= rec.year <= y1:
            continue
        if venue_type is not None and rec.venue_type != venue_type:
            continue
        per_year[rec.year][dom[i]] += 1
    years = sorted(per_year)
    counts = np.array([per_year[y] for y in years]).reshape(len(years), k)
    totals = counts.sum(axis=0)
    order = sorted(range(k), key=lambda t: (-totals[t], t))
    fractions = counts / counts.sum(axis=1, keepdims=True) if years else counts
    return TrendSeries(years, fractions, [int(c) for c in counts.sum(axis=1)], order, venue_type)


# -- authors ---------------------------------------------------------------

def author_coverage(authors, theta) -> dict:
    """Number of distinct dominant topics across each author's modeled papers."""
    dom = dominant_topics(theta)
    out = {}
    for name, author in authors.items():
        topics = {int(dom[p]) for p in author.paper_ids if dom[p] >= 0}
        if topics:
            out[name] = len(topics)
    return out


def top_cohort(authors, percent: float) -> list:
    """Authors in the top ``percent`` % by total citations; ties at the cut are included."""
    ranked = sorted(authors.values(), key=lambda a: (-a.total_citations, a.name))
    if not ranked:
        return []
    n = max(1, math.ceil(len(ranked) * percent / 100.0))
    cutoff = ranked[n - 1].total_citations
    return [a.name for a in ranked if a.total_citations >= cutoff]


def author_breadth(records, theta, authors, percentiles=(1, 10, 20)) -> dict:
    """Histogram of topic coverage x in [1, k] for all authors and top cohorts.

    Returns ``{cohort_label: counts}`` where ``counts[x - 1]`` is the
    number of authors covering exactly ``x`` topics.
    """
    k = np.asarray(theta).shape[1]
    cover = author_coverage(authors, theta)
    cohorts = {"all": list(authors)}
    for p in percentiles:
        cohorts[f"top{p:g}%"] = top_cohort(authors, p)
    out = {}
    for label, names in cohorts.items():
        hist = np.zeros(k, dtype=np.int64)
        for name in names:
            if name in cover:
                hist[cover[name] - 1] += 1
        out[label] = hist
    return out


@dataclass
class GenderReport:
    w0: float
    by_year: dict
    w1_at: dict
    resolved: int
    unknown: int

    def to_dict(self):
        return {
            "W0": round(self.w0, 6),
            "resolved_authors": self.resolved,
            "unknown_authors": self.unknown,
            "by_year": {str(y): round(v, 6) for y, v in sorted(self.by_year.items())},
            "W1_at": {str(n): (None if v is None else round(v, 6)) for n, v in sorted(self.w1_at.items())},
        }


def _female_share(genders) -> Optional[float]:
    c = Counter(genders)
    known = c["female"] + c["male"]
    return c["female"] / known if known else None


def gender_report(authors, records, top_ns=(10, 20, 50, 100, 1000)) -> GenderReport:
    """Female share among gender-resolved authors: overall, per year, among the top cited.

    ``W1_at[N]`` ranks all authors by total citations (ties by name), keeps
    the top N, and reports the female share among the resolved ones.
    """
    genders = {a.name: a.gender for a in authors.values()}
    w0 = _female_share(genders.values())
    if w0 is None:
        raise InputError("no author has a resolved gender")
    year_authors = defaultdict(set)
    for rec in records:
        year_authors[rec.year].update(rec.authors)
    by_year = {}
    for y, names in year_authors.items():
        share = _female_share(genders.get(n, "unknown") for n in names)
        if share is not None:
            by_year[y] = share
    ranked = sorted(authors.values(), key=lambda a: (-a.total_citations, a.name))
    w1 = {int(n): _female_share(a.gender for a in ranked[:n]) for n in top_ns}
    unknown = sum(1 for g in genders.values() if g == "unknown")
    return GenderReport(w0, by_year, w1, len(genders) - unknown, unknown)


# -- citations -------------------------------------------------------------

def cites_per_year(record, reference_year: int) -> float:
    return record.citation_count / max(1, reference_year - record.year)


def med_iqr(values) -> tuple:
    """Median and 75th-25th percentile spread, linear interpolation."""
    q25, q50, q75 = np.quantile(np.asarray(values, dtype=float), [0.25, 0.5, 0.75])
    return float(q50), float(q75 - q25)


@dataclass
class CitationStats:
    rows: list
    included: int
    excluded: int
    config: dict = field(default_factory=dict)


def cites_per_year_stats(records, reference_year: int = 2017, cfg: CompareConfig = CompareConfig()) -> CitationStats:
    """Median/IQR of citations per year by publication year and venue type.

    Each year's conference and journal samples are compared with
    :func:`ldatrends.stats.compare`; papers without a citation count are
    excluded and counted.
    """
    samples = defaultdict(lambda: {"conference": [], "journal": []})
    excluded = 0
    for rec in records:
        if rec.citation_count is None:
            excluded += 1
            continue
        samples[rec.year][rec.venue_type].append(cites_per_year(rec, reference_year))
    rows = []
    for year in sorted(samples):
        conf, jour = samples[year]["conference"], samples[year]["journal"]
        row = {"year": year}
        for label, vals in (("conference", conf), ("journal", jour), ("all", conf + jour)):
            med, iqr = med_iqr(vals) if vals else (None, None)
            row[label] = {"n": len(vals), "median": med, "iqr": iqr}
        if conf and jour:
            year_cfg = CompareConfig(cfg.resamples, cfg.level, cfg.a12_threshold,
                                     derive_seed(cfg.seed, "cites", year))
            row["compare"] = compare(conf, jour, year_cfg).to_dict()
        else:
            row["compare"] = None
        rows.append(row)
    return CitationStats(rows, len(records) - excluded, excluded, cfg.to_dict())


def top_cited_per_topic(records, theta, n: int = 1, since_year: Optional[int] = None) -> dict:
    """Per topic, indices of the ``n`` most cited papers with that dominant topic.

    Ties rank the earlier paper first, then by title.
    """
    dom = dominant_topics(theta)
    k = np.asarray(theta).shape[1]
    out = {t: [] for t in range(k)}
    for i, rec in enumerate(records):
        if dom[i] < 0 or rec.citation_count is None:
            continue
        if since_year is not None and rec.year < since_year:
            continue
        out[int(dom[i])].append(i)
    for t in out:
        out[t].sort(key=lambda i: (-records[i].citation_count, records[i].year, records[i].title))
        out[t] = out[t][:n]
    return out


# -- robustness ------------------------------------------------------------

@dataclass
class ModelRun:
    records: list
    vocab: object
    corpus: object
    model: TopicModel
    theta: np.ndarray
    matrix: VenueTopicMatrix
    tree: Optional[DendrogramNode]


def model_records(records, prep: PrepConfig, params: LdaParams) -> ModelRun:
    """textprep + fit + venue-topic matrix + clustering on ``records``."""
    vocab, corpus = prepare_with([r.text for r in records], prep)
    model = fit(corpus, params, vocab=vocab, check_every=0)
    theta = align_theta(model, len(records))
    matrix = venue_topic_matrix(records, theta)
    tree = hcluster(matrix) if len(matrix.venues) >= 2 else None
    return ModelRun(records, vocab, corpus, model, theta, matrix, tree)


@dataclass
class RemovalReport:
    removed: list
    pairs: list  # (topic_before, topic_after, matched_overlap)
    best_overlap: list  # per topic_before, max overlap against any after-topic
    cluster_changes: dict
    before: ModelRun = field(repr=False)
    after: ModelRun = field(repr=False)
    n: int = 10

    def to_dict(self):
        return {
            "removed": list(self.removed),
            "topics_before": _top_term_sets(self.before.model, self.n),
            "topics_after": _top_term_sets(self.after.model, self.n),
            "matching": [[a, b, round(o, 6)] for a, b, o in self.pairs],
            "best_overlap": [round(v, 6) for v in self.best_overlap],
            "cluster_changes": self.cluster_changes,
        }


def venue_removal_experiment(records, venue_ids_to_remove, prep: PrepConfig, params: LdaParams,
                             n: int = 10, before: Optional[ModelRun] = None) -> RemovalReport:
    """Refit on the corpus without some venues and compare topics and clusters.

    Topics are compared by their top-``n`` terms as strings, since the two
    runs build separate vocabularies.
    """
    removed = set(venue_ids_to_remove)
    reduced = [r for r in records if r.venue_id not in removed]
    if not reduced:
        raise InputError("removing these venues leaves no records")
    if before is None:
        before = model_records(records, prep, params)
    after = model_records(reduced, prep, params)
    matching = match_topics_by_terms(before.model, after.model, n)
    terms_b = [set(t) for t in _top_term_sets(before.model, n)]
    terms_a = [set(t) for t in _top_term_sets(after.model, n)]
    best = [max(len(tb & ta) / n for ta in terms_a) for tb in terms_b]
    changes = {}
    if before.tree is not None and after.tree is not None:
        sib_b, sib_a = sibling_groups(before.tree), sibling_groups(after.tree)
        for v in after.matrix.venues:
            was = [m for m in sib_b.get(v, ()) if m not in removed]
            now = list(sib_a.get(v, ()))
            if was != now:
                changes[v] = {"before": was, "after": now}
    return RemovalReport(sorted(removed), list(matching.pairs), best, changes, before, after, n)


def _top_term_sets(model: TopicModel, n: int):
    from .stability import top_sets

    terms = model.terms
    return [[terms[i] for i in s] for s in top_sets(model, n)]
