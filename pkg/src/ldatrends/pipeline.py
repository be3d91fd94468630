"""Config-driven orchestration of the whole study.

Stages read and write plain files in one output directory::

    ingest   -> records.jsonl, authors.tsv, ingest_report.json
    prep     -> vocabulary.tsv, corpus.jsonl, prep_report.json
    tune     -> tune_result.json, tuning_log.jsonl
    fit      -> model.ldat, topics.tsv, topic_summary.tsv, perplexity_sweep.tsv
    stability-> stability.json, stability_overlaps.tsv
    cluster  -> heatmap.tsv, dendrogram.json, venue_groups.tsv
    trends   -> trends_conference.tsv, trends_journal.tsv, trends_all.tsv
    authors  -> breadth.tsv
    gender   -> gender.json
    cites    -> cites_per_year.json, cites_per_year.tsv, top_papers.tsv
    removal  -> removal.json

A stage whose inputs and settings are unchanged since its last successful
run is skipped unless ``force`` is set (fingerprints live in ``.stamps/``).
Every run ends by atomically writing ``manifest.json``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .analytics import (align_theta, author_breadth, cites_per_year_stats, gender_report, hcluster,
                        model_records, sibling_groups, top_cited_per_topic, topic_coverage,
                        topic_evolution, venue_removal_experiment, venue_topic_matrix)
from .errors import ConfigurationError, StageError
from .ingest import (AuthorRecord, CrossrefClient, RecordSchema, TableCitationClient, build_authors,
                     bundled_venue_table, enrich_citations, load_gender_table, load_venue_table,
                     merge_abstracts, parse_records, read_records, serialize_records)
from .lda import LdaParams, fit, perplexity_sweep, top_terms
from .persist import atomic_write, load_model, save_model
from .seeding import derive_seed
from .stability import StabilityConfig, candidate_report
from .stats import CompareConfig
from .textprep import BowCorpus, PrepConfig, Vocabulary, prepare_with
from .tuner import Bounds, CandidateVector, DeConfig, default_candidate, ldade

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger(__name__)

STAGES = ("ingest", "prep", "tune", "fit", "stability", "cluster", "trends", "authors", "gender",
          "cites", "removal")


# -- configuration ---------------------------------------------------------

@dataclass(frozen=True)
class PathsConfig:
    records: str = ""
    abstracts: str = ""
    citations: str = ""
    crossref_url: str = ""
    venues: str = ""
    genders: str = ""
    output: str = "ldatrends-out"


@dataclass(frozen=True)
class IngestConfig:
    year_min: int = 1992
    year_max: int = 2016
    gender_threshold: float = 0.9
    retries: int = 2


@dataclass(frozen=True)
class LdaConfig:
    k: int = 20
    alpha: float = 0.05
    eta: float = 0.01
    iterations: int = 1000
    burn_in: int = 500
    use_tuned: bool = True


@dataclass(frozen=True)
class TuneConfig:
    np: int = 10
    generations: int = 3
    cr: float = 0.3
    f: float = 0.7
    forced: str = "parent"
    k_bounds: tuple = (2, 50)
    alpha_bounds: tuple = (0.001, 1.0)
    eta_bounds: tuple = (0.001, 1.0)
    default_k: int = 20
    default_eta: float = 0.01

    def de(self, seed: int) -> DeConfig:
        bounds = Bounds(tuple(self.k_bounds), tuple(self.alpha_bounds), tuple(self.eta_bounds))
        return DeConfig(self.np, self.generations, self.cr, self.f, bounds, seed, self.forced)

    def default(self, seed: int = 0) -> CandidateVector:
        return default_candidate(self.de(seed).bounds, self.default_k, self.default_eta)


@dataclass(frozen=True)
class StabilitySection:
    m_shuffles: int = 20
    n: int = 10
    n_set: tuple = tuple(range(1, 10))
    pairing: str = "consecutive"
    matching: str = "greedy"
    iterations: int = 200
    burn_in: int = 100

    def config(self) -> StabilityConfig:
        return StabilityConfig(self.m_shuffles, self.n, tuple(self.n_set), self.pairing, self.matching,
                               self.iterations, self.burn_in)


@dataclass(frozen=True)
class PerplexityConfig:
    ks: tuple = (2, 5, 10, 20)
    folds: int = 20
    iterations: int = 200
    burn_in: int = 100
    fold_in_iters: int = 50


@dataclass(frozen=True)
class AnalyticsConfig:
    reference_year: int = 2017
    top_ns: tuple = (10, 20, 50, 100, 1000)
    percentiles: tuple = (1, 10, 20)
    venue_matrix: str = "dominant"
    cluster_years: tuple = ()
    top_papers_since: tuple = (2009,)
    removal_venues: tuple = ()
    removal_n: int = 10
    resamples: int = 10000
    level: float = 0.95
    a12_threshold: float = 0.06


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    paths: PathsConfig = field(default_factory=PathsConfig)
    ingest: IngestConfig = field(default_factory=IngestConfig)
    prep: PrepConfig = field(default_factory=PrepConfig)
    lda: LdaConfig = field(default_factory=LdaConfig)
    tune: TuneConfig = field(default_factory=TuneConfig)
    stability: StabilitySection = field(default_factory=StabilitySection)
    perplexity: PerplexityConfig = field(default_factory=PerplexityConfig)
    analytics: AnalyticsConfig = field(default_factory=AnalyticsConfig)

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    def hash(self) -> str:
        """Digest of every setting except the output directory."""
        d = self.to_dict()
        d["paths"].pop("output")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()

    def with_overrides(self, seed: Optional[int] = None, output: Optional[str] = None) -> "PipelineConfig":
        cfg = self
        if seed is not None:
            cfg = dataclasses.replace(cfg, seed=int(seed))
        if output is not None:
            cfg = dataclasses.replace(cfg, paths=dataclasses.replace(cfg.paths, output=str(output)))
        return cfg


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _build(cls, data: dict, where: str):
    """Instantiate dataclass ``cls`` from ``data``, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigurationError(f"[{where}] must be a table")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigurationError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        default = getattr(cls(), name) if name in fields else None
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value, name)
        elif isinstance(default, tuple):
            if not isinstance(value, list):
                raise ConfigurationError(f"{where}.{name} must be a list")
            kwargs[name] = tuple(value)
        elif isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigurationError(f"{where}.{name} must be true or false")
            kwargs[name] = value
        elif isinstance(default, float):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigurationError(f"{where}.{name} must be a number")
            kwargs[name] = float(value)
        elif isinstance(default, int):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigurationError(f"{where}.{name} must be an integer")
            kwargs[name] = value
        else:
            if not isinstance(value, str):
                raise ConfigurationError(f"{where}.{name} must be a string")
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid [{where}]: {exc}") from exc


def parse_config(text: str, base_dir=".") -> PipelineConfig:
    """Parse TOML text; relative paths are resolved against ``base_dir``."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"config is not valid TOML: {exc}") from exc
    cfg = _build(PipelineConfig, data, "config")
    base = Path(base_dir)
    resolved = {}
    for f in dataclasses.fields(PathsConfig):
        value = getattr(cfg.paths, f.name)
        if value and f.name != "crossref_url" and not Path(value).is_absolute():
            value = str((base / value).resolve())
        resolved[f.name] = value
    return dataclasses.replace(cfg, paths=PathsConfig(**resolved))


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file {path} not found")
    return parse_config(path.read_text("utf-8"), path.parent)


def sample_config_path() -> Path:
    """Path of the bundled sample configuration (synthetic corpus)."""
    return Path(str(resources.files("ldatrends").joinpath("data/sample_config.toml")))


# -- helpers ---------------------------------------------------------------

def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _f(x) -> str:
    return "" if x is None else f"{x:.6f}"


def _tsv(header, rows, banner: str) -> str:
    lines = [banner, "\t".join(header)]
    lines += ["\t".join(str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


class Pipeline:
    """Runs stages against one output directory."""

    def __init__(self, cfg: PipelineConfig, force: bool = False):
        self.cfg = cfg
        self.force = force
        self.out = Path(cfg.paths.output)
        self.config_hash = cfg.hash()
        self.banner = f"# ldatrends {__version__} seed={cfg.seed} config={self.config_hash[:16]}"
        self.stage_log: list = []
        self.outputs: set = set()
        self._stages: dict = {
            "ingest": (self.ingest, ()),
            "prep": (self.prep, ("ingest",)),
            "tune": (self.tune, ("prep",)),
            "fit": (self.fit, ("prep",) + (("tune",) if cfg.lda.use_tuned else ())),
            "stability": (self.stability, ("prep", "tune")),
            "cluster": (self.cluster, ("fit",)),
            "trends": (self.trends, ("fit",)),
            "authors": (self.authors, ("fit",)),
            "gender": (self.gender, ("ingest",)),
            "cites": (self.cites, ("fit",)),
            "removal": (self.removal, ("fit",)),
        }

    # artifacts each stage produces (paths relative to the output dir)
    PRODUCES = {
        "ingest": ("records.jsonl", "authors.tsv", "ingest_report.json"),
        "prep": ("vocabulary.tsv", "corpus.jsonl", "prep_report.json"),
        "tune": ("tune_result.json", "tuning_log.jsonl"),
        "fit": ("model.ldat", "topics.tsv", "topic_summary.tsv", "perplexity_sweep.tsv"),
        "stability": ("stability.json", "stability_overlaps.tsv"),
        "cluster": ("heatmap.tsv", "dendrogram.json", "venue_groups.tsv"),
        "trends": ("trends_all.tsv", "trends_conference.tsv", "trends_journal.tsv"),
        "authors": ("breadth.tsv",),
        "gender": ("gender.json",),
        "cites": ("cites_per_year.json", "cites_per_year.tsv", "top_papers.tsv"),
        "removal": ("removal.json",),
    }

    # -- bookkeeping -------------------------------------------------------

    def write(self, name: str, data) -> None:
        atomic_write(self.out / name, data)
        self.outputs.add(name)

    def require(self, stage: str) -> None:
        missing = [n for n in self.PRODUCES[stage] if not (self.out / n).is_file()]
        if missing:
            raise StageError(
                f"missing {', '.join(missing)} in {self.out}; run the `{stage}` command first"
            )

    def _input_paths(self) -> dict:
        p = self.cfg.paths
        return {name: getattr(p, name) for name in ("records", "abstracts", "citations", "venues", "genders")
                if getattr(p, name)}

    def check_inputs(self) -> dict:
        """Hash every configured input file; unreadable ones are an error."""
        hashes = {}
        for name, path in self._input_paths().items():
            if not Path(path).is_file():
                raise ConfigurationError(f"paths.{name} = {path} is not a readable file")
            hashes[name] = _sha256_file(path)
        return hashes

    def _fingerprint(self, stage: str, deps) -> str:
        h = hashlib.sha256()
        h.update(self.config_hash.encode())
        h.update(json.dumps(self.input_hashes, sort_keys=True).encode())
        for dep in deps:
            for name in self.PRODUCES[dep]:
                h.update(name.encode())
                h.update(_sha256_file(self.out / name).encode())
        return h.hexdigest()

    def _stamp_path(self, stage: str) -> Path:
        return self.out / ".stamps" / f"{stage}.json"

    def _up_to_date(self, stage: str, fingerprint: str) -> bool:
        stamp = self._stamp_path(stage)
        if self.force or not stamp.is_file():
            return False
        try:
            saved = json.loads(stamp.read_text("utf-8"))
        except json.JSONDecodeError:
            return False
        return (saved.get("fingerprint") == fingerprint
                and all((self.out / n).is_file() for n in self.PRODUCES[stage]))

    def run_stage(self, stage: str) -> None:
        func, deps = self._stages[stage]
        for dep in deps:
            self.require(dep)
        fingerprint = self._fingerprint(stage, deps)
        if self._up_to_date(stage, fingerprint):
            logger.info("%s: up to date", stage)
            self.outputs.update(self.PRODUCES[stage])
            self.stage_log.append({"stage": stage, "status": "skipped", "seconds": 0.0})
            return
        logger.info("%s: running", stage)
        t0 = time.perf_counter()
        func()
        seconds = time.perf_counter() - t0
        atomic_write(self._stamp_path(stage), _json({"stage": stage, "fingerprint": fingerprint}))
        self.stage_log.append({"stage": stage, "status": "done", "seconds": round(seconds, 3)})

    def run(self, command: str) -> int:
        if command != "all" and command not in self._stages:
            raise ConfigurationError(f"unknown command {command!r}")
        started = datetime.now(timezone.utc).isoformat()
        status, error = "complete", None
        self.out.mkdir(parents=True, exist_ok=True)
        self.input_hashes = {}
        try:
            self.input_hashes = self.check_inputs()
            for stage in (STAGES if command == "all" else (command,)):
                self.run_stage(stage)
        except Exception as exc:
            status, error = "partial", f"{type(exc).__name__}: {exc}"
            raise
        finally:
            self.write_manifest(command, started, status, error)
        return 0

    def write_manifest(self, command, started, status, error) -> None:
        manifest = {
            "toolkit_version": __version__,
            "command": command,
            "seed": self.cfg.seed,
            "config_hash": self.config_hash,
            "config": self.cfg.to_dict(),
            "inputs": {name: {"path": path, "sha256": self.input_hashes.get(name)}
                       for name, path in self._input_paths().items()},
            "stages": self.stage_log,
            "outputs": {name: _sha256_file(self.out / name) for name in sorted(self.outputs)
                        if (self.out / name).is_file()},
            "started": started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "status": status,
            "error": error,
        }
        atomic_write(self.out / "manifest.json", _json(manifest))

    # -- artifact readers --------------------------------------------------

    def records(self) -> list:
        return read_records(self.out / "records.jsonl", self._schema()).records

    def _schema(self) -> RecordSchema:
        return RecordSchema(self.cfg.ingest.year_min, self.cfg.ingest.year_max)

    def vocab_corpus(self):
        vocab = Vocabulary.from_tsv((self.out / "vocabulary.tsv").read_text("utf-8"))
        corpus = BowCorpus.from_jsonl((self.out / "corpus.jsonl").read_text("utf-8"), len(vocab))
        return vocab, corpus

    def authors_table(self) -> dict:
        authors = {}
        lines = (self.out / "authors.tsv").read_text("utf-8").splitlines()
        for line in lines[2:]:
            name, gender, cites, papers = line.split("\t")
            ids = {int(p) for p in papers.split(",") if p}
            authors[name] = AuthorRecord(name, gender, int(cites), ids)
        return authors

    def tuned(self) -> CandidateVector:
        best = json.loads((self.out / "tune_result.json").read_text("utf-8"))["best"]
        return CandidateVector(int(best["k"]), float(best["alpha"]), float(best["eta"]))

    def fit_params(self) -> LdaParams:
        lc = self.cfg.lda
        k, alpha, eta = lc.k, lc.alpha, lc.eta
        if lc.use_tuned:
            best = self.tuned()
            k, alpha, eta = best.k, best.alpha, best.eta
        return LdaParams(k, alpha, eta, lc.iterations, lc.burn_in, derive_seed(self.cfg.seed, "fit"))

    def model_theta(self):
        vocab, _ = self.vocab_corpus()
        model = load_model(self.out / "model.ldat", vocab)
        records = self.records()
        return records, model, align_theta(model, len(records))

    def venues(self) -> dict:
        if self.cfg.paths.venues:
            return load_venue_table(self.cfg.paths.venues, self.cfg.ingest.year_max)
        return bundled_venue_table()

    # -- stages ------------------------------------------------------------

    def ingest(self) -> None:
        p, ic = self.cfg.paths, self.cfg.ingest
        if not p.records:
            raise ConfigurationError("paths.records is required")
        parsed = read_records(p.records, self._schema())
        records = parsed.records
        report = {"seed": self.cfg.seed, "lines": parsed.n_lines, "accepted": len(records),
                  "rejected": [{"line": e.line, "reason": e.reason} for e in parsed.errors]}
        if p.abstracts:
            source = read_records(p.abstracts, self._schema())
            records = merge_abstracts(records, source.records)
            report["abstracts"] = {"source_records": len(source.records),
                                   "with_abstract": sum(1 for r in records if r.abstract)}
        if p.citations or p.crossref_url:
            client = (TableCitationClient.from_file(p.citations) if p.citations
                      else CrossrefClient(p.crossref_url))
            enriched = enrich_citations(records, client, retries=ic.retries)
            records = enriched.records
            report["citations"] = enriched.tally()
        venues = self.venues()
        report["unknown_venues"] = sorted({r.venue_id for r in records} - set(venues))
        genders = load_gender_table(p.genders) if p.genders else None
        authors = build_authors(records, genders, ic.gender_threshold)
        self.write("records.jsonl", serialize_records(records))
        rows = [(a.name, a.gender, a.total_citations, ",".join(str(i) for i in sorted(a.paper_ids)))
                for a in sorted(authors.values(), key=lambda a: a.name)]
        self.write("authors.tsv", _tsv(("name", "gender", "total_citations", "paper_ids"), rows, self.banner))
        self.write("ingest_report.json", _json(report))

    def prep(self) -> None:
        records = self.records()
        vocab, corpus = prepare_with([r.text for r in records], self.cfg.prep)
        self.write("vocabulary.tsv", vocab.to_tsv())
        self.write("corpus.jsonl", corpus.to_jsonl())
        report = {"seed": self.cfg.seed, "documents": corpus.D, "terms": len(vocab),
                  "tokens": corpus.n_tokens, "empty_documents": int(corpus.empty.sum()),
                  "vocab_hash": vocab.hash, "prep": _plain(dataclasses.asdict(self.cfg.prep))}
        self.write("prep_report.json", _json(report))

    def tune(self) -> None:
        vocab, corpus = self.vocab_corpus()
        de = self.cfg.tune.de(self.cfg.seed)
        result = ldade(corpus.nonempty(), de, self.cfg.stability.config(), vocab)
        payload = dict(result.to_dict(), seed=self.cfg.seed, de=de.to_dict(),
                       stability=self.cfg.stability.config().to_dict(),
                       default=self.cfg.tune.default(self.cfg.seed).to_dict())
        self.write("tune_result.json", _json(payload))
        self.write("tuning_log.jsonl", "".join(ev.log_line(timing=False) + "\n" for ev in result.log))

    def fit(self) -> None:
        vocab, corpus = self.vocab_corpus()
        params = self.fit_params()
        model = fit(corpus, params, vocab=vocab, check_every=0)
        save_model(model, self.out / "model.ldat")
        self.outputs.add("model.ldat")
        theta = align_theta(model, len(self.records()))
        cov = topic_coverage(theta)
        rows, summary = [], []
        for rank, t in enumerate(cov["order"]):
            terms = top_terms(model, t, 10)
            for r, (term, w) in enumerate(terms):
                rows.append((t, r + 1, term, _f(w), _f(float(np.log(w)))))
            summary.append((t, rank + 1, _f(cov["share"][rank]), _f(cov["cumulative"][rank]),
                            " ".join(term for term, _ in terms[:7])))
        self.write("topics.tsv", _tsv(("topic", "rank", "term", "weight", "log_weight"), rows, self.banner))
        self.write("topic_summary.tsv", _tsv(("topic", "popularity_rank", "share", "cumulative_share",
                                              "top_terms"), summary, self.banner))
        pc = self.cfg.perplexity
        sweep_rows = []
        if pc.ks:
            sweep = perplexity_sweep(corpus, pc.ks, eta=self.cfg.tune.default_eta, iterations=pc.iterations,
                                     burn_in=pc.burn_in, folds=pc.folds, fold_in_iters=pc.fold_in_iters,
                                     seed=derive_seed(self.cfg.seed, "perplexity"))
            sweep_rows = [(r["k"], _f(r["perplexity"]), _f(r["log_perplexity"])) for r in sweep]
        self.write("perplexity_sweep.tsv", _tsv(("k", "perplexity", "log_perplexity"), sweep_rows, self.banner))

    def stability(self) -> None:
        vocab, corpus = self.vocab_corpus()
        scfg = self.cfg.stability.config()
        docs = corpus.nonempty()
        reports = {
            "default": candidate_report(docs, self.cfg.tune.default(self.cfg.seed), scfg, self.cfg.seed, vocab),
            "tuned": candidate_report(docs, self.tuned(), scfg, self.cfg.seed, vocab),
        }
        self.write("stability.json", _json({"seed": self.cfg.seed,
                                            **{k: v.to_dict() for k, v in reports.items()}}))
        curves = {k: np.sort(v.overlaps)[::-1] for k, v in reports.items()}
        length = max(len(c) for c in curves.values())
        rows = [(i + 1, *(_f(float(c[i])) if i < len(c) else "" for c in curves.values()))
                for i in range(length)]
        self.write("stability_overlaps.tsv", _tsv(("rank", "default", "tuned"), rows, self.banner))

    def cluster(self) -> None:
        records, model, theta = self.model_theta()
        years = self.cfg.analytics.cluster_years
        if years:
            keep = np.array([years[0] <= r.year <= years[1] for r in records])
            theta = np.where(keep[:, None], theta, np.nan)
        matrix = venue_topic_matrix(records, theta, mode=self.cfg.analytics.venue_matrix)
        order = topic_coverage(theta)["order"]
        rows = [(v, n, *(_f(float(matrix.matrix[i, t])) for t in order))
                for i, (v, n) in enumerate(zip(matrix.venues, matrix.n_papers))]
        self.write("heatmap.tsv", _tsv(("venue", "papers", *(f"topic{t}" for t in order)), rows, self.banner))
        tree = hcluster(matrix) if len(matrix.venues) >= 2 else None
        self.write("dendrogram.json", _json({"seed": self.cfg.seed, "mode": matrix.mode,
                                             "excluded": matrix.excluded,
                                             "tree": tree.to_dict() if tree else None}))
        venues = self.venues()
        sib = sibling_groups(tree) if tree else {}
        rows = []
        for v in matrix.venues:
            info = venues.get(v)
            rows.append((v, info.venue_type if info else "", info.h5 if info else "",
                         info.group if info else "", ",".join(sib.get(v, ()))))
        self.write("venue_groups.tsv", _tsv(("venue", "type", "h5", "reference_group", "cluster_siblings"),
                                            rows, self.banner))

    def trends(self) -> None:
        records, _, theta = self.model_theta()
        yr = (self.cfg.ingest.year_min, self.cfg.ingest.year_max)
        for label, vtype in (("all", None), ("conference", "conference"), ("journal", "journal")):
            series = topic_evolution(records, theta, vtype, yr)
            counts = dict(zip(series.years, series.counts))
            rows = [(y, t, counts[y], _f(frac)) for y, t, frac in series.rows()]
            self.write(f"trends_{label}.tsv", _tsv(("year", "topic", "papers", "fraction"), rows, self.banner))

    def authors(self) -> None:
        records, _, theta = self.model_theta()
        hist = author_breadth(records, theta, self.authors_table(), self.cfg.analytics.percentiles)
        labels = list(hist)
        k = theta.shape[1]
        rows = [(x, *(int(hist[lab][x - 1]) for lab in labels)) for x in range(1, k + 1)]
        self.write("breadth.tsv", _tsv(("topics_covered", *labels), rows, self.banner))

    def gender(self) -> None:
        if not self.cfg.paths.genders:
            raise ConfigurationError("the gender stage needs paths.genders")
        report = gender_report(self.authors_table(), self.records(), self.cfg.analytics.top_ns)
        self.write("gender.json", _json(dict(report.to_dict(), seed=self.cfg.seed)))

    def cites(self) -> None:
        records, _, theta = self.model_theta()
        ac = self.cfg.analytics
        cmp = CompareConfig(ac.resamples, ac.level, ac.a12_threshold, derive_seed(self.cfg.seed, "compare"))
        stats = cites_per_year_stats(records, ac.reference_year, cmp)
        self.write("cites_per_year.json", _json({"seed": self.cfg.seed, "reference_year": ac.reference_year,
                                                 "included": stats.included, "excluded": stats.excluded,
                                                 "config": stats.config, "rows": _round(stats.rows)}))
        rows = []
        for row in stats.rows:
            c = row["compare"] or {}
            rows.append((row["year"], *(v for lab in ("conference", "journal")
                                        for v in (row[lab]["n"], _f(row[lab]["median"]), _f(row[lab]["iqr"]))),
                         c.get("verdict", ""), _f(c.get("a12"))))
        self.write("cites_per_year.tsv", _tsv(
            ("year", "conf_n", "conf_median", "conf_iqr", "journal_n", "journal_median", "journal_iqr",
             "verdict", "a12"), rows, self.banner + "\n# assumed: " + json.dumps(cmp.to_dict(), sort_keys=True)))
        rows = []
        for since in (None, *ac.top_papers_since):
            for t, idx in top_cited_per_topic(records, theta, 1, since).items():
                for i in idx:
                    r = records[i]
                    rows.append(("all" if since is None else since, t, r.year, r.venue_id,
                                 r.citation_count, r.title))
        self.write("top_papers.tsv", _tsv(("since", "topic", "year", "venue", "citations", "title"),
                                          rows, self.banner))

    def removal(self) -> None:
        ac = self.cfg.analytics
        report = {"seed": self.cfg.seed, "removed": list(ac.removal_venues), "result": None}
        if ac.removal_venues:
            records = self.records()
            params = self.fit_params()
            before = model_records(records, self.cfg.prep, params)
            result = venue_removal_experiment(records, ac.removal_venues, self.cfg.prep, params,
                                              ac.removal_n, before=before)
            report["result"] = result.to_dict()
            report["params"] = params.to_dict()
        self.write("removal.json", _json(report))


def _round(obj):
    if isinstance(obj, float):
        return round(obj, 6)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def run(command: str, cfg: PipelineConfig, force: bool = False) -> Pipeline:
    """Run ``command`` (a stage name or ``"all"``) and return the pipeline."""
    pipe = Pipeline(cfg, force)
    pipe.run(command)
    return pipe
