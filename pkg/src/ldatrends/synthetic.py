"""Synthetic bibliographic corpus with planted topics.

Five topics with disjoint 40-term vocabularies generate the title and
abstract text of about 500 records spread over six venues. Each venue has
its own topic mixture; ``SOSYM`` is the only venue that carries the
modeling topic, which makes venue-removal experiments checkable.

The generator is deterministic for a given seed and doubles as the ground
truth for topic-recovery checks (:attr:`SyntheticCorpus.topic_terms`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import BiblioRecord, serialize_records

TOPIC_NAMES = ("testing", "requirements", "modeling", "metrics", "source code")

# Ordered most-to-least probable; the generator's weights decay with rank.
TOPIC_TERMS = (
    ("test", "testing", "cases", "fault", "coverage", "generation", "mutation", "oracle",
     "regression", "suite", "unit", "random", "fuzzing", "assertion", "failure", "flaky",
     "harness", "input", "symbolic", "concolic", "prioritization", "selection", "minimization",
     "adequacy", "tester", "debugging", "localization", "crash", "seeded", "combinatorial",
     "boundary", "pairwise", "stub", "mock", "runner", "verdict", "checker", "automated",
     "detection", "kill"),
    ("requirements", "stakeholders", "elicitation", "goals", "specification", "traceability",
     "needs", "priorities", "negotiation", "conflicts", "scenarios", "users", "customer",
     "interviews", "documents", "ambiguity", "natural", "language", "features", "release",
     "planning", "acceptance", "viewpoints", "volatility", "glossary", "sketches", "workshops",
     "validation", "consistency", "completeness", "domain", "business", "contracts",
     "obligations", "regulations", "privacy", "compliance", "agile", "stories", "backlog"),
    ("model", "uml", "metamodel", "transformation", "diagrams", "sysml", "statecharts",
     "ocl", "profiles", "mde", "ecore", "views", "synchronization", "bidirectional",
     "notation", "semantics", "graphical", "editors", "weaving", "megamodel", "templates",
     "refinement", "abstraction", "platform", "independent", "executable", "simulation",
     "activity", "sequence", "class", "object", "constraint", "composition", "dsl",
     "workbench", "xmi", "atl", "qvt", "concrete", "syntax"),
    ("metrics", "effort", "estimation", "prediction", "defect", "quality", "measurement",
     "data", "cost", "size", "forecasting", "productivity", "benchmark", "learners",
     "cross", "project", "dataset", "accuracy", "cocomo", "function", "points", "complexity",
     "cohesion", "coupling", "threshold", "indicators", "empirical", "statistical",
     "variance", "bias", "tuning", "classifiers", "imbalance", "churn", "proneness",
     "calibration", "analogy", "estimates", "budget", "schedule"),
    ("code", "source", "clones", "refactoring", "smells", "commits", "repository",
     "identifiers", "comments", "developers", "api", "usage", "patterns", "mining",
     "history", "changes", "review", "maintenance", "comprehension", "readability",
     "naming", "libraries", "migration", "dependencies", "snippets", "stack", "overflow",
     "github", "pull", "requests", "issues", "licenses", "documentation", "search",
     "recommendation", "summarization", "traces", "logs", "forks", "evolution"),
)

# Venue -> (type, topic mixture over TOPIC_NAMES).
VENUES = {
    "ICSE": ("conference", (0.25, 0.25, 0.0, 0.25, 0.25)),
    "ISSTA": ("conference", (0.70, 0.0, 0.0, 0.10, 0.20)),
    "MSR": ("conference", (0.05, 0.0, 0.0, 0.35, 0.60)),
    "TSE": ("journal", (0.30, 0.20, 0.0, 0.30, 0.20)),
    "REJ": ("journal", (0.10, 0.80, 0.0, 0.10, 0.0)),
    "SOSYM": ("journal", (0.0, 0.0, 1.0, 0.0, 0.0)),
}

FILLER = ("approach", "study", "towards", "novel", "using", "based", "framework",
          "analysis", "tool", "case", "evaluation", "method")
TITLE_TEMPLATES = (
    "{a} {b} for {c}",
    "Towards {a} {b}",
    "An empirical study of {a} and {b}",
    "On the {a} of {b} {c}",
    "{a}-based {b}: a {f} {g}",
    "The {a} {b} {c} {f}",
)

FIRST_NAMES = (
    ("maria", "female", 980, 20), ("anna", "female", 990, 10), ("laura", "female", 970, 30),
    ("sofia", "female", 960, 40), ("elena", "female", 985, 15), ("julia", "female", 975, 25),
    ("claire", "female", 950, 50), ("helen", "female", 990, 10), ("james", "male", 5, 995),
    ("john", "male", 4, 996), ("peter", "male", 6, 994), ("david", "male", 5, 995),
    ("michael", "male", 8, 992), ("thomas", "male", 3, 997), ("paul", "male", 7, 993),
    ("mark", "male", 4, 996), ("lars", "male", 2, 998), ("kenji", "male", 10, 990),
    ("wei", "unknown", 450, 550), ("alex", "unknown", 480, 520), ("jordan", "unknown", 400, 600),
    ("robin", "unknown", 420, 580),
)
SURNAMES = ("smith", "garcia", "chen", "muller", "rossi", "kim", "novak", "silva", "tanaka",
            "dubois", "jensen", "kowalski", "haddad", "okafor", "ivanova", "larsen", "moreau",
            "nguyen", "patel", "romero", "schmidt", "yilmaz", "costa", "berg", "fischer")

YEARS = (1992, 2016)
START_YEARS = {"ICSE": 1994, "ISSTA": 1992, "MSR": 2004, "TSE": 1992, "REJ": 1996, "SOSYM": 2002}


def topic_weights(n_terms: int = 40, decay: float = 8.0) -> np.ndarray:
    w = np.exp(-np.arange(n_terms) / decay)
    return w / w.sum()


@dataclass
class SyntheticCorpus:
    records: list
    abstract_source: list
    doc_topics: np.ndarray
    gender_table: dict
    citation_table: dict

    @property
    def topic_terms(self):
        return TOPIC_TERMS

    def planted_top(self, topic: int, n: int = 10) -> list:
        return list(TOPIC_TERMS[topic][:n])

    def write(self, directory) -> dict:
        """Write the dump files used by the pipeline and return their paths."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {
            "records": directory / "records.jsonl",
            "abstracts": directory / "abstracts.jsonl",
            "citations": directory / "citations.tsv",
            "genders": directory / "genders.tsv",
        }
        stripped = [
            BiblioRecord(r.title, r.venue_id, r.venue_type, r.year, r.authors, r.doi, None, None)
            for r in self.records
        ]
        paths["records"].write_text(serialize_records(stripped), encoding="utf-8")
        paths["abstracts"].write_text(serialize_records(self.abstract_source), encoding="utf-8")
        lines = ["doi\tcitations"] + [f"{d}\t{c}" for d, c in sorted(self.citation_table.items())]
        paths["citations"].write_text("\n".join(lines) + "\n", encoding="utf-8")
        lines = ["name\tfemale\tmale"] + [f"{n}\t{f}\t{m}" for n, (f, m) in sorted(self.gender_table.items())]
        paths["genders"].write_text("\n".join(lines) + "\n", encoding="utf-8")
        return paths


def _words(rng, topic_mix, main, n, weights):
    """Draw ``n`` words: 85% from the main topic, the rest from the venue mixture."""
    out = []
    mix = np.asarray(topic_mix, dtype=float)
    for _ in range(n):
        t = main if rng.random() < 0.85 else int(rng.choice(len(mix), p=mix))
        out.append(TOPIC_TERMS[t][int(rng.choice(len(weights), p=weights))])
    return out


def generate(n_docs: int = 500, seed: int = 7, abstract_rate: float = 0.8,
             n_authors: int = 240) -> SyntheticCorpus:
    """Generate the synthetic corpus deterministically from ``seed``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    weights = topic_weights()
    venues = list(VENUES)

    people = []
    for i in range(n_authors):
        first = FIRST_NAMES[i % len(FIRST_NAMES)][0]
        last = SURNAMES[(i // len(FIRST_NAMES)) % len(SURNAMES)]
        people.append(f"{first.title()} {last.title()}")
    productivity = 1.0 / np.arange(1, n_authors + 1) ** 0.8
    productivity /= productivity.sum()

    records, source, topics, citations = [], [], [], {}
    for i in range(n_docs):
        venue = venues[i % len(venues)]
        vtype, mix = VENUES[venue]
        main = int(rng.choice(len(mix), p=np.asarray(mix)))
        year = int(rng.integers(max(YEARS[0], START_YEARS[venue]), YEARS[1] + 1))
        title_words = _words(rng, mix, main, 3, weights)
        title = rng.choice(TITLE_TEMPLATES).format(
            a=title_words[0].capitalize(), b=title_words[1], c=title_words[2],
            f=FILLER[int(rng.integers(len(FILLER)))], g=FILLER[int(rng.integers(len(FILLER)))],
        )
        body = _words(rng, mix, main, int(rng.integers(30, 50)), weights)
        fillers = [FILLER[j] for j in rng.integers(0, len(FILLER), size=3)]
        abstract = ("In this paper we present " + " ".join(body[:15]) + ". The "
                    + " ".join(fillers) + " of " + " ".join(body[15:]) + ".")
        n_auth = int(rng.integers(1, 5))
        authors = tuple(dict.fromkeys(people[j] for j in rng.choice(n_authors, size=n_auth, p=productivity)))
        age = max(1, 2017 - year)
        if vtype == "conference":
            rate = 0.6 if year < 2010 else 2.0
        else:
            rate = 1.2 if year < 2010 else 0.8
        doi = f"10.5555/synth.{i:04d}" if rng.random() > 0.03 else None
        count = int(rng.poisson(rate * age * (0.3 + rng.gamma(1.0))))
        rec = BiblioRecord(title, venue, vtype, year, authors, doi, None, None)
        if doi and rng.random() > 0.04:
            citations[doi] = count
            rec_count = count
        else:
            rec_count = None
        if rng.random() < abstract_rate:
            source.append(BiblioRecord(title.upper() if i % 11 == 0 else title, venue, vtype,
                                       year, authors[::-1], None, abstract, None))
            rec = BiblioRecord(title, venue, vtype, year, authors, doi, abstract, rec_count)
        else:
            rec = BiblioRecord(title, venue, vtype, year, authors, doi, None, rec_count)
        records.append(rec)
        topics.append(main)
    genders = {name: (f, m) for name, _, f, m in FIRST_NAMES}
    return SyntheticCorpus(records, source, np.array(topics), genders, citations)


def planted_records(n_docs=500, seed=7):
    """Shortcut: fully merged records of :func:`generate`."""
    return generate(n_docs, seed).records


def main(argv=None):  # pragma: no cover - regeneration helper
    import argparse

    parser = argparse.ArgumentParser(description="write the synthetic sample corpus")
    parser.add_argument("outdir")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--docs", type=int, default=500)
    args = parser.parse_args(argv)
    paths = generate(args.docs, args.seed).write(args.outdir)
    print(json.dumps({k: str(v) for k, v in paths.items()}, indent=2))


if __name__ == "__main__":  # pragma: no cover
    main()
