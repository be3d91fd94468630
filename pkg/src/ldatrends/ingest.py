"""Bibliographic record ingestion.

Records arrive as line-delimited JSON dumps (one object per line) with the
fields ``doi, title, abstract, venue, venue_type, year, authors, citations``.
This module parses them, attaches abstracts from a second dump, fills in
citation counts through a pluggable lookup client and resolves author
genders from a first-name frequency table.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import re
import string
import time
import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Protocol

from .errors import AmbiguousMatchError, ConfigurationError, InputError

logger = logging.getLogger(__name__)

VENUE_TYPES = ("conference", "journal")
GENDERS = ("female", "male", "unknown")

_VENUE_TYPE_ALIASES = {
    "conference": "conference",
    "conf": "conference",
    "journal": "journal",
    "jour": "journal",
}
_DOI_RE = re.compile(r"^10\.\d{4,9}/\S+$")
_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation})


@dataclass(frozen=True)
class BiblioRecord:
    title: str
    venue_id: str
    venue_type: str
    year: int
    authors: tuple
    doi: Optional[str] = None
    abstract: Optional[str] = None
    citation_count: Optional[int] = None

    @property
    def text(self) -> str:
        """Title plus abstract; title alone when no abstract was merged."""
        if self.abstract:
            return f"{self.title} {self.abstract}"
        return self.title


@dataclass(frozen=True)
class VenueInfo:
    short: str
    name: str
    venue_type: str
    start_year: int
    h5: int
    group: str = ""


@dataclass
class AuthorRecord:
    name: str
    gender: str = "unknown"
    total_citations: int = 0
    paper_ids: set = field(default_factory=set)


@dataclass(frozen=True)
class RecordSchema:
    """Validation rules applied by :func:`parse_records`."""

    year_min: int = 1992
    year_max: int = 2016


@dataclass(frozen=True)
class RecordError:
    line: int
    reason: str


@dataclass
class ParseResult:
    records: list
    errors: list
    n_lines: int

    @property
    def n_rejected(self) -> int:
        return len(self.errors)


def canonical_name(name: str) -> str:
    return " ".join(unicodedata.normalize("NFC", name).split())


def normalize_text(text: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace."""
    text = unicodedata.normalize("NFC", text).lower().translate(_PUNCT_TABLE)
    return " ".join(text.split())


def _venue_type(value) -> str:
    try:
        return _VENUE_TYPE_ALIASES[str(value).strip().lower()]
    except KeyError:
        raise InputError(f"unknown venue_type {value!r}") from None


def record_from_dict(obj: Mapping, schema: RecordSchema = RecordSchema()) -> BiblioRecord:
    """Validate one decoded record object. Raises :class:`InputError`."""
    if not isinstance(obj, Mapping):
        raise InputError("record is not an object")
    for key in ("title", "venue", "year", "authors"):
        if obj.get(key) in (None, "", []):
            raise InputError(f"missing mandatory field {key!r}")
    title = " ".join(str(obj["title"]).split())
    if not title:
        raise InputError("missing mandatory field 'title'")
    year = obj["year"]
    if isinstance(year, bool) or not isinstance(year, int):
        raise InputError(f"year must be an integer, got {year!r}")
    if not schema.year_min <= year <= schema.year_max:
        raise InputError(f"year {year} outside [{schema.year_min}, {schema.year_max}]")
    authors = obj["authors"]
    if isinstance(authors, str) or not isinstance(authors, (list, tuple)):
        raise InputError("authors must be an array of names")
    authors = tuple(canonical_name(str(a)) for a in authors)
    if not all(authors):
        raise InputError("empty author name")
    citations = obj.get("citations")
    if citations is not None:
        if isinstance(citations, bool) or not isinstance(citations, int) or citations < 0:
            raise InputError(f"citations must be a non-negative integer, got {citations!r}")
    vtype = obj.get("venue_type", obj.get("type"))
    if vtype is None:
        raise InputError("missing field 'venue_type'")
    return BiblioRecord(
        title=title,
        venue_id=str(obj["venue"]).strip(),
        venue_type=_venue_type(vtype),
        year=year,
        authors=authors,
        doi=obj.get("doi") or None,
        abstract=obj.get("abstract") or None,
        citation_count=citations,
    )


def record_to_dict(record: BiblioRecord) -> dict:
    return {
        "doi": record.doi,
        "title": record.title,
        "abstract": record.abstract,
        "venue": record.venue_id,
        "venue_type": record.venue_type,
        "year": record.year,
        "authors": list(record.authors),
        "citations": record.citation_count,
    }


def serialize_records(records: Iterable[BiblioRecord]) -> str:
    return "".join(
        json.dumps(record_to_dict(r), ensure_ascii=False, sort_keys=True) + "\n"
        for r in records
    )


def parse_records(stream, schema: RecordSchema = RecordSchema()) -> ParseResult:
    """Parse a line-delimited record dump.

    Parameters
    ----------
    stream : str, bytes, or iterable of lines
        The dump. Blank lines are ignored and not counted.
    schema : RecordSchema
        Year range and other validation rules.

    Returns
    -------
    ParseResult
        Valid records in input order plus one :class:`RecordError` per
        rejected line, so that ``n_lines == len(records) + n_rejected``.
    """
    if isinstance(stream, bytes):
        stream = stream.decode("utf-8")
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    records, errors, n_lines = [], [], 0
    for lineno, line in enumerate(stream, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        if not line.strip():
            continue
        n_lines += 1
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            errors.append(RecordError(lineno, f"malformed line: {exc.msg}"))
            continue
        try:
            records.append(record_from_dict(obj, schema))
        except InputError as exc:
            errors.append(RecordError(lineno, str(exc)))
    return ParseResult(records, errors, n_lines)


def read_records(path, schema: RecordSchema = RecordSchema()) -> ParseResult:
    with open(path, encoding="utf-8") as fh:
        return parse_records(fh, schema)


# -- abstracts -------------------------------------------------------------

def match_key(record: BiblioRecord) -> tuple:
    return (
        normalize_text(record.title),
        frozenset(normalize_text(a) for a in record.authors),
        record.venue_id.strip().lower(),
        record.year,
    )


def merge_abstracts(primary, abstract_source):
    """Attach abstracts from ``abstract_source`` to matching primary records.

    A match requires equal normalized title, equal set of normalized author
    names, equal venue and equal year. Records without a match keep their
    current text (title only, unless they already carried an abstract).
    """
    index = defaultdict(list)
    for src in abstract_source:
        if src.abstract:
            index[match_key(src)].append(src)
    merged = []
    for rec in primary:
        hits = index.get(match_key(rec), ())
        if len(hits) > 1:
            raise AmbiguousMatchError(rec, hits)
        if hits and hits[0].abstract != rec.abstract:
            rec = replace(rec, abstract=hits[0].abstract)
        merged.append(rec)
    return merged


# -- citations -------------------------------------------------------------

class TransientLookupError(Exception):
    """Retryable lookup failure (network error, server 5xx)."""


class CitationClient(Protocol):
    serial: bool

    def lookup(self, doi: str) -> Optional[int]:
        """Citation count for ``doi``; None when the DOI is unknown."""


class TableCitationClient:
    """Offline client backed by a DOI -> count mapping."""

    serial = False

    def __init__(self, counts: Mapping[str, int]):
        self.counts = {k.lower(): int(v) for k, v in counts.items()}

    def lookup(self, doi):
        return self.counts.get(doi.lower())

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8", newline="") as fh:
            rows = csv.DictReader(fh, delimiter="\t")
            return cls({row["doi"]: int(row["citations"]) for row in rows})


class CrossrefClient:
    """Client for a Crossref-style ``GET /works/{doi}`` endpoint.

    A 404 means "not found"; any 5xx or connection problem raises
    :class:`TransientLookupError`. The count is read from the integer field
    ``is-referenced-by-count``, either at the top level of the JSON body or
    inside its ``message`` object.
    """

    serial = True

    def __init__(self, base_url="https://api.crossref.org", timeout=10.0, session=None):
        import requests

        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.session = session or requests.Session()
        self._requests = requests

    def lookup(self, doi):
        url = f"{self.base_url}/works/{doi}"
        try:
            resp = self.session.get(url, timeout=self.timeout)
        except self._requests.RequestException as exc:
            raise TransientLookupError(str(exc)) from exc
        if resp.status_code == 404:
            return None
        if resp.status_code >= 500:
            raise TransientLookupError(f"HTTP {resp.status_code} for {doi}")
        resp.raise_for_status()
        body = resp.json()
        if isinstance(body.get("message"), dict):
            body = body["message"]
        count = body.get("is-referenced-by-count")
        if isinstance(count, bool) or not isinstance(count, int):
            raise ValueError(f"no integer is-referenced-by-count for {doi}")
        return count


@dataclass
class EnrichResult:
    records: list
    resolved: int = 0
    not_found: int = 0
    failed: int = 0
    malformed: int = 0
    skipped: int = 0

    def tally(self) -> dict:
        return {
            "resolved": self.resolved,
            "not_found": self.not_found,
            "failed": self.failed,
            "malformed_doi": self.malformed,
            "no_doi": self.skipped,
        }


def enrich_citations(records, client, retries: int = 2, backoff: float = 0.0) -> EnrichResult:
    """Set ``citation_count`` from ``client`` for every record with a DOI."""
    out = EnrichResult(records=[])
    for rec in records:
        if not rec.doi:
            out.skipped += 1
            out.records.append(rec)
            continue
        if not _DOI_RE.match(rec.doi):
            out.malformed += 1
            out.records.append(rec)
            continue
        count, ok = None, False
        for attempt in range(retries + 1):
            try:
                count = client.lookup(rec.doi)
                ok = True
                break
            except TransientLookupError as exc:
                logger.warning("lookup %s failed (attempt %d): %s", rec.doi, attempt + 1, exc)
                if backoff:
                    time.sleep(backoff * (2 ** attempt))
            except Exception as exc:  # noqa: BLE001 - any other failure is tallied
                logger.warning("lookup %s failed: %s", rec.doi, exc)
                break
        if not ok:
            out.failed += 1
        elif count is None:
            out.not_found += 1
        else:
            out.resolved += 1
            rec = replace(rec, citation_count=int(count))
        out.records.append(rec)
    return out


# -- venues ----------------------------------------------------------------

def load_venue_table(source, last_year: int = 2016) -> dict:
    """Read a tab-delimited venue table (short, name, type, start, h5, group).

    ``source`` is a path or an open text stream.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as fh:
            return load_venue_table(fh, last_year)
    venues = {}
    for row in csv.DictReader(source, delimiter="\t"):
        info = VenueInfo(
            short=row["short"].strip(),
            name=row["name"].strip(),
            venue_type=_venue_type(row["type"]),
            start_year=int(row["start"]),
            h5=int(row["h5"]),
            group=(row.get("group") or "").strip(),
        )
        if info.h5 < 0:
            raise InputError(f"negative h5 for {info.short}")
        if info.start_year > last_year:
            raise InputError(f"{info.short} starts after the last corpus year {last_year}")
        venues[info.short] = info
    return venues


def bundled_venue_table() -> dict:
    """The 34-venue table shipped with the package."""
    from importlib import resources

    text = resources.files("ldatrends").joinpath("data/venues.tsv").read_text("utf-8")
    return load_venue_table(io.StringIO(text))


# -- gender ----------------------------------------------------------------

def load_gender_table(path) -> dict:
    """Read ``name<TAB>female<TAB>male`` frequency rows into a dict."""
    table = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh, delimiter="\t"):
            table[row["name"].strip().lower()] = (int(row["female"]), int(row["male"]))
    return table


def first_name(name: str) -> str:
    tokens = normalize_text(name).split()
    return tokens[0] if tokens else ""


def resolve_gender(name: str, table: Mapping, threshold: float = 0.9) -> str:
    """Resolve ``name`` to female/male/unknown from first-name frequencies.

    The majority gender is returned when its share of the first name's
    occurrences is at least ``threshold``; otherwise ``"unknown"``.
    """
    if not table:
        raise ConfigurationError("gender table is empty")
    counts = table.get(first_name(name))
    if counts is None:
        return "unknown"
    female, male = counts
    total = female + male
    if total <= 0 or female == male:
        return "unknown"
    if female > male:
        return "female" if female / total >= threshold else "unknown"
    return "male" if male / total >= threshold else "unknown"


def build_authors(records, gender_table: Optional[Mapping] = None, threshold: float = 0.9) -> dict:
    """Aggregate per-author paper sets and citation totals.

    Identical canonical names are treated as one author.
    """
    authors = {}
    for idx, rec in enumerate(records):
        for name in dict.fromkeys(rec.authors):
            author = authors.get(name)
            if author is None:
                author = authors[name] = AuthorRecord(name=name)
            author.paper_ids.add(idx)
            if rec.citation_count is not None:
                author.total_citations += rec.citation_count
    if gender_table is not None:
        for author in authors.values():
            author.gender = resolve_gender(author.name, gender_table, threshold)
    return authors
