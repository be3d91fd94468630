import http.server
import json
import threading

import pytest
from hypothesis import given, settings, strategies as st

from ldatrends.errors import AmbiguousMatchError, ConfigurationError
from ldatrends.ingest import (BiblioRecord, CrossrefClient, TableCitationClient, TransientLookupError,
                              build_authors, bundled_venue_table, enrich_citations, merge_abstracts,
                              parse_records, resolve_gender, serialize_records)


def rec(title="X", venue="ICSE", year=1994, authors=("A B",), **kw):
    return BiblioRecord(title, venue, kw.pop("venue_type", "conference"), year, tuple(authors), **kw)


class TestParse:
    def test_empty_stream(self):
        res = parse_records("")
        assert res.records == [] and res.errors == [] and res.n_lines == 0

    def test_icse_record_and_venue_lookup(self):
        line = json.dumps({"title": "X", "venue": "ICSE", "type": "conference", "year": 1994,
                           "authors": ["A B"]})
        res = parse_records(line + "\n")
        assert len(res.records) == 1 and not res.errors
        r = res.records[0]
        assert (r.title, r.venue_id, r.venue_type, r.year, r.authors) == ("X", "ICSE", "conference", 1994, ("A B",))
        info = bundled_venue_table()[r.venue_id]
        assert info.start_year == 1994 and info.h5 == 63

    def test_missing_year_rejected(self):
        line = json.dumps({"title": "X", "venue": "ICSE", "venue_type": "conference", "authors": ["A"]})
        res = parse_records(line)
        assert res.records == [] and len(res.errors) == 1
        assert "year" in res.errors[0].reason and res.errors[0].line == 1

    def test_malformed_line_numbered(self):
        good = json.dumps({"title": "X", "venue": "TSE", "venue_type": "journal", "year": 2000, "authors": ["A"]})
        res = parse_records("\n".join([good, "{not json", good]))
        assert len(res.records) == 2
        assert [e.line for e in res.errors] == [2]

    @pytest.mark.parametrize("patch,needle", [
        ({"year": 1980}, "outside"),
        ({"authors": []}, "authors"),
        ({"citations": -1}, "citations"),
        ({"venue_type": "workshop"}, "venue_type"),
        ({"title": "   "}, "title"),
    ])
    def test_schema_rules(self, patch, needle):
        obj = {"title": "X", "venue": "ICSE", "venue_type": "conference", "year": 2000, "authors": ["A"]}
        obj.update(patch)
        res = parse_records(json.dumps(obj))
        assert len(res.errors) == 1 and needle in res.errors[0].reason

    def test_bundled_venue_table(self):
        table = bundled_venue_table()
        assert len(table) == 34
        kinds = [v.venue_type for v in table.values()]
        assert kinds.count("conference") == 18 and kinds.count("journal") == 16


names = st.text(alphabet=st.characters(whitelist_categories=("Lu", "Ll")), min_size=1, max_size=8)
records = st.builds(
    BiblioRecord,
    title=names,
    venue_id=st.sampled_from(["ICSE", "TSE", "MSR"]),
    venue_type=st.sampled_from(["conference", "journal"]),
    year=st.integers(1992, 2016),
    authors=st.lists(names, min_size=1, max_size=4).map(tuple),
    doi=st.none() | st.just("10.1000/xyz"),
    abstract=st.none() | names,
    citation_count=st.none() | st.integers(0, 10_000),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(records, max_size=6))
def test_serialize_round_trip(recs):
    res = parse_records(serialize_records(recs))
    assert res.records == recs
    assert res.n_lines == len(res.records) + res.n_rejected


class TestMerge:
    def test_exact_match_attaches(self):
        out = merge_abstracts([rec()], [rec(abstract="body")])
        assert out[0].abstract == "body"

    def test_year_off_by_one_not_merged(self):
        out = merge_abstracts([rec()], [rec(year=1995, abstract="body")])
        assert out[0].abstract is None

    def test_normalization(self):
        src = rec(title="x!", authors=("b  a", "A B"), abstract="body")
        out = merge_abstracts([rec(title="X", authors=("A B", "B A"))], [src])
        assert out[0].abstract == "body"

    def test_ambiguous(self):
        with pytest.raises(AmbiguousMatchError) as exc:
            merge_abstracts([rec()], [rec(abstract="one"), rec(abstract="two")])
        assert len(exc.value.candidates) == 2

    def test_idempotent(self, sample):
        once = merge_abstracts(sample.records, sample.abstract_source)
        assert merge_abstracts(once, sample.abstract_source) == once


class TestEnrich:
    def test_table_client(self):
        recs = [rec(doi="10.1000/a"), rec(), rec(doi="bogus"), rec(doi="10.1000/missing")]
        res = enrich_citations(recs, TableCitationClient({"10.1000/a": 42}))
        assert res.records[0].citation_count == 42
        assert res.records[1] == recs[1]
        assert res.records[2] == recs[2]
        assert res.records[3].citation_count is None
        assert res.tally() == {"resolved": 1, "not_found": 1, "failed": 0, "malformed_doi": 1, "no_doi": 1}

    def test_transient_failures_retried_then_tallied(self):
        class Flaky:
            calls = 0

            def lookup(self, doi):
                Flaky.calls += 1
                raise TransientLookupError("down")

        res = enrich_citations([rec(doi="10.1000/a")], Flaky(), retries=2)
        assert Flaky.calls == 3 and res.failed == 1 and res.records[0].citation_count is None


class _Handler(http.server.BaseHTTPRequestHandler):
    def do_GET(self):
        doi = self.path.split("/works/", 1)[1]
        if doi.endswith("found"):
            body = json.dumps({"message": {"is-referenced-by-count": 17}}).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(body)
        elif doi.endswith("flat"):
            body = json.dumps({"is-referenced-by-count": 5}).encode()
            self.send_response(200)
            self.end_headers()
            self.wfile.write(body)
        elif doi.endswith("error"):
            self.send_response(503)
            self.end_headers()
        else:
            self.send_response(404)
            self.end_headers()

    def log_message(self, *args):
        pass


@pytest.fixture
def crossref_server():
    server = http.server.HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def test_crossref_wire_contract(crossref_server):
    client = CrossrefClient(crossref_server, timeout=5)
    assert client.lookup("10.1000/found") == 17
    assert client.lookup("10.1000/flat") == 5
    assert client.lookup("10.1000/gone") is None
    with pytest.raises(TransientLookupError):
        client.lookup("10.1000/error")
    recs = [rec(doi="10.1000/found"), rec(doi="10.1000/error")]
    res = enrich_citations(recs, client, retries=1)
    assert res.records[0].citation_count == 17 and res.failed == 1


class TestGender:
    table = {"maria": (1000, 2), "alex": (480, 520), "john": (3, 997)}

    def test_examples(self):
        assert resolve_gender("Maria Silva", self.table) == "female"
        assert resolve_gender("alex smith", self.table) == "unknown"
        assert resolve_gender("John Doe", self.table) == "male"
        assert resolve_gender("Zed Q", self.table) == "unknown"

    def test_empty_table(self):
        with pytest.raises(ConfigurationError):
            resolve_gender("Maria", {})

    def test_authors_sum_known_citations(self):
        recs = [rec(authors=("Maria S", "John D"), citation_count=10),
                rec(authors=("Maria S",), citation_count=None),
                rec(authors=("Maria S",), citation_count=5)]
        authors = build_authors(recs, self.table)
        assert authors["Maria S"].total_citations == 15
        assert authors["Maria S"].paper_ids == {0, 1, 2}
        assert authors["Maria S"].gender == "female" and authors["John D"].gender == "male"
