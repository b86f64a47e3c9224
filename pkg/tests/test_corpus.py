import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adrisk.corpus import (
    LexiconError,
    NormalizedPhone,
    build_category_lexicon,
    categorize_domains,
    compute_id,
    dedup,
    domains_from_records,
    extract_phones,
    filter_domains,
    ingest,
    load_category_lexicon,
    make_record,
    scrub_phones,
    scrub_text,
    snippet_match,
)


def digits_of(phones):
    return {p.digits for p in phones}


class TestExtractPhones:
    def test_plain_ten_digit(self):
        assert digits_of(extract_phones("Contact number: 3474293421")) == {"3474293421"}

    def test_formatted_with_country_code(self):
        phones = extract_phones("+1 (770) 241-3449")
        assert digits_of(phones) == {"7702413449"}

    def test_wrong_length_runs_ignored(self):
        assert extract_phones("room 12000+ monthly") == set()
        assert extract_phones("id 123456789012") == set()
        assert extract_phones("123456789") == set()

    def test_eleven_digits_not_starting_with_one(self):
        assert extract_phones("21234567890") == set()

    def test_separated_groups(self):
        assert digits_of(extract_phones("call 770-241-3449 today")) == {"7702413449"}
        assert digits_of(extract_phones("770 241 3449")) == {"7702413449"}
        assert digits_of(extract_phones("770.241.3449")) == {"7702413449"}

    def test_multiple_and_dedup(self):
        text = "a 2125550001 b 212-555-0001 c 7705550002"
        assert digits_of(extract_phones(text)) == {"2125550001", "7705550002"}

    def test_cjk_digits_not_matched(self):
        assert extract_phones("电话：一二三四五六七八九十") == set()


class TestSnippetMatch:
    def test_positive(self):
        q = NormalizedPhone(digits="7702413449", raw="7702413449")
        assert snippet_match("Call 770-241-3449 today", q)

    def test_no_numbers(self):
        q = NormalizedPhone(digits="7702413449", raw="7702413449")
        assert not snippet_match("no numbers here", q)

    def test_off_by_one_digit(self):
        q = NormalizedPhone(digits="7702413449", raw="7702413449")
        assert not snippet_match("7702413448", q)

    def test_implies_membership(self):
        q = NormalizedPhone(digits="2125550001", raw="2125550001")
        snippet = "reach us: (212) 555-0001"
        assert snippet_match(snippet, q)
        assert q in extract_phones(snippet)


class TestScrub:
    def test_appendix_style_body(self):
        rec = make_record("jobs.example", "t", "monthly income 12000+, contact number 7702413449")
        scrubbed = scrub_phones(rec)
        assert scrubbed.body.endswith("contact number <PHONE>")
        assert extract_phones(scrubbed.body) == set()
        assert scrubbed.phones == rec.phones
        assert scrubbed.id == rec.id

    def test_no_phone_identity(self):
        rec = make_record("jobs.example", "t", "no contact info at all")
        assert scrub_phones(rec).body == rec.body

    def test_same_number_twice(self):
        rec = make_record("jobs.example", "t", "call 2125550001 or text 2125550001")
        scrubbed = scrub_phones(rec)
        assert extract_phones(scrubbed.body) == set()
        assert scrubbed.body.count("<PHONE>") == 2

    def test_overlapping_raw_forms(self):
        # 11-digit form contains the 10-digit form as a literal substring.
        text = "a 2125550001 b 12125550001"
        assert extract_phones(scrub_text(text)) == set()

    @settings(max_examples=200, deadline=None)
    @given(st.text(alphabet="0123456789 -().+abc电话\n", max_size=80))
    def test_scrub_is_total(self, text):
        assert extract_phones(scrub_text(text)) == set()


class TestDedup:
    def test_identical_content_one_retained(self):
        a = make_record("jobs.example", "Title", "Body text")
        b = make_record("jobs.example", "  title ", "body    TEXT")  # same after norm
        assert a.id == b.id
        assert dedup([a, b]) == [a]

    def test_distinct_input_identity(self):
        recs = [make_record("jobs.example", "t", f"body {i}") for i in range(5)]
        assert dedup(recs) == recs

    def test_ten_records_three_duplicates(self):
        recs = [make_record("jobs.example", "t", f"body {i}") for i in range(7)]
        recs += [recs[0], recs[3], recs[5]]
        assert len(recs) == 10
        assert len(dedup(recs)) == 7

    def test_idempotent(self):
        recs = [make_record("jobs.example", "t", f"body {i % 4}") for i in range(12)]
        once = dedup(recs)
        assert dedup(once) == once


class TestFilterDomains:
    def make(self, spec):
        out = []
        for dom, count in spec.items():
            out += [make_record(dom, "t", f"{dom} body {i}") for i in range(count)]
        return out

    def test_four_posts_dropped(self):
        kept, dropped = filter_domains(self.make({"small.example": 4, "big.example": 9}))
        assert {d.name for d in dropped} == {"small.example"}
        assert all(r.domain == "big.example" for r in kept)

    def test_exactly_five_kept(self):
        kept, dropped = filter_domains(self.make({"edge.example": 5}))
        assert dropped == []
        assert len(kept) == 5

    def test_mixed_fixture(self):
        recs = self.make({"a.example": 3, "b.example": 5, "c.example": 100})
        kept, dropped = filter_domains(recs)
        assert {d.name for d in dropped} == {"a.example"}
        assert len(kept) == 105
        # membership changes only; surviving records are untouched
        assert [r for r in recs if r.domain != "a.example"] == kept

    def test_min_posts_validated(self):
        with pytest.raises(ValueError):
            filter_domains([], min_posts=0)


@pytest.fixture
def lexicon():
    return build_category_lexicon(
        priority=["escort", "job_board"],
        keywords={"escort": ["escort", "sex"], "job_board": ["work", "chinesein"]},
    )


class TestCategorize:
    def test_chinesein_is_job_board(self, lexicon):
        doms = domains_from_records([make_record("chineseinla.com", "t", "b")])
        out = categorize_domains(doms, lexicon)
        assert out[0].category == "job_board"

    def test_escort_keyword(self, lexicon):
        doms = domains_from_records([make_record("cityescort.example", "t", "b")])
        assert categorize_domains(doms, lexicon)[0].category == "escort"

    def test_work_keyword(self, lexicon):
        doms = domains_from_records([make_record("500work.com", "t", "b")])
        assert categorize_domains(doms, lexicon)[0].category == "job_board"

    def test_unmatched_uncategorized(self, lexicon):
        doms = domains_from_records([make_record("example.org", "t", "b")])
        assert categorize_domains(doms, lexicon)[0].category == "uncategorized"

    def test_total_function(self, lexicon):
        recs = [make_record(f"dom{i}.example", "t", f"b{i}") for i in range(20)]
        recs += [make_record("workplace.example", "t", "b"), make_record("sexads.example", "t", "b")]
        out = categorize_domains(domains_from_records(recs), lexicon)
        assert len(out) == 22
        assert all(d.category for d in out)

    def test_duplicate_keyword_rejected(self):
        with pytest.raises(LexiconError):
            build_category_lexicon(
                priority=["escort", "job_board"],
                keywords={"escort": ["work"], "job_board": ["work"]},
            )

    def test_reserved_categories_required(self):
        with pytest.raises(LexiconError):
            build_category_lexicon(priority=["escort"], keywords={"escort": ["x"]})

    def test_load_from_toml(self, tmp_path):
        path = tmp_path / "cats.toml"
        path.write_text(
            'priority = ["escort", "job_board"]\n'
            "[keywords]\n"
            'escort = ["escort"]\njob_board = ["work"]\n'
        )
        lex = load_category_lexicon(path)
        assert lex.priority == ("escort", "job_board")


class TestIngest:
    def test_field_mapping(self, tmp_path):
        path = tmp_path / "ads.jsonl"
        path.write_text('{"domain":"chineseinla.com","title":"t","body":"b"}\n')
        records, report = ingest(path)
        assert len(records) == 1 and report.accepted == 1
        assert records[0].domain == "chineseinla.com"
        assert records[0].id == compute_id("t", "b", "chineseinla.com")

    def test_empty_body_rejected(self, tmp_path):
        path = tmp_path / "ads.jsonl"
        path.write_text('{"domain":"a.com","title":"t","body":"  "}\n')
        records, report = ingest(path)
        assert records == []
        assert len(report.errors) == 1

    def test_malformed_line_collected_not_fatal(self, tmp_path):
        path = tmp_path / "ads.jsonl"
        path.write_text(
            '{"domain":"a.com","title":"t","body":"b1"}\n'
            "{not json}\n"
            '{"domain":"a.com","title":"t","body":"b2"}\n'
        )
        records, report = ingest(path)
        assert len(records) == 2
        assert len(report.errors) == 1
        assert report.errors[0].line_no == 2

    def test_missing_field(self, tmp_path):
        path = tmp_path / "ads.jsonl"
        path.write_text('{"domain":"a.com","title":"t"}\n')
        _, report = ingest(path)
        assert "body" in report.errors[0].reason

    def test_phones_and_language_populated(self, tmp_path):
        path = tmp_path / "ads.jsonl"
        rows = [
            {"domain": "a.com", "title": "t", "body": "call 2125550001"},
            {"domain": "a.com", "title": "按摩", "body": "招聘按摩师"},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        records, _ = ingest(path)
        assert digits_of(records[0].phones) == {"2125550001"}
        assert records[1].language == "zh"
