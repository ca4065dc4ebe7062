from __future__ import annotations

import json
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mooddx.corpus import CaseRecord
from mooddx.providers import FailingProvider, ScriptedProvider
from mooddx.records import (
    DISORDER_CLASSES,
    LABEL_BLOCKLIST,
    DateScanner,
    RecordProcessingError,
    RecordStagePayload,
    advance,
    combine_key_elements,
    contains_label,
    demographics_sentence,
    export_revisions,
    import_revisions,
    normalize_items,
    process_record,
    record_text,
    relative_phrase,
    relativize_dates,
    strip_labels,
    structurize,
)
from mooddx.cache import ProviderError


def raw_case(illness="On 2023-06-01 the visitor began to feel low.", occupation="teacher", **kw):
    base = dict(case_id="r1", gender="female", age=34, occupation=occupation, visit_date=date(2024, 3, 1),
                chief_complaint="Low mood.", present_illness=illness, record_stage="raw")
    base.update(kw)
    return CaseRecord(**base)


def test_rule_based_relativization_example():
    payload = relativize_dates(raw_case())
    assert "9 months ago" in payload.text
    assert not DateScanner().scan(payload.text)
    assert payload.stage == "relativized"


def test_text_without_dates_is_unchanged():
    case = raw_case("Felt low for a long time.")
    assert relativize_dates(case).text == "Felt low for a long time."


def test_date_scanner_patterns():
    s = DateScanner()
    for text in ("2023-06-01", "2023/6/1", "2023年6月", "June 1, 2023", "1 June 2023", "March 2024", "2023-05"):
        assert s.scan(f"since {text} worse"), text
    assert not s.scan("for 3 months, about 20 times")


def test_relative_phrases():
    visit = date(2024, 3, 1)
    assert relative_phrase(date(2024, 3, 1), visit) == "on the day of the visit"
    assert relative_phrase(date(2024, 2, 23), visit) == "7 days ago"
    assert relative_phrase(date(2024, 2, 1), visit) == "4 weeks ago"
    assert relative_phrase(date(2021, 3, 1), visit) == "3 years ago"
    assert relative_phrase(date(2024, 3, 1), visit, day_known=False) == "during the month of the visit"


def test_provider_echo_fails_after_one_retry():
    case = raw_case()
    p = ScriptedProvider([case.present_illness, case.present_illness])
    with pytest.raises(RecordProcessingError) as err:
        relativize_dates(case, p)
    assert len(p.calls) == 2
    assert "2023-06-01" in err.value.offending[0]


def test_provider_correction_on_second_try():
    p = ScriptedProvider(["On 2023-06-01 low.", "About 9 months ago the visitor began to feel low."])
    payload = relativize_dates(raw_case(), p)
    assert payload.provenance == "provider_generated" and "9 months ago" in payload.text


def test_provider_unavailable_propagates():
    with pytest.raises(ProviderError):
        relativize_dates(raw_case(), FailingProvider())


def test_combine_golden_paragraph():
    case = advance(raw_case(), relativize_dates(raw_case()))
    text = combine_key_elements(case).text
    assert text == ("Female, 34 years old, occupation: teacher. Chief complaint: Low mood. "
                    "Present illness: 9 months ago the visitor began to feel low.")


def test_combine_omits_empty_occupation_and_requires_record():
    case = raw_case("No dates here.", occupation="", record_stage="relativized")
    assert demographics_sentence(case) == "Female, 34 years old."
    assert "occupation" not in combine_key_elements(case).text
    with pytest.raises(RecordProcessingError):
        combine_key_elements(CaseRecord("x"))
    with pytest.raises(RecordProcessingError):
        combine_key_elements(raw_case())  # still at raw


def test_structurize_normalizes_delimiters_and_strips_labels():
    case = raw_case("No dates.", record_stage="combined")
    reply = json.dumps(["- low mood for months", "* Depressive Disorders history", "poor appetite"])
    payload = structurize(case, ScriptedProvider([reply]))
    assert payload.text == ("- low mood for months", "- history", "- poor appetite")
    assert not any(contains_label(i) for i in payload.text)


def test_structurize_prose_repairs_once_then_errors():
    case = raw_case("No dates.", record_stage="combined")
    p = ScriptedProvider(["The visitor feels sad.", "Still prose, sorry."])
    with pytest.raises(RecordProcessingError):
        structurize(case, p)
    assert len(p.calls) == 2


def test_stages_only_advance_by_one():
    case = raw_case()
    with pytest.raises(RecordProcessingError):
        advance(case, RecordStagePayload("combined", "x"))
    with pytest.raises(RecordProcessingError):
        advance(case, RecordStagePayload("relativized", "since 2023-06-01"))


def test_full_pipeline_and_record_text():
    p = ScriptedProvider([json.dumps(["- low mood", "- early waking"])])
    done = process_record(raw_case(), p)
    assert done.record_stage == "structured"
    assert record_text(done, "structured") == "- low mood\n- early waking"
    assert record_text(done, "unstructured").startswith("Female, 34 years old")
    assert record_text(CaseRecord("x"), "structured") is None


def test_revision_round_trip(tmp_path):
    rows = [("a", RecordStagePayload("structured", ("- low mood",), "provider_generated")),
            ("b", RecordStagePayload("relativized", "3 weeks ago worse", "provider_generated"))]
    path = tmp_path / "rev.jsonl"
    export_revisions(rows, path)
    back = list(import_revisions(path))
    assert [cid for cid, _ in back] == ["a", "b"]
    assert all(p.provenance == "human_revised" for _, p in back)
    assert back[0][1].text == ("- low mood",)


def test_blocklist_contents():
    assert len(DISORDER_CLASSES) == 18
    assert {"depression", "bipolar", "schizophrenia"} <= {t.lower() for t in LABEL_BLOCKLIST}


@settings(max_examples=100, deadline=None)
@given(st.lists(st.text(min_size=0, max_size=20), max_size=4),
       st.lists(st.sampled_from(sorted(LABEL_BLOCKLIST)), min_size=1, max_size=3))
def test_leakage_guard_property(fillers, labels):
    # labels interleaved with arbitrary text, including labels split around others
    pieces = []
    for i, label in enumerate(labels):
        pieces.append(fillers[i] if i < len(fillers) else "")
        pieces.append(label.upper() if i % 2 else label)
    items = normalize_items(["".join(pieces)])
    assert not any(contains_label(i) for i in items)
    assert not contains_label(strip_labels("".join(pieces)))
