"""Medical-record processing: relativize dates, combine key elements, structurize.

Stages only advance ``raw -> relativized -> combined -> structured`` and each
stage's payload is validated before a record moves on. Provider output is
never trusted directly: dates are re-scanned, item lists are re-parsed and
diagnosis labels are stripped.
"""

from __future__ import annotations

import calendar
import json
import re
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .corpus import CaseRecord
from .prompts import ResponseFormatError, ask_with_repair, extract_json, render
from .providers import ChatProvider

STAGE_ORDER = ("raw", "relativized", "combined", "structured")
PROVENANCES = ("source", "provider_generated", "human_revised")

DISORDER_CLASSES = (
    "Neurodevelopmental Disorders",
    "Schizophrenia Spectrum and Other Psychotic Disorders",
    "Bipolar and Related Disorders",
    "Depressive Disorders",
    "Anxiety Disorders",
    "Obsessive-Compulsive and Related Disorders",
    "Trauma- and Stressor-Related Disorders",
    "Dissociative Disorders",
    "Somatic Symptom and Related Disorders",
    "Feeding and Eating Disorders",
    "Elimination Disorders",
    "Sleep-Wake Disorders",
    "Sexual Dysfunctions",
    "Gender Dysphoria",
    "Disruptive, Impulse-Control, and Conduct Disorders",
    "Substance-Related and Addictive Disorders",
    "Neurocognitive Disorders",
    "Personality Disorders",
)
LABEL_BLOCKLIST = DISORDER_CLASSES + ("depression", "bipolar", "schizophrenia")


class RecordProcessingError(RuntimeError):
    def __init__(self, message: str, offending: Sequence[str] = ()):
        super().__init__(message + (f": {list(offending)}" if offending else ""))
        self.offending = list(offending)


_MONTHS = {name.lower(): i for i, name in enumerate(calendar.month_name) if name}
_MONTHS.update({name.lower(): i for i, name in enumerate(calendar.month_abbr) if name})
_MONTH_RE = "|".join(sorted((re.escape(m) for m in _MONTHS), key=len, reverse=True))

DEFAULT_DATE_PATTERNS: dict[str, str] = {
    "iso": r"\b(?P<y>\d{4})-(?P<m>\d{1,2})-(?P<d>\d{1,2})\b",
    "slash": r"\b(?P<y>\d{4})[/.](?P<m>\d{1,2})[/.](?P<d>\d{1,2})\b",
    "cjk": r"(?P<y>\d{4})\s*年\s*(?P<m>\d{1,2})\s*月(?:\s*(?P<d>\d{1,2})\s*[日号])?",
    "month_day_year": rf"\b(?P<mn>{_MONTH_RE})\.?\s+(?P<d>\d{{1,2}})(?:st|nd|rd|th)?,?\s+(?P<y>\d{{4}})\b",
    "day_month_year": rf"\b(?P<d>\d{{1,2}})(?:st|nd|rd|th)?\s+(?P<mn>{_MONTH_RE})\.?,?\s+(?P<y>\d{{4}})\b",
    "month_year": rf"\b(?P<mn>{_MONTH_RE})\.?,?\s+(?P<y>\d{{4}})\b",
    "year_month": r"\b(?P<y>\d{4})-(?P<m>\d{1,2})\b(?!-\d)",
}


@dataclass(frozen=True)
class DateMention:
    start: int
    end: int
    text: str
    when: date
    day_known: bool


class DateScanner:
    """Finds absolute calendar dates using an ordered, configurable regex set."""

    def __init__(self, patterns: dict[str, str] | None = None):
        self.patterns = {k: re.compile(v, re.IGNORECASE) for k, v in (patterns or DEFAULT_DATE_PATTERNS).items()}

    def scan(self, text: str) -> list[DateMention]:
        found: list[DateMention] = []
        taken: list[tuple[int, int]] = []
        for rx in self.patterns.values():
            for m in rx.finditer(text):
                if any(m.start() < e and s < m.end() for s, e in taken):
                    continue
                when, day_known = _to_date(m)
                if when is None:
                    continue
                taken.append((m.start(), m.end()))
                found.append(DateMention(m.start(), m.end(), m.group(0), when, day_known))
        return sorted(found, key=lambda d: d.start)

    def offending(self, text: str) -> list[str]:
        return [d.text for d in self.scan(text)]


def _to_date(m: re.Match) -> tuple[date | None, bool]:
    g = m.groupdict()
    month = _MONTHS[g["mn"].lower().rstrip(".")] if g.get("mn") else int(g["m"])
    day = int(g["d"]) if g.get("d") else 1
    try:
        return date(int(g["y"]), month, day), bool(g.get("d"))
    except ValueError:
        return None, False


def relative_phrase(when: date, visit: date, day_known: bool = True) -> str:
    """Deterministic relative expression of ``when`` as seen from the visit date."""
    if when > visit:
        return f"{relative_phrase(visit, when, day_known).removesuffix(' ago')} after the visit"
    days = (visit - when).days
    months = (visit.year - when.year) * 12 + visit.month - when.month
    if day_known and visit.day < when.day:
        months -= 1
    if not day_known and months == 0:
        return "during the month of the visit"
    if days == 0:
        return "on the day of the visit"
    if day_known and days < 14:
        return _plural(days, "day") + " ago"
    if day_known and days < 60 and months < 2:
        return _plural(days // 7, "week") + " ago"
    if months < 24:
        return _plural(max(months, 1), "month") + " ago"
    return _plural(months // 12, "year") + " ago"


def _plural(n: int, unit: str) -> str:
    return f"{n} {unit}{'' if n == 1 else 's'}"


_LEADING_PREP = re.compile(r"(?:\b(?:on|in|at)\s+)$", re.IGNORECASE)


def relativize_text(text: str, visit: date, scanner: DateScanner | None = None) -> str:
    scanner = scanner or DateScanner()
    out, pos = [], 0
    for mention in scanner.scan(text):
        head = text[pos:mention.start]
        phrase = relative_phrase(mention.when, visit, mention.day_known)
        if phrase.endswith(" ago") or phrase.endswith(" visit"):
            head = _LEADING_PREP.sub("", head)
        out.append(head)
        out.append(phrase)
        pos = mention.end
    out.append(text[pos:])
    return "".join(out)


@dataclass(frozen=True)
class RecordStagePayload:
    stage: str
    text: str | tuple[str, ...]
    provenance: str = "source"

    def __post_init__(self):
        if self.stage not in STAGE_ORDER:
            raise ValueError(f"stage must be one of {STAGE_ORDER}")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}")
        if self.stage == "structured":
            if isinstance(self.text, str) or not all(isinstance(t, str) and t.startswith("- ") for t in self.text):
                raise ValueError("structured payload must be a list of '- ' prefixed items")
        elif not isinstance(self.text, str):
            raise ValueError(f"{self.stage} payload must be text")

    def to_dict(self, case_id: str) -> dict:
        text = list(self.text) if self.stage == "structured" else self.text
        return {"case_id": case_id, "stage": self.stage, "text": text, "provenance": self.provenance}


def stage_index(stage: str) -> int:
    return STAGE_ORDER.index(stage) if stage in STAGE_ORDER else -1


def _require_stage(record: CaseRecord, minimum: str) -> None:
    if not record.has_record:
        raise RecordProcessingError(f"case {record.case_id} has no medical record")
    if stage_index(record.record_stage) < stage_index(minimum):
        raise RecordProcessingError(f"case {record.case_id} is at stage {record.record_stage}; needs {minimum} or later")


def validate_relativized(text: str, scanner: DateScanner | None = None) -> None:
    residual = (scanner or DateScanner()).offending(text)
    if residual:
        raise RecordProcessingError("absolute dates remain after relativization", residual)


def relativize_dates(record: CaseRecord, provider: ChatProvider | None = None, scanner: DateScanner | None = None) -> RecordStagePayload:
    """Rewrite absolute dates in the present illness relative to the visit date.

    Without a provider the deterministic rule-based rewrite is used.
    """
    _require_stage(record, "raw")
    if not record.present_illness or record.visit_date is None:
        raise RecordProcessingError(f"case {record.case_id} needs present_illness and visit_date")
    scanner = scanner or DateScanner()
    if not scanner.scan(record.present_illness):
        return RecordStagePayload("relativized", record.present_illness, "source")
    if provider is None:
        text = relativize_text(record.present_illness, record.visit_date, scanner)
        validate_relativized(text, scanner)
        return RecordStagePayload("relativized", text, "source")
    messages = [{"role": "user", "content": render(
        "record_relativize", visit_date=record.visit_date.isoformat(), present_illness=record.present_illness)}]
    reply = provider.complete(messages).strip()
    residual = scanner.offending(reply)
    if residual:
        messages += [
            {"role": "assistant", "content": reply},
            {"role": "user", "content": "The rewritten text still contains absolute dates: "
             + "; ".join(residual) + ". Replace every one of them with a relative time expression."},
        ]
        reply = provider.complete(messages).strip()
        validate_relativized(reply, scanner)
    return RecordStagePayload("relativized", reply, "provider_generated")


def demographics_sentence(record: CaseRecord) -> str:
    gender = {"male": "Male", "female": "Female"}.get(record.gender, "Gender unspecified")
    parts = [gender, f"{record.age} years old" if record.age is not None else "age unknown"]
    if record.occupation.strip():
        parts.append(f"occupation: {record.occupation.strip()}")
    return ", ".join(parts) + "."


def combine_key_elements(record: CaseRecord) -> RecordStagePayload:
    """Demographics, chief complaint and present illness as one paragraph.

    The present-illness wording is carried over untouched.
    """
    _require_stage(record, "relativized")
    missing = [f for f in ("chief_complaint", "present_illness") if not getattr(record, f).strip()]
    if missing:
        raise RecordProcessingError(f"case {record.case_id} lacks mandatory field(s)", missing)
    text = (
        f"{demographics_sentence(record)} Chief complaint: {record.chief_complaint.strip()} "
        f"Present illness: {record.present_illness.strip()}"
    )
    return RecordStagePayload("combined", " ".join(text.split("\n")), "source")


_BLOCK_RX = [re.compile(re.escape(term), re.IGNORECASE) for term in sorted(LABEL_BLOCKLIST, key=len, reverse=True)]


def strip_labels(item: str) -> str:
    """Remove blocklisted disorder names; repeats until nothing matches."""
    prev = None
    while prev != item:
        prev = item
        for rx in _BLOCK_RX:
            item = rx.sub("", item)
    return re.sub(r"\s{2,}", " ", item).strip()


def contains_label(text: str) -> bool:
    return any(rx.search(text) for rx in _BLOCK_RX)


def normalize_items(raw: Iterable[str]) -> tuple[str, ...]:
    items = []
    for entry in raw:
        body = re.sub(r"^\s*(?:[-*•]\s*)+", "", str(entry)).strip()
        body = strip_labels(body).strip(" ,;:.")
        if body:
            items.append(f"- {body}")
    return tuple(items)


def _parse_items(reply: str) -> tuple[str, ...]:
    value = extract_json(reply)
    if isinstance(value, dict):
        lists = [v for v in value.values() if isinstance(v, list)]
        value = lists[0] if len(lists) == 1 else None
    if not isinstance(value, list) or not value or not all(isinstance(v, str) for v in value):
        raise ResponseFormatError("expected a non-empty JSON array of strings")
    items = normalize_items(value)
    if not items:
        raise ResponseFormatError("no usable items after normalization")
    return items


def structurize(record: CaseRecord, provider: ChatProvider) -> RecordStagePayload:
    _require_stage(record, "combined")
    combined = combine_key_elements(record).text
    messages = [{"role": "user", "content": render("record_structurize", record_text=combined)}]
    try:
        items, _ = ask_with_repair(provider, messages, _parse_items)
    except ResponseFormatError as exc:
        raise RecordProcessingError(f"case {record.case_id}: structurization failed after repair ({exc})") from exc
    return RecordStagePayload("structured", items, "provider_generated")


def advance(record: CaseRecord, payload: RecordStagePayload) -> CaseRecord:
    """Apply a validated payload; stages may only move forward by one step."""
    if stage_index(payload.stage) != stage_index(record.record_stage) + 1:
        raise RecordProcessingError(f"cannot move case {record.case_id} from {record.record_stage} to {payload.stage}")
    if payload.stage == "relativized":
        validate_relativized(payload.text)
        return replace(record, present_illness=payload.text, record_stage="relativized")
    if payload.stage == "combined":
        return replace(record, record_stage="combined")
    if any(contains_label(i) for i in payload.text):
        raise RecordProcessingError("structured items contain disorder labels")
    return replace(record, structured_items=tuple(payload.text), record_stage="structured")


def process_record(record: CaseRecord, provider: ChatProvider | None, relativize_with_provider: bool = False) -> CaseRecord:
    """Run every remaining stage for one record."""
    if not record.has_record:
        return record
    if record.record_stage == "raw":
        record = advance(record, relativize_dates(record, provider if relativize_with_provider else None))
    if record.record_stage == "relativized":
        record = advance(record, combine_key_elements(record))
    if record.record_stage == "combined":
        if provider is None:
            raise RecordProcessingError("structurization requires a provider")
        record = advance(record, structurize(record, provider))
    return record


def record_text(record: CaseRecord, fmt: str = "structured") -> str | None:
    """Text handed to matching and agents; None for clients without a record."""
    if not record.has_record:
        return None
    if fmt == "structured":
        if record.record_stage != "structured":
            raise RecordProcessingError(f"case {record.case_id} is not structured")
        return "\n".join(record.structured_items)
    if fmt == "unstructured":
        return combine_key_elements(record).text
    raise ValueError(f"unknown record format {fmt!r}")


def export_revisions(rows: Iterable[tuple[str, RecordStagePayload]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for case_id, payload in rows:
            f.write(json.dumps(payload.to_dict(case_id), ensure_ascii=False) + "\n")


def import_revisions(path: str | Path) -> Iterator[tuple[str, RecordStagePayload]]:
    """Read human-edited payloads back; each is re-validated and marked human_revised."""
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f):
            if not line.strip():
                continue
            obj = json.loads(line)
            text = obj["text"]
            if obj["stage"] == "structured":
                text = normalize_items(text)
            elif obj["stage"] == "relativized":
                validate_relativized(text)
            try:
                payload = RecordStagePayload(obj["stage"], text, "human_revised")
            except ValueError as exc:
                raise RecordProcessingError(f"line {line_no}: {exc}") from None
            yield obj["case_id"], payload
