"""Diagnostic and differential criteria store plus the extraction workflow."""

from __future__ import annotations

import csv
import hashlib
import json
import re
from collections import Counter
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .prompts import ResponseFormatError, ask_with_repair, extract_json, render
from .providers import ChatProvider
from .records import DISORDER_CLASSES

KINDS = ("diagnostic", "differential")
MOOD_CLASSES = ("Bipolar and Related Disorders", "Depressive Disorders")
TSV_FIELDS = ("entry_id", "disorder_class", "disorder_name", "kind", "text", "source_note")

CROSS_REFERENCE = re.compile(
    r"\b(?:see (?:above|below|criteri\w*)|as (?:above|below|described|noted)|the above|aforementioned|"
    r"previously (?:mentioned|described|listed)|criteri(?:on|a) [A-Z](?:\d|\b)|in criteri\w+)",
    re.IGNORECASE,
)
AGE_TOKEN = re.compile(
    r"\b(?:ages? \d+(?:\s*(?:-|to)\s*\d+)?|\d+ (?:years?|yrs?)(?: old| of age)?|"
    r"adolescen(?:ts?|ce)|child(?:ren|hood)?|adults?|elderly)\b",
    re.IGNORECASE,
)

# First match wins; specific phrases precede the generic keywords they contain.
CLASS_KEYWORDS: tuple[tuple[str, str], ...] = (
    ("disruptive mood dysregulation", "Depressive Disorders"),
    ("premenstrual dysphoric", "Depressive Disorders"),
    ("illness anxiety", "Somatic Symptom and Related Disorders"),
    ("personality", "Personality Disorders"),
    ("trichotillomania", "Obsessive-Compulsive and Related Disorders"),
    ("excoriation", "Obsessive-Compulsive and Related Disorders"),
    ("body dysmorphic", "Obsessive-Compulsive and Related Disorders"),
    ("hoarding", "Obsessive-Compulsive and Related Disorders"),
    ("obsess", "Obsessive-Compulsive and Related Disorders"),
    ("compuls", "Obsessive-Compulsive and Related Disorders"),
    ("kleptomania", "Disruptive, Impulse-Control, and Conduct Disorders"),
    ("pyromania", "Disruptive, Impulse-Control, and Conduct Disorders"),
    ("intermittent explosive", "Disruptive, Impulse-Control, and Conduct Disorders"),
    ("oppositional", "Disruptive, Impulse-Control, and Conduct Disorders"),
    ("conduct", "Disruptive, Impulse-Control, and Conduct Disorders"),
    ("gender dysphoria", "Gender Dysphoria"),
    ("attention-deficit", "Neurodevelopmental Disorders"),
    ("adhd", "Neurodevelopmental Disorders"),
    ("autism", "Neurodevelopmental Disorders"),
    ("intellectual disability", "Neurodevelopmental Disorders"),
    ("tic disorder", "Neurodevelopmental Disorders"),
    ("tourette", "Neurodevelopmental Disorders"),
    ("schizo", "Schizophrenia Spectrum and Other Psychotic Disorders"),
    ("psychotic", "Schizophrenia Spectrum and Other Psychotic Disorders"),
    ("delusional", "Schizophrenia Spectrum and Other Psychotic Disorders"),
    ("bipolar", "Bipolar and Related Disorders"),
    ("cyclothymi", "Bipolar and Related Disorders"),
    ("mani", "Bipolar and Related Disorders"),
    ("depress", "Depressive Disorders"),
    ("dysthymi", "Depressive Disorders"),
    ("post-traumatic", "Trauma- and Stressor-Related Disorders"),
    ("posttraumatic", "Trauma- and Stressor-Related Disorders"),
    ("acute stress", "Trauma- and Stressor-Related Disorders"),
    ("adjustment", "Trauma- and Stressor-Related Disorders"),
    ("attachment", "Trauma- and Stressor-Related Disorders"),
    ("dissociat", "Dissociative Disorders"),
    ("depersonali", "Dissociative Disorders"),
    ("somatic symptom", "Somatic Symptom and Related Disorders"),
    ("conversion", "Somatic Symptom and Related Disorders"),
    ("factitious", "Somatic Symptom and Related Disorders"),
    ("anorexia", "Feeding and Eating Disorders"),
    ("bulimia", "Feeding and Eating Disorders"),
    ("binge", "Feeding and Eating Disorders"),
    ("eating", "Feeding and Eating Disorders"),
    ("enuresis", "Elimination Disorders"),
    ("encopresis", "Elimination Disorders"),
    ("insomnia", "Sleep-Wake Disorders"),
    ("hypersomnolence", "Sleep-Wake Disorders"),
    ("narcolepsy", "Sleep-Wake Disorders"),
    ("sleep", "Sleep-Wake Disorders"),
    ("sexual", "Sexual Dysfunctions"),
    ("erectile", "Sexual Dysfunctions"),
    ("anxiety", "Anxiety Disorders"),
    ("panic", "Anxiety Disorders"),
    ("phobi", "Anxiety Disorders"),
    ("mutism", "Anxiety Disorders"),
    ("substance", "Substance-Related and Addictive Disorders"),
    ("alcohol", "Substance-Related and Addictive Disorders"),
    ("opioid", "Substance-Related and Addictive Disorders"),
    ("cannabis", "Substance-Related and Addictive Disorders"),
    ("stimulant", "Substance-Related and Addictive Disorders"),
    ("gambling", "Substance-Related and Addictive Disorders"),
    ("delirium", "Neurocognitive Disorders"),
    ("neurocognitive", "Neurocognitive Disorders"),
    ("dementia", "Neurocognitive Disorders"),
)


class KnowledgeBaseError(ValueError):
    pass


def classify_disorder(name: str) -> str | None:
    low = name.lower()
    for keyword, cls in CLASS_KEYWORDS:
        if keyword in low:
            return cls
    return None


def normalize_text(text: str) -> str:
    return " ".join(text.lower().split())


def make_entry_id(disorder_name: str, kind: str, text: str) -> str:
    material = "\x1f".join((normalize_text(disorder_name), kind, normalize_text(text)))
    return hashlib.sha256(material.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class CriterionEntry:
    entry_id: str
    disorder_class: str
    disorder_name: str
    kind: str
    text: str
    source_note: str = ""

    def __post_init__(self):
        if self.disorder_class not in DISORDER_CLASSES:
            raise KnowledgeBaseError(f"unknown disorder class {self.disorder_class!r}")
        if self.kind not in KINDS:
            raise KnowledgeBaseError(f"kind must be one of {KINDS}")
        if not self.text.strip():
            raise KnowledgeBaseError("criterion text is empty")
        ref = CROSS_REFERENCE.search(self.text)
        if ref:
            raise KnowledgeBaseError(f"criterion is not self-contained: {ref.group(0)!r}")

    @classmethod
    def create(cls, disorder_name: str, kind: str, text: str, disorder_class: str | None = None, source_note: str = "") -> "CriterionEntry":
        disorder_class = disorder_class or classify_disorder(disorder_name)
        if disorder_class is None:
            raise KnowledgeBaseError(f"cannot infer a disorder class for {disorder_name!r}")
        return cls(make_entry_id(disorder_name, kind, text), disorder_class, disorder_name, kind, text, source_note)


class KnowledgeBase:
    """Immutable, ordered collection of criteria with unique ids."""

    def __init__(self, entries: Iterable[CriterionEntry]):
        self.entries: tuple[CriterionEntry, ...] = tuple(entries)
        self._by_id: dict[str, CriterionEntry] = {}
        for e in self.entries:
            if e.entry_id in self._by_id:
                raise KnowledgeBaseError(f"duplicate entry_id {e.entry_id!r}")
            self._by_id[e.entry_id] = e

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[CriterionEntry]:
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, KnowledgeBase) and self.entries == other.entries

    def get(self, entry_id: str) -> CriterionEntry:
        return self._by_id[entry_id]

    def class_counts(self) -> Counter:
        return Counter(e.disorder_class for e in self.entries)

    def missing_mood_classes(self) -> list[str]:
        counts = self.class_counts()
        return [c for c in MOOD_CLASSES if counts[c] == 0]

    def require_mood_coverage(self) -> None:
        missing = self.missing_mood_classes()
        if missing:
            raise KnowledgeBaseError(f"knowledge base has no criteria for {missing}")

    def to_json(self) -> str:
        return json.dumps([asdict(e) for e in self.entries], ensure_ascii=False, indent=1)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def _entry_from_dict(obj: dict, where: str) -> CriterionEntry:
    try:
        return CriterionEntry(**{k: obj.get(k, "") for k in TSV_FIELDS})
    except (TypeError, KnowledgeBaseError) as exc:
        raise KnowledgeBaseError(f"{where}: {exc}") from None


def load_kb(path: str | Path) -> KnowledgeBase:
    """Load a JSON-array KB or a tab-separated review export."""
    path = Path(path)
    if path.suffix.lower() in (".tsv", ".txt"):
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f, delimiter="\t"))
        return KnowledgeBase(_entry_from_dict(r, f"{path}:{i + 2}") for i, r in enumerate(rows))
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise KnowledgeBaseError(f"{path}: expected a JSON array")
    return KnowledgeBase(_entry_from_dict(o, f"{path}[{i}]") for i, o in enumerate(data))


def export_for_review(kb: KnowledgeBase, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=TSV_FIELDS, delimiter="\t", lineterminator="\n")
        writer.writeheader()
        for e in kb:
            writer.writerow(asdict(e))


@lru_cache(maxsize=1)
def default_kb() -> KnowledgeBase:
    with resources.as_file(resources.files("mooddx").joinpath("data", "kb_fixture.json")) as p:
        return load_kb(p)


def _split_named(item: str, fallback: str) -> tuple[str, str]:
    head, sep, _ = item.partition(":")
    if sep and head.strip() and len(head) <= 80:
        return head.strip(), item.strip()
    return fallback, f"{fallback}: {item.strip()}"


def _string_list(reply: str) -> list[str]:
    value = extract_json(reply)
    if isinstance(value, dict):
        lists = [v for v in value.values() if isinstance(v, list)]
        value = lists[0] if len(lists) == 1 else None
    if not isinstance(value, list) or not all(isinstance(v, str) and v.strip() for v in value):
        raise ResponseFormatError("expected a JSON array of non-empty strings")
    return [v.strip() for v in value]


def _check_ages(source: str, outputs: Sequence[str]) -> None:
    joined = " ".join(outputs).lower()
    lost = sorted({t.lower() for t in AGE_TOKEN.findall(source)} - {t for t in _ages_in(joined)})
    if lost:
        raise ResponseFormatError(f"age restrictions dropped from the source: {lost}")


def _ages_in(text: str) -> set[str]:
    return {t.lower() for t in AGE_TOKEN.findall(text)}


def _check_self_contained(items: Sequence[str]) -> None:
    for item in items:
        ref = CROSS_REFERENCE.search(item)
        if ref:
            raise ResponseFormatError(f"entry is not self-contained ({ref.group(0)!r}): {item[:60]}")


def extract_diagnostic(raw_text: str, disorder_name: str, provider: ChatProvider, disorder_class: str | None = None,
                       source_note: str = "") -> list[CriterionEntry]:
    if not raw_text.strip():
        raise KnowledgeBaseError("source text is empty")
    disorder_class = disorder_class or classify_disorder(disorder_name)
    if disorder_class is None:
        raise KnowledgeBaseError(f"cannot infer a disorder class for {disorder_name!r}")

    def parse(reply: str) -> list[str]:
        items = _string_list(reply)
        if not items:
            raise ResponseFormatError("no criteria returned")
        _check_self_contained(items)
        _check_ages(raw_text, items)
        return items

    messages = [{"role": "user", "content": render("kb_extract_diagnostic", disease_name=disorder_name, source_text=raw_text.strip())}]
    try:
        items, _ = ask_with_repair(provider, messages, parse)
    except ResponseFormatError as exc:
        raise KnowledgeBaseError(f"extraction for {disorder_name!r} failed after repair: {exc}") from exc
    out = []
    for item in items:
        name, text = _split_named(item, disorder_name)
        out.append(CriterionEntry.create(name, "diagnostic", text, disorder_class, source_note))
    return out


def split_differential(raw_text: str, provider: ChatProvider, source_note: str = "") -> list[CriterionEntry]:
    """Split one differential paragraph into two standalone criteria for distinct disorders."""
    if not raw_text.strip():
        raise KnowledgeBaseError("source text is empty")

    def parse(reply: str) -> list[tuple[str, str, str]]:
        items = _string_list(reply)
        if len(items) != 2:
            raise ResponseFormatError(f"expected exactly 2 criteria, got {len(items)}")
        _check_self_contained(items)
        _check_ages(raw_text, items)
        named = []
        for item in items:
            head, sep, _ = item.partition(":")
            if not sep or not head.strip():
                raise ResponseFormatError(f"entry does not name its disorder: {item[:60]}")
            cls = classify_disorder(head)
            if cls is None:
                raise ResponseFormatError(f"unrecognized disorder name {head.strip()!r}")
            named.append((head.strip(), item, cls))
        if normalize_text(named[0][0]) == normalize_text(named[1][0]):
            raise ResponseFormatError(f"both entries name the same disorder {named[0][0]!r}")
        return named

    messages = [{"role": "user", "content": render("kb_split_differential", source_text=raw_text.strip())}]
    try:
        named, _ = ask_with_repair(provider, messages, parse)
    except ResponseFormatError as exc:
        raise KnowledgeBaseError(f"differential split failed after repair: {exc}") from exc
    return [CriterionEntry.create(name, "differential", text, cls, source_note) for name, text, cls in named]
