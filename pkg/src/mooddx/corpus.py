"""Case records and their JSONL / CSV persistence."""

from __future__ import annotations

import csv
import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable

from .scales.catalog import ScaleCatalog, default_catalog

log = logging.getLogger(__name__)

GENDERS = ("male", "female", "unspecified")
RECORD_STAGES = ("raw", "relativized", "combined", "structured", "absent")
GOLD_LABELS = ("normal", "mood_disorder", "other_disease")
LABEL_COLUMN = "Mood Disorder"


class CaseLoadError(ValueError):
    def __init__(self, row: int, field_name: str, message: str):
        super().__init__(f"row {row}: field {field_name!r}: {message}")
        self.row = row
        self.field = field_name


class UnknownItemError(CaseLoadError):
    def __init__(self, row: int, item_id: str):
        ValueError.__init__(self, f"row {row}: unknown scale item id {item_id!r}")
        self.row = row
        self.field = "scale_scores"
        self.item_id = item_id


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    scale_scores: dict[str, int] = field(default_factory=dict)
    gender: str = "unspecified"
    age: int | None = None
    occupation: str = ""
    visit_date: date | None = None
    chief_complaint: str = ""
    present_illness: str = ""
    record_stage: str = "absent"
    structured_items: tuple[str, ...] = ()
    gold_label: str | None = None

    def __post_init__(self):
        if self.gender not in GENDERS:
            raise ValueError(f"gender must be one of {GENDERS}")
        if self.age is not None and (isinstance(self.age, bool) or not isinstance(self.age, int) or self.age < 0):
            raise ValueError("age must be a non-negative integer")
        if self.record_stage not in RECORD_STAGES:
            raise ValueError(f"record_stage must be one of {RECORD_STAGES}")
        if self.gold_label is not None and self.gold_label not in GOLD_LABELS:
            raise ValueError(f"gold_label must be one of {GOLD_LABELS}")
        narrative = bool(self.chief_complaint or self.present_illness or self.structured_items)
        if (self.record_stage == "absent") == narrative:
            raise ValueError("record_stage 'absent' must coincide with empty narrative fields")
        if self.structured_items and self.record_stage != "structured":
            raise ValueError("structured_items are only allowed at stage 'structured'")

    @property
    def has_record(self) -> bool:
        return self.record_stage != "absent"

    @property
    def is_mood(self) -> bool | None:
        if self.gold_label is None:
            return None
        return self.gold_label == "mood_disorder"

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "gender": self.gender,
            "age": self.age,
            "occupation": self.occupation,
            "visit_date": self.visit_date.isoformat() if self.visit_date else None,
            "chief_complaint": self.chief_complaint,
            "present_illness": self.present_illness,
            "record_stage": self.record_stage,
            "structured_items": list(self.structured_items),
            "scale_scores": dict(self.scale_scores),
            "gold_label": self.gold_label,
        }


@dataclass(frozen=True)
class LabeledPrediction:
    case_id: str
    predicted: bool
    gold: bool
    reasons: str = ""

    def __post_init__(self):
        if not isinstance(self.predicted, bool) or not isinstance(self.gold, bool):
            raise ValueError("predicted and gold must both be booleans")


def _as_int(value, row: int, name: str) -> int:
    if isinstance(value, bool):
        raise CaseLoadError(row, name, "boolean is not a score")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        try:
            f = float(value)
        except ValueError:
            raise CaseLoadError(row, name, f"not a number: {value!r}") from None
        if math.isfinite(f) and f.is_integer():
            return int(f)
    raise CaseLoadError(row, name, f"expected an integer score, got {value!r}")


def case_from_dict(obj: dict, row: int = 0, catalog: ScaleCatalog | None = None) -> CaseRecord:
    catalog = catalog or default_catalog()
    if not isinstance(obj, dict):
        raise CaseLoadError(row, "<row>", "expected a JSON object")
    if not obj.get("case_id"):
        raise CaseLoadError(row, "case_id", "missing")
    scores_raw = obj.get("scale_scores") or {}
    if not isinstance(scores_raw, dict):
        raise CaseLoadError(row, "scale_scores", "expected an object")
    scores = {}
    for item_id, value in scores_raw.items():
        if item_id not in catalog:
            raise UnknownItemError(row, item_id)
        v = _as_int(value, row, f"scale_scores.{item_id}")
        if not catalog.item(item_id).is_valid(v):
            raise CaseLoadError(row, f"scale_scores.{item_id}", f"score {v} outside the item's valid range")
        scores[item_id] = v
    visit = obj.get("visit_date")
    try:
        visit_date = date.fromisoformat(visit) if visit else None
    except (TypeError, ValueError):
        raise CaseLoadError(row, "visit_date", f"not an ISO date: {visit!r}") from None
    age = obj.get("age")
    if age is not None:
        age = _as_int(age, row, "age")
    items = obj.get("structured_items") or []
    if not isinstance(items, list) or not all(isinstance(i, str) for i in items):
        raise CaseLoadError(row, "structured_items", "expected a list of strings")
    try:
        return CaseRecord(
            case_id=str(obj["case_id"]),
            scale_scores=scores,
            gender=obj.get("gender") or "unspecified",
            age=age,
            occupation=obj.get("occupation") or "",
            visit_date=visit_date,
            chief_complaint=obj.get("chief_complaint") or "",
            present_illness=obj.get("present_illness") or "",
            record_stage=obj.get("record_stage") or "absent",
            structured_items=tuple(items),
            gold_label=obj.get("gold_label"),
        )
    except ValueError as exc:
        name = str(exc).split(" ", 1)[0]
        raise CaseLoadError(row, name, str(exc)) from None


_QUESTION_COL = re.compile(r"^([A-Za-z0-9]+) Q(\d+) Score$")
_TOTAL_COL = re.compile(r"^([A-Za-z0-9]+) Total Score$")


def column_to_item_id(column: str) -> str:
    """Map a tabular header such as 'PHQ9 Q1 Score' to a catalog item id."""
    m = _QUESTION_COL.match(column)
    if m:
        return f"{m.group(1).lower()}_Q{m.group(2)}"
    m = _TOTAL_COL.match(column)
    if m:
        return f"{m.group(1).lower()}_total_score"
    return column


def _read_csv(path: Path, catalog: ScaleCatalog) -> list[CaseRecord]:
    cases = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        for row_idx, row in enumerate(reader):
            scores = {}
            label = None
            case_id = row.get("case_id") or f"row{row_idx:05d}"
            for col, value in row.items():
                if col in ("case_id", None):
                    continue
                if col in (LABEL_COLUMN, "gold_label"):
                    if value in ("", None):
                        continue
                    if col == "gold_label":
                        label = value
                    else:
                        label = "mood_disorder" if _as_int(value, row_idx, col) == 1 else "normal"
                    continue
                if value in ("", None):
                    continue
                item_id = column_to_item_id(col)
                if item_id not in catalog:
                    raise UnknownItemError(row_idx, item_id)
                scores[item_id] = value
            cases.append(case_from_dict({"case_id": case_id, "scale_scores": scores, "gold_label": label}, row_idx, catalog))
    return cases


def load_cases(path: str | Path, format: str | None = None, catalog: ScaleCatalog | None = None) -> list[CaseRecord]:
    """Load cases in file order; JSONL for records, CSV for score-only tables."""
    path = Path(path)
    catalog = catalog or default_catalog()
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "jsonl")
    if fmt == "csv":
        cases = _read_csv(path, catalog)
    elif fmt == "jsonl":
        cases = []
        with open(path, encoding="utf-8") as f:
            for row_idx, line in enumerate(f):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CaseLoadError(row_idx, "<row>", f"invalid JSON: {exc.msg}") from None
                cases.append(case_from_dict(obj, row_idx, catalog))
    else:
        raise ValueError(f"unknown case format {fmt!r}")
    seen = set()
    for i, case in enumerate(cases):
        if case.case_id in seen:
            raise CaseLoadError(i, "case_id", f"duplicate id {case.case_id!r}")
        seen.add(case.case_id)
    log.info("loaded %d cases from %s: %s", len(cases), path, dict(label_counts(cases)))
    return cases


def save_cases(cases: Iterable[CaseRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for case in cases:
            f.write(json.dumps(case.to_dict(), ensure_ascii=False) + "\n")


def label_counts(cases: Iterable[CaseRecord]) -> Counter:
    counts = Counter({label: 0 for label in GOLD_LABELS})
    for case in cases:
        counts[case.gold_label or "unlabeled"] += 1
    return counts


def split_cases(cases: list[CaseRecord], retrieval_fraction: float = 0.8, seed: int = 0) -> tuple[list[CaseRecord], list[CaseRecord]]:
    """Random retrieval / test partition; the two id sets are disjoint."""
    import numpy as np

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(cases))
    cut = int(round(retrieval_fraction * len(cases)))
    retrieval = [cases[i] for i in sorted(order[:cut])]
    test = [cases[i] for i in sorted(order[cut:])]
    return retrieval, test
