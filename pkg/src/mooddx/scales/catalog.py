"""Scale catalog: item metadata, option texts and interpretation bands."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

RATERS = ("self_reported", "clinician")
RATER_LABELS = {"self_reported": "Self-reported", "clinician": "Clinician-rated"}


class CatalogError(ValueError):
    pass


class ScoreRangeError(CatalogError):
    def __init__(self, item_id: str, value: int):
        super().__init__(f"score {value!r} is outside the valid range of item {item_id!r}")
        self.item_id = item_id
        self.value = value


@dataclass(frozen=True)
class Band:
    low: int
    high: int
    text: str

    def label(self) -> str:
        return f"{self.low}-{self.high} = {self.text}"


@dataclass(frozen=True)
class ScaleItem:
    item_id: str
    scale_id: str
    kind: str
    rater: str
    question_text: str
    summary: str
    options: tuple[tuple[int, str], ...] = ()
    score_range: tuple[int, int] = (0, 0)
    bands: tuple[Band, ...] = ()
    no_symptom_max: int | None = None

    def __post_init__(self):
        if self.kind not in ("question", "total"):
            raise CatalogError(f"{self.item_id}: unknown kind {self.kind!r}")
        if self.rater not in RATERS:
            raise CatalogError(f"{self.item_id}: unknown rater {self.rater!r}")
        scores = [s for s, _ in self.options]
        if any(b <= a for a, b in zip(scores, scores[1:])):
            raise CatalogError(f"{self.item_id}: option scores must be strictly increasing")
        if self.bands:
            lo, hi = self.score_range
            expected = lo
            for band in self.bands:
                if band.low != expected or band.high < band.low:
                    raise CatalogError(f"{self.item_id}: bands must be disjoint and contiguous")
                expected = band.high + 1
            if expected - 1 != hi:
                raise CatalogError(f"{self.item_id}: bands do not cover {lo}-{hi}")

    def is_valid(self, value: int) -> bool:
        if isinstance(value, bool) or not isinstance(value, int):
            return False
        if self.options:
            return any(s == value for s, _ in self.options)
        lo, hi = self.score_range
        return lo <= value <= hi

    def check(self, value: int) -> None:
        if not self.is_valid(value):
            raise ScoreRangeError(self.item_id, value)

    def option_text(self, value: int) -> str:
        self.check(value)
        for score, text in self.options:
            if score == value:
                return f"{score} = {text}"
        return str(value)

    def band_for(self, value: int) -> Band:
        self.check(value)
        for band in self.bands:
            if band.low <= value <= band.high:
                return band
        raise ScoreRangeError(self.item_id, value)

    def describe(self, value: int) -> str:
        """Option text for questions, band text for totals."""
        if self.kind == "total" and self.bands:
            return self.band_for(value).label()
        return self.option_text(value)

    def symptom_free(self, value: int) -> bool:
        if self.no_symptom_max is None:
            return False
        return value <= self.no_symptom_max


@dataclass(frozen=True)
class Scale:
    scale_id: str
    name: str
    full_name: str
    rater: str
    auxiliary: bool
    band_source: str
    items: tuple[ScaleItem, ...]

    @property
    def total(self) -> ScaleItem | None:
        for item in self.items:
            if item.kind == "total":
                return item
        return None


@dataclass
class ScaleCatalog:
    scales: dict[str, Scale]
    _items: dict[str, ScaleItem] = field(init=False, repr=False)

    def __post_init__(self):
        self._items = {}
        for scale in self.scales.values():
            for item in scale.items:
                if item.item_id in self._items:
                    raise CatalogError(f"duplicate item id {item.item_id!r}")
                self._items[item.item_id] = item

    def __contains__(self, item_id: str) -> bool:
        return item_id in self._items

    def __len__(self) -> int:
        return len(self._items)

    def item(self, item_id: str) -> ScaleItem:
        try:
            return self._items[item_id]
        except KeyError:
            raise CatalogError(f"unknown item id {item_id!r}") from None

    def items(self) -> list[ScaleItem]:
        return list(self._items.values())

    def scale_of(self, item_id: str) -> Scale:
        return self.scales[self.item(item_id).scale_id]

    def core_scales(self) -> list[Scale]:
        return [s for s in self.scales.values() if not s.auxiliary]

    def totals(self, include_auxiliary: bool = False) -> list[ScaleItem]:
        out = []
        for scale in self.scales.values():
            if scale.auxiliary and not include_auxiliary:
                continue
            if scale.total is not None:
                out.append(scale.total)
        return out

    def validate_scores(self, scores: dict[str, int]) -> None:
        for item_id, value in scores.items():
            self.item(item_id).check(value)

    @classmethod
    def from_dict(cls, data: dict) -> "ScaleCatalog":
        scales = {}
        for raw in data["scales"]:
            items = tuple(
                ScaleItem(
                    item_id=it["item_id"],
                    scale_id=raw["scale_id"],
                    kind=it["kind"],
                    rater=raw["rater"],
                    question_text=it["question_text"],
                    summary=it["summary"],
                    options=tuple((int(s), t) for s, t in it.get("options", [])),
                    score_range=tuple(it["score_range"]),
                    bands=tuple(Band(int(a), int(b), t) for a, b, t in it.get("bands", [])),
                    no_symptom_max=it.get("no_symptom_max"),
                )
                for it in raw["items"]
            )
            scales[raw["scale_id"]] = Scale(
                scale_id=raw["scale_id"],
                name=raw["name"],
                full_name=raw["full_name"],
                rater=raw["rater"],
                auxiliary=bool(raw.get("auxiliary", False)),
                band_source=raw.get("band_source", "published"),
                items=items,
            )
        return cls(scales)

    @classmethod
    def load(cls, path: str | Path) -> "ScaleCatalog":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@lru_cache(maxsize=1)
def default_catalog() -> ScaleCatalog:
    text = resources.files("mooddx").joinpath("data/catalog.json").read_text(encoding="utf-8")
    return ScaleCatalog.from_dict(json.loads(text))
