"""Correlation-based item selection and symptom grouping."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

GROUPS = ("depression", "suicide", "energy_interest", "anxiety", "insomnia")
GROUP_TITLES = {
    "depression": "Depression-related performances",
    "suicide": "Suicide-related performances",
    "energy_interest": "Energy & interest-related performances",
    "anxiety": "Anxiety-related performances",
    "insomnia": "Insomnia-related performances",
}


class UndefinedCorrelationError(ValueError):
    """Raised when a series has zero variance."""


class SelectionError(ValueError):
    pass


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("series must be one-dimensional and of equal length")
    if len(x) < 2:
        raise ValueError("need at least two observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation is undefined for a constant series")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class CorrelationTable:
    entries: dict[str, tuple[float, float]]

    def __post_init__(self):
        for item_id, (r, p) in self.entries.items():
            if not -1.0 <= r <= 1.0:
                raise ValueError(f"{item_id}: |r| must be <= 1, got {r}")
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{item_id}: p must lie in [0, 1], got {p}")

    def __len__(self) -> int:
        return len(self.entries)

    def r(self, item_id: str) -> float:
        return self.entries[item_id][0]

    @classmethod
    def read_csv(cls, path: str | Path) -> "CorrelationTable":
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        return cls({row["item_id"]: (float(row["r"]), float(row["p"])) for row in rows})

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["item_id", "r", "p"])
            for item_id, (r, p) in self.entries.items():
                writer.writerow([item_id, repr(r), repr(p)])

    @classmethod
    def compute(cls, scores: dict[str, Sequence[float]], labels: Sequence[int]) -> "CorrelationTable":
        """Correlate every item's scores with a binary label; skips constant items."""
        from scipy import stats

        out = {}
        y = np.asarray(labels, dtype=float)
        for item_id, xs in scores.items():
            x = np.asarray(xs, dtype=float)
            mask = ~np.isnan(x)
            try:
                r = pearson(x[mask], y[mask])
            except UndefinedCorrelationError:
                continue
            p = float(stats.pearsonr(x[mask], y[mask]).pvalue)
            out[item_id] = (r, p)
        return cls(out)


def default_correlations() -> CorrelationTable:
    path = resources.files("mooddx").joinpath("data/correlations.csv")
    with resources.as_file(path) as p:
        return CorrelationTable.read_csv(p)


@dataclass(frozen=True)
class SelectionConfig:
    fraction: float = 0.05
    manual: tuple[str, ...] = ()
    groups: dict[str, str] = field(default_factory=dict)
    population_size: int | None = None
    use_abs: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> "SelectionConfig":
        return cls(
            fraction=float(data["fraction"]),
            manual=tuple(data.get("manual", ())),
            groups=dict(data.get("groups", {})),
            population_size=data.get("population_size"),
            use_abs=bool(data.get("use_abs", False)),
        )


def default_selection_config() -> SelectionConfig:
    text = resources.files("mooddx").joinpath("data/selection.json").read_text(encoding="utf-8")
    return SelectionConfig.from_dict(json.loads(text))


@dataclass(frozen=True)
class SelectedItemSet:
    threshold: float
    items: tuple[str, ...]
    groups: dict[str, str]
    manual_includes: tuple[str, ...] = ()
    correlations: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for item_id in self.items:
            if self.groups.get(item_id) not in GROUPS:
                raise SelectionError(f"item {item_id!r} has no symptom group")

    def by_group(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {g: [] for g in GROUPS}
        for item_id in self.items:
            out[self.groups[item_id]].append(item_id)
        return out

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "items": list(self.items),
            "groups": {i: self.groups[i] for i in self.items},
            "manual_includes": list(self.manual_includes),
            "correlations": {i: self.correlations[i] for i in self.items if i in self.correlations},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SelectedItemSet":
        return cls(
            threshold=float(data["threshold"]),
            items=tuple(data["items"]),
            groups=dict(data["groups"]),
            manual_includes=tuple(data.get("manual_includes", ())),
            correlations={k: float(v) for k, v in data.get("correlations", {}).items()},
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SelectedItemSet":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def upper_quantile(values: Sequence[float], fraction: float, population_size: int | None = None) -> float:
    """Value above which the top `fraction` of a population lies.

    Linear interpolation between order statistics, i.e. the (1 - fraction)
    quantile. `values` may be a truncated report of the largest members of a
    larger population of `population_size` coefficients; the unreported
    members are assumed to rank below every reported one.
    """
    desc = sorted(values, reverse=True)
    n = len(desc) if population_size is None else population_size
    if n < len(desc):
        raise SelectionError("population_size is smaller than the number of reported coefficients")
    pos = fraction * (n - 1)
    i = math.floor(pos)
    frac = pos - i
    if frac == 0.0:
        if i >= len(desc):
            raise SelectionError("the quantile falls among unreported coefficients")
        return desc[i]
    if i + 1 >= len(desc):
        raise SelectionError("the quantile falls among unreported coefficients")
    return desc[i] - frac * (desc[i] - desc[i + 1])


def select_items(
    table: CorrelationTable,
    fraction: float,
    manual: Sequence[str] = (),
    groups: dict[str, str] | None = None,
    *,
    population_size: int | None = None,
    use_abs: bool = False,
    catalog=None,
) -> SelectedItemSet:
    """Pick the most label-correlated items plus manual includes.

    Items whose coefficient is at or above the upper `fraction` quantile are
    kept (ties at the threshold included). Signed r is ranked unless
    `use_abs` is set.
    """
    if len(table) == 0:
        raise SelectionError("correlation table is empty")
    if not 0.0 < fraction <= 1.0:
        raise SelectionError("fraction must lie in (0, 1]")
    if catalog is not None:
        for item_id in manual:
            if item_id not in catalog:
                raise SelectionError(f"manual include {item_id!r} is not in the catalog")

    def key(item_id: str) -> float:
        r = table.r(item_id)
        return abs(r) if use_abs else r

    order = sorted(table.entries, key=lambda i: -key(i))
    threshold = upper_quantile([key(i) for i in order], fraction, population_size)
    chosen = [i for i in order if key(i) >= threshold]
    manual_extra = [m for m in manual if m not in chosen]
    items = tuple(chosen + manual_extra)

    if groups is None:
        groups = default_selection_config().groups
    missing = [i for i in items if i not in groups]
    if missing:
        raise SelectionError(f"no symptom group configured for {missing}")
    return SelectedItemSet(
        threshold=threshold,
        items=items,
        groups={i: groups[i] for i in items},
        manual_includes=tuple(manual_extra),
        correlations={i: table.r(i) for i in items if i in table.entries},
    )


def default_selected_items() -> SelectedItemSet:
    cfg = default_selection_config()
    return select_items(
        default_correlations(),
        cfg.fraction,
        cfg.manual,
        cfg.groups,
        population_size=cfg.population_size,
        use_abs=cfg.use_abs,
    )
