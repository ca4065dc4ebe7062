"""Deterministic score-to-text rendering of scale performances."""

from __future__ import annotations

from typing import Mapping

from .catalog import RATER_LABELS, ScaleCatalog, default_catalog
from .selection import GROUP_TITLES, GROUPS, SelectedItemSet


class RenderError(ValueError):
    pass


def _scores_of(case_or_scores) -> Mapping[str, int]:
    return getattr(case_or_scores, "scale_scores", case_or_scores)


def render_item(item_id: str, value: int | None, catalog: ScaleCatalog, correlation: float | None = None) -> str:
    item = catalog.item(item_id)
    scale = catalog.scales[item.scale_id]
    head = f"{RATER_LABELS[item.rater]} {scale.name} {item.summary}"
    if correlation is not None:
        head += f" (correlation {correlation:.4f})"
    if value is None:
        return f"{head}: not assessed"
    return f"{head}, score {value}: {item.describe(value)}"


def render_performance(case, selected: SelectedItemSet, catalog: ScaleCatalog | None = None) -> str:
    """One paragraph per symptom group, items in selection order."""
    catalog = catalog or default_catalog()
    scores = _scores_of(case)
    present = [i for i in selected.items if i in scores]
    if not present:
        raise RenderError("case has no score for any selected item")
    paragraphs = []
    for group, item_ids in selected.by_group().items():
        if not item_ids:
            continue
        lines = [
            render_item(i, scores.get(i), catalog, selected.correlations.get(i))
            for i in item_ids
        ]
        paragraphs.append(f"{GROUP_TITLES[group]}: " + "; ".join(lines) + ".")
    return "\n\n".join(paragraphs)


def render_totals(case, catalog: ScaleCatalog | None = None, include_auxiliary: bool = False) -> str:
    """Total score and band of every scale the case has a total for."""
    catalog = catalog or default_catalog()
    scores = _scores_of(case)
    lines = []
    for total in catalog.totals(include_auxiliary=include_auxiliary):
        if total.item_id not in scores:
            continue
        scale = catalog.scales[total.scale_id]
        value = scores[total.item_id]
        lines.append(
            f"- {scale.full_name} ({scale.name}, {RATER_LABELS[scale.rater].lower()}): "
            f"total score {value}, {total.describe(value)}"
        )
    if not lines:
        raise RenderError("case has no total score for any scale")
    return "\n".join(lines)


def clinician_symptom_free(case, selected: SelectedItemSet, catalog: ScaleCatalog | None = None) -> bool:
    """True when every assessed clinician-rated selected item sits at its no-symptom level."""
    catalog = catalog or default_catalog()
    scores = _scores_of(case)
    assessed = [
        i for i in selected.items
        if i in scores and catalog.item(i).rater == "clinician"
    ]
    if not assessed:
        return False
    return all(catalog.item(i).symptom_free(scores[i]) for i in assessed)


__all__ = ["GROUPS", "RenderError", "render_item", "render_performance", "render_totals", "clinician_symptom_free"]
