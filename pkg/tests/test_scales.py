from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mooddx.scales import (
    CatalogError,
    CorrelationTable,
    RenderError,
    ScoreRangeError,
    UndefinedCorrelationError,
    default_catalog,
    default_correlations,
    default_selected_items,
    default_selection_config,
    pearson,
    render_performance,
    render_totals,
    select_items,
    upper_quantile,
)
from mooddx.scales.catalog import Band, ScaleItem
from mooddx.scales.selection import SelectionError

EXPECTED_GROUPS = {
    "depression": {"hamd_total_score", "hama_Q6", "bprs_Q9", "hamd_Q1", "phq9_total_score", "phq9_Q2"},
    "suicide": {"hamd_Q3", "phq9_Q9"},
    "energy_interest": {"hamd_Q7", "hamd_Q22", "phq9_Q4", "phq9_Q1"},
    "anxiety": {"hama_total_score", "gad7_total_score"},
    "insomnia": {"hamd_Q4", "hama_Q4"},
}


def test_pearson_examples():
    assert pearson([1, 2, 3, 4], [1, 2, 3, 4]) == pytest.approx(1.0)
    # closed form: cov = 1, var_x = 5, var_y = 1 (sums of squares) -> 2 / sqrt(5 * 1)
    assert pearson([1, 2, 3, 4], [0, 0, 1, 1]) == pytest.approx(2 / np.sqrt(5), abs=1e-12)
    assert round(pearson([1, 2, 3, 4], [0, 0, 1, 1]), 6) == 0.894427
    with pytest.raises(UndefinedCorrelationError):
        pearson([3, 3, 3], [1, 2, 3])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=3, max_size=30))
def test_pearson_matches_numpy(pairs):
    x, y = map(np.array, zip(*pairs))
    if x.std() == 0 or y.std() == 0:
        with pytest.raises(UndefinedCorrelationError):
            pearson(x, y)
    else:
        assert pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)


def test_default_selection_reproduces_published_items():
    sel = default_selected_items()
    assert round(sel.threshold, 4) == 0.5032
    assert len(sel.items) == 16
    by_group = {g: set(items) for g, items in sel.by_group().items() if items}
    assert by_group == EXPECTED_GROUPS
    assert set(sel.manual_includes) == {"phq9_Q1", "phq9_Q2"}


def test_threshold_oracle_from_padded_quantile():
    # independent route: numpy's linear quantile over the reported values
    # padded with unreported coefficients that rank below all of them
    table = default_correlations()
    cfg = default_selection_config()
    values = np.array([table.r(i) for i in table.entries])
    padded = np.concatenate([values, np.full(cfg.population_size - len(values), -1.0)])
    oracle = np.quantile(padded, 1 - cfg.fraction, method="linear")
    assert upper_quantile(values, cfg.fraction, cfg.population_size) == pytest.approx(oracle, abs=1e-12)


def test_default_population_gives_thirteen_items():
    cfg = default_selection_config()
    sel = select_items(default_correlations(), cfg.fraction, (), cfg.groups)
    assert len(sel.items) == 13
    assert "phq9_Q9" not in sel.items


def test_every_non_manual_item_clears_threshold():
    sel = default_selected_items()
    for item in sel.items:
        if item not in sel.manual_includes:
            assert sel.correlations[item] >= sel.threshold
    assert all(sel.groups[i] in EXPECTED_GROUPS for i in sel.items)


def test_full_fraction_selects_everything():
    table = CorrelationTable({f"phq9_Q{i}": (0.1 * i, 0.01) for i in range(1, 8)})
    groups = {i: "depression" for i in table.entries}
    sel = select_items(table, 1.0, (), groups)
    assert set(sel.items) == set(table.entries)
    assert sel.threshold == pytest.approx(0.1)


def test_top_fraction_matches_sort_oracle():
    rng = np.random.default_rng(5)
    rs = rng.permutation(np.linspace(0.05, 0.95, 10))
    ids = [f"gad7_Q{i}" for i in range(1, 8)] + ["phq9_Q1", "phq9_Q2", "phq9_Q3"]
    table = CorrelationTable({i: (float(r), 0.01) for i, r in zip(ids, rs)})
    sel = select_items(table, 0.2, (), {i: "anxiety" for i in ids})
    oracle = [i for _, i in sorted(zip(rs, ids), reverse=True)[:2]]
    assert set(sel.items) == set(oracle)


def test_empty_table_rejected():
    with pytest.raises(SelectionError):
        select_items(CorrelationTable({}), 0.05)


def test_correlation_table_invariants():
    with pytest.raises(ValueError):
        CorrelationTable({"x": (1.2, 0.1)})
    with pytest.raises(ValueError):
        CorrelationTable({"x": (0.2, 1.5)})


def test_compute_from_scores():
    t = CorrelationTable.compute({"phq9_Q1": [0, 1, 2, 3]}, [0, 0, 1, 1])
    assert t.r("phq9_Q1") == pytest.approx(2 / np.sqrt(5))


def test_catalog_invariants():
    cat = default_catalog()
    assert len(cat.core_scales()) == 13
    for item in cat.items():
        scores = [s for s, _ in item.options]
        assert scores == sorted(set(scores))
    with pytest.raises(CatalogError):
        ScaleItem("x", "phq9", "question", "self_reported", "q", "s", options=((1, "a"), (0, "b")))
    with pytest.raises(CatalogError):
        ScaleItem("x", "phq9", "total", "self_reported", "q", "s", score_range=(0, 10),
                  bands=(Band(0, 4, "a"), Band(6, 10, "b")))


def test_render_examples():
    sel = default_selected_items()
    text = render_performance({"hamd_total_score": 5}, sel)
    assert text.startswith("Depression")
    assert "0-6 = no depression" in text.lower()
    text = render_performance({"phq9_Q9": 0}, sel)
    assert "Not at all" in text
    with pytest.raises(RenderError):
        render_performance({}, sel)
    with pytest.raises(ScoreRangeError):
        render_performance({"phq9_Q9": 7}, sel)


def test_render_is_pure(cases20):
    sel = default_selected_items()
    for case in cases20:
        assert render_performance(case, sel) == render_performance(case, sel)


def test_render_totals_lists_every_core_total(cases20):
    text = render_totals(cases20[0])
    assert "HAMD" in text and "total score" in text
    assert "PSQI" not in text
