from .catalog import Band, CatalogError, Scale, ScaleCatalog, ScaleItem, ScoreRangeError, default_catalog
from .render import RenderError, clinician_symptom_free, render_item, render_performance, render_totals
from .selection import (
    GROUPS,
    CorrelationTable,
    SelectedItemSet,
    SelectionConfig,
    SelectionError,
    UndefinedCorrelationError,
    default_correlations,
    default_selected_items,
    default_selection_config,
    pearson,
    select_items,
    upper_quantile,
)
