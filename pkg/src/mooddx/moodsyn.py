"""Schema-constrained tabular synthesizer for the 25-column mood-disorder table.

The generative backbone is a Gaussian copula fitted separately per label
class: empirical marginals plus the correlation of normal scores. Samples
are then rounded, clamped and repaired so that question-level sums never
exceed the scale totals.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats

log = logging.getLogger(__name__)

LABEL = "Mood Disorder"

_COLUMNS = [
    ("HAMA Q4 Score", 0, 4), ("HAMA Q6 Score", 0, 4), ("HAMA Total Score", 0, 56),
    ("GAD7 Total Score", 0, 21),
    ("PHQ9 Q1 Score", 0, 3), ("PHQ9 Q2 Score", 0, 3), ("PHQ9 Q4 Score", 0, 3), ("PHQ9 Q9 Score", 0, 3),
    ("PHQ9 Total Score", 0, 27),
    ("HAMD Q1 Score", 0, 4), ("HAMD Q3 Score", 0, 4), ("HAMD Q4 Score", 0, 2), ("HAMD Q7 Score", 0, 4),
    ("HAMD Q22 Score", 0, 4), ("HAMD Total Score", 0, 76),
    ("BPRS Q9 Score", 0, 7),
    ("PSQI Total Score", 0, 21), ("SHAPS Total Score", 14, 56), ("HCL32 Total Score", 0, 32),
    ("DAS Total Score", 40, 280), ("SSRS Total Score", 12, 66), ("MDQ Total Score", 0, 13),
    ("BPRS Total Score", 0, 126), ("YMRS Total Score", 0, 60),
    (LABEL, 0, 1),
]
_CONSTRAINTS = [
    ("HAMA", ("HAMA Q4 Score", "HAMA Q6 Score"), "HAMA Total Score"),
    ("PHQ9", ("PHQ9 Q1 Score", "PHQ9 Q2 Score", "PHQ9 Q4 Score", "PHQ9 Q9 Score"), "PHQ9 Total Score"),
    ("HAMD", ("HAMD Q1 Score", "HAMD Q3 Score", "HAMD Q4 Score", "HAMD Q7 Score", "HAMD Q22 Score"), "HAMD Total Score"),
    ("BPRS", ("BPRS Q9 Score",), "BPRS Total Score"),
]


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    min: float
    max: float
    integer: bool = True


@dataclass(frozen=True)
class Constraint:
    scale: str
    questions: tuple[str, ...]
    total: str


@dataclass(frozen=True)
class FeatureSchema:
    columns: tuple[ColumnSpec, ...]
    constraints: tuple[Constraint, ...]
    label: str = LABEL

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if names[-1] != self.label:
            raise SchemaError("the label must be the last column")
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names")
        for con in self.constraints:
            missing = [c for c in (*con.questions, con.total) if c not in names]
            if missing:
                raise SchemaError(f"constraint {con.scale} references unknown columns {missing}")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def features(self) -> list[str]:
        return self.names[:-1]

    def spec(self, name: str) -> ColumnSpec:
        return next(c for c in self.columns if c.name == name)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "columns": [{"name": c.name, "min": c.min, "max": c.max, "integer": c.integer} for c in self.columns],
            "constraints": [{"scale": c.scale, "questions": list(c.questions), "total": c.total} for c in self.constraints],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "FeatureSchema":
        return cls(
            tuple(ColumnSpec(c["name"], c["min"], c["max"], c.get("integer", True)) for c in obj["columns"]),
            tuple(Constraint(c["scale"], tuple(c["questions"]), c["total"]) for c in obj.get("constraints", [])),
            obj.get("label", LABEL),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FeatureSchema":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def default_schema() -> FeatureSchema:
    return FeatureSchema(
        tuple(ColumnSpec(n, lo, hi) for n, lo, hi in _COLUMNS),
        tuple(Constraint(s, q, t) for s, q, t in _CONSTRAINTS),
    )


def check_table(table: pd.DataFrame, schema: FeatureSchema) -> None:
    if list(table.columns) != schema.names:
        missing = [c for c in schema.names if c not in table.columns]
        raise SchemaError(f"table columns do not match the schema (missing {missing})" if missing
                          else "table columns are not in schema order")


def read_table(path: str | Path, schema: FeatureSchema | None = None) -> pd.DataFrame:
    schema = schema or default_schema()
    table = pd.read_csv(path)
    check_table(table, schema)
    return table


def write_table(table: pd.DataFrame, path: str | Path) -> None:
    table.to_csv(path, index=False, lineterminator="\n")


def to_json_rows(table: pd.DataFrame, schema: FeatureSchema | None = None) -> list[dict]:
    """Row objects with the 25 keys in schema order, integer-valued where flagged."""
    schema = schema or default_schema()
    rows = []
    for rec in table[schema.names].itertuples(index=False):
        rows.append({c.name: (int(v) if c.integer else float(v)) for c, v in zip(schema.columns, rec)})
    return rows


@dataclass
class ClassModel:
    n: int
    marginals: list[np.ndarray]
    corr: np.ndarray
    ridge: float = 0.0


@dataclass
class SynthModel:
    schema: FeatureSchema
    classes: dict[int, ClassModel]
    seed: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return sum(c.n for c in self.classes.values())

    @property
    def priors(self) -> dict[int, float]:
        return {k: c.n / self.n for k, c in self.classes.items()}


def normal_scores(x: np.ndarray) -> np.ndarray:
    """Average-rank normal scores per column, rank/(n+1) mapped through the normal quantile."""
    n = x.shape[0]
    ranks = np.column_stack([stats.rankdata(x[:, j]) for j in range(x.shape[1])])
    return stats.norm.ppf(ranks / (n + 1))


def _regularize(corr: np.ndarray, tol: float = 1e-8) -> tuple[np.ndarray, float]:
    eps = 0.0
    out = corr
    while np.linalg.eigvalsh(out).min() <= tol:
        eps = 1e-6 if eps == 0.0 else eps * 10
        out = (corr + eps * np.eye(len(corr))) / (1 + eps)
    if eps:
        log.warning("correlation matrix not positive definite; ridge epsilon %.1e applied", eps)
    return out, eps


def fit(real: pd.DataFrame, schema: FeatureSchema | None = None, min_rows: int = 30, seed: int = 0) -> SynthModel:
    schema = schema or default_schema()
    check_table(real, schema)
    classes = {}
    labels = real[schema.label].to_numpy()
    present = sorted(set(labels.tolist()))
    if present != [0, 1]:
        raise SchemaError(f"fit needs both label classes 0 and 1, found {present}")
    for k in (0, 1):
        x = real.loc[labels == k, schema.features].to_numpy(dtype=float)
        if len(x) < min_rows:
            raise SchemaError(f"class {k} has {len(x)} rows; at least {min_rows} required")
        z = normal_scores(x)
        sd = z.std(axis=0)
        corr = np.eye(x.shape[1])
        live = sd > 0
        if live.sum() > 1:
            corr[np.ix_(live, live)] = np.corrcoef(z[:, live], rowvar=False)
        corr, eps = _regularize(corr)
        classes[k] = ClassModel(len(x), [np.sort(x[:, j]) for j in range(x.shape[1])], corr, eps)
    return SynthModel(schema, classes, seed, {"n": len(real), "counts": {k: c.n for k, c in classes.items()}})


def _draw(cm: ClassModel, n: int, rng: np.random.Generator) -> np.ndarray:
    chol = np.linalg.cholesky(cm.corr)
    z = rng.standard_normal((n, len(cm.marginals))) @ chol.T
    u = stats.norm.cdf(z)
    cols = [np.quantile(m, u[:, j], method="linear") if n else np.zeros(0) for j, m in enumerate(cm.marginals)]
    return np.column_stack(cols) if n else np.zeros((0, len(cm.marginals)))


def allocate(n: int, ratio: float) -> tuple[int, int]:
    n1 = int(round(n * ratio))
    return n - n1, n1


def sample(model: SynthModel, n: int, class_ratio: float | None = None, seed: int = 0, block_size: int = 4096) -> pd.DataFrame:
    """Draw n raw rows; ``class_ratio`` is the label-1 share (default: fitted prior).

    Rows are generated in blocks whose seeds derive from ``seed``, so output
    does not depend on how blocks are scheduled.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    ratio = model.priors[1] if class_ratio is None else float(class_ratio)
    if not 0.0 <= ratio <= 1.0:
        raise ValueError("class_ratio must lie in [0, 1]")
    counts = dict(zip((0, 1), allocate(n, ratio)))
    labels = np.concatenate([np.full(counts[0], 0), np.full(counts[1], 1)])
    root = np.random.SeedSequence(seed)
    order_seed, *block_seeds = root.spawn(1 + -(-n // block_size))
    rows = np.zeros((n, len(model.schema.features)))
    for b, ss in enumerate(block_seeds):
        lo, hi = b * block_size, min(n, (b + 1) * block_size)
        rng = np.random.default_rng(ss)
        block_labels = labels[lo:hi]
        for k in (0, 1):
            mask = block_labels == k
            if mask.any():
                rows[lo:hi][mask] = _draw(model.classes[k], int(mask.sum()), rng)
    perm = np.random.default_rng(order_seed).permutation(n)
    table = pd.DataFrame(rows[perm], columns=model.schema.features)
    table[model.schema.label] = labels[perm]
    return table


@dataclass
class PostprocessResult:
    table: pd.DataFrame
    dropped: int
    repaired: int

    def report(self) -> dict:
        return {"rows_out": len(self.table), "rows_dropped": self.dropped, "totals_raised": self.repaired}


def postprocess(table: pd.DataFrame, schema: FeatureSchema | None = None) -> PostprocessResult:
    """Round, clamp, then raise totals to the question sum or drop infeasible rows."""
    schema = schema or default_schema()
    check_table(table, schema)
    out = table.copy()
    for c in schema.columns:
        col = out[c.name].to_numpy(dtype=float)
        if c.integer:
            col = np.rint(col)
        out[c.name] = np.clip(col, c.min, c.max)
    keep = np.ones(len(out), dtype=bool)
    repaired = 0
    for con in schema.constraints:
        qsum = out[list(con.questions)].sum(axis=1).to_numpy()
        total = out[con.total].to_numpy()
        over = qsum > total
        feasible = qsum <= schema.spec(con.total).max
        fix = over & feasible & keep
        repaired += int(fix.sum())
        total = np.where(fix, qsum, total)
        out[con.total] = total
        keep &= ~(over & ~feasible)
    dropped = int((~keep).sum())
    if dropped:
        log.info("postprocess dropped %d infeasible rows", dropped)
    out = out.loc[keep].reset_index(drop=True)
    for c in schema.columns:
        if c.integer:
            out[c.name] = out[c.name].astype(np.int64)
    return PostprocessResult(out, dropped, repaired)


@dataclass(frozen=True)
class Violation:
    row: int
    column: str
    kind: str
    message: str


def validate(table: pd.DataFrame, schema: FeatureSchema | None = None) -> list[Violation]:
    schema = schema or default_schema()
    if list(table.columns) != schema.names:
        return [Violation(-1, "*", "columns", "columns do not match the schema order")]
    found: list[Violation] = []
    for c in schema.columns:
        col = table[c.name].to_numpy(dtype=float)
        for i in np.flatnonzero(~np.isfinite(col)):
            found.append(Violation(int(i), c.name, "missing", "value is missing or not finite"))
        finite = np.isfinite(col)
        for i in np.flatnonzero(finite & ((col < c.min) | (col > c.max))):
            found.append(Violation(int(i), c.name, "range", f"{col[i]} outside [{c.min}, {c.max}]"))
        if c.integer:
            for i in np.flatnonzero(finite & (col != np.round(col))):
                found.append(Violation(int(i), c.name, "integer", f"{col[i]} is not an integer"))
    for con in schema.constraints:
        qsum = table[list(con.questions)].sum(axis=1).to_numpy(dtype=float)
        total = table[con.total].to_numpy(dtype=float)
        for i in np.flatnonzero(qsum > total):
            found.append(Violation(int(i), con.scale, "constraint",
                                   f"{con.scale} question sum {qsum[i]:g} exceeds {con.total} {total[i]:g}"))
    return found
