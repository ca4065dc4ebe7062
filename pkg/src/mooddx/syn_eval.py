"""Fidelity, utility and privacy scores for a synthetic table against real data."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import stats
from scipy.spatial import cKDTree
from sklearn.dummy import DummyClassifier
from sklearn.ensemble import GradientBoostingClassifier
from sklearn.linear_model import LogisticRegression
from sklearn.metrics import accuracy_score, f1_score, roc_auc_score
from sklearn.model_selection import StratifiedGroupKFold
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from .moodsyn import FeatureSchema, check_table, default_schema

DEFAULT_ALPHA_GRID = tuple(np.round(np.arange(0.1, 1.0, 0.1), 10))
CLASSIFIERS = ("boosted_stumps", "logistic", "majority")


class MetricError(ValueError):
    pass


def _numeric(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise MetricError("empty input")
    return arr


def ks_complement(real, syn) -> float:
    """1 - sup |ECDF_real - ECDF_syn|."""
    r, s = _numeric(real), _numeric(syn)
    return 1.0 - float(stats.ks_2samp(r, s, method="asymp").statistic)


def _freqs(values) -> pd.Series:
    values = pd.Series(np.asarray(values).ravel())
    if values.empty:
        raise MetricError("empty input")
    return values.value_counts(normalize=True)


def tv_complement(real, syn) -> float:
    p, q = _freqs(real), _freqs(syn)
    cats = p.index.union(q.index)
    diff = (p.reindex(cats, fill_value=0.0) - q.reindex(cats, fill_value=0.0)).abs().sum()
    return float(1.0 - 0.5 * diff)


@dataclass
class ScoreSet:
    scores: dict[str, float]

    @property
    def mean(self) -> float:
        return float(np.mean(list(self.scores.values())))

    def to_dict(self) -> dict:
        return {"scores": self.scores, "mean": self.mean}


def shape_score(real: pd.DataFrame, syn: pd.DataFrame, schema: FeatureSchema | None = None) -> ScoreSet:
    schema = schema or default_schema()
    out = {c: ks_complement(real[c], syn[c]) for c in schema.features}
    out[schema.label] = tv_complement(real[schema.label], syn[schema.label])
    return ScoreSet(out)


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson r; a constant column counts as uncorrelated."""
    if np.std(x) == 0 or np.std(y) == 0:
        return 0.0
    return float(np.clip(np.corrcoef(x, y)[0, 1], -1.0, 1.0))


def correlation_similarity(real_x, real_y, syn_x, syn_y) -> float:
    rr = _pearson(np.asarray(real_x, float), np.asarray(real_y, float))
    rs = _pearson(np.asarray(syn_x, float), np.asarray(syn_y, float))
    return 1.0 - abs(rr - rs) / 2.0


def decile_edges(real_col) -> np.ndarray:
    return np.unique(np.quantile(np.asarray(real_col, float), np.linspace(0.1, 0.9, 9)))


def contingency_similarity(real_a, real_b, syn_a, syn_b) -> float:
    """1 - 1/2 sum |joint_real - joint_syn| over the union of observed cells."""
    real = pd.Series(list(zip(np.asarray(real_a).tolist(), np.asarray(real_b).tolist())))
    syn = pd.Series(list(zip(np.asarray(syn_a).tolist(), np.asarray(syn_b).tolist())))
    return tv_complement(real, syn)


def trend_pairs(schema: FeatureSchema) -> list[tuple[str, str]]:
    pairs = list(itertools.combinations(schema.features, 2))
    return pairs + [(c, schema.label) for c in schema.features]


def trend_score(real: pd.DataFrame, syn: pd.DataFrame, schema: FeatureSchema | None = None) -> ScoreSet:
    schema = schema or default_schema()
    out = {}
    for a, b in trend_pairs(schema):
        if b == schema.label:
            edges = decile_edges(real[a])
            score = contingency_similarity(np.digitize(real[a], edges), real[b], np.digitize(syn[a], edges), syn[b])
        else:
            score = correlation_similarity(real[a], real[b], syn[a], syn[b])
        out[f"{a} | {b}"] = score
    return ScoreSet(out)


def density(shape_mean: float, trend_mean: float) -> float:
    """Harmonic mean of the shape and trend means."""
    if shape_mean + trend_mean == 0:
        return 0.0
    return 2.0 * shape_mean * trend_mean / (shape_mean + trend_mean)


def range_coverage(real, syn) -> float:
    r, s = _numeric(real), _numeric(syn)
    lo, hi = r.min(), r.max()
    if hi == lo:
        return 1.0 if s.min() <= lo <= s.max() else 0.0
    score = 1.0 - max(0.0, (s.min() - lo) / (hi - lo)) - max(0.0, (hi - s.max()) / (hi - lo))
    return float(min(1.0, max(0.0, score)))


def category_coverage(real, syn) -> float:
    rc = set(np.asarray(real).ravel().tolist())
    if not rc:
        raise MetricError("empty input")
    return len(rc & set(np.asarray(syn).ravel().tolist())) / len(rc)


def coverage(real: pd.DataFrame, syn: pd.DataFrame, schema: FeatureSchema | None = None) -> ScoreSet:
    schema = schema or default_schema()
    out = {c: range_coverage(real[c], syn[c]) for c in schema.features}
    out[schema.label] = category_coverage(real[schema.label], syn[schema.label])
    return ScoreSet(out)


def minmax_normalize(reference: np.ndarray, *others: np.ndarray) -> list[np.ndarray]:
    lo = reference.min(axis=0)
    span = reference.max(axis=0) - lo
    span = np.where(span == 0, 1.0, span)
    return [(x - lo) / span for x in (reference, *others)]


def kth_nn_distance(points: np.ndarray, reference: np.ndarray, k: int, exclude_self: bool = False) -> np.ndarray:
    tree = cKDTree(reference)
    kk = k + 1 if exclude_self else k
    d, _ = tree.query(points, k=kk)
    return d[:, -1] if d.ndim == 2 else d


def support_fraction(points: np.ndarray, reference: np.ndarray, alpha: float, k: int = 5) -> float:
    """Share of ``points`` inside the alpha-support of ``reference``.

    A point is inside when its k-th nearest reference distance is at most
    the alpha-quantile of the reference points' own k-NN distances.
    """
    radii = kth_nn_distance(reference, reference, k, exclude_self=True)
    tau = np.quantile(radii, alpha)
    return float(np.mean(kth_nn_distance(points, reference, k) <= tau))


def quality(real: pd.DataFrame | np.ndarray, syn: pd.DataFrame | np.ndarray, alpha_grid: Sequence[float] = DEFAULT_ALPHA_GRID,
            k: int = 5) -> tuple[float, float]:
    """(alpha_precision, beta_recall) averaged over the grid, in real-range-normalized space."""
    r = np.asarray(real, dtype=float)
    s = np.asarray(syn, dtype=float)
    if len(r) < k + 1 or len(s) < k + 1:
        raise MetricError(f"quality needs more than k={k} rows in both tables")
    r, s = minmax_normalize(r, s)
    precision = float(np.mean([support_fraction(s, r, a, k) for a in alpha_grid]))
    recall = float(np.mean([support_fraction(r, s, a, k) for a in alpha_grid]))
    return precision, recall


def make_classifier(spec: str, seed: int = 0):
    if spec == "logistic":
        return make_pipeline(StandardScaler(), LogisticRegression(C=1.0, max_iter=2000))
    if spec == "boosted_stumps":
        return GradientBoostingClassifier(max_depth=1, n_estimators=200, learning_rate=0.1, random_state=seed)
    if spec == "majority":
        return DummyClassifier(strategy="most_frequent")
    raise MetricError(f"unknown classifier {spec!r}; choose from {CLASSIFIERS}")


def mle(syn_train: pd.DataFrame, real_test: pd.DataFrame, label: str = "Mood Disorder", classifier: str = "boosted_stumps",
        seed: int = 0) -> dict:
    """Train on synthetic rows, score on real rows."""
    feats = [c for c in syn_train.columns if c != label]
    y_train = syn_train[label].to_numpy().astype(int)
    y_test = real_test[label].to_numpy().astype(int)
    if len(set(y_train)) < 2 and classifier != "majority":
        raise MetricError("synthetic training data has a single class")
    model = make_classifier(classifier, seed).fit(syn_train[feats].to_numpy(float), y_train)
    x_test = real_test[feats].to_numpy(float)
    pred = model.predict(x_test)
    proba = model.predict_proba(x_test)
    pos = list(model.classes_).index(1) if 1 in model.classes_ else None
    score = proba[:, pos] if pos is not None else np.zeros(len(x_test))
    return {
        "classifier": classifier,
        "binary_f1": float(f1_score(y_test, pred, pos_label=1, zero_division=0)),
        "weighted_f1": float(f1_score(y_test, pred, average="weighted", zero_division=0)),
        "auroc": float(roc_auc_score(y_test, score)) if len(set(y_test)) == 2 else float("nan"),
        "accuracy": float(accuracy_score(y_test, pred)),
    }


def dcr_encode(table: pd.DataFrame, schema: FeatureSchema, lo: np.ndarray, span: np.ndarray) -> np.ndarray:
    """Range-normalized features followed by a one-hot label."""
    x = (table[schema.features].to_numpy(float) - lo) / span
    y = table[schema.label].to_numpy().astype(int)
    return np.column_stack([x, (y == 0).astype(float), (y == 1).astype(float)])


def l1_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact pairwise L1, accumulated column by column in a fixed order."""
    out = np.zeros((len(a), len(b)))
    for j in range(a.shape[1]):
        out += np.abs(a[:, j][:, None] - b[:, j][None, :])
    return out


def dcr(syn: pd.DataFrame, real_train: pd.DataFrame, real_test: pd.DataFrame, schema: FeatureSchema | None = None,
        chunk: int = 2048) -> float:
    """Share of synthetic rows closer to training data than to held-out data; ties count 1/2."""
    schema = schema or default_schema()
    ref = pd.concat([real_train, real_test])[schema.features].to_numpy(float)
    lo = ref.min(axis=0)
    span = ref.max(axis=0) - lo
    span = np.where(span == 0, 1.0, span)
    s = dcr_encode(syn, schema, lo, span)
    tr = dcr_encode(real_train, schema, lo, span)
    te = dcr_encode(real_test, schema, lo, span)
    total = 0.0
    for start in range(0, len(s), chunk):
        block = s[start:start + chunk]
        d_tr = l1_distances(block, tr).min(axis=1)
        d_te = l1_distances(block, te).min(axis=1)
        total += float(np.sum(d_tr < d_te) + 0.5 * np.sum(d_tr == d_te))
    return total / len(s)


def row_groups(x: np.ndarray) -> np.ndarray:
    """Group id per distinct row; identical rows share an id."""
    _, inverse = np.unique(x, axis=0, return_inverse=True)
    return inverse.ravel()


def detection(real: pd.DataFrame, syn: pd.DataFrame, folds: int = 5, seed: int = 0) -> float:
    """Mean cross-validated ROC-AUC of a logistic real-vs-synthetic discriminator.

    Identical rows are kept in the same fold. Otherwise a copied row in the
    test fold faces its twin, labelled the other way, in the training fold,
    which drags the AUC below 0.5 when the synthetic table copies real rows.
    """
    x = np.vstack([real.to_numpy(float), syn.to_numpy(float)])
    y = np.concatenate([np.zeros(len(real), int), np.ones(len(syn), int)])
    perm = np.random.default_rng(seed).permutation(len(y))
    x, y = x[perm], y[perm]
    aucs = []
    splitter = StratifiedGroupKFold(n_splits=folds, shuffle=True, random_state=seed)
    for tr, te in splitter.split(x, y, groups=row_groups(x)):
        model = make_pipeline(StandardScaler(), LogisticRegression(max_iter=2000)).fit(x[tr], y[tr])
        aucs.append(roc_auc_score(y[te], model.predict_proba(x[te])[:, 1]))
    return float(np.mean(aucs))


def folded(auc: float) -> float:
    return 1.0 - 2.0 * abs(auc - 0.5)


@dataclass
class FidelityReport:
    shape: ScoreSet
    trend: ScoreSet
    density: float
    coverage: ScoreSet
    alpha_precision: float | None = None
    beta_recall: float | None = None
    mle: dict | None = None
    dcr: float | None = None
    detection: float | None = None
    detection_folded: float | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "shape": self.shape.to_dict(),
            "trend": self.trend.to_dict(),
            "density": self.density,
            "coverage": self.coverage.to_dict(),
            "alpha_precision": self.alpha_precision,
            "beta_recall": self.beta_recall,
            "mle": self.mle,
            "dcr": self.dcr,
            "detection": self.detection,
            "detection_folded": self.detection_folded,
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def markdown(self) -> str:
        out = ["## Column shapes and coverage", "", "| # | Column | Metric | Shape | Coverage |", "|---|---|---|---|---|"]
        for i, (col, score) in enumerate(self.shape.scores.items()):
            metric = "TVComplement" if i == len(self.shape.scores) - 1 else "KSComplement"
            out.append(f"| {i} | {col} | {metric} | {score:.4f} | {self.coverage.scores[col]:.4f} |")
        out += ["", "## Summary", "", "| Score | Value |", "|---|---|",
                f"| Column shapes (mean) | {self.shape.mean:.4f} |",
                f"| Column pair trends (mean) | {self.trend.mean:.4f} |",
                f"| Density | {self.density:.4f} |",
                f"| Coverage (mean) | {self.coverage.mean:.4f} |"]
        for name, value in (("Alpha precision", self.alpha_precision), ("Beta recall", self.beta_recall),
                            ("DCR", self.dcr), ("Detection AUC", self.detection), ("Detection (folded)", self.detection_folded)):
            if value is not None:
                out.append(f"| {name} | {value:.4f} |")
        if self.mle is not None:
            out += ["", f"## Machine learning efficiency ({self.mle['classifier']})", "",
                    "| Binary F1 | AUROC | Weighted F1 | Accuracy |", "|---|---|---|---|",
                    f"| {self.mle['binary_f1']:.4f} | {self.mle['auroc']:.4f} | {self.mle['weighted_f1']:.4f} | {self.mle['accuracy']:.4f} |"]
        return "\n".join(out) + "\n"


def evaluate(real: pd.DataFrame, syn: pd.DataFrame, schema: FeatureSchema | None = None, *,
             real_train: pd.DataFrame | None = None, real_test: pd.DataFrame | None = None,
             classifier: str = "boosted_stumps", seed: int = 0, folds: int = 5, k: int = 5,
             with_folded: bool = False) -> FidelityReport:
    """Full suite. MLE and DCR run only when a held-out real test table is given."""
    schema = schema or default_schema()
    check_table(real, schema)
    check_table(syn, schema)
    sh, tr = shape_score(real, syn, schema), trend_score(real, syn, schema)
    ap, br = quality(real, syn, k=k)
    det = detection(real, syn, folds, seed)
    report = FidelityReport(sh, tr, density(sh.mean, tr.mean), coverage(real, syn, schema), ap, br,
                            detection=det, detection_folded=folded(det) if with_folded else None,
                            meta={"seed": seed, "folds": folds, "k": k, "alpha_grid": list(DEFAULT_ALPHA_GRID),
                                  "n_real": len(real), "n_syn": len(syn)})
    if real_test is not None:
        check_table(real_test, schema)
        report.mle = mle(syn, real_test, schema.label, classifier, seed)
        report.dcr = dcr(syn, real_train if real_train is not None else real, real_test, schema)
    return report
