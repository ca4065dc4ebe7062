"""Binary diagnosis metrics, the evaluation harness and ablation settings."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .agents import AgentResources, AgentRunError, Diagnosis, run_angel, run_baseline
from .corpus import CaseRecord, LabeledPrediction
from .debate import DebateError, multi_angels
from .providers import ChatProvider
from .records import RecordProcessingError

METHODS = ("baseline", "angel_r", "angel_d", "angel_c", "multi")
METHOD_TITLES = {"baseline": "Baseline (LLM)", "angel_r": "Angel.R", "angel_d": "Angel.D", "angel_c": "Angel.C", "multi": "Multi-Angels"}
RUN_FAILURE_POLICIES = ("count_wrong", "exclude")


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @classmethod
    def from_predictions(cls, preds: Iterable[LabeledPrediction]) -> "ConfusionCounts":
        tp = fp = fn = tn = 0
        for p in preds:
            if p.gold:
                tp += p.predicted
                fn += not p.predicted
            else:
                fp += p.predicted
                tn += not p.predicted
        return cls(tp, fp, fn, tn)


@dataclass(frozen=True)
class Metrics:
    recall: float
    accuracy: float
    mcc: float
    macro_f1: float
    mcc_degenerate: bool = False
    recall_undefined: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def metrics_from_counts(c: ConfusionCounts) -> Metrics:
    """Zero-denominator convention: the ratio is 0.0 and, for MCC, a flag is set."""
    if c.n == 0:
        raise EvaluationError("no predictions to score")
    factors = (c.tp + c.fp, c.tp + c.fn, c.tn + c.fp, c.tn + c.fn)
    degenerate = any(f == 0 for f in factors)
    mcc = 0.0 if degenerate else (c.tp * c.tn - c.fp * c.fn) / math.sqrt(math.prod(factors))
    f1_pos = _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn)
    f1_neg = _ratio(2 * c.tn, 2 * c.tn + c.fn + c.fp)
    return Metrics(
        recall=_ratio(c.tp, c.tp + c.fn),
        accuracy=(c.tp + c.tn) / c.n,
        mcc=mcc,
        macro_f1=(f1_pos + f1_neg) / 2,
        mcc_degenerate=degenerate,
        recall_undefined=(c.tp + c.fn) == 0,
    )


def metrics(preds: Sequence[LabeledPrediction]) -> Metrics:
    if not preds:
        raise EvaluationError("metrics need at least one prediction")
    return metrics_from_counts(ConfusionCounts.from_predictions(preds))


@dataclass(frozen=True)
class AblationSetting:
    record_format_matching: str = "structured"
    record_format_agent: str = "structured"
    scale_mode: str = "selected"

    def __post_init__(self):
        for f in (self.record_format_matching, self.record_format_agent):
            if f not in ("structured", "unstructured"):
                raise ValueError(f"record format must be structured or unstructured, got {f!r}")
        if self.scale_mode not in ("selected", "unselected_totals"):
            raise ValueError(f"scale_mode must be selected or unselected_totals, got {self.scale_mode!r}")

    def apply(self, res: AgentResources) -> AgentResources:
        return replace(res, record_format_matching=self.record_format_matching,
                       record_format_agent=self.record_format_agent, scale_mode=self.scale_mode)

    def to_dict(self) -> dict:
        return asdict(self)


ABLATION_SETTINGS = {
    1: AblationSetting("unstructured", "unstructured", "selected"),
    2: AblationSetting("structured", "unstructured", "selected"),
    3: AblationSetting("structured", "structured", "selected"),
    4: AblationSetting("unstructured", "unstructured", "unselected_totals"),
}


@dataclass
class RunReport:
    method: str
    counts: ConfusionCounts
    metrics: Metrics
    cases: list[dict]
    failures: list[dict]
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "counts": asdict(self.counts),
            "metrics": self.metrics.to_dict(),
            "failures": self.failures,
            "cases": self.cases,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=1)


def _diagnose(method: str, case: CaseRecord, res: AgentResources, provider: ChatProvider, max_rounds: int,
              angel_failure_policy: str, debate_dir: Path | None) -> Diagnosis:
    if method == "baseline":
        return run_baseline(case, provider, res.catalog)
    if method == "multi":
        transcript = multi_angels(case, res, provider, max_rounds, angel_failure_policy)
        if debate_dir is not None:
            transcript.save(debate_dir)
        return transcript.final
    return run_angel(method[-1].upper(), case, res, provider)


def evaluate_run(method: str, cases: Sequence[CaseRecord], res: AgentResources, provider: ChatProvider, *,
                 max_rounds: int = 3, failure_policy: str = "count_wrong", angel_failure_policy: str = "fail",
                 metadata: dict | None = None, debate_dir: str | Path | None = None,
                 transcript_dir: str | Path | None = None, jobs: int = 1) -> RunReport:
    """Diagnose every case and score against gold; run failures follow ``failure_policy``."""
    if method not in METHODS:
        raise EvaluationError(f"unknown method {method!r}; choose from {METHODS}")
    if failure_policy not in RUN_FAILURE_POLICIES:
        raise EvaluationError(f"failure_policy must be one of {RUN_FAILURE_POLICIES}")
    if not cases:
        raise EvaluationError("test split is empty")
    unlabeled = [c.case_id for c in cases if c.gold_label is None]
    if unlabeled:
        raise EvaluationError(f"cases without gold labels: {unlabeled[:10]}")
    ddir = Path(debate_dir) if debate_dir is not None else None
    tdir = Path(transcript_dir) if transcript_dir is not None else None
    for d in (ddir, tdir):
        if d is not None:
            d.mkdir(parents=True, exist_ok=True)

    def one(case: CaseRecord):
        try:
            diag = _diagnose(method, case, res, provider, max_rounds, angel_failure_policy, ddir)
            out = (case, diag, None)
            record = diag.to_dict()
        except (AgentRunError, DebateError, RecordProcessingError) as exc:
            out = (case, None, f"{type(exc).__name__}: {exc}")
            record = {"case_id": case.case_id, "method": method, "error": out[2],
                      "transcript": list(getattr(exc, "transcript", []))}
        if tdir is not None:
            (tdir / f"{case.case_id}.json").write_text(
                json.dumps(record, ensure_ascii=False, sort_keys=True, indent=1) + "\n", encoding="utf-8")
        return out

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one, cases))
    else:
        outcomes = [one(c) for c in cases]

    preds, ledger, failures = [], [], []
    for case, diag, error in outcomes:
        gold = bool(case.is_mood)
        row = {"case_id": case.case_id, "gold": case.gold_label}
        if diag is None:
            failures.append({"case_id": case.case_id, "error": error})
            row.update(status="failed", predicted=None, flags=[])
            if failure_policy == "count_wrong":
                preds.append(LabeledPrediction(case.case_id, not gold, gold, "run failed"))
        else:
            row.update(status="ok", predicted=diag.verdict, flags=sorted(diag.flags), reasons=diag.reasons)
            preds.append(LabeledPrediction(case.case_id, diag.answer, gold, diag.reasons))
        ledger.append(row)
    if not preds:
        raise EvaluationError("every case failed and failures are excluded")
    counts = ConfusionCounts.from_predictions(preds)
    meta = dict(metadata or {})
    meta.update(n_cases=len(cases), failure_policy=failure_policy, max_rounds=max_rounds)
    return RunReport(method, counts, metrics_from_counts(counts), ledger, failures, meta)


def markdown_table(reports: Iterable[RunReport]) -> str:
    lines = ["| Method | Sensitivity | ACC | MCC | Macro F1 | Failures |", "|---|---|---|---|---|---|"]
    for r in reports:
        m = r.metrics
        mcc = f"{m.mcc:.3f}" + ("*" if m.mcc_degenerate else "")
        lines.append(f"| {METHOD_TITLES.get(r.method, r.method)} | {m.recall:.3f} | {m.accuracy:.3f} | {mcc} | {m.macro_f1:.3f} | {len(r.failures)} |")
    return "\n".join(lines) + "\n"
