"""Single-agent diagnostic loop (Angel.R / D / C) and the bare-LLM baseline."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any, Iterable

import jsonschema

from .corpus import CaseRecord
from .knowledge_base import MOOD_CLASSES, KnowledgeBase
from .prompts import ResponseFormatError, action_descriptions, ask_with_repair, extract_json, render
from .providers import ChatProvider, Embedder
from .records import RecordProcessingError, combine_key_elements, record_text
from .retrieval import (
    SymptomMatch,
    VectorStore,
    build_kb_index,
    match_symptoms,
    retrieve_similar_records,
    retrieve_similar_scales,
)
from .scales import RenderError, ScaleCatalog, SelectedItemSet, clinician_symptom_free, default_catalog
from .scales import render_performance, render_totals

log = logging.getLogger(__name__)

BASE_ACTIONS = ("toggle_visitor_record", "get_scale_performances")
DISPLAY_ACTIONS = ("previous_cases_display", "previous_scales_display")
ANALYSIS_ACTIONS = ("previous_cases_analysis", "previous_scales_analysis")
ALL_ACTIONS = BASE_ACTIONS + DISPLAY_ACTIONS + ANALYSIS_ACTIONS + ("finish",)
VARIANTS: dict[str, tuple[str, ...]] = {
    "R": BASE_ACTIONS + ("finish",),
    "D": BASE_ACTIONS + DISPLAY_ACTIONS + ("finish",),
    "C": BASE_ACTIONS + ANALYSIS_ACTIONS + ("finish",),
}
NO_RECORD = "No medical record available for this visitor."
NO_HISTORY = "No historical cases are available for comparison."
CONFLICT_FLAG = "record_scale_conflict"


class AgentRunError(RuntimeError):
    def __init__(self, message: str, transcript: Iterable[dict] = (), case_id: str = ""):
        super().__init__(message)
        self.transcript = list(transcript)
        self.case_id = case_id


@lru_cache(maxsize=1)
def action_schema() -> dict:
    return json.loads(resources.files("mooddx").joinpath("data", "action_schema.json").read_text(encoding="utf-8"))


def validate_action_dict(obj: Any) -> None:
    try:
        jsonschema.validate(obj, action_schema())
    except jsonschema.ValidationError as exc:
        raise ResponseFormatError(f"action does not match the response format: {exc.message}") from None


@dataclass(frozen=True)
class AgentAction:
    name: str
    args: dict
    thoughts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"action": {"name": self.name, "args": dict(self.args)}, "thoughts": dict(self.thoughts)}

    @property
    def answer(self) -> bool:
        return self.args["answer"] == "yes"


def parse_action(reply: str) -> AgentAction:
    """Parse and schema-check one agent reply. Action names are case-insensitive."""
    obj = extract_json(reply)
    if not isinstance(obj, dict) or not isinstance(obj.get("action"), dict):
        raise ResponseFormatError("reply must be an object with an 'action' object")
    action = dict(obj["action"])
    if isinstance(action.get("name"), str):
        action["name"] = action["name"].strip().lower()
    if isinstance(action.get("args"), dict) and isinstance(action["args"].get("answer"), str):
        action["args"] = {**action["args"], "answer": action["args"]["answer"].strip().lower()}
    norm = {**obj, "action": action}
    validate_action_dict(norm)
    return AgentAction(action["name"], dict(action["args"]), dict(obj.get("thoughts") or {}))


@dataclass(frozen=True)
class Diagnosis:
    case_id: str
    answer: bool
    reasons: str
    transcript: tuple[dict, ...]
    flags: frozenset[str] = frozenset()
    method: str = ""

    def __post_init__(self):
        if not self.reasons.strip():
            raise ValueError("a diagnosis needs non-empty reasons")
        if not self.transcript or self.transcript[-1]["action"]["action"]["name"] != "finish":
            raise ValueError("transcript must end with finish")

    @property
    def verdict(self) -> str:
        return "yes" if self.answer else "no"

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "method": self.method,
            "answer": self.verdict,
            "reasons": self.reasons,
            "flags": sorted(self.flags),
            "transcript": list(self.transcript),
        }


@dataclass
class AgentResources:
    """Everything the tools need; shared read-only across cases."""

    kb_index: VectorStore
    embedder: Embedder
    selected: SelectedItemSet
    catalog: ScaleCatalog = field(default_factory=default_catalog)
    record_store: VectorStore | None = None
    scale_store: VectorStore | None = None
    scale_embedder: Any = None
    record_format_matching: str = "structured"
    record_format_agent: str = "structured"
    scale_mode: str = "selected"
    k: int = 5
    step_cap: int = 8

    def __post_init__(self):
        if self.scale_embedder is None:
            self.scale_embedder = self.embedder


def build_resources(kb: KnowledgeBase, embedder: Embedder, selected: SelectedItemSet, **kwargs) -> AgentResources:
    kb.require_mood_coverage()
    return AgentResources(build_kb_index(kb, embedder), embedder, selected, **kwargs)


def symptom_match_for(case: CaseRecord, res: AgentResources) -> SymptomMatch | None:
    text = record_text(case, res.record_format_matching)
    if text is None:
        return None
    return match_symptoms(text, res.kb_index, res.embedder, res.k)


def scale_performance_text(case: CaseRecord, res: AgentResources) -> str:
    try:
        if res.scale_mode == "unselected_totals":
            return render_totals(case, res.catalog)
        return render_performance(case, res.selected, res.catalog)
    except RenderError:
        return "No scale performances available for this visitor."


def record_observation(case: CaseRecord, res: AgentResources) -> str:
    text = record_text(case, res.record_format_agent)
    if text is None:
        return NO_RECORD
    match = symptom_match_for(case, res)
    return f"Medical record:\n{text}\n\nTop-{res.k} related DSM-5 diagnostic criteria:\n{match.render()}"


def dispatch(name: str, case: CaseRecord, res: AgentResources, provider: ChatProvider) -> str:
    """Run one tool; the observation is exactly the owning module's output."""
    if name == "toggle_visitor_record":
        return record_observation(case, res)
    if name == "get_scale_performances":
        return scale_performance_text(case, res)
    mode = "display" if name.endswith("_display") else "analysis"
    if name.startswith("previous_cases"):
        if res.record_store is None:
            return NO_HISTORY
        return retrieve_similar_records(case, res.record_store, res.embedder, res.k, mode, provider, res.record_format_agent).text
    if res.scale_store is None:
        return NO_HISTORY
    return retrieve_similar_scales(case, res.scale_store, res.scale_embedder, res.selected, res.k, mode, provider, res.catalog).text


def conflict_flags(case: CaseRecord, res: AgentResources) -> frozenset[str]:
    """Clinician items show no symptoms while the record matched a mood criterion."""
    if not case.has_record:
        return frozenset()
    match = symptom_match_for(case, res)
    mood_hit = match is not None and any(c in MOOD_CLASSES for c in match.classes())
    if mood_hit and clinician_symptom_free(case, res.selected, res.catalog):
        return frozenset({CONFLICT_FLAG})
    return frozenset()


def angel_system_prompt(variant: str, digit_id: str) -> str:
    desc = action_descriptions()
    actions = "\n\n".join(f"{name}: {desc[name]}" for name in VARIANTS[variant])
    return render("angel_system", digit_id=digit_id, actions=actions)


def run_angel(variant: str, case: CaseRecord, res: AgentResources, provider: ChatProvider) -> Diagnosis:
    if variant not in VARIANTS:
        raise ValueError(f"unknown Angel variant {variant!r}")
    allowed = VARIANTS[variant]
    messages = [
        {"role": "system", "content": angel_system_prompt(variant, case.case_id)},
        {"role": "user", "content": f"Diagnose visitor {case.case_id}. Respond with your next action."},
    ]
    transcript: list[dict] = []
    repaired = rejected = False
    for step in range(res.step_cap):
        reply = provider.complete(messages)
        messages.append({"role": "assistant", "content": reply})
        try:
            action = parse_action(reply)
        except ResponseFormatError as exc:
            if repaired:
                raise AgentRunError(f"unparseable action after repair: {exc}", transcript, case.case_id) from None
            repaired = True
            messages.append({"role": "user", "content": render("json_repair", error=str(exc))})
            continue
        if action.name not in allowed:
            if rejected:
                raise AgentRunError(f"action {action.name!r} not available to Angel.{variant} (repeated)", transcript, case.case_id)
            rejected = True
            obs = f"Action {action.name} is not available. Use only: {', '.join(allowed)}."
            transcript.append({"step": step, "action": action.to_dict(), "status": "rejected", "observation": obs})
            messages.append({"role": "user", "content": f"Observation: {obs}"})
            continue
        if action.name == "finish":
            transcript.append({"step": step, "action": action.to_dict(), "status": "ok", "observation": ""})
            return Diagnosis(case.case_id, action.answer, action.args["reasons"].strip(), tuple(transcript),
                             conflict_flags(case, res), f"angel_{variant.lower()}")
        try:
            obs = dispatch(action.name, case, res, provider)
        except RecordProcessingError as exc:
            raise AgentRunError(str(exc), transcript, case.case_id) from exc
        transcript.append({"step": step, "action": action.to_dict(), "status": "ok", "observation": obs})
        messages.append({"role": "user", "content": f"Observation ({action.name}):\n{obs}"})
    raise AgentRunError(f"step cap {res.step_cap} reached without finish", transcript, case.case_id)


def baseline_prompt(case: CaseRecord, catalog: ScaleCatalog | None = None) -> str:
    catalog = catalog or default_catalog()
    record = combine_key_elements(case).text if case.has_record else NO_RECORD
    try:
        totals = render_totals(case, catalog)
    except RenderError:
        totals = "No scale totals available."
    return render("baseline", digit_id=case.case_id, medical_record=record, scale_summary=totals)


def _parse_baseline(reply: str) -> tuple[bool, str]:
    obj = extract_json(reply)
    if not isinstance(obj, dict):
        raise ResponseFormatError("expected a JSON object")
    answer = str(obj.get("diagnosis", "")).strip().lower()
    reasons = obj.get("reasons")
    if isinstance(reasons, (list, dict)):
        reasons = json.dumps(reasons, ensure_ascii=False)
    if answer not in ("yes", "no"):
        raise ResponseFormatError("'diagnosis' must be 'yes' or 'no'")
    if not isinstance(reasons, str) or not reasons.strip():
        raise ResponseFormatError("'reasons' must be non-empty")
    return answer == "yes", reasons.strip()


def run_baseline(case: CaseRecord, provider: ChatProvider, catalog: ScaleCatalog | None = None) -> Diagnosis:
    messages = [{"role": "user", "content": baseline_prompt(case, catalog)}]
    try:
        (answer, reasons), _ = ask_with_repair(provider, messages, _parse_baseline)
    except ResponseFormatError as exc:
        raise AgentRunError(f"baseline reply invalid after repair: {exc}", case_id=case.case_id) from None
    finish = AgentAction("finish", {"answer": "yes" if answer else "no", "reasons": reasons})
    return Diagnosis(case.case_id, answer, reasons, ({"step": 0, "action": finish.to_dict(), "status": "ok", "observation": ""},),
                     method="baseline")
