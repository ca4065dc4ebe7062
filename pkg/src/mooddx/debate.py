"""Multi-Angels: consensus check, positive/negative debate rounds and a judge."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .agents import (
    NO_HISTORY,
    NO_RECORD,
    AgentAction,
    AgentResources,
    AgentRunError,
    Diagnosis,
    record_text,
    run_angel,
    scale_performance_text,
    symptom_match_for,
)
from .corpus import CaseRecord
from .prompts import ResponseFormatError, ask_with_repair, extract_json, render
from .providers import ChatProvider
from .retrieval import retrieve_similar_records, retrieve_similar_scales

ANGELS = ("R", "D", "C")
FAILURE_POLICIES = ("fail", "majority")
STANCES = {
    "positive": "You believe the current visitor has a mood disorder.",
    "negative": "You believe the current visitor does not have a mood disorder.",
}


class DebateError(RuntimeError):
    def __init__(self, message: str, case_id: str = ""):
        super().__init__(message)
        self.case_id = case_id


@dataclass(frozen=True)
class AngelInput:
    variant: str
    diagnosis: Diagnosis | None
    error: str = ""

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "diagnosis": self.diagnosis.to_dict() if self.diagnosis else None,
            "error": self.error,
        }


@dataclass(frozen=True)
class DebateRound:
    index: int
    positive: dict
    negative: dict
    judge: dict

    def to_dict(self) -> dict:
        return {"index": self.index, "order": ["positive", "negative", "judge"],
                "positive": self.positive, "negative": self.negative, "judge": self.judge}


@dataclass(frozen=True)
class DebateTranscript:
    case_id: str
    angel_inputs: tuple[AngelInput, ...]
    rounds: tuple[DebateRound, ...]
    final: Diagnosis
    consensus: bool
    policy_notes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.consensus and self.rounds:
            raise ValueError("a consensus transcript has no debate rounds")

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "consensus": self.consensus,
            "angel_inputs": [a.to_dict() for a in self.angel_inputs],
            "rounds": [r.to_dict() for r in self.rounds],
            "final": self.final.to_dict(),
            "policy_notes": list(self.policy_notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=1)

    def save(self, directory: str | Path) -> Path:
        path = Path(directory) / f"{self.case_id}.json"
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        return path


def _verdict_phrase(d: Diagnosis | None) -> tuple[str, str]:
    if d is None:
        return "could not be", "The agent failed to complete its diagnosis."
    return ("is" if d.answer else "isn't"), d.reasons


def visitor_information(case: CaseRecord, inputs: dict[str, Diagnosis | None], res: AgentResources, provider: ChatProvider) -> str:
    fields = {}
    for v in ANGELS:
        fields[f"{v.lower()}_verdict"], fields[f"{v.lower()}_reasons"] = _verdict_phrase(inputs.get(v))
    text = record_text(case, res.record_format_agent)
    match = symptom_match_for(case, res)
    fields["medical_record"] = text if text is not None else NO_RECORD
    fields["symptom_matching"] = match.render() if match is not None else "Not applicable (no medical record)."
    fields["scale_performances"] = scale_performance_text(case, res)
    if res.record_store is not None:
        fields["past_records"] = retrieve_similar_records(case, res.record_store, res.embedder, res.k, "analysis", provider,
                                                          res.record_format_agent).text
    else:
        fields["past_records"] = NO_HISTORY
    if res.scale_store is not None:
        fields["past_scales"] = retrieve_similar_scales(case, res.scale_store, res.scale_embedder, res.selected, res.k,
                                                        "analysis", provider, res.catalog).text
    else:
        fields["past_scales"] = NO_HISTORY
    return render("visitor_information", **fields)


def _yes_no(obj: dict, key: str) -> str:
    value = str(obj.get(key, "")).strip().lower()
    if value not in ("yes", "no"):
        raise ResponseFormatError(f"'{key}' must be 'yes' or 'no'")
    return value


def _parse_debater(reply: str) -> dict:
    obj = extract_json(reply)
    if not isinstance(obj, dict) or not isinstance(obj.get("response"), str) or not obj["response"].strip():
        raise ResponseFormatError("expected an object with a non-empty 'response'")
    return {"response": obj["response"].strip(), "thoughts": obj.get("thoughts") or {}}


def _parse_judge(reply: str) -> dict:
    obj = extract_json(reply)
    if not isinstance(obj, dict):
        raise ResponseFormatError("expected a JSON object")
    thoughts = obj.get("thoughts") if isinstance(obj.get("thoughts"), dict) else {}
    return {"judge": _yes_no(obj, "judge"), "diagnose": _yes_no(obj, "diagnose"), "thoughts": thoughts}


def _history(rounds: list[DebateRound], pending_positive: dict | None = None) -> str:
    lines = []
    for r in rounds:
        lines.append(f"Round {r.index} - Positive side: {r.positive['response']}")
        lines.append(f"Round {r.index} - Negative side: {r.negative['response']}")
        lines.append(f"Round {r.index} - Judge: continue={'no' if r.judge['judge'] == 'yes' else 'yes'}, "
                     f"reasons: {r.judge['thoughts'].get('judge_reasons', '')}")
    if pending_positive is not None:
        lines.append(f"Round {len(rounds) + 1} - Positive side: {pending_positive['response']}")
    return "\n".join(lines) if lines else "The debate has not started yet."


def _ask(provider: ChatProvider, system: str, user: str, parse, who: str, case_id: str):
    messages = [{"role": "system", "content": system}, {"role": "user", "content": user}]
    try:
        value, _ = ask_with_repair(provider, messages, parse)
    except ResponseFormatError as exc:
        raise DebateError(f"{who} reply invalid after repair: {exc}", case_id) from None
    return value


def _finish(case_id: str, answer: bool, reasons: str, flags: frozenset = frozenset()) -> Diagnosis:
    action = AgentAction("finish", {"answer": "yes" if answer else "no", "reasons": reasons})
    return Diagnosis(case_id, answer, reasons, ({"step": 0, "action": action.to_dict(), "status": "ok", "observation": ""},),
                     flags, "multi")


def run_angels(case: CaseRecord, res: AgentResources, provider: ChatProvider) -> tuple[AngelInput, ...]:
    out = []
    for v in ANGELS:
        try:
            out.append(AngelInput(v, run_angel(v, case, res, provider)))
        except AgentRunError as exc:
            out.append(AngelInput(v, None, str(exc)))
    return tuple(out)


def multi_angels(case: CaseRecord, res: AgentResources, provider: ChatProvider, max_rounds: int = 3,
                 failure_policy: str = "fail", angel_inputs: tuple[AngelInput, ...] | None = None) -> DebateTranscript:
    """Consensus is binding; otherwise debate until the judge ends it or the round cap."""
    if failure_policy not in FAILURE_POLICIES:
        raise ValueError(f"failure_policy must be one of {FAILURE_POLICIES}")
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    inputs = angel_inputs if angel_inputs is not None else run_angels(case, res, provider)
    failed = [a for a in inputs if a.diagnosis is None]
    notes: list[str] = []
    if failed:
        if failure_policy == "fail":
            raise DebateError(f"Angel.{failed[0].variant} failed: {failed[0].error}", case.case_id)
        notes.append("degraded to remaining angels: " + ", ".join(f"Angel.{a.variant}" for a in failed))
    done = {a.variant: a.diagnosis for a in inputs if a.diagnosis is not None}
    if not done:
        raise DebateError("every Angel run failed", case.case_id)
    flags = frozenset().union(*(d.flags for d in done.values()))
    answers = {d.answer for d in done.values()}
    if len(answers) == 1:
        answer = answers.pop()
        reasons = " ".join(f"Angel.{v}: {d.reasons}" for v, d in done.items())
        return DebateTranscript(case.case_id, tuple(inputs), (), _finish(case.case_id, answer, reasons, flags), True, tuple(notes))

    info = visitor_information(case, done, res, provider)
    guidance = render("shared_guidance")
    systems = {side: render("debate_agent", stance=STANCES[side], visitor_information=info, shared_guidance=guidance)
               for side in STANCES}
    judge_system = render("judge", visitor_information=info, shared_guidance=guidance)
    rounds: list[DebateRound] = []
    for idx in range(1, max_rounds + 1):
        positive = _ask(provider, systems["positive"],
                        f"Visitor {case.case_id}.\nDebate so far:\n{_history(rounds)}\n\nPresent your argument for round {idx}.",
                        _parse_debater, "positive agent", case.case_id)
        negative = _ask(provider, systems["negative"],
                        f"Visitor {case.case_id}.\nDebate so far:\n{_history(rounds, positive)}\n\nPresent your argument for round {idx}.",
                        _parse_debater, "negative agent", case.case_id)
        current = DebateRound(idx, positive, negative, {})
        judge = _ask(provider, judge_system,
                     f"Visitor {case.case_id}.\nDebate so far:\n{_history(rounds)}\n"
                     f"Round {idx} - Positive side: {positive['response']}\n"
                     f"Round {idx} - Negative side: {negative['response']}\n\n"
                     "Decide whether the debate should end and give your diagnosis.",
                     _parse_judge, "judge", case.case_id)
        rounds.append(DebateRound(idx, current.positive, current.negative, judge))
        if judge["judge"] == "yes":
            break
    last = rounds[-1].judge
    reasons = str(last["thoughts"].get("reasoning") or last["thoughts"].get("judge_reasons") or "").strip()
    if not reasons:
        reasons = f"Judge verdict after {len(rounds)} debate round(s)."
    if len(rounds) == max_rounds and last["judge"] != "yes":
        notes.append(f"round cap {max_rounds} reached; verdict forced")
    final = _finish(case.case_id, last["diagnose"] == "yes", reasons, flags)
    return DebateTranscript(case.case_id, tuple(inputs), tuple(rounds), final, False, tuple(notes))
