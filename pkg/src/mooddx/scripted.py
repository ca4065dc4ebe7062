"""Deterministic stand-in for a chat model, driven by a per-case script.

The policy recognises which role a prompt is addressed to (Angel, debater,
judge, case analysis, baseline) and answers from the script. It is the
offline provider used by tests and ``--provider scripted`` runs.

Script format (JSON object keyed by case id)::

    {"case0001": {"R": "yes", "D": "yes", "C": "no",
                  "judge_end": ["no", "yes"], "verdict": "yes",
                  "baseline": "yes",
                  "actions": {"R": ["toggle_visitor_record", "finish"]}}}

Missing answers default to ``"no"``; the judge verdict defaults to the
majority of the three Angel answers and the judge ends after round 1.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Sequence

from .agents import VARIANTS
from .debate import STANCES
from .providers import Message, ScriptedProvider

_ANGEL_ID = re.compile(r"Diagnose whether the visitor (\S+) has a mood disorder")
_VISITOR_LINE = re.compile(r"^Visitor (?:ID: )?(\S+?)\.?$", re.MULTILINE)
_CASE_REF = re.compile(r"^Case (\S+) \(similarity", re.MULTILINE)


class ScriptError(KeyError):
    pass


class ScriptedPolicy:
    def __init__(self, script: dict[str, dict] | None = None):
        self.script = dict(script or {})

    @classmethod
    def load(cls, path: str | Path) -> "ScriptedPolicy":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def provider(self, model: str = "scripted-v1") -> ScriptedProvider:
        return ScriptedProvider(handler=self, model=model)

    def entry(self, case_id: str) -> dict:
        return self.script.get(case_id, {})

    def answer(self, case_id: str, who: str) -> str:
        value = self.entry(case_id).get(who, "no")
        if value not in ("yes", "no"):
            raise ScriptError(f"script answer for {case_id}/{who} must be yes or no")
        return value

    def verdict(self, case_id: str) -> str:
        entry = self.entry(case_id)
        if "verdict" in entry:
            return entry["verdict"]
        votes = [self.answer(case_id, v) for v in "RDC"]
        return "yes" if votes.count("yes") >= 2 else "no"

    def __call__(self, messages: Sequence[Message]) -> str:
        system = messages[0]["content"] if messages[0]["role"] == "system" else ""
        user = next((m["content"] for m in messages if m["role"] == "user"), "")
        if "Diagnose whether the visitor" in system:
            return self._angel(system, messages)
        if "acting as the judge" in system:
            return self._judge(user)
        if "You believe the current visitor" in system:
            return self._debater(system, user)
        if "Compare the current visitor with each of the retrieved past cases" in user:
            return self._analysis(user)
        if "Determine whether the client has a mood disorder" in user:
            return self._baseline(user)
        raise ScriptError("scripted policy does not recognise this prompt")

    def _case_id(self, text: str) -> str:
        m = _VISITOR_LINE.search(text)
        if not m:
            raise ScriptError("no visitor id in prompt")
        return m.group(1)

    def _angel(self, system: str, messages: Sequence[Message]) -> str:
        case_id = _ANGEL_ID.search(system).group(1)
        variant = "C" if "previous_cases_analysis:" in system else "D" if "previous_cases_display:" in system else "R"
        plan = self.entry(case_id).get("actions", {}).get(variant) or list(VARIANTS[variant])
        step = sum(1 for m in messages if m["role"] == "assistant")
        name = plan[min(step, len(plan) - 1)]
        if name == "finish":
            answer = self.answer(case_id, variant)
            args = {"answer": answer, "reasons": f"Scripted Angel.{variant} decision for visitor {case_id}: {answer}."}
        else:
            args = {"digit_id": case_id}
        thoughts = {"plan": f"step {step + 1}", "criticism": "", "observation": "", "reasoning": f"scripted {name}"}
        return json.dumps({"action": {"name": name, "args": args}, "thoughts": thoughts}, sort_keys=True)

    def _debater(self, system: str, user: str) -> str:
        case_id = self._case_id(user)
        positive = STANCES["negative"] not in system
        rnd = user.count("- Judge:") + 1
        claim = "has" if positive else "does not have"
        return json.dumps({
            "response": f"Round {rnd}: visitor {case_id} {claim} a mood disorder according to the record and scales.",
            "thoughts": {"plan": "hold the stance", "criticism": "scripted"},
        }, sort_keys=True)

    def _judge(self, user: str) -> str:
        case_id = self._case_id(user)
        rnd = user.count("- Judge:") + 1
        ends = self.entry(case_id).get("judge_end", ["yes"])
        end = ends[min(rnd, len(ends)) - 1]
        verdict = self.verdict(case_id)
        return json.dumps({
            "judge": end,
            "diagnose": verdict,
            "thoughts": {"plan": "", "criticism": "", "judge_reasons": f"round {rnd} {'closes' if end == 'yes' else 'continues'}",
                         "reasoning": f"Scripted judge verdict for visitor {case_id}: {verdict}."},
        }, sort_keys=True)

    def _analysis(self, user: str) -> str:
        refs = _CASE_REF.findall(user)
        if not refs:
            return "No retrieved case to compare."
        return f"Case {refs[0]} is the closest reference; the other retrieved cases ({', '.join(refs[1:]) or 'none'}) are weaker matches."

    def _baseline(self, user: str) -> str:
        case_id = self._case_id(user)
        answer = self.answer(case_id, "baseline")
        return json.dumps({"diagnosis": answer, "reasons": f"Scripted baseline decision for visitor {case_id}."}, sort_keys=True)
