from __future__ import annotations

import json

import pytest

from mooddx.agents import Diagnosis, AgentAction
from mooddx.debate import AngelInput, DebateError, DebateTranscript, multi_angels, visitor_information
from mooddx.scripted import ScriptedPolicy


def _case(cases20, cid):
    return next(c for c in cases20 if c.case_id == cid)


def _roles(provider):
    """Role of each provider call, in call order."""
    out = []
    for call in provider.calls:
        system = call[0]["content"] if call[0]["role"] == "system" else ""
        if "acting as the judge" in system:
            out.append("judge")
        elif "You believe the current visitor does not have" in system:
            out.append("negative")
        elif "You believe the current visitor" in system:
            out.append("positive")
    return out


def test_consensus_has_no_rounds_and_no_judge(cases20, resources):
    case = _case(cases20, "v0003")
    policy = ScriptedPolicy({"v0003": {"R": "yes", "D": "yes", "C": "yes", "verdict": "no"}})
    p = policy.provider()
    t = multi_angels(case, resources, p)
    assert t.consensus and t.rounds == () and t.final.answer is True
    assert "judge" not in _roles(p)


def test_split_with_judge_ending_after_round_one(cases20, resources):
    case = _case(cases20, "v0003")
    policy = ScriptedPolicy({"v0003": {"R": "yes", "D": "no", "C": "yes", "verdict": "no", "judge_end": ["yes"]}})
    p = policy.provider()
    t = multi_angels(case, resources, p)
    assert not t.consensus and len(t.rounds) == 1
    assert t.final.answer is False
    assert _roles(p) == ["positive", "negative", "judge"]


def test_judge_never_ends_gives_cap_rounds(cases20, resources):
    case = _case(cases20, "v0003")
    policy = ScriptedPolicy({"v0003": {"R": "yes", "D": "no", "C": "no", "verdict": "yes", "judge_end": ["no"]}})
    p = policy.provider()
    t = multi_angels(case, resources, p, max_rounds=3)
    assert len(t.rounds) == 3 and t.final.answer is True
    assert _roles(p) == ["positive", "negative", "judge"] * 3
    assert any("round cap" in n for n in t.policy_notes)


def test_stance_fixity_and_shared_information(cases20, resources):
    case = _case(cases20, "v0003")
    p = ScriptedPolicy({"v0003": {"R": "yes", "D": "no", "C": "no"}}).provider()
    multi_angels(case, resources, p)
    debaters = [c for c in p.calls if "You believe the current visitor" in c[0]["content"]]
    neg_marker = "You believe the current visitor does not have"
    pos = [c for c in debaters if neg_marker not in c[0]["content"]]
    neg = [c for c in debaters if neg_marker in c[0]["content"]]
    assert pos and neg
    judge = next(c for c in p.calls if "acting as the judge" in c[0]["content"])
    for system in (pos[0][0]["content"], neg[0][0]["content"], judge[0]["content"]):
        assert "Agent without prior case retrieval believes the visitor is diagnosed" in system
        assert "Agent who retrieved and analyzed past cases believes the visitor isn't diagnosed" in system
        assert "Symptom Matching Results: 1. [" in system
        assert "Reference from Past Medical Records: Compared cases: h" in system
    assert all("You believe the current visitor has a mood disorder." in c[0]["content"] for c in pos)


def test_fixture_forced_split(cases20, resources, script20):
    case = _case(cases20, "v0001")
    t = multi_angels(case, resources, ScriptedPolicy(script20).provider())
    assert not t.consensus and len(t.rounds) == 2
    for r in t.rounds:
        assert r.to_dict()["order"] == ["positive", "negative", "judge"]
    assert t.final.verdict == script20["v0001"]["verdict"]


def test_transcript_bytes_are_deterministic(cases20, resources, script20, tmp_path):
    case = _case(cases20, "v0001")
    a = multi_angels(case, resources, ScriptedPolicy(script20).provider()).to_json()
    b = multi_angels(case, resources, ScriptedPolicy(script20).provider()).to_json()
    assert a == b
    path = DebateTranscript.save(multi_angels(case, resources, ScriptedPolicy(script20).provider()), tmp_path)
    assert json.loads(path.read_text())["case_id"] == "v0001"


def _diag(case_id, answer):
    f = AgentAction("finish", {"answer": "yes" if answer else "no", "reasons": "r"})
    return Diagnosis(case_id, answer, "r", ({"step": 0, "action": f.to_dict(), "status": "ok", "observation": ""},))


def test_failure_policies(cases20, resources):
    case = _case(cases20, "v0003")
    inputs = (AngelInput("R", _diag("v0003", True)), AngelInput("D", None, "boom"), AngelInput("C", _diag("v0003", True)))
    with pytest.raises(DebateError):
        multi_angels(case, resources, ScriptedPolicy().provider(), angel_inputs=inputs)
    t = multi_angels(case, resources, ScriptedPolicy().provider(), failure_policy="majority", angel_inputs=inputs)
    assert t.consensus and t.final.answer is True
    assert any("Angel.D" in n for n in t.policy_notes)
    none_left = tuple(AngelInput(v, None, "x") for v in "RDC")
    with pytest.raises(DebateError):
        multi_angels(case, resources, ScriptedPolicy().provider(), failure_policy="majority", angel_inputs=none_left)


def test_consensus_with_rounds_is_invalid():
    d = _diag("x", True)
    from mooddx.debate import DebateRound

    with pytest.raises(ValueError):
        DebateTranscript("x", (), (DebateRound(1, {}, {}, {}),), d, True)


def test_visitor_information_includes_failure_text(cases20, resources):
    case = _case(cases20, "v0003")
    info = visitor_information(case, {"R": _diag("v0003", True), "D": None, "C": _diag("v0003", False)},
                               resources, ScriptedPolicy().provider())
    assert "could not be" in info
