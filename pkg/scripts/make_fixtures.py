"""Generate the bundled synthetic fixtures under fixtures/.

Everything here is invented test data: no real clinical content. Output is
deterministic for a given seed.
"""

from __future__ import annotations

import json
from collections import Counter
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pandas as pd

from mooddx.corpus import CaseRecord, save_cases
from mooddx.knowledge_base import default_kb
from mooddx.moodsyn import default_schema, write_table
from mooddx.records import relativize_text
from mooddx.scales import default_catalog, default_selected_items

ROOT = Path(__file__).resolve().parents[1] / "fixtures"

SYMPTOMS = {
    "depressive": [
        "persistent low mood for most of the day",
        "loss of interest in hobbies and friends",
        "early morning awakening",
        "poor appetite with weight loss",
        "fatigue and low energy nearly every day",
        "feelings of worthlessness and guilt",
        "passive thoughts of death",
        "difficulty concentrating at work",
        "crying spells without clear reason",
    ],
    "manic": [
        "elevated mood with overspending",
        "decreased need for sleep without feeling tired",
        "racing thoughts and rapid speech",
        "grandiose plans to start several companies",
        "irritability when interrupted",
        "increased goal-directed activity",
    ],
    "anxiety": [
        "excessive worry about health and family",
        "palpitations and chest tightness",
        "restlessness and muscle tension",
        "fear of crowded places",
    ],
    "obsessive": [
        "repeated hand washing for hours",
        "intrusive unwanted thoughts about contamination",
        "checking the door lock many times",
    ],
    "psychotic": [
        "hears voices commenting on actions",
        "believes neighbours are monitoring the home",
        "disorganized speech during the interview",
    ],
    "insomnia": [
        "difficulty falling asleep for several months",
        "frequent night awakenings",
    ],
}
BACKGROUND = [
    "works long night shifts",
    "recent conflict with family members",
    "no history of substance use",
    "lives alone after moving to a new city",
    "financial stress after job change",
    "good physical health",
]
OCCUPATIONS = ["teacher", "engineer", "student", "nurse", "accountant", "", "driver", "retired"]
COMPLAINTS = {
    "depressive": "Low mood and loss of interest.",
    "manic": "Elevated mood and reduced sleep.",
    "anxiety": "Persistent worry and tension.",
    "obsessive": "Repetitive washing and intrusive thoughts.",
    "psychotic": "Hearing voices and suspiciousness.",
    "insomnia": "Poor sleep.",
}


def _scores(rng, severity: float, anxiety: float, mania: float) -> dict[str, int]:
    """Selected items plus every scale total, consistent with the catalog ranges."""
    cat = default_catalog()
    sel = default_selected_items()
    out: dict[str, int] = {}
    for item_id in sel.items:
        if item_id.endswith("_total_score"):
            continue
        lo, hi = cat.item(item_id).score_range
        level = anxiety if item_id in ("hama_Q6", "hama_Q4") else severity
        out[item_id] = int(np.clip(np.rint(lo + level * (hi - lo) + rng.normal(0, 0.6)), lo, hi))
    for total in cat.totals(include_auxiliary=True):
        lo, hi = total.score_range
        level = {"hama": anxiety, "gad7": anxiety, "ymrs": mania, "hcl32": mania, "mdq": mania,
                 "ssrs": 1 - severity}.get(total.scale_id, severity)
        scale = 0.55 if total.scale_id in ("hamd", "hama", "bprs", "ymrs", "das") else 0.9
        v = int(np.clip(np.rint(lo + level * scale * (hi - lo) + rng.normal(0, 0.04 * (hi - lo))), lo, hi))
        out[total.item_id] = v
    # keep question sums within totals where both are present
    for prefix, total in (("phq9", "phq9_total_score"), ("hamd", "hamd_total_score"), ("hama", "hama_total_score"),
                          ("bprs", "bprs_total_score")):
        qsum = sum(v for k, v in out.items() if k.startswith(prefix + "_Q"))
        out[total] = max(out[total], qsum)
    return out


def _case(rng, case_id: str, label: str, kind: str | None, visit: date, severity: float, anxiety: float, mania: float,
          with_record: bool = True) -> CaseRecord:
    scores = _scores(rng, severity, anxiety, mania)
    gender = ["male", "female"][int(rng.integers(2))]
    age = int(rng.integers(16, 66))
    if not with_record or kind is None:
        return CaseRecord(case_id, scores, gender, age, gold_label=label)
    pool = SYMPTOMS[kind]
    picks = [pool[i] for i in sorted(rng.choice(len(pool), size=min(4, len(pool)), replace=False))]
    extra = [BACKGROUND[i] for i in sorted(rng.choice(len(BACKGROUND), size=2, replace=False))]
    onset = visit - timedelta(days=int(rng.integers(20, 700)))
    raw = (f"Since {onset.isoformat()} the visitor reports {picks[0]}. "
           + " ".join(f"Also {p}." for p in picks[1:]) + " Background: " + "; ".join(extra) + ".")
    items = tuple(f"- {p}" for p in picks + extra)
    return CaseRecord(
        case_id, scores, gender, age, OCCUPATIONS[int(rng.integers(len(OCCUPATIONS)))], visit,
        COMPLAINTS[kind], relativize_text(raw, visit), "structured", items, label,
    )


def make_cases(rng, prefix: str, n_mood: int, n_other: int, n_normal: int, start: int = 1) -> list[CaseRecord]:
    plan = ["mood_disorder"] * n_mood + ["other_disease"] * n_other + ["normal"] * n_normal
    order = rng.permutation(len(plan))
    cases = []
    for pos, idx in enumerate(order):
        label = plan[idx]
        visit = date(2023, 1, 1) + timedelta(days=int(rng.integers(0, 600)))
        cid = f"{prefix}{start + pos:04d}"
        if label == "mood_disorder":
            kind = "manic" if rng.random() < 0.3 else "depressive"
            sev = rng.uniform(0.5, 0.9)
            cases.append(_case(rng, cid, label, kind, visit, sev, rng.uniform(0.3, 0.7), 0.7 if kind == "manic" else 0.1))
        elif label == "other_disease":
            kind = ["anxiety", "obsessive", "psychotic", "insomnia"][int(rng.integers(4))]
            cases.append(_case(rng, cid, label, kind, visit, rng.uniform(0.1, 0.4), rng.uniform(0.4, 0.8), 0.05))
        else:
            cases.append(_case(rng, cid, label, None, visit, rng.uniform(0.0, 0.2), rng.uniform(0.0, 0.2), 0.02, False))
    return cases


def conflict_case(rng) -> CaseRecord:
    """Mood record narrative with clinician-rated items all at no-symptom level."""
    base = _case(rng, "v0020", "mood_disorder", "depressive", date(2024, 3, 1), 0.7, 0.3, 0.1)
    sel = default_selected_items()
    cat = default_catalog()
    scores = dict(base.scale_scores)
    for item_id in sel.items:
        item = cat.item(item_id)
        if item.rater == "clinician":
            scores[item_id] = item.no_symptom_max if item_id.endswith("_total_score") else 0
    return CaseRecord(**{**base.__dict__, "scale_scores": scores})


def make_script(cases: list[CaseRecord]) -> dict:
    """Mostly correct Angels, a few deliberate errors, one forced debate and one rejection."""
    script = {}
    for i, c in enumerate(cases):
        gold = "yes" if c.gold_label == "mood_disorder" else "no"
        wrong = "no" if gold == "yes" else "yes"
        entry = {"R": gold, "D": gold, "C": gold, "baseline": gold}
        if i % 5 == 1:
            entry["baseline"] = wrong
        if i % 7 == 3:
            entry["R"] = wrong
        script[c.case_id] = entry
    first, second = cases[0].case_id, cases[1].case_id
    script[first].update(R="no", D="yes", C="yes", judge_end=["no", "yes"], verdict="yes"
                         if cases[0].gold_label == "mood_disorder" else "no")
    script[second]["actions"] = {"R": ["previous_cases_display", "toggle_visitor_record", "get_scale_performances", "finish"]}
    return script


def moodsyn_table(rng, n_pos: int, n_neg: int) -> pd.DataFrame:
    schema = default_schema()
    labels = np.array([1] * n_pos + [0] * n_neg)
    rng.shuffle(labels)
    rows = []
    for y in labels:
        sev = rng.beta(5, 3) if y else rng.beta(2, 5)
        anx = np.clip(sev + rng.normal(0, 0.15), 0, 1)
        mania = rng.beta(2, 6) + (0.25 * rng.random() if y else 0.0)
        row = {}
        for c in schema.columns[:-1]:
            level = anx if c.name.startswith(("HAMA", "GAD7")) else mania if c.name.startswith(("HCL32", "MDQ", "YMRS")) else sev
            if c.name.startswith("SSRS"):
                level = 1 - sev
            frac = 0.5 if "Total" in c.name and c.name.startswith(("HAMD", "HAMA", "BPRS", "YMRS", "DAS")) else 0.9
            span = c.max - c.min
            row[c.name] = int(np.clip(np.rint(c.min + level * frac * span + rng.normal(0, 0.08 * span)), c.min, c.max))
        for con in schema.constraints:
            qsum = sum(row[q] for q in con.questions)
            row[con.total] = max(row[con.total], qsum)
        row[schema.label] = int(y)
        rows.append(row)
    return pd.DataFrame(rows, columns=schema.names)


def main(seed: int = 20240301) -> None:
    rng = np.random.default_rng(seed)
    ROOT.mkdir(exist_ok=True)
    cases = make_cases(rng, "v", 8, 5, 6) + [conflict_case(rng)]
    save_cases(cases, ROOT / "cases20.jsonl")
    history = make_cases(rng, "h", 80, 50, 70)
    save_cases(history, ROOT / "history200.jsonl")
    (ROOT / "script20.json").write_text(json.dumps(make_script(cases), indent=1, sort_keys=True) + "\n")
    write_table(moodsyn_table(rng, 687, 419), ROOT / "moodsyn_real.csv")
    write_table(moodsyn_table(rng, 73, 67), ROOT / "moodsyn_test.csv")
    default_schema().save(ROOT / "moodsyn_schema.json")
    kb = default_kb()
    (ROOT / "kb30.json").write_text(json.dumps(json.loads(kb.to_json())[:30], indent=1, ensure_ascii=False) + "\n")

    # golden prompt files pin the rendered templates byte for byte
    from mooddx.agents import angel_system_prompt, baseline_prompt

    golden = ROOT / "golden"
    golden.mkdir(exist_ok=True)
    (golden / "baseline_v0001.txt").write_text(baseline_prompt(cases[0]), encoding="utf-8")
    (golden / "angel_c_system_v0001.txt").write_text(angel_system_prompt("C", cases[0].case_id), encoding="utf-8")

    # manifests are counted from the written files, not from the in-memory objects
    labels = Counter(json.loads(line)["gold_label"] for line in open(ROOT / "cases20.jsonl"))
    kb_classes = Counter(e["disorder_class"] for e in json.load(open(ROOT / "kb30.json")))
    manifest = {"cases20": dict(sorted(labels.items())), "kb30": dict(sorted(kb_classes.items()))}
    (ROOT / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    print(manifest)


if __name__ == "__main__":
    main()
