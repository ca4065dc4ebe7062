"""Regenerate src/mooddx/data/catalog.json.

Run from the repository root:  python scripts/build_catalog.py
"""

from __future__ import annotations

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "mooddx" / "data" / "catalog.json"

FREQ_2W = [(0, "Not at all"), (1, "Several days"), (2, "More than half the days"), (3, "Nearly every day")]
SEVERITY_5 = [(0, "Not present"), (1, "Mild"), (2, "Moderate"), (3, "Severe"), (4, "Very severe")]
BPRS_OPTIONS = [
    (0, "not assessed"), (1, "not present"), (2, "very mild"), (3, "mild"), (4, "moderate"),
    (5, "moderately severe"), (6, "severe"), (7, "extremely severe"),
]
YES_NO = [(0, "No"), (1, "Yes")]
CTQ_OPTIONS = [(1, "Never true"), (2, "Rarely true"), (3, "Sometimes true"), (4, "Often true"), (5, "Very often true")]
DAS_OPTIONS = [
    (1, "Totally agree"), (2, "Agree very much"), (3, "Agree slightly"), (4, "Neutral"),
    (5, "Disagree slightly"), (6, "Disagree very much"), (7, "Totally disagree"),
]
SHAPS_OPTIONS = [(1, "Definitely agree"), (2, "Agree"), (3, "Disagree"), (4, "Definitely disagree")]
NSSI_OPTIONS = [(0, "Never"), (1, "Once"), (2, "2-5 times"), (3, "6-10 times"), (4, "More than 10 times")]
GENERIC_0_4 = [(0, "Absent"), (1, "Slight"), (2, "Mild"), (3, "Moderate"), (4, "Severe")]
GENERIC_0_2 = [(0, "Absent"), (1, "Mild or doubtful"), (2, "Clearly present")]
GENERIC_0_3 = [(0, "Absent"), (1, "Mild"), (2, "Moderate"), (3, "Severe")]
YMRS_0_8 = [(0, "Absent"), (2, "Mild"), (4, "Moderate"), (6, "Marked"), (8, "Severe")]

# Full wording for the items used in granular scale analysis.
SELECTED_TEXT = {
    "hamd_Q1": (
        "depressed mood",
        "DEPRESSED MOOD (sadness, hopeless, helpless, worthless)",
        [
            (0, "Absent."),
            (1, "These feeling states indicated only on questioning."),
            (2, "These feeling states spontaneously reported verbally."),
            (3, "Communicates feeling states non-verbally, i.e. through facial expression, posture, voice and tendency to weep."),
            (4, "Patient reports virtually only these feeling states in his/her spontaneous verbal and non-verbal communication."),
        ],
    ),
    "hamd_Q3": (
        "suicide",
        "SUICIDE",
        [
            (0, "Absent."),
            (1, "Feels life is not worth living."),
            (2, "Wishes he/she were dead or any thoughts of possible death to self."),
            (3, "Ideas or gestures of suicide."),
            (4, "Attempts at suicide (any serious attempt rate 4)."),
        ],
    ),
    "hamd_Q4": (
        "insomnia early in the night",
        "INSOMNIA: EARLY IN THE NIGHT",
        [
            (0, "No difficulty falling asleep."),
            (1, "Complains of occasional difficulty falling asleep, i.e. more than half an hour."),
            (2, "Complaints of nightly difficulty falling asleep."),
        ],
    ),
    "hamd_Q7": (
        "work and activities",
        "Work and Activities",
        [
            (0, "No difficulty"),
            (1, "Thoughts and feelings of incapacity, fatigue, or weakness related to activities, work, or hobbies, only reported when asked"),
            (2, "Spontaneously reports loss of interest in activities, work, or hobbies, either directly or indirectly, such as feeling listless, indecisive, or needing to push themselves to work or engage in activities"),
            (3, "Decrease in actual time spent in activities or decrease in productivity; in a hospital setting, rate 3 if the patient does not spend at least three hours a day in activities, exclusive of ward chores"),
            (4, "Stopped working due to the current illness; in a hospital setting, rate 4 if the patient engages in no activities except ward chores or if the patient fails to perform ward chores unassisted"),
        ],
    ),
    "hamd_Q22": (
        "feelings of inadequacy or reduced ability",
        "Feelings of Inadequacy or Reduced Ability",
        [
            (0, "Absent"),
            (1, "Subjective feelings of inadequacy only elicited on questioning"),
            (2, "Patient spontaneously reports feelings of inadequacy"),
            (3, "Needs encouragement, guidance, and reassurance to complete daily tasks or personal hygiene"),
            (4, "Requires assistance from others for dressing, grooming, eating, making the bed, or personal hygiene"),
        ],
    ),
    "hama_Q4": (
        "insomnia",
        "Insomnia. Difficulty in falling asleep, broken sleep, unsatisfying sleep and fatigue on waking, dreams, nightmares, night terrors.",
        SEVERITY_5,
    ),
    "hama_Q6": (
        "depressed mood",
        "Depressed mood. Loss of interest, lack of pleasure in hobbies, depression, early waking, diurnal swing.",
        SEVERITY_5,
    ),
    "bprs_Q9": (
        "depressive mood",
        "DEPRESSIVE MOOD. Despondency in mood, sadness. Rate only degree of despondency; do not rate on the basis of inferences concerning depression based upon general retardation and somatic complaints.",
        BPRS_OPTIONS,
    ),
    "phq9_Q1": (
        "little interest or pleasure in doing things",
        "Over the last 2 weeks, how often have you been bothered by any of the following problems? Little interest or pleasure in doing things.",
        FREQ_2W,
    ),
    "phq9_Q2": (
        "feeling down, depressed, or hopeless",
        "Over the last 2 weeks, how often have you been bothered by any of the following problems? Feeling down, depressed, or hopeless.",
        FREQ_2W,
    ),
    "phq9_Q4": (
        "feeling tired or having little energy",
        "Over the last 2 weeks, how often have you been bothered by any of the following problems? Feeling tired or having little energy.",
        FREQ_2W,
    ),
    "phq9_Q9": (
        "thoughts of being better off dead or of self-harm",
        "Over the last 2 weeks, how often have you been bothered by any of the following problems? Thoughts that you would be better off dead, or of hurting yourself.",
        FREQ_2W,
    ),
}

PHQ9_NAMES = [
    "little interest or pleasure in doing things",
    "feeling down, depressed, or hopeless",
    "trouble falling or staying asleep, or sleeping too much",
    "feeling tired or having little energy",
    "poor appetite or overeating",
    "feeling bad about yourself",
    "trouble concentrating on things",
    "moving or speaking slowly, or being fidgety or restless",
    "thoughts of being better off dead or of self-harm",
]
GAD7_NAMES = [
    "feeling nervous, anxious, or on edge",
    "not being able to stop or control worrying",
    "worrying too much about different things",
    "trouble relaxing",
    "being so restless that it is hard to sit still",
    "becoming easily annoyed or irritable",
    "feeling afraid as if something awful might happen",
]
HAMD_ITEMS = [
    ("depressed mood", GENERIC_0_4),
    ("feelings of guilt", GENERIC_0_4),
    ("suicide", GENERIC_0_4),
    ("insomnia early in the night", GENERIC_0_2),
    ("insomnia middle of the night", GENERIC_0_2),
    ("insomnia early hours of the morning", GENERIC_0_2),
    ("work and activities", GENERIC_0_4),
    ("retardation", GENERIC_0_4),
    ("agitation", GENERIC_0_4),
    ("psychic anxiety", GENERIC_0_4),
    ("somatic anxiety", GENERIC_0_4),
    ("gastro-intestinal somatic symptoms", GENERIC_0_2),
    ("general somatic symptoms", GENERIC_0_2),
    ("genital symptoms", GENERIC_0_2),
    ("hypochondriasis", GENERIC_0_4),
    ("loss of weight", GENERIC_0_2),
    ("insight", GENERIC_0_2),
    ("diurnal variation", GENERIC_0_2),
    ("depersonalization and derealization", GENERIC_0_4),
    ("paranoid symptoms", GENERIC_0_3),
    ("obsessional and compulsive symptoms", GENERIC_0_2),
    ("feelings of inadequacy or reduced ability", GENERIC_0_4),
    ("hopelessness", GENERIC_0_4),
    ("worthlessness", GENERIC_0_4),
]
HAMA_NAMES = [
    "anxious mood", "tension", "fears", "insomnia", "intellectual (cognitive) difficulties",
    "depressed mood", "somatic complaints: muscular", "somatic complaints: sensory",
    "cardiovascular symptoms", "respiratory symptoms", "gastrointestinal symptoms",
    "genitourinary symptoms", "autonomic symptoms", "behavior at interview",
]
BPRS_NAMES = [
    "somatic concern", "anxiety", "emotional withdrawal", "conceptual disorganization",
    "guilt feelings", "tension", "mannerisms and posturing", "grandiosity", "depressive mood",
    "hostility", "suspiciousness", "hallucinatory behavior", "motor retardation",
    "uncooperativeness", "unusual thought content", "blunted affect", "excitement",
    "disorientation",
]
YMRS_ITEMS = [
    ("elevated mood", GENERIC_0_4),
    ("increased motor activity and energy", GENERIC_0_4),
    ("sexual interest", GENERIC_0_4),
    ("sleep", GENERIC_0_4),
    ("irritability", YMRS_0_8),
    ("speech rate and amount", YMRS_0_8),
    ("language and thought disorder", GENERIC_0_4),
    ("content", YMRS_0_8),
    ("disruptive or aggressive behavior", YMRS_0_8),
    ("appearance", GENERIC_0_4),
    ("insight", GENERIC_0_4),
]
MCCB_TESTS = [
    "TMT-A", "TMT-B", "BACS SC", "HVLT-R.1", "HVLT-R.2", "HVLT-R.3", "WMS-III SS", "NAB Mazes",
    "BVMT-R.1", "BVMT-R.2", "BVMT-R.3", "Fluency", "MSCEIT ME", "CPT-IP.1", "CPT-IP.2", "CPT-IP.3",
]


def question(item_id, summary, options, text=None, no_symptom_max=None):
    if item_id in SELECTED_TEXT:
        summary, text, options = SELECTED_TEXT[item_id]
    scores = [s for s, _ in options]
    return {
        "item_id": item_id,
        "kind": "question",
        "summary": summary,
        "question_text": text or summary[:1].upper() + summary[1:],
        "options": [[s, t] for s, t in options],
        "score_range": [min(scores), max(scores)],
        "no_symptom_max": min(scores) if no_symptom_max is None else no_symptom_max,
    }


def numeric_item(item_id, summary, lo, hi):
    return {
        "item_id": item_id,
        "kind": "question",
        "summary": summary,
        "question_text": summary,
        "options": [],
        "score_range": [lo, hi],
        "no_symptom_max": None,
    }


def total(item_id, text, bands, score_range=None):
    lo = bands[0][0] if score_range is None else score_range[0]
    hi = bands[-1][1] if score_range is None else score_range[1]
    return {
        "item_id": item_id,
        "kind": "total",
        "summary": "total score",
        "question_text": text,
        "options": [],
        "score_range": [lo, hi],
        "bands": [[a, b, t] for a, b, t in bands],
        "no_symptom_max": bands[0][1],
    }


def scale(scale_id, name, full_name, rater, items, auxiliary=False, band_source="published"):
    return {
        "scale_id": scale_id,
        "name": name,
        "full_name": full_name,
        "rater": rater,
        "auxiliary": auxiliary,
        "band_source": band_source,
        "items": items,
    }


def build():
    scales = []
    scales.append(scale(
        "ctq", "CTQ", "Childhood Trauma Questionnaire", "self_reported",
        [question(f"ctq_Q{i}", f"childhood experience item {i}", CTQ_OPTIONS) for i in range(1, 29)],
    ))
    scales.append(scale(
        "das", "DAS", "Dysfunctional Attitude Scale", "self_reported",
        [question(f"das_Q{i}", f"attitude statement {i}", DAS_OPTIONS) for i in range(1, 41)]
        + [total("das_total_score", "The total score of the Dysfunctional Attitude Scale (DAS).", [
            (40, 160, "dysfunctional attitudes within the typical range"),
            (161, 280, "elevated dysfunctional attitudes"),
        ])],
        band_source="conventional",
    ))
    scales.append(scale(
        "gad7", "GAD-7", "Generalized Anxiety Disorder-7", "self_reported",
        [question(f"gad7_Q{i}", n, FREQ_2W) for i, n in enumerate(GAD7_NAMES, 1)]
        + [total("gad7_total_score", "The total score of Generalized Anxiety Disorder-7 (GAD-7).", [
            (0, 4, "no anxiety"), (5, 9, "mild anxiety"), (10, 14, "moderate anxiety"), (15, 21, "severe anxiety"),
        ])],
    ))
    scales.append(scale(
        "hcl32", "HCL-32", "Hypomania Checklist-32", "self_reported",
        [question(f"hcl32_Q{i}", f"hypomanic experience item {i}", YES_NO) for i in range(1, 33)]
        + [total("hcl32_total_score", "The total score of the Hypomania Checklist-32 (HCL-32).", [
            (0, 13, "below the hypomania screening cut-off"),
            (14, 32, "positive hypomania screen"),
        ])],
        band_source="conventional",
    ))
    scales.append(scale(
        "mdq", "MDQ", "Mood Disorder Questionnaire", "self_reported",
        [question(f"mdq_Q{i}", f"manic symptom item {i}", YES_NO) for i in range(1, 14)]
        + [total("mdq_total_score", "The total score of the Mood Disorder Questionnaire (MDQ).", [
            (0, 6, "negative bipolar spectrum screen"),
            (7, 13, "positive bipolar spectrum screen"),
        ])],
        band_source="conventional",
    ))
    # Open-ended items make a total score impossible for this scale.
    scales.append(scale(
        "nssi", "NSSI", "Non-Suicidal Self-Injury Assessment", "self_reported",
        [question(f"nssi_Q{i}", f"self-injury item {i}", NSSI_OPTIONS) for i in range(1, 19)],
        band_source="none",
    ))
    scales.append(scale(
        "phq9", "PHQ-9", "Patient Health Questionnaire-9", "self_reported",
        [question(f"phq9_Q{i}", n, FREQ_2W) for i, n in enumerate(PHQ9_NAMES, 1)]
        + [total("phq9_total_score", "The total score of Patient Health Questionnaire-9 (PHQ-9).", [
            (0, 4, "minimal depression"), (5, 9, "mild depression"), (10, 14, "moderate depression"),
            (15, 19, "moderately severe depression"), (20, 27, "severe depression"),
        ])],
    ))
    scales.append(scale(
        "shaps", "SHAPS", "Snaith-Hamilton Pleasure Scale", "self_reported",
        [question(f"shaps_Q{i}", f"pleasure item {i}", SHAPS_OPTIONS) for i in range(1, 15)]
        + [total("shaps_total_score", "The total score of the Snaith-Hamilton Pleasure Scale (SHAPS).", [
            (14, 25, "normal hedonic capacity"),
            (26, 56, "anhedonia indicated"),
        ])],
        band_source="conventional",
    ))
    scales.append(scale(
        "bprs", "BPRS", "Brief Psychiatric Rating Scale", "clinician",
        [question(f"bprs_Q{i}", n, BPRS_OPTIONS, no_symptom_max=1) for i, n in enumerate(BPRS_NAMES, 1)]
        + [total("bprs_total_score", "The total score of the Brief Psychiatric Rating Scale (BPRS).", [
            (0, 30, "not ill or minimally ill"), (31, 40, "mildly ill"), (41, 52, "moderately ill"),
            (53, 126, "markedly ill"),
        ])],
        band_source="conventional",
    ))
    scales.append(scale(
        "hama", "HAMA", "Hamilton Anxiety Rating Scale", "clinician",
        [question(f"hama_Q{i}", n, SEVERITY_5) for i, n in enumerate(HAMA_NAMES, 1)]
        + [total("hama_total_score", "The total score of Hamilton Anxiety Rating Scale (HAM-A).", [
            (0, 6, "no anxiety"), (7, 13, "may have anxiety"), (14, 20, "must have anxiety"),
            (21, 28, "must have obvious anxiety"), (29, 56, "severe anxiety"),
        ])],
    ))
    scales.append(scale(
        "hamd", "HAMD", "Hamilton Depression Rating Scale (24 items)", "clinician",
        [question(f"hamd_Q{i}", n, opts) for i, (n, opts) in enumerate(HAMD_ITEMS, 1)]
        + [total("hamd_total_score", "The total score of Hamilton Depression Rating Scale (HAMD).", [
            (0, 6, "no depression"), (7, 16, "may have depression"), (17, 23, "must have depression"),
            (24, 76, "severe depression"),
        ])],
    ))
    scales.append(scale(
        "mccb", "MCCB", "MATRICS Consensus Cognitive Battery", "clinician",
        [numeric_item(t, f"{t} test score", 0, 100) for t in MCCB_TESTS],
        band_source="none",
    ))
    scales.append(scale(
        "ymrs", "YMRS", "Young Mania Rating Scale", "clinician",
        [question(f"ymrs_Q{i}", n, opts) for i, (n, opts) in enumerate(YMRS_ITEMS, 1)]
        + [total("ymrs_total_score", "The total score of the Young Mania Rating Scale (YMRS).", [
            (0, 12, "no or minimal manic symptoms"), (13, 19, "mild mania"), (20, 25, "moderate mania"),
            (26, 60, "severe mania"),
        ])],
        band_source="conventional",
    ))
    # Totals carried by the synthetic tabular schema but outside the item-level analysis.
    scales.append(scale(
        "psqi", "PSQI", "Pittsburgh Sleep Quality Index", "self_reported",
        [total("psqi_total_score", "The total score of the Pittsburgh Sleep Quality Index (PSQI).", [
            (0, 5, "good sleep quality"), (6, 21, "poor sleep quality"),
        ])],
        auxiliary=True, band_source="conventional",
    ))
    scales.append(scale(
        "ssrs", "SSRS", "Social Support Rating Scale", "self_reported",
        [total("ssrs_total_score", "The total score of the Social Support Rating Scale (SSRS).", [
            (12, 22, "low social support"), (23, 44, "moderate social support"), (45, 66, "high social support"),
        ])],
        auxiliary=True, band_source="conventional",
    ))
    return {"version": 1, "scales": scales}


if __name__ == "__main__":
    OUT.write_text(json.dumps(build(), indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")
