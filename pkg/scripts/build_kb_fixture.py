"""Regenerate the bundled fixture knowledge base (paraphrased, non-verbatim criteria)."""

from __future__ import annotations

from pathlib import Path

from mooddx.knowledge_base import CriterionEntry, KnowledgeBase

NOTE = "fixture paraphrase"

DIAGNOSTIC = [
    ("Manic episode", "Manic episode: Elevated, expansive, or irritable mood with abnormally increased activity or energy, lasting at least 1 week and present most of the day nearly every day."),
    ("Manic episode", "Manic episode: Inflated self-esteem or grandiosity during a period of elevated mood."),
    ("Manic episode", "Manic episode: Decreased need for sleep, for example feeling rested after only a few hours of sleep, during a period of elevated mood."),
    ("Manic episode", "Manic episode: More talkative than usual or pressure to keep talking, with racing thoughts or flight of ideas."),
    ("Manic episode", "Manic episode: Distractibility and increased goal-directed activity or psychomotor agitation."),
    ("Manic episode", "Manic episode: Excessive involvement in risky activities such as unrestrained spending sprees or sexual indiscretions."),
    ("Hypomanic episode", "Hypomanic episode: Elevated or irritable mood with increased energy lasting at least 4 consecutive days, noticeable to others but not severe enough to cause marked impairment."),
    ("Cyclothymic disorder", "Cyclothymic disorder: For at least 2 years in adults (1 year in children and adolescents), numerous periods of hypomanic and depressive symptoms that do not meet full episode criteria."),
    ("Major depressive episode", "Major depressive episode: Depressed mood most of the day, nearly every day, for at least 2 weeks, reported as sadness, emptiness, or hopelessness, or observed as tearfulness."),
    ("Major depressive episode", "Major depressive episode: Markedly diminished interest or pleasure in all or almost all activities most of the day, nearly every day."),
    ("Major depressive episode", "Major depressive episode: Significant weight loss or gain, or a decrease or increase in appetite nearly every day."),
    ("Major depressive episode", "Major depressive episode: Insomnia or hypersomnia nearly every day during a period of low mood."),
    ("Major depressive episode", "Major depressive episode: Fatigue or loss of energy nearly every day."),
    ("Major depressive episode", "Major depressive episode: Feelings of worthlessness or excessive or inappropriate guilt nearly every day."),
    ("Major depressive episode", "Major depressive episode: Diminished ability to think or concentrate, or indecisiveness, nearly every day."),
    ("Major depressive episode", "Major depressive episode: Recurrent thoughts of death, recurrent suicidal ideation, a suicide attempt, or a specific plan for committing suicide."),
    ("Persistent depressive disorder", "Persistent depressive disorder: Depressed mood for most of the day, on more days than not, for at least 2 years in adults or 1 year in children and adolescents."),
    ("Disruptive mood dysregulation disorder", "Disruptive mood dysregulation disorder: Severe recurrent temper outbursts with persistently irritable or angry mood between outbursts, with onset before 10 years of age."),
    ("Generalized anxiety disorder", "Generalized anxiety disorder: Excessive anxiety and worry about a number of events or activities, occurring more days than not for at least 6 months, and difficult to control."),
    ("Generalized anxiety disorder", "Generalized anxiety disorder: Worry associated with restlessness, being easily fatigued, muscle tension, irritability, or sleep disturbance."),
    ("Panic disorder", "Panic disorder: Recurrent unexpected abrupt surges of intense fear with palpitations, sweating, trembling, shortness of breath, or fear of dying."),
    ("Social anxiety disorder", "Social anxiety disorder: Marked fear or anxiety about social situations in which the individual may be scrutinized by others."),
    ("Schizophrenia", "Schizophrenia: Two or more of delusions, hallucinations, disorganized speech, grossly disorganized or catatonic behavior, or negative symptoms, each present for a significant portion of a 1-month period."),
    ("Schizophrenia", "Schizophrenia: Continuous signs of the disturbance persisting for at least 6 months with marked decline in work, interpersonal relations, or self-care."),
    ("Delusional disorder", "Delusional disorder: One or more delusions with a duration of 1 month or longer, without other marked psychotic symptoms."),
    ("Obsessive-compulsive disorder", "Obsessive-compulsive disorder: Recurrent intrusive unwanted thoughts, urges, or images that cause marked anxiety, which the person tries to suppress or neutralize."),
    ("Obsessive-compulsive disorder", "Obsessive-compulsive disorder: Repetitive behaviors such as hand washing, checking, or counting that the person feels driven to perform in response to an obsession."),
    ("Posttraumatic stress disorder", "Posttraumatic stress disorder: Exposure to actual or threatened death, serious injury, or sexual violence followed by intrusive memories, nightmares, or flashbacks of the event."),
    ("Adjustment disorder", "Adjustment disorder: Emotional or behavioral symptoms developing within 3 months of an identifiable stressor, out of proportion to the stressor."),
    ("Depersonalization/derealization disorder", "Depersonalization/derealization disorder: Persistent experiences of unreality or detachment from one's mind, body, or surroundings with intact reality testing."),
    ("Somatic symptom disorder", "Somatic symptom disorder: One or more distressing somatic symptoms with excessive thoughts, feelings, or behaviors related to them, persisting typically more than 6 months."),
    ("Anorexia nervosa", "Anorexia nervosa: Restriction of energy intake leading to significantly low body weight, with intense fear of gaining weight."),
    ("Bulimia nervosa", "Bulimia nervosa: Recurrent binge eating with recurrent inappropriate compensatory behaviors such as self-induced vomiting."),
    ("Enuresis", "Enuresis: Repeated voiding of urine into bed or clothes at least twice a week for 3 months in a child at least 5 years of age."),
    ("Insomnia disorder", "Insomnia disorder: Dissatisfaction with sleep quantity or quality with difficulty initiating or maintaining sleep or early-morning awakening, at least 3 nights per week for at least 3 months."),
    ("Narcolepsy", "Narcolepsy: Recurrent periods of an irrepressible need to sleep or lapsing into sleep within the same day."),
    ("Erectile disorder", "Erectile disorder: Marked difficulty obtaining or maintaining an erection during sexual activity on almost all occasions for at least 6 months."),
    ("Gender dysphoria", "Gender dysphoria: A marked incongruence between experienced or expressed gender and assigned gender lasting at least 6 months."),
    ("Conduct disorder", "Conduct disorder: A repetitive and persistent pattern of behavior violating the basic rights of others or major age-appropriate societal norms."),
    ("Intermittent explosive disorder", "Intermittent explosive disorder: Recurrent behavioral outbursts of verbal or physical aggression grossly out of proportion to provocation."),
    ("Alcohol use disorder", "Alcohol use disorder: A problematic pattern of alcohol use with craving, tolerance, withdrawal, or failed efforts to cut down, within a 12-month period."),
    ("Major neurocognitive disorder", "Major neurocognitive disorder: Significant cognitive decline from a previous level in memory, attention, language, or executive function that interferes with independence."),
    ("Borderline personality disorder", "Borderline personality disorder: A pervasive pattern of unstable relationships, self-image, and affect, with marked impulsivity and recurrent self-harming behavior, beginning by early adulthood."),
    ("Attention-deficit/hyperactivity disorder", "Attention-deficit/hyperactivity disorder: A persistent pattern of inattention or hyperactivity-impulsivity with several symptoms present before age 12."),
    ("Autism spectrum disorder", "Autism spectrum disorder: Persistent deficits in social communication and interaction with restricted, repetitive patterns of behavior, present from the early developmental period."),
]

DIFFERENTIAL = [
    ("Attention-deficit/hyperactivity disorder", "Attention-deficit/hyperactivity disorder: Rapid speech, racing thoughts, distractibility, and less need for sleep that are persistent rather than episodic, in adolescents and children."),
    ("Bipolar I disorder", "Bipolar I disorder: Rapid speech, racing thoughts, distractibility, and less need for sleep occurring as a clear episodic change from baseline, in adults."),
    ("Major depressive disorder", "Major depressive disorder: Sadness with loss of interest or pleasure and no history of manic or hypomanic episodes."),
    ("Bipolar II disorder", "Bipolar II disorder: Depressive episodes together with at least one past hypomanic episode of elevated or irritable mood."),
    ("Generalized anxiety disorder", "Generalized anxiety disorder: Worry and tension without pervasive low mood or loss of pleasure."),
]


def build() -> KnowledgeBase:
    entries = [CriterionEntry.create(n, "diagnostic", t, source_note=NOTE) for n, t in DIAGNOSTIC]
    entries += [CriterionEntry.create(n, "differential", t, source_note=NOTE) for n, t in DIFFERENTIAL]
    return KnowledgeBase(entries)


if __name__ == "__main__":
    root = Path(__file__).resolve().parents[1]
    kb = build()
    kb.save(root / "src" / "mooddx" / "data" / "kb_fixture.json")
    print(len(kb), dict(kb.class_counts()))
