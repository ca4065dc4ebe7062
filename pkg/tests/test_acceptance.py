"""Acceptance criteria, one test per criterion.

Each test carries a ``criterion`` marker; conftest prints a PASS/FAIL/SKIP
line per criterion at the end of the session.
"""

from __future__ import annotations

import json
import math
import os
import random
import time

import numpy as np
import pandas as pd
import pytest

from mooddx.agents import run_angel, validate_action_dict
from mooddx.corpus import LabeledPrediction
from mooddx.diag_eval import evaluate_run, metrics
from mooddx.knowledge_base import default_kb, load_kb
from mooddx.moodsyn import ColumnSpec, Constraint, FeatureSchema, default_schema, fit, postprocess, sample, validate, write_table
from mooddx.providers import HashingEmbedder
from mooddx.retrieval import (
    NumericScaleEmbedder,
    brute_force_top_k,
    build_kb_index,
    build_record_store,
    build_scale_store,
    embed,
    normalize,
)
from mooddx.scales import default_correlations, default_selected_items, default_selection_config, select_items
from mooddx.scripted import ScriptedPolicy
from mooddx.syn_eval import coverage, dcr, density, detection, mle, shape_score, trend_score

PUBLISHED_GROUPS = {
    "depression": {"hamd_total_score", "hama_Q6", "bprs_Q9", "hamd_Q1", "phq9_total_score", "phq9_Q2"},
    "suicide": {"hamd_Q3", "phq9_Q9"},
    "energy_interest": {"hamd_Q7", "hamd_Q22", "phq9_Q4", "phq9_Q1"},
    "anxiety": {"hama_total_score", "gad7_total_score"},
    "insomnia": {"hamd_Q4", "hama_Q4"},
}


@pytest.mark.criterion(1, "item selection reproduces the 16 published items, 5 groups, threshold 0.5032, < 1 s")
def test_criterion_1_item_selection():
    start = time.perf_counter()
    cfg = default_selection_config()
    sel = select_items(default_correlations(), 0.05, ("phq9_Q1", "phq9_Q2"), cfg.groups, population_size=cfg.population_size)
    elapsed = time.perf_counter() - start
    assert {g: set(v) for g, v in sel.by_group().items() if v} == PUBLISHED_GROUPS
    assert len(sel.items) == 16
    assert round(sel.threshold, 4) == 0.5032
    assert elapsed < 1.0


@pytest.mark.criterion(2, "density(0.79, 0.93) = 0.8543 +/- 0.0005")
def test_criterion_2_density():
    assert abs(density(0.79, 0.93) - 0.8543) <= 0.0005


def _brute_force(pred, gold):
    n = len(pred)
    tp = sum(1 for p, g in zip(pred, gold) if p and g)
    tn = sum(1 for p, g in zip(pred, gold) if not p and not g)
    fp = sum(1 for p, g in zip(pred, gold) if p and not g)
    fn = n - tp - tn - fp
    rec = tp / (tp + fn) if tp + fn else 0.0
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = (tp * tn - fp * fn) / math.sqrt(den) if den else 0.0
    f1p = 2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 0.0
    f1n = 2 * tn / (2 * tn + fp + fn) if tn + fp + fn else 0.0
    return rec, (tp + tn) / n, mcc, (f1p + f1n) / 2


def _dcr_double_loop(syn, train, test, schema):
    ref = pd.concat([train, test])[schema.features].to_numpy(float)
    lo, hi = ref.min(axis=0), ref.max(axis=0)
    span = [h - l if h != l else 1.0 for l, h in zip(lo, hi)]

    def enc(row):
        return [(v - l) / s for v, l, s in zip(row[:-1], lo, span)] + [float(row[-1] == 0), float(row[-1] == 1)]

    def nearest(p, rows):
        best = math.inf
        for r in rows:
            d = 0.0
            for a, b in zip(p, r):
                d += abs(a - b)
            best = min(best, d)
        return best

    tr = [enc(r) for r in train.to_numpy(float).tolist()]
    te = [enc(r) for r in test.to_numpy(float).tolist()]
    total = 0.0
    for row in syn.to_numpy(float).tolist():
        p = enc(row)
        a, b = nearest(p, tr), nearest(p, te)
        total += 1.0 if a < b else 0.5 if a == b else 0.0
    return total / len(syn)


@pytest.mark.criterion(3, "metrics match brute force on 1000 sets to 1e-12; DCR matches a double loop on instances <= 200 rows")
def test_criterion_3_metric_oracles(moodsyn_real):
    rng = random.Random(3)
    for _ in range(1000):
        n = rng.randint(1, 80)
        pred = [rng.random() < 0.5 for _ in range(n)]
        gold = [rng.random() < rng.random() for _ in range(n)]
        m = metrics([LabeledPrediction(str(i), p, g) for i, (p, g) in enumerate(zip(pred, gold))])
        for got, want in zip((m.recall, m.accuracy, m.mcc, m.macro_f1), _brute_force(pred, gold)):
            assert abs(got - want) <= 1e-12

    tiny = FeatureSchema(
        (ColumnSpec("q", 0, 3), ColumnSpec("tot", 0, 9), ColumnSpec("Mood Disorder", 0, 1)),
        (Constraint("s", ("q",), "tot"),),
    )
    nrng = np.random.default_rng(3)
    for _ in range(25):
        sizes = nrng.integers(1, 201, size=3)
        parts = []
        for n in sizes:
            q = nrng.integers(0, 4, n)
            parts.append(pd.DataFrame({"q": q, "tot": q + nrng.integers(0, 6, n), "Mood Disorder": nrng.integers(0, 2, n)}))
        assert dcr(*parts, tiny) == _dcr_double_loop(*parts, tiny)
    real = moodsyn_real
    parts = (real.iloc[:200], real.iloc[200:400], real.iloc[400:600])
    assert dcr(*parts) == _dcr_double_loop(*parts, default_schema())


@pytest.mark.criterion(4, "syn = real: shape = trend = coverage = density = 1.0, detection in [0.43, 0.57] over 20 seeds")
def test_criterion_4_self_evaluation(moodsyn_real):
    real = moodsyn_real
    assert len(real) >= 500
    sh, tr, cov = shape_score(real, real), trend_score(real, real), coverage(real, real)
    assert sh.mean == tr.mean == cov.mean == 1.0
    assert density(sh.mean, tr.mean) == 1.0
    aucs = [detection(real, real, seed=s) for s in range(20)]
    assert all(0.43 <= a <= 0.57 for a in aucs), aucs


@pytest.mark.criterion(5, "10,000 synthesized rows: zero violations, label ratio within 5% of fit, seeded output byte-identical")
def test_criterion_5_synthesizer_contract(moodsyn_real, tmp_path):
    model = fit(moodsyn_real)
    table = postprocess(sample(model, 10_000, seed=5)).table
    assert validate(table) == []
    ratio = table["Mood Disorder"].mean()
    assert abs(ratio - model.priors[1]) <= 0.05 * model.priors[1]
    write_table(table, tmp_path / "a.csv")
    write_table(postprocess(sample(fit(moodsyn_real), 10_000, seed=5)).table, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def _check_store(store, queries):
    for q in queries:
        hits = store.search(q, 5)
        oracle = brute_force_top_k(store, q.vector, 5)
        assert [h.target_id for h in hits] == [i for i, _ in oracle]
        assert all(abs(h.score - s) <= 1e-12 for h, (_, s) in zip(hits, oracle))


@pytest.mark.criterion(6, "top-5 retrieval equals an exhaustive scan on every fixture store; self-query scores 1.0")
def test_criterion_6_retrieval_exactness(history200, fixtures_dir):
    emb = HashingEmbedder()
    sel = default_selected_items()
    stores = [build_kb_index(default_kb(), emb), build_kb_index(load_kb(fixtures_dir / "kb30.json"), emb)]
    stores += [build_record_store(history200, emb, fmt) for fmt in ("structured", "unstructured")]
    stores += [build_scale_store(history200, e, sel) for e in (emb, NumericScaleEmbedder(sel))]
    free_text = [embed(t, emb) for t in ("persistent low mood and early waking", "racing thoughts, little sleep",
                                         "hears voices at night", "worry and palpitations")]
    for store in stores:
        self_queries = [normalize(row) for row in store.matrix]
        queries = self_queries + (free_text if store.dim == emb.dim else [])
        for q in queries:
            hits = store.search(q, 5)
            oracle = brute_force_top_k(store, q.vector, 5)
            assert [h.target_id for h in hits] == [i for i, _ in oracle]
            assert all(abs(h.score - s) <= 1e-12 for h, (_, s) in zip(hits, oracle))
        for q in self_queries:
            assert abs(store.search(q, 1)[0].score - 1.0) <= 1e-6


def _roles(provider):
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


@pytest.mark.criterion(7, "scripted Angels and Multi-Angels run the 20 cases deterministically with schema-valid transcripts and a debate")
def test_criterion_7_agent_protocol(cases20, resources, script20, tmp_path):
    for method in ("angel_r", "angel_d", "angel_c", "multi"):
        runs = []
        for name in ("a", "b"):
            out = tmp_path / method / name
            rep = evaluate_run(method, cases20, resources, ScriptedPolicy(script20).provider(),
                               transcript_dir=out / "transcripts", debate_dir=out / "debates")
            assert rep.failures == []
            runs.append(rep.to_json())
        assert runs[0] == runs[1]
        a, b = tmp_path / method / "a", tmp_path / method / "b"
        for f in sorted(a.rglob("*.json")):
            assert f.read_bytes() == (b / f.relative_to(a)).read_bytes()
        for f in sorted((a / "transcripts").glob("*.json")):
            record = json.loads(f.read_text())
            steps = list(record["transcript"])
            if method == "multi":
                steps = []
                debate = json.loads((a / "debates" / f.name).read_text())
                for angel in debate["angel_inputs"]:
                    steps += angel["diagnosis"]["transcript"]
            for step in steps:
                validate_action_dict(step["action"])

    # R refuses display actions: the scripted second case tries one first
    case = cases20[1]
    d = run_angel("R", case, resources, ScriptedPolicy(script20).provider())
    assert d.transcript[0]["action"]["action"]["name"] == "previous_cases_display"
    assert d.transcript[0]["status"] == "rejected"

    # the first fixture case is a forced 2-vs-1 split
    from mooddx.debate import multi_angels

    provider = ScriptedPolicy(script20).provider()
    t = multi_angels(cases20[0], resources, provider)
    assert not t.consensus and len(t.rounds) >= 1
    roles = _roles(provider)
    assert roles[:3] == ["positive", "negative", "judge"]
    assert roles == ["positive", "negative", "judge"] * len(t.rounds)
    assert t.final.method == "multi" and t.rounds[-1].judge


@pytest.mark.criterion(8, "live provider smoke run on the 140-case split emits the full metric report (needs MOODDX_API_BASE)")
def test_criterion_8_live_smoke(fixtures_dir, tmp_path):
    if not os.environ.get("MOODDX_API_BASE"):
        pytest.skip("MOODDX_API_BASE not set; live smoke run not attempted")
    from mooddx.cli import main

    method = os.environ.get("MOODDX_SMOKE_METHOD", "angel_r")
    runs = tmp_path / "runs"
    rc = main(["diagnose", "--method", method, "--provider", "http", "--cases", str(fixtures_dir / "moodsyn_test.csv"),
               "--format", "csv", "--runs-dir", str(runs), "--cache-dir", str(tmp_path / "cache"), "--jobs", "4"])
    assert rc == 0
    (run_dir,) = [p for p in runs.iterdir() if p.is_dir()]
    report = json.loads((run_dir / "report.json").read_text())
    m = report["reports"][0]["metrics"]
    assert set(m) >= {"recall", "accuracy", "mcc", "macro_f1"}
    assert report["reports"][0]["metadata"]["n_cases"] == 140


TOY = FeatureSchema(
    tuple(ColumnSpec(f"x{j}", -20.0, 20.0, integer=False) for j in range(4)) + (ColumnSpec("Mood Disorder", 0, 1),),
    (),
)


def _separable(rng, n):
    y = rng.integers(0, 2, size=n)
    x = rng.normal(size=(n, 4)) + 3.0 * y[:, None]
    return pd.DataFrame({**{f"x{j}": x[:, j] for j in range(4)}, "Mood Disorder": y})


@pytest.mark.criterion(9, "MLE on a separable toy reaches AUROC >= 0.95; majority classifier accuracy is exact; < 30 s")
def test_criterion_9_mle_sanity():
    start = time.perf_counter()
    rng = np.random.default_rng(9)
    real_train, real_test = _separable(rng, 600), _separable(rng, 300)
    syn = postprocess(sample(fit(real_train, TOY), 600, seed=9), TOY).table
    assert validate(syn, TOY) == []
    assert mle(syn, real_test)["auroc"] >= 0.95
    train = pd.DataFrame({"x0": np.arange(12.0), "Mood Disorder": [0] * 7 + [1] * 5})
    test = pd.DataFrame({"x0": np.arange(8.0), "Mood Disorder": [0] * 3 + [1] * 5})
    # the training majority is 0, so exactly the 3 negatives are right
    assert mle(train, test, classifier="majority")["accuracy"] == 3 / 8
    assert time.perf_counter() - start < 30.0
