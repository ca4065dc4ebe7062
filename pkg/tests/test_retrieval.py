from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mooddx.corpus import CaseRecord
from mooddx.knowledge_base import KnowledgeBase, default_kb
from mooddx.providers import HashingEmbedder
from mooddx.records import record_text
from mooddx.retrieval import (
    DIFFERENTIAL_NOTE,
    Embedding,
    NumericScaleEmbedder,
    RetrievalError,
    VectorStore,
    audit_disjoint,
    brute_force_top_k,
    build_kb_index,
    build_record_store,
    build_scale_store,
    embed,
    match_symptoms,
    normalize,
    retrieve_similar_records,
    retrieve_similar_scales,
)
from mooddx.scales import default_selected_items, render_performance
from mooddx.scripted import ScriptedPolicy

EMB = HashingEmbedder()


def test_self_similarity_and_hand_computed_values():
    e = embed("low mood and poor sleep", EMB)
    assert float(e.vector @ e.vector) == pytest.approx(1.0, abs=1e-6)
    assert float(embed("alpha beta", EMB).vector @ embed("gamma delta", EMB).vector) == pytest.approx(0.0, abs=1e-12)
    # (1,1,0)/sqrt2 . (1,0,1)/sqrt2 = 1/2
    assert float(embed("a b", EMB).vector @ embed("a c", EMB).vector) == pytest.approx(0.5, abs=1e-12)


def test_embedding_invariants():
    with pytest.raises(RetrievalError):
        normalize(np.zeros(4))
    with pytest.raises((RetrievalError, ValueError)):
        Embedding(np.array([1.0, 1.0]), 1.0)
    with pytest.raises(RetrievalError):
        embed("", EMB)


@settings(max_examples=50, deadline=None)
@given(st.text(min_size=1, max_size=40).filter(lambda t: any(c.isalnum() for c in t)),
       st.text(min_size=1, max_size=40).filter(lambda t: any(c.isalnum() for c in t)))
def test_score_symmetry(a, b):
    ea, eb = embed(a, EMB), embed(b, EMB)
    assert abs(float(ea.vector @ eb.vector) - float(eb.vector @ ea.vector)) <= 1e-12
    assert -1 - 1e-12 <= float(ea.vector @ eb.vector) <= 1 + 1e-12


def test_identity_retrieval_on_kb():
    kb = default_kb()
    entry = kb.entries[7]
    match = match_symptoms(entry.text, kb, EMB, k=5)
    assert match.hits[0].target_id == entry.entry_id
    assert match.hits[0].score == pytest.approx(1.0, abs=1e-6)


def test_small_kb_returns_fewer_hits_without_padding():
    kb = KnowledgeBase(default_kb().entries[:3])
    assert len(match_symptoms("low mood", kb, EMB, k=5).hits) == 3


def test_kb_top5_matches_exhaustive_oracle():
    kb = default_kb()
    index = build_kb_index(kb, EMB)
    assert len(index) == 50
    for query in ("persistent low mood, loss of interest, early waking",
                  "hears voices and believes neighbours are watching",
                  "elevated mood, racing thoughts and less need for sleep"):
        q = embed(query, EMB)
        hits = index.search(q, 5)
        oracle = brute_force_top_k(index, q.vector, 5)
        assert [h.target_id for h in hits] == [i for i, _ in oracle]
        assert all(abs(h.score - s) <= 1e-12 for h, (_, s) in zip(hits, oracle))


def test_differential_flag_and_note():
    match = match_symptoms("low mood; hears voices; repeated hand washing; worry", default_kb(), EMB, k=5)
    assert match.differential == (len(set(match.classes())) > 1)
    assert (DIFFERENTIAL_NOTE in match.render()) == match.differential


def test_empty_record_text_errors():
    with pytest.raises(RetrievalError):
        match_symptoms("   ", default_kb(), EMB)


def test_record_store_oracle_and_identity(history200):
    store = build_record_store(history200, EMB)
    assert len(store) == sum(c.has_record for c in history200)
    for case in [c for c in history200 if c.has_record][:25]:
        q = embed(record_text(case), EMB)
        hits = store.search(q, 5)
        oracle = brute_force_top_k(store, q.vector, 5)
        assert [h.target_id for h in hits] == [i for i, _ in oracle]
        assert all(abs(h.score - s) <= 1e-12 for h, (_, s) in zip(hits, oracle))
        assert hits[0].target_id == case.case_id
        assert hits[0].score == pytest.approx(1.0, abs=1e-6)


def test_scale_store_text_and_numeric(history200):
    sel = default_selected_items()
    for emb in (EMB, NumericScaleEmbedder(sel)):
        store = build_scale_store(history200, emb, sel)
        assert len(store) == 200
        case = history200[3]
        r = retrieve_similar_scales(case, store, emb, sel, k=5)
        assert r.hits[0].score == pytest.approx(1.0, abs=1e-6)
        assert case.case_id in r.hit_ids or r.hits[0].score == pytest.approx(1.0, abs=1e-6)
    # text mode embeds the rendered description
    text_store = build_scale_store(history200[:5], EMB, sel)
    assert text_store.payloads[0]["text"] == render_performance(history200[0], sel)


def test_ties_break_by_insertion_order():
    store = VectorStore("t", 2)
    for tid in ("c", "a", "b"):
        store.add(tid, np.array([1.0, 0.0]))
    hits = store.search(normalize(np.array([1.0, 0.0])), 3)
    assert [h.target_id for h in hits] == ["c", "a", "b"]


def test_store_save_load_round_trip(tmp_path, history200):
    store = build_record_store(history200[:40], EMB)
    path = tmp_path / "s.jsonl"
    store.save(path)
    back = VectorStore.load(path, EMB.embedder_id)
    assert back.ids == store.ids and back.payloads == store.payloads
    assert np.array_equal(back.matrix, store.matrix)
    with pytest.raises(RetrievalError):
        VectorStore.load(path, "other-embedder")


def test_mixed_embedder_entries_are_a_load_error(tmp_path, history200):
    store = build_record_store(history200[:5], EMB)
    path = tmp_path / "s.jsonl"
    store.save(path)
    lines = path.read_text().splitlines()
    lines[2] = lines[2].replace('"embedder_id": "hashing-8192"', '"embedder_id": "other"')
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(RetrievalError, match="other"):
        VectorStore.load(path)


def test_no_record_is_a_structured_result():
    store = VectorStore(EMB.embedder_id, EMB.dim)
    r = retrieve_similar_records(CaseRecord("x", {"phq9_Q1": 1}), store, EMB)
    assert r.no_record and r.hits == ()


def test_analysis_mode_references_retrieved_ids(history200, cases20):
    store = build_record_store(history200, EMB)
    provider = ScriptedPolicy().provider()
    case = next(c for c in cases20 if c.has_record)
    r = retrieve_similar_records(case, store, EMB, 5, "analysis", provider)
    assert any(h in r.text.split("\n", 1)[1] for h in r.hit_ids)
    shown = retrieve_similar_records(case, store, EMB, 5, "display")
    assert all(f"Case {h}" in shown.text for h in shown.hit_ids)
    assert "diagnosis:" in shown.text


def test_audit_disjoint(history200, cases20):
    store = build_record_store(history200, EMB)
    audit_disjoint(store, [c.case_id for c in cases20])
    with pytest.raises(RetrievalError):
        audit_disjoint(store, [store.ids[0]])


def test_near_ties_rank_by_insertion_order():
    store = VectorStore("t", 2)
    store.add("first", np.array([1.0, 3e-8]))  # score 1 - 4.5e-16
    store.add("second", np.array([1.0, 0.0]))
    hits = store.search(normalize(np.array([1.0, 0.0])), 2)
    # the scores differ only below the ranking grid, so insertion order decides
    assert [h.target_id for h in hits] == ["first", "second"]
    assert [i for i, _ in brute_force_top_k(store, np.array([1.0, 0.0]), 2)] == ["first", "second"]
