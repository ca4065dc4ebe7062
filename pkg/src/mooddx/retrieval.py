"""Dense similarity search over criteria and historical cases.

All search is an exhaustive inner-product scan over unit vectors. Equal
scores keep store insertion order.
"""

from __future__ import annotations

import base64
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .corpus import CaseRecord
from .knowledge_base import KnowledgeBase
from .prompts import render
from .providers import ChatProvider, Embedder
from .records import record_text
from .scales import ScaleCatalog, SelectedItemSet, default_catalog, render_performance

log = logging.getLogger(__name__)

STORE_FORMAT = "mooddx-vectorstore"
# Ranking grid: scores equal up to summation-order noise rank as ties, then by insertion order.
RANK_SCALE = 2.0 ** 40
DIAGNOSIS_TEXT = {
    "mood_disorder": "mood disorder",
    "other_disease": "other mental disorder (not a mood disorder)",
    "normal": "no mental disorder diagnosed",
    None: "unknown",
}
DIFFERENTIAL_NOTE = (
    "The matched criteria belong to more than one disorder class; "
    "consider a differential diagnosis between these classes."
)


class RetrievalError(ValueError):
    pass


@dataclass(frozen=True)
class Embedding:
    vector: np.ndarray
    norm: float

    def __post_init__(self):
        if abs(float(np.linalg.norm(self.vector)) - 1.0) > 1e-6:
            raise RetrievalError("embedding vector is not unit norm")


def normalize(vec: np.ndarray) -> Embedding:
    vec = np.asarray(vec, dtype=np.float64)
    n = float(np.linalg.norm(vec))
    if not np.isfinite(n) or n == 0.0:
        raise RetrievalError("cannot normalise a zero or non-finite vector")
    return Embedding(vec / n, n)


def embed(text: str, embedder: Embedder) -> Embedding:
    if not text or not text.strip():
        raise RetrievalError("cannot embed empty text")
    return normalize(embedder.embed_raw(text))


@dataclass(frozen=True)
class RetrievalHit:
    target_id: str
    score: float
    payload: dict = field(default_factory=dict)


def _encode(vec: np.ndarray) -> str:
    return base64.b64encode(np.asarray(vec, dtype="<f8").tobytes()).decode("ascii")


def _decode(s: str) -> np.ndarray:
    return np.frombuffer(base64.b64decode(s), dtype="<f8").astype(np.float64)


class VectorStore:
    """Unit vectors with ids and payloads, searched exhaustively."""

    def __init__(self, embedder_id: str, dim: int):
        self.embedder_id = embedder_id
        self.dim = dim
        self.ids: list[str] = []
        self.payloads: list[dict] = []
        self._rows: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.ids)

    def add(self, target_id: str, vector: np.ndarray | Embedding, payload: dict | None = None) -> None:
        vec = vector.vector if isinstance(vector, Embedding) else normalize(vector).vector
        if vec.shape != (self.dim,):
            raise RetrievalError(f"vector dimension {vec.shape} does not match store dimension {self.dim}")
        if target_id in self._index():
            raise RetrievalError(f"duplicate id {target_id!r} in store")
        self.ids.append(target_id)
        self.payloads.append(dict(payload or {}))
        self._rows.append(vec)
        self._matrix = None
        self._id_set = None

    def _index(self) -> set[str]:
        if getattr(self, "_id_set", None) is None:
            self._id_set = set(self.ids)
        return self._id_set

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.vstack(self._rows) if self._rows else np.zeros((0, self.dim))
        return self._matrix

    def scores(self, query: Embedding) -> np.ndarray:
        if query.vector.shape != (self.dim,):
            raise RetrievalError("query dimension does not match store")
        return self.matrix @ query.vector

    def search(self, query: Embedding, k: int = 5) -> list[RetrievalHit]:
        if len(self) == 0:
            raise RetrievalError("store is empty")
        scores = self.scores(query)
        order = np.argsort(-np.floor(scores * RANK_SCALE + 0.5), kind="stable")[:k]
        return [RetrievalHit(self.ids[i], float(scores[i]), self.payloads[i]) for i in order]

    def save(self, path: str | Path) -> None:
        header = {"format": STORE_FORMAT, "version": 1, "dim": self.dim, "embedder_id": self.embedder_id, "count": len(self)}
        with open(path, "w", encoding="utf-8") as f:
            f.write(json.dumps(header, sort_keys=True) + "\n")
            for tid, payload, vec in zip(self.ids, self.payloads, self._rows):
                row = {"id": tid, "embedder_id": self.embedder_id, "payload": payload, "vector": _encode(vec)}
                f.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path, expected_embedder: str | None = None) -> "VectorStore":
        with open(path, encoding="utf-8") as f:
            header = json.loads(f.readline())
            if header.get("format") != STORE_FORMAT:
                raise RetrievalError(f"{path}: not a vector store file")
            if expected_embedder is not None and header["embedder_id"] != expected_embedder:
                raise RetrievalError(f"{path}: built with {header['embedder_id']!r}, expected {expected_embedder!r}")
            store = cls(header["embedder_id"], header["dim"])
            for line_no, line in enumerate(f, start=2):
                if not line.strip():
                    continue
                row = json.loads(line)
                if row.get("embedder_id") != store.embedder_id:
                    raise RetrievalError(f"{path}:{line_no}: entry embedded with {row.get('embedder_id')!r}, store uses {store.embedder_id!r}")
                vec = _decode(row["vector"])
                store.ids.append(row["id"])
                store.payloads.append(row["payload"])
                store._rows.append(vec)
        if len(store) != header["count"]:
            raise RetrievalError(f"{path}: header declares {header['count']} entries, found {len(store)}")
        return store


def brute_force_top_k(store: VectorStore, query: np.ndarray, k: int) -> list[tuple[str, float]]:
    """Reference scan in plain Python, used to audit ``VectorStore.search``."""
    q = [(i, v) for i, v in enumerate(query.tolist()) if v != 0.0]
    scored = []
    for pos, (tid, row) in enumerate(zip(store.ids, store._rows)):
        values = row.tolist()
        score = float(sum(values[i] * v for i, v in q))
        scored.append((-math.floor(score * RANK_SCALE + 0.5), pos, tid, score))
    scored.sort()
    return [(tid, score) for _, _, tid, score in scored[:k]]


# symptom matching

def build_kb_index(kb: KnowledgeBase, embedder: Embedder) -> VectorStore:
    if len(kb) == 0:
        raise RetrievalError("knowledge base is empty")
    store: VectorStore | None = None
    for entry in kb:
        e = embed(entry.text, embedder)
        if store is None:
            store = VectorStore(embedder.embedder_id, e.vector.shape[0])
        store.add(entry.entry_id, e, {
            "text": entry.text,
            "disorder_class": entry.disorder_class,
            "disorder_name": entry.disorder_name,
            "kind": entry.kind,
        })
    return store


@dataclass(frozen=True)
class SymptomMatch:
    hits: tuple[RetrievalHit, ...]
    differential: bool

    def render(self) -> str:
        lines = [
            f"{i}. [{h.payload['disorder_class']}] {h.payload['text']} (similarity {h.score:.4f})"
            for i, h in enumerate(self.hits, start=1)
        ]
        if self.differential:
            lines.append(DIFFERENTIAL_NOTE)
        return "\n".join(lines)

    def classes(self) -> list[str]:
        return [h.payload["disorder_class"] for h in self.hits]


def match_symptoms(text: str, kb: KnowledgeBase | VectorStore, embedder: Embedder, k: int = 5) -> SymptomMatch:
    """Top-k criteria for a record; flags a differential when classes differ."""
    if not text or not text.strip():
        raise RetrievalError("record text is empty")
    index = kb if isinstance(kb, VectorStore) else build_kb_index(kb, embedder)
    if index.embedder_id != embedder.embedder_id:
        raise RetrievalError(f"KB index built with {index.embedder_id!r}, query embedder is {embedder.embedder_id!r}")
    hits = tuple(index.search(embed(text, embedder), k))
    return SymptomMatch(hits, len({h.payload["disorder_class"] for h in hits}) > 1)


# similar-case retrieval

def build_record_store(cases: Iterable[CaseRecord], embedder: Embedder, fmt: str = "structured") -> VectorStore:
    store: VectorStore | None = None
    for case in cases:
        text = record_text(case, fmt)
        if text is None:
            continue
        e = embed(text, embedder)
        if store is None:
            store = VectorStore(embedder.embedder_id, e.vector.shape[0])
        store.add(case.case_id, e, {"text": text, "gold_label": case.gold_label})
    if store is None:
        raise RetrievalError("no case with a medical record to index")
    return store


class NumericScaleEmbedder:
    """Selected-item scores scaled to [0,1] by item maximum; missing items are 0."""

    def __init__(self, selected: SelectedItemSet, catalog: ScaleCatalog | None = None):
        self.selected = selected
        self.catalog = catalog or default_catalog()
        self.embedder_id = "numeric:" + ",".join(selected.items)

    def vector(self, case: CaseRecord) -> np.ndarray:
        out = np.zeros(len(self.selected.items))
        for i, item_id in enumerate(self.selected.items):
            if item_id in case.scale_scores:
                lo, hi = self.catalog.item(item_id).score_range
                out[i] = (case.scale_scores[item_id] - lo) / (hi - lo)
        # constant offset keeps all-zero profiles embeddable
        return np.append(out, 1.0)


def _scale_embedding(case: CaseRecord, selected: SelectedItemSet, embedder, catalog: ScaleCatalog) -> tuple[Embedding, str]:
    text = render_performance(case, selected, catalog)
    if isinstance(embedder, NumericScaleEmbedder):
        return normalize(embedder.vector(case)), text
    return embed(text, embedder), text


def build_scale_store(cases: Iterable[CaseRecord], embedder, selected: SelectedItemSet, catalog: ScaleCatalog | None = None) -> VectorStore:
    catalog = catalog or default_catalog()
    store: VectorStore | None = None
    for case in cases:
        if not any(i in case.scale_scores for i in selected.items):
            continue
        e, text = _scale_embedding(case, selected, embedder, catalog)
        if store is None:
            store = VectorStore(embedder.embedder_id, e.vector.shape[0])
        store.add(case.case_id, e, {"text": text, "gold_label": case.gold_label})
    if store is None:
        raise RetrievalError("no case with selected-item scores to index")
    return store


@dataclass(frozen=True)
class CaseRetrieval:
    query_id: str
    kind: str
    mode: str
    hits: tuple[RetrievalHit, ...] = ()
    text: str = ""
    no_record: bool = False

    @property
    def hit_ids(self) -> list[str]:
        return [h.target_id for h in self.hits]


def display_text(hits: Sequence[RetrievalHit]) -> str:
    blocks = []
    for h in hits:
        blocks.append(
            f"Case {h.target_id} (similarity {h.score:.4f}; diagnosis: {DIAGNOSIS_TEXT.get(h.payload.get('gold_label'), 'unknown')}):\n"
            f"{h.payload['text']}"
        )
    return "\n\n".join(blocks)


def _analysis(kind: str, query_text: str, hits: Sequence[RetrievalHit], provider: ChatProvider | None) -> str:
    if provider is None:
        raise RetrievalError("analysis mode requires a provider")
    prompt = render("case_analysis", kind=kind, query_text=query_text, retrieved=display_text(hits))
    reply = provider.complete([{"role": "user", "content": prompt}]).strip()
    return f"Compared cases: {', '.join(h.target_id for h in hits)}\n{reply}"


def _check_mode(mode: str) -> None:
    if mode not in ("display", "analysis"):
        raise ValueError(f"mode must be 'display' or 'analysis', got {mode!r}")


def retrieve_similar_records(case: CaseRecord, store: VectorStore, embedder: Embedder, k: int = 5, mode: str = "display",
                             provider: ChatProvider | None = None, fmt: str = "structured") -> CaseRetrieval:
    _check_mode(mode)
    text = record_text(case, fmt)
    if text is None:
        return CaseRetrieval(case.case_id, "record", mode, text="The visitor has no medical record available; no similar records were retrieved.", no_record=True)
    hits = tuple(store.search(embed(text, embedder), k))
    out = display_text(hits) if mode == "display" else _analysis("medical record", text, hits, provider)
    log.debug("record retrieval for %s: candidates %s", case.case_id, [h.target_id for h in hits])
    return CaseRetrieval(case.case_id, "record", mode, hits, out)


def retrieve_similar_scales(case: CaseRecord, store: VectorStore, embedder, selected: SelectedItemSet, k: int = 5,
                            mode: str = "display", provider: ChatProvider | None = None,
                            catalog: ScaleCatalog | None = None) -> CaseRetrieval:
    _check_mode(mode)
    catalog = catalog or default_catalog()
    e, text = _scale_embedding(case, selected, embedder, catalog)
    hits = tuple(store.search(e, k))
    out = display_text(hits) if mode == "display" else _analysis("scale performance", text, hits, provider)
    return CaseRetrieval(case.case_id, "scales", mode, hits, out)


def audit_disjoint(store: VectorStore | Iterable[str], test_ids: Iterable[str]) -> None:
    """Raise when any test case id is also a retrieval candidate."""
    stored = set(store.ids if isinstance(store, VectorStore) else store)
    overlap = sorted(stored & set(test_ids))
    if overlap:
        raise RetrievalError(f"test cases present in the retrieval store: {overlap[:10]}")


def hit_dict(h: RetrievalHit) -> dict[str, Any]:
    return {"target_id": h.target_id, "score": h.score}
