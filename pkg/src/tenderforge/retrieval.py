"""First-stage hybrid retrieval: per-field vocabulary and embedding scoring.

Each document field is indexed twice: a per-field posting table (term -> doc
ids) for vocabulary scoring and one embedding vector per (doc, field) pair.
A query scores every document with the mean of the two channels per queried
field, summed across fields; rarer terms carry more weight via inverse
posting-size weighting with +1 smoothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, AbstractSet, Mapping, Optional, Sequence

import numpy as np

from .corpus import Corpus, PurchaseItem
from .errors import EmptyQuery, IndexCorpusMismatch
from .text_metrics import EmbeddingProvider, EmbeddingVector, cosine_similarity

if TYPE_CHECKING:
    from .rerank import ListDistance

_CJK_RANGES = (
    (0x3040, 0x30FF),   # kana
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xAC00, 0xD7AF),   # hangul
    (0xF900, 0xFAFF),
    (0x20000, 0x2A6DF),
)


def _is_cjk(ch: str) -> bool:
    code = ord(ch)
    return any(lo <= code <= hi for lo, hi in _CJK_RANGES)


def tokenize(text: str) -> list[str]:
    """Lowercased terms: alphanumeric runs as words, CJK runs as character
    bigrams (a lone CJK character stands for itself)."""
    terms: list[str] = []
    word: list[str] = []
    cjk: list[str] = []

    def flush_word() -> None:
        if word:
            terms.append("".join(word))
            word.clear()

    def flush_cjk() -> None:
        if len(cjk) == 1:
            terms.append(cjk[0])
        else:
            terms.extend(cjk[i] + cjk[i + 1] for i in range(len(cjk) - 1))
        cjk.clear()

    for ch in text.lower():
        if _is_cjk(ch):
            flush_word()
            cjk.append(ch)
        elif ch.isalnum():
            if cjk:
                flush_cjk()
            word.append(ch)
        else:
            flush_word()
            if cjk:
                flush_cjk()
    flush_word()
    if cjk:
        flush_cjk()
    return terms


@dataclass(frozen=True)
class Requirement:
    """A purchaser's query: field values plus an optional current purchase list."""

    fields: dict[str, str]
    c_list: tuple[PurchaseItem, ...] = ()

    def queried_fields(self) -> list[tuple[str, str]]:
        return [(name, text) for name, text in self.fields.items() if text.strip()]


@dataclass
class VocabularyIndex:
    """Per-field posting tables: field name -> term -> set of document ids."""

    postings: dict[str, dict[str, frozenset[str]]]
    doc_count: int

    def field_postings(self, field_name: str) -> Mapping[str, frozenset[str]]:
        return self.postings.get(field_name, {})


@dataclass
class EmbeddingIndex:
    """One vector per (document, field) pair."""

    vectors: dict[str, dict[str, EmbeddingVector]]
    dimension: int


@dataclass
class IndexBundle:
    vocabulary: VocabularyIndex
    embedding: EmbeddingIndex
    fingerprint: str
    doc_ids: tuple[str, ...]


@dataclass(frozen=True)
class FieldScore:
    embedding: float
    vocabulary: float


@dataclass(frozen=True)
class ScoredCandidate:
    doc_id: str
    field_scores: dict[str, FieldScore]
    d_score: float
    list_dist: Optional["ListDistance"] = None


def build_index(corpus: Corpus, provider: EmbeddingProvider) -> IndexBundle:
    """Index every document field for vocabulary and embedding retrieval."""
    postings: dict[str, dict[str, set[str]]] = {}
    vectors: dict[str, dict[str, EmbeddingVector]] = {}
    for doc in corpus:
        per_field: dict[str, EmbeddingVector] = {}
        for name, text in doc.fields.items():
            for term in set(tokenize(text)):
                postings.setdefault(name, {}).setdefault(term, set()).add(doc.id)
            per_field[name] = provider.embed(text)
        vectors[doc.id] = per_field
    frozen = {
        fname: {term: frozenset(ids) for term, ids in terms.items()}
        for fname, terms in postings.items()
    }
    return IndexBundle(
        vocabulary=VocabularyIndex(postings=frozen, doc_count=len(corpus)),
        embedding=EmbeddingIndex(vectors=vectors, dimension=provider.dimension),
        fingerprint=corpus.fingerprint(),
        doc_ids=tuple(sorted(doc.id for doc in corpus)),
    )


def _unique(terms: Sequence[str]) -> list[str]:
    return list(dict.fromkeys(terms))


def term_weights(
    query_terms: Sequence[str], postings: Mapping[str, AbstractSet[str]]
) -> dict[str, float]:
    """Inverse posting-size weights with +1 smoothing, normalized to sum 1.

    weight_t = (1 / (|D_t| + 1)) / sum_k (1 / (|D_k| + 1)); terms absent from
    the index count as posting size 0. Duplicated query terms collapse to one.
    """
    terms = _unique(query_terms)
    if not terms:
        raise EmptyQuery("no query terms")
    inverses = {t: 1.0 / (len(postings.get(t, ())) + 1.0) for t in terms}
    total = sum(inverses.values())
    return {t: inv / total for t, inv in inverses.items()}


def doc_frequency(
    doc_id: str, query_terms: Sequence[str], postings: Mapping[str, AbstractSet[str]]
) -> float:
    """Fraction of query terms whose postings contain the document."""
    terms = _unique(query_terms)
    if not terms:
        return 0.0
    matched = sum(1 for t in terms if doc_id in postings.get(t, ()))
    return matched / len(terms)


def vocab_score(
    doc_id: str, query_terms: Sequence[str], postings: Mapping[str, AbstractSet[str]]
) -> float:
    """Mean of the matched-term weight mass and the document frequency."""
    terms = _unique(query_terms)
    if not terms:
        return 0.0
    weights = term_weights(terms, postings)
    matched_weight = sum(w for t, w in weights.items() if doc_id in postings.get(t, ()))
    return (matched_weight + doc_frequency(doc_id, terms, postings)) / 2.0


def embed_score(
    doc_id: str,
    field_name: str,
    query_text: str,
    emb_index: EmbeddingIndex,
    provider: EmbeddingProvider,
) -> float:
    """Clamped cosine between the query text and the stored field vector;
    0 when the document does not carry the field."""
    stored = emb_index.vectors.get(doc_id, {}).get(field_name)
    if stored is None:
        return 0.0
    return max(0.0, cosine_similarity(provider.embed(query_text), stored))


def retrieve(
    requirement: Requirement,
    indexes: IndexBundle,
    provider: EmbeddingProvider,
    k: int,
    corpus: Optional[Corpus] = None,
) -> list[ScoredCandidate]:
    """Score every indexed document field-wise and return the top ``k``.

    Per queried field the document earns (embed_score + vocab_score) / 2; the
    fused score sums the fields. Ordering is descending score with ascending
    document id as the tie-break, so the ranking is a total order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if corpus is not None and corpus.fingerprint() != indexes.fingerprint:
        raise IndexCorpusMismatch("index fingerprint does not match corpus")
    queried = requirement.queried_fields()
    if not queried:
        raise EmptyQuery("requirement has no non-empty field")

    per_doc: dict[str, dict[str, FieldScore]] = {doc_id: {} for doc_id in indexes.doc_ids}
    for field_name, text in queried:
        postings = indexes.vocabulary.field_postings(field_name)
        terms = _unique(tokenize(text))
        weights = term_weights(terms, postings) if terms else {}
        query_vec = provider.embed(text)
        for doc_id in indexes.doc_ids:
            stored = indexes.embedding.vectors.get(doc_id, {}).get(field_name)
            e_score = max(0.0, cosine_similarity(query_vec, stored)) if stored is not None else 0.0
            if terms:
                matched = [t for t in terms if doc_id in postings.get(t, ())]
                v_score = (sum(weights[t] for t in matched) + len(matched) / len(terms)) / 2.0
            else:
                v_score = 0.0
            per_doc[doc_id][field_name] = FieldScore(embedding=e_score, vocabulary=v_score)

    candidates = [
        ScoredCandidate(
            doc_id=doc_id,
            field_scores=scores,
            d_score=sum((fs.embedding + fs.vocabulary) / 2.0 for fs in scores.values()),
        )
        for doc_id, scores in per_doc.items()
    ]
    candidates.sort(key=lambda c: (-c.d_score, c.doc_id))
    return candidates[:k]


# --- persistence ---------------------------------------------------------------

def save_index(indexes: IndexBundle, path: str | Path) -> None:
    payload = {
        "fingerprint": indexes.fingerprint,
        "dimension": indexes.embedding.dimension,
        "doc_ids": list(indexes.doc_ids),
        "postings": {
            fname: {term: sorted(ids) for term, ids in terms.items()}
            for fname, terms in indexes.vocabulary.postings.items()
        },
        "vectors": {
            doc_id: {fname: vec.tolist() for fname, vec in fields.items()}
            for doc_id, fields in indexes.embedding.vectors.items()
        },
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_index(path: str | Path) -> IndexBundle:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    postings = {
        fname: {term: frozenset(ids) for term, ids in terms.items()}
        for fname, terms in payload["postings"].items()
    }
    vectors = {
        doc_id: {
            fname: np.asarray(vec, dtype=np.float64) for fname, vec in fields.items()
        }
        for doc_id, fields in payload["vectors"].items()
    }
    doc_ids = tuple(payload["doc_ids"])
    return IndexBundle(
        vocabulary=VocabularyIndex(postings=postings, doc_count=len(doc_ids)),
        embedding=EmbeddingIndex(vectors=vectors, dimension=payload["dimension"]),
        fingerprint=payload["fingerprint"],
        doc_ids=doc_ids,
    )


__all__ = [
    "EmbeddingIndex",
    "FieldScore",
    "IndexBundle",
    "Requirement",
    "ScoredCandidate",
    "VocabularyIndex",
    "build_index",
    "doc_frequency",
    "embed_score",
    "load_index",
    "retrieve",
    "save_index",
    "term_weights",
    "tokenize",
    "vocab_score",
]
