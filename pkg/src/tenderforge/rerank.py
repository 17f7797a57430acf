"""Second-stage re-ranking by purchase-list similarity.

An item pair's distance is the mean of embedding, character-bigram, and edit
distances over the item names. A list pair's distance best-matches every
current item against the historical list and adds a length-gap penalty
weighted by ``alpha``; candidates re-order ascending by that distance.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .corpus import Corpus, PurchaseItem
from .errors import EmptyCurrentList, IndexCorpusMismatch
from .retrieval import ScoredCandidate
from .text_metrics import EmbeddingProvider, edit_dist, embedding_dist, ngram_dist

DEFAULT_ALPHA = 0.5


@dataclass(frozen=True)
class ItemMatch:
    current_index: int
    best_index: Optional[int]  # None when the historical list is empty
    dist: float


@dataclass(frozen=True)
class ListDistance:
    value: float
    per_item: tuple[ItemMatch, ...]


def item_text_dist(a: str, b: str, provider: EmbeddingProvider) -> float:
    """Mean of the three name-string distances; always in [0, 1]."""
    return (embedding_dist(a, b, provider) + ngram_dist(a, b) + edit_dist(a, b)) / 3.0


def item_dist(a: PurchaseItem, b: PurchaseItem, provider: EmbeddingProvider) -> float:
    """Item distance over names only; quantity/unit/spec do not participate."""
    return item_text_dist(a.name, b.name, provider)


def list_text_dist(
    c_names: Sequence[str],
    h_names: Sequence[str],
    alpha: float,
    provider: EmbeddingProvider,
) -> ListDistance:
    if not c_names:
        raise EmptyCurrentList("current list must be non-empty")
    per_item: list[ItemMatch] = []
    total = 0.0
    for i, current in enumerate(c_names):
        if not h_names:
            per_item.append(ItemMatch(current_index=i, best_index=None, dist=1.0))
            total += 1.0
            continue
        best_j, best = 0, item_text_dist(current, h_names[0], provider)
        for j in range(1, len(h_names)):
            d = item_text_dist(current, h_names[j], provider)
            if d < best:
                best_j, best = j, d
        per_item.append(ItemMatch(current_index=i, best_index=best_j, dist=best))
        total += best
    value = (total + alpha * abs(len(h_names) - len(c_names))) / len(c_names)
    return ListDistance(value=value, per_item=tuple(per_item))


def list_dist(
    c_list: Sequence[PurchaseItem],
    h_list: Sequence[PurchaseItem],
    alpha: float,
    provider: EmbeddingProvider,
) -> ListDistance:
    """Best-match each current item in the historical list, then add the
    length-gap penalty; normalized by the current list length."""
    return list_text_dist([i.name for i in c_list], [i.name for i in h_list], alpha, provider)


def rerank(
    candidates: Sequence[ScoredCandidate],
    corpus: Corpus,
    c_list: Sequence[PurchaseItem],
    alpha: float,
    provider: EmbeddingProvider,
) -> list[ScoredCandidate]:
    """Re-order first-stage candidates ascending by purchase-list distance.

    Without a current list this is the identity. Ties keep first-stage order;
    the output is always a permutation of the input.
    """
    if not c_list:
        return list(candidates)
    annotated = []
    for candidate in candidates:
        doc = corpus.get(candidate.doc_id)
        if doc is None:
            raise IndexCorpusMismatch(f"candidate {candidate.doc_id!r} not found in corpus")
        annotated.append(
            replace(candidate, list_dist=list_dist(c_list, doc.purchase_items, alpha, provider))
        )
    annotated.sort(key=lambda c: c.list_dist.value)  # stable: ties keep input order
    return annotated


__all__ = [
    "DEFAULT_ALPHA",
    "ItemMatch",
    "ListDistance",
    "item_dist",
    "item_text_dist",
    "list_dist",
    "list_text_dist",
    "rerank",
]
