"""tenderforge: retrieval-augmented drafting engine for tender documents.

Pipeline: ingest a historical corpus, build hybrid (vocabulary + embedding)
field indexes, retrieve and purchase-list-rerank template candidates, drive a
missing-information agent session to fill the chosen template's smart tags,
refine the purchase list against a knowledge graph and taxonomy, and score
generated documents against gold standards.
"""

from .corpus import (
    Corpus,
    ParagraphBlock,
    PurchaseItem,
    SmartTag,
    TableBlock,
    TenderDocument,
    extract_smart_tags,
    load_corpus,
    parse_document,
    serialize_document,
)
from .errors import TenderForgeError
from .evaluation import EvaluationReport, evaluate
from .generation import (
    AgentSession,
    MockLLMClient,
    detect_missing,
    fill_template,
    open_session,
    submit_answer,
)
from .knowledge import KnowledgeGraph, classify_item, load_triples, query_contains, suggest_items
from .rerank import item_dist, list_dist, rerank
from .retrieval import Requirement, ScoredCandidate, build_index, retrieve
from .text_metrics import HashedTrigramProvider, cosine_similarity, edit_dist, embedding_dist, ngram_dist

__version__ = "0.1.0"

__all__ = [
    "AgentSession",
    "Corpus",
    "EvaluationReport",
    "HashedTrigramProvider",
    "KnowledgeGraph",
    "MockLLMClient",
    "ParagraphBlock",
    "PurchaseItem",
    "Requirement",
    "ScoredCandidate",
    "SmartTag",
    "TableBlock",
    "TenderDocument",
    "TenderForgeError",
    "build_index",
    "classify_item",
    "cosine_similarity",
    "detect_missing",
    "edit_dist",
    "embedding_dist",
    "evaluate",
    "extract_smart_tags",
    "fill_template",
    "item_dist",
    "list_dist",
    "load_corpus",
    "load_triples",
    "ngram_dist",
    "open_session",
    "parse_document",
    "query_contains",
    "rerank",
    "retrieve",
    "serialize_document",
    "submit_answer",
    "suggest_items",
]
