"""Procurement knowledge graph: containment queries, item suggestion, and
threshold-based item classification against a product taxonomy.

Graphs are ingested from TSV triple files (src, relation, dst); entity names
are matched by case-insensitive substring, mirroring a graph-database
"contains" query over entity names.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .corpus import PurchaseItem, TableBlock, TenderDocument, normalize_key, validate_document
from .errors import EmptyTaxonomy, MalformedLineError, SchemaError
from .rerank import item_dist
from .retrieval import Requirement, tokenize
from .text_metrics import EmbeddingProvider

logger = logging.getLogger(__name__)

ITEM_RELATION = "is the procurement item for"
DEFAULT_THETA = 0.35

_SUGGESTION_FIELD_KEYS = {"project_name", "purpose", "project_purpose", "project"}


@dataclass(frozen=True)
class Entity:
    id: int
    name: str
    label: str = "Entity"


@dataclass(frozen=True)
class Relation:
    src: int
    rel_type: str
    dst: int


@dataclass(frozen=True)
class Subgraph:
    entities: tuple[Entity, ...]
    relations: tuple[Relation, ...]


class KnowledgeGraph:
    """Immutable entity/relation store with a lowercased name index."""

    def __init__(self, entities: Iterable[Entity], relations: Iterable[Relation]):
        self.entities: dict[int, Entity] = {e.id: e for e in entities}
        self.relations: tuple[Relation, ...] = tuple(relations)
        for rel in self.relations:
            if rel.src not in self.entities or rel.dst not in self.entities:
                raise ValueError(f"relation {rel} references unknown entity")
        self._lower_names: list[tuple[str, int]] = sorted(
            ((e.name.lower(), e.id) for e in self.entities.values()), key=lambda p: p[1]
        )
        self._incident: dict[int, list[Relation]] = {}
        for rel in self.relations:
            self._incident.setdefault(rel.src, []).append(rel)
            self._incident.setdefault(rel.dst, []).append(rel)

    @property
    def entity_count(self) -> int:
        return len(self.entities)

    @property
    def relation_count(self) -> int:
        return len(self.relations)

    def find_by_substring(self, needle: str) -> list[Entity]:
        lowered = needle.lower()
        return [self.entities[eid] for name, eid in self._lower_names if lowered in name]

    def incident(self, entity_id: int) -> list[Relation]:
        return self._incident.get(entity_id, [])


def empty_graph() -> KnowledgeGraph:
    return KnowledgeGraph((), ())


def load_triples(path: str | Path) -> KnowledgeGraph:
    """Load a TSV triple file (src \\t relation \\t dst per line).

    Entities deduplicate by exact name, relations by full triple; self-loops
    and short lines are malformed.
    """
    ids_by_name: dict[str, int] = {}
    entities: list[Entity] = []
    relations: list[Relation] = []
    seen_triples: set[tuple[int, str, int]] = set()

    def intern(name: str) -> int:
        if name not in ids_by_name:
            ids_by_name[name] = len(entities)
            entities.append(Entity(id=len(entities), name=name))
        return ids_by_name[name]

    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.rstrip("\n")
            if not stripped.strip():
                continue
            parts = stripped.split("\t")
            if len(parts) != 3:
                raise MalformedLineError(line_no, f"expected 3 tab-separated values, got {len(parts)}")
            src_name, rel_type, dst_name = (p.strip() for p in parts)
            if not src_name or not rel_type or not dst_name:
                raise MalformedLineError(line_no, "empty triple component")
            if src_name == dst_name:
                raise MalformedLineError(line_no, "self-loop triples are not allowed")
            triple = (intern(src_name), rel_type, intern(dst_name))
            if triple not in seen_triples:
                seen_triples.add(triple)
                relations.append(Relation(src=triple[0], rel_type=triple[1], dst=triple[2]))
    graph = KnowledgeGraph(entities, relations)
    logger.info("loaded knowledge graph: %d entities, %d relations", graph.entity_count, graph.relation_count)
    return graph


def query_contains(graph: KnowledgeGraph, needle: str) -> Subgraph:
    """Entities whose name contains ``needle`` (case-insensitive), closed over
    their incident relations and 1-hop neighbors; ordered by entity id."""
    if not needle:
        raise ValueError("needle must be non-empty")
    matched = graph.find_by_substring(needle)
    entity_ids = {e.id for e in matched}
    relations: set[Relation] = set()
    for entity in matched:
        for rel in graph.incident(entity.id):
            relations.add(rel)
            entity_ids.add(rel.src)
            entity_ids.add(rel.dst)
    entities = tuple(graph.entities[eid] for eid in sorted(entity_ids))
    ordered = tuple(sorted(relations, key=lambda r: (r.src, r.rel_type, r.dst)))
    return Subgraph(entities=entities, relations=ordered)


def _suggestion_texts(requirement: Requirement) -> list[str]:
    texts = [
        value
        for name, value in requirement.fields.items()
        if normalize_key(name) in _SUGGESTION_FIELD_KEYS and value.strip()
    ]
    # fall back to every field when no project-name/purpose field exists
    return texts or [v for v in requirement.fields.values() if v.strip()]


def suggest_items(graph: KnowledgeGraph, requirement: Requirement) -> list[PurchaseItem]:
    """Purchase items connected (either direction) through the procurement-item
    relation to entities matching the requirement's project/purpose terms.
    Ordered by how many query terms reached each item, then by name."""
    counts: dict[str, int] = {}
    for text in _suggestion_texts(requirement):
        for term in dict.fromkeys(tokenize(text)):
            reached: set[str] = set()
            for entity in graph.find_by_substring(term):
                for rel in graph.incident(entity.id):
                    if rel.rel_type != ITEM_RELATION:
                        continue
                    other = rel.dst if rel.src == entity.id else rel.src
                    reached.add(graph.entities[other].name)
            for name in reached:
                counts[name] = counts.get(name, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [PurchaseItem(name=name) for name, _ in ranked]


@dataclass(frozen=True)
class ItemClassification:
    keep: bool
    best_match: PurchaseItem
    dist: float


def classify_item(
    item: PurchaseItem,
    taxonomy: Sequence[PurchaseItem],
    theta: float,
    provider: EmbeddingProvider,
) -> ItemClassification:
    """Keep an item when its closest taxonomy entry lies within ``theta``."""
    if not taxonomy:
        raise EmptyTaxonomy("taxonomy must be non-empty")
    best = taxonomy[0]
    best_dist = item_dist(item, taxonomy[0], provider)
    for entry in taxonomy[1:]:
        d = item_dist(item, entry, provider)
        if d < best_dist:
            best, best_dist = entry, d
    return ItemClassification(keep=best_dist <= theta, best_match=best, dist=best_dist)


@dataclass(frozen=True)
class DroppedItem:
    item: PurchaseItem
    dist: float
    best_match: str


@dataclass(frozen=True)
class RefineResult:
    document: TenderDocument
    dropped: tuple[DroppedItem, ...]
    warnings: tuple[str, ...]
    source: str  # "c_list" | "suggested"


def _purchase_table_index(doc: TenderDocument) -> Optional[int]:
    for i, table in enumerate(doc.tables):
        if any(name.strip().lower() == "name" for name in table.field_names):
            return i
    return None


def _format_quantity(quantity: Optional[float]) -> str:
    if quantity is None:
        return ""
    if float(quantity).is_integer():
        return str(int(quantity))
    return str(quantity)


def _item_row(item: PurchaseItem, field_names: Sequence[str]) -> tuple[str, ...]:
    cells = []
    for name in field_names:
        column = name.strip().lower()
        if column == "name":
            cells.append(item.name)
        elif column == "quantity":
            cells.append(_format_quantity(item.quantity))
        elif column == "unit":
            cells.append(item.unit or "")
        elif column == "spec":
            cells.append(item.spec or "")
        else:
            cells.append("")
    return tuple(cells)


def refine_purchase_list(
    doc: TenderDocument,
    requirement: Requirement,
    graph: KnowledgeGraph,
    taxonomy: Sequence[PurchaseItem],
    theta: float,
    provider: EmbeddingProvider,
) -> RefineResult:
    """Replace the document's purchase items with the requirement's list
    filtered through the taxonomy (or with graph suggestions when the
    requirement has no list), and rewrite the purchase table to match."""
    warnings: list[str] = []
    dropped: list[DroppedItem] = []
    if requirement.c_list:
        source = "c_list"
        kept: list[PurchaseItem] = []
        if not taxonomy:
            warnings.append("empty taxonomy; purchase list accepted without classification")
            kept = list(requirement.c_list)
        else:
            for item in requirement.c_list:
                result = classify_item(item, taxonomy, theta, provider)
                if result.keep:
                    kept.append(item)
                else:
                    dropped.append(
                        DroppedItem(item=item, dist=result.dist, best_match=result.best_match.name)
                    )
    else:
        source = "suggested"
        kept = suggest_items(graph, requirement)

    tables = list(doc.tables)
    table_idx = _purchase_table_index(doc)
    if table_idx is None:
        warnings.append("no purchase table found (no column named 'name'); items updated only")
    else:
        table = tables[table_idx]
        tables[table_idx] = TableBlock(
            field_names=table.field_names,
            rows=tuple(_item_row(item, table.field_names) for item in kept),
        )
    refined = validate_document(
        TenderDocument(
            id=doc.id,
            fields=doc.fields,
            paragraphs=doc.paragraphs,
            tables=tuple(tables),
            purchase_items=tuple(kept),
        )
    )
    for warning in warnings:
        logger.warning("refine %s: %s", doc.id, warning)
    return RefineResult(
        document=refined, dropped=tuple(dropped), warnings=tuple(warnings), source=source
    )


def load_taxonomy(path: str | Path) -> list[PurchaseItem]:
    """JSONL of purchase items ({"name": ..., optional quantity/unit/spec})."""
    items: list[PurchaseItem] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {line_no}", f"not valid JSON: {exc}") from exc
            if not isinstance(obj, dict) or not isinstance(obj.get("name"), str) or not obj["name"]:
                raise SchemaError(f"line {line_no}.name", "must be a non-empty string")
            items.append(
                PurchaseItem(
                    name=obj["name"],
                    quantity=obj.get("quantity"),
                    unit=obj.get("unit"),
                    spec=obj.get("spec"),
                )
            )
    return items


__all__ = [
    "DEFAULT_THETA",
    "DroppedItem",
    "Entity",
    "ITEM_RELATION",
    "ItemClassification",
    "KnowledgeGraph",
    "RefineResult",
    "Relation",
    "Subgraph",
    "classify_item",
    "empty_graph",
    "load_taxonomy",
    "load_triples",
    "query_contains",
    "refine_purchase_list",
    "suggest_items",
]
