"""Semi-structured tender document model: parsing, smart tags, corpus store.

A document carries named fields, tagged paragraphs, tables, and a purchase-item
list. Documents are exchanged as JSON (one per line in a corpus file) and can
be rendered to markdown for preview/export.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping, Optional

from .errors import DuplicateIdError, SchemaError, TagGrammarError

TAG_KEY_RE = re.compile(r"[A-Za-z0-9_.]+\Z")

DOCUMENT_KEYS = {"id", "fields", "paragraphs", "tables", "purchase_items"}


@dataclass(frozen=True)
class SmartTag:
    """In-text placeholder: ``{{key}}`` to fill, ``{{gen:key|instruction}}`` to generate."""

    key: str
    kind: str = "fill"  # fill | generate
    instruction: Optional[str] = None
    required: bool = True


@dataclass(frozen=True)
class ParagraphBlock:
    index: int
    text: str


@dataclass(frozen=True)
class TableBlock:
    field_names: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...] = ()


@dataclass(frozen=True)
class PurchaseItem:
    name: str
    quantity: Optional[float] = None
    unit: Optional[str] = None
    spec: Optional[str] = None


@dataclass(frozen=True)
class TenderDocument:
    id: str
    fields: dict[str, str]
    paragraphs: tuple[ParagraphBlock, ...] = ()
    tables: tuple[TableBlock, ...] = ()
    purchase_items: tuple[PurchaseItem, ...] = ()


def scan_tags(text: str, location: str = "text") -> list[SmartTag]:
    """Return the tags of ``text`` in occurrence order (duplicates kept).

    Raises TagGrammarError for unbalanced "{{", nested tags, or invalid tag
    bodies. A "}}" with no opening delimiter is treated as plain text.
    """
    tags: list[SmartTag] = []
    pos = 0
    while True:
        open_at = text.find("{{", pos)
        if open_at < 0:
            return tags
        close_at = text.find("}}", open_at + 2)
        if close_at < 0:
            raise TagGrammarError(location, f'"{{{{" at offset {open_at} has no matching "}}}}"')
        inner_open = text.find("{{", open_at + 2)
        if 0 <= inner_open < close_at:
            raise TagGrammarError(location, f"nested tag delimiters at offset {inner_open}")
        tags.append(_parse_tag_body(text[open_at + 2 : close_at], location))
        pos = close_at + 2


def _parse_tag_body(body: str, location: str) -> SmartTag:
    if body.startswith("gen:"):
        key, sep, instruction = body[4:].partition("|")
        if not TAG_KEY_RE.match(key):
            raise TagGrammarError(location, f"invalid generate-tag key {key!r}")
        if not sep or not instruction.strip():
            raise TagGrammarError(location, f"generate tag {key!r} requires a non-empty instruction")
        return SmartTag(key=key, kind="generate", instruction=instruction, required=False)
    if not TAG_KEY_RE.match(body):
        raise TagGrammarError(location, f"invalid tag body {body!r}")
    return SmartTag(key=body, kind="fill", instruction=None, required=True)


def render_tags(
    text: str,
    fill_values: Mapping[str, str],
    render_generate: Callable[[SmartTag], str],
    on_missing: Optional[Callable[[str], str]] = None,
) -> str:
    """Replace every tag in ``text``: fill tags from ``fill_values``, generate
    tags through ``render_generate``. Missing fill keys go through ``on_missing``
    (raises KeyError when not given).
    """
    out: list[str] = []
    pos = 0
    while True:
        open_at = text.find("{{", pos)
        if open_at < 0:
            out.append(text[pos:])
            return "".join(out)
        close_at = text.index("}}", open_at + 2)
        out.append(text[pos:open_at])
        tag = _parse_tag_body(text[open_at + 2 : close_at], "render")
        if tag.kind == "generate":
            out.append(render_generate(tag))
        elif tag.key in fill_values:
            out.append(fill_values[tag.key])
        elif on_missing is not None:
            out.append(on_missing(tag.key))
        else:
            raise KeyError(tag.key)
        pos = close_at + 2


def extract_smart_tags(doc: TenderDocument) -> list[SmartTag]:
    """Tags of a document in first-occurrence order (paragraphs, then table
    cells in row-major order), deduplicated by key."""
    seen: dict[str, SmartTag] = {}
    for para in doc.paragraphs:
        for tag in scan_tags(para.text, f"paragraph {para.index}"):
            seen.setdefault(tag.key, tag)
    for t_idx, table in enumerate(doc.tables):
        for r_idx, row in enumerate(table.rows):
            for c_idx, cell in enumerate(row):
                for tag in scan_tags(cell, f"table {t_idx} row {r_idx} col {c_idx}"):
                    seen.setdefault(tag.key, tag)
    return list(seen.values())


def validate_document(doc: TenderDocument) -> TenderDocument:
    """Check all document invariants; returns the document for chaining."""
    if not doc.id:
        raise SchemaError("id", "must be non-empty")
    if not doc.fields:
        raise SchemaError("fields", "must have at least one entry")
    for name in doc.fields:
        if not name:
            raise SchemaError("fields", "field names must be non-empty")
    for i, para in enumerate(doc.paragraphs):
        if para.index != i:
            raise SchemaError(f"paragraphs[{i}]", f"index {para.index} breaks 0..n-1 ordering")
        scan_tags(para.text, f"paragraph {i}")
    for t_idx, table in enumerate(doc.tables):
        if not table.field_names:
            raise SchemaError(f"tables[{t_idx}].field_names", "must be non-empty")
        for r_idx, row in enumerate(table.rows):
            if len(row) != len(table.field_names):
                raise SchemaError(
                    f"tables[{t_idx}].rows[{r_idx}]",
                    f"has {len(row)} cells, expected {len(table.field_names)}",
                )
    for i, item in enumerate(doc.purchase_items):
        if not item.name:
            raise SchemaError(f"purchase_items[{i}].name", "must be non-empty")
        if item.quantity is not None and item.quantity < 0:
            raise SchemaError(f"purchase_items[{i}].quantity", "must be non-negative")
    return doc


# --- JSON schema ------------------------------------------------------------

def _expect(value: object, kind: type, path: str) -> object:
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(path, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def parse_document(raw: str) -> TenderDocument:
    """Parse one JSON document; enforces the corpus schema and tag grammar."""
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"not valid JSON: {exc}") from exc
    return document_from_dict(data)


def document_from_dict(data: object) -> TenderDocument:
    if not isinstance(data, dict):
        raise SchemaError("$", "document must be a JSON object")
    unknown = set(data) - DOCUMENT_KEYS
    if unknown:
        raise SchemaError(sorted(unknown)[0], "unknown key")
    if "id" not in data:
        raise SchemaError("id", "missing")
    if "fields" not in data:
        raise SchemaError("fields", "missing")
    doc_id = _expect(data["id"], str, "id")
    fields_raw = _expect(data["fields"], dict, "fields")
    fields: dict[str, str] = {}
    for name, value in fields_raw.items():
        fields[str(name)] = _expect(value, str, f"fields[{name!r}]")

    paragraphs = []
    for i, text in enumerate(_expect(data.get("paragraphs", []), list, "paragraphs")):
        paragraphs.append(ParagraphBlock(index=i, text=_expect(text, str, f"paragraphs[{i}]")))

    tables = []
    for t_idx, t_raw in enumerate(_expect(data.get("tables", []), list, "tables")):
        path = f"tables[{t_idx}]"
        t_obj = _expect(t_raw, dict, path)
        if "field_names" not in t_obj:
            raise SchemaError(f"{path}.field_names", "missing")
        extra = set(t_obj) - {"field_names", "rows"}
        if extra:
            raise SchemaError(f"{path}.{sorted(extra)[0]}", "unknown key")
        names = tuple(
            _expect(n, str, f"{path}.field_names[{i}]")
            for i, n in enumerate(_expect(t_obj["field_names"], list, f"{path}.field_names"))
        )
        rows = tuple(
            tuple(
                _expect(cell, str, f"{path}.rows[{r_idx}][{c_idx}]")
                for c_idx, cell in enumerate(_expect(row, list, f"{path}.rows[{r_idx}]"))
            )
            for r_idx, row in enumerate(_expect(t_obj.get("rows", []), list, f"{path}.rows"))
        )
        tables.append(TableBlock(field_names=names, rows=rows))

    items = []
    for i, raw_item in enumerate(_expect(data.get("purchase_items", []), list, "purchase_items")):
        path = f"purchase_items[{i}]"
        obj = _expect(raw_item, dict, path)
        if "name" not in obj:
            raise SchemaError(f"{path}.name", "missing")
        extra = set(obj) - {"name", "quantity", "unit", "spec"}
        if extra:
            raise SchemaError(f"{path}.{sorted(extra)[0]}", "unknown key")
        quantity = obj.get("quantity")
        if quantity is not None:
            if isinstance(quantity, bool) or not isinstance(quantity, (int, float)):
                raise SchemaError(f"{path}.quantity", "expected number")
            quantity = float(quantity)
        unit = obj.get("unit")
        if unit is not None:
            unit = _expect(unit, str, f"{path}.unit")
        spec = obj.get("spec")
        if spec is not None:
            spec = _expect(spec, str, f"{path}.spec")
        items.append(
            PurchaseItem(name=_expect(obj["name"], str, f"{path}.name"), quantity=quantity, unit=unit, spec=spec)
        )

    return validate_document(
        TenderDocument(
            id=doc_id,
            fields=fields,
            paragraphs=tuple(paragraphs),
            tables=tuple(tables),
            purchase_items=tuple(items),
        )
    )


def document_to_dict(doc: TenderDocument) -> dict:
    items = []
    for item in doc.purchase_items:
        obj: dict = {"name": item.name}
        if item.quantity is not None:
            obj["quantity"] = item.quantity
        if item.unit is not None:
            obj["unit"] = item.unit
        if item.spec is not None:
            obj["spec"] = item.spec
        items.append(obj)
    return {
        "id": doc.id,
        "fields": dict(doc.fields),
        "paragraphs": [p.text for p in doc.paragraphs],
        "tables": [
            {"field_names": list(t.field_names), "rows": [list(r) for r in t.rows]}
            for t in doc.tables
        ],
        "purchase_items": items,
    }


def serialize_document(doc: TenderDocument, format: str = "json") -> str:
    """Render a document as canonical JSON (round-trips through parse_document)
    or as markdown (id header, paragraphs, pipe tables)."""
    if format == "json":
        return json.dumps(document_to_dict(doc), ensure_ascii=False)
    if format == "markdown":
        lines = [f"# {doc.id}"]
        for para in doc.paragraphs:
            lines.append("")
            lines.append(para.text)
        for table in doc.tables:
            lines.append("")
            lines.append("| " + " | ".join(c.replace("|", "\\|") for c in table.field_names) + " |")
            lines.append("|" + "---|" * len(table.field_names))
            for row in table.rows:
                lines.append("| " + " | ".join(c.replace("|", "\\|") for c in row) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r}")


# --- corpus store -------------------------------------------------------------

class Corpus:
    """Immutable collection of unique-id documents with content fingerprint."""

    def __init__(self, documents: Iterable[TenderDocument]):
        self.documents: tuple[TenderDocument, ...] = tuple(documents)
        self.by_id: dict[str, TenderDocument] = {}
        for i, doc in enumerate(self.documents):
            if doc.id in self.by_id:
                raise DuplicateIdError(doc.id, i + 1)
            self.by_id[doc.id] = doc

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[TenderDocument]:
        return iter(self.documents)

    def get(self, doc_id: str) -> Optional[TenderDocument]:
        return self.by_id.get(doc_id)

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        for doc in self.documents:
            digest.update(serialize_document(doc, "json").encode("utf-8"))
            digest.update(b"\n")
        return digest.hexdigest()

    def with_documents(self, extra: Iterable[TenderDocument]) -> "Corpus":
        return Corpus(list(self.documents) + list(extra))


def load_corpus(path: str | Path) -> Corpus:
    """Load a JSONL corpus file; rejects duplicate ids and bad lines by number."""
    documents: list[TenderDocument] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = parse_document(line)
            except SchemaError as exc:
                raise SchemaError(f"line {line_no}: {exc.path}", str(exc)) from exc
            if doc.id in seen:
                raise DuplicateIdError(doc.id, line_no)
            seen[doc.id] = line_no
            documents.append(doc)
    return Corpus(documents)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus:
            fh.write(serialize_document(doc, "json") + "\n")


def normalize_key(name: str) -> str:
    """Field name to tag-key form: lowercase, non [a-z0-9_.] runs become ``_``."""
    key = re.sub(r"[^a-z0-9_.]+", "_", name.lower()).strip("_")
    return key


__all__ = [
    "Corpus",
    "ParagraphBlock",
    "PurchaseItem",
    "SmartTag",
    "TableBlock",
    "TenderDocument",
    "document_from_dict",
    "document_to_dict",
    "extract_smart_tags",
    "load_corpus",
    "normalize_key",
    "parse_document",
    "render_tags",
    "save_corpus",
    "scan_tags",
    "serialize_document",
    "validate_document",
]
