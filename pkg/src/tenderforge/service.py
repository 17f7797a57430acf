"""HTTP service exposing the drafting pipeline.

Endpoints are thin wrappers over the library operations; the only state is
the loaded corpus/indexes/graph plus a session store that snapshots to JSONL
on every mutation. Domain errors map to JSON bodies carrying the error class
name as a machine-readable code.
"""

from __future__ import annotations

import logging
import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import AppConfig, build_embedding_provider, build_llm_client
from .corpus import (
    Corpus,
    PurchaseItem,
    TenderDocument,
    document_from_dict,
    document_to_dict,
    load_corpus,
    save_corpus,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    DuplicateIdError,
    EmptyCurrentList,
    EmptyGold,
    EmptyQuery,
    EmptyTaxonomy,
    IndexCorpusMismatch,
    MalformedLineError,
    NoTagsError,
    NotReadyError,
    ProtocolParseError,
    ProviderError,
    SchemaError,
    SessionClosedError,
    TagGrammarError,
    TenderForgeError,
    UnknownKeyError,
)
from .evaluation import EvaluationReport, evaluate
from .generation import (
    AgentSession,
    fill_template,
    open_session,
    session_from_dict,
    session_to_dict,
    submit_answer,
)
from .knowledge import (
    empty_graph,
    load_taxonomy,
    load_triples,
    query_contains,
    refine_purchase_list,
)
from .rerank import ListDistance, rerank
from .retrieval import (
    IndexBundle,
    Requirement,
    ScoredCandidate,
    build_index,
    load_index,
    retrieve,
    save_index,
)

logger = logging.getLogger(__name__)


class NotFoundError(TenderForgeError):
    pass


STATUS_BY_ERROR = {
    SchemaError: 400,
    TagGrammarError: 400,
    EmptyQuery: 400,
    EmptyCurrentList: 400,
    EmptyTaxonomy: 400,
    EmptyGold: 400,
    ConfigError: 400,
    MalformedLineError: 400,
    NotFoundError: 404,
    UnknownKeyError: 404,
    DuplicateIdError: 409,
    IndexCorpusMismatch: 409,
    SessionClosedError: 409,
    NotReadyError: 409,
    NoTagsError: 409,
    ProviderError: 502,
    ProtocolParseError: 502,
    DimensionMismatch: 500,
}


class SessionStore:
    """In-memory sessions with JSONL snapshots (last line per id wins)."""

    def __init__(self, snapshot_path: Optional[str] = None):
        self.snapshot_path = snapshot_path
        self.sessions: dict[str, AgentSession] = {}
        self._counter = 0
        if snapshot_path and Path(snapshot_path).exists():
            self._load(snapshot_path)

    def _load(self, path: str) -> None:
        import json

        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                session = session_from_dict(json.loads(line))
                self.sessions[session.session_id] = session
                if session.session_id.startswith("s-"):
                    try:
                        self._counter = max(self._counter, int(session.session_id[2:]))
                    except ValueError:
                        pass

    def new_id(self) -> str:
        self._counter += 1
        return f"s-{self._counter:06d}"

    def get(self, session_id: str) -> AgentSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"session {session_id!r} not found")
        return session

    def put(self, session: AgentSession) -> None:
        import json

        self.sessions[session.session_id] = session
        if self.snapshot_path:
            with open(self.snapshot_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(session_to_dict(session), ensure_ascii=False) + "\n")


class ServiceState:
    def __init__(self, config: AppConfig):
        self.config = config
        self.provider = build_embedding_provider(config)
        self.llm = build_llm_client(config)
        self.lock = threading.Lock()
        self.corpus = (
            load_corpus(config.corpus_path)
            if config.corpus_path and Path(config.corpus_path).exists()
            else Corpus([])
        )
        self.indexes: Optional[IndexBundle] = (
            load_index(config.index_path)
            if config.index_path and Path(config.index_path).exists()
            else None
        )
        self.graph = (
            load_triples(config.triples_path)
            if config.triples_path and Path(config.triples_path).exists()
            else empty_graph()
        )
        self.taxonomy = (
            load_taxonomy(config.taxonomy_path)
            if config.taxonomy_path and Path(config.taxonomy_path).exists()
            else []
        )
        self.sessions = SessionStore(config.sessions_path)
        self.generated: dict[str, TenderDocument] = {}

    def current_indexes(self) -> IndexBundle:
        indexes = self.indexes
        if indexes is None:
            raise IndexCorpusMismatch("no index built; POST /index/build first")
        if indexes.fingerprint != self.corpus.fingerprint():
            raise IndexCorpusMismatch("index is stale; rebuild against the current corpus")
        return indexes

    def find_document(self, doc_id: str) -> TenderDocument:
        doc = self.generated.get(doc_id) or self.corpus.get(doc_id)
        if doc is None:
            raise NotFoundError(f"document {doc_id!r} not found")
        return doc


# --- wire models -----------------------------------------------------------------

class ItemModel(BaseModel):
    name: str
    quantity: Optional[float] = None
    unit: Optional[str] = None
    spec: Optional[str] = None

    def to_item(self) -> PurchaseItem:
        return PurchaseItem(name=self.name, quantity=self.quantity, unit=self.unit, spec=self.spec)


class RetrieveRequest(BaseModel):
    fields: dict[str, str]
    c_list: list[ItemModel] = Field(default_factory=list)
    k: Optional[int] = None


class RerankRequest(BaseModel):
    candidate_ids: list[str]
    c_list: list[ItemModel]


class SessionRequest(BaseModel):
    template_id: str
    fields: dict[str, str] = Field(default_factory=dict)


class AnswerRequest(BaseModel):
    key: str
    value: str


class GenerateRequest(BaseModel):
    force: bool = False


class RefineRequest(BaseModel):
    fields: dict[str, str] = Field(default_factory=dict)
    c_list: list[ItemModel] = Field(default_factory=list)


class EvaluateRequest(BaseModel):
    gen_id: Optional[str] = None
    gen_doc: Optional[dict] = None
    gold_id: Optional[str] = None
    gold_doc: Optional[dict] = None
    alpha: Optional[float] = None


def _list_dist_view(value: Optional[ListDistance]) -> Optional[dict]:
    if value is None:
        return None
    return {
        "value": value.value,
        "per_item": [
            {"current_index": m.current_index, "best_index": m.best_index, "dist": m.dist}
            for m in value.per_item
        ],
    }


def candidate_view(candidate: ScoredCandidate) -> dict:
    return {
        "doc_id": candidate.doc_id,
        "d_score": candidate.d_score,
        "field_scores": {
            name: {"embedding": fs.embedding, "vocabulary": fs.vocabulary}
            for name, fs in candidate.field_scores.items()
        },
        "list_dist": _list_dist_view(candidate.list_dist),
    }


def session_view(session: AgentSession) -> dict:
    view = session_to_dict(session)
    del view["template"]
    return view


def report_view(report: EvaluationReport) -> dict:
    return {
        "para_score": report.para_score,
        "table_score": report.table_score,
        "score": report.score,
        "per_paragraph": list(report.per_paragraph),
        "per_table": list(report.per_table),
        "table_matching": {str(k): v for k, v in report.table_matching.items()},
        "warnings": list(report.warnings),
    }


def create_app(config: AppConfig) -> FastAPI:
    state = ServiceState(config)
    app = FastAPI(title="tenderforge", version="0.1.0")
    app.state.service = state

    @app.exception_handler(TenderForgeError)
    async def domain_error_handler(request: Request, exc: TenderForgeError):
        status = STATUS_BY_ERROR.get(type(exc), 500)
        return JSONResponse(status_code=status, content={"code": exc.code, "message": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {
            "corpus_size": len(state.corpus),
            "index_fingerprint": state.indexes.fingerprint if state.indexes else None,
        }

    @app.post("/corpus/documents", status_code=201)
    async def add_documents(request: Request):
        try:
            body = await request.json()
        except ValueError as exc:
            raise SchemaError("$", f"request body is not valid JSON: {exc}") from exc
        docs = [document_from_dict(obj) for obj in (body if isinstance(body, list) else [body])]
        with state.lock:
            state.corpus = state.corpus.with_documents(docs)
            if config.corpus_path:
                save_corpus(state.corpus, config.corpus_path)
        return {"added": [d.id for d in docs], "corpus_size": len(state.corpus)}

    @app.get("/corpus/documents/{doc_id}")
    def get_document(doc_id: str):
        return {"document": document_to_dict(state.find_document(doc_id))}

    @app.post("/index/build")
    def index_build():
        with state.lock:
            indexes = build_index(state.corpus, state.provider)
            state.indexes = indexes
            if config.index_path:
                save_index(indexes, config.index_path)
        return {"fingerprint": indexes.fingerprint, "documents": len(state.corpus)}

    @app.post("/retrieve")
    def retrieve_endpoint(body: RetrieveRequest):
        indexes = state.current_indexes()
        requirement = Requirement(
            fields=body.fields, c_list=tuple(i.to_item() for i in body.c_list)
        )
        candidates = retrieve(
            requirement, indexes, state.provider, body.k or config.retrieve_k, corpus=state.corpus
        )
        if requirement.c_list:
            candidates = rerank(
                candidates, state.corpus, requirement.c_list, config.rerank_alpha, state.provider
            )
        return {"candidates": [candidate_view(c) for c in candidates]}

    @app.post("/rerank")
    def rerank_endpoint(body: RerankRequest):
        candidates = []
        for doc_id in body.candidate_ids:
            state.find_document(doc_id)
            candidates.append(ScoredCandidate(doc_id=doc_id, field_scores={}, d_score=0.0))
        ranked = rerank(
            candidates,
            state.corpus,
            [i.to_item() for i in body.c_list],
            config.rerank_alpha,
            state.provider,
        )
        return {"candidates": [candidate_view(c) for c in ranked]}

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionRequest):
        template = state.corpus.get(body.template_id) or state.generated.get(body.template_id)
        if template is None:
            raise NotFoundError(f"template {body.template_id!r} not found")
        with state.lock:
            session = open_session(
                Requirement(fields=body.fields), template, session_id=state.sessions.new_id()
            )
            state.sessions.put(session)
        return session_view(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_view(state.sessions.get(session_id))

    @app.post("/sessions/{session_id}/answers")
    def answer(session_id: str, body: AnswerRequest):
        with state.lock:
            session = state.sessions.get(session_id)
            submit_answer(session, body.key, body.value)
            state.sessions.put(session)
        return session_view(session)

    @app.post("/sessions/{session_id}/generate")
    def generate(session_id: str, body: GenerateRequest = GenerateRequest()):
        with state.lock:
            session = state.sessions.get(session_id)
            doc = fill_template(session, state.llm, force=body.force)
            state.sessions.put(session)
            state.generated[doc.id] = doc
        return {"document": document_to_dict(doc), "session": session_view(session)}

    @app.post("/documents/{doc_id}/refine")
    def refine(doc_id: str, body: RefineRequest):
        doc = state.find_document(doc_id)
        requirement = Requirement(
            fields=body.fields, c_list=tuple(i.to_item() for i in body.c_list)
        )
        result = refine_purchase_list(
            doc, requirement, state.graph, state.taxonomy, config.kb_theta, state.provider
        )
        with state.lock:
            state.generated[doc_id] = result.document
        return {
            "document": document_to_dict(result.document),
            "dropped": [
                {"item": {"name": d.item.name}, "dist": d.dist, "best_match": d.best_match}
                for d in result.dropped
            ],
            "warnings": list(result.warnings),
            "source": result.source,
            "theta": config.kb_theta,
        }

    @app.post("/evaluate")
    def evaluate_endpoint(body: EvaluateRequest):
        if body.gen_doc is not None:
            gen = document_from_dict(body.gen_doc)
        elif body.gen_id is not None:
            gen = state.find_document(body.gen_id)
        else:
            raise SchemaError("gen_id|gen_doc", "one of them is required")
        if body.gold_doc is not None:
            gold = document_from_dict(body.gold_doc)
        elif body.gold_id is not None:
            gold = state.find_document(body.gold_id)
        else:
            raise SchemaError("gold_id|gold_doc", "one of them is required")
        alpha = config.rerank_alpha if body.alpha is None else body.alpha
        return report_view(evaluate(gen, gold, state.provider, alpha))

    @app.get("/kb/entities")
    def kb_entities(contains: str = ""):
        if not contains:
            raise SchemaError("contains", "query parameter is required")
        subgraph = query_contains(state.graph, contains)
        return {
            "entities": [{"id": e.id, "name": e.name, "label": e.label} for e in subgraph.entities],
            "relations": [
                {"src": r.src, "rel_type": r.rel_type, "dst": r.dst} for r in subgraph.relations
            ],
        }

    return app


def serve(config: AppConfig) -> None:  # pragma: no cover - exercised via CLI
    import uvicorn

    uvicorn.run(create_app(config), host=config.server_host, port=config.server_port)


__all__ = ["NotFoundError", "STATUS_BY_ERROR", "SessionStore", "ServiceState", "create_app", "serve"]
