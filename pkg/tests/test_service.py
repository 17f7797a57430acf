import json

import pytest
from fastapi.testclient import TestClient

from tenderforge.config import AppConfig
from tenderforge.corpus import document_to_dict, load_corpus
from tenderforge.retrieval import Requirement, build_index, retrieve
from tenderforge.service import SessionStore, create_app
from tenderforge.text_metrics import HashedTrigramProvider

TEMPLATE = {
    "id": "t1",
    "fields": {"project name": "influenza testing", "purchaser unit": "city hospital"},
    "paragraphs": [
        "Notice by {{purchaser_unit}} for {{project_name}}.",
        "Respond before {{deadline}}.",
    ],
    "tables": [{"field_names": ["name", "quantity"], "rows": [["pcr kit", "2"]]}],
    "purchase_items": [{"name": "pcr kit", "quantity": 2}],
}
OTHER = {
    "id": "t2",
    "fields": {"project name": "office furniture", "purchaser unit": "school"},
    "paragraphs": ["Furniture tender."],
    "tables": [],
    "purchase_items": [{"name": "desk"}, {"name": "chair"}],
}


@pytest.fixture
def service(tmp_path):
    corpus_path = tmp_path / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for doc in (TEMPLATE, OTHER):
            fh.write(json.dumps(doc) + "\n")
    triples = tmp_path / "kb.tsv"
    triples.write_text(
        "pcr kit\tis the procurement item for\tinfluenza testing project\n", encoding="utf-8"
    )
    taxonomy = tmp_path / "tax.jsonl"
    taxonomy.write_text('{"name": "pcr kit"}\n{"name": "desk"}\n', encoding="utf-8")
    config = AppConfig(
        corpus_path=str(corpus_path),
        index_path=str(tmp_path / "index.json"),
        triples_path=str(triples),
        taxonomy_path=str(taxonomy),
        sessions_path=str(tmp_path / "sessions.jsonl"),
    )
    app = create_app(config)
    return TestClient(app), config


def build(client):
    response = client.post("/index/build")
    assert response.status_code == 200
    return response.json()


class TestHealthAndIndex:
    def test_healthz(self, service):
        client, _ = service
        body = client.get("/healthz").json()
        assert body["corpus_size"] == 2
        assert body["index_fingerprint"] is None
        build(client)
        assert client.get("/healthz").json()["index_fingerprint"]

    def test_retrieve_without_index(self, service):
        client, _ = service
        response = client.post("/retrieve", json={"fields": {"project name": "influenza"}})
        assert response.status_code == 409
        assert response.json()["code"] == "IndexCorpusMismatch"

    def test_stale_index_rejected(self, service):
        client, _ = service
        build(client)
        new_doc = dict(TEMPLATE, id="t3")
        assert client.post("/corpus/documents", json=new_doc).status_code == 201
        response = client.post("/retrieve", json={"fields": {"project name": "influenza"}})
        assert response.status_code == 409

    def test_duplicate_document(self, service):
        client, _ = service
        response = client.post("/corpus/documents", json=TEMPLATE)
        assert response.status_code == 409
        assert response.json()["code"] == "DuplicateIdError"

    def test_schema_error_mapped(self, service):
        client, _ = service
        response = client.post("/corpus/documents", json={"id": "x"})
        assert response.status_code == 400
        assert response.json()["code"] == "SchemaError"


class TestRetrieve:
    def test_matches_library_call(self, service):
        client, config = service
        build(client)
        got = client.post(
            "/retrieve", json={"fields": {"project name": "influenza testing"}, "k": 2}
        ).json()["candidates"]

        corpus = load_corpus(config.corpus_path)
        provider = HashedTrigramProvider(config.embedding.dimension)
        indexes = build_index(corpus, provider)
        expected = retrieve(
            Requirement(fields={"project name": "influenza testing"}), indexes, provider, 2
        )
        assert [c["doc_id"] for c in got] == [c.doc_id for c in expected]
        for g, e in zip(got, expected):
            assert g["d_score"] == e.d_score  # bit-identical through JSON
            for fname, fs in e.field_scores.items():
                assert g["field_scores"][fname]["embedding"] == fs.embedding
                assert g["field_scores"][fname]["vocabulary"] == fs.vocabulary

    def test_c_list_triggers_rerank(self, service):
        client, _ = service
        build(client)
        got = client.post(
            "/retrieve",
            json={
                "fields": {"project name": "tender"},
                "c_list": [{"name": "desk"}, {"name": "chair"}],
                "k": 2,
            },
        ).json()["candidates"]
        assert got[0]["doc_id"] == "t2"
        assert got[0]["list_dist"]["value"] == pytest.approx(0.0, abs=1e-9)

    def test_rerank_endpoint(self, service):
        client, _ = service
        got = client.post(
            "/rerank",
            json={"candidate_ids": ["t1", "t2"], "c_list": [{"name": "desk"}]},
        ).json()["candidates"]
        assert got[0]["doc_id"] == "t2"

    def test_rerank_unknown_id(self, service):
        client, _ = service
        response = client.post(
            "/rerank", json={"candidate_ids": ["ghost"], "c_list": [{"name": "desk"}]}
        )
        assert response.status_code == 404


class TestSessionFlow:
    def open(self, client):
        return client.post(
            "/sessions",
            json={
                "template_id": "t1",
                "fields": {"project name": "new flu drive", "purchaser unit": "north clinic"},
            },
        ).json()

    def test_full_flow(self, service):
        client, _ = service
        session = self.open(client)
        assert session["state"] == "collecting"
        assert session["missing"] == ["deadline"]

        response = client.post(
            f"/sessions/{session['session_id']}/answers",
            json={"key": "deadline", "value": "2026-09-01"},
        )
        assert response.json()["state"] == "ready"

        generated = client.post(f"/sessions/{session['session_id']}/generate", json={}).json()
        doc = generated["document"]
        assert "2026-09-01" in doc["paragraphs"][1]
        assert "{{" not in json.dumps(doc)

        refined = client.post(
            f"/documents/{doc['id']}/refine",
            json={"fields": {"project name": "new flu drive"}, "c_list": [{"name": "pcr kit"}]},
        ).json()
        assert [i["name"] for i in refined["document"]["purchase_items"]] == ["pcr kit"]

        report = client.post(
            "/evaluate", json={"gen_id": doc["id"], "gold_id": doc["id"]}
        ).json()
        assert report["score"] == pytest.approx(100.0, abs=1e-4)

    def test_unknown_answer_key_is_404(self, service):
        client, _ = service
        session = self.open(client)
        response = client.post(
            f"/sessions/{session['session_id']}/answers", json={"key": "bogus", "value": "x"}
        )
        assert response.status_code == 404
        assert response.json()["code"] == "UnknownKeyError"

    def test_generate_not_ready_is_409(self, service):
        client, _ = service
        session = self.open(client)
        response = client.post(f"/sessions/{session['session_id']}/generate", json={})
        assert response.status_code == 409
        assert response.json()["code"] == "NotReadyError"

    def test_force_generate(self, service):
        client, _ = service
        session = self.open(client)
        doc = client.post(
            f"/sessions/{session['session_id']}/generate", json={"force": True}
        ).json()["document"]
        assert "[MISSING:deadline]" in doc["paragraphs"][1]

    def test_unknown_session_404(self, service):
        client, _ = service
        assert client.get("/sessions/nope").status_code == 404

    def test_unknown_template_404(self, service):
        client, _ = service
        response = client.post("/sessions", json={"template_id": "ghost", "fields": {}})
        assert response.status_code == 404

    def test_sessions_persist_across_restart(self, service, tmp_path):
        client, config = service
        session = self.open(client)
        client.post(
            f"/sessions/{session['session_id']}/answers",
            json={"key": "deadline", "value": "2026-09-01"},
        )
        store = SessionStore(config.sessions_path)
        restored = store.get(session["session_id"])
        assert restored.state == "ready"
        assert restored.accumulated_info["deadline"] == "2026-09-01"
        assert store.new_id() != session["session_id"]


class TestRestart:
    def test_index_and_sessions_survive_restart(self, service, tmp_path):
        client, config = service
        fingerprint = build(client)["fingerprint"]
        session = client.post(
            "/sessions", json={"template_id": "t1", "fields": {"project name": "x"}}
        ).json()

        fresh = TestClient(create_app(config))  # same snapshot files
        health = fresh.get("/healthz").json()
        assert health["index_fingerprint"] == fingerprint
        assert fresh.get(f"/sessions/{session['session_id']}").json()["state"] == session["state"]
        ranked = fresh.post("/retrieve", json={"fields": {"project name": "influenza"}})
        assert ranked.status_code == 200


class TestKbAndEvaluate:
    def test_kb_entities(self, service):
        client, _ = service
        body = client.get("/kb/entities", params={"contains": "influenza"}).json()
        names = [e["name"] for e in body["entities"]]
        assert "influenza testing project" in names
        assert "pcr kit" in names

    def test_kb_requires_param(self, service):
        client, _ = service
        assert client.get("/kb/entities").status_code == 400

    def test_evaluate_inline_docs(self, service):
        client, _ = service
        body = client.post(
            "/evaluate", json={"gen_doc": TEMPLATE, "gold_doc": TEMPLATE}
        ).json()
        assert body["score"] == pytest.approx(100.0, abs=1e-4)

    def test_evaluate_requires_gen(self, service):
        client, _ = service
        assert client.post("/evaluate", json={"gold_id": "t1"}).status_code == 400

    def test_get_document(self, service):
        client, _ = service
        body = client.get("/corpus/documents/t1").json()
        assert body["document"]["id"] == "t1"
        assert body["document"] == document_to_dict(
            load_corpus_doc()
        )


def load_corpus_doc():
    from tenderforge.corpus import document_from_dict

    return document_from_dict(TEMPLATE)
