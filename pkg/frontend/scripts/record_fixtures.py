#!/usr/bin/env python3
"""Record API fixtures for the frontend tests.

Boots the service in-process (no network) against the fixture corpus and
snapshots the responses of the canonical drafting flow. The integration test
replays the same flow against a real served instance and expects bit-equal
payloads, since every component is deterministic.
"""

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from tenderforge.config import AppConfig
from tenderforge.service import create_app

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

CORPUS = [
    {
        "id": "t1",
        "fields": {
            "project name": "influenza testing services",
            "purchaser unit": "city hospital",
            "budget": "120 thousand",
        },
        "paragraphs": [
            "Public tender notice issued by {{purchaser_unit}} for {{project_name}}.",
            "The procurement covers influenza testing supplies for the laboratory.",
            "Bids must arrive before {{deadline}} and be addressed to {{contact_person}}.",
            "Scope: {{gen:scope|Summarize the influenza testing procurement scope}}",
        ],
        "tables": [
            {
                "field_names": ["field", "value"],
                "rows": [
                    ["project", "{{project_name}}"],
                    ["deadline", "{{deadline}}"],
                    ["contact", "{{contact_person}}"],
                ],
            },
            {
                "field_names": ["name", "quantity", "unit"],
                "rows": [
                    ["pcr kit", "4", "box"],
                    ["reagent pack", "10", "pack"],
                    ["centrifuge tube", "200", "piece"],
                ],
            },
        ],
        "purchase_items": [
            {"name": "pcr kit", "quantity": 4, "unit": "box"},
            {"name": "reagent pack", "quantity": 10, "unit": "pack"},
            {"name": "centrifuge tube", "quantity": 200, "unit": "piece"},
        ],
    },
    {
        "id": "t2",
        "fields": {
            "project name": "office furniture renewal",
            "purchaser unit": "township school",
        },
        "paragraphs": ["Tender for desks and chairs."],
        "tables": [{"field_names": ["name", "quantity"], "rows": [["desk", "30"], ["chair", "60"]]}],
        "purchase_items": [{"name": "desk", "quantity": 30}, {"name": "chair", "quantity": 60}],
    },
    {
        "id": "t3",
        "fields": {
            "project name": "laboratory reagent replenishment",
            "purchaser unit": "research institute",
        },
        "paragraphs": ["Standing order for laboratory reagents and consumables."],
        "tables": [{"field_names": ["name", "quantity"], "rows": [["reagent pack", "25"]]}],
        "purchase_items": [{"name": "reagent pack", "quantity": 25}],
    },
]

TRIPLES = (
    "pcr kit\tis the procurement item for\tinfluenza testing project\n"
    "reagent pack\tis the procurement item for\tinfluenza testing project\n"
    "pcr kit\tis a kind of\ttest kit\n"
)

TAXONOMY = (
    '{"name": "pcr kit"}\n'
    '{"name": "reagent pack"}\n'
    '{"name": "centrifuge tube"}\n'
    '{"name": "desk"}\n'
    '{"name": "chair"}\n'
)

REQUIREMENT_FIELDS = {
    "project name": "influenza testing program",
    "purchaser unit": "north district clinic",
}
C_LIST = [{"name": "pcr kit", "quantity": 2, "unit": "box"}, {"name": "reagent pack"}]
REFINE_C_LIST = C_LIST + [{"name": "granite countertop"}]


def write_inputs() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with open(FIXTURES / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for doc in CORPUS:
            fh.write(json.dumps(doc, ensure_ascii=False) + "\n")
    (FIXTURES / "kb.tsv").write_text(TRIPLES, encoding="utf-8")
    (FIXTURES / "taxonomy.jsonl").write_text(TAXONOMY, encoding="utf-8")


def save(name: str, payload: dict) -> None:
    (FIXTURES / name).write_text(
        json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )


def main() -> int:
    write_inputs()
    config = AppConfig(
        corpus_path=str(FIXTURES / "corpus.jsonl"),
        triples_path=str(FIXTURES / "kb.tsv"),
        taxonomy_path=str(FIXTURES / "taxonomy.jsonl"),
    )
    client = TestClient(create_app(config))

    assert client.post("/index/build").status_code == 200
    save("healthz.json", client.get("/healthz").json())

    retrieve = client.post(
        "/retrieve", json={"fields": REQUIREMENT_FIELDS, "c_list": C_LIST, "k": 3}
    )
    assert retrieve.status_code == 200, retrieve.text
    save("retrieve.json", retrieve.json())

    session = client.post(
        "/sessions", json={"template_id": "t1", "fields": REQUIREMENT_FIELDS}
    )
    assert session.status_code == 201, session.text
    save("session_created.json", session.json())
    session_id = session.json()["session_id"]

    first = client.post(
        f"/sessions/{session_id}/answers", json={"key": "deadline", "value": "2026-09-01"}
    )
    assert first.status_code == 200, first.text
    save("session_after_first_answer.json", first.json())

    second = client.post(
        f"/sessions/{session_id}/answers", json={"key": "contact_person", "value": "Dana Reyes"}
    )
    assert second.status_code == 200, second.text
    save("session_ready.json", second.json())

    generated = client.post(f"/sessions/{session_id}/generate", json={})
    assert generated.status_code == 200, generated.text
    save("generate.json", generated.json())
    doc_id = generated.json()["document"]["id"]

    refined = client.post(
        f"/documents/{doc_id}/refine",
        json={"fields": REQUIREMENT_FIELDS, "c_list": REFINE_C_LIST},
    )
    assert refined.status_code == 200, refined.text
    save("refine.json", refined.json())

    identity = client.post("/evaluate", json={"gen_id": doc_id, "gold_id": doc_id})
    assert identity.status_code == 200, identity.text
    save("evaluate_identity.json", identity.json())

    against_gold = client.post("/evaluate", json={"gen_id": doc_id, "gold_id": "t1"})
    assert against_gold.status_code == 200, against_gold.text
    save("evaluate_vs_template.json", against_gold.json())

    print(f"fixtures written to {FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
