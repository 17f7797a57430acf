"""Command-line interface: thin wrappers over the library pipeline.

Exit codes: 0 success, 1 domain error, 2 usage error. ``--json`` switches
stdout to machine-readable JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .config import build_embedding_provider, build_llm_client, load_config
from .corpus import (
    PurchaseItem,
    document_from_dict,
    document_to_dict,
    load_corpus,
    parse_document,
    serialize_document,
)
from .errors import TenderForgeError
from .evaluation import evaluate
from .experiment import (
    generate_synthetic_cases,
    generate_synthetic_corpus,
    load_cases,
    load_experiment_config,
    run_experiment,
)
from .generation import detect_missing, fill_template, open_session, submit_answer
from .knowledge import empty_graph, load_taxonomy, load_triples, query_contains, refine_purchase_list
from .rerank import rerank
from .retrieval import Requirement, ScoredCandidate, build_index, load_index, retrieve, save_index


def _parse_pairs(pairs: Optional[list[str]], flag: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise TenderForgeError(f"{flag} expects KEY=VALUE, got {pair!r}")
        out[key] = value
    return out


def _load_items(path: Optional[str]) -> list[PurchaseItem]:
    if not path:
        return []
    text = Path(path).read_text(encoding="utf-8").strip()
    if not text:
        return []
    records = json.loads(text) if text.startswith("[") else [json.loads(line) for line in text.splitlines() if line.strip()]
    return [
        PurchaseItem(
            name=r["name"], quantity=r.get("quantity"), unit=r.get("unit"), spec=r.get("spec")
        )
        for r in records
    ]


def _read_document(path: str):
    return parse_document(Path(path).read_text(encoding="utf-8"))


def _candidate_row(c: ScoredCandidate) -> dict:
    row = {
        "doc_id": c.doc_id,
        "d_score": c.d_score,
        "field_scores": {
            f: {"embedding": fs.embedding, "vocabulary": fs.vocabulary}
            for f, fs in c.field_scores.items()
        },
    }
    if c.list_dist is not None:
        row["list_dist"] = c.list_dist.value
    return row


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, ensure_ascii=False, indent=2))
    else:
        print(human)


# --- subcommand handlers ---------------------------------------------------------

def cmd_ingest(args) -> None:
    corpus = load_corpus(args.corpus)
    payload = {"documents": len(corpus), "fingerprint": corpus.fingerprint()}
    _emit(args, payload, f"{len(corpus)} documents ok (fingerprint {payload['fingerprint'][:12]}...)")


def cmd_build_index(args) -> None:
    config = load_config(args.config)
    corpus = load_corpus(args.corpus)
    indexes = build_index(corpus, build_embedding_provider(config))
    save_index(indexes, args.out)
    payload = {"documents": len(corpus), "fingerprint": indexes.fingerprint, "out": args.out}
    _emit(args, payload, f"indexed {len(corpus)} documents -> {args.out}")


def cmd_retrieve(args) -> None:
    config = load_config(args.config)
    provider = build_embedding_provider(config)
    indexes = load_index(args.index)
    corpus = load_corpus(args.corpus) if args.corpus else None
    requirement = Requirement(
        fields=_parse_pairs(args.field, "--field"),
        c_list=tuple(_load_items(args.items)),
    )
    candidates = retrieve(requirement, indexes, provider, args.k or config.retrieve_k, corpus=corpus)
    if requirement.c_list and corpus is not None:
        candidates = rerank(candidates, corpus, requirement.c_list, args.alpha, provider)
    payload = {"candidates": [_candidate_row(c) for c in candidates]}
    human = "\n".join(f"{i + 1}. {c.doc_id} score={c.d_score:.4f}" for i, c in enumerate(candidates))
    _emit(args, payload, human)


def cmd_rerank(args) -> None:
    config = load_config(args.config)
    provider = build_embedding_provider(config)
    corpus = load_corpus(args.corpus)
    candidates = [
        ScoredCandidate(doc_id=doc_id, field_scores={}, d_score=0.0)
        for doc_id in args.candidates.split(",")
    ]
    ranked = rerank(candidates, corpus, _load_items(args.items), args.alpha, provider)
    payload = {"candidates": [_candidate_row(c) for c in ranked]}
    human = "\n".join(
        f"{i + 1}. {c.doc_id} list_dist={c.list_dist.value:.4f}" if c.list_dist else f"{i + 1}. {c.doc_id}"
        for i, c in enumerate(ranked)
    )
    _emit(args, payload, human)


def cmd_generate(args) -> None:
    config = load_config(args.config)
    llm = build_llm_client(config)
    corpus = load_corpus(args.corpus)
    template = corpus.get(args.template_id)
    if template is None:
        raise TenderForgeError(f"template {args.template_id!r} not found in corpus")
    requirement = Requirement(fields=_parse_pairs(args.field, "--field"))
    session = open_session(requirement, template)
    answers = _parse_pairs(args.answer, "--answer")
    for key in detect_missing(session):
        if key in answers:
            submit_answer(session, key, answers[key])
    doc = fill_template(session, llm, force=args.force)
    rendered = serialize_document(doc, "json")
    if args.out:
        Path(args.out).write_text(rendered + "\n", encoding="utf-8")
    payload = {"document": document_to_dict(doc), "missing": list(session.missing)}
    _emit(args, payload, rendered if not args.out else f"wrote {doc.id} -> {args.out}")


def cmd_refine(args) -> None:
    config = load_config(args.config)
    provider = build_embedding_provider(config)
    doc = _read_document(args.doc)
    graph = load_triples(args.triples) if args.triples else empty_graph()
    taxonomy = load_taxonomy(args.taxonomy) if args.taxonomy else []
    requirement = Requirement(
        fields=_parse_pairs(args.field, "--field"), c_list=tuple(_load_items(args.items))
    )
    result = refine_purchase_list(doc, requirement, graph, taxonomy, args.theta, provider)
    if args.out:
        Path(args.out).write_text(serialize_document(result.document, "json") + "\n", encoding="utf-8")
    payload = {
        "document": document_to_dict(result.document),
        "dropped": [
            {"name": d.item.name, "dist": d.dist, "best_match": d.best_match} for d in result.dropped
        ],
        "warnings": list(result.warnings),
        "source": result.source,
    }
    human = (
        f"kept {len(result.document.purchase_items)} items, dropped {len(result.dropped)}"
        + ("".join(f"\n  - {d.item.name} (dist {d.dist:.3f})" for d in result.dropped))
    )
    _emit(args, payload, human)


def cmd_evaluate(args) -> None:
    config = load_config(args.config)
    provider = build_embedding_provider(config)
    gen = _read_document(args.gen)
    gold = _read_document(args.gold)
    report = evaluate(gen, gold, provider, args.alpha)
    payload = {
        "para_score": report.para_score,
        "table_score": report.table_score,
        "score": report.score,
        "per_paragraph": list(report.per_paragraph),
        "per_table": list(report.per_table),
    }
    _emit(
        args,
        payload,
        f"para_score={report.para_score:.2f} table_score={report.table_score:.2f} score={report.score:.2f}",
    )


def cmd_kb_query(args) -> None:
    graph = load_triples(args.triples)
    subgraph = query_contains(graph, args.contains)
    payload = {
        "entities": [{"id": e.id, "name": e.name, "label": e.label} for e in subgraph.entities],
        "relations": [
            {
                "src": graph.entities[r.src].name,
                "rel_type": r.rel_type,
                "dst": graph.entities[r.dst].name,
            }
            for r in subgraph.relations
        ],
    }
    human = "\n".join(
        [f"{len(subgraph.entities)} entities, {len(subgraph.relations)} relations"]
        + [f"  {r['src']} -[{r['rel_type']}]-> {r['dst']}" for r in payload["relations"]]
    )
    _emit(args, payload, human)


def cmd_experiment(args) -> None:
    config, synthetic = load_experiment_config(args.config_file)
    if synthetic:
        corpus = generate_synthetic_corpus(int(synthetic.get("templates", 50)), config.seed)
        cases = generate_synthetic_cases(corpus, int(synthetic.get("cases", 20)), config)
    else:
        if not args.corpus or not args.cases:
            raise TenderForgeError("--corpus and --cases are required without a synthetic block")
        corpus = load_corpus(args.corpus)
        cases = load_cases(args.cases, corpus)
    result = run_experiment(corpus, cases, config)
    csv = result.to_csv()
    if args.out:
        Path(args.out).write_text(csv, encoding="utf-8")
    if args.markdown:
        print(result.to_markdown())
    elif args.json:
        rows = [
            {
                "variant": r.variant,
                "para_score": r.para_score,
                "table_score": r.table_score,
                "score": r.score,
            }
            for r in result.rows
        ]
        print(json.dumps({"rows": rows}, indent=2))
    else:
        print(csv, end="")


def cmd_serve(args) -> None:  # pragma: no cover - long-running process
    from .service import serve

    serve(load_config(args.config))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tenderforge", description=__doc__)
    parser.add_argument("--config", help="config file (TOML or JSON)")
    parser.add_argument("--json", action="store_true", help="machine-readable JSON output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus file")
    p.add_argument("--corpus", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-index", help="build and save the retrieval indexes")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("retrieve", help="rank historical documents for a requirement")
    p.add_argument("--index", required=True)
    p.add_argument("--corpus", help="corpus file (enables fingerprint check and reranking)")
    p.add_argument("--field", action="append", metavar="NAME=TEXT")
    p.add_argument("--items", help="purchase list file (JSON array or JSONL)")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("rerank", help="re-order candidate ids by purchase-list distance")
    p.add_argument("--corpus", required=True)
    p.add_argument("--candidates", required=True, metavar="ID,ID,...")
    p.add_argument("--items", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("generate", help="fill a template through the agent session")
    p.add_argument("--corpus", required=True)
    p.add_argument("--template-id", required=True)
    p.add_argument("--field", action="append", metavar="NAME=TEXT")
    p.add_argument("--answer", action="append", metavar="KEY=VALUE")
    p.add_argument("--force", action="store_true", help="generate with [MISSING:key] markers")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("refine", help="refine a document's purchase list")
    p.add_argument("--doc", required=True)
    p.add_argument("--triples")
    p.add_argument("--taxonomy")
    p.add_argument("--theta", type=float, default=0.35)
    p.add_argument("--field", action="append", metavar="NAME=TEXT")
    p.add_argument("--items")
    p.add_argument("--out")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("evaluate", help="score a generated document against a gold document")
    p.add_argument("--gen", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("kb-query", help="containment query over the knowledge graph")
    p.add_argument("--triples", required=True)
    p.add_argument("--contains", required=True)
    p.set_defaults(func=cmd_kb_query)

    p = sub.add_parser("experiment", help="run the ablation/baseline experiment")
    p.add_argument("--config-file", required=True, dest="config_file")
    p.add_argument("--corpus")
    p.add_argument("--cases")
    p.add_argument("--out", help="write CSV here as well")
    p.add_argument("--markdown", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except TenderForgeError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error [FileNotFound]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
