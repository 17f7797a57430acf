"""Acceptance suite: one test per release criterion, each printing a PASS/FAIL
line (run with ``pytest tests/test_acceptance.py -s`` to see them inline).

Everything runs offline against the hashed-trigram embedding provider and the
deterministic mock LLM; oracles are re-implemented here from the raw formulas
so they stay independent of the library code paths they check.
"""

import math
import random
import time

import pytest

from tenderforge.corpus import Corpus, ParagraphBlock, PurchaseItem, TableBlock, TenderDocument
from tenderforge.evaluation import evaluate
from tenderforge.experiment import (
    ExperimentConfig,
    generate_synthetic_cases,
    generate_synthetic_corpus,
    run_experiment,
)
from tenderforge.generation import (
    ALL_INFO_TOKEN,
    MISSING_SENTENCE,
    MockLLMClient,
    detect_missing,
    fill_template,
    open_session,
    parse_protocol_reply,
    serialize_document,
    submit_answer,
)
from tenderforge.knowledge import KnowledgeGraph, classify_item, load_triples, query_contains
from tenderforge.rerank import rerank
from tenderforge.retrieval import Requirement, ScoredCandidate, build_index, retrieve, term_weights, tokenize
from tenderforge.text_metrics import (
    HashedTrigramProvider,
    cosine_similarity,
    edit_dist,
    embedding_dist,
    ngram_dist,
)

PROVIDER = HashedTrigramProvider(256)
MOCK_LLM = MockLLMClient()

WORDS = [
    "tender", "notice", "kit", "reagent", "delivery", "warranty", "pcr",
    "influenza", "desk", "chair", "detector", "panel", "试剂", "检测", "仪器",
]
FIELD_POOL = ["project name", "purchaser unit", "purpose", "budget"]


def status(criterion: str, passed: bool, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"{'PASS' if passed else 'FAIL'}: {criterion}{suffix}")


def words(rng, n_max, n_min=1):
    return " ".join(rng.choices(WORDS, k=rng.randint(n_min, n_max)))


# --- independent oracles -------------------------------------------------------


def oracle_retrieval_ranking(corpus, requirement, provider):
    """Field-wise hybrid scoring recomputed from scratch (no index structures)."""
    scores = {}
    for doc in corpus:
        total = 0.0
        for fname, qtext in requirement.fields.items():
            if not qtext.strip():
                continue
            stored = doc.fields.get(fname)
            embed = (
                max(0.0, cosine_similarity(provider.embed(qtext), provider.embed(stored)))
                if stored is not None
                else 0.0
            )
            terms = list(dict.fromkeys(tokenize(qtext)))
            vocab = 0.0
            if terms:
                sizes = {
                    t: sum(
                        1
                        for other in corpus
                        if fname in other.fields and t in tokenize(other.fields[fname])
                    )
                    for t in terms
                }
                inverses = {t: 1.0 / (sizes[t] + 1.0) for t in terms}
                norm = sum(inverses.values())
                doc_terms = set(tokenize(doc.fields[fname])) if fname in doc.fields else set()
                matched = [t for t in terms if t in doc_terms]
                vocab = (sum(inverses[t] / norm for t in matched) + len(matched) / len(terms)) / 2.0
            total += (embed + vocab) / 2.0
        scores[doc.id] = total
    return sorted(scores, key=lambda d: (-scores[d], d)), scores


def oracle_list_value(c_list, h_list, alpha, provider):
    total = 0.0
    for c in c_list:
        if not h_list:
            total += 1.0
            continue
        total += min(
            (
                embedding_dist(c.name, h.name, provider)
                + ngram_dist(c.name, h.name)
                + edit_dist(c.name, h.name)
            )
            / 3.0
            for h in h_list
        )
    return (total + alpha * abs(len(h_list) - len(c_list))) / len(c_list)


def random_retrieval_corpus(rng):
    docs = []
    for i in range(rng.randint(2, 20)):
        chosen = rng.sample(FIELD_POOL, rng.randint(1, 3))
        docs.append(
            TenderDocument(id=f"d{i:02d}", fields={f: words(rng, 6) for f in chosen})
        )
    return Corpus(docs)


def random_document(rng, doc_id):
    fields = {f"field {i}": words(rng, 4) for i in range(rng.randint(1, 3))}
    paragraphs = tuple(ParagraphBlock(i, words(rng, 10)) for i in range(rng.randint(0, 5)))
    tables = tuple(
        TableBlock(
            field_names=tuple(words(rng, 2) for _ in range(rng.randint(1, 3))),
            rows=tuple(
                tuple(words(rng, 3) for _ in range(cols))
                for _ in range(rng.randint(0, 3))
            ),
        )
        for cols in [rng.randint(1, 3)]
        for _ in range(rng.randint(0, 2))
    )
    # regenerate rows against each table's own column count
    tables = tuple(
        TableBlock(
            field_names=t.field_names,
            rows=tuple(
                tuple(words(rng, 3) for _ in t.field_names) for _ in range(rng.randint(0, 3))
            ),
        )
        for t in tables
    )
    items = tuple(PurchaseItem(name=words(rng, 3)) for _ in range(rng.randint(0, 3)))
    return TenderDocument(
        id=doc_id, fields=fields, paragraphs=paragraphs, tables=tables, purchase_items=items
    )


# --- experiment fixture (shared by ablation/baseline/runtime criteria) ----------

ABLATION_SEED = 7


@pytest.fixture(scope="module")
def ablation_run():
    started = time.monotonic()
    corpus = generate_synthetic_corpus(50, seed=ABLATION_SEED)
    config = ExperimentConfig(
        variants=["full", "no_fill", "no_retrieval", "llm_only"], seed=ABLATION_SEED
    )
    cases = generate_synthetic_cases(corpus, 20, config, PROVIDER, MOCK_LLM)
    result = run_experiment(corpus, cases, config, PROVIDER, MOCK_LLM)
    elapsed = time.monotonic() - started
    return result, elapsed


# --- criteria -------------------------------------------------------------------


def test_retrieval_oracle_equivalence():
    criterion = "retrieval ranking equals brute-force recomputation on 25 random corpora"
    rng = random.Random(101)
    started = time.monotonic()
    mismatches = 0
    for _ in range(25):
        corpus = random_retrieval_corpus(rng)
        fields = {f: words(rng, 4) for f in rng.sample(FIELD_POOL, rng.randint(1, 2))}
        requirement = Requirement(fields=fields)
        indexes = build_index(corpus, PROVIDER)
        got = retrieve(requirement, indexes, PROVIDER, k=len(corpus))
        expected_ids, expected_scores = oracle_retrieval_ranking(corpus, requirement, PROVIDER)
        if [c.doc_id for c in got] != expected_ids:
            mismatches += 1
            continue
        for c in got:
            if abs(c.d_score - expected_scores[c.doc_id]) > 1e-12:
                mismatches += 1
                break
    elapsed = time.monotonic() - started
    ok = mismatches == 0 and elapsed < 10.0
    status(criterion, ok, f"{elapsed:.2f}s, {mismatches} mismatches")
    assert mismatches == 0
    assert elapsed < 10.0


def test_rerank_oracle_equivalence():
    criterion = "rerank order equals brute-force list-distance enumeration on 25 random sets"
    rng = random.Random(202)
    started = time.monotonic()
    mismatches = 0
    for _ in range(25):
        docs = [
            TenderDocument(
                id=f"d{i}",
                fields={"f": words(rng, 3)},
                purchase_items=tuple(
                    PurchaseItem(name=words(rng, 2)) for _ in range(rng.randint(0, 6))
                ),
            )
            for i in range(rng.randint(2, 8))
        ]
        corpus = Corpus(docs)
        candidates = [
            ScoredCandidate(doc_id=d.id, field_scores={}, d_score=0.0) for d in docs
        ]
        rng.shuffle(candidates)
        c_list = [PurchaseItem(name=words(rng, 2)) for _ in range(rng.randint(1, 6))]
        alpha = rng.choice([0.0, 0.3, 0.5, 1.0])
        ranked = rerank(candidates, corpus, c_list, alpha, PROVIDER)
        values = {
            c.doc_id: oracle_list_value(
                c_list, list(corpus.by_id[c.doc_id].purchase_items), alpha, PROVIDER
            )
            for c in candidates
        }
        original = {c.doc_id: i for i, c in enumerate(candidates)}
        expected = sorted(candidates, key=lambda c: (values[c.doc_id], original[c.doc_id]))
        if [c.doc_id for c in ranked] != [c.doc_id for c in expected]:
            mismatches += 1
    elapsed = time.monotonic() - started
    ok = mismatches == 0 and elapsed < 10.0
    status(criterion, ok, f"{elapsed:.2f}s, {mismatches} mismatches")
    assert mismatches == 0
    assert elapsed < 10.0


def test_term_weight_normalization():
    criterion = "term weights sum to 1 +- 1e-9 over 1000 random queries"
    rng = random.Random(303)
    worst = 0.0
    for _ in range(1000):
        vocabulary = [f"t{i}" for i in range(12)]
        postings = {
            t: {f"d{j}" for j in range(rng.randint(0, 6))} for t in rng.sample(vocabulary, 8)
        }
        query = rng.choices(vocabulary, k=rng.randint(1, 10))
        total = sum(term_weights(query, postings).values())
        worst = max(worst, abs(total - 1.0))
    ok = worst <= 1e-9
    status(criterion, ok, f"max deviation {worst:.2e}")
    assert ok


def test_metric_identity_on_random_documents():
    criterion = "evaluate(d, d) = 100 +- 1e-4 over 200 random documents, scores bounded, no NaN"
    rng = random.Random(404)
    failures = 0
    for i in range(200):
        doc = random_document(rng, f"doc{i}")
        report = evaluate(doc, doc, PROVIDER)
        values = (report.score, report.para_score, report.table_score, *report.per_paragraph)
        if abs(report.score - 100.0) > 1e-4:
            failures += 1
        if any(math.isnan(v) for v in values):
            failures += 1
        if not (0.0 <= report.score <= 100.0 + 1e-9):
            failures += 1
    # cross pairs: bounded, finite
    for i in range(50):
        gen = random_document(rng, f"g{i}")
        gold = random_document(rng, f"h{i}")
        report = evaluate(gen, gold, PROVIDER)
        for v in (report.score, report.para_score, report.table_score):
            if math.isnan(v) or not (0.0 <= v <= 100.0 + 1e-9):
                failures += 1
    ok = failures == 0
    status(criterion, ok, f"{failures} failures")
    assert ok


def test_ablation_ordering(ablation_run):
    criterion = "ablation ordering: full > no template filling > random template, gap >= 2.0"
    result, _ = ablation_run
    full = result.mean_score("full")
    no_fill = result.mean_score("no_fill")
    random_template = result.mean_score("no_retrieval")
    gap = full - random_template
    ok = full > no_fill > random_template and gap >= 2.0
    status(
        criterion,
        ok,
        f"full {full:.2f} > no_fill {no_fill:.2f} > random {random_template:.2f}, gap {gap:.2f}",
    )
    assert full > no_fill > random_template
    assert gap >= 2.0


def test_baseline_ordering(ablation_run):
    criterion = "baseline ordering: full > retrieval-only > bare mock LLM"
    result, _ = ablation_run
    full = result.mean_score("full")
    retrieval_only = result.mean_score("no_fill")  # retrieved template, untouched
    llm_only = result.mean_score("llm_only")
    ok = full > retrieval_only > llm_only
    status(
        criterion,
        ok,
        f"full {full:.2f} > retrieval-only {retrieval_only:.2f} > llm-only {llm_only:.2f}",
    )
    assert ok


def test_agent_protocol():
    criterion = "agent sessions close in exactly |uncovered tags| answers; no residual tags"
    rng = random.Random(505)
    failures = 0
    for trial in range(40):
        n_tags = rng.randint(1, 10)
        keys = [f"k{i}" for i in range(n_tags)]
        text = " ".join(f"value of {{{{{k}}}}}" for k in keys)
        template = TenderDocument(
            id=f"tpl{trial}",
            fields={"project name": "x"},
            paragraphs=(ParagraphBlock(0, text),),
        )
        covered = rng.sample(keys, rng.randint(0, n_tags))
        requirement = Requirement(fields={k: "provided" for k in covered})
        session = open_session(requirement, template)
        uncovered = n_tags - len(covered)
        answers = 0
        while session.state == "collecting":
            missing = detect_missing(session, MOCK_LLM)
            if len(missing) != len(session.missing):
                failures += 1
                break
            submit_answer(session, missing[0], f"answer {answers}")
            answers += 1
            if answers > n_tags:
                failures += 1
                break
        if answers != uncovered:
            failures += 1
        doc = fill_template(session, MOCK_LLM)
        if "{{" in serialize_document(doc, "json"):
            failures += 1
    token_ok = (
        parse_protocol_reply(ALL_INFO_TOKEN, {"a"}) == set()
        and parse_protocol_reply(f"{MISSING_SENTENCE} a, b", {"a", "b"}) == {"a", "b"}
    )
    ok = failures == 0 and token_ok
    status(criterion, ok, f"{failures} failures over 40 sessions")
    assert ok


def test_knowledge_base_criteria(tmp_path):
    criterion = "knowledge base: threshold monotonicity, subgraph integrity, loader counts"
    rng = random.Random(606)
    failures = 0

    taxonomy = [PurchaseItem(name=words(rng, 3)) for _ in range(6)]
    for _ in range(200):
        item = PurchaseItem(name=words(rng, 3))
        theta = rng.random()
        theta_higher = theta + (1.0 - theta) * rng.random()
        low = classify_item(item, taxonomy, theta, PROVIDER)
        high = classify_item(item, taxonomy, theta_higher, PROVIDER)
        if low.keep and not high.keep:
            failures += 1

    lines = []
    names = [f"entity {i} {words(rng, 2)}" for i in range(40)]
    seen = set()
    for _ in range(60):
        src, dst = rng.sample(range(40), 2)
        rel = rng.choice(["is a kind of", "is the procurement item for"])
        if (src, rel, dst) not in seen:
            seen.add((src, rel, dst))
            lines.append(f"{names[src]}\t{rel}\t{names[dst]}")
    path = tmp_path / "kb.tsv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    graph = load_triples(path)
    used_names = {n for s, r, d in seen for n in (names[s], names[d])}
    if graph.entity_count != len(used_names) or graph.relation_count != len(seen):
        failures += 1

    for needle in ["entity", "kit", words(rng, 1), "entity 1"]:
        subgraph = query_contains(graph, needle)
        ids = {e.id for e in subgraph.entities}
        for rel in subgraph.relations:
            if rel.src not in ids or rel.dst not in ids:
                failures += 1
    ok = failures == 0
    status(criterion, ok, f"{graph.entity_count} entities / {graph.relation_count} relations loaded")
    assert ok


def test_offline_runtime_budget(ablation_run):
    criterion = "suite runs offline (test provider + mock LLM); ablation block under 2 minutes"
    _, elapsed = ablation_run
    offline = isinstance(PROVIDER, HashedTrigramProvider) and isinstance(MOCK_LLM, MockLLMClient)
    ok = offline and elapsed < 120.0
    status(criterion, ok, f"ablation block {elapsed:.1f}s")
    assert ok
