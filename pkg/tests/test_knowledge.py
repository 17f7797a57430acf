import random

import pytest

from tenderforge.corpus import ParagraphBlock, PurchaseItem, TableBlock, TenderDocument
from tenderforge.errors import EmptyTaxonomy, MalformedLineError, SchemaError
from tenderforge.knowledge import (
    ITEM_RELATION,
    KnowledgeGraph,
    classify_item,
    empty_graph,
    load_taxonomy,
    load_triples,
    query_contains,
    refine_purchase_list,
    suggest_items,
)
from tenderforge.retrieval import Requirement


def write_triples(tmp_path, lines, name="kb.tsv"):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def flu_graph(tmp_path):
    lines = [
        "PCR kit\tis the procurement item for\tinfluenza A virus testing project",
        "influenza A virus detection kit\tis a kind of\tTest kit",
        "nucleic acid extraction kit\tis the procurement item for\tinfluenza A virus testing project",
        "office chair\tis the procurement item for\toffice renovation project",
    ]
    return load_triples(write_triples(tmp_path, lines))


class TestLoadTriples:
    def test_shared_entity_counts(self, tmp_path):
        path = write_triples(
            tmp_path,
            ["a\tis a kind of\tb", "a\tis the procurement item for\tc"],
        )
        graph = load_triples(path)
        assert graph.entity_count == 3
        assert graph.relation_count == 2

    def test_duplicate_triples_deduplicated(self, tmp_path):
        path = write_triples(tmp_path, ["a\trel\tb", "a\trel\tb"])
        graph = load_triples(path)
        assert graph.relation_count == 1

    def test_malformed_line_number(self, tmp_path):
        path = write_triples(tmp_path, ["a\trel\tb", "only two\tparts"])
        with pytest.raises(MalformedLineError) as err:
            load_triples(path)
        assert err.value.line == 2

    def test_self_loop_rejected(self, tmp_path):
        path = write_triples(tmp_path, ["a\trel\ta"])
        with pytest.raises(MalformedLineError):
            load_triples(path)

    def test_counts_logged(self, tmp_path, caplog):
        import logging

        path = write_triples(tmp_path, ["a\trel\tb"])
        with caplog.at_level(logging.INFO, logger="tenderforge.knowledge"):
            load_triples(path)
        assert any("2 entities" in r.message and "1 relations" in r.message for r in caplog.records)

    def test_order_insensitive_semantics(self, tmp_path):
        lines = ["a\trel\tb", "c\trel\td"]
        g1 = load_triples(write_triples(tmp_path, lines, "kb1.tsv"))
        g2 = load_triples(write_triples(tmp_path, list(reversed(lines)), "kb2.tsv"))
        names = lambda g: {(g.entities[r.src].name, r.rel_type, g.entities[r.dst].name) for r in g.relations}
        assert names(g1) == names(g2)


class TestQueryContains:
    def test_influenza_neighborhood(self, flu_graph):
        sub = query_contains(flu_graph, "influenza A virus")
        names = {e.name for e in sub.entities}
        assert "influenza A virus testing project" in names
        assert "influenza A virus detection kit" in names
        assert "PCR kit" in names  # 1-hop neighbor
        assert "Test kit" in names
        assert "office chair" not in names

    def test_no_match(self, flu_graph):
        sub = query_contains(flu_graph, "laser cutter")
        assert sub.entities == ()
        assert sub.relations == ()

    def test_full_name_match(self, flu_graph):
        sub = query_contains(flu_graph, "office chair")
        assert any(e.name == "office chair" for e in sub.entities)

    def test_case_insensitive(self, flu_graph):
        assert query_contains(flu_graph, "pcr KIT").entities

    def test_empty_needle_rejected(self, flu_graph):
        with pytest.raises(ValueError):
            query_contains(flu_graph, "")

    def test_referential_integrity(self, flu_graph):
        sub = query_contains(flu_graph, "kit")
        ids = {e.id for e in sub.entities}
        for rel in sub.relations:
            assert rel.src in ids
            assert rel.dst in ids

    def test_deterministic_ordering(self, flu_graph):
        a = query_contains(flu_graph, "kit")
        b = query_contains(flu_graph, "kit")
        assert a == b
        assert [e.id for e in a.entities] == sorted(e.id for e in a.entities)


class TestSuggestItems:
    def test_traversal_from_project_mention(self, flu_graph):
        req = Requirement(fields={"project name": "influenza testing"})
        names = [i.name for i in suggest_items(flu_graph, req)]
        assert "PCR kit" in names
        assert "nucleic acid extraction kit" in names
        assert "office chair" not in names

    def test_no_matching_terms(self, flu_graph):
        req = Requirement(fields={"project name": "zzz qqq"})
        assert suggest_items(flu_graph, req) == []

    def test_duplicate_paths_deduplicated(self, tmp_path):
        lines = [
            "PCR kit\tis the procurement item for\tinfluenza testing project",
            "PCR kit\tis the procurement item for\tinfluenza survey project",
        ]
        graph = load_triples(write_triples(tmp_path, lines))
        req = Requirement(fields={"purpose": "influenza testing survey"})
        names = [i.name for i in suggest_items(graph, req)]
        assert names.count("PCR kit") == 1

    def test_ordering_by_match_count(self, tmp_path):
        lines = [
            "PCR kit\tis the procurement item for\tinfluenza virus testing project",
            "swab set\tis the procurement item for\tinfluenza project",
        ]
        graph = load_triples(write_triples(tmp_path, lines))
        # "virus" and "testing" only reach the first project; "influenza" reaches both
        req = Requirement(fields={"project name": "influenza virus testing"})
        names = [i.name for i in suggest_items(graph, req)]
        assert names[0] == "PCR kit"


class TestClassifyItem:
    TAXONOMY = [PurchaseItem(name="pcr kit"), PurchaseItem(name="office desk")]

    def test_exact_match_kept(self, provider):
        result = classify_item(PurchaseItem(name="pcr kit"), self.TAXONOMY, 0.0, provider)
        assert result.keep
        assert result.dist == pytest.approx(0.0, abs=1e-9)
        assert result.best_match.name == "pcr kit"

    def test_zero_theta_rejects_non_exact(self, provider):
        result = classify_item(PurchaseItem(name="pcr kits"), self.TAXONOMY, 0.0, provider)
        assert not result.keep

    def test_theta_one_keeps_everything(self, provider):
        result = classify_item(PurchaseItem(name="entirely unrelated"), self.TAXONOMY, 1.0, provider)
        assert result.keep

    def test_empty_taxonomy(self, provider):
        with pytest.raises(EmptyTaxonomy):
            classify_item(PurchaseItem(name="x"), [], 0.5, provider)

    def test_threshold_monotonicity(self, provider):
        rng = random.Random(6)
        names = ["pcr kit", "reagent", "flu test", "chair", "pipette tip"]
        for _ in range(40):
            item = PurchaseItem(name=rng.choice(names) + rng.choice(["", "s", " set"]))
            theta = rng.random()
            theta_higher = theta + (1 - theta) * rng.random()
            low = classify_item(item, self.TAXONOMY, theta, provider)
            high = classify_item(item, self.TAXONOMY, theta_higher, provider)
            if low.keep:
                assert high.keep


class TestRefinePurchaseList:
    def generated_doc(self):
        return TenderDocument(
            id="gen-1",
            fields={"project name": "flu testing"},
            paragraphs=(ParagraphBlock(0, "text"),),
            tables=(
                TableBlock(
                    field_names=("name", "quantity", "unit"),
                    rows=(("old item", "1", "set"),),
                ),
            ),
            purchase_items=(PurchaseItem(name="old item", quantity=1.0, unit="set"),),
        )

    def taxonomy(self):
        return [PurchaseItem(name="pcr kit"), PurchaseItem(name="reagent pack")]

    def test_all_passing_kept(self, provider):
        c_list = (PurchaseItem(name="pcr kit", quantity=2.0), PurchaseItem(name="reagent pack"))
        req = Requirement(fields={"project name": "flu"}, c_list=c_list)
        result = refine_purchase_list(
            self.generated_doc(), req, empty_graph(), self.taxonomy(), 0.35, provider
        )
        assert result.document.purchase_items == c_list
        assert result.dropped == ()
        assert result.source == "c_list"

    def test_failing_item_dropped_and_reported(self, provider):
        c_list = (PurchaseItem(name="pcr kit"), PurchaseItem(name="granite countertop"))
        req = Requirement(fields={"project name": "flu"}, c_list=c_list)
        result = refine_purchase_list(
            self.generated_doc(), req, empty_graph(), self.taxonomy(), 0.35, provider
        )
        kept_names = [i.name for i in result.document.purchase_items]
        assert kept_names == ["pcr kit"]
        assert len(result.dropped) == 1
        assert result.dropped[0].item.name == "granite countertop"
        assert result.dropped[0].dist > 0.35

    def test_table_rewritten(self, provider):
        c_list = (PurchaseItem(name="pcr kit", quantity=2.0, unit="box"),)
        req = Requirement(fields={"project name": "flu"}, c_list=c_list)
        result = refine_purchase_list(
            self.generated_doc(), req, empty_graph(), self.taxonomy(), 0.35, provider
        )
        assert result.document.tables[0].rows == (("pcr kit", "2", "box"),)

    def test_suggestions_when_no_c_list(self, tmp_path, provider):
        lines = [
            "pcr kit\tis the procurement item for\tflu testing project",
            "swab set\tis the procurement item for\tflu testing project",
        ]
        graph = load_triples(write_triples(tmp_path, lines))
        req = Requirement(fields={"project name": "flu testing"})
        result = refine_purchase_list(
            self.generated_doc(), req, graph, self.taxonomy(), 0.35, provider
        )
        assert {i.name for i in result.document.purchase_items} == {"pcr kit", "swab set"}
        assert result.source == "suggested"

    def test_missing_purchase_table_warns(self, provider):
        doc = TenderDocument(
            id="gen-2",
            fields={"f": "x"},
            tables=(TableBlock(field_names=("other",), rows=()),),
        )
        req = Requirement(fields={"f": "x"}, c_list=(PurchaseItem(name="pcr kit"),))
        result = refine_purchase_list(doc, req, empty_graph(), self.taxonomy(), 0.35, provider)
        assert result.warnings
        assert result.document.purchase_items == req.c_list

    def test_idempotent(self, provider):
        c_list = (PurchaseItem(name="pcr kit"), PurchaseItem(name="granite countertop"))
        req = Requirement(fields={"project name": "flu"}, c_list=c_list)
        once = refine_purchase_list(
            self.generated_doc(), req, empty_graph(), self.taxonomy(), 0.35, provider
        )
        twice = refine_purchase_list(
            once.document, req, empty_graph(), self.taxonomy(), 0.35, provider
        )
        assert twice.document == once.document


class TestLoadTaxonomy:
    def test_jsonl(self, tmp_path):
        path = tmp_path / "tax.jsonl"
        path.write_text('{"name": "pcr kit"}\n{"name": "desk", "unit": "piece"}\n', encoding="utf-8")
        items = load_taxonomy(path)
        assert [i.name for i in items] == ["pcr kit", "desk"]
        assert items[1].unit == "piece"

    def test_missing_name(self, tmp_path):
        path = tmp_path / "tax.jsonl"
        path.write_text('{"unit": "piece"}\n', encoding="utf-8")
        with pytest.raises(SchemaError):
            load_taxonomy(path)


def test_graph_rejects_dangling_relations():
    from tenderforge.knowledge import Entity, Relation

    with pytest.raises(ValueError):
        KnowledgeGraph([Entity(id=0, name="a")], [Relation(src=0, rel_type="rel", dst=99)])
