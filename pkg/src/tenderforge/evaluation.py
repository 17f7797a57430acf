"""Document-quality scoring of generated documents against gold standards.

Paragraphs score by best embedding similarity against the gold paragraphs,
discounted by the paragraph-count gap. Tables pair up greedily by field-name
similarity, then score the field lists and the row contents. The overall
score weighs the two components by the generated document's paragraph and
table counts; everything lands on a 0-100 scale.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .corpus import TableBlock, TenderDocument
from .errors import EmptyGold
from .rerank import DEFAULT_ALPHA, item_text_dist, list_text_dist
from .text_metrics import EmbeddingProvider, embedding_dist

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvaluationReport:
    para_score: float
    table_score: float
    score: float
    per_paragraph: tuple[float, ...]
    per_table: tuple[float, ...]
    table_matching: dict[int, int]  # generated table index -> gold table index
    warnings: tuple[str, ...] = ()


def paragraph_score(p_i: str, gold_paragraphs: list[str], provider: EmbeddingProvider) -> float:
    """Best similarity of one generated paragraph over the gold paragraphs."""
    if not gold_paragraphs:
        raise EmptyGold("gold paragraph list must be non-empty")
    return max(1.0 - embedding_dist(p_i, gold, provider) for gold in gold_paragraphs)


def _para_details(
    gen_paragraphs: list[str],
    gold_paragraphs: list[str],
    provider: EmbeddingProvider,
) -> tuple[float, list[float]]:
    if not gen_paragraphs:
        logger.warning("no generated paragraphs to score")
        return 0.0, []
    if not gold_paragraphs:
        return 0.0, [0.0] * len(gen_paragraphs)
    n_gen, n_gold = len(gen_paragraphs), len(gold_paragraphs)
    length_factor = 1.0 - abs(n_gen - n_gold) / max(n_gen, n_gold)
    per = [paragraph_score(p, gold_paragraphs, provider) for p in gen_paragraphs]
    return length_factor * (sum(per) / n_gen) * 100.0, per


def para_score(
    gen_paragraphs: list[str],
    gold_paragraphs: list[str],
    provider: EmbeddingProvider,
) -> float:
    """Length-gap-discounted mean paragraph similarity, scaled to [0, 100]."""
    return _para_details(gen_paragraphs, gold_paragraphs, provider)[0]


def _field_sim(gen: TableBlock, gold: TableBlock, provider: EmbeddingProvider) -> float:
    sims = [
        1.0 - min(item_text_dist(name, gold_name, provider) for gold_name in gold.field_names)
        for name in gen.field_names
    ]
    return sum(sims) / len(sims)


def _row_sim(gen: TableBlock, gold: TableBlock, provider: EmbeddingProvider, alpha: float) -> float:
    gen_rows = [" ".join(row) for row in gen.rows]
    gold_rows = [" ".join(row) for row in gold.rows]
    if not gen_rows:
        return 1.0 if not gold_rows else 0.0
    distance = list_text_dist(gen_rows, gold_rows, alpha, provider).value
    return 1.0 - min(1.0, distance)


def table_score_single(
    t_i: TableBlock,
    g_s_t: TableBlock,
    provider: EmbeddingProvider,
    alpha: float = DEFAULT_ALPHA,
) -> float:
    """Mean of field-name-list similarity and row-content similarity, in [0, 1].

    Rows compare as an item list (each row's cells concatenated), converted to
    a similarity via 1 - min(1, distance)."""
    return (_field_sim(t_i, g_s_t, provider) + _row_sim(t_i, g_s_t, provider, alpha)) / 2.0


def _match_tables(
    gen_tables: tuple[TableBlock, ...],
    gold_tables: tuple[TableBlock, ...],
    provider: EmbeddingProvider,
) -> dict[int, int]:
    """Greedy pairing by descending field-name similarity, ties by index;
    each gold table is matched at most once."""
    pairs = [
        (_field_sim(gen, gold, provider), i, j)
        for i, gen in enumerate(gen_tables)
        for j, gold in enumerate(gold_tables)
    ]
    pairs.sort(key=lambda p: (-p[0], p[1], p[2]))
    matching: dict[int, int] = {}
    used_gold: set[int] = set()
    for _, i, j in pairs:
        if i in matching or j in used_gold:
            continue
        matching[i] = j
        used_gold.add(j)
    return matching


def _table_details(
    gen_tables: tuple[TableBlock, ...],
    gold_tables: tuple[TableBlock, ...],
    provider: EmbeddingProvider,
    alpha: float,
) -> tuple[float, list[float], dict[int, int]]:
    if not gen_tables and not gold_tables:
        return 100.0, [], {}
    if not gen_tables or not gold_tables:
        return 0.0, [0.0] * len(gen_tables), {}
    matching = _match_tables(gen_tables, gold_tables, provider)
    per = [
        table_score_single(gen, gold_tables[matching[i]], provider, alpha) if i in matching else 0.0
        for i, gen in enumerate(gen_tables)
    ]
    return (sum(per) / len(per)) * 100.0, per, matching


def table_score(
    gen_tables: tuple[TableBlock, ...],
    gold_tables: tuple[TableBlock, ...],
    provider: EmbeddingProvider,
    alpha: float = DEFAULT_ALPHA,
) -> float:
    """Mean per-table score over the generated tables, scaled to [0, 100].

    Generated tables pair greedily with distinct gold tables by field-name
    similarity; unmatched generated tables score 0, and two empty table sets
    are a perfect match."""
    return _table_details(gen_tables, gold_tables, provider, alpha)[0]


def evaluate(
    gen: TenderDocument,
    gold: TenderDocument,
    provider: EmbeddingProvider,
    alpha: float = DEFAULT_ALPHA,
) -> EvaluationReport:
    """Full report: paragraph score, table score, and their combination
    weighted by the generated document's paragraph and table counts."""
    warnings: list[str] = []
    p_value, per_paragraph = _para_details(
        [p.text for p in gen.paragraphs], [p.text for p in gold.paragraphs], provider
    )
    if not gen.paragraphs:
        warnings.append("generated document has no paragraphs")
    t_value, per_table, matching = _table_details(gen.tables, gold.tables, provider, alpha)

    n_p, n_t = len(gen.paragraphs), len(gen.tables)
    if n_p + n_t == 0:
        # nothing generated: perfect only against an equally empty gold
        combined = 100.0 if not gold.paragraphs and not gold.tables else 0.0
    else:
        combined = (n_p * p_value + n_t * t_value) / (n_p + n_t)
    return EvaluationReport(
        para_score=p_value,
        table_score=t_value,
        score=combined,
        per_paragraph=tuple(per_paragraph),
        per_table=tuple(per_table),
        table_matching=matching,
        warnings=tuple(warnings),
    )


__all__ = [
    "EvaluationReport",
    "evaluate",
    "para_score",
    "paragraph_score",
    "table_score",
    "table_score_single",
]
