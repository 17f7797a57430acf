import string

import pytest
from hypothesis import strategies as st

from tenderforge.corpus import (
    ParagraphBlock,
    PurchaseItem,
    TableBlock,
    TenderDocument,
    validate_document,
)
from tenderforge.text_metrics import HashedTrigramProvider

# brace-free text keeps randomized paragraphs inside the tag grammar
SAFE_ALPHABET = string.ascii_letters + string.digits + " .,;:-_'试剂盒检测仪配件"

safe_text = st.text(alphabet=SAFE_ALPHABET, max_size=40)
nonempty_text = st.text(alphabet=SAFE_ALPHABET, min_size=1, max_size=40).filter(
    lambda s: s.strip()
)
tag_keys = st.text(alphabet=string.ascii_lowercase + string.digits + "_", min_size=1, max_size=10)


@st.composite
def tagged_paragraphs(draw):
    base = draw(safe_text)
    if draw(st.booleans()):
        key = draw(tag_keys)
        if draw(st.booleans()):
            instruction = draw(nonempty_text)
            return f"{base} {{{{gen:{key}|{instruction}}}}}"
        return f"{base} {{{{{key}}}}} {draw(safe_text)}"
    return base


@st.composite
def tables(draw):
    names = draw(st.lists(nonempty_text, min_size=1, max_size=3, unique=True))
    n_rows = draw(st.integers(0, 3))
    rows = tuple(
        tuple(draw(safe_text) for _ in names) for _ in range(n_rows)
    )
    return TableBlock(field_names=tuple(names), rows=rows)


@st.composite
def purchase_items(draw):
    return PurchaseItem(
        name=draw(nonempty_text),
        quantity=draw(st.one_of(st.none(), st.integers(0, 500).map(float))),
        unit=draw(st.one_of(st.none(), nonempty_text)),
        spec=draw(st.one_of(st.none(), safe_text)),
    )


@st.composite
def documents(draw):
    field_names = draw(st.lists(nonempty_text, min_size=1, max_size=3, unique=True))
    fields = {name: draw(safe_text) for name in field_names}
    paragraphs = tuple(
        ParagraphBlock(i, text)
        for i, text in enumerate(draw(st.lists(tagged_paragraphs(), max_size=4)))
    )
    doc = TenderDocument(
        id=draw(st.text(alphabet=string.ascii_lowercase + string.digits, min_size=1, max_size=8)),
        fields=fields,
        paragraphs=paragraphs,
        tables=tuple(draw(st.lists(tables(), max_size=2))),
        purchase_items=tuple(draw(st.lists(purchase_items(), max_size=3))),
    )
    return validate_document(doc)


@pytest.fixture(scope="session")
def provider():
    return HashedTrigramProvider(256)
