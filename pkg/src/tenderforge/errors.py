"""Exception hierarchy shared by all tenderforge modules.

Every domain error derives from TenderForgeError and exposes a stable
``code`` (the class name) that the HTTP service maps to machine-readable
error bodies.
"""

from __future__ import annotations


class TenderForgeError(Exception):
    """Base class for all domain errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- corpus ---------------------------------------------------------------

class SchemaError(TenderForgeError):
    """Document JSON violates the corpus schema. ``path`` names the offending key."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class TagGrammarError(TenderForgeError):
    """Smart-tag delimiters are unbalanced, nested, or the tag body is invalid."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


class DuplicateIdError(TenderForgeError):
    def __init__(self, doc_id: str, line: int):
        super().__init__(f"duplicate document id {doc_id!r} at line {line}")
        self.doc_id = doc_id
        self.line = line


# --- text metrics / providers ---------------------------------------------

class DimensionMismatch(TenderForgeError):
    pass


class ProviderError(TenderForgeError):
    """An embedding or LLM provider failed or returned an unusable response."""


# --- retrieval --------------------------------------------------------------

class EmptyQuery(TenderForgeError):
    pass


class IndexCorpusMismatch(TenderForgeError):
    """Index fingerprint does not match the corpus it is being used against."""


# --- rerank -----------------------------------------------------------------

class EmptyCurrentList(TenderForgeError):
    pass


# --- generation -------------------------------------------------------------

class NoTagsError(TenderForgeError):
    """Template is malformed (no content to fill at all)."""


class ProtocolParseError(TenderForgeError):
    """LLM reply carries neither the all-info token nor the missing-info sentence."""


class UnknownKeyError(TenderForgeError):
    def __init__(self, key: str):
        super().__init__(f"key {key!r} is not missing in this session")
        self.key = key


class SessionClosedError(TenderForgeError):
    pass


class NotReadyError(TenderForgeError):
    pass


# --- knowledge base ---------------------------------------------------------

class MalformedLineError(TenderForgeError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyTaxonomy(TenderForgeError):
    pass


# --- evaluation / experiments ------------------------------------------------

class EmptyGold(TenderForgeError):
    pass


class ConfigError(TenderForgeError):
    pass
