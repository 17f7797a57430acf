"""Missing-information agent protocol and smart-tag template filling.

A session accumulates key -> value information seeded from the requirement,
tracks which required tag keys are still missing, and records the dialogue.
An LLM client can drive the loop through two prompt families: the
missing-information check (replying either with the ``[ALL_INFO]`` token or a
"the missing information to satisfy the request is ..." sentence) and the
content-generation prompt used for generate-kind tags. A deterministic mock
client ships so the whole flow runs offline.
"""

from __future__ import annotations

import logging
import re
import uuid
from dataclasses import dataclass, field
from typing import Optional, Protocol

import requests

from .corpus import (
    ParagraphBlock,
    SmartTag,
    TableBlock,
    TenderDocument,
    document_from_dict,
    document_to_dict,
    extract_smart_tags,
    normalize_key,
    render_tags,
    serialize_document,
    validate_document,
)
from .errors import (
    NoTagsError,
    NotReadyError,
    ProtocolParseError,
    ProviderError,
    SessionClosedError,
    UnknownKeyError,
)
from .retrieval import Requirement

logger = logging.getLogger(__name__)

ALL_INFO_TOKEN = "[ALL_INFO]"
MISSING_SENTENCE = "the missing information to satisfy the request is"

STATE_COLLECTING = "collecting"
STATE_READY = "ready"
STATE_GENERATED = "generated"

_KEY_RE = re.compile(r"[A-Za-z0-9_.]+")


class LLMClient(Protocol):
    def complete(self, prompt: str) -> str: ...


@dataclass
class AgentSession:
    session_id: str
    template_id: str
    template: TenderDocument
    accumulated_info: dict[str, str]
    missing: list[str]
    transcript: list[tuple[str, str]] = field(default_factory=list)
    state: str = STATE_COLLECTING


def _info_block(info: dict[str, str]) -> str:
    """One "key: value" line per entry, sorted by key; newlines flattened."""
    return "\n".join(f"{k}: {v.replace(chr(10), ' ')}" for k, v in sorted(info.items()))


def agent_prompt(session: AgentSession) -> str:
    """Missing-information prompt: available info block plus the template
    (with its tags) embedded in the task description."""
    template_text = serialize_document(session.template, "markdown")
    return (
        "You are an assistant helping to search which information is missing. "
        "The available information is:\n"
        f"{_info_block(session.accumulated_info)}\n"
        f"Your output must be like this: {MISSING_SENTENCE} INFORMATION_MISSING.\n"
        f"If you have the information write the token {ALL_INFO_TOKEN}. "
        "Strictly respond with only the information that is missing.\n"
        "I want you to fill this template:\n"
        f"{template_text}\n"
        "What is the missing information?"
    )


def generation_prompt(info: dict[str, str], instruction: str) -> str:
    return (
        "You are an assistant with the purpose of generating a document with "
        "the available information. You have the following information:\n"
        f"{_info_block(info)}\n"
        f"Please fill the template {instruction}."
    )


class MockLLMClient:
    """Offline deterministic client for both prompt families.

    Missing-information prompts are answered by diffing the available-info
    block against the fill tags embedded in the task description; generation
    prompts are answered by echoing the instruction.
    """

    def complete(self, prompt: str) -> str:
        if "What is the missing information?" in prompt:
            return self._answer_missing(prompt)
        if "Please fill the template " in prompt:
            tail = prompt.split("Please fill the template ", 1)[1]
            return tail.removesuffix(".")
        return ALL_INFO_TOKEN

    @staticmethod
    def _answer_missing(prompt: str) -> str:
        available: set[str] = set()
        _, _, rest = prompt.partition("The available information is:\n")
        block, _, _ = rest.partition("\nYour output must be like this:")
        for line in block.splitlines():
            key, sep, _ = line.partition(":")
            if sep:
                available.add(key.strip())
        _, _, task = prompt.partition("I want you to fill this template:")
        tag_keys = list(dict.fromkeys(re.findall(r"\{\{([A-Za-z0-9_.]+)\}\}", task)))
        missing = [k for k in tag_keys if k not in available]
        if not missing:
            return ALL_INFO_TOKEN
        return f"{MISSING_SENTENCE} {', '.join(missing)}"


class HttpLLMClient:
    """Client for a remote completion service: POST /complete {prompt} -> {text}."""

    def __init__(self, url: str, timeout: float = 30.0, retries: int = 2):
        self.url = url.rstrip("/")
        self.timeout = timeout
        self.retries = retries

    def complete(self, prompt: str) -> str:
        last_error: Optional[Exception] = None
        for _ in range(self.retries + 1):
            try:
                resp = requests.post(
                    f"{self.url}/complete", json={"prompt": prompt}, timeout=self.timeout
                )
                resp.raise_for_status()
                text = resp.json().get("text")
                if not isinstance(text, str):
                    raise ProviderError("completion service returned no text")
                return text
            except requests.RequestException as exc:
                last_error = exc
        raise ProviderError(f"completion service failed: {last_error}")


def required_tag_keys(template: TenderDocument) -> list[str]:
    return [tag.key for tag in extract_smart_tags(template) if tag.required]


def open_session(
    requirement: Requirement,
    template: TenderDocument,
    session_id: Optional[str] = None,
) -> AgentSession:
    """Seed a session from the requirement fields (keys normalized to tag
    form) and compute the initially missing keys in template order."""
    if not template.paragraphs and not template.tables:
        raise NoTagsError(f"template {template.id!r} has no content to fill")
    accumulated = {
        normalize_key(name): value
        for name, value in requirement.fields.items()
        if value.strip() and normalize_key(name)
    }
    missing = [k for k in required_tag_keys(template) if k not in accumulated]
    session = AgentSession(
        session_id=session_id or uuid.uuid4().hex[:12],
        template_id=template.id,
        template=template,
        accumulated_info=accumulated,
        missing=missing,
        state=STATE_COLLECTING if missing else STATE_READY,
    )
    session.transcript.append(("agent", _agent_line(missing)))
    return session


def _agent_line(missing: list[str]) -> str:
    if not missing:
        return ALL_INFO_TOKEN
    return f"{MISSING_SENTENCE} {', '.join(missing)}"


def parse_protocol_reply(reply: str, known_keys: set[str]) -> set[str]:
    """Extract the missing-key set from an agent reply.

    Accepts the ``[ALL_INFO]`` token (empty set) or the missing-information
    sentence followed by a key list; anything else is a protocol violation.
    """
    if ALL_INFO_TOKEN in reply:
        return set()
    lowered = reply.lower()
    marker = MISSING_SENTENCE.lower()
    if marker in lowered:
        tail = reply[lowered.index(marker) + len(marker):]
        return {tok for tok in _KEY_RE.findall(tail) if tok in known_keys}
    raise ProtocolParseError(f"reply carries neither {ALL_INFO_TOKEN} nor the missing-info sentence")


def detect_missing(session: AgentSession, llm: Optional[LLMClient] = None) -> list[str]:
    """Missing required keys, recomputed from the template and accumulated info.

    When an LLM is supplied its reply is parsed and logged, but the
    deterministic set stays authoritative.
    """
    deterministic = [k for k in required_tag_keys(session.template) if k not in session.accumulated_info]
    if llm is not None:
        reply = llm.complete(agent_prompt(session))
        session.transcript.append(("agent", reply))
        parsed = parse_protocol_reply(reply, set(required_tag_keys(session.template)))
        if parsed != set(deterministic):
            logger.warning(
                "session %s: agent reply disagrees on missing keys (parsed %s, actual %s)",
                session.session_id, sorted(parsed), deterministic,
            )
    return deterministic


def submit_answer(session: AgentSession, key: str, value: str) -> AgentSession:
    if session.state == STATE_GENERATED:
        raise SessionClosedError(f"session {session.session_id} already generated")
    if key not in session.missing:
        raise UnknownKeyError(key)
    session.accumulated_info[key] = value
    session.missing.remove(key)
    session.transcript.append(("user", f"{key}: {value}"))
    session.transcript.append(("agent", _agent_line(session.missing)))
    session.state = STATE_READY if not session.missing else STATE_COLLECTING
    return session


def fill_template(
    session: AgentSession,
    llm: Optional[LLMClient] = None,
    force: bool = False,
) -> TenderDocument:
    """Substitute every tag in the template and return the generated document.

    Fill tags take accumulated values; generate tags take LLM output (or the
    ``[GEN:key]`` placeholder without one). ``force`` substitutes
    ``[MISSING:key]`` markers for unanswered keys instead of failing. Filling
    a ready session is repeatable and yields an identical document.
    """
    if session.state == STATE_COLLECTING and not force:
        raise NotReadyError(f"session {session.session_id} still missing {session.missing}")

    warnings: list[str] = []

    def render_generate(tag: SmartTag) -> str:
        if llm is None:
            warnings.append(f"no LLM configured; tag {tag.key!r} left as placeholder")
            return f"[GEN:{tag.key}]"
        return llm.complete(generation_prompt(session.accumulated_info, tag.instruction or ""))

    def on_missing(key: str) -> str:
        return f"[MISSING:{key}]"

    # substituted values must not re-introduce tag delimiters
    values = {k: v.replace("{{", "{ {") for k, v in session.accumulated_info.items()}

    paragraphs = tuple(
        ParagraphBlock(index=p.index, text=render_tags(p.text, values, render_generate, on_missing))
        for p in session.template.paragraphs
    )
    tables = tuple(
        TableBlock(
            field_names=t.field_names,
            rows=tuple(
                tuple(render_tags(cell, values, render_generate, on_missing) for cell in row)
                for row in t.rows
            ),
        )
        for t in session.template.tables
    )
    fields = {
        name: values.get(normalize_key(name), text)
        for name, text in session.template.fields.items()
    }
    doc = validate_document(
        TenderDocument(
            id=f"gen-{session.session_id}",
            fields=fields,
            paragraphs=paragraphs,
            tables=tables,
            purchase_items=session.template.purchase_items,
        )
    )
    for warning in warnings:
        logger.warning("session %s: %s", session.session_id, warning)
    session.state = STATE_GENERATED
    return doc


# --- session (de)serialization for snapshots ------------------------------------

def session_to_dict(session: AgentSession) -> dict:
    return {
        "session_id": session.session_id,
        "template_id": session.template_id,
        "template": document_to_dict(session.template),
        "accumulated_info": dict(session.accumulated_info),
        "missing": list(session.missing),
        "transcript": [[role, text] for role, text in session.transcript],
        "state": session.state,
    }


def session_from_dict(data: dict) -> AgentSession:
    return AgentSession(
        session_id=data["session_id"],
        template_id=data["template_id"],
        template=document_from_dict(data["template"]),
        accumulated_info=dict(data["accumulated_info"]),
        missing=list(data["missing"]),
        transcript=[(role, text) for role, text in data["transcript"]],
        state=data["state"],
    )


__all__ = [
    "ALL_INFO_TOKEN",
    "AgentSession",
    "HttpLLMClient",
    "LLMClient",
    "MISSING_SENTENCE",
    "MockLLMClient",
    "STATE_COLLECTING",
    "STATE_GENERATED",
    "STATE_READY",
    "agent_prompt",
    "detect_missing",
    "fill_template",
    "generation_prompt",
    "open_session",
    "parse_protocol_reply",
    "required_tag_keys",
    "session_from_dict",
    "session_to_dict",
    "submit_answer",
]
