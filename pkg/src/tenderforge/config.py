"""Application configuration: file (TOML or JSON) plus environment overrides.

Environment variables use the ``TENDERFORGE_`` prefix with section and key
joined by underscores, e.g. ``TENDERFORGE_RERANK_ALPHA`` or
``TENDERFORGE_EMBEDDING_DIMENSION``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - py310 fallback
    import tomli as tomllib

from .errors import ConfigError
from .generation import HttpLLMClient, LLMClient, MockLLMClient
from .text_metrics import EmbeddingProvider, HashedTrigramProvider, HttpEmbeddingProvider

ENV_PREFIX = "TENDERFORGE_"


@dataclass
class EmbeddingSettings:
    kind: str = "test"  # test | http
    url: Optional[str] = None
    dimension: int = 256


@dataclass
class LLMSettings:
    kind: str = "mock"  # mock | http
    url: Optional[str] = None
    timeout: float = 30.0
    retries: int = 2


@dataclass
class AppConfig:
    corpus_path: Optional[str] = None
    index_path: Optional[str] = None
    triples_path: Optional[str] = None
    taxonomy_path: Optional[str] = None
    sessions_path: Optional[str] = None
    embedding: EmbeddingSettings = field(default_factory=EmbeddingSettings)
    llm: LLMSettings = field(default_factory=LLMSettings)
    rerank_alpha: float = 0.5
    kb_theta: float = 0.35
    retrieve_k: int = 5
    server_host: str = "127.0.0.1"
    server_port: int = 8000
    rng_seed: int = 0

    def validate(self) -> "AppConfig":
        if self.rerank_alpha < 0:
            raise ConfigError("rerank.alpha must be >= 0")
        if not 0.0 <= self.kb_theta <= 1.0:
            raise ConfigError("kb.theta must lie in [0, 1]")
        if self.retrieve_k < 1:
            raise ConfigError("retrieve.k must be >= 1")
        if self.embedding.dimension < 8:
            raise ConfigError("embedding.dimension must be >= 8")
        if self.embedding.kind not in ("test", "http"):
            raise ConfigError(f"embedding.kind must be test or http, got {self.embedding.kind!r}")
        if self.embedding.kind == "http" and not self.embedding.url:
            raise ConfigError("embedding.kind http requires embedding.url")
        if self.llm.kind not in ("mock", "http"):
            raise ConfigError(f"llm.kind must be mock or http, got {self.llm.kind!r}")
        if self.llm.kind == "http" and not self.llm.url:
            raise ConfigError("llm.kind http requires llm.url")
        return self


def _read_file(path: Path) -> dict:
    if path.suffix == ".toml":
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ConfigError("config file must hold an object")
    return data


def _apply_file(config: AppConfig, data: Mapping) -> None:
    for key in ("corpus_path", "index_path", "triples_path", "taxonomy_path", "sessions_path"):
        if key in data:
            setattr(config, key, str(data[key]))
    if "seed" in data:
        config.rng_seed = int(data["seed"])
    embedding = data.get("embedding", {})
    config.embedding.kind = str(embedding.get("kind", config.embedding.kind))
    if "url" in embedding:
        config.embedding.url = str(embedding["url"])
    if "dimension" in embedding:
        config.embedding.dimension = int(embedding["dimension"])
    llm = data.get("llm", {})
    config.llm.kind = str(llm.get("kind", config.llm.kind))
    if "url" in llm:
        config.llm.url = str(llm["url"])
    if "timeout" in llm:
        config.llm.timeout = float(llm["timeout"])
    if "retries" in llm:
        config.llm.retries = int(llm["retries"])
    if "rerank" in data and "alpha" in data["rerank"]:
        config.rerank_alpha = float(data["rerank"]["alpha"])
    if "kb" in data and "theta" in data["kb"]:
        config.kb_theta = float(data["kb"]["theta"])
    if "retrieve" in data and "k" in data["retrieve"]:
        config.retrieve_k = int(data["retrieve"]["k"])
    server = data.get("server", {})
    if "host" in server:
        config.server_host = str(server["host"])
    if "port" in server:
        config.server_port = int(server["port"])


def _apply_env(config: AppConfig, env: Mapping[str, str]) -> None:
    def get(name: str) -> Optional[str]:
        return env.get(ENV_PREFIX + name)

    for key, attr in (
        ("CORPUS_PATH", "corpus_path"),
        ("INDEX_PATH", "index_path"),
        ("TRIPLES_PATH", "triples_path"),
        ("TAXONOMY_PATH", "taxonomy_path"),
        ("SESSIONS_PATH", "sessions_path"),
        ("SERVER_HOST", "server_host"),
    ):
        value = get(key)
        if value is not None:
            setattr(config, attr, value)
    if get("SEED") is not None:
        config.rng_seed = int(get("SEED"))
    if get("SERVER_PORT") is not None:
        config.server_port = int(get("SERVER_PORT"))
    if get("RERANK_ALPHA") is not None:
        config.rerank_alpha = float(get("RERANK_ALPHA"))
    if get("KB_THETA") is not None:
        config.kb_theta = float(get("KB_THETA"))
    if get("RETRIEVE_K") is not None:
        config.retrieve_k = int(get("RETRIEVE_K"))
    if get("EMBEDDING_KIND") is not None:
        config.embedding.kind = get("EMBEDDING_KIND")
    if get("EMBEDDING_URL") is not None:
        config.embedding.url = get("EMBEDDING_URL")
    if get("EMBEDDING_DIMENSION") is not None:
        config.embedding.dimension = int(get("EMBEDDING_DIMENSION"))
    if get("LLM_KIND") is not None:
        config.llm.kind = get("LLM_KIND")
    if get("LLM_URL") is not None:
        config.llm.url = get("LLM_URL")
    if get("LLM_TIMEOUT") is not None:
        config.llm.timeout = float(get("LLM_TIMEOUT"))
    if get("LLM_RETRIES") is not None:
        config.llm.retries = int(get("LLM_RETRIES"))


def load_config(path: Optional[str | Path] = None, env: Optional[Mapping[str, str]] = None) -> AppConfig:
    config = AppConfig()
    if path is not None:
        try:
            _apply_file(config, _read_file(Path(path)))
        except (OSError, ValueError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    _apply_env(config, os.environ if env is None else env)
    return config.validate()


def build_embedding_provider(config: AppConfig) -> EmbeddingProvider:
    if config.embedding.kind == "test":
        return HashedTrigramProvider(config.embedding.dimension)
    return HttpEmbeddingProvider(config.embedding.url or "", config.embedding.dimension)


def build_llm_client(config: AppConfig) -> LLMClient:
    if config.llm.kind == "mock":
        return MockLLMClient()
    return HttpLLMClient(config.llm.url or "", timeout=config.llm.timeout, retries=config.llm.retries)


__all__ = [
    "AppConfig",
    "EmbeddingSettings",
    "ENV_PREFIX",
    "LLMSettings",
    "build_embedding_provider",
    "build_llm_client",
    "load_config",
]
