"""String distances and the embedding provider contract.

Three distances feed item matching: character-bigram Dice distance, normalized
Levenshtein distance, and embedding cosine distance. Embeddings come from a
pluggable provider; the bundled test provider hashes character trigrams into a
fixed number of buckets so the whole stack runs offline and deterministically.
"""

from __future__ import annotations

from collections import Counter
from typing import Protocol

import numpy as np
import requests

from .errors import DimensionMismatch, ProviderError

EmbeddingVector = np.ndarray

HASH_SEED = 0x5EED
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


class EmbeddingProvider(Protocol):
    """Deterministic text -> unit-norm vector encoder of fixed dimension."""

    dimension: int

    def embed(self, text: str) -> EmbeddingVector: ...


def _fnv1a(data: bytes, seed: int = HASH_SEED) -> int:
    h = _FNV_OFFSET ^ seed
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


class HashedTrigramProvider:
    """Offline test provider: L2-normalized hashed character-trigram counts.

    Counts are non-negative, so cosine similarity between any two outputs lies
    in [0, 1]. Texts shorter than 3 characters hash as a single gram; empty
    text maps to the fixed basis vector e_0.
    """

    def __init__(self, dimension: int = 256):
        if dimension < 8:
            raise ValueError("dimension must be >= 8")
        self.dimension = dimension
        self._cache: dict[str, EmbeddingVector] = {}

    def embed(self, text: str) -> EmbeddingVector:
        cached = self._cache.get(text)
        if cached is not None:
            return cached
        vec = np.zeros(self.dimension, dtype=np.float64)
        if not text:
            vec[0] = 1.0
        else:
            grams = [text[i : i + 3] for i in range(len(text) - 2)] if len(text) >= 3 else [text]
            for gram in grams:
                vec[_fnv1a(gram.encode("utf-8")) % self.dimension] += 1.0
            vec /= np.linalg.norm(vec)
        vec.setflags(write=False)
        self._cache[text] = vec
        return vec


class HttpEmbeddingProvider:
    """Client for a remote encoder: POST /embed {texts:[...]} -> {vectors, dimension}."""

    def __init__(self, url: str, dimension: int, timeout: float = 10.0):
        self.url = url.rstrip("/")
        self.dimension = dimension
        self.timeout = timeout

    def embed(self, text: str) -> EmbeddingVector:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: list[str]) -> list[EmbeddingVector]:
        try:
            resp = requests.post(f"{self.url}/embed", json={"texts": texts}, timeout=self.timeout)
            resp.raise_for_status()
            payload = resp.json()
        except requests.RequestException as exc:
            raise ProviderError(f"embedding provider request failed: {exc}") from exc
        if payload.get("dimension") != self.dimension:
            raise ProviderError(
                f"provider dimension {payload.get('dimension')} != configured {self.dimension}"
            )
        vectors = payload.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProviderError("provider returned a malformed vectors array")
        out = []
        for vec in vectors:
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (self.dimension,) or not np.all(np.isfinite(arr)):
                raise ProviderError("provider returned a vector of wrong shape or with non-finite values")
            out.append(arr)
        return out


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector dimensions differ: {a.shape} vs {b.shape}")
    norm = float(np.linalg.norm(a)) * float(np.linalg.norm(b))
    if norm == 0.0:
        return 0.0
    return float(np.clip(float(np.dot(a, b)) / norm, -1.0, 1.0))


def embedding_dist(a: str, b: str, provider: EmbeddingProvider) -> float:
    """1 - cos(embed(a), embed(b)), with cosine clamped at 0 so the result
    stays in [0, 1] for any provider."""
    return 1.0 - max(0.0, cosine_similarity(provider.embed(a), provider.embed(b)))


def _gram_counts(a: str, b: str) -> tuple[Counter, Counter]:
    # unigram fallback keeps one-character names comparable
    n = 1 if min(len(a), len(b)) == 1 else 2
    return (
        Counter(a[i : i + n] for i in range(len(a) - n + 1)),
        Counter(b[i : i + n] for i in range(len(b) - n + 1)),
    )


def ngram_dist(a: str, b: str) -> float:
    """1 - Dice coefficient over character-bigram multisets."""
    if not a and not b:
        return 0.0
    if not a or not b:
        return 1.0
    ca, cb = _gram_counts(a, b)
    overlap = sum((ca & cb).values())
    return 1.0 - (2.0 * overlap) / (sum(ca.values()) + sum(cb.values()))


def edit_dist(a: str, b: str) -> float:
    """Levenshtein distance normalized by the longer length (unicode scalars)."""
    if a == b:
        return 0.0
    if not a or not b:
        return 1.0
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ch_a in enumerate(a, start=1):
        current = [i]
        for j, ch_b in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,        # deletion
                    current[j - 1] + 1,     # insertion
                    previous[j - 1] + (ch_a != ch_b),  # substitution
                )
            )
        previous = current
    return previous[-1] / len(a)


__all__ = [
    "EmbeddingProvider",
    "EmbeddingVector",
    "HASH_SEED",
    "HashedTrigramProvider",
    "HttpEmbeddingProvider",
    "cosine_similarity",
    "edit_dist",
    "embedding_dist",
    "ngram_dist",
]
