"""Embedding, cosine ranking, and retrieval over the sample repository.

Two embedding providers share one interface: a fully offline deterministic
provider (lowercased alphanumeric tokens, term-frequency feature hashing
with sign hashing, L2 normalization) and a client for a remote embedding
HTTP service. A triplet margin loss over cosine similarities is exposed as
a pure function in both its conventional and sign-flipped forms.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import re
import struct
import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import requests

log = logging.getLogger(__name__)

DEFAULT_DIMS = 384


class DimensionMismatch(Exception):
    """Raised when two vectors of different widths are combined."""


class EmptyIndex(Exception):
    """Raised when a query runs against an index with no entries."""


class ProviderError(Exception):
    """Raised when a remote embedding provider fails after retries."""


@dataclass(frozen=True)
class EmbeddingVector:
    dims: int
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != self.dims:
            raise DimensionMismatch(f"expected {self.dims} values, got {len(self.values)}")


@dataclass(frozen=True)
class RetrievalIndex:
    entries: tuple[tuple[str, EmbeddingVector], ...]  # (uuid, vector)
    provider_id: str


@dataclass(frozen=True)
class MatchResult:
    query_id: str
    matches: tuple[tuple[str, float], ...]  # (uuid, similarity), best first


def _l2_normalize(values: list[float]) -> list[float]:
    norm = math.sqrt(sum(v * v for v in values))
    if norm == 0.0:
        return values
    return [v / norm for v in values]


_WORD_RE = re.compile(r"[a-z0-9]+")


class LocalHashingProvider:
    """Deterministic bag-of-tokens embedder: term frequencies are hashed into
    a fixed number of buckets with a sign bit, then L2-normalized. Pure and
    offline; vectors depend only on the token multiset."""

    def __init__(self, dims: int = DEFAULT_DIMS):
        self.dims = dims
        self.provider_id = f"local-hash-{dims}"

    def embed_batch(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        return [self._embed_one(t) for t in texts]

    def _embed_one(self, text: str) -> EmbeddingVector:
        tokens = _WORD_RE.findall(text.lower())
        values = [0.0] * self.dims
        if tokens:
            for token, tf in Counter(tokens).items():
                digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
                h = int.from_bytes(digest, "big")
                sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
                values[h % self.dims] += sign * tf
            values = _l2_normalize(values)
        return EmbeddingVector(self.dims, tuple(values))


class RemoteEmbeddingProvider:
    """Client for an embedding service speaking
    POST {"texts": [...]} -> {"vectors": [[...], ...]}."""

    def __init__(self, endpoint: str, dims: int = DEFAULT_DIMS,
                 api_key: Optional[str] = None, timeout: float = 30.0,
                 max_retries: int = 3, backoff: float = 0.25):
        self.endpoint = endpoint
        self.dims = dims
        self.api_key = api_key
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.provider_id = f"remote-{endpoint}-{dims}"

    def embed_batch(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Optional[Exception] = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                resp = requests.post(self.endpoint, json={"texts": list(texts)},
                                     headers=headers, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
                log.warning("embedding request failed (attempt %d): %s", attempt + 1, exc)
                continue
            if resp.status_code >= 500:
                last_error = ProviderError(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise ProviderError(f"embedding service returned {resp.status_code}")
            try:
                vectors = resp.json()["vectors"]
            except (ValueError, KeyError) as exc:
                raise ProviderError(f"malformed embedding response: {exc}") from exc
            if len(vectors) != len(texts):
                raise ProviderError("embedding count does not match request")
            out = []
            for vec in vectors:
                if len(vec) != self.dims:
                    raise ProviderError(f"expected {self.dims}-wide vectors, got {len(vec)}")
                out.append(EmbeddingVector(self.dims, tuple(_l2_normalize([float(v) for v in vec]))))
            return out
        raise ProviderError(f"embedding service unreachable after "
                            f"{self.max_retries + 1} attempts: {last_error}")


def embed(provider, text: str) -> EmbeddingVector:
    """Embed one text with the given provider. Deterministic per
    (provider, text); empty or whitespace-only text yields the zero vector
    under the local provider."""
    return provider.embed_batch([text])[0]


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """(a.b) / (|a| |b|), defined as 0.0 when either norm is zero. Equal
    nonzero vectors score exactly 1.0."""
    if a.dims != b.dims:
        raise DimensionMismatch(f"{a.dims} vs {b.dims}")
    na2 = sum(v * v for v in a.values)
    nb2 = sum(v * v for v in b.values)
    if na2 == 0.0 or nb2 == 0.0:
        return 0.0
    if a.values == b.values:
        return 1.0
    dot = sum(x * y for x, y in zip(a.values, b.values))
    c = dot / math.sqrt(na2 * nb2)
    return max(-1.0, min(1.0, c))


def triplet_loss(anchor: EmbeddingVector, positive: EmbeddingVector,
                 negative: EmbeddingVector, margin: float,
                 as_written: bool = False) -> float:
    """Margin loss over cosine similarities. The conventional form (default)
    is max(0, cos(a,n) - cos(a,p) + margin); as_written flips the two
    similarity terms."""
    if margin < 0:
        raise ValueError("margin must be >= 0")
    cp = cosine_similarity(anchor, positive)
    cn = cosine_similarity(anchor, negative)
    if as_written:
        return max(0.0, cp - cn + margin)
    return max(0.0, cn - cp + margin)


def top_k_matches(index: RetrievalIndex, query: EmbeddingVector, k: int,
                  query_id: str = "") -> MatchResult:
    """The k highest-similarity entries (fewer if the index is smaller),
    sorted by similarity descending with uuid-ascending tie-break."""
    if not index.entries:
        raise EmptyIndex("retrieval index has no entries")
    if k < 1:
        raise ValueError("k must be >= 1")
    scored = [(cosine_similarity(query, vec), uuid) for uuid, vec in index.entries]
    scored.sort(key=lambda s: (-s[0], s[1]))
    matches = tuple((uuid, sim) for sim, uuid in scored[:k])
    return MatchResult(query_id, matches)


def save_results_json(result: MatchResult, path: str, repo) -> None:
    """Serialize a match result to JSON, resolving each match's code and
    comment from the repository."""
    matches = []
    for uuid, similarity in result.matches:
        sample = repo.load_sample(uuid)
        matches.append({
            "uuid": uuid,
            "similarity": similarity,
            "code": sample.code,
            "comment": sample.comment,
        })
    payload = {"query_id": result.query_id, "matches": matches}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Index construction and binary cache
# ---------------------------------------------------------------------------

def build_index(repo, provider, uuids: Sequence[str]) -> RetrievalIndex:
    """Embed the code of each given sample and assemble an index. Entries
    are ordered by uuid so rebuilds are stable."""
    entries = []
    for uuid in sorted(uuids):
        sample = repo.load_sample(uuid)
        entries.append((uuid, embed(provider, sample.code)))
    return RetrievalIndex(tuple(entries), provider.provider_id)


_CACHE_MAGIC = b"SSIX"


def save_index_cache(index: RetrievalIndex, path: str) -> None:
    dims = index.entries[0][1].dims if index.entries else 0
    header = json.dumps({
        "provider_id": index.provider_id,
        "dims": dims,
        "uuids": [uuid for uuid, _ in index.entries],
    }).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for _, vec in index.entries:
            fh.write(struct.pack(f"<{vec.dims}d", *vec.values))


def load_index_cache(path: str) -> Optional[RetrievalIndex]:
    """Load a cached index, or None when the file is missing or unreadable."""
    p = Path(path)
    if not p.exists():
        return None
    try:
        raw = p.read_bytes()
        if raw[:4] != _CACHE_MAGIC:
            return None
        (header_len,) = struct.unpack_from("<I", raw, 4)
        header = json.loads(raw[8:8 + header_len].decode("utf-8"))
        dims = header["dims"]
        offset = 8 + header_len
        entries = []
        for uuid in header["uuids"]:
            values = struct.unpack_from(f"<{dims}d", raw, offset)
            offset += 8 * dims
            entries.append((uuid, EmbeddingVector(dims, tuple(values))))
        return RetrievalIndex(tuple(entries), header["provider_id"])
    except (ValueError, KeyError, struct.error) as exc:
        log.warning("ignoring unreadable index cache %s: %s", path, exc)
        return None
