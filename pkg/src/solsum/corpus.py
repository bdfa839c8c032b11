"""Persistent repository of method-comment samples mined from .sol files.

Layout under the repository root:
    samples/<uuid>.json   one file per sample
    index.json            uuid -> {path, contract, function, content_hash}
    splits.json           split name -> uuid list

Ingestion is idempotent per file content: a content hash over the sample's
origin and text guards against duplicate inserts on re-runs.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import threading
import uuid as uuidlib
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

from .callgraph import build_reference_tree, to_dot
from .parser import parse_source
from .semfacts import SemanticFacts, collect_facts, facts_from_dict, facts_to_dict
from . import parser as parser_mod

MIN_COMMENT_TOKENS = 3
MAX_COMMENT_TOKENS = 200
MIN_LETTER_RATIO = 0.5
MIN_CODE_TOKENS = 2


class InvalidRatio(Exception):
    """Raised when split ratios do not sum to one or are negative."""


@dataclass(frozen=True)
class CodeSample:
    uuid: str
    source_path: str
    contract: str
    function: str
    code: str
    comment: str
    facts: SemanticFacts
    dot: str
    embedding: Optional[tuple[float, ...]] = None


def sample_to_dict(sample: CodeSample) -> dict:
    return {
        "uuid": sample.uuid,
        "source_path": sample.source_path,
        "contract": sample.contract,
        "function": sample.function,
        "code": sample.code,
        "comment": sample.comment,
        "facts": facts_to_dict(sample.facts),
        "dot": sample.dot,
        "embedding": list(sample.embedding) if sample.embedding is not None else None,
    }


def sample_from_dict(d: dict) -> CodeSample:
    return CodeSample(
        uuid=d["uuid"],
        source_path=d["source_path"],
        contract=d["contract"],
        function=d["function"],
        code=d["code"],
        comment=d["comment"],
        facts=facts_from_dict(d["facts"]),
        dot=d["dot"],
        embedding=tuple(d["embedding"]) if d["embedding"] is not None else None,
    )


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class Repository:
    """Filesystem-backed sample store. Index mutations are serialized through
    a single lock; distinct files may be ingested from separate threads."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.Lock()
        self._index: dict[str, dict] = {}
        self._splits: dict[str, list[str]] = {}
        if self.index_path.exists():
            self._index = json.loads(self.index_path.read_text(encoding="utf-8"))
        if self.splits_path.exists():
            self._splits = json.loads(self.splits_path.read_text(encoding="utf-8"))

    @property
    def samples_dir(self) -> Path:
        return self.root / "samples"

    @property
    def index_path(self) -> Path:
        return self.root / "index.json"

    @property
    def splits_path(self) -> Path:
        return self.root / "splits.json"

    @property
    def runs_dir(self) -> Path:
        return self.root / "runs"

    def uuids(self) -> list[str]:
        return sorted(self._index)

    def index_entry(self, uuid: str) -> dict:
        return self._index[uuid]

    def __len__(self) -> int:
        return len(self._index)

    def has_content(self, content_hash: str) -> bool:
        return any(e.get("content_hash") == content_hash for e in self._index.values())

    def sample_path(self, uuid: str) -> Path:
        return self.samples_dir / f"{uuid}.json"

    def load_sample(self, uuid: str) -> CodeSample:
        return sample_from_dict(json.loads(self.sample_path(uuid).read_text(encoding="utf-8")))

    def add_sample(self, sample: CodeSample, content_hash: str) -> None:
        with self._lock:
            self.samples_dir.mkdir(parents=True, exist_ok=True)
            self.sample_path(sample.uuid).write_text(
                _dump_json(sample_to_dict(sample)), encoding="utf-8")
            self._index[sample.uuid] = {
                "path": sample.source_path,
                "contract": sample.contract,
                "function": sample.function,
                "content_hash": content_hash,
            }

    def save_index(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.index_path.write_text(_dump_json(self._index), encoding="utf-8")

    @property
    def splits(self) -> dict[str, list[str]]:
        return self._splits

    def save_splits(self, splits: dict[str, list[str]]) -> None:
        self._splits = splits
        self.root.mkdir(parents=True, exist_ok=True)
        self.splits_path.write_text(_dump_json(splits), encoding="utf-8")


def filter_low_quality(comment: str, code: str) -> bool:
    """True iff the pair clears every quality rule: comment length within
    3..200 whitespace tokens, not a bare @param/@return skeleton, at least
    half ASCII letters, code of at least 2 tokens, and comment not identical
    to the code."""
    comment_tokens = comment.split()
    if not (MIN_COMMENT_TOKENS <= len(comment_tokens) <= MAX_COMMENT_TOKENS):
        return False
    if _is_tag_skeleton(comment):
        return False
    if not comment:
        return False
    letters = sum(1 for ch in comment if ch.isascii() and ch.isalpha())
    if letters / len(comment) < MIN_LETTER_RATIO:
        return False
    if len(code.split()) < MIN_CODE_TOKENS:
        return False
    if comment == code:
        return False
    return True


def _is_tag_skeleton(comment: str) -> bool:
    stripped = comment.strip()
    if not stripped.startswith(("@param", "@return")):
        return False
    # A skeleton is a pure concatenation of tag clauses.
    chunks = re.split(r"(?=@(?:param|return)\b)", stripped)
    return all(not c.strip() or c.startswith(("@param", "@return")) for c in chunks)


def _content_hash(source_path: str, contract: str, function: str,
                  code: str, comment: str) -> str:
    h = hashlib.sha256()
    for part in (source_path, f"{contract}.{function}", code, comment):
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


def ingest_file(repo: Repository, path: str | Path, max_depth: int = 5) -> list[str]:
    """Parse one .sol file, extract documented method-comment pairs, build
    facts and DOT text per pair, apply the quality filter, and persist each
    surviving sample. Returns the new sample uuids (empty on re-ingest of
    unchanged content)."""
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    source_path = p.as_posix()
    try:
        unit = parse_source(text, source_path)
    except parser_mod.ParseError as exc:
        raise parser_mod.ParseError(f"{source_path}: {exc.message}", exc.line, exc.column) from exc
    ref = build_reference_tree(unit)
    new_uuids: list[str] = []
    for contract, fn, comment in parser_mod.iter_documented_functions(unit):
        code = fn.body_text
        if not filter_low_quality(comment, code):
            continue
        content_hash = _content_hash(source_path, contract.name, fn.name, code, comment)
        if repo.has_content(content_hash):
            continue
        facts = collect_facts(unit, ref, contract.name, fn.name, max_depth)
        sample = CodeSample(
            uuid=str(uuidlib.uuid4()),
            source_path=source_path,
            contract=contract.name,
            function=fn.name,
            code=code,
            comment=comment,
            facts=facts,
            dot=to_dot(facts.call_tree),
        )
        repo.add_sample(sample, content_hash)
        new_uuids.append(sample.uuid)
    repo.save_index()
    return new_uuids


def set_sample_embedding(repo: Repository, uuid: str,
                         values: Sequence[float]) -> CodeSample:
    """Persist an embedding back onto a stored sample."""
    sample = replace(repo.load_sample(uuid), embedding=tuple(values))
    repo.sample_path(uuid).write_text(_dump_json(sample_to_dict(sample)), encoding="utf-8")
    return sample


def split_dataset(repo: Repository, ratios: tuple[float, float, float],
                  seed: int) -> dict[str, list[str]]:
    """Deterministic seeded shuffle of all sample uuids, partitioned into
    train/validation/test by the given ratios. Each split list is sorted."""
    if any(r < 0 for r in ratios):
        raise InvalidRatio(f"negative ratio in {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise InvalidRatio(f"ratios {ratios} sum to {sum(ratios)}, expected 1.0")
    uuids = sorted(repo.uuids())
    rng = random.Random(seed)
    rng.shuffle(uuids)
    n = len(uuids)
    n_train = int(n * ratios[0] + 0.5)
    n_val = int(n * ratios[1] + 0.5)
    n_val = min(n_val, n - n_train)
    splits = {
        "train": sorted(uuids[:n_train]),
        "validation": sorted(uuids[n_train:n_train + n_val]),
        "test": sorted(uuids[n_train + n_val:]),
    }
    repo.save_splits(splits)
    return splits
