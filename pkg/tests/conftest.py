from __future__ import annotations

from pathlib import Path

import pytest

from solsum import corpus
from solsum.parser import SourceUnit, parse_source

FIXTURE_DIR = Path(__file__).parent / "fixtures"
CORPUS_DIR = FIXTURE_DIR / "corpus"
DATA_DIR = Path(__file__).parent / "data"

CALLGRAPH_FIXTURES = [
    "table7.sol",
    "cycle_ring.sol",
    "deep_chain.sol",
    "self_recursion.sol",
    "two_cycles.sol",
    "diamond.sol",
    "inherit.sol",
    "cross_contract.sol",
    "repeat_counts.sol",
    "overloads.sol",
    "builtins.sol",
    "external_calls.sol",
    "kitchen_sink.sol",
]

CORPUS_RATIOS = (0.5, 0.25, 0.25)
CORPUS_SEED = 11


def load_unit(name: str) -> SourceUnit:
    path = FIXTURE_DIR / name
    return parse_source(path.read_text(encoding="utf-8"), path.as_posix())


@pytest.fixture(scope="session")
def table7_unit() -> SourceUnit:
    return load_unit("table7.sol")


@pytest.fixture(scope="session")
def cycle_unit() -> SourceUnit:
    return load_unit("cycle_ring.sol")


def build_corpus_repo(root: Path) -> corpus.Repository:
    """Ingest the corpus fixture files into a fresh repository and split it."""
    repo = corpus.Repository(root)
    for path in sorted(CORPUS_DIR.glob("*.sol")):
        corpus.ingest_file(repo, path)
    corpus.split_dataset(repo, CORPUS_RATIOS, CORPUS_SEED)
    return repo


@pytest.fixture(scope="session")
def corpus_repo(tmp_path_factory) -> corpus.Repository:
    """Shared read-only repository over the corpus fixtures."""
    return build_corpus_repo(tmp_path_factory.mktemp("repo"))
