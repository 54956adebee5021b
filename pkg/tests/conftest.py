"""Shared fixtures: deterministic toy corpora."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import synth_articles  # noqa: E402

from factkit.corpus import CorpusHandle, IngestConfig, ingest  # noqa: E402


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory) -> Path:
    """A 200-paragraph corpus (50 articles x 4 paragraphs incl. headline)."""
    out = tmp_path_factory.mktemp("corpus")
    ingest(synth_articles(50, seed=7), out, IngestConfig())
    return out


@pytest.fixture(scope="session")
def corpus(corpus_dir) -> CorpusHandle:
    handle = CorpusHandle.open(corpus_dir)
    yield handle
    handle.close()
