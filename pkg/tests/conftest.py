import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from slc.coherence import CoherencePolicy
from slc.linker import check_sources

CORPUS = Path(__file__).parent.parent / "corpus"


def corpus_sources(*names: str) -> list[tuple[str, bytes]]:
    out = []
    for name in names:
        path = CORPUS / name
        out.append((str(path), path.read_bytes()))
    return out


def check_inline(policy_kind: str = "use-site", /, **files: str):
    """Check a program given as {module_file_stem: source_text}."""
    sources = [(f"{name}.sl", text.encode()) for name, text in files.items()]
    return check_sources(sources, CoherencePolicy(policy_kind))


def check_inline_policy(policy: CoherencePolicy, **files: str):
    sources = [(f"{name}.sl", text.encode()) for name, text in files.items()]
    return check_sources(sources, policy)


def codes(result) -> list[str]:
    return [d.code for d in result.diagnostics]


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS
