import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def load_golden_trees():
    from lexsyn.treepat import parse_ptb

    trees = []
    for line in (FIXTURES / "golden_treebank.txt").read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            trees.append(parse_ptb(line))
    return trees


def load_transcripts() -> dict:
    return json.loads((FIXTURES / "transcripts.json").read_text())


def write_jsonl(path: Path, records: list[dict]) -> Path:
    path.write_text("".join(json.dumps(r) + "\n" for r in records))
    return path
