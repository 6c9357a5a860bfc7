import json
from pathlib import Path

import pytest

from lpterm.parser import parse_ground_atoms, parse_program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


def corpus_names() -> list[str]:
    return sorted(f.stem for f in CORPUS.glob("*.lp") if not f.stem.endswith(".facts"))


def load_program(name: str):
    return parse_program((CORPUS / f"{name}.lp").read_text(encoding="utf-8"))


def load_facts(name: str):
    path = CORPUS / f"{name}.facts.lp"
    if not path.exists():
        return None
    return parse_ground_atoms(path.read_text(encoding="utf-8"))


def load_expected(name: str) -> dict:
    path = CORPUS / f"{name}.expected.json"
    return json.loads(path.read_text(encoding="utf-8")) if path.exists() else {}
