from pathlib import Path

import pytest

from helam.surface import compile_text

CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"

CORPUS_FILES = sorted(p.stem for p in CORPUS_DIR.glob("*.hll"))


@pytest.fixture(scope="session")
def corpus():
    """Loader for corpus programs by stem name."""
    cache = {}

    def load(name, theta=None):
        key = (name, theta)
        if key not in cache:
            text = (CORPUS_DIR / f"{name}.hll").read_text(encoding="utf-8")
            cache[key] = compile_text(text, theta)
        return cache[key]

    return load


@pytest.fixture(scope="session")
def corpus_dir():
    return CORPUS_DIR
