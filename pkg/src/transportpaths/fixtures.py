"""Worked example networks and matrices shipped as package data."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .docformat import Document, LabeledMatrix, parse_document, parse_matrix_csv

EXTENSIONS = (".tpd", ".csv")


def list_fixtures() -> list[str]:
    root = resources.files(__package__) / "fixtures"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(EXTENSIONS))


def fixture_text(name: str) -> tuple[str, str]:
    """Text of a fixture and its resolved file name; the extension may be omitted."""
    root = resources.files(__package__) / "fixtures"
    base = Path(name).name
    for candidate in (base, *(base + ext for ext in EXTENSIONS)):
        entry = root / candidate
        if entry.is_file():
            return entry.read_text(encoding="utf-8"), candidate
    raise FileNotFoundError(f"no fixture named {name!r}")


def load_fixture(name: str) -> Document | LabeledMatrix:
    text, resolved = fixture_text(name)
    if resolved.endswith(".csv"):
        return parse_matrix_csv(text)
    return parse_document(text)
