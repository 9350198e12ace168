"""Spec documents shipped with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def fixture_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files(__name__).iterdir() if p.name.endswith(".json"))


def fixture_path(name: str) -> Path:
    path = resources.files(__name__) / f"{name}.json"
    if not path.is_file():
        raise KeyError(f"no fixture named {name!r}; available: {fixture_names()}")
    return Path(str(path))


def load_fixture(name: str):
    from ..document import parse_spec

    return parse_spec(fixture_path(name))
