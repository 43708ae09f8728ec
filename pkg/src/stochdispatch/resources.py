"""Access to bundled fixture files (networks, cases, configs)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .dispatch import DispatchCase
from .network import NetworkModel


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled fixture (works for installed packages)."""
    ref = resources.files("stochdispatch.fixtures") / name
    with resources.as_file(ref) as path:
        return Path(path)


def load_network(name: str = "network_6bus.json") -> NetworkModel:
    return NetworkModel.from_json_file(fixture_path(name))


def load_case(name: str = "case_6bus.json") -> DispatchCase:
    return DispatchCase.from_json_file(fixture_path(name))
