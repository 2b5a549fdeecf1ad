"""Shared pytest fixtures."""

from __future__ import annotations

from pathlib import Path

import pytest


@pytest.fixture
def e2e_dir() -> Path:
    return Path(__file__).parent / "data" / "e2e"


@pytest.fixture
def repo_root() -> Path:
    return Path(__file__).parent.parent
