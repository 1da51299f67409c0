from __future__ import annotations

from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def safecorp_source() -> str:
    return (FIXTURES / "safecorp.sbx").read_text(encoding="utf-8")


@pytest.fixture()
def workspace(tmp_path, monkeypatch):
    from sbxkit.workspace import Workspace

    root = tmp_path / "ws"
    monkeypatch.setenv("SBX_WORKSPACE", str(root))
    return Workspace.open(root)
