from __future__ import annotations

from pathlib import Path

import pytest

from sbxkit.dsl import parse, validate

CORPUS = Path(__file__).parent / "fixtures" / "corpus"

# file stem prefix -> the single diagnostic code that file must trigger
EXPECTED_CODES = {
    "v001": "V001",
    "v002": "V002",
    "v003": "V003",
    "v004": "V004",
    "v005": "V005",
    "v006": "V006",
    "v007": "V007",
    "v008": "V008",
    "v009": "V009",
    "v010": "V010",
    "v011": "V011",
    "v012": "V012",
    "v013": "V013",
    "v014": "V014",
}

WARNING_CODES = {"V014"}


def corpus_files(kind: str) -> list[Path]:
    return sorted((CORPUS / kind).glob("*.sbx"))


@pytest.mark.parametrize("path", corpus_files("valid"), ids=lambda p: p.stem)
def test_valid_corpus_is_clean(path: Path):
    report = validate(parse(path.read_text(encoding="utf-8")))
    assert report.ok
    assert report.diagnostics == []


@pytest.mark.parametrize("path", corpus_files("invalid"), ids=lambda p: p.stem)
def test_invalid_corpus_triggers_designated_code_only(path: Path):
    expected = EXPECTED_CODES[path.stem.split("_")[0]]
    report = validate(parse(path.read_text(encoding="utf-8")))
    assert set(report.codes()) == {expected}
    if expected in WARNING_CODES:
        assert report.ok
    else:
        assert not report.ok


def test_every_code_is_covered():
    triggered = set()
    for path in corpus_files("invalid"):
        triggered.update(validate(parse(path.read_text(encoding="utf-8"))).codes())
    assert triggered == {f"V{n:03d}" for n in range(1, 15)}


def test_prohibited_diagnostic_cites_routing_rule():
    source = (CORPUS / "invalid" / "v002_prohibited_risk.sbx").read_text(encoding="utf-8")
    report = validate(parse(source))
    assert "cease development or reduce the level of risk" in report.diagnostics[0].message


def test_dangling_reference_diagnostic_positions():
    source = (CORPUS / "invalid" / "v001_dangling_objective.sbx").read_text(encoding="utf-8")
    report = validate(parse(source))
    diag = report.diagnostics[0]
    assert diag.code == "V001"
    assert diag.pos.line > 1
