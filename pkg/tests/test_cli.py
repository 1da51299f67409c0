from __future__ import annotations

import json
from pathlib import Path

import pytest

from sbxkit.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


def run_cli(*argv: str) -> int:
    return main(list(argv))


@pytest.fixture()
def ws_args(workspace):
    return ["--workspace", str(workspace.root)]


def read_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_triage_minimal(ws_args, capsys):
    code = run_cli("--output", "json", "triage", str(FIXTURES / "answers_minimal.sbx"))
    assert code == 0
    data = read_json(capsys)
    assert data["risk_class"] == "minimal"
    assert data["routes"] == ["helpdesk"]
    assert data["notice"] == "non-binding guidance"


def test_triage_high_risk(ws_args, capsys):
    code = run_cli("--output", "json", "triage", str(FIXTURES / "answers_safecorp.sbx"))
    assert code == 0
    data = read_json(capsys)
    assert data["risk_class"] == "high"
    assert data["routes"] == ["extended_airs"]


def test_validate_good_config(ws_args, capsys):
    code = run_cli(*ws_args, "validate", str(FIXTURES / "safecorp.sbx"))
    assert code == 0
    assert "ok" in capsys.readouterr().out


def test_validate_invalid_config(ws_args, capsys):
    code = run_cli(*ws_args, "--output", "json", "validate",
                   str(FIXTURES / "corpus" / "invalid" / "v001_dangling_objective.sbx"))
    assert code == 1
    data = read_json(capsys)
    assert data["ok"] is False
    assert data["diagnostics"][0]["code"] == "V001"


def test_validate_parse_error_exit_code(ws_args, tmp_path, capsys):
    bad = tmp_path / "broken.sbx"
    bad.write_text('sandbox "x" {', encoding="utf-8")
    code = run_cli(*ws_args, "validate", str(bad))
    assert code == 1
    assert "parse error" in capsys.readouterr().err


def test_plan_without_catalogue_lists_gaps(ws_args, capsys):
    code = run_cli(*ws_args, "plan", str(FIXTURES / "safecorp.sbx"),
                   "--mapping", str(FIXTURES / "safecorp_mapping.sbx"))
    assert code == 1
    err = capsys.readouterr().err
    assert "gap" in err.lower()


def test_full_pipeline_via_cli(ws_args, workspace, capsys):
    assert run_cli(*ws_args, "catalogue", "seed") == 0
    capsys.readouterr()

    assert run_cli(*ws_args, "validate", str(FIXTURES / "safecorp.sbx")) == 0
    capsys.readouterr()

    code = run_cli(*ws_args, "--output", "json", "plan", str(FIXTURES / "safecorp.sbx"),
                   "--mapping", str(FIXTURES / "safecorp_mapping.sbx"))
    assert code == 0
    plan_data = read_json(capsys)
    plan_id = plan_data["plan_id"]

    code = run_cli(*ws_args, "--output", "json", "run", plan_id,
                   "--executors", "local:2")
    assert code == 0
    run_data = read_json(capsys)
    assert set(run_data["step_status"].values()) == {"done"}
    run_id = run_data["run_id"]

    code = run_cli(*ws_args, "--output", "json", "report", run_id)
    assert code == 0
    report_data = read_json(capsys)
    assert len(report_data["sections"]) == 8

    code = run_cli(*ws_args, "--principal", "auditor-1", "audit", "verify")
    assert code == 0
    assert (workspace.run_dir(run_id) / "report.json").exists()


def test_run_with_failing_step_exits_3(ws_args, workspace, capsys):
    from engine_helpers import register_fixture_plugin, sealed_plan, test_step
    from sbxkit.catalogue import Catalogue

    catalogue = Catalogue(workspace.store)
    descriptor = register_fixture_plugin(catalogue, "always-fail", "failing.py")
    plan = sealed_plan([test_step("test.t1", descriptor)])
    workspace.store.put_record("plan", plan.plan_id, plan.to_data())
    code = run_cli(*ws_args, "run", plan.plan_id)
    assert code == 3


def test_audit_verify_detects_tampering(ws_args, workspace, capsys):
    workspace.audit.append("provider:alice", "config.submitted", {})
    raw = bytearray(workspace.audit.path.read_bytes())
    raw[20] ^= 0x01
    workspace.audit.path.write_bytes(bytes(raw))
    code = run_cli(*ws_args, "--principal", "authority-1", "audit", "verify")
    assert code == 4


def test_audit_export_and_verify_file(ws_args, workspace, tmp_path, capsys):
    for i in range(4):
        workspace.audit.append("provider:alice", "config.submitted", {"n": i})
    code = run_cli(*ws_args, "--principal", "authority-1", "audit", "export")
    assert code == 0
    export_text = capsys.readouterr().out
    export_path = tmp_path / "chain.export"
    export_path.write_text(export_text, encoding="utf-8")
    code = run_cli(*ws_args, "--principal", "authority-1", "audit", "verify",
                   str(export_path))
    assert code == 0


def test_permission_denied_is_usage_error(ws_args, capsys):
    code = run_cli(*ws_args, "--principal", "auditor-1", "plan",
                   str(FIXTURES / "safecorp.sbx"))
    assert code == 2
    assert "permission denied" in capsys.readouterr().err


def test_unknown_principal_denied(ws_args, capsys):
    code = run_cli(*ws_args, "--principal", "ghost", "validate",
                   str(FIXTURES / "safecorp.sbx"))
    assert code == 2


def test_catalogue_list_and_resolve(ws_args, capsys):
    run_cli(*ws_args, "catalogue", "seed")
    capsys.readouterr()
    code = run_cli(*ws_args, "--output", "json", "catalogue", "list")
    assert code == 0
    data = read_json(capsys)
    assert len(data["modules"]) == 3

    code = run_cli(*ws_args, "--output", "json", "catalogue", "resolve",
                   "bias-detection@^1.0.0")
    assert code == 0
    data = read_json(capsys)
    assert data["bindings"]["bias-detection"]["version"] == "1.0.0"

    code = run_cli(*ws_args, "catalogue", "resolve", "bias-detection@^9.0.0")
    assert code == 1


def test_catalogue_add_from_export(ws_args, workspace, tmp_path, capsys):
    from sbxkit.catalogue import Catalogue
    from sbxkit.plugins import reference_descriptors

    export = {"metadata_schema_version": 1,
              "modules": [reference_descriptors()[0].to_data()], "experts": []}
    path = tmp_path / "catalogue.json"
    path.write_text(json.dumps(export), encoding="utf-8")
    code = run_cli(*ws_args, "catalogue", "add", str(path))
    assert code == 0
    assert len(Catalogue(workspace.store).modules()) == 1


def test_diff_command(ws_args, tmp_path, capsys):
    old = FIXTURES / "safecorp.sbx"
    new_text = old.read_text().replace("priority: high", "priority: medium", 1)
    new = tmp_path / "new.sbx"
    new.write_text(new_text, encoding="utf-8")
    code = run_cli(*ws_args, "--output", "json", "diff", str(old), str(new))
    assert code == 0
    changes = read_json(capsys)
    assert len(changes) == 1
    assert changes[0]["kind"] == "modified"
    assert changes[0]["path"] == "objectives/robustness/priority"


def test_diff_identical_files(ws_args, capsys):
    path = str(FIXTURES / "safecorp.sbx")
    code = run_cli(*ws_args, "diff", path, path)
    assert code == 0
    assert "no changes" in capsys.readouterr().out


def test_usage_error_on_unknown_command(capsys):
    assert run_cli("frobnicate") == 2


def test_missing_file_is_usage_error(ws_args, capsys):
    code = run_cli(*ws_args, "validate", "/nonexistent/path.sbx")
    assert code == 2


def test_text_output_is_stable(ws_args, capsys):
    run_cli(*ws_args, "catalogue", "seed")
    capsys.readouterr()
    run_cli(*ws_args, "catalogue", "list")
    first = capsys.readouterr().out
    run_cli(*ws_args, "catalogue", "list")
    second = capsys.readouterr().out
    assert first == second
