from __future__ import annotations

import itertools

import pytest

from sbxkit.dsl.model import Role, Zone
from sbxkit.rbac import (
    ACTIONS,
    PERMISSION_MATRIX,
    Principal,
    ZONE_TABLE,
    authorize,
    load_principals,
    zone_set,
    DEFAULT_PRINCIPALS_DOC,
)

# The shipped matrix, restated literally so a drift in rbac.py cannot
# silently rewrite this test's expectations.
EXPECTED_MATRIX = {
    "provider": {
        "submit_config", "validate_config", "start_run", "view_run",
        "view_confidential_artefacts", "view_shared_artefacts", "view_report",
    },
    "competent_authority": {
        "validate_config", "assemble_plan", "view_run", "inspect_controls",
        "update_control_status", "generate_report", "view_report",
        "export_audit", "view_shared_artefacts", "register_expert",
    },
    "technical_expert": {
        "validate_config", "assemble_plan", "start_run", "view_run",
        "view_confidential_artefacts", "view_shared_artefacts",
        "generate_report", "view_report", "register_module",
    },
    "auditor": {"view_run", "view_report", "view_shared_artefacts", "export_audit"},
}

EXPECTED_ZONES = {
    "provider": {"confidential", "shared"},
    "competent_authority": {"shared", "regulatory"},
    "technical_expert": {"confidential", "shared"},
    "auditor": {"shared", "regulatory"},
}


def principal(role: Role) -> Principal:
    return Principal(f"{role.value}-p", role)


def test_matrix_is_total_and_matches_expectation():
    assert len(ACTIONS) == 14
    for role in Role:
        granted = {a for a in ACTIONS if authorize(principal(role), a)}
        assert granted == EXPECTED_MATRIX[role.value], role


def test_every_role_action_pair_decided():
    for role, action in itertools.product(Role, ACTIONS):
        decision = authorize(principal(role), action)
        assert decision.allowed in (True, False)
        if not decision.allowed:
            assert decision.reason


def test_separation_of_duties():
    assert not authorize(principal(Role.PROVIDER), "update_control_status")
    assert not authorize(principal(Role.PROVIDER), "export_audit")
    auditor_granted = PERMISSION_MATRIX[Role.AUDITOR]
    assert auditor_granted <= {"view_run", "view_report", "view_shared_artefacts",
                               "export_audit"}


def test_examples_from_the_matrix():
    assert authorize(principal(Role.PROVIDER), "start_run")
    assert not authorize(principal(Role.PROVIDER), "update_control_status")
    assert not authorize(principal(Role.AUDITOR), "start_run")


def test_zone_sets():
    for role in Role:
        assert {z.value for z in zone_set(principal(role))} == EXPECTED_ZONES[role.value]


def test_zone_gate_in_authorize():
    ca = principal(Role.COMPETENT_AUTHORITY)
    assert authorize(ca, "view_shared_artefacts", Zone.SHARED)
    denied = authorize(ca, "view_shared_artefacts", Zone.CONFIDENTIAL)
    assert not denied
    assert "zone_denied" in denied.reason


def test_unknown_principal_denied():
    decision = authorize(None, "view_run")
    assert not decision
    assert decision.reason == "unknown_principal"


def test_unknown_action_denied_by_default():
    decision = authorize(principal(Role.COMPETENT_AUTHORITY), "reboot_world")
    assert not decision


def test_default_principals_parse():
    table = load_principals(DEFAULT_PRINCIPALS_DOC)
    assert table.ids() == ["auditor-1", "authority-1", "expert-1", "provider-1"]
    assert table.by_bearer("dev-token-expert").role is Role.TECHNICAL_EXPERT
    assert table.by_bearer("nope") is None


def test_zone_table_covers_every_role():
    assert set(ZONE_TABLE) == set(Role)
