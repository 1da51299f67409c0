"""Role-based access control: permission matrix, zones, principals.

The matrix is ship-time data.  It encodes a strict separation of duties:
the competent authority inspects controls and never starts test runs, the
provider submits configurations but cannot touch control statuses or the
audit export, technical experts plan and run evaluations, and the auditor
is read-only plus audit export.  Changing the matrix means shipping a new
toolkit version, which is deliberate.

Principals are declared in a `principals.sbx` document; bearer tokens for
the HTTP surface map through the same table.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable

from .dsl.binding import BlockReader, check_unique, identifier_label
from .dsl.model import Role, Zone
from .dsl.syntax import parse_raw

ACTIONS = (
    "submit_config",
    "validate_config",
    "assemble_plan",
    "start_run",
    "view_run",
    "view_confidential_artefacts",
    "view_shared_artefacts",
    "inspect_controls",
    "update_control_status",
    "generate_report",
    "view_report",
    "export_audit",
    "register_module",
    "register_expert",
)

PERMISSION_MATRIX: dict[Role, frozenset[str]] = {
    Role.PROVIDER: frozenset({
        "submit_config",
        "validate_config",
        "start_run",
        "view_run",
        "view_confidential_artefacts",
        "view_shared_artefacts",
        "view_report",
    }),
    Role.COMPETENT_AUTHORITY: frozenset({
        "validate_config",
        "assemble_plan",
        "view_run",
        "inspect_controls",
        "update_control_status",
        "generate_report",
        "view_report",
        "export_audit",
        "view_shared_artefacts",
        "register_expert",
    }),
    Role.TECHNICAL_EXPERT: frozenset({
        "validate_config",
        "assemble_plan",
        "start_run",
        "view_run",
        "view_confidential_artefacts",
        "view_shared_artefacts",
        "generate_report",
        "view_report",
        "register_module",
    }),
    Role.AUDITOR: frozenset({
        "view_run",
        "view_report",
        "view_shared_artefacts",
        "export_audit",
    }),
}

ZONE_TABLE: dict[Role, frozenset[Zone]] = {
    Role.PROVIDER: frozenset({Zone.CONFIDENTIAL, Zone.SHARED}),
    Role.COMPETENT_AUTHORITY: frozenset({Zone.SHARED, Zone.REGULATORY}),
    Role.TECHNICAL_EXPERT: frozenset({Zone.CONFIDENTIAL, Zone.SHARED}),
    Role.AUDITOR: frozenset({Zone.SHARED, Zone.REGULATORY}),
}


@dataclass(frozen=True)
class Principal:
    principal_id: str
    role: Role

    @property
    def actor(self) -> str:
        return f"{self.role.value}:{self.principal_id}"


@dataclass(frozen=True)
class Decision:
    allowed: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.allowed


ALLOW = Decision(True)


def authorize(principal: Principal | None, action: str,
              resource_zone: Zone | None = None) -> Decision:
    """Deny-by-default decision for one (principal, action, zone) request."""
    if principal is None:
        return Decision(False, "unknown_principal")
    if action not in ACTIONS:
        return Decision(False, f"unknown_action:{action}")
    if action not in PERMISSION_MATRIX[principal.role]:
        return Decision(False, f"role_forbids:{action}")
    if resource_zone is not None and resource_zone not in ZONE_TABLE[principal.role]:
        return Decision(False, f"zone_denied:{resource_zone.value}")
    return ALLOW


def zone_set(principal: Principal) -> frozenset[Zone]:
    return ZONE_TABLE[principal.role]


# --- principal table ----------------------------------------------------------

DEFAULT_PRINCIPALS_DOC = """\
# Principal and bearer-token table for this workspace.  Edit freely; each
# principal needs a unique id, a role and (for HTTP access) a token.
principals {
 principal provider-1 { role: provider token: "dev-token-provider" }
 principal authority-1 { role: competent_authority token: "dev-token-authority" }
 principal expert-1 { role: technical_expert token: "dev-token-expert" }
 principal auditor-1 { role: auditor token: "dev-token-auditor" }
}
"""


@dataclass
class PrincipalTable:
    by_id: dict[str, Principal]
    by_token: dict[str, Principal]

    def get(self, principal_id: str) -> Principal | None:
        return self.by_id.get(principal_id)

    def by_bearer(self, token: str) -> Principal | None:
        return self.by_token.get(token)

    def ids(self) -> list[str]:
        return sorted(self.by_id)


def load_principals(source: str) -> PrincipalTable:
    blocks = parse_raw(source)
    by_id: dict[str, Principal] = {}
    by_token: dict[str, Principal] = {}
    labels = []
    for block in blocks:
        if block.keyword != "principals":
            continue
        reader = BlockReader(block, "principals")
        for child in reader.children(["principal"]):
            principal_id = identifier_label(child, "principal")
            labels.append((principal_id, child.pos))
            body = BlockReader(child, f"principals.{principal_id}")
            principal = Principal(principal_id, body.enum("role", Role))
            token = body.string("token", default="")
            by_id[principal_id] = principal
            if token:
                by_token[token] = principal
    check_unique(labels, "principal")
    return PrincipalTable(by_id, by_token)


def matrix_as_data() -> dict[str, Any]:
    return {role.value: sorted(actions) for role, actions in PERMISSION_MATRIX.items()}


def allowed_actions(role: Role) -> list[str]:
    return sorted(PERMISSION_MATRIX[role])


def zones_as_values(zones: Iterable[Zone]) -> list[str]:
    return sorted(zone.value for zone in zones)
