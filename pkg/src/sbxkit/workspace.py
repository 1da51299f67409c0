"""Workspace: one directory holding everything a sandbox engagement produces.

    <root>/
      principals.sbx     principal/token table (seeded with defaults)
      records.db         record database (store)
      artefacts/         content-addressed blobs, one tree per zone
      audit.log          workspace-level audit chain
      runs/<run_id>/     one directory per run

The workspace root comes from an explicit path or the ``SBX_WORKSPACE``
environment variable.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any

from .audit import AuditLog
from .dsl.model import Zone
from .rbac import DEFAULT_PRINCIPALS_DOC, Decision, Principal, PrincipalTable, authorize, load_principals, zone_set
from .store import ArtefactRef, Store, ZoneAccessError

ENV_WORKSPACE = "SBX_WORKSPACE"


class WorkspaceError(Exception):
    pass


def resolve_root(explicit: str | os.PathLike | None = None) -> Path:
    if explicit:
        return Path(explicit)
    env = os.environ.get(ENV_WORKSPACE)
    if env:
        return Path(env)
    raise WorkspaceError(
        f"no workspace given: pass --workspace or set {ENV_WORKSPACE}")


class Workspace:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.store = Store(self.root)
        self.audit = AuditLog(self.root / "audit.log")
        self.principals = self._load_principals()

    @classmethod
    def open(cls, root: str | os.PathLike | None = None) -> "Workspace":
        return cls(resolve_root(root))

    def _load_principals(self) -> PrincipalTable:
        path = self.root / "principals.sbx"
        if not path.exists():
            path.write_text(DEFAULT_PRINCIPALS_DOC, encoding="utf-8")
        return load_principals(path.read_text(encoding="utf-8"))

    def principal(self, principal_id: str) -> Principal | None:
        return self.principals.get(principal_id)

    def runs_dir(self) -> Path:
        path = self.root / "runs"
        path.mkdir(parents=True, exist_ok=True)
        return path

    def run_dir(self, run_id: str) -> Path:
        return self.runs_dir() / run_id

    # -- audited authorization -------------------------------------------------

    def check(self, principal: Principal | None, action: str,
              resource_zone: Zone | None = None) -> Decision:
        """Authorize and audit every denial (denials leave no other trace)."""
        decision = authorize(principal, action, resource_zone)
        if not decision:
            actor = principal.actor if principal else "unknown:unknown"
            self.audit.append(actor, "authz.denied",
                              {"action": action, "reason": decision.reason,
                               "zone": resource_zone.value if resource_zone else None})
        return decision

    def read_artefact(self, principal: Principal, ref: ArtefactRef) -> bytes:
        try:
            return self.store.get_artefact(ref, zone_set(principal))
        except ZoneAccessError:
            self.audit.append(principal.actor, "store.access_denied",
                              {"digest": ref.digest, "zone": ref.zone.value})
            raise

    # -- config registry -------------------------------------------------------

    def save_config(self, canonical_text: str, name: str) -> str:
        from .store import sha256_hex

        digest = sha256_hex(canonical_text.encode("utf-8"))
        if not self.store.has_record("config", digest):
            self.store.put_record("config", digest,
                                  {"name": name, "canonical": canonical_text})
        return digest

    def load_config_text(self, digest: str) -> str:
        return self.store.get_record("config", digest)["canonical"]

    def seed_controls(self, config_digest: str, controls: list[dict[str, Any]]) -> None:
        """Track live control statuses; existing entries keep their status."""
        for control in controls:
            control_id = control["control_id"]
            if not self.store.has_record("control", control_id):
                self.store.put_record("control", control_id,
                                      {"config_digest": config_digest, **control})
