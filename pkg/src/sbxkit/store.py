"""Workspace persistence: content-addressed artefacts and durable records.

Layout under the workspace root:

    artefacts/<zone>/<ab>/<cd>/<digest>   two-level fan-out per zone
    records.db                            embedded sqlite database

Artefacts are immutable and addressed by the SHA-256 of their bytes; zones
(`confidential`, `shared`, `regulatory`) isolate readers and are never
merged.  Records (configs, plans, runs, catalogue descriptors, control
statuses, reports) are JSON payloads in a single table, append-oriented and
listed in creation order.  The on-disk layout is stable so auditors can
inspect a workspace with nothing but standard tools.
"""

from __future__ import annotations

import hashlib
import json
import os
import sqlite3
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .dsl.model import Zone

SCHEMA_VERSION = 1
RECORD_SCHEMA = 1


class StoreError(Exception):
    pass


class NotFoundError(StoreError):
    pass


class ConflictError(StoreError):
    pass


class ZoneAccessError(StoreError):
    pass


class IntegrityError(StoreError):
    pass


class SchemaVersionError(StoreError):
    pass


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_json(data: Any) -> str:
    """Compact, key-sorted JSON; the canonical byte form for every digest."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class ArtefactRef:
    digest: str
    size_bytes: int
    media_hint: str
    zone: Zone

    def to_data(self) -> dict[str, Any]:
        return {
            "digest": self.digest,
            "size_bytes": self.size_bytes,
            "media_hint": self.media_hint,
            "zone": self.zone.value,
        }


class Store:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.db_path = self.root / "records.db"
        self._init_db()

    # -- database ----------------------------------------------------------

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self.db_path, timeout=30)
        conn.execute("PRAGMA busy_timeout = 30000")
        return conn

    def _init_db(self) -> None:
        with self._connect() as conn:
            conn.execute("PRAGMA journal_mode = WAL")
            conn.execute(
                "CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value TEXT NOT NULL)")
            conn.execute(
                "CREATE TABLE IF NOT EXISTS records ("
                " kind TEXT NOT NULL,"
                " id TEXT NOT NULL,"
                " created TEXT NOT NULL,"
                " payload TEXT NOT NULL,"
                " PRIMARY KEY (kind, id))")
            row = conn.execute("SELECT value FROM meta WHERE key = 'schema_version'").fetchone()
            if row is None:
                conn.execute("INSERT INTO meta VALUES ('schema_version', ?)",
                             (str(SCHEMA_VERSION),))
            elif row[0] != str(SCHEMA_VERSION):
                raise SchemaVersionError(
                    f"workspace database schema version {row[0]} is not supported "
                    f"(expected {SCHEMA_VERSION}); no silent migration is performed")

    def put_record(self, kind: str, record_id: str, payload: dict[str, Any],
                   replace: bool = False, created: str | None = None) -> None:
        from .clock import utc_now_iso

        body = dict(payload)
        body["record_schema"] = RECORD_SCHEMA
        text = canonical_json(body)
        with self._connect() as conn:
            existing = conn.execute(
                "SELECT payload FROM records WHERE kind = ? AND id = ?",
                (kind, record_id)).fetchone()
            if existing is not None and not replace:
                if existing[0] == text:
                    return  # idempotent re-write
                raise ConflictError(f"{kind} record '{record_id}' already exists")
            if existing is not None:
                conn.execute("UPDATE records SET payload = ? WHERE kind = ? AND id = ?",
                             (text, kind, record_id))
            else:
                conn.execute("INSERT INTO records (kind, id, created, payload) VALUES (?,?,?,?)",
                             (kind, record_id, created or utc_now_iso(), text))

    def get_record(self, kind: str, record_id: str) -> dict[str, Any]:
        with self._connect() as conn:
            row = conn.execute("SELECT payload FROM records WHERE kind = ? AND id = ?",
                               (kind, record_id)).fetchone()
        if row is None:
            raise NotFoundError(f"no {kind} record with id '{record_id}'")
        return self._decode(kind, record_id, row[0])

    def has_record(self, kind: str, record_id: str) -> bool:
        with self._connect() as conn:
            row = conn.execute("SELECT 1 FROM records WHERE kind = ? AND id = ?",
                               (kind, record_id)).fetchone()
        return row is not None

    def list_records(self, kind: str) -> list[tuple[str, dict[str, Any]]]:
        """(id, payload) pairs ordered by creation time, then id."""
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT id, payload FROM records WHERE kind = ? ORDER BY created, id, rowid",
                (kind,)).fetchall()
        return [(record_id, self._decode(kind, record_id, payload))
                for record_id, payload in rows]

    @staticmethod
    def _decode(kind: str, record_id: str, payload: str) -> dict[str, Any]:
        data = json.loads(payload)
        schema = data.pop("record_schema", None)
        if schema != RECORD_SCHEMA:
            raise SchemaVersionError(
                f"{kind} record '{record_id}' has record_schema {schema!r}; "
                f"this toolkit reads version {RECORD_SCHEMA} only")
        return data

    # -- artefacts -----------------------------------------------------------

    def artefact_path(self, zone: Zone, digest: str) -> Path:
        return self.root / "artefacts" / zone.value / digest[:2] / digest[2:4] / digest

    def put_artefact(self, data: bytes, zone: Zone, media_hint: str = "") -> ArtefactRef:
        digest = sha256_hex(data)
        path = self.artefact_path(zone, digest)
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
            try:
                with os.fdopen(fd, "wb") as handle:
                    handle.write(data)
                    handle.flush()
                    os.fsync(handle.fileno())
                os.replace(tmp, path)
            finally:
                if os.path.exists(tmp):
                    os.unlink(tmp)
        return ArtefactRef(digest, len(data), media_hint, zone)

    def get_artefact(self, ref: ArtefactRef, requester_zones: Iterable[Zone]) -> bytes:
        if ref.zone not in set(requester_zones):
            raise ZoneAccessError(
                f"access to zone '{ref.zone.value}' denied; requester holds "
                f"{sorted(z.value for z in requester_zones)}")
        path = self.artefact_path(ref.zone, ref.digest)
        if not path.exists():
            raise NotFoundError(f"artefact {ref.digest} not found in zone '{ref.zone.value}'")
        data = path.read_bytes()
        actual = sha256_hex(data)
        if actual != ref.digest:
            raise IntegrityError(
                f"artefact {ref.digest} failed integrity check: stored bytes hash to {actual}")
        return data

    def find_artefact(self, digest: str) -> list[ArtefactRef]:
        """All zone-qualified refs holding this digest (zones never merge)."""
        refs = []
        for zone in Zone:
            path = self.artefact_path(zone, digest)
            if path.exists():
                refs.append(ArtefactRef(digest, path.stat().st_size, "", zone))
        return refs
