"""Tamper-evident audit chain.

Every entry hashes the canonical text ``index|timestamp|actor|action|
payload_digest|prev_hash`` (fields joined by ``|``, no spaces) with SHA-256
and links to its predecessor, so any modification, reordering, deletion or
truncation of a chain is detectable.  Entry zero links to sixty-four zeros.
Timestamps sit inside the hash on purpose: recorded clocks cannot be fixed
up after the fact, which is exactly the property evidence needs.

The chain file is newline-delimited JSON, one entry per line.  Exports add a
trailing chain-head line (and, for ranged exports, a leading continuity
line) so a recipient can verify what they received stands on its own.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .clock import utc_now_iso
from .store import canonical_json, sha256_hex

GENESIS_HASH = "0" * 64

HASH_MISMATCH = "hash_mismatch"
LINK_MISMATCH = "link_mismatch"
INDEX_GAP = "index_gap"
MALFORMED = "malformed"
HEAD_MISMATCH = "head_mismatch"

_FIELD_SEPARATOR = "|"


class AuditError(Exception):
    pass


@dataclass(frozen=True)
class AuditEntry:
    index: int
    timestamp: str
    actor: str  # "<role>:<principal_id>"
    action: str
    payload_digest: str
    prev_hash: str
    entry_hash: str

    def canonical_text(self) -> str:
        return _FIELD_SEPARATOR.join((
            str(self.index), self.timestamp, self.actor, self.action,
            self.payload_digest, self.prev_hash))

    def to_data(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "timestamp": self.timestamp,
            "actor": self.actor,
            "action": self.action,
            "payload_digest": self.payload_digest,
            "prev_hash": self.prev_hash,
            "entry_hash": self.entry_hash,
        }

    @classmethod
    def from_data(cls, data: dict[str, Any]) -> "AuditEntry":
        return cls(
            index=int(data["index"]),
            timestamp=str(data["timestamp"]),
            actor=str(data["actor"]),
            action=str(data["action"]),
            payload_digest=str(data["payload_digest"]),
            prev_hash=str(data["prev_hash"]),
            entry_hash=str(data["entry_hash"]),
        )


@dataclass(frozen=True)
class ChainHead:
    length: int
    head_hash: str

    def to_data(self) -> dict[str, Any]:
        return {"length": self.length, "head_hash": self.head_hash}


@dataclass(frozen=True)
class Verdict:
    ok: bool
    broken_at: int | None = None
    reason: str | None = None

    def to_data(self) -> dict[str, Any]:
        if self.ok:
            return {"ok": True}
        return {"ok": False, "broken_at": self.broken_at, "reason": self.reason}


def entry_hash_of(index: int, timestamp: str, actor: str, action: str,
                  payload_digest: str, prev_hash: str) -> str:
    text = _FIELD_SEPARATOR.join((str(index), timestamp, actor, action,
                                  payload_digest, prev_hash))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class AuditLog:
    """Single-writer append-only chain bound to one file."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._length = 0
        self._head_hash = GENESIS_HASH
        self._broken: Verdict | None = None
        if self.path.exists():
            verdict = verify_file(self.path)
            if not verdict.ok:
                # still open (verify must be able to report the damage) but
                # never extend a broken chain
                self._broken = verdict
                return
            entries = read_entries(self.path)
            self._length = len(entries)
            if entries:
                self._head_hash = entries[-1].entry_hash

    def head(self) -> ChainHead:
        with self._lock:
            return ChainHead(self._length, self._head_hash)

    def append(self, actor: str, action: str, payload: Any) -> AuditEntry:
        for name, value in (("actor", actor), ("action", action)):
            if _FIELD_SEPARATOR in value:
                raise AuditError(f"audit {name} may not contain '{_FIELD_SEPARATOR}': {value!r}")
        payload_digest = sha256_hex(canonical_json(payload).encode("utf-8"))
        with self._lock:
            timestamp = utc_now_iso()
            entry = AuditEntry(
                index=self._length,
                timestamp=timestamp,
                actor=actor,
                action=action,
                payload_digest=payload_digest,
                prev_hash=self._head_hash,
                entry_hash=entry_hash_of(self._length, timestamp, actor, action,
                                         payload_digest, self._head_hash),
            )
            line = canonical_json(entry.to_data()) + "\n"
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "ab") as handle:
                handle.write(line.encode("utf-8"))
                handle.flush()
                os.fsync(handle.fileno())
            self._length += 1
            self._head_hash = entry.entry_hash
            return entry

    def entries(self) -> list[AuditEntry]:
        if not self.path.exists():
            return []
        return read_entries(self.path)

    def verify(self, expected_head: ChainHead | None = None) -> Verdict:
        return verify_file(self.path, expected_head)


# --- verification -----------------------------------------------------------


def _chain_lines(text: str) -> list[str]:
    # Strict LF framing: splitlines() would also split on \x0b and friends,
    # which could normalize away a mutated separator byte.
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def read_entries(path: Path) -> list[AuditEntry]:
    entries = []
    for line in _chain_lines(Path(path).read_text(encoding="utf-8")):
        entries.append(AuditEntry.from_data(json.loads(line)))
    return entries


def verify_entries(entries: list[AuditEntry],
                   expected_head: ChainHead | None = None) -> Verdict:
    prev_hash = GENESIS_HASH
    for position, entry in enumerate(entries):
        if entry.index != position:
            return Verdict(False, position, INDEX_GAP)
        recomputed = entry_hash_of(entry.index, entry.timestamp, entry.actor,
                                   entry.action, entry.payload_digest, entry.prev_hash)
        if recomputed != entry.entry_hash:
            return Verdict(False, position, HASH_MISMATCH)
        if entry.prev_hash != prev_hash:
            return Verdict(False, position, LINK_MISMATCH)
        prev_hash = entry.entry_hash
    if expected_head is not None:
        if expected_head.length != len(entries) or expected_head.head_hash != prev_hash:
            return Verdict(False, len(entries), HEAD_MISMATCH)
    return Verdict(True)


def verify_file(path: Path, expected_head: ChainHead | None = None) -> Verdict:
    """Verify a chain file; undecodable lines count as tampering."""
    try:
        raw = Path(path).read_bytes().decode("utf-8")
    except (OSError, UnicodeDecodeError):
        return Verdict(False, 0, MALFORMED)
    entries: list[AuditEntry] = []
    for position, line in enumerate(_chain_lines(raw)):
        try:
            data = json.loads(line)
            entries.append(AuditEntry.from_data(data))
        except (ValueError, KeyError, TypeError):
            return Verdict(False, position, MALFORMED)
    return verify_entries(entries, expected_head)


def verify_prefix(entries: list[AuditEntry], head: ChainHead) -> Verdict:
    """Check that `head` matches a verified prefix of the chain (evidence binding)."""
    if head.length > len(entries):
        return Verdict(False, head.length, HEAD_MISMATCH)
    return verify_entries(entries[: head.length], head)


# --- export / import ----------------------------------------------------------


def export_chain(entries: list[AuditEntry], start: int = 0,
                 end: int | None = None) -> str:
    """Portable newline-delimited export of entries [start, end].

    Ranged exports lead with a continuity line carrying the hash of the entry
    just before the range, and every export trails with the chain head at the
    end of the range, so recipients can verify without the full chain.
    """
    verdict = verify_entries(entries)
    if not verdict.ok:
        raise AuditError(
            f"refusing to export a broken chain (broken at {verdict.broken_at}: {verdict.reason})")
    if end is None:
        end = len(entries) - 1
    if start < 0 or end >= len(entries) or start > end:
        raise AuditError(f"export range [{start}, {end}] out of bounds for "
                         f"chain of length {len(entries)}")
    lines = []
    if start > 0:
        before = entries[start - 1]
        lines.append(canonical_json(
            {"continuity": {"index": before.index, "entry_hash": before.entry_hash}}))
    for entry in entries[start : end + 1]:
        lines.append(canonical_json(entry.to_data()))
    head = ChainHead(end + 1, entries[end].entry_hash)
    lines.append(canonical_json({"chain_head": head.to_data()}))
    return "\n".join(lines) + "\n"


def import_chain(text: str) -> tuple[list[AuditEntry], Verdict]:
    """Parse an export and verify it; returns the carried entries either way."""
    continuity_hash = GENESIS_HASH
    continuity_index = -1
    head: ChainHead | None = None
    entries: list[AuditEntry] = []
    for position, line in enumerate(_chain_lines(text)):
        try:
            data = json.loads(line)
        except ValueError:
            return entries, Verdict(False, position, MALFORMED)
        if "continuity" in data:
            continuity_hash = data["continuity"]["entry_hash"]
            continuity_index = int(data["continuity"]["index"])
            continue
        if "chain_head" in data:
            head = ChainHead(int(data["chain_head"]["length"]),
                             str(data["chain_head"]["head_hash"]))
            continue
        try:
            entries.append(AuditEntry.from_data(data))
        except (KeyError, TypeError, ValueError):
            return entries, Verdict(False, position, MALFORMED)
    verdict = _verify_segment(entries, continuity_index, continuity_hash, head)
    return entries, verdict


def _verify_segment(entries: list[AuditEntry], continuity_index: int,
                    continuity_hash: str, head: ChainHead | None) -> Verdict:
    prev_hash = continuity_hash
    expected_index = continuity_index + 1
    for position, entry in enumerate(entries):
        if entry.index != expected_index + position:
            return Verdict(False, position, INDEX_GAP)
        recomputed = entry_hash_of(entry.index, entry.timestamp, entry.actor,
                                   entry.action, entry.payload_digest, entry.prev_hash)
        if recomputed != entry.entry_hash:
            return Verdict(False, position, HASH_MISMATCH)
        if entry.prev_hash != prev_hash:
            return Verdict(False, position, LINK_MISMATCH)
        prev_hash = entry.entry_hash
    if head is not None:
        if not entries:
            return Verdict(False, 0, HEAD_MISMATCH)
        last = entries[-1]
        if head.length != last.index + 1 or head.head_hash != last.entry_hash:
            return Verdict(False, len(entries), HEAD_MISMATCH)
    return Verdict(True)


def actor_string(role: str, principal_id: str) -> str:
    return f"{role}:{principal_id}"
