from __future__ import annotations

import itertools
import os
import random

import pytest

from sbxkit.dsl.model import Zone
from sbxkit.store import (
    ConflictError,
    IntegrityError,
    NotFoundError,
    SchemaVersionError,
    Store,
    ZoneAccessError,
    sha256_hex,
)

EMPTY_SHA256 = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


@pytest.fixture()
def store(tmp_path) -> Store:
    return Store(tmp_path / "ws")


def test_put_is_idempotent_by_content(store):
    first = store.put_artefact(b"hello", Zone.SHARED, "text/plain")
    second = store.put_artefact(b"hello", Zone.SHARED, "text/plain")
    assert first == second


def test_empty_bytes_digest(store):
    ref = store.put_artefact(b"", Zone.SHARED)
    assert ref.digest == EMPTY_SHA256
    assert ref.size_bytes == 0


def test_large_blob_round_trips(store):
    blob = random.Random(7).randbytes(1024 * 1024)
    ref = store.put_artefact(blob, Zone.CONFIDENTIAL)
    assert store.get_artefact(ref, {Zone.CONFIDENTIAL}) == blob
    assert ref.digest == sha256_hex(blob)


def test_zone_isolation_over_full_lattice(store):
    refs = {zone: store.put_artefact(f"data-{zone.value}".encode(), zone) for zone in Zone}
    for requester_zones in map(set, itertools.chain.from_iterable(
            itertools.combinations(list(Zone), k) for k in range(4))):
        for zone, ref in refs.items():
            if zone in requester_zones:
                assert store.get_artefact(ref, requester_zones).endswith(zone.value.encode())
            else:
                with pytest.raises(ZoneAccessError):
                    store.get_artefact(ref, requester_zones)


def test_same_digest_in_two_zones_stays_separate(store):
    shared = store.put_artefact(b"dual", Zone.SHARED)
    confidential = store.put_artefact(b"dual", Zone.CONFIDENTIAL)
    assert shared.digest == confidential.digest
    assert shared.zone is not confidential.zone
    found = store.find_artefact(shared.digest)
    assert {ref.zone for ref in found} == {Zone.SHARED, Zone.CONFIDENTIAL}


def test_corrupted_blob_detected(store):
    ref = store.put_artefact(b"pristine bytes", Zone.SHARED)
    path = store.artefact_path(Zone.SHARED, ref.digest)
    raw = bytearray(path.read_bytes())
    raw[0] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(IntegrityError, match="integrity"):
        store.get_artefact(ref, {Zone.SHARED})


def test_missing_artefact(store):
    from sbxkit.store import ArtefactRef

    ghost = ArtefactRef("ab" * 32, 1, "", Zone.SHARED)
    with pytest.raises(NotFoundError):
        store.get_artefact(ghost, {Zone.SHARED})


def test_records_round_trip_and_ordering(store):
    store.put_record("plan", "p3", {"x": 3}, created="2026-01-03T00:00:00.000000Z")
    store.put_record("plan", "p1", {"x": 1}, created="2026-01-01T00:00:00.000000Z")
    store.put_record("plan", "p2", {"x": 2}, created="2026-01-02T00:00:00.000000Z")
    listed = store.list_records("plan")
    assert [record_id for record_id, _ in listed] == ["p1", "p2", "p3"]
    assert store.get_record("plan", "p2") == {"x": 2}


def test_record_conflict_and_idempotence(store):
    store.put_record("module", "m@1.0.0", {"checksum": "aa"})
    store.put_record("module", "m@1.0.0", {"checksum": "aa"})  # identical: fine
    with pytest.raises(ConflictError):
        store.put_record("module", "m@1.0.0", {"checksum": "bb"})


def test_records_survive_reopen(tmp_path):
    root = tmp_path / "ws"
    Store(root).put_record("run", "r1", {"state": "done"})
    reopened = Store(root)
    assert reopened.get_record("run", "r1") == {"state": "done"}


def test_artefacts_survive_reopen(tmp_path):
    root = tmp_path / "ws"
    ref = Store(root).put_artefact(b"durable", Zone.REGULATORY)
    assert Store(root).get_artefact(ref, {Zone.REGULATORY}) == b"durable"


def test_record_schema_skew_is_an_error(store):
    store.put_record("config", "c1", {"name": "x"})
    with store._connect() as conn:
        conn.execute(
            "UPDATE records SET payload = ? WHERE kind = 'config' AND id = 'c1'",
            ('{"name":"x","record_schema":999}',))
    with pytest.raises(SchemaVersionError):
        store.get_record("config", "c1")


def test_database_schema_skew_is_an_error(tmp_path):
    root = tmp_path / "ws"
    store = Store(root)
    with store._connect() as conn:
        conn.execute("UPDATE meta SET value = '999' WHERE key = 'schema_version'")
    with pytest.raises(SchemaVersionError):
        Store(root)


def test_fan_out_layout_is_stable(store):
    ref = store.put_artefact(b"layout", Zone.SHARED)
    path = store.artefact_path(Zone.SHARED, ref.digest)
    parts = path.relative_to(store.root).parts
    assert parts[0] == "artefacts"
    assert parts[1] == "shared"
    assert parts[2] == ref.digest[:2]
    assert parts[3] == ref.digest[2:4]
    assert os.path.exists(path)
