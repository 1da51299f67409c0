"""UTC timestamps in the one format every record uses."""

from __future__ import annotations

from datetime import datetime, timezone


def utc_now_iso() -> str:
    """RFC 3339 UTC timestamp with microsecond precision, e.g. 2026-08-10T12:00:00.000001Z."""
    now = datetime.now(timezone.utc)
    return now.strftime("%Y-%m-%dT%H:%M:%S.") + f"{now.microsecond:06d}Z"
