"""Structural diffing between two configurations.

A ChangeSet is a sorted list of path-addressed changes computed on the
position-free data form.  It is empty exactly when the canonical texts are
equal, and replaying it onto the old document reproduces the new one, which
is what keeps revised sandbox configurations traceable across iterations.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Any

from .canonical import canonical_from_data
from .config import parse
from .model import ConfigDocument

ADDED = "added"
REMOVED = "removed"
MODIFIED = "modified"


@dataclass(frozen=True)
class Change:
    path: str
    kind: str  # added | removed | modified
    before: Any
    after: Any

    def to_data(self) -> dict[str, Any]:
        return {"path": self.path, "kind": self.kind,
                "before": self.before, "after": self.after}


def diff(old: ConfigDocument, new: ConfigDocument) -> list[Change]:
    return diff_data(old.to_data(), new.to_data())


def diff_data(old: Any, new: Any, prefix: str = "") -> list[Change]:
    changes: list[Change] = []
    _walk(old, new, prefix, changes)
    changes.sort(key=lambda c: c.path)
    return changes


def _walk(old: Any, new: Any, prefix: str, out: list[Change]) -> None:
    if isinstance(old, dict) and isinstance(new, dict):
        for key in sorted(set(old) | set(new)):
            path = f"{prefix}/{key}" if prefix else key
            if key not in new:
                out.append(Change(path, REMOVED, old[key], None))
            elif key not in old:
                out.append(Change(path, ADDED, None, new[key]))
            else:
                _walk(old[key], new[key], path, out)
        return
    if old != new:
        out.append(Change(prefix, MODIFIED, old, new))


def apply_changes(old_data: dict[str, Any], changes: list[Change]) -> dict[str, Any]:
    """Replay a ChangeSet onto the old data form."""
    data = copy.deepcopy(old_data)
    for change in changes:
        segments = change.path.split("/")
        node = data
        for segment in segments[:-1]:
            node = node.setdefault(segment, {})
        leaf = segments[-1]
        if change.kind == REMOVED:
            node.pop(leaf, None)
        else:
            node[leaf] = copy.deepcopy(change.after)
    return data


def replay(old: ConfigDocument, changes: list[Change]) -> ConfigDocument:
    """Apply a ChangeSet and reparse the result through the canonical form."""
    return parse(canonical_from_data(apply_changes(old.to_data(), changes)))
