"""Schema-aware binding from raw blocks to typed values.

The reader helpers raise :class:`ParseError` on type violations (wrong
literal kind, invalid enum value, missing required key) so that a bound
document is always structurally complete.  Unknown keys and blocks are not
errors here; they are collected and reported by validation with an
error-severity diagnostic.
"""

from __future__ import annotations

import enum
from typing import Any, Iterable, TypeVar

from .syntax import ParseError, Pos, RawBlock, RawValue, is_identifier

E = TypeVar("E", bound=enum.Enum)

_REQUIRED = object()


def enum_values(enum_cls: type[enum.Enum]) -> list[str]:
    return [m.value for m in enum_cls]


class BlockReader:
    """Tracks which entries/blocks of a raw block have been consumed."""

    def __init__(self, block: RawBlock, path: str):
        self.block = block
        self.path = path
        self._entries = {e.key: e for e in block.entries}
        self._consumed_keys: set[str] = set()
        self._consumed_blocks: set[int] = set()

    # -- scalar entries ----------------------------------------------------

    def _raw(self, key: str, default: Any) -> RawValue | None:
        entry = self._entries.get(key)
        if entry is None:
            if default is _REQUIRED:
                raise ParseError(f"missing required key '{key}' in '{self.path}'",
                                 self.block.pos, expected=(key,))
            return None
        self._consumed_keys.add(key)
        return entry.value

    def string(self, key: str, default: Any = _REQUIRED) -> str:
        raw = self._raw(key, default)
        if raw is None:
            return default
        if raw.kind != "string":
            raise ParseError(f"key '{key}' in '{self.path}' must be a quoted string",
                             raw.pos, expected=("string",))
        return str(raw.value)

    def integer(self, key: str, default: Any = _REQUIRED, unsigned: bool = True) -> int:
        raw = self._raw(key, default)
        if raw is None:
            return default
        if raw.kind != "int":
            raise ParseError(f"key '{key}' in '{self.path}' must be an integer",
                             raw.pos, expected=("integer",))
        value = int(raw.value)  # type: ignore[arg-type]
        if unsigned and value < 0:
            raise ParseError(f"key '{key}' in '{self.path}' must be non-negative", raw.pos)
        return value

    def boolean(self, key: str, default: Any = _REQUIRED) -> bool:
        raw = self._raw(key, default)
        if raw is None:
            return default
        if raw.kind != "bool":
            raise ParseError(f"key '{key}' in '{self.path}' must be true or false",
                             raw.pos, expected=("true", "false"))
        return bool(raw.value)

    def enum(self, key: str, enum_cls: type[E], default: Any = _REQUIRED) -> E:
        raw = self._raw(key, default)
        if raw is None:
            return default
        return self._coerce_enum(key, raw, enum_cls)

    def _coerce_enum(self, key: str, raw: RawValue, enum_cls: type[E]) -> E:
        valid = enum_values(enum_cls)
        if raw.kind != "enum":
            raise ParseError(
                f"key '{key}' in '{self.path}' must be one of: {', '.join(valid)}",
                raw.pos, expected=tuple(valid))
        try:
            return enum_cls(raw.value)
        except ValueError:
            raise ParseError(
                f"invalid value '{raw.value}' for '{key}' in '{self.path}'; "
                f"valid values: {', '.join(valid)}",
                raw.pos, expected=tuple(valid)) from None

    def enum_set(self, key: str, enum_cls: type[E], default: Any = _REQUIRED) -> tuple[E, ...]:
        """Bind a `[a, b]` list of bare identifiers as a sorted, deduplicated tuple."""
        raw = self._raw(key, default)
        if raw is None:
            return default
        if raw.kind != "list":
            raise ParseError(f"key '{key}' in '{self.path}' must be a list", raw.pos,
                             expected=("[",))
        members = [self._coerce_enum(key, item, enum_cls) for item in raw.value]  # type: ignore[union-attr]
        return tuple(sorted(set(members), key=lambda m: m.value))

    def string_set(self, key: str, default: Any = _REQUIRED) -> tuple[str, ...]:
        raw = self._raw(key, default)
        if raw is None:
            return default
        if raw.kind != "list":
            raise ParseError(f"key '{key}' in '{self.path}' must be a list", raw.pos,
                             expected=("[",))
        out: list[str] = []
        for item in raw.value:  # type: ignore[union-attr]
            if item.kind != "string":
                raise ParseError(f"list '{key}' in '{self.path}' must contain quoted strings",
                                 item.pos, expected=("string",))
            out.append(str(item.value))
        return tuple(sorted(set(out)))

    def atom_set(self, key: str, default: Any = _REQUIRED) -> tuple[str, ...]:
        """A list of bare identifiers or quoted strings, sorted and deduplicated."""
        raw = self._raw(key, default)
        if raw is None:
            return default
        if raw.kind != "list":
            raise ParseError(f"key '{key}' in '{self.path}' must be a list", raw.pos,
                             expected=("[",))
        out: list[str] = []
        for item in raw.value:  # type: ignore[union-attr]
            if item.kind not in ("enum", "string"):
                raise ParseError(
                    f"list '{key}' in '{self.path}' must contain identifiers or strings",
                    item.pos, expected=("identifier", "string"))
            out.append(str(item.value))
        return tuple(sorted(set(out)))

    def reference(self, key: str, default: Any = _REQUIRED) -> str:
        """A bare identifier or quoted string naming another declaration."""
        raw = self._raw(key, default)
        if raw is None:
            return default
        if raw.kind not in ("enum", "string"):
            raise ParseError(f"key '{key}' in '{self.path}' must be an identifier or string",
                             raw.pos, expected=("identifier", "string"))
        return str(raw.value)

    def literal(self, key: str, default: Any = _REQUIRED) -> Any:
        """Any typed literal, as a plain Python value (lists recurse)."""
        raw = self._raw(key, default)
        if raw is None:
            return default
        return literal_value(raw)

    def literal_map(self) -> dict[str, Any]:
        """Consume every remaining entry as `key -> typed literal`."""
        out: dict[str, Any] = {}
        for key, entry in self._entries.items():
            if key in self._consumed_keys:
                continue
            self._consumed_keys.add(key)
            out[key] = literal_value(entry.value)
        return out

    # -- child blocks --------------------------------------------------------

    def child(self, keyword: str, required: bool = False) -> RawBlock | None:
        found = None
        for idx, blk in enumerate(self.block.blocks):
            if blk.keyword == keyword and idx not in self._consumed_blocks:
                if found is not None:
                    raise ParseError(
                        f"duplicate block '{keyword}' in '{self.path}' "
                        f"(first at {found.pos}, again at {blk.pos})", blk.pos)
                found = blk
                self._consumed_blocks.add(idx)
        if found is None and required:
            raise ParseError(f"missing required block '{keyword}' in '{self.path}'",
                             self.block.pos, expected=(keyword,))
        return found

    def children(self, keywords: Iterable[str] | None = None) -> list[RawBlock]:
        """Consume all remaining child blocks (optionally filtered by keyword)."""
        kws = set(keywords) if keywords is not None else None
        out: list[RawBlock] = []
        for idx, blk in enumerate(self.block.blocks):
            if idx in self._consumed_blocks:
                continue
            if kws is None or blk.keyword in kws:
                self._consumed_blocks.add(idx)
                out.append(blk)
        return out

    def leftovers(self) -> list[tuple[str, str, Pos]]:
        """Unconsumed entries and blocks as (name, kind, pos) triples."""
        out: list[tuple[str, str, Pos]] = []
        for key, entry in self._entries.items():
            if key not in self._consumed_keys:
                out.append((f"{self.path}.{key}", "key", entry.pos))
        for idx, blk in enumerate(self.block.blocks):
            if idx not in self._consumed_blocks:
                out.append((f"{self.path}.{blk.header()}", "block", blk.pos))
        return out


def literal_value(raw: RawValue) -> Any:
    if raw.kind == "list":
        return [literal_value(item) for item in raw.value]  # type: ignore[union-attr]
    return raw.value


def identifier_label(block: RawBlock, what: str) -> str:
    """Require `<keyword> <ident>` header form; the label names the node."""
    if block.label is None:
        raise ParseError(f"{what} block needs an identifier: '{block.keyword} <id> {{...}}'",
                         block.pos, expected=("identifier",))
    if not is_identifier(block.label):
        raise ParseError(f"{what} id '{block.label}' is not a valid identifier", block.pos)
    return block.label


def check_unique(labels: list[tuple[str, Pos]], what: str) -> None:
    seen: dict[str, Pos] = {}
    for label, pos in labels:
        if label in seen:
            raise ParseError(
                f"duplicate {what} '{label}' (first at {seen[label]}, again at {pos})", pos)
        seen[label] = pos
