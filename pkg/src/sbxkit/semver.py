"""Three-component semantic versions and the four supported range forms.

Ranges are deliberately restricted to `^x.y.z`, `~x.y.z`, `=x.y.z` and
`>=x.y.z` so every constraint stays readable in an audit trail.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering


class VersionError(ValueError):
    pass


_VERSION_RE = re.compile(r"^(0|[1-9]\d*)\.(0|[1-9]\d*)\.(0|[1-9]\d*)$")
_RANGE_OPS = ("^", "~", ">=", "=")


@total_ordering
@dataclass(frozen=True)
class Version:
    major: int
    minor: int
    patch: int

    @classmethod
    def parse(cls, text: str) -> "Version":
        m = _VERSION_RE.match(text.strip())
        if m is None:
            raise VersionError(
                f"invalid version '{text}': expected three dot-separated integers (major.minor.patch)")
        return cls(int(m.group(1)), int(m.group(2)), int(m.group(3)))

    def key(self) -> tuple[int, int, int]:
        return (self.major, self.minor, self.patch)

    def __lt__(self, other: "Version") -> bool:
        return self.key() < other.key()

    def __str__(self) -> str:
        return f"{self.major}.{self.minor}.{self.patch}"


@dataclass(frozen=True)
class Range:
    """One of the four range forms, normalized to a half-open interval.

    ``^`` allows changes that do not modify the leftmost non-zero component
    (so ``^0.2.3`` accepts ``>=0.2.3 <0.3.0`` and ``^0.0.3`` only ``0.0.3``);
    ``~`` pins major.minor; ``=`` pins exactly; ``>=`` has no upper bound.
    """

    op: str
    base: Version

    @classmethod
    def parse(cls, text: str) -> "Range":
        text = text.strip()
        for op in _RANGE_OPS:
            if text.startswith(op):
                return cls(op, Version.parse(text[len(op):]))
        raise VersionError(
            f"invalid version range '{text}': expected one of ^x.y.z, ~x.y.z, =x.y.z, >=x.y.z")

    def upper_exclusive(self) -> Version | None:
        b = self.base
        if self.op == "=":
            return Version(b.major, b.minor, b.patch + 1)
        if self.op == "~":
            return Version(b.major, b.minor + 1, 0)
        if self.op == "^":
            if b.major > 0:
                return Version(b.major + 1, 0, 0)
            if b.minor > 0:
                return Version(0, b.minor + 1, 0)
            return Version(0, 0, b.patch + 1)
        return None  # >=

    def contains(self, version: Version) -> bool:
        if version < self.base:
            return False
        upper = self.upper_exclusive()
        return upper is None or version < upper

    def __str__(self) -> str:
        return f"{self.op}{self.base}"


_QUERY_RE = re.compile(r"^(?P<capability>[A-Za-z_][A-Za-z0-9_-]*)@(?P<range>.+)$")


@dataclass(frozen=True)
class MethodQuery:
    """`capability@range` pair as written in configurations and mapping tables."""

    capability: str
    range: Range

    @classmethod
    def parse(cls, text: str) -> "MethodQuery":
        m = _QUERY_RE.match(text.strip())
        if m is None:
            raise VersionError(
                f"invalid method query '{text}': expected '<capability>@<range>'")
        return cls(m.group("capability"), Range.parse(m.group("range")))

    def __str__(self) -> str:
        return f"{self.capability}@{self.range}"
