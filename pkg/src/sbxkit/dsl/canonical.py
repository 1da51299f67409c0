"""Canonical text form of a configuration.

Canonical output is deterministic: sections appear in a fixed order,
identified blocks are sorted by identifier, keys are sorted, indentation is
one space per level, line endings are LF and the file ends with exactly one
newline.  Two structurally equal documents therefore yield byte-identical
text, which is what run digests and the audit trail hash.
"""

from __future__ import annotations

from typing import Any

from .model import BUILTIN_OBJECTIVES, ConfigDocument
from .syntax import is_identifier


class CanonicalizationError(ValueError):
    pass


def canonicalize(doc: ConfigDocument) -> str:
    """Render a validated document; rejects documents that fail validation."""
    from .validate import validate

    report = validate(doc)
    if not report.ok:
        raise CanonicalizationError(
            "cannot canonicalize an invalid document: "
            + "; ".join(str(d) for d in report.diagnostics if d.severity == "error"))
    return canonical_from_data(doc.to_data())


def canonical_from_data(data: dict[str, Any]) -> str:
    """Render the position-free data form (see ConfigDocument.to_data)."""
    lines: list[str] = [f'sandbox {quote(data["name"])} {{']
    lines.append(f' allow_gaps: {render_literal(data["allow_gaps"])}')
    lines.append(f' schema_version: {quote(data["schema_version"])}')

    _section(lines, "system", data["system"], _plain_keys)
    _section(lines, "objectives", data["objectives"], _objectives_body)
    _section(lines, "controls", data["controls"], _identified_body("control", _control_keys))
    _section(lines, "tests", data["tests"], _identified_body("test", _test_keys))
    _section(lines, "infrastructure", data["infrastructure"], _plain_keys)
    _section(lines, "access", data["access"], _access_body)
    _section(lines, "reporting", data["reporting"], _plain_keys)

    lines.append("}")
    return "\n".join(lines) + "\n"


def _section(lines: list[str], name: str, data: Any, body) -> None:
    lines.append(f" {name} {{")
    body(lines, data, 2)
    lines.append(" }")


def _plain_keys(lines: list[str], data: dict[str, Any], depth: int) -> None:
    pad = " " * depth
    for key in sorted(data):
        lines.append(f"{pad}{key}: {render_literal(data[key], bare=_is_enum_key(key))}")


# keys whose values (or list elements) are bare enum identifiers
_ENUM_KEYS = {"risk_class", "dimensions", "dimension", "priority", "status",
              "zones", "formats", "objective"}


def _is_enum_key(key: str) -> bool:
    return key in _ENUM_KEYS


def _objectives_body(lines: list[str], data: dict[str, Any], depth: int) -> None:
    pad = " " * depth
    for objective_id in sorted(data):
        spec = data[objective_id]
        if objective_id in BUILTIN_OBJECTIVES:
            lines.append(f"{pad}{objective_id} {{")
        else:
            lines.append(f"{pad}objective {quote(objective_id)} {{")
        inner = " " * (depth + 1)
        if spec["parameters"]:
            lines.append(f"{inner}parameters {{")
            deepest = " " * (depth + 2)
            for key in sorted(spec["parameters"]):
                lines.append(f"{deepest}{key}: {render_literal(spec['parameters'][key])}")
            lines.append(f"{inner}}}")
        lines.append(f"{inner}priority: {spec['priority']}")
        lines.append(f"{pad}}}")


def _control_keys(lines: list[str], spec: dict[str, Any], depth: int) -> None:
    pad = " " * depth
    lines.append(f"{pad}activity: {quote(spec['activity'])}")
    lines.append(f"{pad}control_type: {quote(spec['control_type'])}")
    lines.append(f"{pad}dimension: {spec['dimension']}")
    if "guideline" in spec:
        lines.append(f"{pad}guideline {{")
        inner = " " * (depth + 1)
        lines.append(f"{inner}clause: {quote(spec['guideline']['clause'])}")
        lines.append(f"{inner}source: {quote(spec['guideline']['source'])}")
        lines.append(f"{pad}}}")
    lines.append(f"{pad}status: {spec['status']}")


def _test_keys(lines: list[str], spec: dict[str, Any], depth: int) -> None:
    pad = " " * depth
    lines.append(f"{pad}dimension: {spec['dimension']}")
    if spec["inputs"]:
        lines.append(f"{pad}inputs {{")
        inner = " " * (depth + 1)
        for key in sorted(spec["inputs"]):
            lines.append(f"{inner}{key}: {quote(spec['inputs'][key])}")
        lines.append(f"{pad}}}")
    lines.append(f"{pad}method_query: {quote(spec['method_query'])}")
    objective = spec["objective"]
    rendered = objective if is_identifier(objective) else quote(objective)
    lines.append(f"{pad}objective: {rendered}")
    lines.append(f"{pad}seed: {spec['seed']}")


def _identified_body(keyword: str, render_keys):
    def body(lines: list[str], data: dict[str, Any], depth: int) -> None:
        pad = " " * depth
        for node_id in sorted(data):
            lines.append(f"{pad}{keyword} {node_id} {{")
            render_keys(lines, data[node_id], depth + 1)
            lines.append(f"{pad}}}")

    return body


def _access_body(lines: list[str], data: dict[str, Any], depth: int) -> None:
    pad = " " * depth
    for role in sorted(data):
        lines.append(f"{pad}role {role} {{")
        inner = " " * (depth + 1)
        zones = ", ".join(data[role]["zones"])
        lines.append(f"{inner}zones: [{zones}]")
        lines.append(f"{pad}}}")


_STRING_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}


def quote(text: str) -> str:
    out = ['"']
    for ch in text:
        if ch in _STRING_ESCAPES:
            out.append(_STRING_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def render_literal(value: Any, bare: bool = False) -> str:
    """Render one typed literal; `bare` marks enum-valued keys."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return value if bare else quote(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(render_literal(v, bare=bare) for v in value) + "]"
    raise CanonicalizationError(f"cannot render literal of type {type(value).__name__}")
