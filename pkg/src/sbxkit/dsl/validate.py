"""Semantic validation of parsed configurations.

Diagnostics are data, not exceptions: each carries a stable code, a
severity, a message and the position of the offending node.  A report is
``ok`` exactly when it contains no error-severity diagnostics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..semver import MethodQuery, VersionError
from .model import ConfigDocument, KNOWN_SCHEMA_VERSIONS, BUILTIN_OBJECTIVES, RiskClass
from .syntax import Pos, is_identifier

# Stable diagnostic codes.  Every code is exercised by the invalid corpus.
DANGLING_OBJECTIVE = "V001"
PROHIBITED_RISK = "V002"
UNDECLARED_DIMENSION = "V003"
NO_EXECUTORS = "V004"
NONPOSITIVE_LIMIT = "V005"
NO_DIMENSIONS = "V006"
UNKNOWN_NODE = "V007"
UNKNOWN_SCHEMA_VERSION = "V008"
BAD_METHOD_QUERY = "V009"
BAD_NAME = "V010"
BAD_OBJECTIVE_ID = "V011"
NO_REPORT_FORMATS = "V012"
EMPTY_GUIDELINE_SOURCE = "V013"
EMPTY_ZONES = "V014"

_CUSTOM_OBJECTIVE_RE = re.compile(r"^custom:[a-z][a-z0-9_-]*$")


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str  # "error" | "warning"
    message: str
    pos: Pos

    def __str__(self) -> str:
        return f"{self.code} {self.severity} {self.pos}: {self.message}"


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)

    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]

    def to_data(self) -> dict:
        return {
            "ok": self.ok,
            "diagnostics": [
                {
                    "code": d.code,
                    "severity": d.severity,
                    "message": d.message,
                    "line": d.pos.line,
                    "column": d.pos.col,
                }
                for d in self.diagnostics
            ],
        }


def validate(doc: ConfigDocument) -> ValidationReport:
    report = ValidationReport()

    def error(code: str, message: str, pos: Pos) -> None:
        report.diagnostics.append(Diagnostic(code, "error", message, pos))

    def warning(code: str, message: str, pos: Pos) -> None:
        report.diagnostics.append(Diagnostic(code, "warning", message, pos))

    if not is_identifier(doc.name):
        error(BAD_NAME, f"sandbox name {doc.name!r} must be a non-empty identifier", doc.pos)

    if doc.schema_version not in KNOWN_SCHEMA_VERSIONS:
        error(UNKNOWN_SCHEMA_VERSION,
              f"unknown schema_version '{doc.schema_version}'; known versions: "
              + ", ".join(KNOWN_SCHEMA_VERSIONS), doc.pos)

    if doc.system.risk_class is RiskClass.PROHIBITED:
        error(PROHIBITED_RISK,
              "risk_class 'prohibited' cannot be configured: the provider must "
              "cease development or reduce the level of risk first", doc.system.pos)

    if not doc.system.dimensions:
        error(NO_DIMENSIONS, "system.dimensions must declare at least one dimension",
              doc.system.pos)

    declared_objectives = set(doc.objective_ids())
    for objective in doc.objectives:
        oid = objective.objective_id
        if oid not in BUILTIN_OBJECTIVES and not _CUSTOM_OBJECTIVE_RE.match(oid):
            error(BAD_OBJECTIVE_ID,
                  f"objective id '{oid}' must be one of "
                  + ", ".join(BUILTIN_OBJECTIVES) + " or match custom:<name>",
                  objective.pos)

    allowed_dimensions = set(doc.system.dimensions)
    for test in doc.tests:
        if test.objective not in declared_objectives:
            error(DANGLING_OBJECTIVE,
                  f"test '{test.test_id}' references undeclared objective '{test.objective}'",
                  test.pos)
        if test.dimension not in allowed_dimensions:
            error(UNDECLARED_DIMENSION,
                  f"test '{test.test_id}' uses dimension '{test.dimension.value}' "
                  "not declared in system.dimensions", test.pos)
        try:
            MethodQuery.parse(test.method_query)
        except VersionError as exc:
            error(BAD_METHOD_QUERY, f"test '{test.test_id}': {exc}", test.pos)

    for control in doc.controls:
        if control.guideline is not None and not control.guideline.source:
            error(EMPTY_GUIDELINE_SOURCE,
                  f"control '{control.control_id}' declares a guideline with an empty source",
                  control.guideline.pos)

    if not doc.infrastructure.executors:
        error(NO_EXECUTORS, "infrastructure.executors must name at least one executor",
              doc.infrastructure.pos)
    if doc.infrastructure.max_cpu_seconds <= 0:
        error(NONPOSITIVE_LIMIT, "infrastructure.max_cpu_seconds must be > 0",
              doc.infrastructure.pos)
    if doc.infrastructure.max_storage_bytes <= 0:
        error(NONPOSITIVE_LIMIT, "infrastructure.max_storage_bytes must be > 0",
              doc.infrastructure.pos)

    for rule in doc.access:
        if not rule.zones:
            warning(EMPTY_ZONES,
                    f"role '{rule.role.value}' is granted no zones and cannot read artefacts",
                    rule.pos)

    if not doc.reporting.formats:
        error(NO_REPORT_FORMATS, "reporting.formats must list at least one format",
              doc.reporting.pos)

    for node in doc.unknown_nodes:
        error(UNKNOWN_NODE, f"unknown {node.kind} '{node.path}'", node.pos)

    return report
