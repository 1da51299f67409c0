"""Configuration language: parsing, validation, canonical form and diffing."""

from .canonical import CanonicalizationError, canonical_from_data, canonicalize
from .config import parse
from .diff import ADDED, Change, MODIFIED, REMOVED, apply_changes, diff, diff_data, replay
from .model import (
    AccessRule,
    BUILTIN_OBJECTIVES,
    CONTROL_TRANSITIONS,
    CURRENT_SCHEMA_VERSION,
    ConfigDocument,
    ControlSpec,
    ControlStatus,
    Dimension,
    GuidelineRef,
    InfraSpec,
    ObjectiveSpec,
    Priority,
    ReportFormat,
    ReportSpec,
    RiskClass,
    Role,
    SECTION_ORDER,
    SystemProfile,
    TestSpec,
    Zone,
)
from .syntax import ParseError, Pos, parse_raw
from .validate import Diagnostic, ValidationReport, validate

__all__ = [
    "ADDED",
    "AccessRule",
    "BUILTIN_OBJECTIVES",
    "CONTROL_TRANSITIONS",
    "CURRENT_SCHEMA_VERSION",
    "CanonicalizationError",
    "Change",
    "ConfigDocument",
    "ControlSpec",
    "ControlStatus",
    "Diagnostic",
    "Dimension",
    "GuidelineRef",
    "InfraSpec",
    "MODIFIED",
    "ObjectiveSpec",
    "ParseError",
    "Pos",
    "Priority",
    "REMOVED",
    "ReportFormat",
    "ReportSpec",
    "RiskClass",
    "Role",
    "SECTION_ORDER",
    "SystemProfile",
    "TestSpec",
    "ValidationReport",
    "Zone",
    "apply_changes",
    "canonical_from_data",
    "canonicalize",
    "diff",
    "diff_data",
    "parse",
    "parse_raw",
    "replay",
    "validate",
]
