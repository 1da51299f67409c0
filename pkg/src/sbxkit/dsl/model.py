"""Typed document model for sandbox configurations."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

from .syntax import Pos

CURRENT_SCHEMA_VERSION = "1.0.0"
KNOWN_SCHEMA_VERSIONS = (CURRENT_SCHEMA_VERSION,)

SECTION_ORDER = (
    "system",
    "objectives",
    "controls",
    "tests",
    "infrastructure",
    "access",
    "reporting",
)

BUILTIN_OBJECTIVES = (
    "robustness",
    "fairness",
    "transparency",
    "performance",
    "accuracy",
    "cybersecurity",
)


class RiskClass(enum.Enum):
    MINIMAL = "minimal"
    LIMITED = "limited"
    HIGH = "high"
    PROHIBITED = "prohibited"


class Dimension(enum.Enum):
    DATA_MODELS = "data_models"
    PROCESSES = "processes"
    FINAL_PRODUCT = "final_product"


class Priority(enum.Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


class ControlStatus(enum.Enum):
    DECLARED = "declared"
    INSPECTED = "inspected"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


#: legal control status transitions (old -> allowed new)
CONTROL_TRANSITIONS = {
    ControlStatus.DECLARED: {ControlStatus.INSPECTED},
    ControlStatus.INSPECTED: {ControlStatus.ACCEPTED, ControlStatus.REJECTED},
    ControlStatus.ACCEPTED: set(),
    ControlStatus.REJECTED: set(),
}


class Role(enum.Enum):
    PROVIDER = "provider"
    COMPETENT_AUTHORITY = "competent_authority"
    TECHNICAL_EXPERT = "technical_expert"
    AUDITOR = "auditor"


class Zone(enum.Enum):
    CONFIDENTIAL = "confidential"
    SHARED = "shared"
    REGULATORY = "regulatory"


class ReportFormat(enum.Enum):
    JSON = "json"
    MARKDOWN = "markdown"


_UNSET = Pos(0, 0)


@dataclass
class SystemProfile:
    system_name: str
    risk_class: RiskClass
    dimensions: tuple[Dimension, ...]  # sorted, deduplicated
    domain_tag: str = ""
    pos: Pos = _UNSET

    def to_data(self) -> dict[str, Any]:
        return {
            "system_name": self.system_name,
            "risk_class": self.risk_class.value,
            "dimensions": sorted(d.value for d in self.dimensions),
            "domain_tag": self.domain_tag,
        }


@dataclass
class ObjectiveSpec:
    objective_id: str
    priority: Priority = Priority.MEDIUM
    parameters: dict[str, Any] = field(default_factory=dict)
    pos: Pos = _UNSET

    def to_data(self) -> dict[str, Any]:
        return {
            "priority": self.priority.value,
            "parameters": dict(sorted(self.parameters.items())),
        }


@dataclass
class GuidelineRef:
    source: str
    clause: str = ""
    pos: Pos = _UNSET

    def to_data(self) -> dict[str, Any]:
        return {"source": self.source, "clause": self.clause}


@dataclass
class ControlSpec:
    control_id: str
    activity: str
    control_type: str = ""
    guideline: GuidelineRef | None = None
    status: ControlStatus = ControlStatus.DECLARED
    dimension: Dimension = Dimension.PROCESSES
    pos: Pos = _UNSET

    def to_data(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "activity": self.activity,
            "control_type": self.control_type,
            "status": self.status.value,
            "dimension": self.dimension.value,
        }
        if self.guideline is not None:
            data["guideline"] = self.guideline.to_data()
        return data


@dataclass
class TestSpec:
    test_id: str
    objective: str
    method_query: str
    dimension: Dimension
    inputs: dict[str, str] = field(default_factory=dict)
    seed: int = 0
    pos: Pos = _UNSET

    def to_data(self) -> dict[str, Any]:
        return {
            "objective": self.objective,
            "method_query": self.method_query,
            "dimension": self.dimension.value,
            "inputs": dict(sorted(self.inputs.items())),
            "seed": self.seed,
        }


@dataclass
class InfraSpec:
    executors: tuple[str, ...]  # sorted, deduplicated
    max_cpu_seconds: int
    max_storage_bytes: int
    pos: Pos = _UNSET

    def to_data(self) -> dict[str, Any]:
        return {
            "executors": sorted(self.executors),
            "max_cpu_seconds": self.max_cpu_seconds,
            "max_storage_bytes": self.max_storage_bytes,
        }


@dataclass
class AccessRule:
    role: Role
    zones: tuple[Zone, ...]  # sorted, deduplicated
    pos: Pos = _UNSET

    def to_data(self) -> dict[str, Any]:
        return {"zones": sorted(z.value for z in self.zones)}


@dataclass
class ReportSpec:
    formats: tuple[ReportFormat, ...]  # sorted, deduplicated
    pos: Pos = _UNSET

    def to_data(self) -> dict[str, Any]:
        return {"formats": sorted(f.value for f in self.formats)}


@dataclass
class UnknownNode:
    """Unknown key or block retained at parse time; flagged by validation."""

    path: str
    kind: str  # "key" or "block"
    pos: Pos


@dataclass
class ConfigDocument:
    name: str
    schema_version: str
    system: SystemProfile
    objectives: list[ObjectiveSpec]
    controls: list[ControlSpec]
    tests: list[TestSpec]
    infrastructure: InfraSpec
    access: list[AccessRule]
    reporting: ReportSpec
    allow_gaps: bool = False
    unknown_nodes: list[UnknownNode] = field(default_factory=list)
    pos: Pos = _UNSET

    def objective_ids(self) -> list[str]:
        return [o.objective_id for o in self.objectives]

    def to_data(self) -> dict[str, Any]:
        """Position-free normal form used for equality, diffing and canonical text.

        Identified collections become dicts keyed by identifier, so sibling
        order never affects structural equality.
        """
        return {
            "name": self.name,
            "schema_version": self.schema_version,
            "allow_gaps": self.allow_gaps,
            "system": self.system.to_data(),
            "objectives": {o.objective_id: o.to_data() for o in self.objectives},
            "controls": {c.control_id: c.to_data() for c in self.controls},
            "tests": {t.test_id: t.to_data() for t in self.tests},
            "infrastructure": self.infrastructure.to_data(),
            "access": {r.role.value: r.to_data() for r in self.access},
            "reporting": self.reporting.to_data(),
        }

    def structurally_equal(self, other: "ConfigDocument") -> bool:
        return self.to_data() == other.to_data()
