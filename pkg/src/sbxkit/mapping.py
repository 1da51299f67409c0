"""Translation chains from declared goals to runnable methods.

Two chains, both data-driven:

* objectives -> test types -> (guidelines, method queries) -> catalogue
  modules, for the empirical testing workflow;
* control activities -> control types -> guidelines, for the procedural
  controls workflow.

The table is a document, not code, so it can evolve with new standards
without a toolkit release.  A default covering the built-in objectives
ships in ``data/mapping.sbx``; pass ``--mapping`` to use another.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from .catalogue import Catalogue, Requirement, ResolutionError
from .dsl.binding import BlockReader, check_unique
from .dsl.model import ControlSpec, Dimension, GuidelineRef, ObjectiveSpec
from .dsl.syntax import ParseError, RawBlock, parse_raw
from .semver import MethodQuery, VersionError

BEHAVIORAL = "behavioral"
STATISTICAL = "statistical"

_KIND_DIMENSION = {BEHAVIORAL: Dimension.FINAL_PRODUCT, STATISTICAL: Dimension.DATA_MODELS}


class MappingError(Exception):
    pass


@dataclass(frozen=True)
class TestTypeRow:
    objective_id: str
    test_type_id: str
    dimension: Dimension
    kind: str  # behavioral | statistical


@dataclass(frozen=True)
class TestTypeInfo:
    test_type_id: str
    method_query: MethodQuery
    guidelines: tuple[GuidelineRef, ...]


@dataclass(frozen=True)
class ControlTypeInfo:
    control_type_id: str
    guidelines: tuple[GuidelineRef, ...]


@dataclass
class MappingTable:
    version: str
    objective_rows: dict[str, list[TestTypeRow]]
    test_type_rows: dict[str, TestTypeInfo]
    control_rows: dict[str, list[ControlTypeInfo]]

    def check(self) -> None:
        for objective_id, rows in self.objective_rows.items():
            for row in rows:
                if row.test_type_id not in self.test_type_rows:
                    raise MappingError(
                        f"objective '{objective_id}' maps to undeclared test type "
                        f"'{row.test_type_id}'")
                expected = _KIND_DIMENSION.get(row.kind)
                if expected is None:
                    raise MappingError(f"unknown test kind '{row.kind}'")
                if row.dimension is not expected:
                    raise MappingError(
                        f"test type '{row.test_type_id}' is {row.kind} and must target "
                        f"dimension '{expected.value}', not '{row.dimension.value}'")


@dataclass(frozen=True)
class CoveredRow:
    objective_id: str
    test_type_id: str
    dimension: Dimension
    kind: str
    module_name: str
    module_version: str
    checksum: str
    method_query: str
    guidelines: tuple[GuidelineRef, ...]

    def to_data(self) -> dict[str, Any]:
        return {
            "objective_id": self.objective_id,
            "test_type_id": self.test_type_id,
            "dimension": self.dimension.value,
            "kind": self.kind,
            "module_name": self.module_name,
            "module_version": self.module_version,
            "checksum": self.checksum,
            "method_query": self.method_query,
            "guidelines": [g.to_data() for g in self.guidelines],
        }


@dataclass(frozen=True)
class ObjectiveGap:
    objective_id: str
    reason: str

    def to_data(self) -> dict[str, str]:
        return {"objective_id": self.objective_id, "reason": self.reason}


@dataclass
class CoverageReport:
    covered: list[CoveredRow] = field(default_factory=list)
    gaps: list[ObjectiveGap] = field(default_factory=list)

    def objective_ids(self) -> set[str]:
        return {row.objective_id for row in self.covered} | {g.objective_id for g in self.gaps}

    def to_data(self) -> dict[str, Any]:
        return {
            "covered": [row.to_data() for row in self.covered],
            "gaps": [gap.to_data() for gap in self.gaps],
        }


@dataclass(frozen=True)
class ControlRow:
    control_id: str
    activity: str
    control_type_id: str
    guidelines: tuple[GuidelineRef, ...]
    dimension: Dimension
    status: str
    flagged: bool = False
    reason: str = ""

    def to_data(self) -> dict[str, Any]:
        return {
            "control_id": self.control_id,
            "activity": self.activity,
            "control_type_id": self.control_type_id,
            "guidelines": [g.to_data() for g in self.guidelines],
            "dimension": self.dimension.value,
            "status": self.status,
            "flagged": self.flagged,
            "reason": self.reason,
        }


# --- operations ---------------------------------------------------------------


def objectives_to_test_types(objectives: list[ObjectiveSpec], table: MappingTable
                             ) -> tuple[list[TestTypeRow], list[ObjectiveGap]]:
    """Expand declared objectives into test-type rows, declaration order first.

    Objectives absent from the table become gap markers, never errors: the
    gap is data for the coverage report and the planner to act on.
    """
    rows: list[TestTypeRow] = []
    gaps: list[ObjectiveGap] = []
    for objective in objectives:
        table_rows = table.objective_rows.get(objective.objective_id)
        if not table_rows:
            gaps.append(ObjectiveGap(objective.objective_id,
                                     "no test types mapped for this objective"))
            continue
        rows.extend(table_rows)
    return rows, gaps


def test_types_to_methods(pairs: tuple[list[TestTypeRow], list[ObjectiveGap]],
                          table: MappingTable, catalogue: Catalogue) -> CoverageReport:
    """Bind each test-type row to a concrete catalogue module."""
    rows, gaps = pairs
    report = CoverageReport(gaps=list(gaps))
    for row in rows:
        info = table.test_type_rows[row.test_type_id]
        try:
            resolution = catalogue.resolve(
                [Requirement(info.method_query.capability, info.method_query.range)])
        except ResolutionError as exc:
            report.gaps.append(ObjectiveGap(row.objective_id,
                                            f"{row.test_type_id}: {exc}"))
            continue
        name, version = resolution.bindings[info.method_query.capability]
        descriptor = catalogue.get(name, version)
        report.covered.append(CoveredRow(
            objective_id=row.objective_id,
            test_type_id=row.test_type_id,
            dimension=row.dimension,
            kind=row.kind,
            module_name=name,
            module_version=str(version),
            checksum=descriptor.checksum,
            method_query=str(info.method_query),
            guidelines=info.guidelines,
        ))
    return report


def controls_to_control_types(controls: list[ControlSpec], table: MappingTable
                              ) -> list[ControlRow]:
    """Join each declared control to its activity's control types."""
    rows: list[ControlRow] = []
    for control in controls:
        mapped = table.control_rows.get(control.activity)
        if not mapped:
            rows.append(ControlRow(
                control_id=control.control_id,
                activity=control.activity,
                control_type_id=control.control_type or "",
                guidelines=(control.guideline,) if control.guideline else (),
                dimension=control.dimension,
                status=control.status.value,
                flagged=True,
                reason=f"activity '{control.activity}' is not in the mapping table",
            ))
            continue
        for info in mapped:
            guidelines = info.guidelines
            if control.guideline is not None:
                guidelines = guidelines + (control.guideline,)
            rows.append(ControlRow(
                control_id=control.control_id,
                activity=control.activity,
                control_type_id=control.control_type or info.control_type_id,
                guidelines=guidelines,
                dimension=control.dimension,
                status=control.status.value,
            ))
    return rows


# --- table loading --------------------------------------------------------------


def load_mapping_table(source: str) -> MappingTable:
    blocks = parse_raw(source)
    table_block = None
    for block in blocks:
        if block.keyword == "mapping_table":
            table_block = block
            break
    if table_block is None:
        raise MappingError("document has no 'mapping_table' block")
    reader = BlockReader(table_block, "mapping_table")
    version = reader.string("version")

    objective_rows: dict[str, list[TestTypeRow]] = {}
    test_type_rows: dict[str, TestTypeInfo] = {}
    control_rows: dict[str, list[ControlTypeInfo]] = {}
    labels: list = []

    for child in reader.children(["objective"]):
        objective_id = _label(child)
        labels.append((f"objective {objective_id}", child.pos))
        body = BlockReader(child, f"mapping_table.objective.{objective_id}")
        rows = []
        for row_block in body.children(["row"]):
            row_reader = BlockReader(row_block, f"{objective_id}.row")
            rows.append(TestTypeRow(
                objective_id=objective_id,
                test_type_id=row_reader.reference("test_type"),
                dimension=row_reader.enum("dimension", Dimension),
                kind=_kind(row_reader),
            ))
        objective_rows[objective_id] = rows

    for child in reader.children(["test_type"]):
        test_type_id = _label(child)
        labels.append((f"test_type {test_type_id}", child.pos))
        body = BlockReader(child, f"mapping_table.test_type.{test_type_id}")
        query_text = body.string("method_query")
        try:
            query = MethodQuery.parse(query_text)
        except VersionError as exc:
            raise MappingError(f"test type '{test_type_id}': {exc}") from None
        test_type_rows[test_type_id] = TestTypeInfo(
            test_type_id, query, _guidelines(body, test_type_id))

    for child in reader.children(["control_activity"]):
        activity = _label(child)
        labels.append((f"control_activity {activity}", child.pos))
        body = BlockReader(child, f"mapping_table.control_activity.{activity}")
        infos = []
        for type_block in body.children(["control_type"]):
            control_type_id = _label(type_block)
            type_reader = BlockReader(type_block, f"{activity}.{control_type_id}")
            infos.append(ControlTypeInfo(control_type_id,
                                         _guidelines(type_reader, control_type_id)))
        control_rows[activity] = infos

    check_unique(labels, "mapping table entry")
    table = MappingTable(version, objective_rows, test_type_rows, control_rows)
    table.check()
    return table


def _label(block: RawBlock) -> str:
    if block.label is None:
        raise ParseError(f"'{block.keyword}' block needs a name", block.pos)
    return block.label


def _kind(reader: BlockReader) -> str:
    kind = reader.reference("kind")
    if kind not in (BEHAVIORAL, STATISTICAL):
        raise MappingError(f"unknown test kind '{kind}' (behavioral or statistical)")
    return kind


def _guidelines(reader: BlockReader, owner: str) -> tuple[GuidelineRef, ...]:
    refs = []
    for block in reader.children(["guideline"]):
        g = BlockReader(block, f"{owner}.guideline")
        source = g.string("source")
        if not source:
            raise MappingError(f"guideline for '{owner}' has an empty source")
        refs.append(GuidelineRef(source=source, clause=g.string("clause", default="")))
    return tuple(refs)


def default_mapping_table() -> MappingTable:
    source = resources.files("sbxkit.data").joinpath("mapping.sbx").read_text("utf-8")
    return load_mapping_table(source)
