"""Parse `.sbx` sources into :class:`ConfigDocument` trees."""

from __future__ import annotations

from .binding import BlockReader, check_unique, identifier_label
from .model import (
    AccessRule,
    ConfigDocument,
    ControlSpec,
    ControlStatus,
    CURRENT_SCHEMA_VERSION,
    Dimension,
    GuidelineRef,
    InfraSpec,
    ObjectiveSpec,
    Priority,
    ReportFormat,
    ReportSpec,
    RiskClass,
    Role,
    SystemProfile,
    TestSpec,
    UnknownNode,
    Zone,
)
from .syntax import ParseError, RawBlock, parse_raw


def parse(source: str) -> ConfigDocument:
    """Parse one sandbox configuration.

    Type-level violations (bad literals, invalid enum values, missing
    required keys, duplicate identifiers) raise :class:`ParseError` with the
    offending position.  Cross-reference and policy rules are left to
    :func:`sbxkit.dsl.validate.validate`.
    """
    blocks = parse_raw(source)
    if len(blocks) != 1 or blocks[0].keyword != "sandbox":
        pos = blocks[1].pos if len(blocks) > 1 else (blocks[0].pos if blocks else None)
        if pos is None:
            from .syntax import Pos

            raise ParseError("empty document; expected one 'sandbox \"name\" { ... }' block",
                             Pos(1, 1), expected=("sandbox",))
        raise ParseError("expected exactly one top-level 'sandbox' block", pos,
                         expected=("sandbox",))
    return bind_config(blocks[0])


def bind_config(root: RawBlock) -> ConfigDocument:
    name = root.label if root.label is not None else ""
    reader = BlockReader(root, "sandbox")
    schema_version = reader.string("schema_version", default=CURRENT_SCHEMA_VERSION)
    allow_gaps = reader.boolean("allow_gaps", default=False)

    unknown: list[UnknownNode] = []

    system = _bind_system(reader.child("system", required=True), unknown)
    objectives = _bind_objectives(reader.child("objectives"), unknown)
    controls = _bind_controls(reader.child("controls"), unknown)
    tests = _bind_tests(reader.child("tests"), unknown)
    infrastructure = _bind_infrastructure(reader.child("infrastructure", required=True), unknown)
    access = _bind_access(reader.child("access", required=True), unknown)
    reporting = _bind_reporting(reader.child("reporting", required=True), unknown)

    _collect_unknown(reader, unknown)
    return ConfigDocument(
        name=name,
        schema_version=schema_version,
        system=system,
        objectives=objectives,
        controls=controls,
        tests=tests,
        infrastructure=infrastructure,
        access=access,
        reporting=reporting,
        allow_gaps=allow_gaps,
        unknown_nodes=unknown,
        pos=root.pos,
    )


def _collect_unknown(reader: BlockReader, sink: list[UnknownNode]) -> None:
    for path, kind, pos in reader.leftovers():
        sink.append(UnknownNode(path, kind, pos))


def _bind_system(block: RawBlock, unknown: list[UnknownNode]) -> SystemProfile:
    reader = BlockReader(block, "system")
    profile = SystemProfile(
        system_name=reader.string("system_name"),
        risk_class=reader.enum("risk_class", RiskClass),
        dimensions=reader.enum_set("dimensions", Dimension, default=()),
        domain_tag=reader.string("domain_tag", default=""),
        pos=block.pos,
    )
    _collect_unknown(reader, unknown)
    return profile


def _bind_objectives(block: RawBlock | None, unknown: list[UnknownNode]) -> list[ObjectiveSpec]:
    if block is None:
        return []
    reader = BlockReader(block, "objectives")
    specs: list[ObjectiveSpec] = []
    labels = []
    for child in reader.children():
        if child.keyword == "objective":
            # custom objectives: `objective "custom:xyz" { ... }`
            if child.label is None or not child.label_is_string:
                raise ParseError("objective block needs a quoted id: 'objective \"custom:x\" {...}'",
                                 child.pos, expected=("string",))
            objective_id = child.label
        else:
            if child.label is not None:
                raise ParseError(f"unexpected label on objective '{child.keyword}'", child.pos)
            objective_id = child.keyword
        labels.append((objective_id, child.pos))
        body = BlockReader(child, f"objectives.{objective_id}")
        priority = body.enum("priority", Priority, default=Priority.MEDIUM)
        params_block = body.child("parameters")
        parameters = {}
        if params_block is not None:
            params_reader = BlockReader(params_block, f"objectives.{objective_id}.parameters")
            parameters = params_reader.literal_map()
            _collect_unknown(params_reader, unknown)
        specs.append(ObjectiveSpec(objective_id, priority, parameters, pos=child.pos))
        _collect_unknown(body, unknown)
    check_unique(labels, "objective")
    _collect_unknown(reader, unknown)
    return specs


def _bind_controls(block: RawBlock | None, unknown: list[UnknownNode]) -> list[ControlSpec]:
    if block is None:
        return []
    reader = BlockReader(block, "controls")
    specs: list[ControlSpec] = []
    labels = []
    for child in reader.children(["control"]):
        control_id = identifier_label(child, "control")
        labels.append((control_id, child.pos))
        body = BlockReader(child, f"controls.{control_id}")
        guideline_block = body.child("guideline")
        guideline = None
        if guideline_block is not None:
            g = BlockReader(guideline_block, f"controls.{control_id}.guideline")
            guideline = GuidelineRef(source=g.string("source", default=""),
                                     clause=g.string("clause", default=""),
                                     pos=guideline_block.pos)
            _collect_unknown(g, unknown)
        specs.append(ControlSpec(
            control_id=control_id,
            activity=body.string("activity"),
            control_type=body.string("control_type", default=""),
            guideline=guideline,
            status=body.enum("status", ControlStatus, default=ControlStatus.DECLARED),
            dimension=body.enum("dimension", Dimension, default=Dimension.PROCESSES),
            pos=child.pos,
        ))
        _collect_unknown(body, unknown)
    check_unique(labels, "control")
    _collect_unknown(reader, unknown)
    return specs


def _bind_tests(block: RawBlock | None, unknown: list[UnknownNode]) -> list[TestSpec]:
    if block is None:
        return []
    reader = BlockReader(block, "tests")
    specs: list[TestSpec] = []
    labels = []
    for child in reader.children(["test"]):
        test_id = identifier_label(child, "test")
        labels.append((test_id, child.pos))
        body = BlockReader(child, f"tests.{test_id}")
        inputs_block = body.child("inputs")
        inputs: dict[str, str] = {}
        if inputs_block is not None:
            i = BlockReader(inputs_block, f"tests.{test_id}.inputs")
            for key, value in i.literal_map().items():
                if not isinstance(value, str):
                    raise ParseError(f"input '{key}' of test '{test_id}' must be a string "
                                     "artefact reference", inputs_block.pos)
                inputs[key] = value
            _collect_unknown(i, unknown)
        specs.append(TestSpec(
            test_id=test_id,
            objective=body.reference("objective"),
            method_query=body.string("method_query"),
            dimension=body.enum("dimension", Dimension),
            inputs=inputs,
            seed=body.integer("seed", default=0),
            pos=child.pos,
        ))
        _collect_unknown(body, unknown)
    check_unique(labels, "test")
    _collect_unknown(reader, unknown)
    return specs


def _bind_infrastructure(block: RawBlock, unknown: list[UnknownNode]) -> InfraSpec:
    reader = BlockReader(block, "infrastructure")
    spec = InfraSpec(
        executors=reader.string_set("executors", default=()),
        max_cpu_seconds=reader.integer("max_cpu_seconds"),
        max_storage_bytes=reader.integer("max_storage_bytes"),
        pos=block.pos,
    )
    _collect_unknown(reader, unknown)
    return spec


def _bind_access(block: RawBlock, unknown: list[UnknownNode]) -> list[AccessRule]:
    reader = BlockReader(block, "access")
    rules: list[AccessRule] = []
    labels = []
    for child in reader.children(["role"]):
        if child.label is None:
            raise ParseError("role block needs a role name: 'role provider {...}'",
                             child.pos, expected=tuple(r.value for r in Role))
        try:
            role = Role(child.label)
        except ValueError:
            raise ParseError(
                f"invalid role '{child.label}'; valid roles: "
                + ", ".join(r.value for r in Role), child.pos,
                expected=tuple(r.value for r in Role)) from None
        labels.append((role.value, child.pos))
        body = BlockReader(child, f"access.{role.value}")
        rules.append(AccessRule(role=role, zones=body.enum_set("zones", Zone, default=()),
                                pos=child.pos))
        _collect_unknown(body, unknown)
    check_unique(labels, "access role")
    _collect_unknown(reader, unknown)
    return rules


def _bind_reporting(block: RawBlock, unknown: list[UnknownNode]) -> ReportSpec:
    reader = BlockReader(block, "reporting")
    spec = ReportSpec(formats=reader.enum_set("formats", ReportFormat, default=()),
                      pos=block.pos)
    _collect_unknown(reader, unknown)
    return spec
