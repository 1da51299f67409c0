"""Deterministic assembly of execution plans.

A plan is a DAG of bound steps: one test step per covered mapping row and
per explicitly configured test, one control-check step per declared
control.  Control checks precede every test step that shares their
dimension, so procedural safeguards are verified before empirical results
land on the same ground.  The plan is a pure function of the canonical
configuration, the catalogue snapshot and the mapping table; its id is the
SHA-256 of the canonical serialization and is recomputable from content.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .catalogue import Catalogue, Requirement, ResolutionError
from .dsl.canonical import canonicalize
from .dsl.model import ConfigDocument
from .dsl.validate import validate
from .mapping import ControlRow, CoverageReport
from .semver import MethodQuery, Version
from .store import canonical_json, sha256_hex

TEST_STEP = "test"
CONTROL_STEP = "control_check"

CONTROL_BUDGET = {"cpu_seconds": 1, "storage_bytes": 65536}


class PlanError(Exception):
    def __init__(self, message: str, gaps: list[dict[str, str]] | None = None):
        super().__init__(message)
        self.gaps = gaps or []


@dataclass
class PlanStep:
    step_id: str
    kind: str  # test | control_check
    binding: dict[str, Any]
    dimension: str
    inputs: dict[str, str] = field(default_factory=dict)
    seed: int = 0
    executor_constraint: str | None = None
    resource_budget: dict[str, int] = field(default_factory=lambda: dict(CONTROL_BUDGET))
    detail: dict[str, Any] = field(default_factory=dict)

    def to_data(self) -> dict[str, Any]:
        return {
            "step_id": self.step_id,
            "kind": self.kind,
            "binding": self.binding,
            "dimension": self.dimension,
            "inputs": dict(sorted(self.inputs.items())),
            "seed": self.seed,
            "executor_constraint": self.executor_constraint,
            "resource_budget": self.resource_budget,
            "detail": self.detail,
        }

    @classmethod
    def from_data(cls, data: dict[str, Any]) -> "PlanStep":
        return cls(
            step_id=data["step_id"],
            kind=data["kind"],
            binding=dict(data["binding"]),
            dimension=data["dimension"],
            inputs=dict(data.get("inputs", {})),
            seed=int(data.get("seed", 0)),
            executor_constraint=data.get("executor_constraint"),
            resource_budget=dict(data.get("resource_budget", CONTROL_BUDGET)),
            detail=dict(data.get("detail", {})),
        )


@dataclass
class ExecutionPlan:
    plan_id: str
    config_digest: str
    steps: list[PlanStep]
    edges: list[tuple[str, str]]
    waivers: list[dict[str, str]] = field(default_factory=list)

    def step(self, step_id: str) -> PlanStep:
        for step in self.steps:
            if step.step_id == step_id:
                return step
        raise KeyError(step_id)

    def body_data(self) -> dict[str, Any]:
        return {
            "config_digest": self.config_digest,
            "steps": [s.to_data() for s in sorted(self.steps, key=lambda s: s.step_id)],
            "edges": sorted([list(edge) for edge in self.edges]),
            "waivers": sorted(self.waivers, key=canonical_json),
        }

    def to_data(self) -> dict[str, Any]:
        data = self.body_data()
        data["plan_id"] = self.plan_id
        return data

    @classmethod
    def from_data(cls, data: dict[str, Any]) -> "ExecutionPlan":
        return cls(
            plan_id=data["plan_id"],
            config_digest=data["config_digest"],
            steps=[PlanStep.from_data(s) for s in data["steps"]],
            edges=[(a, b) for a, b in data["edges"]],
            waivers=list(data.get("waivers", [])),
        )


def serialize_plan(plan: ExecutionPlan) -> str:
    """Canonical multi-line JSON of the full plan (with plan_id), LF-terminated."""
    import json

    return json.dumps(plan.to_data(), sort_keys=True, indent=1) + "\n"


def plan_hash(plan: ExecutionPlan) -> str:
    """Digest of the canonical body; the plan is self-certifying."""
    import json

    body = json.dumps(plan.body_data(), sort_keys=True, indent=1) + "\n"
    return sha256_hex(body.encode("utf-8"))


def verify_plan_id(plan: ExecutionPlan) -> bool:
    return plan.plan_id == plan_hash(plan)


def assemble(config: ConfigDocument, coverage: CoverageReport,
             control_rows: list[ControlRow], catalogue: Catalogue) -> ExecutionPlan:
    report = validate(config)
    if not report.ok:
        raise PlanError("configuration does not validate: "
                        + "; ".join(str(d) for d in report.diagnostics))

    waivers: list[dict[str, str]] = []
    gaps = [gap.to_data() for gap in coverage.gaps]
    allowed_dimensions = {d.value for d in config.system.dimensions}

    steps: list[PlanStep] = []
    for row in coverage.covered:
        if row.dimension.value not in allowed_dimensions:
            raise PlanError(
                f"dimension violation: test type '{row.test_type_id}' targets "
                f"'{row.dimension.value}' which the system profile does not declare")
        steps.append(PlanStep(
            step_id=f"test.{row.objective_id.replace(':', '-')}.{row.test_type_id}",
            kind=TEST_STEP,
            binding={"module_name": row.module_name,
                     "module_version": row.module_version,
                     "checksum": row.checksum},
            dimension=row.dimension.value,
            seed=0,
            resource_budget=_estimate_budget(catalogue, row.module_name, row.module_version),
            detail={"objective_id": row.objective_id,
                    "test_type_id": row.test_type_id,
                    "kind": row.kind,
                    "method_query": row.method_query,
                    "guidelines": [g.to_data() for g in row.guidelines]},
        ))

    for test in config.tests:
        query = MethodQuery.parse(test.method_query)
        try:
            resolution = catalogue.resolve([Requirement(query.capability, query.range)])
        except ResolutionError as exc:
            gaps.append({"objective_id": test.objective,
                         "reason": f"test '{test.test_id}': {exc}"})
            continue
        name, version = resolution.bindings[query.capability]
        descriptor = catalogue.get(name, version)
        steps.append(PlanStep(
            step_id=f"test.{test.test_id}",
            kind=TEST_STEP,
            binding={"module_name": name,
                     "module_version": str(version),
                     "checksum": descriptor.checksum},
            dimension=test.dimension.value,
            inputs=dict(test.inputs),
            seed=test.seed,
            resource_budget=_estimate_budget(catalogue, name, str(version)),
            detail={"objective_id": test.objective,
                    "test_type_id": test.test_id,
                    "method_query": test.method_query,
                    "guidelines": []},
        ))

    if gaps:
        if not config.allow_gaps:
            listing = "; ".join(f"{g['objective_id']}: {g['reason']}" for g in gaps)
            raise PlanError(f"coverage gaps block planning (set allow_gaps: true "
                            f"to waive): {listing}", gaps=gaps)
        waivers = gaps

    grouped: dict[str, list[ControlRow]] = {}
    for row in control_rows:
        grouped.setdefault(row.control_id, []).append(row)
    for control_id in sorted(grouped):
        rows = grouped[control_id]
        head = rows[0]
        steps.append(PlanStep(
            step_id=f"control.{control_id}",
            kind=CONTROL_STEP,
            binding={"control_id": control_id,
                     "control_types": sorted({r.control_type_id for r in rows if r.control_type_id})},
            dimension=head.dimension.value,
            resource_budget=dict(CONTROL_BUDGET),
            detail={"activity": head.activity,
                    "status": head.status,
                    "flagged": any(r.flagged for r in rows),
                    "reason": "; ".join(r.reason for r in rows if r.reason),
                    "guidelines": [g.to_data() for r in rows for g in r.guidelines]},
        ))

    steps.sort(key=lambda s: s.step_id)
    _check_budgets(config, steps)
    edges = _build_edges(steps, catalogue)

    plan = ExecutionPlan(
        plan_id="",
        config_digest=sha256_hex(canonicalize(config).encode("utf-8")),
        steps=steps,
        edges=edges,
        waivers=waivers,
    )
    plan.plan_id = plan_hash(plan)
    return plan


def _estimate_budget(catalogue: Catalogue, name: str, version: str) -> dict[str, int]:
    descriptor = catalogue.get(name, Version.parse(version))
    return descriptor.resource_estimate.to_data()


def _check_budgets(config: ConfigDocument, steps: list[PlanStep]) -> None:
    limit_cpu = config.infrastructure.max_cpu_seconds
    limit_storage = config.infrastructure.max_storage_bytes
    total_cpu = sum(s.resource_budget["cpu_seconds"] for s in steps)
    total_storage = sum(s.resource_budget["storage_bytes"] for s in steps)
    if total_cpu > limit_cpu or total_storage > limit_storage:
        raise PlanError(
            f"budget overflow: plan needs {total_cpu}s cpu / {total_storage} bytes, "
            f"infrastructure allows {limit_cpu}s / {limit_storage} bytes")


def _build_edges(steps: list[PlanStep], catalogue: Catalogue) -> list[tuple[str, str]]:
    edges: set[tuple[str, str]] = set()
    test_steps = [s for s in steps if s.kind == TEST_STEP]
    control_steps = [s for s in steps if s.kind == CONTROL_STEP]

    # ex-ante before ex-post: same-dimension control checks precede tests
    for control in control_steps:
        for test in test_steps:
            if control.dimension == test.dimension:
                edges.add((control.step_id, test.step_id))

    # catalogue dependency order between test steps bound to different modules
    descriptors = {}
    for step in test_steps:
        key = (step.binding["module_name"], step.binding["module_version"])
        if key not in descriptors:
            descriptors[key] = catalogue.get(key[0], Version.parse(key[1]))
    for consumer in test_steps:
        consumer_desc = descriptors[(consumer.binding["module_name"],
                                     consumer.binding["module_version"])]
        needed = {req.capability for req in consumer_desc.requires}
        if not needed:
            continue
        for producer in test_steps:
            if producer.step_id == consumer.step_id:
                continue
            producer_desc = descriptors[(producer.binding["module_name"],
                                         producer.binding["module_version"])]
            if needed & set(producer_desc.provides):
                edges.add((producer.step_id, consumer.step_id))

    return sorted(edges)


def topological_order(plan: ExecutionPlan) -> list[str]:
    """Deterministic schedule skeleton: edges respected, ready steps in
    lexicographic step_id order; raises on cycles naming one."""
    pending: dict[str, set[str]] = {s.step_id: set() for s in plan.steps}
    dependents: dict[str, list[str]] = {s.step_id: [] for s in plan.steps}
    for before, after in plan.edges:
        if before not in pending or after not in pending:
            raise PlanError(f"edge references unknown step: {before} -> {after}")
        pending[after].add(before)
        dependents[before].append(after)
    order: list[str] = []
    remaining = {k: set(v) for k, v in pending.items()}
    while remaining:
        ready = sorted(step_id for step_id, deps in remaining.items() if not deps)
        if not ready:
            cycle = _trace_cycle(remaining)
            raise PlanError("plan contains a cycle: " + " -> ".join(cycle))
        head = ready[0]
        order.append(head)
        del remaining[head]
        for deps in remaining.values():
            deps.discard(head)
    return order


def _trace_cycle(graph: dict[str, set[str]]) -> list[str]:
    node = sorted(graph)[0]
    path: list[str] = []
    while node not in path:
        path.append(node)
        node = sorted(dep for dep in graph[node] if dep in graph)[0]
    return path[path.index(node):] + [node]
