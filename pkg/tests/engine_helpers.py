"""Shared scaffolding for engine-level tests."""

from __future__ import annotations

from datetime import datetime
from pathlib import Path

from sbxkit.catalogue import Catalogue, ModuleDescriptor, ResourceEstimate, file_checksum
from sbxkit.engine import Engine, ExecutorDescriptor
from sbxkit.planner import ExecutionPlan, PlanStep, plan_hash
from sbxkit.rbac import Principal
from sbxkit.dsl.model import Role
from sbxkit.semver import Version
from sbxkit.workspace import Workspace

PLUGIN_FIXTURES = Path(__file__).parent / "fixtures" / "plugins"

EXPERT = Principal("expert-1", Role.TECHNICAL_EXPERT)


def register_fixture_plugin(catalogue: Catalogue, capability: str, filename: str,
                            cpu_seconds: int = 5,
                            storage_bytes: int = 1 << 20) -> ModuleDescriptor:
    path = PLUGIN_FIXTURES / filename
    descriptor = ModuleDescriptor(
        name=capability,
        version=Version.parse("1.0.0"),
        provides=(capability,),
        test_types=(capability,),
        dimension="final_product",
        requires=(),
        resource_estimate=ResourceEstimate(cpu_seconds=cpu_seconds,
                                           storage_bytes=storage_bytes),
        entrypoint=str(path),
        checksum=file_checksum(path),
    )
    catalogue.register(descriptor)
    return descriptor


def test_step(step_id: str, descriptor: ModuleDescriptor, seed: int = 0,
              inputs: dict[str, str] | None = None,
              budget: dict[str, int] | None = None) -> PlanStep:
    return PlanStep(
        step_id=step_id,
        kind="test",
        binding={"module_name": descriptor.name,
                 "module_version": str(descriptor.version),
                 "checksum": descriptor.checksum},
        dimension="final_product",
        inputs=inputs or {},
        seed=seed,
        resource_budget=budget or descriptor.resource_estimate.to_data(),
        detail={"objective_id": "robustness", "test_type_id": step_id},
    )


def sealed_plan(steps: list[PlanStep], edges: list[tuple[str, str]] | None = None,
                config_digest: str = "0" * 64) -> ExecutionPlan:
    plan = ExecutionPlan(plan_id="", config_digest=config_digest,
                         steps=steps, edges=edges or [])
    plan.plan_id = plan_hash(plan)
    return plan


def make_engine(workspace: Workspace) -> Engine:
    return Engine(workspace)


def executors(spec: str) -> list[ExecutorDescriptor]:
    from sbxkit.engine import parse_executor_spec

    return parse_executor_spec(spec)


def parse_ts(timestamp: str) -> datetime:
    return datetime.strptime(timestamp, "%Y-%m-%dT%H:%M:%S.%fZ")


def run_safecorp(workspace: Workspace, executor_spec: str = "local:2",
                 source: str | None = None):
    """Full fixture journey: save config, seed catalogue, plan, run.

    Returns (run_id, plan, doc)."""
    from sbxkit.dsl import canonicalize, parse
    from sbxkit.mapping import load_mapping_table
    from sbxkit.pipeline import build_plan
    from sbxkit.plugins import seed_reference_catalogue

    fixtures = Path(__file__).parent / "fixtures"
    if source is None:
        source = (fixtures / "safecorp.sbx").read_text(encoding="utf-8")
    table = load_mapping_table((fixtures / "safecorp_mapping.sbx").read_text())

    doc = parse(source)
    canonical = canonicalize(doc)
    digest = workspace.save_config(canonical, doc.name)
    workspace.seed_controls(digest, [
        {"control_id": c.control_id, "activity": c.activity,
         "status": c.status.value} for c in doc.controls])

    engine = Engine(workspace)
    try:
        seed_reference_catalogue(engine.catalogue)
    except Exception:
        pass  # already seeded in this workspace
    plan = build_plan(doc, table, engine.catalogue)
    state = engine.run(plan, executors(executor_spec), EXPERT)
    return state.run_id, plan, doc
