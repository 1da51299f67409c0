"""Exit reports: machine- and human-readable outcome documents.

The machine form is canonical JSON (schema field ``exit_report_schema``),
the human form Markdown.  One report carries eight sections; audience
renderings reorder and emphasize but never hide content, so every reader
works from the same fact base.  The report binds to the audit chain via the
chain head captured at generation time, which fails verification if the
chain is later touched.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .audit import verify_prefix, ChainHead
from .clock import utc_now_iso
from .dsl.config import parse
from .engine import RunState, StepResult, account
from .planner import CONTROL_STEP, ExecutionPlan, TEST_STEP
from .rbac import Principal
from .store import canonical_json
from .workspace import Workspace

EXIT_REPORT_SCHEMA = 1

AUDIENCES = ("innovator", "expert", "regulator")

SECTIONS = (
    "system_summary",
    "sandbox_plan",
    "controls_review",
    "technical_results",
    "risk_mitigation_evidence",
    "remaining_challenges",
    "resource_summary",
    "audit_digest",
)

_VERDICT_RANK = {"pass": 0, "fail": 1, "error": 2}


class ReportError(Exception):
    pass


@dataclass
class ExitReport:
    report_id: str
    run_id: str
    config_digest: str
    plan_id: str
    generated: str
    sections: dict[str, Any]

    def to_data(self) -> dict[str, Any]:
        return {
            "exit_report_schema": EXIT_REPORT_SCHEMA,
            "report_id": self.report_id,
            "run_id": self.run_id,
            "config_digest": self.config_digest,
            "plan_id": self.plan_id,
            "generated": self.generated,
            "sections": self.sections,
        }

    @classmethod
    def from_data(cls, data: dict[str, Any]) -> "ExitReport":
        if data.get("exit_report_schema") != EXIT_REPORT_SCHEMA:
            raise ReportError(
                f"unsupported exit_report_schema {data.get('exit_report_schema')!r}")
        return cls(data["report_id"], data["run_id"], data["config_digest"],
                   data["plan_id"], data["generated"], data["sections"])


@dataclass
class FeedbackSummary:
    per_objective: dict[str, dict[str, Any]]
    gaps: list[dict[str, str]]

    def to_data(self) -> dict[str, Any]:
        return {"per_objective": self.per_objective, "gaps": self.gaps}


def _load_run(workspace: Workspace, run_id: str) -> tuple[RunState, ExecutionPlan]:
    data = workspace.store.get_record("run", run_id)
    state = RunState(
        run_id=data["run_id"],
        plan_id=data["plan_id"],
        config_digest=data["config_digest"],
        policy=data["policy"],
        step_status=data["step_status"],
        assignments=data.get("assignments", {}),
        results={sid: StepResult(**r) for sid, r in data.get("results", {}).items()},
        started=data.get("started", ""),
        finished=data.get("finished", ""),
    )
    plan_path = workspace.run_dir(run_id) / "plan.json"
    plan = ExecutionPlan.from_data(json.loads(plan_path.read_text(encoding="utf-8")))
    return state, plan


def generate(workspace: Workspace, principal: Principal, run_id: str,
             notes: str | None = None) -> ExitReport:
    """Build the exit report for a finished run; refuses broken chains."""
    state, plan = _load_run(workspace, run_id)
    if not state.finished:
        raise ReportError(f"run {run_id} has not finished; no report can be generated")
    unfinished = [sid for sid, status in state.step_status.items()
                  if status in ("pending", "running")]
    if unfinished:
        raise ReportError(f"run {run_id} still has unfinished steps: {unfinished}")
    verdict = workspace.audit.verify()
    if not verdict.ok:
        raise ReportError(
            f"audit chain is broken at index {verdict.broken_at} ({verdict.reason}); "
            "refusing to generate a report over untrustworthy evidence")

    config = parse(workspace.load_config_text(state.config_digest))
    head = workspace.audit.head()

    test_steps = [s for s in plan.steps if s.kind == TEST_STEP]
    control_steps = [s for s in plan.steps if s.kind == CONTROL_STEP]

    controls_review = []
    for step in sorted(control_steps, key=lambda s: s.step_id):
        control_id = step.binding["control_id"]
        live_status = step.detail.get("status", "declared")
        try:
            live_status = workspace.store.get_record("control", control_id).get(
                "status", live_status)
        except Exception:
            pass
        result = state.results.get(step.step_id)
        controls_review.append({
            "step_id": step.step_id,
            "control_id": control_id,
            "activity": step.detail.get("activity", ""),
            "control_types": step.binding.get("control_types", []),
            "status": live_status,
            "guidelines": step.detail.get("guidelines", []),
            "verdict": result.verdict if result else state.step_status[step.step_id],
        })

    objectives = {o.objective_id: o for o in config.objectives}
    technical_results: dict[str, Any] = {}
    for objective_id in sorted(set(list(objectives) +
                                   [s.detail.get("objective_id", "") for s in test_steps])):
        if not objective_id:
            continue
        steps_for_objective = []
        for step in sorted(test_steps, key=lambda s: s.step_id):
            if step.detail.get("objective_id") != objective_id:
                continue
            result = state.results.get(step.step_id)
            steps_for_objective.append({
                "step_id": step.step_id,
                "test_type_id": step.detail.get("test_type_id", ""),
                "module": f"{step.binding['module_name']}@{step.binding['module_version']}",
                "seed": step.seed,
                "status": state.step_status[step.step_id],
                "verdict": result.verdict if result else None,
                "reason": result.reason if result else None,
                "metrics": result.metrics if result else {},
                "artefact_digests": result.artefact_digests if result else [],
            })
        spec = objectives.get(objective_id)
        technical_results[objective_id] = {
            "priority": spec.priority.value if spec else None,
            "steps": steps_for_objective,
        }

    evidence = {
        "controls": [row["control_id"] for row in controls_review
                     if row["status"] in ("inspected", "accepted") and row["verdict"] == "pass"],
        "passed_tests": sorted(s.step_id for s in test_steps
                               if state.results.get(s.step_id)
                               and state.results[s.step_id].verdict == "pass"),
    }

    challenges: list[dict[str, Any]] = []
    for step_id, result in sorted(state.results.items()):
        if result.verdict in ("fail", "error"):
            challenges.append({"kind": "step", "step_id": step_id,
                               "verdict": result.verdict, "reason": result.reason})
    for step_id, status in sorted(state.step_status.items()):
        if status == "skipped":
            challenges.append({"kind": "skipped_step", "step_id": step_id,
                               "verdict": None, "reason": "ancestor failed"})
    for waiver in plan.waivers:
        challenges.append({"kind": "waived_gap", **waiver})
    if notes:
        challenges.append({"kind": "note", "author": principal.actor, "text": notes})

    sections = {
        "system_summary": {
            "sandbox_name": config.name,
            "system_name": config.system.system_name,
            "risk_class": config.system.risk_class.value,
            "domain_tag": config.system.domain_tag,
            "dimensions": sorted(d.value for d in config.system.dimensions),
            "objectives": {oid: spec.priority.value for oid, spec in sorted(objectives.items())},
        },
        "sandbox_plan": {
            "plan_id": plan.plan_id,
            "config_digest": plan.config_digest,
            "policy": state.policy,
            "step_count": len(plan.steps),
            "steps": [{"step_id": s.step_id, "kind": s.kind, "dimension": s.dimension}
                      for s in sorted(plan.steps, key=lambda s: s.step_id)],
            "waivers": plan.waivers,
        },
        "controls_review": controls_review,
        "technical_results": technical_results,
        "risk_mitigation_evidence": evidence,
        "remaining_challenges": challenges,
        "resource_summary": account(state, plan).to_data(),
        "audit_digest": head.to_data(),
    }

    report = ExitReport(
        report_id="report-" + uuid.uuid4().hex[:12],
        run_id=run_id,
        config_digest=state.config_digest,
        plan_id=plan.plan_id,
        generated=utc_now_iso(),
        sections=sections,
    )
    workspace.audit.append(principal.actor, "report.generated",
                           {"report_id": report.report_id, "run_id": run_id,
                            "audit_digest": head.to_data()})
    return report


def save_report(workspace: Workspace, report: ExitReport,
                audiences: tuple[str, ...] = AUDIENCES) -> Path:
    """Persist machine form first, then the human renderings."""
    run_dir = workspace.run_dir(report.run_id)
    machine_path = run_dir / "report.json"
    machine_path.write_text(
        json.dumps(report.to_data(), sort_keys=True, indent=1) + "\n", encoding="utf-8")
    workspace.store.put_record("report", report.run_id, report.to_data(), replace=True)
    for audience in audiences:
        (run_dir / f"report.{audience}.md").write_text(
            render_human(report, audience), encoding="utf-8")
    return machine_path


def load_report(workspace: Workspace, run_id: str) -> ExitReport:
    return ExitReport.from_data(workspace.store.get_record("report", run_id))


def verify_report_binding(workspace: Workspace, report: ExitReport) -> bool:
    head = ChainHead(**report.sections["audit_digest"])
    try:
        entries = workspace.audit.entries()
    except Exception:
        return False  # chain no longer even parses: binding cannot hold
    return verify_prefix(entries, head).ok


# --- human rendering ------------------------------------------------------------

_AUDIENCE_ORDER = {
    # regulators read controls and waivers first, experts metrics first,
    # innovators verdicts and open items first; nothing is ever omitted
    "regulator": ("controls_review", "remaining_challenges", "system_summary",
                  "sandbox_plan", "technical_results", "risk_mitigation_evidence",
                  "resource_summary", "audit_digest"),
    "expert": ("technical_results", "sandbox_plan", "resource_summary",
               "system_summary", "controls_review", "risk_mitigation_evidence",
               "remaining_challenges", "audit_digest"),
    "innovator": ("system_summary", "remaining_challenges", "technical_results",
                  "controls_review", "risk_mitigation_evidence", "sandbox_plan",
                  "resource_summary", "audit_digest"),
}

_SECTION_TITLES = {
    "system_summary": "System summary",
    "sandbox_plan": "Sandbox plan",
    "controls_review": "Controls review",
    "technical_results": "Technical results",
    "risk_mitigation_evidence": "Risk mitigation evidence",
    "remaining_challenges": "Remaining challenges",
    "resource_summary": "Resource summary",
    "audit_digest": "Audit digest",
}


def render_human(report: ExitReport, audience: str) -> str:
    if audience not in _AUDIENCE_ORDER:
        raise ReportError(f"unknown audience '{audience}'; use one of {AUDIENCES}")
    s = report.sections
    lines = [
        f"# Exit report {report.report_id}",
        "",
        f"- run: {report.run_id}",
        f"- plan: {report.plan_id}",
        f"- configuration digest: {report.config_digest}",
        f"- generated: {report.generated} (audience: {audience})",
        "",
    ]
    for section in _AUDIENCE_ORDER[audience]:
        lines.append(f"## {_SECTION_TITLES[section]}")
        lines.append("")
        renderer = _RENDERERS[section]
        lines.extend(renderer(s[section]))
        lines.append("")
    return "\n".join(lines)


def _render_system(data: dict[str, Any]) -> list[str]:
    lines = [
        f"- sandbox: {data['sandbox_name']}",
        f"- system under assessment: {data['system_name']}",
        f"- risk class: {data['risk_class']}",
        f"- domain: {data['domain_tag'] or '(none)'}",
        f"- dimensions: {', '.join(data['dimensions'])}",
    ]
    for objective_id, priority in data["objectives"].items():
        lines.append(f"- objective {objective_id} (priority {priority})")
    return lines


def _render_plan(data: dict[str, Any]) -> list[str]:
    lines = [f"- plan {data['plan_id']}",
             f"- {data['step_count']} steps, policy {data['policy']}"]
    for step in data["steps"]:
        lines.append(f"- {step['step_id']} [{step['kind']}, {step['dimension']}]")
    for waiver in data["waivers"]:
        lines.append(f"- WAIVED GAP: {waiver['objective_id']}: {waiver['reason']}")
    if not data["steps"]:
        lines.append("- (empty plan)")
    return lines


def _render_controls(rows: list[dict[str, Any]]) -> list[str]:
    if not rows:
        return ["- no controls declared"]
    lines = []
    for row in rows:
        guidelines = "; ".join(f"{g['source']} {g['clause']}".strip()
                               for g in row["guidelines"]) or "none"
        lines.append(f"- {row['control_id']} ({row['activity']}): status {row['status']}, "
                     f"check {row['verdict']}, guidelines: {guidelines}")
    return lines


def _render_results(data: dict[str, Any]) -> list[str]:
    if not data:
        return ["- no tests executed"]
    lines = []
    for objective_id, block in data.items():
        if not block["steps"]:
            lines.append(f"- {objective_id}: no tests executed")
            continue
        lines.append(f"- {objective_id} (priority {block['priority']})")
        for step in block["steps"]:
            verdict = step["verdict"] or step["status"]
            lines.append(f"  - {step['step_id']} via {step['module']} "
                         f"seed {step['seed']}: {verdict}")
            for name, value in sorted(step["metrics"].items()):
                lines.append(f"    - {step['step_id']} :: {name} = {value}")
    return lines


def _render_evidence(data: dict[str, Any]) -> list[str]:
    lines = []
    lines.append("- verified controls: " + (", ".join(data["controls"]) or "none"))
    lines.append("- passing tests: " + (", ".join(data["passed_tests"]) or "none"))
    return lines


def _render_challenges(rows: list[dict[str, Any]]) -> list[str]:
    if not rows:
        return ["- none recorded"]
    lines = []
    for row in rows:
        if row["kind"] == "step":
            lines.append(f"- step {row['step_id']} finished {row['verdict']}"
                         + (f" ({row['reason']})" if row.get("reason") else ""))
        elif row["kind"] == "skipped_step":
            lines.append(f"- step {row['step_id']} skipped: {row['reason']}")
        elif row["kind"] == "waived_gap":
            lines.append(f"- waived gap on {row['objective_id']}: {row['reason']}")
        else:
            lines.append(f"- note by {row['author']}: {row['text']}")
    return lines


def _render_resources(data: dict[str, Any]) -> list[str]:
    lines = [f"- total cpu seconds: {data['totals'].get('cpu_seconds', 0.0)}",
             f"- steps accounted: {int(data['totals'].get('steps', 0))}"]
    for executor, bucket in sorted(data["per_executor"].items()):
        lines.append(f"- executor {executor}: {bucket['cpu_seconds']}s over "
                     f"{int(bucket['steps'])} steps")
    if data["over_budget"]:
        lines.append("- over budget: " + ", ".join(data["over_budget"]))
    return lines


def _render_audit(data: dict[str, Any]) -> list[str]:
    return [f"- chain length {data['length']}, head {data['head_hash']}"]


_RENDERERS = {
    "system_summary": _render_system,
    "sandbox_plan": _render_plan,
    "controls_review": _render_controls,
    "technical_results": _render_results,
    "risk_mitigation_evidence": _render_evidence,
    "remaining_challenges": _render_challenges,
    "resource_summary": _render_resources,
    "audit_digest": _render_audit,
}


# --- feedback summary --------------------------------------------------------------


def summarize_feedback(workspace: Workspace, run_id: str) -> FeedbackSummary:
    """Per-objective rollup with worst-verdict ordering error > fail > pass."""
    state, plan = _load_run(workspace, run_id)
    config = parse(workspace.load_config_text(state.config_digest))
    per_objective: dict[str, dict[str, Any]] = {}
    for objective in config.objectives:
        per_objective[objective.objective_id] = {
            "worst_verdict": None, "headline_metrics": {}, "steps": 0}
    for step in plan.steps:
        if step.kind != TEST_STEP:
            continue
        objective_id = step.detail.get("objective_id", "")
        bucket = per_objective.setdefault(
            objective_id, {"worst_verdict": None, "headline_metrics": {}, "steps": 0})
        bucket["steps"] += 1
        result = state.results.get(step.step_id)
        verdict = result.verdict if result else None
        if verdict is not None:
            current = bucket["worst_verdict"]
            if current is None or _VERDICT_RANK[verdict] > _VERDICT_RANK[current]:
                bucket["worst_verdict"] = verdict
        if result:
            bucket["headline_metrics"].update(result.metrics)
    gaps = [dict(w) for w in plan.waivers]
    for objective_id, bucket in per_objective.items():
        if bucket["steps"] == 0 and not any(
                g.get("objective_id") == objective_id for g in gaps):
            gaps.append({"objective_id": objective_id, "reason": "no test steps planned"})
    return FeedbackSummary(per_objective, gaps)
