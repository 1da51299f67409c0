"""Single command-line entrypoint (`sbx`) tying the workflow together.

Exit codes are stable: 0 success, 1 validation or diagnostic failure,
2 usage or permission error, 3 runtime/step failure, 4 audit verification
failure.  Data goes to stdout, diagnostics to stderr; `--output json`
switches read commands to machine output, and the text output keeps stable
ordering so it can be golden-tested.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dsl
from .audit import export_chain, import_chain, verify_file
from .catalogue import Catalogue, CatalogueError, ModuleDescriptor, Requirement, ResolutionError
from .dsl import ParseError, canonicalize, parse, validate
from .engine import Engine, EngineError, parse_executor_spec
from .mapping import MappingError, default_mapping_table, load_mapping_table
from .pipeline import build_plan
from .planner import ExecutionPlan, PlanError
from .rbac import Principal
from .semver import MethodQuery, VersionError
from .store import NotFoundError
from .triage import TriageError, classify, default_triage_document, load_answers, load_triage_document
from .workspace import Workspace, WorkspaceError

OK = 0
DIAGNOSTIC_FAILURE = 1
USAGE_ERROR = 2
RUNTIME_FAILURE = 3
AUDIT_FAILURE = 4

DEFAULT_PRINCIPAL = "expert-1"


class _PermissionDenied(Exception):
    pass


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


def main(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else OK
    if not hasattr(args, "handler"):
        parser.print_help(sys.stderr)
        return USAGE_ERROR
    try:
        return args.handler(args)
    except _PermissionDenied:
        return USAGE_ERROR
    except (WorkspaceError, FileNotFoundError, NotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return DIAGNOSTIC_FAILURE
    except (TriageError, MappingError, VersionError, CatalogueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DIAGNOSTIC_FAILURE
    except PlanError as exc:
        print(f"plan error: {exc}", file=sys.stderr)
        return DIAGNOSTIC_FAILURE
    except EngineError as exc:
        print(f"run error: {exc}", file=sys.stderr)
        return RUNTIME_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbx",
        description="Assemble, execute, audit and report on assessment sandbox runs.")
    parser.add_argument("--workspace", help="workspace directory (default: $SBX_WORKSPACE)")
    parser.add_argument("--principal", default=DEFAULT_PRINCIPAL,
                        help=f"acting principal id (default: {DEFAULT_PRINCIPAL})")
    parser.add_argument("--output", choices=("json", "text"), default="text",
                        help="output format for read commands")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("triage", help="classify a self-assessment answer file")
    p.add_argument("answers", help="answer document (.sbx)")
    p.add_argument("--rules", help="questionnaire+rules document (default: bundled)")
    p.set_defaults(handler=cmd_triage)

    p = sub.add_parser("validate", help="parse and validate a configuration")
    p.add_argument("config", help="configuration file (.sbx)")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("plan", help="assemble an execution plan from a configuration")
    p.add_argument("config", help="configuration file (.sbx)")
    p.add_argument("--mapping", help="mapping table document (default: bundled)")
    p.add_argument("--allow-gaps", action="store_true",
                   help="waive coverage gaps instead of failing")
    p.set_defaults(handler=cmd_plan)

    p = sub.add_parser("run", help="execute a previously assembled plan")
    p.add_argument("plan", help="plan id or path to a plan.json")
    p.add_argument("--executors", default="local:1",
                   help="executor spec, e.g. local:2 or sim:3 (default: local:1)")
    p.add_argument("--policy", choices=("continue", "fail_fast"), default="continue")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("report", help="generate the exit report for a finished run")
    p.add_argument("run_id")
    p.add_argument("--audience", choices=("innovator", "expert", "regulator"),
                   default="innovator")
    p.add_argument("--notes", help="file with free-text remaining-challenge notes")
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("audit", help="audit chain operations")
    audit_sub = p.add_subparsers(dest="audit_command")
    v = audit_sub.add_parser("verify", help="verify the workspace chain or an export")
    v.add_argument("file", nargs="?", help="chain or export file (default: workspace chain)")
    v.set_defaults(handler=cmd_audit_verify)
    e = audit_sub.add_parser("export", help="export the workspace chain")
    e.add_argument("--start", type=int, default=0)
    e.add_argument("--end", type=int, default=None)
    e.set_defaults(handler=cmd_audit_export)

    p = sub.add_parser("catalogue", help="assessment module catalogue")
    cat_sub = p.add_subparsers(dest="catalogue_command")
    a = cat_sub.add_parser("add", help="register modules/experts from a JSON document")
    a.add_argument("file")
    a.set_defaults(handler=cmd_catalogue_add)
    l = cat_sub.add_parser("list", help="list registered modules and experts")
    l.set_defaults(handler=cmd_catalogue_list)
    r = cat_sub.add_parser("resolve", help="resolve capability requirements")
    r.add_argument("requirements", nargs="+", metavar="capability@range")
    r.set_defaults(handler=cmd_catalogue_resolve)
    s = cat_sub.add_parser("seed", help="register the bundled reference modules")
    s.set_defaults(handler=cmd_catalogue_seed)

    p = sub.add_parser("serve", help="serve the workspace HTTP API")
    p.add_argument("--listen", default="127.0.0.1:8642", help="address:port")
    p.add_argument("--with-ui", action="store_true", help="also serve the dashboard build")
    p.add_argument("--ui-dir", help="dashboard build directory (default: ./frontend/dist)")
    p.set_defaults(handler=cmd_serve)

    p = sub.add_parser("diff", help="structural diff between two configurations")
    p.add_argument("old")
    p.add_argument("new")
    p.set_defaults(handler=cmd_diff)

    return parser


# --- helpers ---------------------------------------------------------------------


def _workspace(args) -> Workspace:
    return Workspace.open(args.workspace)


def _authorize(workspace: Workspace, args, action: str) -> Principal:
    principal = workspace.principal(args.principal)
    decision = workspace.check(principal, action)
    if not decision:
        print(f"permission denied for principal '{args.principal}': {decision.reason}",
              file=sys.stderr)
        raise _PermissionDenied(decision.reason)
    assert principal is not None
    return principal


def _emit(args, data, text_lines) -> None:
    if args.output == "json":
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _mapping_table(args):
    if getattr(args, "mapping", None):
        return load_mapping_table(_read(args.mapping))
    return default_mapping_table()


# --- command handlers ----------------------------------------------------------------


def cmd_triage(args) -> int:
    if args.rules:
        questionnaire, rules = load_triage_document(_read(args.rules))
    else:
        questionnaire, rules = default_triage_document()
    answers = load_answers(_read(args.answers))
    outcome = classify(answers, questionnaire, rules)
    data = outcome.to_data()
    _emit(args, data, [
        f"risk class: {data['risk_class']}",
        "routes: " + ", ".join(data["routes"]),
        "fired rules: " + (", ".join(data["rationale"]) or "(none)"),
        f"notice: this outcome is {data['notice']}",
    ])
    return OK


def cmd_validate(args) -> int:
    workspace = _workspace(args)
    _authorize(workspace, args, "validate_config")
    try:
        doc = parse(_read(args.config))
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return DIAGNOSTIC_FAILURE
    report = validate(doc)
    data = report.to_data()
    lines = [f"{d['code']} {d['severity']} {d['line']}:{d['column']} {d['message']}"
             for d in data["diagnostics"]]
    lines.append("ok" if data["ok"] else "invalid")
    _emit(args, data, lines)
    return OK if report.ok else DIAGNOSTIC_FAILURE


def cmd_plan(args) -> int:
    workspace = _workspace(args)
    principal = _authorize(workspace, args, "assemble_plan")
    doc = parse(_read(args.config))
    if args.allow_gaps:
        doc.allow_gaps = True
    report = validate(doc)
    if not report.ok:
        for diagnostic in report.diagnostics:
            print(str(diagnostic), file=sys.stderr)
        return DIAGNOSTIC_FAILURE

    canonical = canonicalize(doc)
    digest = workspace.save_config(canonical, doc.name)
    workspace.seed_controls(digest, [
        {"control_id": c.control_id, "activity": c.activity, "status": c.status.value}
        for c in doc.controls])
    workspace.audit.append(principal.actor, "config.submitted",
                           {"config_digest": digest, "name": doc.name, "via": "cli"})

    catalogue = Catalogue(workspace.store)
    plan = build_plan(doc, _mapping_table(args), catalogue)
    workspace.store.put_record("plan", plan.plan_id, plan.to_data())
    workspace.audit.append(principal.actor, "plan.assembled",
                           {"plan_id": plan.plan_id, "config_digest": digest,
                            "steps": len(plan.steps), "waivers": plan.waivers})
    _emit(args, plan.to_data(), [
        f"plan_id: {plan.plan_id}",
        f"config_digest: {digest}",
        f"steps: {len(plan.steps)}",
        *(f"- {s.step_id} [{s.kind}]" for s in sorted(plan.steps, key=lambda s: s.step_id)),
        *(f"- WAIVED: {w['objective_id']}: {w['reason']}" for w in plan.waivers),
    ])
    return OK


def cmd_run(args) -> int:
    workspace = _workspace(args)
    principal = _authorize(workspace, args, "start_run")
    plan_ref = args.plan
    if Path(plan_ref).exists():
        plan = ExecutionPlan.from_data(json.loads(_read(plan_ref)))
    else:
        plan = ExecutionPlan.from_data(workspace.store.get_record("plan", plan_ref))
    engine = Engine(workspace)
    state = engine.run(plan, parse_executor_spec(args.executors), principal,
                       policy=args.policy)
    data = state.to_data()
    failed = [sid for sid, status in state.step_status.items()
              if status in ("failed", "skipped")]
    _emit(args, data, [
        f"run_id: {state.run_id}",
        *(f"- {sid}: {status}" for sid, status in sorted(state.step_status.items())),
    ])
    return OK if not failed else RUNTIME_FAILURE


def cmd_report(args) -> int:
    from .report import generate, render_human, save_report

    workspace = _workspace(args)
    principal = _authorize(workspace, args, "generate_report")
    notes = _read(args.notes) if args.notes else None
    try:
        report = generate(workspace, principal, args.run_id, notes=notes)
    except Exception as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return RUNTIME_FAILURE
    save_report(workspace, report)
    if args.output == "json":
        print(json.dumps(report.to_data(), indent=2, sort_keys=True))
    else:
        print(render_human(report, args.audience))
    return OK


def cmd_audit_verify(args) -> int:
    workspace = _workspace(args)
    _authorize(workspace, args, "export_audit")
    if args.file:
        text = _read(args.file)
        if '"chain_head"' in text or '"continuity"' in text:
            _, verdict = import_chain(text)
        else:
            verdict = verify_file(Path(args.file))
    else:
        verdict = workspace.audit.verify()
    data = verdict.to_data()
    if verdict.ok:
        _emit(args, data, ["ok"])
        return OK
    _emit(args, data, [f"broken_at: {verdict.broken_at} reason: {verdict.reason}"])
    return AUDIT_FAILURE


def cmd_audit_export(args) -> int:
    workspace = _workspace(args)
    principal = _authorize(workspace, args, "export_audit")
    text = export_chain(workspace.audit.entries(), start=args.start, end=args.end)
    workspace.audit.append(principal.actor, "audit.exported",
                           {"start": args.start, "end": args.end})
    sys.stdout.write(text)
    return OK


def cmd_catalogue_add(args) -> int:
    workspace = _workspace(args)
    principal = _authorize(workspace, args, "register_module")
    catalogue = Catalogue(workspace.store)
    data = json.loads(_read(args.file))
    if "metadata_schema_version" in data:
        count = catalogue.import_data(data)
    else:
        catalogue.register(ModuleDescriptor.from_data(data))
        count = 1
    workspace.audit.append(principal.actor, "module.registered",
                           {"file": args.file, "count": count})
    _emit(args, {"registered": count}, [f"registered {count} records"])
    return OK


def cmd_catalogue_seed(args) -> int:
    from .plugins import seed_reference_catalogue

    workspace = _workspace(args)
    principal = _authorize(workspace, args, "register_module")
    catalogue = Catalogue(workspace.store)
    ids = seed_reference_catalogue(catalogue)
    workspace.audit.append(principal.actor, "module.registered",
                           {"via": "seed", "ids": ids})
    _emit(args, {"registered": ids}, [f"registered: {', '.join(ids)}"])
    return OK


def cmd_catalogue_list(args) -> int:
    workspace = _workspace(args)
    catalogue = Catalogue(workspace.store)
    data = catalogue.export_data()
    lines = []
    for module in data["modules"]:
        lines.append(f"{module['name']}@{module['version']} "
                     f"provides {', '.join(module['provides'])} "
                     f"[{module['dimension']}] checksum {module['checksum'][:12]}…")
    for expert in data["experts"]:
        lines.append(f"expert {expert['expert_id']}: "
                     f"{', '.join(expert['operable_capabilities'])}")
    _emit(args, data, lines or ["(catalogue empty)"])
    return OK


def cmd_catalogue_resolve(args) -> int:
    workspace = _workspace(args)
    catalogue = Catalogue(workspace.store)
    roots = []
    for text in args.requirements:
        query = MethodQuery.parse(text)
        roots.append(Requirement(query.capability, query.range))
    try:
        resolution = catalogue.resolve(roots)
    except ResolutionError as exc:
        print(f"resolution error: {exc}", file=sys.stderr)
        return DIAGNOSTIC_FAILURE
    data = resolution.to_data()
    lines = [f"{cap} -> {b['name']}@{b['version']}"
             for cap, b in data["bindings"].items()]
    lines.append("order: " + " -> ".join(data["order"]))
    _emit(args, data, lines)
    return OK


def cmd_serve(args) -> int:
    from .service import serve

    workspace = _workspace(args)
    host, _, port_text = args.listen.rpartition(":")
    ui_dir = None
    if args.with_ui:
        ui_dir = Path(args.ui_dir) if args.ui_dir else Path.cwd() / "frontend" / "dist"
    serve(workspace, host or "127.0.0.1", int(port_text), ui_dir=ui_dir)
    return OK


def cmd_diff(args) -> int:
    old = parse(_read(args.old))
    new = parse(_read(args.new))
    for name, doc in (("old", old), ("new", new)):
        report = validate(doc)
        if not report.ok:
            for diagnostic in report.diagnostics:
                print(f"{name}: {diagnostic}", file=sys.stderr)
            return DIAGNOSTIC_FAILURE
    changes = dsl.diff(old, new)
    data = [c.to_data() for c in changes]
    lines = [f"{c.path}: {c.kind}" + (
        f" ({json.dumps(c.before)} -> {json.dumps(c.after)})" if c.kind == "modified" else "")
        for c in changes]
    _emit(args, data, lines or ["(no changes)"])
    return OK


if __name__ == "__main__":
    entrypoint()
