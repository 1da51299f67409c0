"""Plan execution: dispatch, plug-in protocol, events, accounting.

Steps run as separate OS processes, one per step, speaking a bit-exact
protocol: the engine writes a JSON job document to the plug-in's stdin and
closes it; the plug-in may emit line-delimited progress records on stdout
and must write ``result.json`` into its output directory before exiting 0.
Exit 0 means protocol-complete (the verdict may still be "fail"); any
nonzero exit is an infrastructure error.

Executors are either local or simulated remote nodes; the latter run with
injected latency and a distinct working directory whose outputs are copied
back, which exercises federation semantics (identical artefacts regardless
of placement) without real network transport.

Every event is appended to the workspace audit chain and to a per-run
chain, and the realized schedule always embeds the plan DAG.
"""

from __future__ import annotations

import json
import os
import shutil
import subprocess
import sys
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterator

import psutil

from .audit import AuditLog
from .catalogue import Catalogue, file_checksum
from .clock import utc_now_iso
from .dsl.model import ControlStatus, Zone
from .planner import CONTROL_STEP, ExecutionPlan, PlanStep, TEST_STEP, plan_hash, serialize_plan
from .rbac import Principal, zone_set
from .semver import Version
from .store import canonical_json, sha256_hex
from .workspace import Workspace

LOCAL = "local"
SIMULATED_REMOTE = "simulated_remote"

FAIL_FAST = "fail_fast"
CONTINUE = "continue"

PENDING = "pending"
RUNNING = "running"
DONE = "done"
FAILED = "failed"
SKIPPED = "skipped"

PASS = "pass"
FAIL = "fail"
ERROR = "error"

# error reason codes
REASON_TIMEOUT = "timeout"
REASON_BUDGET = "budget_exceeded"
REASON_PROTOCOL = "protocol_violation"
REASON_NONZERO_EXIT = "nonzero_exit"

WALL_CLOCK_MULTIPLIER = 4
_CPU_POLL_SECONDS = 0.05


class EngineError(Exception):
    pass


@dataclass(frozen=True)
class ExecutorDescriptor:
    executor_id: str
    kind: str = LOCAL
    capacity: int = 1
    latency_injection_ms: int = 0

    def __post_init__(self):
        if self.capacity < 1:
            raise EngineError(f"executor {self.executor_id}: capacity must be >= 1")
        if self.kind not in (LOCAL, SIMULATED_REMOTE):
            raise EngineError(f"executor {self.executor_id}: unknown kind '{self.kind}'")


def parse_executor_spec(spec: str) -> list[ExecutorDescriptor]:
    """`local:1,sim:3` -> one local executor and three simulated remote nodes."""
    executors: list[ExecutorDescriptor] = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        kind, _, count_text = item.partition(":")
        count = int(count_text) if count_text else 1
        if kind == "local":
            for i in range(count):
                executors.append(ExecutorDescriptor(f"local-{i}", LOCAL, capacity=1))
        elif kind == "sim":
            for i in range(count):
                executors.append(ExecutorDescriptor(f"sim-{i}", SIMULATED_REMOTE,
                                                    capacity=1, latency_injection_ms=25))
        else:
            raise EngineError(f"unknown executor kind '{kind}' (use local or sim)")
    if not executors:
        raise EngineError("executor spec names no executors")
    return executors


@dataclass
class StepResult:
    step_id: str
    verdict: str  # pass | fail | error
    metrics: dict[str, float] = field(default_factory=dict)
    artefact_digests: list[str] = field(default_factory=list)
    cpu_seconds_used: float = 0.0
    log_digest: str = ""
    reason: str | None = None

    def to_data(self) -> dict[str, Any]:
        return {
            "step_id": self.step_id,
            "verdict": self.verdict,
            "metrics": dict(sorted(self.metrics.items())),
            "artefact_digests": list(self.artefact_digests),
            "cpu_seconds_used": self.cpu_seconds_used,
            "log_digest": self.log_digest,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class EventRecord:
    sequence_no: int
    run_id: str
    kind: str  # run_started step_started step_progress step_finished run_finished
    timestamp: str
    step_id: str | None = None
    payload: dict[str, Any] = field(default_factory=dict)

    def to_data(self) -> dict[str, Any]:
        return {
            "sequence_no": self.sequence_no,
            "run_id": self.run_id,
            "kind": self.kind,
            "timestamp": self.timestamp,
            "step_id": self.step_id,
            "payload": self.payload,
        }


_EVENT_AUDIT_ACTIONS = {
    "run_started": "run.started",
    "step_started": "step.started",
    "step_progress": "step.progress",
    "step_finished": "step.finished",
    "run_finished": "run.finished",
}


class EventBus:
    """Totally ordered per-run event stream with live subscribers."""

    def __init__(self, run_id: str, events_path: Path, sinks: list[Callable[[EventRecord], None]]):
        self.run_id = run_id
        self.events_path = events_path
        self._sinks = sinks
        self._events: list[EventRecord] = []
        self._cond = threading.Condition()
        self._closed = False

    def emit(self, kind: str, step_id: str | None = None,
             payload: dict[str, Any] | None = None) -> EventRecord:
        with self._cond:
            event = EventRecord(
                sequence_no=len(self._events) + 1,
                run_id=self.run_id,
                kind=kind,
                timestamp=utc_now_iso(),
                step_id=step_id,
                payload=payload or {},
            )
            self._events.append(event)
            with open(self.events_path, "ab") as handle:
                handle.write((canonical_json(event.to_data()) + "\n").encode("utf-8"))
            for sink in self._sinks:
                sink(event)
            if kind == "run_finished":
                self._closed = True
            self._cond.notify_all()
            return event

    def events(self) -> list[EventRecord]:
        with self._cond:
            return list(self._events)

    def subscribe(self, from_sequence: int = 1) -> Iterator[EventRecord]:
        """Yield events in order starting at `from_sequence`; ends after run_finished."""
        next_index = max(from_sequence, 1) - 1
        while True:
            with self._cond:
                while next_index >= len(self._events) and not self._closed:
                    self._cond.wait(timeout=0.5)
                if next_index < len(self._events):
                    event = self._events[next_index]
                else:
                    return
            next_index += 1
            yield event
            if event.kind == "run_finished":
                return


@dataclass
class RunState:
    run_id: str
    plan_id: str
    config_digest: str
    policy: str
    step_status: dict[str, str]
    assignments: dict[str, str] = field(default_factory=dict)  # step_id -> executor_id
    results: dict[str, StepResult] = field(default_factory=dict)
    started: str = ""
    finished: str = ""

    def to_data(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "plan_id": self.plan_id,
            "config_digest": self.config_digest,
            "policy": self.policy,
            "step_status": dict(sorted(self.step_status.items())),
            "assignments": dict(sorted(self.assignments.items())),
            "results": {k: v.to_data() for k, v in sorted(self.results.items())},
            "started": self.started,
            "finished": self.finished,
        }


@dataclass
class ResourceReport:
    per_step: dict[str, dict[str, float]]
    per_executor: dict[str, dict[str, float]]
    totals: dict[str, float]
    over_budget: list[str]

    def to_data(self) -> dict[str, Any]:
        return {
            "per_step": self.per_step,
            "per_executor": self.per_executor,
            "totals": self.totals,
            "over_budget": list(self.over_budget),
        }


class Engine:
    def __init__(self, workspace: Workspace, catalogue: Catalogue | None = None):
        self.workspace = workspace
        self.catalogue = catalogue or Catalogue(workspace.store)
        self._buses: dict[str, EventBus] = {}
        self._live: dict[str, RunState] = {}
        self._registry_lock = threading.Lock()

    # -- public API ---------------------------------------------------------

    def bus_for(self, run_id: str) -> EventBus | None:
        with self._registry_lock:
            return self._buses.get(run_id)

    def live_state(self, run_id: str) -> RunState | None:
        with self._registry_lock:
            return self._live.get(run_id)

    def run(self, plan: ExecutionPlan, executors: list[ExecutorDescriptor],
            principal: Principal, policy: str = CONTINUE,
            run_id: str | None = None) -> RunState:
        if policy not in (FAIL_FAST, CONTINUE):
            raise EngineError(f"unknown failure policy '{policy}'")
        if not executors:
            raise EngineError("at least one executor is required")
        seen = set()
        for executor in executors:
            if executor.executor_id in seen:
                raise EngineError(f"duplicate executor id '{executor.executor_id}'")
            seen.add(executor.executor_id)
        bindings = self._verify_bindings(plan)
        for step in plan.steps:
            if step.executor_constraint and step.executor_constraint not in seen:
                raise EngineError(
                    f"step '{step.step_id}' is pinned to unknown executor "
                    f"'{step.executor_constraint}'")

        run_id = run_id or "run-" + uuid.uuid4().hex[:12]
        run_dir = self.workspace.run_dir(run_id)
        run_dir.mkdir(parents=True, exist_ok=False)
        (run_dir / "plan.json").write_text(serialize_plan(plan), encoding="utf-8")
        (run_dir / "plan.sha256").write_text(plan.plan_id + "\n", encoding="utf-8")

        run_audit = AuditLog(run_dir / "audit.log")

        def audit_sink(event: EventRecord) -> None:
            action = _EVENT_AUDIT_ACTIONS[event.kind]
            payload = event.to_data()
            self.workspace.audit.append(principal.actor, action, payload)
            run_audit.append(principal.actor, action, payload)

        bus = EventBus(run_id, run_dir / "events.log", [audit_sink])
        state = RunState(
            run_id=run_id,
            plan_id=plan.plan_id,
            config_digest=plan.config_digest,
            policy=policy,
            step_status={s.step_id: PENDING for s in plan.steps},
            started=utc_now_iso(),
        )
        with self._registry_lock:
            self._buses[run_id] = bus
            self._live[run_id] = state
        self.workspace.store.put_record("run", run_id, state.to_data(), replace=True)

        try:
            self._execute(plan, executors, policy, principal, state, bus, bindings, run_dir)
        finally:
            state.finished = utc_now_iso()
            self.workspace.store.put_record("run", run_id, state.to_data(), replace=True)
        return state

    # -- internals -------------------------------------------------------------

    def _verify_bindings(self, plan: ExecutionPlan) -> dict[str, Path]:
        """Checksum-verify every test binding; refuse the run on any mismatch."""
        if plan.plan_id != plan_hash(plan):
            raise EngineError("plan_id does not match plan content; refusing to run")
        entrypoints: dict[str, Path] = {}
        for step in plan.steps:
            if step.kind != TEST_STEP:
                continue
            name = step.binding["module_name"]
            version = step.binding["module_version"]
            descriptor = self.catalogue.get(name, Version.parse(version))
            if descriptor.checksum != step.binding["checksum"]:
                raise EngineError(
                    f"checksum mismatch for step '{step.step_id}': plan pins "
                    f"{step.binding['checksum']}, catalogue has {descriptor.checksum}")
            entrypoint = Path(descriptor.entrypoint)
            if not entrypoint.exists():
                raise EngineError(
                    f"entrypoint for '{name}@{version}' not found: {entrypoint}")
            actual = file_checksum(entrypoint)
            if actual != descriptor.checksum:
                raise EngineError(
                    f"entrypoint for '{name}@{version}' hashes to {actual}, "
                    f"catalogue pins {descriptor.checksum}")
            entrypoints[step.step_id] = entrypoint
        return entrypoints

    def _execute(self, plan: ExecutionPlan, executors: list[ExecutorDescriptor],
                 policy: str, principal: Principal, state: RunState, bus: EventBus,
                 entrypoints: dict[str, Path], run_dir: Path) -> None:
        lock = threading.Condition()
        blockers: dict[str, set[str]] = {s.step_id: set() for s in plan.steps}
        dependents: dict[str, list[str]] = {s.step_id: [] for s in plan.steps}
        for before, after in plan.edges:
            blockers[after].add(before)
            dependents[before].append(after)
        free: dict[str, int] = {e.executor_id: e.capacity for e in executors}
        by_id = {e.executor_id: e for e in executors}
        steps = {s.step_id: s for s in plan.steps}
        cancelled = False
        workers: list[threading.Thread] = []

        bus.emit("run_started", payload={
            "plan_id": plan.plan_id,
            "policy": policy,
            "executors": [e.executor_id for e in sorted(executors, key=lambda x: x.executor_id)],
            "waivers": plan.waivers,
        })

        def ready_steps() -> list[str]:
            return sorted(
                step_id for step_id, status in state.step_status.items()
                if status == PENDING and not blockers[step_id] and not cancelled)

        def pick_executor(step: PlanStep) -> str | None:
            candidates = sorted(e for e, slots in free.items() if slots > 0)
            if step.executor_constraint:
                return step.executor_constraint if free.get(step.executor_constraint, 0) > 0 else None
            return candidates[0] if candidates else None

        def skip_descendants(step_id: str) -> None:
            frontier = [step_id]
            while frontier:
                node = frontier.pop()
                for dependent in dependents[node]:
                    if state.step_status[dependent] == PENDING:
                        state.step_status[dependent] = SKIPPED
                        frontier.append(dependent)

        def worker(step: PlanStep, executor: ExecutorDescriptor) -> None:
            nonlocal cancelled
            bus.emit("step_started", step.step_id, {"executor_id": executor.executor_id})
            result = self._execute_step(step, executor, entrypoints.get(step.step_id),
                                        run_dir, bus, principal)
            with lock:
                state.results[step.step_id] = result
                state.step_status[step.step_id] = DONE if result.verdict == PASS else FAILED
                free[executor.executor_id] += 1
                if result.verdict != PASS:
                    if policy == FAIL_FAST:
                        cancelled = True
                        for sid, status in state.step_status.items():
                            if status == PENDING:
                                state.step_status[sid] = SKIPPED
                    else:
                        skip_descendants(step.step_id)
                else:
                    for dependent in dependents[step.step_id]:
                        blockers[dependent].discard(step.step_id)
                lock.notify_all()
            bus.emit("step_finished", step.step_id, result.to_data())

        with lock:
            while True:
                active = [s for s, status in state.step_status.items() if status == RUNNING]
                launchable = []
                for step_id in ready_steps():
                    executor_id = pick_executor(steps[step_id])
                    if executor_id is not None:
                        launchable.append((step_id, executor_id))
                        break
                if launchable:
                    step_id, executor_id = launchable[0]
                    state.step_status[step_id] = RUNNING
                    state.assignments[step_id] = executor_id
                    free[executor_id] -= 1
                    thread = threading.Thread(
                        target=worker, args=(steps[step_id], by_id[executor_id]),
                        name=f"step-{step_id}", daemon=True)
                    workers.append(thread)
                    thread.start()
                    continue
                if not active and not ready_steps():
                    break
                lock.wait(timeout=0.5)

        for thread in workers:
            thread.join()

        summary = {
            "statuses": dict(sorted(state.step_status.items())),
            "verdicts": {sid: r.verdict for sid, r in sorted(state.results.items())},
        }
        bus.emit("run_finished", payload=summary)

    # -- single step -----------------------------------------------------------

    def _execute_step(self, step: PlanStep, executor: ExecutorDescriptor,
                      entrypoint: Path | None, run_dir: Path, bus: EventBus,
                      principal: Principal) -> StepResult:
        if executor.latency_injection_ms:
            time.sleep(executor.latency_injection_ms / 1000.0)
        step_dir = run_dir / "steps" / step.step_id
        step_dir.mkdir(parents=True, exist_ok=True)
        if step.kind == CONTROL_STEP:
            return self._execute_control(step, step_dir)
        return self._execute_plugin(step, executor, entrypoint, step_dir, bus, principal)

    def _execute_control(self, step: PlanStep, step_dir: Path) -> StepResult:
        control_id = step.binding["control_id"]
        status = step.detail.get("status", ControlStatus.DECLARED.value)
        try:
            record = self.workspace.store.get_record("control", control_id)
            status = record.get("status", status)
        except Exception:
            pass  # no live record: use the status pinned at plan time
        flagged = bool(step.detail.get("flagged"))
        ok = not flagged and status != ControlStatus.REJECTED.value
        result = StepResult(
            step_id=step.step_id,
            verdict=PASS if ok else FAIL,
            metrics={"status_ok": 1.0 if ok else 0.0},
            reason=None if ok else (step.detail.get("reason") or f"control status is {status}"),
        )
        (step_dir / "result.json").write_text(
            canonical_json({"verdict": result.verdict, "metrics": result.metrics,
                            "artefacts": [], "control_status": status}) + "\n",
            encoding="utf-8")
        return result

    def _execute_plugin(self, step: PlanStep, executor: ExecutorDescriptor,
                        entrypoint: Path | None, step_dir: Path, bus: EventBus,
                        principal: Principal) -> StepResult:
        assert entrypoint is not None
        # simulated remote nodes work in their own directory; outputs are
        # copied back afterwards, standing in for artefact transfer
        if executor.kind == SIMULATED_REMOTE:
            work_dir = step_dir / "remote" / executor.executor_id
        else:
            work_dir = step_dir
        work_dir.mkdir(parents=True, exist_ok=True)

        mounted, input_zones = self._mount_inputs(step, step_dir, principal)
        job = {
            "step_id": step.step_id,
            "seed": step.seed,
            "inputs": mounted,
            "output_dir": str(work_dir),
            "budget": step.resource_budget,
        }
        (step_dir / "job.json").write_text(canonical_json(job) + "\n", encoding="utf-8")

        command = [sys.executable, str(entrypoint)] if entrypoint.suffix == ".py" \
            else [str(entrypoint)]
        log_path = step_dir / "plugin.log"
        cpu_budget = float(step.resource_budget["cpu_seconds"])
        wall_limit = WALL_CLOCK_MULTIPLIER * cpu_budget

        cpu_used = 0.0
        reason: str | None = None
        with open(log_path, "wb") as log_handle:
            process = subprocess.Popen(
                command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=log_handle, cwd=str(work_dir))
            try:
                process.stdin.write(canonical_json(job).encode("utf-8"))
                process.stdin.close()
            except BrokenPipeError:
                pass

            progress_lines: list[bytes] = []

            def read_progress() -> None:
                for line in process.stdout:
                    progress_lines.append(line)
                    try:
                        record = json.loads(line)
                        bus.emit("step_progress", step.step_id, {
                            "progress": float(record.get("progress", 0.0)),
                            "message": str(record.get("message", "")),
                        })
                    except (ValueError, TypeError):
                        pass  # non-protocol chatter; kept in the log only

            reader = threading.Thread(target=read_progress, daemon=True)
            reader.start()

            proc_info = psutil.Process(process.pid)
            deadline = time.monotonic() + wall_limit
            while True:
                exited = process.poll() is not None
                if not exited:
                    try:
                        times = proc_info.cpu_times()
                        cpu_used = times.user + times.system
                    except psutil.Error:
                        pass
                    if cpu_used > cpu_budget:
                        process.kill()
                        reason = REASON_BUDGET
                        break
                    if time.monotonic() > deadline:
                        process.kill()
                        reason = REASON_TIMEOUT
                        break
                    time.sleep(_CPU_POLL_SECONDS)
                    continue
                break
            returncode = process.wait()
            reader.join(timeout=5)
            log_handle.write(b"".join(progress_lines))

        log_digest = sha256_hex(log_path.read_bytes())
        if reason is not None:
            return StepResult(step.step_id, ERROR, cpu_seconds_used=round(cpu_used, 6),
                              log_digest=log_digest, reason=reason)
        if returncode != 0:
            return StepResult(step.step_id, ERROR, cpu_seconds_used=round(cpu_used, 6),
                              log_digest=log_digest, reason=REASON_NONZERO_EXIT)

        result = self._ingest_result(step, work_dir, step_dir, input_zones,
                                     executor, cpu_used, log_digest)
        return result

    def _mount_inputs(self, step: PlanStep, step_dir: Path,
                      principal: Principal) -> tuple[dict[str, str], set[Zone]]:
        mounted: dict[str, str] = {}
        zones_used: set[Zone] = set()
        if not step.inputs:
            return mounted, zones_used
        inputs_dir = step_dir / "inputs"
        inputs_dir.mkdir(exist_ok=True)
        allowed = zone_set(principal)
        # prefer the least restricted zone a digest is available from
        preference = [Zone.SHARED, Zone.REGULATORY, Zone.CONFIDENTIAL]
        for key, digest in sorted(step.inputs.items()):
            refs = {ref.zone: ref for ref in self.workspace.store.find_artefact(digest)}
            chosen = next((refs[z] for z in preference if z in refs and z in allowed), None)
            if chosen is None:
                raise EngineError(
                    f"input '{key}' of step '{step.step_id}': artefact {digest} not "
                    "available in any zone readable by the run principal")
            data = self.workspace.store.get_artefact(chosen, allowed)
            path = inputs_dir / digest
            if not path.exists():
                path.write_bytes(data)
            mounted[digest] = str(path)
            zones_used.add(chosen.zone)
        return mounted, zones_used

    def _ingest_result(self, step: PlanStep, work_dir: Path, step_dir: Path,
                       input_zones: set[Zone], executor: ExecutorDescriptor,
                       cpu_used: float, log_digest: str) -> StepResult:
        result_path = work_dir / "result.json"
        if not result_path.exists():
            return StepResult(step.step_id, ERROR, cpu_seconds_used=round(cpu_used, 6),
                              log_digest=log_digest, reason=REASON_PROTOCOL)
        try:
            document = json.loads(result_path.read_text(encoding="utf-8"))
            verdict = document["verdict"]
            metrics = document.get("metrics", {})
            artefacts = document.get("artefacts", [])
            if verdict not in (PASS, FAIL):
                raise ValueError(f"verdict must be pass or fail, got {verdict!r}")
            if not isinstance(metrics, dict) or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool)
                    for v in metrics.values()):
                raise ValueError("metrics must be an object of numbers")
            if not isinstance(artefacts, list) or not all(isinstance(a, str) for a in artefacts):
                raise ValueError("artefacts must be a list of relative paths")
        except (ValueError, KeyError, TypeError):
            return StepResult(step.step_id, ERROR, cpu_seconds_used=round(cpu_used, 6),
                              log_digest=log_digest, reason=REASON_PROTOCOL)

        # derived outputs inherit the most sensitive input zone
        output_zone = Zone.CONFIDENTIAL if Zone.CONFIDENTIAL in input_zones else Zone.SHARED
        digests: list[str] = []
        total_bytes = 0
        for relative in artefacts:
            artefact_path = work_dir / relative
            if not artefact_path.is_file():
                return StepResult(step.step_id, ERROR, cpu_seconds_used=round(cpu_used, 6),
                                  log_digest=log_digest, reason=REASON_PROTOCOL)
            data = artefact_path.read_bytes()
            total_bytes += len(data)
            if total_bytes > step.resource_budget["storage_bytes"]:
                return StepResult(step.step_id, ERROR, cpu_seconds_used=round(cpu_used, 6),
                                  log_digest=log_digest, reason=REASON_BUDGET)
            ref = self.workspace.store.put_artefact(data, output_zone, media_hint=relative)
            digests.append(ref.digest)

        # copy remote outputs back into the canonical step directory
        if work_dir != step_dir:
            shutil.copy2(result_path, step_dir / "result.json")
            for relative in artefacts:
                target = step_dir / relative
                target.parent.mkdir(parents=True, exist_ok=True)
                shutil.copy2(work_dir / relative, target)

        return StepResult(
            step_id=step.step_id,
            verdict=verdict,
            metrics={k: float(v) for k, v in metrics.items()},
            artefact_digests=sorted(digests),
            cpu_seconds_used=round(cpu_used, 6),
            log_digest=log_digest,
        )


def account(state: RunState, plan: ExecutionPlan) -> ResourceReport:
    """Totals per executor and per step; flags steps that exceeded budget."""
    per_step: dict[str, dict[str, float]] = {}
    per_executor: dict[str, dict[str, float]] = {}
    totals = {"cpu_seconds": 0.0, "steps": 0.0}
    over: list[str] = []
    budgets = {s.step_id: s.resource_budget for s in plan.steps}
    for step_id, result in sorted(state.results.items()):
        per_step[step_id] = {"cpu_seconds": result.cpu_seconds_used}
        totals["cpu_seconds"] += result.cpu_seconds_used
        totals["steps"] += 1
        executor = state.assignments.get(step_id, "unassigned")
        bucket = per_executor.setdefault(executor, {"cpu_seconds": 0.0, "steps": 0.0})
        bucket["cpu_seconds"] += result.cpu_seconds_used
        bucket["steps"] += 1
        budget = budgets.get(step_id, {})
        if result.reason == REASON_BUDGET or (
                budget and result.cpu_seconds_used > budget["cpu_seconds"]):
            over.append(step_id)
    totals["cpu_seconds"] = round(totals["cpu_seconds"], 6)
    for bucket in per_executor.values():
        bucket["cpu_seconds"] = round(bucket["cpu_seconds"], 6)
    return ResourceReport(per_step, per_executor, totals, over)
